//! Running mean and variance.

/// Welford accumulator. The mean of a constant sequence is that constant
/// exactly and its variance exactly zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance with divisor `count - 1`; zero below two values.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Welford {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut w = Welford::new();
        for x in iter {
            w.push(x);
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sequence_is_exact() {
        let w: Welford = std::iter::repeat_n(0.1, 1000).collect();
        assert_eq!(w.mean(), 0.1);
        assert_eq!(w.variance(), 0.0);
    }

    #[test]
    fn two_values() {
        let w: Welford = [1.0, 3.0].into_iter().collect();
        assert_eq!(w.mean(), 2.0);
        assert_eq!(w.variance(), 2.0);
        assert_eq!(w.std_error(), 1.0);
    }
}
