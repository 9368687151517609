//! Regularly varying increment laws.
//!
//! The shifted Pareto law `P(Z > x) = (1 + x)^(-alpha)` on `[0, inf)` is the
//! only concrete family. The tail is evaluated as `exp(log_tail(x))` so that
//! weights accumulated in log space reproduce `tail` bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::rng::UniformStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailKind {
    /// `P(Z > x) = (1 + x)^(-alpha)` for `x >= 0`.
    ParetoShifted,
}

/// Increment law with regular-variation index `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeavyTailDistribution {
    alpha: f64,
    kind: TailKind,
}

impl HeavyTailDistribution {
    pub fn pareto(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha.is_finite() {
            Ok(Self {
                alpha,
                kind: TailKind::ParetoShifted,
            })
        } else {
            Err(Error::Domain {
                what: "alpha",
                value: alpha,
                domain: "(0, inf)",
            })
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kind(&self) -> TailKind {
        self.kind
    }

    /// `ln P(Z > x)`; zero for `x < 0`.
    #[inline]
    pub fn log_tail(&self, x: f64) -> f64 {
        match self.kind {
            TailKind::ParetoShifted => {
                if x < 0.0 {
                    0.0
                } else {
                    -self.alpha * x.ln_1p()
                }
            }
        }
    }

    /// `P(Z > x)`. Equals 1 on the negative half-line.
    #[inline]
    pub fn tail(&self, x: f64) -> f64 {
        self.log_tail(x).exp()
    }

    /// `ln f(x)`, `-inf` off the support.
    #[inline]
    pub fn log_density(&self, x: f64) -> f64 {
        match self.kind {
            TailKind::ParetoShifted => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    self.alpha.ln() - (self.alpha + 1.0) * x.ln_1p()
                }
            }
        }
    }

    #[inline]
    pub fn density(&self, x: f64) -> f64 {
        match self.kind {
            TailKind::ParetoShifted => {
                if x < 0.0 {
                    0.0
                } else {
                    self.alpha * (1.0 + x).powf(-self.alpha - 1.0)
                }
            }
        }
    }

    /// The `p`-quantile, `x` with `tail(x) = 1 - p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_probability("p", p)?;
        Ok(self.inverse_cdf(p))
    }

    /// Quantile for `u` in `[0, 1)` without domain checks; `inverse_cdf(0) = 0`.
    #[inline]
    pub(crate) fn inverse_cdf(&self, u: f64) -> f64 {
        match self.kind {
            TailKind::ParetoShifted => (-(-u).ln_1p() / self.alpha).exp_m1(),
        }
    }

    /// Inverse-transform draw: one uniform per call.
    #[inline]
    pub fn sample<S: UniformStream + ?Sized>(&self, rng: &mut S) -> f64 {
        self.inverse_cdf(rng.next_uniform())
    }

    /// Draw from the law conditioned on `Z > t`, using one uniform `u`.
    ///
    /// For `t < 0` this is the unconditional law.
    #[inline]
    pub(crate) fn conditional_above(&self, t: f64, u: f64) -> f64 {
        if t < 0.0 {
            return self.inverse_cdf(u);
        }
        match self.kind {
            // (F(t) V)^(-1/alpha) - 1 with V = 1 - u, written to keep digits when u is small.
            TailKind::ParetoShifted => t + (1.0 + t) * self.inverse_cdf(u),
        }
    }

    /// `E Z`, infinite for `alpha <= 1`.
    pub fn mean(&self) -> f64 {
        match self.kind {
            TailKind::ParetoShifted => {
                if self.alpha > 1.0 {
                    1.0 / (self.alpha - 1.0)
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, FixedStream};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn tail_examples() {
        let d2 = HeavyTailDistribution::pareto(2.0).unwrap();
        let d3 = HeavyTailDistribution::pareto(3.0).unwrap();
        assert_eq!(d2.tail(0.0), 1.0);
        assert!(rel(d2.tail(99.0), 1e-4) < 1e-14);
        assert!(rel(d3.tail(9.0), 1e-3) < 1e-14);
        assert_eq!(d2.tail(-5.0), 1.0);
        assert!(d2.tail(1.0) > d2.tail(1.0 + 1e-9));
    }

    #[test]
    fn density_examples() {
        let d2 = HeavyTailDistribution::pareto(2.0).unwrap();
        let d3 = HeavyTailDistribution::pareto(3.0).unwrap();
        assert_eq!(d2.density(0.0), 2.0);
        assert!(rel(d3.density(1.0), 0.1875) < 1e-15);
        assert_eq!(d2.density(-1.0), 0.0);
        assert!(rel(d3.log_density(1.0).exp(), 0.1875) < 1e-14);
    }

    #[test]
    fn quantile_examples() {
        let d2 = HeavyTailDistribution::pareto(2.0).unwrap();
        let d3 = HeavyTailDistribution::pareto(3.0).unwrap();
        assert!(rel(d2.quantile(0.99).unwrap(), 9.0) < 1e-13);
        assert!(rel(d2.quantile(0.75).unwrap(), 1.0) < 1e-14);
        assert!(d3.quantile(1e-300).unwrap() < 1e-299);
        assert!(d3.quantile(0.0).is_err());
        assert!(d3.quantile(1.0).is_err());
        assert!(d3.quantile(f64::NAN).is_err());
        assert!(HeavyTailDistribution::pareto(0.0).is_err());
        assert!(HeavyTailDistribution::pareto(-1.0).is_err());
    }

    #[test]
    fn sample_inverse_transform() {
        let d2 = HeavyTailDistribution::pareto(2.0).unwrap();
        let mut s = FixedStream::new(vec![0.75]);
        assert!(rel(d2.sample(&mut s), 1.0) < 1e-14);
        let mut s = FixedStream::new(vec![0.0]);
        assert_eq!(d2.sample(&mut s), 0.0);
    }

    #[test]
    fn sample_mean_alpha_three() {
        let d3 = HeavyTailDistribution::pareto(3.0).unwrap();
        let mut rng = substream(11, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| d3.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - d3.mean()).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn inverse_consistency_grid() {
        for alpha in [0.5, 1.0, 2.0, 3.0, 7.5] {
            let d = HeavyTailDistribution::pareto(alpha).unwrap();
            for k in 1..100 {
                let p = k as f64 / 100.0;
                let x = d.quantile(p).unwrap();
                assert!(rel(d.tail(x), 1.0 - p) < 1e-10, "alpha {alpha} p {p}");
            }
        }
    }

    #[test]
    fn density_integrates_to_one() {
        for alpha in [2.0, 3.0] {
            let d = HeavyTailDistribution::pareto(alpha).unwrap();
            let x_max = d.quantile(1.0 - 1e-10).unwrap();
            let integral =
                crate::quadrature::integrate(|x| d.density(x), 0.0, x_max, 1e-12).unwrap();
            assert!((integral + d.tail(x_max) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn regular_variation_ratio() {
        let t = 1e6;
        for alpha in [2.0, 3.0] {
            let d = HeavyTailDistribution::pareto(alpha).unwrap();
            for x in [0.5, 2.0, 10.0] {
                let ratio = d.tail(t * x) / d.tail(t);
                assert!(rel(ratio, x.powf(-alpha)) < 1e-4);
            }
        }
    }

    #[test]
    fn conditional_draw_exceeds_threshold() {
        let d = HeavyTailDistribution::pareto(2.0).unwrap();
        for u in [1e-12, 0.1, 0.5, 0.999] {
            let z = d.conditional_above(10.0, u);
            assert!(z > 10.0);
            // P(Z > z | Z > 10) = 1 - u
            assert!(rel(d.tail(z) / d.tail(10.0), 1.0 - u) < 1e-10);
        }
        assert_eq!(d.conditional_above(-3.0, 0.75), d.inverse_cdf(0.75));
    }
}
