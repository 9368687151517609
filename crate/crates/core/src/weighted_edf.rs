//! The importance-sampling tail e.d.f. `T(x) = (1/N) sum w_i I{X_i > x}`,
//! its generalized inverse and the expected shortfall of that inverse.
//!
//! Quantiles follow `q(u) = inf{x : T(x) <= 1 - u}`. Since `T` is right
//! continuous and constant between sample points, the infimum is always a
//! sample point, except when the total mass `T(-inf)` does not exceed
//! `1 - u`. IS weights need not average to one, so that can happen; the
//! quantile is then clamped at the smallest sample and flagged.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::samplers::{WeightedSample, WeightedSampleSet};
use crate::stats::Welford;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTailEdf {
    points: Vec<f64>,
    tail_mass: Vec<f64>,
    total_mass: f64,
    count: usize,
}

/// A quantile-type estimate and whether the mass-deficit clamp was used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub mass_deficit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub level_p: f64,
    pub var_p: f64,
    pub es_p: f64,
    pub mass_deficit: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdfRow {
    value: f64,
    tail_mass: f64,
}

impl WeightedTailEdf {
    /// Builds the step function in one sort and one descending pass.
    pub fn build(samples: &WeightedSampleSet) -> Result<Self> {
        Self::from_samples(samples.as_slice())
    }

    pub fn from_samples(samples: &[WeightedSample]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::TooFew { needed: 1, got: 0 });
        }
        let mut sorted: Vec<(f64, f64)> = samples.iter().map(|s| (s.value, s.weight)).collect();
        sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let mut points = Vec::with_capacity(sorted.len());
        let mut weights: Vec<f64> = Vec::with_capacity(sorted.len());
        for (v, w) in sorted {
            match points.last() {
                Some(&last) if last == v => *weights.last_mut().unwrap() += w,
                _ => {
                    points.push(v);
                    weights.push(w);
                }
            }
        }

        let n = samples.len() as f64;
        let mut tail_mass = vec![0.0; points.len()];
        let mut above = 0.0;
        for k in (0..points.len()).rev() {
            tail_mass[k] = above / n;
            above += weights[k];
        }
        Ok(Self {
            points,
            tail_mass,
            total_mass: above / n,
            count: samples.len(),
        })
    }

    /// Distinct sample values, ascending.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// `T` at each point of [`points`](Self::points).
    pub fn tail_mass(&self) -> &[f64] {
        &self.tail_mass
    }

    /// `T(-inf)`, the mean weight.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// The normalizer `N`.
    pub fn sample_count(&self) -> usize {
        self.count
    }

    /// `T(x)`.
    pub fn tail(&self, x: f64) -> f64 {
        let idx = self.points.partition_point(|&p| p <= x);
        if idx == 0 {
            self.total_mass
        } else {
            self.tail_mass[idx - 1]
        }
    }

    /// Value-at-Risk: the smallest sample point with `T <= 1 - p`.
    pub fn var_estimate(&self, p: f64) -> Result<Estimate> {
        check_probability("p", p)?;
        let target = 1.0 - p;
        if self.total_mass <= target {
            return Ok(Estimate {
                value: self.points[0],
                mass_deficit: true,
            });
        }
        // tail_mass is non-increasing and ends at 0, so the index exists.
        let k = self.tail_mass.partition_point(|&t| t > target);
        Ok(Estimate {
            value: self.points[k],
            mass_deficit: false,
        })
    }

    /// Expected shortfall `(1/(1-p)) int_p^1 q(u) du`, integrated exactly
    /// over the steps of `q`.
    ///
    /// In `v = 1 - u` coordinates point `k` occupies `[T_k, T_{k-1})`, with
    /// `T_{-1} = T(-inf)`, so only the tail masses enter, not `1 - T`.
    pub fn es_estimate(&self, p: f64) -> Result<Estimate> {
        check_probability("p", p)?;
        let target = 1.0 - p;
        let first = self.tail_mass.partition_point(|&t| t >= target);
        let mut acc = 0.0;
        for k in first..self.points.len() {
            let upper = if k == 0 {
                self.total_mass
            } else {
                self.tail_mass[k - 1]
            };
            acc += self.points[k] * (upper.min(target) - self.tail_mass[k]);
        }
        let mass_deficit = self.total_mass < target;
        if mass_deficit {
            acc += self.points[0] * (target - self.total_mass);
        }
        Ok(Estimate {
            value: acc / target,
            mass_deficit: mass_deficit || self.total_mass == target,
        })
    }

    pub fn risk_estimate(&self, p: f64) -> Result<RiskEstimate> {
        let var = self.var_estimate(p)?;
        let es = self.es_estimate(p)?;
        Ok(RiskEstimate {
            level_p: p,
            var_p: var.value,
            es_p: es.value,
            mass_deficit: var.mass_deficit || es.mass_deficit,
        })
    }

    /// CSV with header `value,tail_mass`. The first row is `-inf` carrying
    /// `T(-inf)`; the rest are the sample points in ascending order.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.serialize(EdfRow {
            value: f64::NEG_INFINITY,
            tail_mass: self.total_mass,
        })?;
        for (&value, &tail_mass) in self.points.iter().zip(&self.tail_mass) {
            w.serialize(EdfRow { value, tail_mass })?;
        }
        w.flush()
    }

    /// Reads the format written by [`write_csv`](Self::write_csv). The sample
    /// count is not stored in the file and must be supplied.
    pub fn read_csv<R: Read>(input: R, count: usize) -> std::io::Result<Self> {
        let mut rows = csv::Reader::from_reader(input).into_deserialize::<EdfRow>();
        let bad = |msg: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, msg.to_string());
        let head = rows.next().ok_or_else(|| bad("empty e.d.f. file"))??;
        if head.value != f64::NEG_INFINITY {
            return Err(bad("first row must be -inf"));
        }
        let mut points = Vec::new();
        let mut tail_mass = Vec::new();
        for row in rows {
            let row = row?;
            if points.last().is_some_and(|&p| p >= row.value) {
                return Err(bad("values must be strictly increasing"));
            }
            points.push(row.value);
            tail_mass.push(row.tail_mass);
        }
        if points.is_empty() {
            return Err(bad("no sample points"));
        }
        Ok(Self {
            points,
            tail_mass,
            total_mass: head.tail_mass,
            count,
        })
    }
}

/// Per-sample mean and spread of `w I{X > t}`, the unbiased estimator of `P(X > t)`.
pub fn tail_probability(samples: &WeightedSampleSet, t: f64) -> Welford {
    samples
        .iter()
        .map(|s| if s.value > t { s.weight } else { 0.0 })
        .collect()
}

/// Mean of `w^2 I{X > t}`.
fn weighted_second_moment(samples: &WeightedSampleSet, t: f64) -> f64 {
    let sum: f64 = samples
        .iter()
        .filter(|s| s.value > t)
        .map(|s| s.weight * s.weight)
        .sum();
    sum / samples.len() as f64
}

/// `rho(x, y) = E_nu[w^2 I{X > max(x, y)}] - F(x) F(y)`, with the reference tail
/// `F` supplied by the caller.
pub fn empirical_rho<F: Fn(f64) -> f64>(
    samples: &WeightedSampleSet,
    tail_fn: F,
    x: f64,
    y: f64,
) -> f64 {
    weighted_second_moment(samples, x.max(y)) - tail_fn(x) * tail_fn(y)
}

/// `E_nu[w^2 I{X > c lambda}] / F(lambda)^2`.
pub fn second_moment_ratio<F: Fn(f64) -> f64>(
    samples: &WeightedSampleSet,
    c: f64,
    lambda: f64,
    tail_fn: F,
) -> f64 {
    let reference = tail_fn(lambda);
    weighted_second_moment(samples, c * lambda) / (reference * reference)
}
