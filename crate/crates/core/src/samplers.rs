//! Weighted samples of `S_n = Z_1 + ... + Z_n` under plain Monte Carlo and
//! the two dynamic mixture changes of measure.
//!
//! A dynamic mixture draws the increments one at a time. While the running
//! sum `s` is at or below the level `lambda`, step `i < n` samples from the
//! original density with probability `p_i` and from a state-dependent
//! big-jump density `g_i(. | s)` otherwise. The last step uses `g_n` alone.
//! Once `s > lambda` the remaining increments come from the original law.
//!
//! Stream layout is fixed: every step `i < n` consumes one uniform for the
//! branch choice followed by one for the increment (the branch uniform is
//! consumed even when `s > lambda`), and step `n` consumes one uniform.
//! Plain Monte Carlo consumes one uniform per step.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::HeavyTailDistribution;
use crate::error::{Error, Result};
use crate::rng::{substream, UniformStream};

/// Mixture threshold fraction used when none is configured.
pub const DEFAULT_A: f64 = 0.5;
/// Scaling factor used when none is configured.
pub const DEFAULT_SIGMA: f64 = 1.0;
/// Probability of sampling the original density at a mixture step.
pub const DEFAULT_MIX_P: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    StandardMc,
    /// Big jumps conditioned to exceed a fraction `a` of the remaining distance.
    ConditionalMixture,
    /// Big jumps drawn from the original law and multiplied by `sigma * lambda`.
    ScalingMixture,
}

impl Algorithm {
    pub fn short_name(self) -> &'static str {
        match self {
            Algorithm::StandardMc => "MC",
            Algorithm::ConditionalMixture => "DLW",
            Algorithm::ScalingMixture => "SM",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureConfig {
    pub algorithm: Algorithm,
    pub n: usize,
    pub lambda: f64,
    pub a: f64,
    pub sigma: f64,
    /// Per-step probabilities `p_1..p_{n-1}` of drawing from the original density.
    pub mix_p: Vec<f64>,
}

impl MixtureConfig {
    pub fn standard(n: usize) -> Self {
        Self::with_defaults(Algorithm::StandardMc, n, 0.0)
    }

    pub fn conditional(n: usize, lambda: f64) -> Self {
        Self::with_defaults(Algorithm::ConditionalMixture, n, lambda)
    }

    pub fn scaling(n: usize, lambda: f64) -> Self {
        Self::with_defaults(Algorithm::ScalingMixture, n, lambda)
    }

    /// Configuration with `a`, `sigma` and `mix_p` at their defaults.
    pub fn with_defaults(algorithm: Algorithm, n: usize, lambda: f64) -> Self {
        Self {
            algorithm,
            n,
            lambda,
            a: DEFAULT_A,
            sigma: DEFAULT_SIGMA,
            mix_p: vec![DEFAULT_MIX_P; n.saturating_sub(1)],
        }
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_mix_p(mut self, mix_p: Vec<f64>) -> Self {
        self.mix_p = mix_p;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.algorithm == Algorithm::StandardMc {
            return Ok(());
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(Error::Config(format!("a must lie in (0, 1), got {}", self.a)));
        }
        if self.algorithm == Algorithm::ScalingMixture
            && !(self.sigma > 0.0 && self.sigma.is_finite())
        {
            return Err(Error::Config(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.mix_p.len() != self.n - 1 {
            return Err(Error::Config(format!(
                "mix_p has {} entries, expected n - 1 = {}",
                self.mix_p.len(),
                self.n - 1
            )));
        }
        if let Some((i, p)) = self
            .mix_p
            .iter()
            .enumerate()
            .find(|(_, &p)| !(p > 0.0 && p < 1.0))
        {
            return Err(Error::Config(format!(
                "mix_p[{i}] = {p} must lie in (0, 1)"
            )));
        }
        Ok(())
    }
}

/// One realized `S_n` with its likelihood ratio `dmu/dnu` along the path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    pub value: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedSampleSet {
    samples: Vec<WeightedSample>,
}

impl WeightedSampleSet {
    pub fn new(samples: Vec<WeightedSample>) -> Self {
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, WeightedSample> {
        self.samples.iter()
    }

    pub fn as_slice(&self) -> &[WeightedSample] {
        &self.samples
    }

    pub fn push(&mut self, s: WeightedSample) {
        self.samples.push(s);
    }

    /// Appends another set, keeping its order after ours.
    pub fn extend(&mut self, other: WeightedSampleSet) {
        self.samples.extend(other.samples);
    }

    pub fn into_inner(self) -> Vec<WeightedSample> {
        self.samples
    }
}

impl FromIterator<WeightedSample> for WeightedSampleSet {
    fn from_iter<I: IntoIterator<Item = WeightedSample>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a WeightedSampleSet {
    type Item = &'a WeightedSample;
    type IntoIter = std::slice::Iter<'a, WeightedSample>;
    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}

/// `ln(e^x + e^y)` without overflow.
#[inline]
fn log_add_exp(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// A validated (law, configuration) pair ready to draw samples.
#[derive(Debug, Clone)]
pub struct Sampler {
    dist: HeavyTailDistribution,
    cfg: MixtureConfig,
    // ln p_i and ln q_i for the mixture steps
    ln_p: Vec<f64>,
    ln_q: Vec<f64>,
    // sigma * lambda
    scale: f64,
    // final-step gate lambda - lambda (1 - a)^(n-1) of the scaling mixture
    sm_gate: f64,
}

impl Sampler {
    pub fn new(dist: HeavyTailDistribution, cfg: MixtureConfig) -> Result<Self> {
        cfg.validate()?;
        let (ln_p, ln_q) = match cfg.algorithm {
            Algorithm::StandardMc => (Vec::new(), Vec::new()),
            _ => (
                cfg.mix_p.iter().map(|p| p.ln()).collect(),
                cfg.mix_p.iter().map(|p| (-p).ln_1p()).collect(),
            ),
        };
        let scale = cfg.sigma * cfg.lambda;
        let sm_gate = cfg.lambda - cfg.lambda * (1.0 - cfg.a).powi(cfg.n as i32 - 1);
        Ok(Self {
            dist,
            cfg,
            ln_p,
            ln_q,
            scale,
            sm_gate,
        })
    }

    pub fn config(&self) -> &MixtureConfig {
        &self.cfg
    }

    pub fn distribution(&self) -> &HeavyTailDistribution {
        &self.dist
    }

    pub fn draw<S: UniformStream + ?Sized>(&self, rng: &mut S) -> WeightedSample {
        match self.cfg.algorithm {
            Algorithm::StandardMc => self.draw_standard(rng),
            Algorithm::ConditionalMixture => self.draw_conditional(rng),
            Algorithm::ScalingMixture => self.draw_scaling(rng),
        }
    }

    pub fn batch<S: UniformStream + ?Sized>(&self, count: usize, rng: &mut S) -> WeightedSampleSet {
        (0..count).map(|_| self.draw(rng)).collect()
    }

    /// `count` samples split into `parts` contiguous chunks, chunk `k` drawn
    /// from `substream(seed, k)`. The result depends on `(seed, parts)` only,
    /// not on how many threads run the chunks.
    pub fn batch_partitioned(&self, count: usize, seed: u64, parts: usize) -> WeightedSampleSet {
        let parts = parts.max(1);
        let base = count / parts;
        let extra = count % parts;
        let chunks: Vec<WeightedSampleSet> = (0..parts)
            .into_par_iter()
            .map(|k| {
                let len = base + usize::from(k < extra);
                let mut rng = substream(seed, k as u64);
                self.batch(len, &mut rng)
            })
            .collect();
        let mut out = WeightedSampleSet::new(Vec::with_capacity(count));
        for c in chunks {
            out.extend(c);
        }
        out
    }

    fn draw_standard<S: UniformStream + ?Sized>(&self, rng: &mut S) -> WeightedSample {
        let value = (0..self.cfg.n).map(|_| self.dist.sample(rng)).sum();
        WeightedSample { value, weight: 1.0 }
    }

    /// `-ln(p + q e^r)`: log weight factor of a mixture step where `r` is
    /// `ln g(z) - ln f(z)`.
    #[inline]
    fn mixture_log_factor(&self, step: usize, log_g_over_f: f64) -> f64 {
        -log_add_exp(self.ln_p[step], self.ln_q[step] + log_g_over_f)
    }

    fn draw_conditional<S: UniformStream + ?Sized>(&self, rng: &mut S) -> WeightedSample {
        let d = &self.dist;
        let b = self.cfg.lambda;
        let mut s = 0.0;
        let mut log_w = 0.0;
        for i in 0..self.cfg.n - 1 {
            let branch = rng.next_uniform();
            let u = rng.next_uniform();
            if s > b {
                s += d.inverse_cdf(u);
                continue;
            }
            let threshold = self.cfg.a * (b - s);
            let z = if branch < self.cfg.mix_p[i] {
                d.inverse_cdf(u)
            } else {
                d.conditional_above(threshold, u)
            };
            // g / f = I{z > t} / F(t)
            let log_g_over_f = if z > threshold {
                -d.log_tail(threshold)
            } else {
                f64::NEG_INFINITY
            };
            log_w += self.mixture_log_factor(i, log_g_over_f);
            s += z;
        }
        let u = rng.next_uniform();
        if s > b {
            s += d.inverse_cdf(u);
        } else {
            let remaining = b - s;
            s += d.conditional_above(remaining, u);
            log_w += d.log_tail(remaining);
        }
        WeightedSample {
            value: s,
            weight: log_w.exp(),
        }
    }

    /// `ln g(z) - ln f(z)` for the scaled big-jump density.
    #[inline]
    fn scaled_log_ratio(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        let d = &self.dist;
        d.log_density(z / self.scale) - self.scale.ln() - d.log_density(z)
    }

    #[inline]
    fn scaled_jump(&self, u: f64) -> f64 {
        let candidate = self.dist.inverse_cdf(u);
        if candidate > 0.0 {
            self.scale * candidate
        } else {
            candidate
        }
    }

    fn draw_scaling<S: UniformStream + ?Sized>(&self, rng: &mut S) -> WeightedSample {
        let d = &self.dist;
        let lambda = self.cfg.lambda;
        let mut s = 0.0;
        let mut log_w = 0.0;
        for i in 0..self.cfg.n - 1 {
            let branch = rng.next_uniform();
            let u = rng.next_uniform();
            if s > lambda {
                s += d.inverse_cdf(u);
                continue;
            }
            let z = if branch < self.cfg.mix_p[i] {
                d.inverse_cdf(u)
            } else {
                self.scaled_jump(u)
            };
            log_w += self.mixture_log_factor(i, self.scaled_log_ratio(z));
            s += z;
        }
        let u = rng.next_uniform();
        if s <= self.sm_gate {
            let z = self.scaled_jump(u);
            log_w -= self.scaled_log_ratio(z);
            s += z;
        } else {
            s += d.inverse_cdf(u);
        }
        WeightedSample {
            value: s,
            weight: log_w.exp(),
        }
    }
}

/// Plain Monte Carlo draw of `S_n`; weight is exactly 1.
pub fn sample_standard<S: UniformStream + ?Sized>(
    d: &HeavyTailDistribution,
    n: usize,
    rng: &mut S,
) -> WeightedSample {
    let value = (0..n).map(|_| d.sample(rng)).sum();
    WeightedSample { value, weight: 1.0 }
}

pub fn sample_conditional_mixture<S: UniformStream + ?Sized>(
    d: &HeavyTailDistribution,
    cfg: &MixtureConfig,
    rng: &mut S,
) -> Result<WeightedSample> {
    expect_algorithm(cfg, Algorithm::ConditionalMixture)?;
    Ok(Sampler::new(*d, cfg.clone())?.draw_conditional(rng))
}

pub fn sample_scaling_mixture<S: UniformStream + ?Sized>(
    d: &HeavyTailDistribution,
    cfg: &MixtureConfig,
    rng: &mut S,
) -> Result<WeightedSample> {
    expect_algorithm(cfg, Algorithm::ScalingMixture)?;
    Ok(Sampler::new(*d, cfg.clone())?.draw_scaling(rng))
}

/// `count` independent samples from the configured algorithm.
pub fn batch<S: UniformStream + ?Sized>(
    d: &HeavyTailDistribution,
    cfg: &MixtureConfig,
    count: usize,
    rng: &mut S,
) -> Result<WeightedSampleSet> {
    Ok(Sampler::new(*d, cfg.clone())?.batch(count, rng))
}

fn expect_algorithm(cfg: &MixtureConfig, want: Algorithm) -> Result<()> {
    if cfg.algorithm == want {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "expected {:?} configuration, got {:?}",
            want, cfg.algorithm
        )))
    }
}
