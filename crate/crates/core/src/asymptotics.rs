//! Closed-form asymptotics for sums of regularly varying increments.
//!
//! By the single-big-jump property `P(S_n > x) ~ n P(Z > x)`, so `U = n F_Z`
//! is the tail approximation and its inverse anchors the change of measure.
//! Since `P(S_n > x) > n P(Z > x)` for positive increments, that anchor sits
//! below the true quantile, which puts the conditional mixture in the regime
//! `c >= 1` of its efficiency bound.

use crate::dist::HeavyTailDistribution;
use crate::error::{check_probability, Error, Result};
use crate::quadrature;
use crate::samplers::{Algorithm, MixtureConfig};
use crate::stats::Welford;

/// Smallest `c` at which the conditional mixture bound is asserted.
pub const CONDITIONAL_C0: f64 = 1.0;

const PHI_SCALING_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct AsymptoticContext {
    pub dist: HeavyTailDistribution,
    pub mix: MixtureConfig,
}

impl AsymptoticContext {
    pub fn new(dist: HeavyTailDistribution, mix: MixtureConfig) -> Result<Self> {
        mix.validate()?;
        Ok(Self { dist, mix })
    }

    /// Context for plain Monte Carlo; only `n` and the law matter.
    pub fn plain(dist: HeavyTailDistribution, n: usize) -> Result<Self> {
        Self::new(dist, MixtureConfig::standard(n))
    }

    pub fn n(&self) -> usize {
        self.mix.n
    }

    fn alpha(&self) -> f64 {
        self.dist.alpha()
    }
}

/// `U(x) = n P(Z > x)`, capped at 1.
pub fn tail_approx_u(ctx: &AsymptoticContext, x: f64) -> f64 {
    (ctx.n() as f64 * ctx.dist.tail(x)).min(1.0)
}

/// `u_p = (n / (1 - p))^(1/alpha) - 1`, the level where `U` equals `1 - p`.
pub fn asymptotic_quantile(ctx: &AsymptoticContext, p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok((ctx.n() as f64 / (1.0 - p)).powf(1.0 / ctx.alpha()) - 1.0)
}

/// Products `prod_{j<i} 1/p_j` for `i = 1..=n`; the last entry is
/// `prod_{j=1}^{n-1} 1/p_j`.
fn inverse_p_products(mix_p: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(mix_p.len() + 1);
    let mut prod = 1.0;
    out.push(prod);
    for p in mix_p {
        prod /= p;
        out.push(prod);
    }
    out
}

/// Efficiency bound of the conditional mixture:
/// `c^-alpha (a^-alpha sum_{i<n} prod_{j<i} 1/p_j * 1/q_i + prod_{j<n} 1/p_j)`.
///
/// Asserted for `c >= CONDITIONAL_C0`; smaller `c` is evaluated as written.
pub fn phi_conditional(ctx: &AsymptoticContext, c: f64) -> f64 {
    let alpha = ctx.alpha();
    let prods = inverse_p_products(&ctx.mix.mix_p);
    let jumps: f64 = ctx
        .mix
        .mix_p
        .iter()
        .zip(&prods)
        .map(|(p, prod)| prod / (1.0 - p))
        .sum();
    let last = prods[prods.len() - 1];
    c.powf(-alpha) * (ctx.mix.a.powf(-alpha) * jumps + last)
}

/// Mixing probabilities that minimise `phi(1)` when a jump at any step
/// costs `jump_cost` times the final step.
///
/// With `r = sqrt(jump_cost)`, `p_i = ((n-i-1) r + 1) / ((n-i) r + 1)` makes
/// every term `prod_{j<i} 1/p_j * 1/q_i` equal, giving `phi(1) = ((n-1) r + 1)^2`
/// up to the `c^-alpha` factor. `jump_cost = 1` gives `p_i = (n-i) / (n-i+1)`.
pub fn balanced_mix_p(n: usize, jump_cost: f64) -> Result<Vec<f64>> {
    if !(jump_cost > 0.0 && jump_cost.is_finite()) {
        return Err(Error::Domain {
            what: "jump cost",
            value: jump_cost,
            domain: "(0, inf)",
        });
    }
    let r = jump_cost.sqrt();
    Ok((1..n)
        .map(|i| {
            let rest = (n - i) as f64;
            ((rest - 1.0) * r + 1.0) / (rest * r + 1.0)
        })
        .collect())
}

/// Balanced schedule for a given mixture. The conditional mixture pays
/// `a^-alpha` per jump; in the scaling bound every term shares the same
/// integral, so the cost is 1.
pub fn balanced_mix_p_for(algorithm: Algorithm, alpha: f64, a: f64, n: usize) -> Result<Vec<f64>> {
    match algorithm {
        Algorithm::ConditionalMixture => balanced_mix_p(n, a.powf(-alpha)),
        _ => balanced_mix_p(n, 1.0),
    }
}

/// Slowly varying part of the Pareto density, `f(x) = x^(-alpha-1) L(x)`.
fn pareto_slowly_varying(d: &HeavyTailDistribution, x: f64) -> f64 {
    let alpha = d.alpha();
    (d.log_density(x) + (alpha + 1.0) * x.ln()).exp()
}

/// `int_c^inf alpha / (lambda^alpha L(y / lambda)) * alpha y^(-alpha-1) dy`.
pub fn scaling_integral(d: &HeavyTailDistribution, c: f64, lambda: f64) -> Result<f64> {
    if !(c > 0.0) || !(lambda > 0.0) {
        // the integrand behaves like y^(-2 alpha - 2) at the origin
        return Err(Error::Divergent);
    }
    let alpha = d.alpha();
    let ln_lambda = lambda.ln();
    let integrand = |y: f64| {
        let l = pareto_slowly_varying(d, y / lambda);
        (2.0 * alpha.ln() - alpha * ln_lambda - l.ln() - (alpha + 1.0) * y.ln()).exp()
    };
    let value = quadrature::integrate_to_infinity(integrand, c, PHI_SCALING_REL_TOL)?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Divergent)
    }
}

/// Efficiency bound of the scaling mixture at finite `lambda`,
/// `sum_{i=1}^n prod_{j<i} 1/p_j * 1/q_i * I(c)` with `q_n = 1`.
pub fn phi_scaling(ctx: &AsymptoticContext, c: f64, lambda: f64) -> Result<f64> {
    let integral = scaling_integral(&ctx.dist, c, lambda)?;
    let prods = inverse_p_products(&ctx.mix.mix_p);
    let coeff: f64 = prods
        .iter()
        .enumerate()
        .map(|(i, prod)| {
            let q = ctx.mix.mix_p.get(i).map_or(1.0, |p| 1.0 - p);
            prod / q
        })
        .sum();
    Ok(coeff * integral)
}

/// `phi(c)` of whichever mixture the context configures.
pub fn phi(ctx: &AsymptoticContext, c: f64) -> Result<f64> {
    match ctx.mix.algorithm {
        Algorithm::ConditionalMixture => Ok(phi_conditional(ctx, c)),
        Algorithm::ScalingMixture => phi_scaling(ctx, c, ctx.mix.lambda),
        Algorithm::StandardMc => Err(Error::Config(
            "plain Monte Carlo has no bounded-relative-error constant".into(),
        )),
    }
}

/// Limit of `sigma_p^2 / VaR_p^2`: `(phi(1) - 1) / alpha^2`.
pub fn var_ratio_bound(ctx: &AsymptoticContext) -> Result<f64> {
    let alpha = ctx.alpha();
    Ok((phi(ctx, 1.0)? - 1.0) / (alpha * alpha))
}

/// Limit for expected shortfall when `phi(c) <= K c^-alpha`:
/// `(2K(alpha-1)/(alpha-2) - 1) / alpha^2`. Requires `alpha > 2`.
pub fn es_ratio_bound(alpha: f64, k: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::Domain {
            what: "alpha",
            value: alpha,
            domain: "(2, inf)",
        });
    }
    if !(k > 0.0) {
        return Err(Error::Domain {
            what: "K",
            value: k,
            domain: "(0, inf)",
        });
    }
    Ok((2.0 * k * (alpha - 1.0) / (alpha - 2.0) - 1.0) / (alpha * alpha))
}

/// Sample standard deviation over sample mean.
pub fn relative_error(estimates: &[f64]) -> Result<f64> {
    if estimates.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: estimates.len(),
        });
    }
    let w: Welford = estimates.iter().copied().collect();
    if w.mean() == 0.0 {
        return Err(Error::ZeroMean);
    }
    Ok(w.std_dev() / w.mean().abs())
}
