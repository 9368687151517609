use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid sampler configuration: {0}")]
    Config(String),

    #[error("quadrature did not converge: estimate {estimate}, error bound {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("bisection failed to bracket a root on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("integral diverges for the supplied parameters")]
    Divergent,

    #[error("relative error undefined: mean of estimates is zero")]
    ZeroMean,

    #[error("at least {needed} values required, got {got}")]
    TooFew { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(what: &'static str, p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(Error::Domain {
            what,
            value: p,
            domain: "(0, 1)",
        })
    }
}
