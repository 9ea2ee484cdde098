use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter `{field}` must be strictly positive, got {value}")]
    NonPositiveParameter { field: &'static str, value: f64 },

    #[error("mu and sigma are both {0}; the exponents divide by mu^2 - sigma^2")]
    DegenerateNoise(f64),

    #[error(
        "discount rate rho = {rho} does not exceed the critical rate \
         mu - lambda + sqrt(sigma^2 + lambda^2) = {critical}; the value function is infinite"
    )]
    SubCritical { rho: f64, critical: f64 },

    #[error("operation requires {requirement} (rho = {rho}, mu + sigma = {mu_plus_sigma})")]
    Regime {
        requirement: &'static str,
        rho: f64,
        mu_plus_sigma: f64,
    },

    #[error("no sign change on bracket [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),
}
