//! Distributional facts about the price process that are available in closed
//! form: trend transition probabilities, expected price, power moments of the
//! discounted price, the law of the discounted running supremum, and the tail
//! bound used to pick Monte Carlo horizons for supremum estimates.

use crate::error::{Error, Result};
use crate::model::{ModelParams, TrendState};

/// Probability that the trend is `to` at time `t` given it is `from` at time 0.
pub fn transition_prob(lambda: f64, t: f64, from: TrendState, to: TrendState) -> f64 {
    let e = (-2.0 * lambda * t).exp();
    if from == to {
        0.5 * (1.0 + e)
    } else {
        0.5 * (1.0 - e)
    }
}

/// Applies `exp(t * [[d1, off], [off, d2]])` to the vector `v`.
///
/// The symmetric matrix is split into its two spectral projections, each
/// multiplied by its own exponential `e^{(m +- r) t}`; no `cosh`/`sinh`
/// products are formed, so the result does not overflow before the answer
/// itself does.
pub fn expm2_sym_apply(d1: f64, d2: f64, off: f64, t: f64, v: [f64; 2]) -> [f64; 2] {
    let m = 0.5 * (d1 + d2);
    let delta = 0.5 * (d1 - d2);
    let r = (delta * delta + off * off).sqrt();
    if r == 0.0 {
        let e = (m * t).exp();
        return [e * v[0], e * v[1]];
    }
    // B = A - m I has rows [delta, off], [off, -delta]; eigenvalues +-r.
    let bv = [delta * v[0] + off * v[1], off * v[0] - delta * v[1]];
    let plus = [
        0.5 * (v[0] + bv[0] / r),
        0.5 * (v[1] + bv[1] / r),
    ];
    let minus = [v[0] - plus[0], v[1] - plus[1]];
    let e_plus = ((m + r) * t).exp();
    let e_minus = ((m - r) * t).exp();
    [
        e_plus * plus[0] + e_minus * minus[0],
        e_plus * plus[1] + e_minus * minus[1],
    ]
}

fn state_index(s: TrendState) -> usize {
    match s {
        TrendState::Down => 0,
        TrendState::Up => 1,
    }
}

/// `E[Y_t]` for a path started at price `y0` in trend state `s0`.
pub fn expected_price(params: &ModelParams, y0: f64, s0: TrendState, t: f64) -> f64 {
    let d1 = params.mu - params.sigma - params.lambda;
    let d2 = params.mu + params.sigma - params.lambda;
    let v = expm2_sym_apply(d1, d2, params.lambda, t, [y0, y0]);
    v[state_index(s0)]
}

/// `E[(e^{-rho t} Y_t / y0)^theta]` for a path started in trend state `s0`.
///
/// Normalized by the initial price, so the result depends only on the
/// parameters, `theta`, `s0` and `t`.
pub fn discounted_power_moment(params: &ModelParams, theta: f64, s0: TrendState, t: f64) -> f64 {
    let d1 = theta * (params.mu - params.sigma - params.rho) - params.lambda;
    let d2 = theta * (params.mu + params.sigma - params.rho) - params.lambda;
    let v = expm2_sym_apply(d1, d2, params.lambda, t, [1.0, 1.0]);
    v[state_index(s0)]
}

/// Exponent of the discounted-supremum power law; defined when `rho < mu + sigma`.
fn sup_exponent(params: &ModelParams) -> Result<f64> {
    if params.rho >= params.mu + params.sigma {
        return Err(Error::Regime {
            requirement: "rho < mu + sigma (the discounted supremum law is a power law \
                          only when the discounted up-state drift is positive)",
            rho: params.rho,
            mu_plus_sigma: params.mu + params.sigma,
        });
    }
    let d = params.sigma * params.sigma - (params.mu - params.rho) * (params.mu - params.rho);
    Ok(2.0 * params.lambda * (params.rho - params.mu) / d)
}

/// `P[sup_t e^{-rho t} Y_t >= level]` for a path started at `(y, s)`,
/// when `rho < mu + sigma` and `y <= level`.
///
/// The probability is `(s (rho - mu) + sigma) / (rho - mu + sigma) * (y/level)^e`
/// with `e` the supremum-law exponent: the function
/// `(s (rho - mu) + sigma) * m^e` of the discounted price `m` and the trend `s`
/// is a martingale, and the level is first touched in the up state.
pub fn sup_law(params: &ModelParams, y: f64, s: TrendState, level: f64) -> Result<f64> {
    if !(level > 0.0) || y < 0.0 || y > level {
        return Err(Error::Domain(format!(
            "sup_law needs 0 <= y <= level with level > 0, got y = {y}, level = {level}"
        )));
    }
    let e = sup_exponent(params)?;
    let coef = (s.sign() * (params.rho - params.mu) + params.sigma)
        / (params.rho - params.mu + params.sigma);
    Ok(coef * (y / level).powf(e))
}

/// Upper bound on the probability that the discounted price first reaches
/// `level` after time `horizon`, starting from `(y0, s0)` with `y0 < level`.
///
/// Conditioning on time `horizon` and applying the supremum law from the state
/// reached there gives `P <= E[(M_h / level)^theta]` for any
/// `0 < theta <= exponent`, because `M_h <= level` on the event in question.
/// `theta = exponent / 2` makes the moment decay exponentially in the horizon.
pub fn sup_truncation_bound(
    params: &ModelParams,
    y0: f64,
    s0: TrendState,
    level: f64,
    horizon: f64,
) -> Result<f64> {
    if !(level > 0.0) || !(y0 > 0.0) || y0 >= level {
        return Err(Error::Domain(format!(
            "sup_truncation_bound needs 0 < y0 < level, got y0 = {y0}, level = {level}"
        )));
    }
    let theta = sup_exponent(params)? / 2.0;
    let moment = discounted_power_moment(params, theta, s0, horizon);
    Ok((y0 / level).powf(theta) * moment)
}
