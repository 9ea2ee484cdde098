//! Closed-form scalar quantities derived from the parameters: the exponents
//! and eigenvector ratios of the continuation-region ODE system, the
//! first-moment eigenvalues, the supremum-law exponent, and the aggregates
//! used by the rising-down free-boundary formulas.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{classify, ModelParams, Regime};

/// All parameter-derived scalars used by the solvers.
///
/// Naming: `omega_minus_exp`/`omega_plus_exp` are the exponents of the two
/// power solutions in the joint continuation region, `w_minus`/`w_plus` the
/// matching down-state/up-state eigenvector ratios, `b`/`big_omega` the slope
/// coefficient and exponent of the up-only continuation branch, `kappa1`/`kappa2`
/// the growth eigenvalues of the expected price, `omega_tilde` the exponent of
/// the discounted-supremum power law (defined only when `rho < mu + sigma`),
/// and `n_agg`/`d_agg`/`a_hat` the aggregates entering the rising-down
/// threshold `a*N/D` and the falling-down threshold level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForms {
    pub omega_minus_exp: f64,
    pub omega_plus_exp: f64,
    pub w_minus: f64,
    pub w_plus: f64,
    pub b: f64,
    pub big_omega: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub omega_tilde: Option<f64>,
    pub n_agg: f64,
    pub d_agg: f64,
    pub a_hat: f64,
}

/// The characteristic polynomial of the continuation-region ODE system,
/// `p(w) = (mu^2 - sigma^2) w^2 - 2 mu (lambda + rho) w + (rho^2 + 2 rho lambda)`.
pub fn char_poly(params: &ModelParams, w: f64) -> f64 {
    let ModelParams {
        rho,
        mu,
        sigma,
        lambda,
        ..
    } = *params;
    (mu * mu - sigma * sigma) * w * w - 2.0 * mu * (lambda + rho) * w
        + (rho * rho + 2.0 * rho * lambda)
}

/// First-moment eigenvalues `(kappa1, kappa2)` of the expected price,
/// `kappa_{1,2} = mu - lambda +- sqrt(sigma^2 + lambda^2)`, with `kappa1 > kappa2`.
pub fn moment_eigs(params: &ModelParams) -> (f64, f64) {
    let hyp = (params.sigma * params.sigma + params.lambda * params.lambda).sqrt();
    // kappa1 via the cancellation-free form (critical_rate); kappa2 is benign.
    (params.critical_rate(), params.mu - params.lambda - hyp)
}

/// Computes every closed-form scalar. Errors on sub-critical parameters.
///
/// The exponent pair is obtained from the stable quadratic formula: the
/// large-magnitude root first, the other from the product of roots, so that a
/// small `mu^2 - sigma^2` never causes cancellation.
pub fn closed_forms(params: &ModelParams) -> Result<ClosedForms> {
    if classify(params) == Regime::SubCritical {
        return Err(Error::SubCritical {
            rho: params.rho,
            critical: params.critical_rate(),
        });
    }
    let ModelParams {
        rho,
        mu,
        sigma,
        lambda,
        a,
    } = *params;

    let lead = mu * mu - sigma * sigma;
    let constant = rho * rho + 2.0 * rho * lambda;
    let root_term =
        (lambda * lambda * mu * mu + sigma * sigma * (rho * rho + 2.0 * lambda * rho)).sqrt();
    // q > 0 always; omega_plus_exp = q / lead carries the +sqrt branch.
    let q = mu * (lambda + rho) + root_term;
    let omega_plus_exp = q / lead;
    let omega_minus_exp = constant / q;

    let eigen_ratio = |exp: f64| 1.0 + rho / lambda - (mu + sigma) * exp / lambda;
    let w_minus = eigen_ratio(omega_minus_exp);
    let w_plus = eigen_ratio(omega_plus_exp);

    let b = lambda / (lambda + rho - mu - sigma);
    let big_omega = (lambda + rho) / (mu + sigma);

    let (kappa1, kappa2) = moment_eigs(params);

    let omega_tilde = if rho < mu + sigma {
        let d = sigma * sigma - (mu - rho) * (mu - rho);
        Some(2.0 * lambda * (rho - mu) / d)
    } else {
        None
    };

    let dexp = omega_plus_exp - omega_minus_exp;
    let cross = lambda * w_plus * w_minus * dexp;
    let n_agg = w_plus * omega_plus_exp - w_minus * omega_minus_exp - cross / (lambda + rho);
    let d_agg = w_plus * (omega_plus_exp - 1.0) - w_minus * (omega_minus_exp - 1.0)
        - cross / (lambda + rho - mu - sigma);

    let a_hat = a * (1.0 - lambda / (lambda + rho) * w_minus) / (1.0 - b * w_minus);

    Ok(ClosedForms {
        omega_minus_exp,
        omega_plus_exp,
        w_minus,
        w_plus,
        b,
        big_omega,
        kappa1,
        kappa2,
        omega_tilde,
        n_agg,
        d_agg,
        a_hat,
    })
}
