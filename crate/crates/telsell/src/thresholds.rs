//! Free boundaries `u_minus`, `u_plus` and the constants `C_minus`, `C_plus`,
//! `C` that pin down the value function in each regime. The unbounded-up
//! regimes are fully algebraic; the bounded-up regimes reduce to the smallest
//! root of a strictly concave transcendental equation, located by bisection on
//! a proved sign-change bracket.

use serde::Serialize;

use crate::constants::{closed_forms, ClosedForms};
use crate::error::{Error, Result};
use crate::model::{classify, ModelParams, Regime};

/// Relative tolerance on the bisection bracket width.
const ROOT_TOL: f64 = 1e-12;
/// Post-hoc residual gate on the located root.
const RESIDUAL_TOL: f64 = 1e-9;

/// The up-state threshold: a finite price or "never stop while the trend is up".
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperThreshold {
    Finite(f64),
    Infinite,
}

impl UpperThreshold {
    pub fn is_finite(&self) -> bool {
        matches!(self, UpperThreshold::Finite(_))
    }

    /// The threshold as a float, `f64::INFINITY` in the unbounded case.
    pub fn value(&self) -> f64 {
        match self {
            UpperThreshold::Finite(u) => *u,
            UpperThreshold::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for UpperThreshold {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            UpperThreshold::Finite(u) => s.serialize_f64(*u),
            UpperThreshold::Infinite => s.serialize_str("inf"),
        }
    }
}

impl std::fmt::Display for UpperThreshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UpperThreshold::Finite(u) => write!(f, "{u}"),
            UpperThreshold::Infinite => write!(f, "inf"),
        }
    }
}

/// A fully determined solution of the stopping problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Solution {
    pub params: ModelParams,
    pub regime: Regime,
    pub u_minus: f64,
    pub u_plus: UpperThreshold,
    pub c_minus: f64,
    pub c_plus: f64,
    /// The constant of the up-only continuation branch; zero exactly when the
    /// up-state threshold is infinite.
    pub c_cont: f64,
    pub forms: ClosedForms,
}

/// Finds the smallest root of `f` in `[lo, hi]` by bisection.
///
/// Requires `f(lo) < 0 < f(hi)`; the callers guarantee (via concavity of the
/// shifted equation) that the sign change in the bracket is unique, so the
/// bisection limit is the smallest root.
pub fn find_smallest_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol * mid.abs().max(1.0) {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves the stopping problem for the active regime.
pub fn solve(params: &ModelParams) -> Result<Solution> {
    let params = crate::model::validate(*params)?;
    let forms = closed_forms(&params)?;
    let sol = match classify(&params) {
        Regime::SubCritical => unreachable!("closed_forms rejects sub-critical parameters"),
        Regime::UnboundedUpFallingDown => solve_unbounded_up_falling_down(&params, forms),
        Regime::BoundedUpFallingDown => solve_bounded_up_falling_down(&params, forms)?,
        Regime::UnboundedUpRisingDown => solve_unbounded_up_rising_down(&params, forms),
        Regime::BoundedUpRisingDown => solve_bounded_up_rising_down(&params, forms)?,
    };
    debug_assert!(sol.u_minus > params.a);
    debug_assert!(sol.u_minus <= sol.u_plus.value());
    Ok(sol)
}

/// `rho <= mu + sigma`, `mu < sigma`: everything algebraic, up threshold infinite.
fn solve_unbounded_up_falling_down(params: &ModelParams, forms: ClosedForms) -> Solution {
    let u_minus = forms.a_hat;
    let c_minus = (u_minus - params.a) / (forms.w_minus * u_minus.powf(forms.omega_minus_exp));
    Solution {
        params: *params,
        regime: Regime::UnboundedUpFallingDown,
        u_minus,
        u_plus: UpperThreshold::Infinite,
        c_minus,
        c_plus: 0.0,
        c_cont: 0.0,
        forms,
    }
}

/// Finite up threshold shared by both bounded-up regimes, with the matching
/// constant of the up-only branch.
fn upper_threshold_and_constant(params: &ModelParams, forms: &ClosedForms) -> (f64, f64) {
    let u_plus = params.a * params.rho / (params.rho - params.mu - params.sigma);
    let c_cont = (1.0 - forms.b) / (forms.big_omega * u_plus.powf(forms.big_omega - 1.0));
    (u_plus, c_cont)
}

/// `rho > mu + sigma`, `mu < sigma`: the down threshold solves a concave
/// transcendental equation between the cost and the up threshold.
fn solve_bounded_up_falling_down(params: &ModelParams, forms: ClosedForms) -> Result<Solution> {
    let (u_plus, c_cont) = upper_threshold_and_constant(params, &forms);
    let coef = c_cont * forms.w_minus / (1.0 - forms.b * forms.w_minus);
    let psi = |u: f64| u - coef * u.powf(forms.big_omega);
    let target = forms.a_hat;

    let lo = params.a * (1.0 + 1e-12);
    let hi = u_plus * (1.0 - 1e-12);
    let u_minus = find_smallest_root(|u| psi(u) - target, lo, hi, ROOT_TOL)?;
    let residual = (psi(u_minus) - target).abs();
    if residual > RESIDUAL_TOL * target.abs().max(1.0) {
        return Err(Error::RootFinding(format!(
            "down-threshold residual {residual} exceeds tolerance at u = {u_minus}"
        )));
    }
    let c_minus = (u_minus - params.a) / (forms.w_minus * u_minus.powf(forms.omega_minus_exp));
    Ok(Solution {
        params: *params,
        regime: Regime::BoundedUpFallingDown,
        u_minus,
        u_plus: UpperThreshold::Finite(u_plus),
        c_minus,
        c_plus: 0.0,
        c_cont,
        forms,
    })
}

/// The pair `(C_minus, C_plus)` determined by value matching and smooth fit at
/// the down threshold, used by both rising-down regimes.
fn rising_down_constants(params: &ModelParams, forms: &ClosedForms, u_minus: f64) -> (f64, f64) {
    let om = forms.omega_minus_exp;
    let op = forms.omega_plus_exp;
    let c_plus =
        u_minus.powf(-op) * (u_minus * (om - 1.0) - params.a * om) / (forms.w_plus * (om - op));
    let c_minus =
        u_minus.powf(-om) * (u_minus * (op - 1.0) - params.a * op) / (forms.w_minus * (op - om));
    (c_minus, c_plus)
}

/// `rho <= mu + sigma`, `mu > sigma`: fully algebraic, `u_minus = a N / D`.
fn solve_unbounded_up_rising_down(params: &ModelParams, forms: ClosedForms) -> Solution {
    let u_minus = params.a * forms.n_agg / forms.d_agg;
    let (c_minus, c_plus) = rising_down_constants(params, &forms, u_minus);
    Solution {
        params: *params,
        regime: Regime::UnboundedUpRisingDown,
        u_minus,
        u_plus: UpperThreshold::Infinite,
        c_minus,
        c_plus,
        c_cont: 0.0,
        forms,
    }
}

/// `rho > mu + sigma`, `mu > sigma`: down threshold from the second concave
/// transcendental equation, bracketed between zero and the up threshold.
fn solve_bounded_up_rising_down(params: &ModelParams, forms: ClosedForms) -> Result<Solution> {
    let (u_plus, c_cont) = upper_threshold_and_constant(params, &forms);
    let coef = c_cont * forms.w_plus * forms.w_minus * (forms.omega_plus_exp - forms.omega_minus_exp)
        / forms.d_agg;
    let phi = |u: f64| u - coef * u.powf(forms.big_omega);
    let target = params.a * forms.n_agg / forms.d_agg;

    let lo = 1e-12 * params.a;
    let hi = u_plus * (1.0 - 1e-12);
    let u_minus = find_smallest_root(|u| phi(u) - target, lo, hi, ROOT_TOL)?;
    let residual = (phi(u_minus) - target).abs();
    if residual > RESIDUAL_TOL * target.abs().max(1.0) {
        return Err(Error::RootFinding(format!(
            "down-threshold residual {residual} exceeds tolerance at u = {u_minus}"
        )));
    }
    let (c_minus, c_plus) = rising_down_constants(params, &forms, u_minus);
    Ok(Solution {
        params: *params,
        regime: Regime::BoundedUpRisingDown,
        u_minus,
        u_plus: UpperThreshold::Finite(u_plus),
        c_minus,
        c_plus,
        c_cont,
        forms,
    })
}
