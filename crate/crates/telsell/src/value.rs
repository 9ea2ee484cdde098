//! Evaluation of the value function, its one-sided derivatives, and the
//! generator residuals, from a solved instance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::TrendState;
use crate::thresholds::Solution;

/// Whether waiting or selling is optimal at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    Continue,
    Stop,
}

/// Which one-sided limit to take at a branch point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValuePoint {
    pub y: f64,
    pub s: TrendState,
    pub g: f64,
    pub region: Region,
}

/// `c * y^w` with the zero cases made explicit so that a negative exponent is
/// never applied to `y = 0` (the matching constant is structurally zero there).
fn power_term(c: f64, w: f64, y: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    if y == 0.0 {
        return if w > 0.0 { 0.0 } else { f64::INFINITY };
    }
    c * y.powf(w)
}

/// Threshold for the given trend state (`inf` when the up state never stops).
fn threshold(sol: &Solution, s: TrendState) -> f64 {
    match s {
        TrendState::Down => sol.u_minus,
        TrendState::Up => sol.u_plus.value(),
    }
}

/// The continuation-side closed form at `y`, with `side` selecting the branch
/// at the points where two branches meet. Does not clamp to the payoff.
pub fn branch_value(sol: &Solution, y: f64, s: TrendState, side: Side) -> f64 {
    let f = &sol.forms;
    let p = &sol.params;
    let below = |bound: f64| y < bound || (y == bound && side == Side::Left);
    match s {
        TrendState::Down => {
            if below(sol.u_minus) {
                power_term(sol.c_minus * f.w_minus, f.omega_minus_exp, y)
                    + power_term(sol.c_plus * f.w_plus, f.omega_plus_exp, y)
            } else {
                y - p.a
            }
        }
        TrendState::Up => {
            if below(sol.u_minus) {
                power_term(sol.c_minus, f.omega_minus_exp, y)
                    + power_term(sol.c_plus, f.omega_plus_exp, y)
            } else if below(sol.u_plus.value()) {
                f.b * y - p.a * p.lambda / (p.lambda + p.rho)
                    + power_term(sol.c_cont, f.big_omega, y)
            } else {
                y - p.a
            }
        }
    }
}

/// Evaluates the value function and region membership at `(y, s)`.
///
/// The stopping region is closed: at exactly the threshold the region is
/// `Stop` and the value is the payoff.
pub fn eval(sol: &Solution, y: f64, s: TrendState) -> Result<ValuePoint> {
    if y < 0.0 || !y.is_finite() {
        return Err(Error::Domain(format!("price must be finite and >= 0, got {y}")));
    }
    let region = if y >= threshold(sol, s) {
        Region::Stop
    } else {
        Region::Continue
    };
    let g = match region {
        Region::Stop => y - sol.params.a,
        Region::Continue => branch_value(sol, y, s, Side::Left),
    };
    Ok(ValuePoint { y, s, g, region })
}

/// Analytic one-sided derivative of the value function at `(y, s)`.
pub fn deriv(sol: &Solution, y: f64, s: TrendState, side: Side) -> Result<f64> {
    if y <= 0.0 || !y.is_finite() {
        return Err(Error::Domain(format!("price must be finite and > 0, got {y}")));
    }
    let f = &sol.forms;
    let below = |bound: f64| y < bound || (y == bound && side == Side::Left);
    let joint = |wm: f64, wp: f64| {
        power_term(wm * f.omega_minus_exp, f.omega_minus_exp - 1.0, y)
            + power_term(wp * f.omega_plus_exp, f.omega_plus_exp - 1.0, y)
    };
    Ok(match s {
        TrendState::Down => {
            if below(sol.u_minus) {
                joint(sol.c_minus * f.w_minus, sol.c_plus * f.w_plus)
            } else {
                1.0
            }
        }
        TrendState::Up => {
            if below(sol.u_minus) {
                joint(sol.c_minus, sol.c_plus)
            } else if below(sol.u_plus.value()) {
                f.b + power_term(sol.c_cont * f.big_omega, f.big_omega - 1.0, y)
            } else {
                1.0
            }
        }
    })
}

/// Left-hand sides of the generator equations at `y`, for the down and up
/// states. Both vanish (to rounding) in the continuation region; in the
/// stopping region the value is the generator inequality, which must be <= 0.
pub fn ode_residuals(sol: &Solution, y: f64) -> Result<(f64, f64)> {
    let p = &sol.params;
    let g_down = eval(sol, y, TrendState::Down)?.g;
    let g_up = eval(sol, y, TrendState::Up)?.g;
    let d_down = deriv(sol, y, TrendState::Down, Side::Right)?;
    let d_up = deriv(sol, y, TrendState::Up, Side::Right)?;
    let lr = p.lambda + p.rho;
    let r_down = (p.mu - p.sigma) * y * d_down - lr * g_down + p.lambda * g_up;
    let r_up = (p.mu + p.sigma) * y * d_up - lr * g_up + p.lambda * g_down;
    Ok((r_down, r_up))
}
