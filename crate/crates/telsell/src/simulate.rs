//! Exact Monte Carlo simulation of the price process and of threshold
//! stopping rules. Between trend switches the price moves deterministically,
//! so paths are simulated without discretization error: holding times are
//! exponential draws and boundary hits are computed in closed form.
//!
//! All estimators are deterministic for a fixed seed and independent of the
//! number of worker threads: every path owns a counter-derived RNG stream and
//! partial sums are reduced in a fixed order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{expected_price, sup_truncation_bound};
use crate::error::Result;
use crate::model::{ModelParams, TrendState};
use crate::thresholds::{Solution, UpperThreshold};

/// A pair of sell thresholds, one per trend state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoppingRule {
    pub u_minus: f64,
    pub u_plus: UpperThreshold,
}

impl StoppingRule {
    pub fn threshold(&self, s: TrendState) -> f64 {
        match s {
            TrendState::Down => self.u_minus,
            TrendState::Up => self.u_plus.value(),
        }
    }

    /// The rule scaled by a factor, for perturbation studies.
    pub fn scaled(&self, factor: f64) -> StoppingRule {
        StoppingRule {
            u_minus: self.u_minus * factor,
            u_plus: match self.u_plus {
                UpperThreshold::Finite(u) => UpperThreshold::Finite(u * factor),
                UpperThreshold::Infinite => UpperThreshold::Infinite,
            },
        }
    }
}

impl From<&Solution> for StoppingRule {
    fn from(sol: &Solution) -> Self {
        StoppingRule {
            u_minus: sol.u_minus,
            u_plus: sol.u_plus,
        }
    }
}

/// Result of running a stopping rule on one path.
///
/// `tau` is `None` when the path was censored at the horizon; the reward is
/// then zero and `y_tau`/`s_tau` describe the state at the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathOutcome {
    pub tau: Option<f64>,
    pub y_tau: f64,
    pub s_tau: TrendState,
    pub reward: f64,
    pub n_jumps: u64,
}

/// A trend switch on a traced path: time, price and the new trend just after.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpEvent {
    pub t: f64,
    pub y: f64,
    pub s: TrendState,
}

/// The RNG for path `index` of a run with master seed `seed`.
///
/// Stream 0 is reserved so that auxiliary draws can never collide with a path.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index + 1);
    rng
}

fn run_path(
    params: &ModelParams,
    rule: &StoppingRule,
    y0: f64,
    s0: TrendState,
    horizon: f64,
    rng: &mut ChaCha8Rng,
    mut trace: Option<&mut Vec<JumpEvent>>,
) -> PathOutcome {
    let exp = Exp::new(params.lambda).expect("lambda > 0");
    let mut t = 0.0;
    let mut y = y0;
    let mut s = s0;
    let mut n_jumps = 0;
    loop {
        let bound = rule.threshold(s);
        if y >= bound {
            return PathOutcome {
                tau: Some(t),
                y_tau: y,
                s_tau: s,
                reward: (-params.rho * t).exp() * (y - params.a),
                n_jumps,
            };
        }
        let drift = params.drift(s);
        let hold: f64 = exp.sample(rng);
        // closed-form hit of the active threshold during this trend segment
        if drift > 0.0 && bound.is_finite() {
            let hit = (bound / y).ln() / drift;
            if hit <= hold && t + hit <= horizon {
                return PathOutcome {
                    tau: Some(t + hit),
                    y_tau: bound,
                    s_tau: s,
                    reward: (-params.rho * (t + hit)).exp() * (bound - params.a),
                    n_jumps,
                };
            }
        }
        if t + hold > horizon {
            let y_end = y * (drift * (horizon - t)).exp();
            return PathOutcome {
                tau: None,
                y_tau: y_end,
                s_tau: s,
                reward: 0.0,
                n_jumps,
            };
        }
        t += hold;
        y *= (drift * hold).exp();
        s = s.flip();
        n_jumps += 1;
        if let Some(events) = trace.as_deref_mut() {
            events.push(JumpEvent { t, y, s });
        }
    }
}

/// Runs the stopping rule on one simulated path.
pub fn simulate_path(
    params: &ModelParams,
    rule: &StoppingRule,
    y0: f64,
    s0: TrendState,
    horizon: f64,
    rng: &mut ChaCha8Rng,
) -> PathOutcome {
    run_path(params, rule, y0, s0, horizon, rng, None)
}

/// Like [`simulate_path`], additionally returning every trend switch.
pub fn simulate_path_traced(
    params: &ModelParams,
    rule: &StoppingRule,
    y0: f64,
    s0: TrendState,
    horizon: f64,
    rng: &mut ChaCha8Rng,
) -> (PathOutcome, Vec<JumpEvent>) {
    let mut events = Vec::new();
    let out = run_path(params, rule, y0, s0, horizon, rng, Some(&mut events));
    (out, events)
}

/// Whether the discounted price `e^{-rho t} Y_t` reaches `level` by `horizon`
/// on one simulated path. Exact: the crossing is checked in closed form on
/// every constant-trend segment.
pub fn discounted_sup_reaches(
    params: &ModelParams,
    y0: f64,
    s0: TrendState,
    level: f64,
    horizon: f64,
    rng: &mut ChaCha8Rng,
) -> bool {
    let exp = Exp::new(params.lambda).expect("lambda > 0");
    let mut t = 0.0;
    let mut m = y0; // discounted price
    let mut s = s0;
    loop {
        if m >= level {
            return true;
        }
        let slope = params.drift(s) - params.rho;
        let hold: f64 = exp.sample(rng);
        let seg = hold.min(horizon - t);
        if slope > 0.0 && m * (slope * seg).exp() >= level {
            return true;
        }
        if t + hold > horizon {
            return false;
        }
        t += hold;
        m *= (slope * hold).exp();
        s = s.flip();
    }
}

/// A Monte Carlo estimate with its standard error and the deterministic
/// truncation-bias bound of the underlying estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: u64,
    pub seed: u64,
    pub horizon: f64,
    pub bias_bound: f64,
}

/// Mean and standard error of `f` over `n` independent paths.
///
/// Work is split into fixed-size chunks processed in parallel; each path uses
/// its own RNG stream and chunk partials are folded in index order, so the
/// result is byte-identical for any thread count.
pub fn mc_mean<F>(n: u64, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    const CHUNK: u64 = 4096;
    assert!(n >= 2, "need at least two paths for a standard error");
    let n_chunks = n.div_ceil(CHUNK);
    let partials: Vec<(f64, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for i in lo..hi {
                let mut rng = path_rng(seed, i);
                let x = f(&mut rng);
                sum += x;
                sumsq += x * x;
            }
            (sum, sumsq)
        })
        .collect();
    let (sum, sumsq) = partials
        .into_iter()
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sumsq / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Bound on the reward lost by censoring paths at `horizon`: the value of any
/// admissible rule from a state `(y, s)` is at most
/// `(lambda + rho + sigma - mu)/lambda * y - a (lambda + rho)/lambda`,
/// so the censored mass is at most the discounted expected bound at the horizon.
pub fn reward_bias_bound(params: &ModelParams, y0: f64, horizon: f64) -> f64 {
    let k = (params.lambda + params.rho + params.sigma - params.mu) / params.lambda;
    let worst = TrendState::BOTH
        .into_iter()
        .map(|s| expected_price(params, y0, s, horizon))
        .fold(0.0, f64::max);
    k * (-params.rho * horizon).exp() * worst
}

/// Smallest horizon from a doubling search whose censoring bias is below
/// `1e-6 * max(y0, a)`. Above the critical discount rate the bound decays
/// exponentially, so the search terminates.
pub fn auto_horizon(params: &ModelParams, y0: f64) -> f64 {
    let tol = 1e-6 * y0.max(params.a);
    let mut t = 8.0;
    while reward_bias_bound(params, y0, t) > tol && t < 1e7 {
        t *= 2.0;
    }
    t
}

/// Monte Carlo estimate of the expected discounted reward of a stopping rule.
///
/// The horizon is chosen automatically from the censoring-bias bound.
pub fn mc_reward(
    params: &ModelParams,
    rule: &StoppingRule,
    y0: f64,
    s0: TrendState,
    n: u64,
    seed: u64,
) -> McEstimate {
    let horizon = auto_horizon(params, y0);
    let (mean, std_err) = mc_mean(n, seed, |rng| {
        simulate_path(params, rule, y0, s0, horizon, rng).reward
    });
    McEstimate {
        mean,
        std_err,
        n,
        seed,
        horizon,
        bias_bound: reward_bias_bound(params, y0, horizon),
    }
}

/// Monte Carlo estimate of `P[sup_t e^{-rho t} Y_t >= level]`, for comparison
/// with the closed-form law. Requires `rho < mu + sigma` (so the bias bound
/// exists) and `0 < y0 < level`.
pub fn mc_sup_prob(
    params: &ModelParams,
    y0: f64,
    s0: TrendState,
    level: f64,
    n: u64,
    seed: u64,
) -> Result<McEstimate> {
    let mut horizon = 8.0;
    let tol = 1e-6;
    while sup_truncation_bound(params, y0, s0, level, horizon)? > tol && horizon < 1e7 {
        horizon *= 2.0;
    }
    let (mean, std_err) = mc_mean(n, seed, |rng| {
        if discounted_sup_reaches(params, y0, s0, level, horizon, rng) {
            1.0
        } else {
            0.0
        }
    });
    Ok(McEstimate {
        mean,
        std_err,
        n,
        seed,
        horizon,
        bias_bound: sup_truncation_bound(params, y0, s0, level, horizon)?,
    })
}
