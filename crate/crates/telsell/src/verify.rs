//! Self-contained verification battery: analytic identities of a solved
//! instance (continuity, smooth fit, equation residuals, the stopping-region
//! inequality, shape constraints) plus Monte Carlo cross-checks (value
//! agreement and superiority over perturbed rules).
//!
//! Reports are fully deterministic for fixed inputs: the analytic grids are
//! fixed, the sampling uses a seed derived from the run seed, and the Monte
//! Carlo layer is thread-count independent.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::Result;
use crate::model::{ModelParams, TrendState};
use crate::simulate::{mc_reward, StoppingRule};
use crate::thresholds::{solve, Solution, UpperThreshold};
use crate::value::{branch_value, deriv, eval, ode_residuals, Side};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub params: ModelParams,
    pub y0: f64,
    pub s0: TrendState,
    pub n: u64,
    pub seed: u64,
    pub corrupted: bool,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    /// Fixed-layout text rendering; byte-identical across runs with the same
    /// inputs.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let p = &self.params;
        out.push_str("verification report\n");
        out.push_str(&format!(
            "params: rho={} mu={} sigma={} lambda={} a={}\n",
            p.rho, p.mu, p.sigma, p.lambda, p.a
        ));
        out.push_str(&format!(
            "start: y0={} s0={}  mc: n={} seed={}{}\n",
            self.y0,
            self.s0,
            self.n,
            self.seed,
            if self.corrupted { "  (corrupted thresholds)" } else { "" }
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "{:<22} {}  {}\n",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail
            ));
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.passed { "PASS" } else { "FAIL" }
        ));
        out
    }
}

/// The largest price used by the analytic grids.
fn probe_ceiling(sol: &Solution) -> f64 {
    match sol.u_plus {
        UpperThreshold::Finite(u) => 2.0 * u,
        UpperThreshold::Infinite => 4.0 * sol.u_minus,
    }
}

fn check_continuity(sol: &Solution) -> Check {
    let mut worst: f64 = 0.0;
    let u = sol.u_minus;
    worst = worst.max(
        (branch_value(sol, u, TrendState::Down, Side::Left) - (u - sol.params.a)).abs()
            / u.max(1.0),
    );
    worst = worst.max(
        (branch_value(sol, u, TrendState::Up, Side::Left)
            - branch_value(sol, u, TrendState::Up, Side::Right))
        .abs()
            / u.max(1.0),
    );
    if let UpperThreshold::Finite(up) = sol.u_plus {
        worst = worst.max(
            (branch_value(sol, up, TrendState::Up, Side::Left) - (up - sol.params.a)).abs()
                / up.max(1.0),
        );
    }
    Check {
        name: "continuity",
        passed: worst <= 1e-9,
        detail: format!("max scaled mismatch {worst:.3e} (tol 1.0e-9)"),
    }
}

fn check_smooth_fit(sol: &Solution) -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    let d_left = deriv(sol, sol.u_minus, TrendState::Down, Side::Left).unwrap();
    if sol.regime.rising_down() {
        ok &= (d_left - 1.0).abs() <= 1e-9;
        notes.push(format!("down slope {d_left:.9} (want 1)"));
    } else {
        // kink with left slope below one keeps the value above the payoff
        ok &= d_left < 1.0;
        notes.push(format!("down slope {d_left:.9} (want < 1)"));
    }
    if let UpperThreshold::Finite(up) = sol.u_plus {
        let d = deriv(sol, up, TrendState::Up, Side::Left).unwrap();
        ok &= (d - 1.0).abs() <= 1e-9;
        notes.push(format!("up slope {d:.9} (want 1)"));
    }
    Check {
        name: "smooth-fit",
        passed: ok,
        detail: notes.join(", "),
    }
}

fn check_ode_residuals(sol: &Solution) -> Check {
    let lr = sol.params.lambda + sol.params.rho;
    let mut worst: f64 = 0.0;
    for i in 1..200 {
        let y = sol.u_minus * i as f64 / 200.0;
        let (r_down, r_up) = ode_residuals(sol, y).unwrap();
        let scale = lr * eval(sol, y, TrendState::Up).unwrap().g.abs().max(1.0);
        worst = worst.max(r_down.abs() / scale).max(r_up.abs() / scale);
    }
    if let UpperThreshold::Finite(up) = sol.u_plus {
        for i in 1..200 {
            let y = sol.u_minus + (up - sol.u_minus) * i as f64 / 200.0;
            let (_, r_up) = ode_residuals(sol, y).unwrap();
            let scale = lr * eval(sol, y, TrendState::Up).unwrap().g.abs().max(1.0);
            worst = worst.max(r_up.abs() / scale);
        }
    }
    Check {
        name: "ode-residual",
        passed: worst <= 1e-8,
        detail: format!("max scaled residual {worst:.3e} (tol 1.0e-8)"),
    }
}

fn check_generator_inequality(sol: &Solution) -> Check {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..300 {
        let y = sol.u_minus * (1.0 + 20.0 * i as f64 / 300.0);
        let (r_down, r_up) = ode_residuals(sol, y).unwrap();
        worst = worst.max(r_down / y.max(1.0));
        if y >= sol.u_plus.value() {
            worst = worst.max(r_up / y.max(1.0));
        }
    }
    Check {
        name: "generator-inequality",
        passed: worst <= 1e-10,
        detail: format!("max scaled excess {worst:.3e} (tol 1.0e-10)"),
    }
}

fn check_shape(sol: &Solution, seed: u64) -> Check {
    let mut rng = StdRng::seed_from_u64(seed ^ 0x5f5f_5f5f);
    let hi = probe_ceiling(sol);
    let mut ok = true;
    let mut fails = 0u32;
    for s in TrendState::BOTH {
        for _ in 0..500 {
            let mut ys = [0.0; 3].map(|_| rng.gen_range(0.0..hi));
            ys.sort_by(f64::total_cmp);
            let [y1, y2, y3] = ys;
            if y1 == y2 || y2 == y3 {
                continue;
            }
            let g = |y: f64| eval(sol, y, s).unwrap().g;
            let chord = ((y3 - y2) * g(y1) + (y2 - y1) * g(y3)) / (y3 - y1);
            let convex = g(y2) <= chord + 1e-10 * chord.abs().max(1.0);
            let monotone = g(y1) <= g(y2) + 1e-12;
            let floor = (y2 - sol.params.a).max(0.0);
            let dominates = g(y2) >= floor - 1e-12 * floor.max(1.0);
            if !(convex && monotone && dominates) {
                ok = false;
                fails += 1;
            }
        }
    }
    Check {
        name: "shape",
        passed: ok,
        detail: format!("{fails} violations over 1000 sampled triples"),
    }
}

fn check_mc_value(sol: &Solution, y0: f64, s0: TrendState, n: u64, seed: u64) -> Check {
    let rule = StoppingRule::from(sol);
    let est = mc_reward(&sol.params, &rule, y0, s0, n, seed);
    let want = eval(sol, y0, s0).unwrap().g;
    let slack = 3.0 * est.std_err + est.bias_bound;
    let diff = (est.mean - want).abs();
    Check {
        name: "mc-value",
        passed: diff <= slack,
        detail: format!(
            "estimate {:.6e} vs value {want:.6e}, |diff| {diff:.3e} <= {slack:.3e}",
            est.mean
        ),
    }
}

fn check_rule_optimality(sol: &Solution, y0: f64, s0: TrendState, n: u64, seed: u64) -> Check {
    let rule = StoppingRule::from(sol);
    let base = mc_reward(&sol.params, &rule, y0, s0, n, seed);
    let mut ok = true;
    let mut notes = Vec::new();
    for factor in [0.8, 1.25] {
        let est = mc_reward(&sol.params, &rule.scaled(factor), y0, s0, n, seed + 1);
        let slack = 3.0 * (base.std_err + est.std_err) + base.bias_bound + est.bias_bound;
        ok &= est.mean <= base.mean + slack;
        notes.push(format!("x{factor}: {:.6e}", est.mean));
    }
    Check {
        name: "rule-optimality",
        passed: ok,
        detail: format!("optimal {:.6e} vs {}", base.mean, notes.join(", ")),
    }
}

/// Runs the full battery. With `corrupt` set the solved thresholds are shifted
/// by 5% before checking, which must make the battery fail — a self-test that
/// the checks have teeth.
pub fn run_battery(
    params: &ModelParams,
    y0: f64,
    s0: TrendState,
    n: u64,
    seed: u64,
    corrupt: bool,
) -> Result<VerifyReport> {
    let mut sol = solve(params)?;
    if corrupt {
        sol.u_minus *= 1.05;
        if let UpperThreshold::Finite(u) = sol.u_plus {
            sol.u_plus = UpperThreshold::Finite(1.05 * u);
        }
    }
    let checks = vec![
        check_continuity(&sol),
        check_smooth_fit(&sol),
        check_ode_residuals(&sol),
        check_generator_inequality(&sol),
        check_shape(&sol, seed),
        check_mc_value(&sol, y0, s0, n, seed),
        check_rule_optimality(&sol, y0, s0, n, seed),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        params: *params,
        y0,
        s0,
        n,
        seed,
        corrupted: corrupt,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(rho: f64, mu: f64, sigma: f64, lambda: f64, a: f64) -> ModelParams {
        ModelParams::new(rho, mu, sigma, lambda, a).unwrap()
    }

    #[test]
    fn battery_passes_on_reference_sets() {
        for params in [
            p(0.5, 0.1, 0.6, 1.0, 1.0),
            p(1.0, 0.2, 0.5, 1.0, 1.0),
            p(0.7, 0.5, 0.3, 1.0, 1.0),
            p(1.2, 0.5, 0.3, 1.0, 1.0),
        ] {
            let report = run_battery(&params, 1.0, TrendState::Up, 40_000, 11, false).unwrap();
            assert!(report.passed, "{}", report.render());
        }
    }

    #[test]
    fn battery_fails_on_corrupted_solution() {
        let params = p(1.0, 0.2, 0.5, 1.0, 1.0);
        let report = run_battery(&params, 1.0, TrendState::Up, 20_000, 11, true).unwrap();
        assert!(!report.passed);
        assert!(report.checks.iter().any(|c| c.name == "continuity" && !c.passed));
    }

    #[test]
    fn report_is_deterministic() {
        let params = p(1.2, 0.5, 0.3, 1.0, 1.0);
        let a = run_battery(&params, 1.0, TrendState::Down, 20_000, 5, false).unwrap();
        let b = run_battery(&params, 1.0, TrendState::Down, 20_000, 5, false).unwrap();
        assert_eq!(a.render(), b.render());
        let c = run_battery(&params, 1.0, TrendState::Down, 20_000, 6, false).unwrap();
        assert_ne!(a.render(), c.render());
    }

    #[test]
    fn subcritical_parameters_are_rejected() {
        let params = p(0.2, 0.5, 0.3, 1.0, 1.0);
        assert!(matches!(
            run_battery(&params, 1.0, TrendState::Up, 1000, 1, false),
            Err(crate::error::Error::SubCritical { .. })
        ));
    }
}
