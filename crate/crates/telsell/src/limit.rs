//! White-noise limit: under the scaling `sigma = sigma0 * sqrt(lambda)` the
//! telegraph problem converges, as the switch rate grows, to the classical
//! perpetual-put-style threshold problem for geometric Brownian motion with
//! volatility `sigma0`. This module solves that limiting problem in closed
//! form and tabulates the convergence of thresholds and values along a grid
//! of switch rates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, TrendState};
use crate::thresholds::solve;
use crate::value::eval;

/// Closed-form solution of the limiting diffusion problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BsSolution {
    /// Positive root of `sigma0^2 w^2 / 2 + mu w - rho = 0`, greater than one
    /// whenever the problem is well posed. The linear-in-`w` coefficient is
    /// the growth rate of `log Y`, not of `Y`: the smoothed noise enters in
    /// the Stratonovich sense, so the limiting price is
    /// `exp(mu t + sigma0 W_t)`.
    pub omega0: f64,
    /// The optimal sell threshold `a * omega0 / (omega0 - 1)`.
    pub u: f64,
    /// Value at the threshold, `u - a`.
    pub gain: f64,
    pub a: f64,
}

impl BsSolution {
    /// The limiting value function: `(u - a) (y/u)^omega0` below the
    /// threshold, the payoff `y - a` above it.
    pub fn value(&self, y: f64) -> f64 {
        if y < self.u {
            self.gain * (y / self.u).powf(self.omega0)
        } else {
            y - self.a
        }
    }
}

/// Solves the limiting diffusion problem for drift `mu`, volatility `sigma0`,
/// discount rate `rho` and cost `a`.
///
/// Requires `rho > mu + sigma0^2 / 2` (the diffusion analogue of the critical
/// discount rate), which is exactly when the exponent exceeds one. The
/// exponent is computed as `2 rho / (mu + sqrt(mu^2 + 2 rho sigma0^2))`, a
/// form with no subtraction of nearby quantities.
pub fn bs_solve(rho: f64, mu: f64, sigma0: f64, a: f64) -> Result<BsSolution> {
    for (field, value) in [("rho", rho), ("mu", mu), ("sigma0", sigma0), ("a", a)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveParameter { field, value });
        }
    }
    let critical = mu + 0.5 * sigma0 * sigma0;
    if rho <= critical {
        return Err(Error::SubCritical { rho, critical });
    }
    let omega0 = 2.0 * rho / (mu + (mu * mu + 2.0 * rho * sigma0 * sigma0).sqrt());
    let u = a * omega0 / (omega0 - 1.0);
    Ok(BsSolution {
        omega0,
        u,
        gain: u - a,
        a,
    })
}

/// Convergence data for one switch rate along the white-noise scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRow {
    pub lambda: f64,
    /// Down-state threshold of the telegraph problem at `sigma = sigma0 sqrt(lambda)`.
    pub u_minus: f64,
    /// The same threshold through the algebraically rewritten closed form.
    pub u_rewritten: f64,
    /// Relative distance of `u_minus` from the diffusion threshold.
    pub u_err: f64,
    /// Largest relative value error over probe prices below the threshold,
    /// both trend states.
    pub value_err: f64,
}

/// Solves the telegraph problem at each switch rate of `lambdas` under the
/// scaling `sigma = sigma0 sqrt(lambda)` and measures the distance to the
/// diffusion solution.
pub fn limit_sequence(
    rho: f64,
    mu: f64,
    sigma0: f64,
    a: f64,
    lambdas: &[f64],
) -> Result<(BsSolution, Vec<LimitRow>)> {
    let bs = bs_solve(rho, mu, sigma0, a)?;
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let sigma = sigma0 * lambda.sqrt();
        let params = ModelParams::new(rho, mu, sigma, lambda, a)?;
        let sol = solve(&params)?;

        // same threshold, written without the intermediate eigenvector ratio
        let om = sol.forms.omega_minus_exp;
        let u_rewritten =
            a * (lambda + rho - mu - sigma) / (lambda + rho) * om / (om - 1.0);

        let u_err = (sol.u_minus - bs.u).abs() / bs.u;
        let mut value_err: f64 = 0.0;
        for frac in [0.25, 0.5, 0.75, 1.0] {
            let y = frac * bs.u;
            let want = bs.value(y);
            for s in TrendState::BOTH {
                let got = eval(&sol, y.min(sol.u_minus), s)?.g;
                value_err = value_err.max((got - want).abs() / want.abs().max(1e-30));
            }
        }
        rows.push(LimitRow {
            lambda,
            u_minus: sol.u_minus,
            u_rewritten,
            u_err,
            value_err,
        });
    }
    Ok((bs, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_solves_diffusion_quadratic() {
        for (rho, mu, sigma0) in [(0.5, 0.1, 0.3), (1.0, 0.2, 0.5), (2.0, 0.6, 0.9)] {
            let bs = bs_solve(rho, mu, sigma0, 1.0).unwrap();
            let w = bs.omega0;
            let r = 0.5 * sigma0 * sigma0 * w * w + mu * w - rho;
            assert!(r.abs() <= 1e-12 * rho.max(1.0), "residual {r}");
            assert!(w > 1.0);
        }
    }

    #[test]
    fn threshold_gives_smooth_fit() {
        let bs = bs_solve(0.5, 0.1, 0.3, 2.0).unwrap();
        let h = 1e-7 * bs.u;
        let left = (bs.value(bs.u - h) - bs.value(bs.u - 2.0 * h)) / h;
        assert!((left - 1.0).abs() <= 1e-5, "left slope {left}");
        assert!((bs.value(bs.u) - (bs.u - 2.0)).abs() < 1e-14);
        assert!((bs.value(0.0)).abs() < 1e-300);
    }

    #[test]
    fn rejects_subcritical_diffusion() {
        // rho <= mu + sigma0^2/2
        assert!(matches!(
            bs_solve(0.145, 0.1, 0.3, 1.0),
            Err(Error::SubCritical { .. })
        ));
        assert!(bs_solve(0.1451, 0.1, 0.3, 1.0).is_ok());
    }

    #[test]
    fn scaling_in_cost() {
        let b1 = bs_solve(0.5, 0.1, 0.3, 1.0).unwrap();
        let b2 = bs_solve(0.5, 0.1, 0.3, 3.0).unwrap();
        assert_eq!(b1.omega0, b2.omega0);
        assert!((b2.u - 3.0 * b1.u).abs() <= 1e-12 * b2.u);
        assert!((b2.value(3.0 * 0.7 * b1.u) - 3.0 * b1.value(0.7 * b1.u)).abs() <= 1e-12 * b2.u);
    }

    #[test]
    fn rewritten_threshold_matches_direct() {
        let lambdas = [1e2, 1e3, 1e4, 1e5, 1e6];
        let (_, rows) = limit_sequence(0.5, 0.1, 0.3, 1.0, &lambdas).unwrap();
        for row in &rows {
            assert!(
                (row.u_rewritten - row.u_minus).abs() <= 1e-10 * row.u_minus,
                "lambda = {}: {} vs {}",
                row.lambda,
                row.u_rewritten,
                row.u_minus
            );
        }
    }

    #[test]
    fn errors_decrease_and_vanish() {
        let lambdas = [1e2, 1e3, 1e4, 1e5, 1e6];
        let (bs, rows) = limit_sequence(0.5, 0.1, 0.3, 1.0, &lambdas).unwrap();
        assert!(bs.u > 1.0);
        for pair in rows.windows(2) {
            assert!(pair[1].u_err < pair[0].u_err);
            assert!(pair[1].value_err < pair[0].value_err);
        }
        let last = rows.last().unwrap();
        assert!(last.u_err < 0.01, "u_err = {}", last.u_err);
        assert!(last.value_err < 0.01, "value_err = {}", last.value_err);
    }
}
