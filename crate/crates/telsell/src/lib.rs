//! Optimal time to sell an asset whose price grows at rate `mu + sigma` or
//! `mu - sigma` depending on a hidden two-state trend that flips at rate
//! `lambda`. The seller pays a fixed cost `a` and discounts at rate `rho`;
//! the optimal rule is a pair of price thresholds, one per trend state,
//! available in closed form up to at most one scalar root.
//!
//! * [`model`] — parameters, trend states, regime classification
//! * [`constants`] — closed-form scalars (exponents, eigenvalues, aggregates)
//! * [`thresholds`] — free boundaries and value-function constants
//! * [`value`] — the value function, derivatives, equation residuals
//! * [`dynamics`] — moments, transition probabilities, supremum law
//! * [`simulate`] — exact Monte Carlo paths and estimators
//! * [`limit`] — the high-switch-rate diffusion limit
//! * [`verify`] — analytic + Monte Carlo verification battery
//! * [`cli`] — the `telsell` command-line tool

pub mod cli;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod limit;
pub mod model;
pub mod simulate;
pub mod thresholds;
pub mod value;
pub mod verify;

pub use constants::{closed_forms, ClosedForms};
pub use error::{Error, Result};
pub use model::{classify, ModelParams, Regime, TrendState};
pub use simulate::{mc_reward, simulate_path, McEstimate, PathOutcome, StoppingRule};
pub use thresholds::{solve, Solution, UpperThreshold};
pub use value::{eval, Region, ValuePoint};
