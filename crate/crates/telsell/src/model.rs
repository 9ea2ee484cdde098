//! Problem parameters, trend states, regime classification and the sale payoff.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five positive reals defining the selling problem.
///
/// The price grows at rate `mu + s*sigma` while the trend state is `s`, the
/// trend flips at rate `lambda`, rewards are discounted at rate `rho`, and a
/// sale costs `a` in price units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub rho: f64,
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub a: f64,
}

impl ModelParams {
    pub fn new(rho: f64, mu: f64, sigma: f64, lambda: f64, a: f64) -> Result<Self> {
        validate(ModelParams {
            rho,
            mu,
            sigma,
            lambda,
            a,
        })
    }

    /// The critical discount rate `mu - lambda + sqrt(sigma^2 + lambda^2)`.
    ///
    /// Below it the value function is infinite. Written so that the square
    /// root never cancels against `lambda`, which matters for large `lambda`.
    pub fn critical_rate(&self) -> f64 {
        let hyp = (self.sigma * self.sigma + self.lambda * self.lambda).sqrt();
        self.mu + self.sigma * self.sigma / (self.lambda + hyp)
    }

    /// Price growth rate in trend state `s`.
    pub fn drift(&self, s: TrendState) -> f64 {
        self.mu + s.sign() * self.sigma
    }

    /// The sale reward `y - a` (before discounting).
    pub fn payoff(&self, y: f64) -> f64 {
        y - self.a
    }
}

/// Checks strict positivity of every field and `mu != sigma`.
pub fn validate(params: ModelParams) -> Result<ModelParams> {
    let fields = [
        ("rho", params.rho),
        ("mu", params.mu),
        ("sigma", params.sigma),
        ("lambda", params.lambda),
        ("a", params.a),
    ];
    for (field, value) in fields {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveParameter { field, value });
        }
    }
    if params.mu == params.sigma {
        return Err(Error::DegenerateNoise(params.mu));
    }
    Ok(params)
}

/// The two-valued trend driving the price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrendState {
    Down,
    Up,
}

impl TrendState {
    pub fn sign(self) -> f64 {
        match self {
            TrendState::Down => -1.0,
            TrendState::Up => 1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            TrendState::Down => TrendState::Up,
            TrendState::Up => TrendState::Down,
        }
    }

    pub fn from_sign(s: i64) -> Result<Self> {
        match s {
            -1 => Ok(TrendState::Down),
            1 => Ok(TrendState::Up),
            other => Err(Error::Config(format!(
                "trend state must be +1 or -1, got {other}"
            ))),
        }
    }

    pub const BOTH: [TrendState; 2] = [TrendState::Down, TrendState::Up];
}

impl std::fmt::Display for TrendState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrendState::Down => write!(f, "-1"),
            TrendState::Up => write!(f, "+1"),
        }
    }
}

/// Which of the four solved parameter regimes applies, or `SubCritical` when
/// the discount rate is too small for the problem to be well posed.
///
/// The names encode the qualitative shape of the optimal rule:
/// * `UnboundedUp...`  — `rho <= mu + sigma`: never sell while the trend is up
///   (the up-state threshold is infinite).
/// * `BoundedUp...`    — `rho > mu + sigma`: a finite up-state threshold exists.
/// * `...FallingDown`  — `mu < sigma`: the price decreases during a down trend,
///   so the down-state stopping region is entered only by a trend switch.
/// * `...RisingDown`   — `mu > sigma`: the price rises in both states and can
///   reach the down-state threshold by continuous motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    SubCritical,
    UnboundedUpFallingDown,
    BoundedUpFallingDown,
    UnboundedUpRisingDown,
    BoundedUpRisingDown,
}

impl Regime {
    /// True when the up-state threshold is finite in this regime.
    pub fn bounded_up(self) -> bool {
        matches!(
            self,
            Regime::BoundedUpFallingDown | Regime::BoundedUpRisingDown
        )
    }

    /// True when the down-state drift `mu - sigma` is positive in this regime.
    pub fn rising_down(self) -> bool {
        matches!(
            self,
            Regime::UnboundedUpRisingDown | Regime::BoundedUpRisingDown
        )
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::SubCritical => "sub-critical",
            Regime::UnboundedUpFallingDown => "unbounded-up/falling-down",
            Regime::BoundedUpFallingDown => "bounded-up/falling-down",
            Regime::UnboundedUpRisingDown => "unbounded-up/rising-down",
            Regime::BoundedUpRisingDown => "bounded-up/rising-down",
        };
        write!(f, "{s}")
    }
}

/// Classifies validated parameters into one of the five regimes.
///
/// Equality `rho == critical_rate` is classified `SubCritical`; the boundary
/// `rho == mu + sigma` belongs to the unbounded-up regimes.
pub fn classify(params: &ModelParams) -> Regime {
    if params.rho <= params.critical_rate() {
        return Regime::SubCritical;
    }
    match (
        params.rho > params.mu + params.sigma,
        params.mu > params.sigma,
    ) {
        (false, false) => Regime::UnboundedUpFallingDown,
        (true, false) => Regime::BoundedUpFallingDown,
        (false, true) => Regime::UnboundedUpRisingDown,
        (true, true) => Regime::BoundedUpRisingDown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_positive_distinct() {
        assert!(ModelParams::new(1.0, 0.2, 0.5, 1.0, 1.0).is_ok());
    }

    #[test]
    fn validate_rejects_equal_mu_sigma() {
        match ModelParams::new(1.0, 0.5, 0.5, 1.0, 1.0) {
            Err(Error::DegenerateNoise(v)) => assert_eq!(v, 0.5),
            other => panic!("expected DegenerateNoise, got {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_nonpositive_sigma() {
        match ModelParams::new(1.0, 0.2, -0.5, 1.0, 1.0) {
            Err(Error::NonPositiveParameter { field, .. }) => assert_eq!(field, "sigma"),
            other => panic!("expected NonPositiveParameter, got {other:?}"),
        }
    }

    #[test]
    fn classify_reference_sets() {
        // critical rate: 0.1 - 1 + sqrt(0.36 + 1) = 0.26619..., rho = 0.5 <= 0.7
        let p = ModelParams::new(0.5, 0.1, 0.6, 1.0, 1.0).unwrap();
        assert!((p.critical_rate() - 0.266_190_378_969_060_2).abs() < 1e-12);
        assert_eq!(classify(&p), Regime::UnboundedUpFallingDown);

        // critical = 0.2 - 1 + sqrt(1.25) = 0.31803... < 1, rho > 0.7
        let p = ModelParams::new(1.0, 0.2, 0.5, 1.0, 1.0).unwrap();
        assert!((p.critical_rate() - 0.318_033_988_749_894_9).abs() < 1e-12);
        assert_eq!(classify(&p), Regime::BoundedUpFallingDown);

        // critical = -0.5 + sqrt(1.09) = 0.54403... > 0.2
        let p = ModelParams::new(0.2, 0.5, 0.3, 1.0, 1.0).unwrap();
        assert_eq!(classify(&p), Regime::SubCritical);

        // same critical, rho = 1.2 > 0.8
        let p = ModelParams::new(1.2, 0.5, 0.3, 1.0, 1.0).unwrap();
        assert_eq!(classify(&p), Regime::BoundedUpRisingDown);

        let p = ModelParams::new(0.7, 0.5, 0.3, 1.0, 1.0).unwrap();
        assert_eq!(classify(&p), Regime::UnboundedUpRisingDown);
    }

    #[test]
    fn classify_boundary_rho_equals_mu_plus_sigma() {
        let p = ModelParams::new(0.7, 0.1, 0.6, 1.0, 1.0).unwrap();
        assert_eq!(classify(&p), Regime::UnboundedUpFallingDown);
        let p = ModelParams::new(0.8, 0.5, 0.3, 1.0, 1.0).unwrap();
        assert_eq!(classify(&p), Regime::UnboundedUpRisingDown);
    }

    #[test]
    fn classify_equality_with_critical_rate_is_subcritical() {
        let mu = 0.5;
        let sigma = 0.3;
        let lambda: f64 = 1.0;
        let rho = mu - lambda + (sigma * sigma + lambda * lambda).sqrt();
        let p = ModelParams::new(rho, mu, sigma, lambda, 1.0).unwrap();
        assert_eq!(classify(&p), Regime::SubCritical);
    }

    #[test]
    fn classify_ignores_cost() {
        for a in [0.01, 1.0, 250.0] {
            let p = ModelParams::new(1.0, 0.2, 0.5, 1.0, a).unwrap();
            assert_eq!(classify(&p), Regime::BoundedUpFallingDown);
        }
    }

    #[test]
    fn payoff_values() {
        let p = ModelParams::new(1.0, 0.2, 0.5, 1.0, 1.5).unwrap();
        assert_eq!(p.payoff(1.5), 0.0);
        assert_eq!(p.payoff(0.0), -1.5);
        assert_eq!(p.payoff(3.0), 1.5);
    }
}
