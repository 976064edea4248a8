//! Closed-form primitives of the lognormal payoff model.
//!
//! An agent of risk type `gamma` facing exposure `m` receives
//! `R(m, Z) = exp(rT + (mu - r) m T - sigma^2 m^2 T / 2 + m sigma sqrt(T) Z)` with `Z ~ N(0, 1)`.
//! Everything the solvers need about a single agent (certainty equivalents, the Merton
//! fraction and its inverse) is available here in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Risk types closer to 1 than this are routed to the logarithmic branch of the utility.
pub const LOG_BRANCH_BAND: f64 = 1e-8;

/// The risk-return environment shared by every computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarketParamsRaw", into = "MarketParamsRaw")]
pub struct MarketParams {
    r: f64,
    mu: f64,
    sigma: f64,
    horizon: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarketParamsRaw {
    r: f64,
    mu: f64,
    sigma: f64,
    #[serde(rename = "T")]
    horizon: f64,
}

impl TryFrom<MarketParamsRaw> for MarketParams {
    type Error = Error;

    fn try_from(raw: MarketParamsRaw) -> Result<Self> {
        MarketParams::new(raw.r, raw.mu, raw.sigma, raw.horizon)
    }
}

impl From<MarketParams> for MarketParamsRaw {
    fn from(mp: MarketParams) -> Self {
        MarketParamsRaw {
            r: mp.r,
            mu: mp.mu,
            sigma: mp.sigma,
            horizon: mp.horizon,
        }
    }
}

impl MarketParams {
    pub fn new(r: f64, mu: f64, sigma: f64, horizon: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(invalid("r", "must be finite"));
        }
        if !mu.is_finite() || mu <= r {
            return Err(invalid("mu", format!("must be finite and exceed r = {r}, got {mu}")));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(invalid("sigma", format!("must be finite and positive, got {sigma}")));
        }
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(invalid("T", format!("must be finite and positive, got {horizon}")));
        }
        Ok(MarketParams {
            r,
            mu,
            sigma,
            horizon,
        })
    }

    /// Market with `r = 0`, `T = 1` and the given excess return and variance.
    pub fn from_excess(excess: f64, variance: f64) -> Result<Self> {
        MarketParams::new(0.0, excess, variance.sqrt(), 1.0)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Same market over a different horizon.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        MarketParams::new(self.r, self.mu, self.sigma, horizon)
    }

    pub fn excess_return(&self) -> f64 {
        self.mu - self.r
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn sharpe_ratio(&self) -> f64 {
        self.excess_return() / self.sigma
    }

    /// `(mu - r) / sigma^2`, the Merton fraction of a log-utility agent.
    pub fn merton_scale(&self) -> f64 {
        self.excess_return() / self.variance()
    }

    /// `(mu - r)^2 T / sigma^2`, the scale of every relative-regret expression.
    pub fn regret_scale(&self) -> f64 {
        self.excess_return() * self.excess_return() * self.horizon / self.variance()
    }
}

/// Relative risk aversion of an agent. Strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RiskType(f64);

impl RiskType {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && gamma > 0.0 {
            Ok(RiskType(gamma))
        } else {
            Err(invalid("gamma", format!("must be finite and positive, got {gamma}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for RiskType {
    type Error = Error;

    fn try_from(gamma: f64) -> Result<Self> {
        RiskType::new(gamma)
    }
}

impl From<RiskType> for f64 {
    fn from(gamma: RiskType) -> f64 {
        gamma.0
    }
}

/// Exposure to the risky factor. Any finite real: negative values are short positions and
/// values above one are leveraged. Nothing in this crate clamps it.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Decision(f64);

impl Decision {
    pub fn new(m: f64) -> Result<Self> {
        if m.is_finite() {
            Ok(Decision(m))
        } else {
            Err(invalid("m", format!("must be finite, got {m}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Unchecked constructor for values already known to be finite.
    pub(crate) fn from_f64(m: f64) -> Self {
        debug_assert!(m.is_finite());
        Decision(m)
    }
}

impl TryFrom<f64> for Decision {
    type Error = Error;

    fn try_from(m: f64) -> Result<Self> {
        Decision::new(m)
    }
}

impl From<Decision> for f64 {
    fn from(m: Decision) -> f64 {
        m.0
    }
}

/// Realized payoff `R(m, z)` for a standard-normal draw `z`.
pub fn payoff(mp: &MarketParams, m: Decision, z: f64) -> f64 {
    let m = m.value();
    let t = mp.horizon();
    (mp.r() * t + mp.excess_return() * m * t - 0.5 * mp.variance() * m * m * t
        + m * mp.sigma() * t.sqrt() * z)
        .exp()
}

/// Split of the payoff into its deterministic growth factor and its unit-mean risk factor `Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffDecomposition {
    /// `D(m) = exp(rT + (mu - r) m T)`.
    pub deterministic_factor: f64,
    /// `E[Y^2] = exp(m^2 sigma^2 T)`.
    pub risk_second_moment: f64,
    /// `Var(Y) = exp(m^2 sigma^2 T) - 1`.
    pub risk_variance: f64,
}

pub fn payoff_decomposition(mp: &MarketParams, m: Decision) -> PayoffDecomposition {
    let m = m.value();
    let t = mp.horizon();
    let spread = m * m * mp.variance() * t;
    PayoffDecomposition {
        deterministic_factor: (mp.r() * t + mp.excess_return() * m * t).exp(),
        risk_second_moment: spread.exp(),
        risk_variance: spread.exp_m1(),
    }
}

/// CRRA utility `(w^(1-gamma) - 1) / (1 - gamma)`, with `log(w)` at `gamma = 1`.
pub fn utility(gamma: RiskType, w: f64) -> Result<f64> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::Domain(format!("utility needs positive finite wealth, got {w}")));
    }
    Ok(crra_from_log(gamma.value(), w.ln()))
}

/// CRRA utility evaluated from `log(w)`. Uses `expm1` so the power branch stays accurate
/// right up to the log band.
pub(crate) fn crra_from_log(gamma: f64, log_w: f64) -> f64 {
    let k = 1.0 - gamma;
    if k.abs() < LOG_BRANCH_BAND {
        log_w
    } else {
        (k * log_w).exp_m1() / k
    }
}

/// Inverse of [`utility`]. `None` if `y` lies outside the range of the utility.
pub fn inverse_utility(gamma: RiskType, y: f64) -> Option<f64> {
    let k = 1.0 - gamma.value();
    if k.abs() < LOG_BRANCH_BAND {
        return Some(y.exp());
    }
    let base = k * y;
    if base <= -1.0 {
        return None;
    }
    Some((base.ln_1p() / k).exp())
}

/// `log CE(gamma, m) = rT + (mu - r) m T - gamma m^2 sigma^2 T / 2`.
pub fn log_certainty_equivalent(mp: &MarketParams, gamma: f64, m: f64) -> f64 {
    let t = mp.horizon();
    mp.r() * t + mp.excess_return() * m * t - 0.5 * gamma * m * m * mp.variance() * t
}

pub fn certainty_equivalent(mp: &MarketParams, gamma: RiskType, m: Decision) -> f64 {
    log_certainty_equivalent(mp, gamma.value(), m.value()).exp()
}

/// Individually optimal exposure `(mu - r) / (sigma^2 gamma)`.
pub fn merton_fraction(mp: &MarketParams, gamma: RiskType) -> Decision {
    Decision(mp.merton_scale() / gamma.value())
}

/// The risk type for which `m` is individually optimal; inverse of [`merton_fraction`].
pub fn implied_risk_type(mp: &MarketParams, m: Decision) -> Result<RiskType> {
    let m = m.value();
    if m <= 0.0 {
        return Err(Error::Domain(format!(
            "implied risk type needs a positive decision, got {m}"
        )));
    }
    RiskType::new(mp.merton_scale() / m)
}
