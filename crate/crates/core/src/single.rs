//! The planner's single decision for a whole population of risk types.
//!
//! The objective is `E_F[v(CE(gamma, m))]`. Its derivative in `m` has the sign of
//! `Phi(m) - m`, where `Phi(m)` is the Merton fraction of the `h`-weighted mean risk type
//! with `h = CE v'(CE)`. For power planner utilities `h` is an exponential tilt in `gamma`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::distributions::{self, TypeDistribution};
use crate::error::{invalid, Result};
use crate::model::{crra_from_log, log_certainty_equivalent, Decision, MarketParams, RiskType};
use crate::roots::{bisect, golden_max};

/// Points in the global scan used for `eta < 1` and general planner utilities.
pub const SCAN_POINTS: usize = 2048;
/// Width at which bisection and golden-section refinement stop.
pub const DECISION_TOL: f64 = 1e-12;
/// Objective values closer than this count as tied; ties go to the smallest decision.
pub const OBJECTIVE_TIE_TOL: f64 = 1e-9;
/// Horizon used as the short-horizon limit in [`horizon_limit_check`].
pub const SHORT_HORIZON: f64 = 1e-6;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The planner's utility over certainty equivalents.
#[derive(Clone)]
pub enum PlannerPreferences {
    /// CRRA planner utility with inequality aversion `eta`; `eta = 1` is logarithmic.
    Power { eta: f64 },
    /// An increasing `v` with its derivative supplied analytically.
    General { v: ScalarFn, v_prime: ScalarFn },
}

impl fmt::Debug for PlannerPreferences {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlannerPreferences::Power { eta } => f.debug_struct("Power").field("eta", eta).finish(),
            PlannerPreferences::General { .. } => f.write_str("General { .. }"),
        }
    }
}

impl PlannerPreferences {
    pub fn power(eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta < 0.0 {
            return Err(invalid("eta", format!("inequality aversion must be finite and >= 0, got {eta}")));
        }
        Ok(PlannerPreferences::Power { eta })
    }

    pub fn logarithmic() -> Self {
        PlannerPreferences::Power { eta: 1.0 }
    }

    /// Checks `v' > 0` on a log-spaced grid over `[1e-3, 1e3]`.
    pub fn general<V, D>(v: V, v_prime: D) -> Result<Self>
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        for k in 0..=60 {
            let w = 10f64.powf(-3.0 + 0.1 * k as f64);
            let d = v_prime(w);
            if !(d > 0.0) || !d.is_finite() {
                return Err(invalid("v_prime", format!("derivative must be positive, got {d} at {w}")));
            }
        }
        Ok(PlannerPreferences::General {
            v: Arc::new(v),
            v_prime: Arc::new(v_prime),
        })
    }

    pub fn eta(&self) -> Option<f64> {
        match self {
            PlannerPreferences::Power { eta } => Some(*eta),
            PlannerPreferences::General { .. } => None,
        }
    }

    fn is_log(&self) -> bool {
        matches!(self, PlannerPreferences::Power { eta } if *eta == 1.0)
    }

    /// `v` evaluated from `log w`.
    pub(crate) fn value_from_log(&self, log_w: f64) -> f64 {
        match self {
            PlannerPreferences::Power { eta } => crra_from_log(*eta, log_w),
            PlannerPreferences::General { v, .. } => v(log_w.exp()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    ClosedForm,
    Bisection,
    GlobalScan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverDiagnostics {
    pub method: SolveMethod,
    pub iterations: usize,
    /// `|m - Phi(m)|` at the returned decision.
    pub residual: f64,
    /// Every local maximum found by the scan as `(m, objective)`, ascending in `m`.
    pub local_maxima: Vec<(f64, f64)>,
    /// Local maxima whose objective is within [`OBJECTIVE_TIE_TOL`] of the best.
    pub tied_maxima: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleSolution {
    pub m_star: Decision,
    /// The risk type whose Merton fraction is `m_star`.
    pub gamma_star: RiskType,
    pub objective_value: f64,
    pub diagnostics: SolverDiagnostics,
}

/// `E_F[v(CE(gamma, m))]`.
pub fn objective(
    mp: &MarketParams,
    dist: &TypeDistribution,
    prefs: &PlannerPreferences,
    m: Decision,
) -> Result<f64> {
    let m = m.value();
    distributions::quadrature_expectation(dist, |g| {
        prefs.value_from_log(log_certainty_equivalent(mp, g, m))
    })
}

/// `theta(m) = sigma^2 (eta - 1) T m^2 / 2`.
pub fn tilting_coefficient(mp: &MarketParams, eta: f64, m: Decision) -> f64 {
    0.5 * mp.variance() * (eta - 1.0) * mp.horizon() * m.value() * m.value()
}

/// `h`-weighted mean risk type at decision `m`.
fn weighted_type(
    mp: &MarketParams,
    dist: &TypeDistribution,
    prefs: &PlannerPreferences,
    m: f64,
) -> Result<f64> {
    match prefs {
        PlannerPreferences::Power { eta } => {
            distributions::tilted_mean(dist, tilting_coefficient(mp, *eta, Decision::from_f64(m)))
        }
        PlannerPreferences::General { v_prime, .. } => {
            let h = |g: f64| {
                let ce = log_certainty_equivalent(mp, g, m).exp();
                ce * v_prime(ce)
            };
            let num = distributions::quadrature_expectation(dist, |g| g * h(g))?;
            let den = distributions::quadrature_expectation(dist, h)?;
            let (a, b) = dist.support();
            Ok((num / den).clamp(a, b))
        }
    }
}

/// `Phi(m)`: the Merton fraction of the `h`-weighted mean risk type.
pub fn fixed_point_map(
    mp: &MarketParams,
    dist: &TypeDistribution,
    prefs: &PlannerPreferences,
    m: Decision,
) -> Result<Decision> {
    let g = weighted_type(mp, dist, prefs, m.value())?;
    Ok(Decision::from_f64(mp.merton_scale() / g))
}

fn finish(
    mp: &MarketParams,
    dist: &TypeDistribution,
    prefs: &PlannerPreferences,
    m: f64,
    method: SolveMethod,
    iterations: usize,
    local_maxima: Vec<(f64, f64)>,
    tied_maxima: usize,
) -> Result<SingleSolution> {
    let (a, b) = dist.support();
    let m_star = Decision::from_f64(m);
    let phi = fixed_point_map(mp, dist, prefs, m_star)?.value();
    let gamma = (mp.merton_scale() / m).clamp(a, b);
    Ok(SingleSolution {
        m_star,
        gamma_star: RiskType::new(gamma)?,
        objective_value: objective(mp, dist, prefs, m_star)?,
        diagnostics: SolverDiagnostics {
            method,
            iterations,
            residual: (m - phi).abs(),
            local_maxima,
            tied_maxima,
        },
    })
}

/// Maximizer of [`objective`] over `m`; the smallest one if several tie.
pub fn solve(
    mp: &MarketParams,
    dist: &TypeDistribution,
    prefs: &PlannerPreferences,
) -> Result<SingleSolution> {
    let (a, b) = dist.support();
    if dist.is_degenerate() || prefs.is_log() {
        let m = mp.merton_scale() / distributions::mean(dist)?;
        return finish(mp, dist, prefs, m, SolveMethod::ClosedForm, 0, Vec::new(), 1);
    }
    let (lo, hi) = (mp.merton_scale() / b, mp.merton_scale() / a);
    let gap = |m: f64| -> Result<f64> { Ok(m - mp.merton_scale() / weighted_type(mp, dist, prefs, m)?) };

    if let PlannerPreferences::Power { eta } = prefs {
        if *eta > 1.0 {
            // Phi is decreasing here, so m - Phi(m) has exactly one sign change
            let root = bisect(gap, lo, hi, DECISION_TOL)?;
            return finish(mp, dist, prefs, root.x, SolveMethod::Bisection, root.iterations, Vec::new(), 1);
        }
    }
    global_scan(mp, dist, prefs, lo, hi)
}

fn global_scan(
    mp: &MarketParams,
    dist: &TypeDistribution,
    prefs: &PlannerPreferences,
    lo: f64,
    hi: f64,
) -> Result<SingleSolution> {
    let obj = |m: f64| objective(mp, dist, prefs, Decision::from_f64(m));
    let gap = |m: f64| -> Result<f64> { Ok(mp.merton_scale() / weighted_type(mp, dist, prefs, m)? - m) };
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|k| if k + 1 == SCAN_POINTS { hi } else { lo + step * k as f64 })
        .collect();
    let values: Vec<f64> = grid.par_iter().map(|&m| obj(m)).collect::<Result<_>>()?;

    let mut iterations = 0;
    let mut maxima = Vec::new();
    for k in 0..SCAN_POINTS {
        let left = k == 0 || values[k] >= values[k - 1];
        let right = k + 1 == SCAN_POINTS || values[k] > values[k + 1];
        if !(left && right) {
            continue;
        }
        let (l, r) = (grid[k.saturating_sub(1)], grid[(k + 1).min(SCAN_POINTS - 1)]);
        let g = golden_max(obj, l, r, DECISION_TOL)?;
        iterations += g.iterations;
        let mut m = g.x;
        // golden section only resolves a flat maximum to about sqrt(eps); the derivative
        // sign is exact, so finish on it when the bracket straddles a stationary point
        if gap(l)? > 0.0 && gap(r)? < 0.0 {
            let root = bisect(gap, l, r, DECISION_TOL)?;
            iterations += root.iterations;
            m = root.x;
        } else if k == 0 && gap(lo)? <= 0.0 {
            m = lo;
        } else if k + 1 == SCAN_POINTS && gap(hi)? >= 0.0 {
            m = hi;
        }
        maxima.push((m, obj(m)?));
    }
    let best = maxima.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<&(f64, f64)> = maxima.iter().filter(|p| p.1 >= best - OBJECTIVE_TIE_TOL).collect();
    let m = tied.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let n_tied = tied.len();
    finish(mp, dist, prefs, m, SolveMethod::GlobalScan, iterations, maxima, n_tied)
}

/// Optimal decision at the market's horizon and at [`SHORT_HORIZON`].
pub fn horizon_limit_check(
    mp: &MarketParams,
    dist: &TypeDistribution,
    eta: f64,
) -> Result<(Decision, Decision)> {
    let prefs = PlannerPreferences::power(eta)?;
    let at_t = solve(mp, dist, &prefs)?.m_star;
    let short = solve(&mp.with_horizon(SHORT_HORIZON)?, dist, &prefs)?.m_star;
    Ok((at_t, short))
}
