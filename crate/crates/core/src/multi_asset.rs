//! Time-varying exposures, several risky assets, and Monte Carlo checks of the closed forms.
//!
//! A deterministic exposure path only enters certainty equivalents through `∫m dt` and
//! `∫m^2 dt`, so the constant path with the same average dominates every other. With `d`
//! risky assets every CRRA investor holds a multiple of the tangency portfolio, which turns
//! the market into a single asset with excess return and variance both equal to `k`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::model::{MarketParams, RiskType};

/// Largest accepted condition number of the covariance `sigma sigma^T`.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct MultiAssetMarket {
    r: f64,
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    condition: f64,
}

impl MultiAssetMarket {
    /// `sigma` is given row by row and must be square with one row per asset.
    pub fn new(r: f64, mu: &[f64], sigma: &[Vec<f64>]) -> Result<Self> {
        let d = mu.len();
        if d == 0 {
            return Err(invalid("mu", "need at least one risky asset"));
        }
        if !r.is_finite() {
            return Err(invalid("r", "must be finite"));
        }
        if let Some(i) = mu.iter().position(|&m| !(m > r) || !m.is_finite()) {
            return Err(invalid("mu", format!("drift {i} must exceed r = {r}")));
        }
        if sigma.len() != d || sigma.iter().any(|row| row.len() != d) {
            return Err(invalid("sigma", format!("volatility matrix must be {d}x{d}")));
        }
        if sigma.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("sigma", "entries must be finite"));
        }
        let flat: Vec<f64> = sigma.iter().flatten().copied().collect();
        let sigma = DMatrix::from_row_slice(d, d, &flat);
        let cov = &sigma * sigma.transpose();
        let eig = cov.clone().symmetric_eigenvalues();
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &e| (l.min(e), h.max(e)));
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if condition > MAX_CONDITION {
            return Err(Error::Conditioning { condition });
        }
        let chol = Cholesky::new(cov).ok_or(Error::Conditioning { condition })?;
        Ok(MultiAssetMarket {
            r,
            mu: DVector::from_column_slice(mu),
            sigma,
            chol,
            condition,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        &self.sigma * self.sigma.transpose()
    }

    fn excess(&self) -> DVector<f64> {
        self.mu.add_scalar(-self.r)
    }
}

/// `(sigma sigma^T)^{-1} (mu - r)` via the Cholesky factor.
pub fn tangency_portfolio(mkt: &MultiAssetMarket) -> Vec<f64> {
    mkt.chol.solve(&mkt.excess()).iter().copied().collect()
}

/// `k = (mu - r)^T (sigma sigma^T)^{-1} (mu - r)`.
pub fn effective_sharpe_squared(mkt: &MultiAssetMarket) -> f64 {
    let tau = DVector::from_vec(tangency_portfolio(mkt));
    mkt.excess().dot(&tau)
}

/// Single-asset market with `mu - r = sigma^2 = k`; decision `c` there is the portfolio
/// `c * tangency`.
pub fn reduce_to_single_asset(mkt: &MultiAssetMarket, horizon: f64) -> Result<MarketParams> {
    let k = effective_sharpe_squared(mkt);
    MarketParams::new(mkt.r, mkt.r + k, k.sqrt(), horizon)
}

/// `log CE` of holding the weight vector `w` over `[0, T]`.
pub fn multi_asset_log_ce(mkt: &MultiAssetMarket, horizon: f64, gamma: RiskType, w: &[f64]) -> Result<f64> {
    if w.len() != mkt.dim() {
        return Err(invalid("weights", format!("expected {} weights", mkt.dim())));
    }
    let w = DVector::from_column_slice(w);
    let quad = w.dot(&(mkt.covariance() * &w));
    Ok(mkt.r * horizon + w.dot(&mkt.excess()) * horizon - 0.5 * gamma.value() * quad * horizon)
}

pub fn multi_asset_ce(mkt: &MultiAssetMarket, horizon: f64, gamma: RiskType, w: &[f64]) -> Result<f64> {
    Ok(multi_asset_log_ce(mkt, horizon, gamma, w)?.exp())
}

/// Individually optimal weights `tangency / gamma`.
pub fn optimal_weights(mkt: &MultiAssetMarket, gamma: RiskType) -> Vec<f64> {
    tangency_portfolio(mkt).into_iter().map(|x| x / gamma.value()).collect()
}

/// Piecewise-constant exposure: `values[j]` on `[breakpoints[j], breakpoints[j + 1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepStrategy {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepStrategy {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(invalid("breakpoints", "need one more breakpoint than values"));
        }
        if breakpoints[0] != 0.0 {
            return Err(invalid("breakpoints", "first breakpoint must be 0"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(invalid("breakpoints", "breakpoints must be finite and strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "exposures must be finite"));
        }
        Ok(StepStrategy { breakpoints, values })
    }

    pub fn constant(m: f64, horizon: f64) -> Result<Self> {
        StepStrategy::new(vec![0.0, horizon], vec![m])
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn pieces(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.windows(2).zip(&self.values).map(|(w, &m)| (w[1] - w[0], m))
    }

    /// `∫ m dt`.
    pub fn integral(&self) -> f64 {
        self.pieces().map(|(dt, m)| m * dt).sum()
    }

    /// `∫ m^2 dt`.
    pub fn integral_sq(&self) -> f64 {
        self.pieces().map(|(dt, m)| m * m * dt).sum()
    }

    /// Average exposure `kappa = ∫ m dt / T`.
    pub fn average(&self) -> f64 {
        self.integral() / self.horizon()
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&m| m == self.values[0])
    }
}

fn check_horizon(mp: &MarketParams, s: &StepStrategy) -> Result<()> {
    if ((s.horizon() - mp.horizon()) / mp.horizon()).abs() > 1e-12 {
        return Err(invalid(
            "strategy",
            format!("strategy ends at {} but the horizon is {}", s.horizon(), mp.horizon()),
        ));
    }
    Ok(())
}

fn log_ce_time_varying(mp: &MarketParams, gamma: f64, s: &StepStrategy) -> f64 {
    mp.r() * mp.horizon() + mp.excess_return() * s.integral() - 0.5 * mp.variance() * gamma * s.integral_sq()
}

/// `exp(rT + (mu - r) ∫m dt - sigma^2 gamma ∫m^2 dt / 2)`.
pub fn ce_time_varying(mp: &MarketParams, gamma: RiskType, s: &StepStrategy) -> Result<f64> {
    check_horizon(mp, s)?;
    Ok(log_ce_time_varying(mp, gamma.value(), s).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    /// Constant `kappa` is at least as good as `s` for every type checked.
    pub dominates: bool,
    /// ...and strictly better for every type.
    pub strict: bool,
    /// `log CE(kappa) - log CE(s)` per type.
    pub log_gaps: Vec<f64>,
}

/// Compares `s` with the constant strategy of the same average exposure.
pub fn pareto_dominance_check(mp: &MarketParams, s: &StepStrategy, gammas: &[RiskType]) -> Result<DominanceReport> {
    check_horizon(mp, s)?;
    let kappa = s.average();
    // the gap is sigma^2 gamma (∫m^2 - kappa^2 T) / 2; the bracket is a variance, so compute it
    // as one to keep it non-negative
    let spread: f64 = s.pieces().map(|(dt, m)| (m - kappa) * (m - kappa) * dt).sum();
    let log_gaps: Vec<f64> = gammas.iter().map(|g| 0.5 * mp.variance() * g.value() * spread).collect();
    Ok(DominanceReport {
        dominates: log_gaps.iter().all(|&x| x >= 0.0),
        strict: log_gaps.iter().all(|&x| x > 0.0),
        log_gaps,
    })
}

/// Paths per independently seeded chunk.
pub const CHUNK: usize = 4096;

/// Terminal wealth from unit initial wealth, exact lognormal increments on each piece.
/// Chunk `j` draws from stream `j` of a generator seeded with `seed`, so the sample does not
/// depend on the number of threads.
pub fn simulate_terminal_wealth(mp: &MarketParams, s: &StepStrategy, paths: usize, seed: u64) -> Result<Vec<f64>> {
    if paths == 0 {
        return Err(invalid("paths", "need at least one path"));
    }
    check_horizon(mp, s)?;
    let pieces: Vec<(f64, f64, f64)> = s
        .pieces()
        .map(|(dt, m)| {
            let drift = (mp.r() + m * mp.excess_return() - 0.5 * mp.variance() * m * m) * dt;
            (drift, m * mp.sigma() * dt.sqrt(), m)
        })
        .collect();
    let chunks = paths.div_ceil(CHUNK);
    let out: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            let len = CHUNK.min(paths - j * CHUNK);
            (0..len)
                .map(|_| {
                    let mut log_v = 0.0;
                    for &(drift, vol, m) in &pieces {
                        log_v += drift;
                        if m != 0.0 {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            log_v += vol * z;
                        }
                    }
                    log_v.exp()
                })
                .collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleCe {
    pub ce: f64,
    /// Delta-method standard error.
    pub standard_error: f64,
}

/// `u^{-1}(mean u(V))` over a wealth sample.
pub fn sample_certainty_equivalent(gamma: RiskType, wealth: &[f64]) -> Result<SampleCe> {
    let n = wealth.len();
    if n < 2 {
        return Err(invalid("wealth", "need at least two samples"));
    }
    if wealth.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("wealth must be positive".into()));
    }
    let k = 1.0 - gamma.value();
    let nf = n as f64;
    if k.abs() < crate::model::LOG_BRANCH_BAND {
        let logs: Vec<f64> = wealth.iter().map(|v| v.ln()).collect();
        let mean = logs.iter().sum::<f64>() / nf;
        let var = logs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        let ce = mean.exp();
        return Ok(SampleCe {
            ce,
            standard_error: ce * (var / nf).sqrt(),
        });
    }
    let ys: Vec<f64> = wealth.iter().map(|v| v.powf(k)).collect();
    let mean = ys.iter().sum::<f64>() / nf;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let ce = mean.powf(1.0 / k);
    Ok(SampleCe {
        ce,
        standard_error: (ce / (k * mean)).abs() * (var / nf).sqrt(),
    })
}
