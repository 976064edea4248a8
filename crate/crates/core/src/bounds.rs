//! Welfare of a logarithmic planner as a function of the implied risk aversion handed to each
//! type, and bounds on the loss from offering only `n` decisions.
//!
//! With decision `m*(G(gamma))` for type `gamma`, the planner's growth rate is
//! `r + (Sharpe^2 / 2) E[2/G - gamma/G^2]`. For the best `G` that is constant on each cell of a
//! partition the expectation collapses to `sum_i P_i^2 / M_i` with `P_i` the cell mass and
//! `M_i = ∫_cell gamma dF`.

use crate::distributions::{self, TypeDistribution};
use crate::error::{invalid, Error, Result};
use crate::model::{MarketParams, RiskType};
use crate::partition::{self, Partition};
use crate::single::PlannerPreferences;

/// The risk type whose Merton fraction each type is given.
#[derive(Debug, Clone, PartialEq)]
pub enum ImpliedRiskAversionFn {
    /// `G = values[i]` on cell `i` of the partition.
    Step { partition: Partition, values: Vec<f64> },
    /// `G(gamma) = gamma`: everyone gets their own Merton fraction.
    Identity,
}

impl ImpliedRiskAversionFn {
    pub fn step(partition: Partition, values: Vec<f64>) -> Result<Self> {
        if values.len() != partition.len() {
            return Err(invalid("values", "one value per cell required"));
        }
        let b = partition.boundaries();
        let (lo, hi) = (b[0], b[b.len() - 1]);
        if values.iter().any(|&g| !(g >= lo && g <= hi)) {
            return Err(invalid("values", "step values must lie inside the support"));
        }
        Ok(ImpliedRiskAversionFn::Step { partition, values })
    }

    pub fn eval(&self, g: f64) -> f64 {
        match self {
            ImpliedRiskAversionFn::Step { partition, values } => values[partition.locate(g)],
            ImpliedRiskAversionFn::Identity => g,
        }
    }
}

/// Growth rate of the logarithmic planner's welfare, `r + (Sharpe^2/2) E[2/G - gamma/G^2]`.
pub fn welfare_rate(mp: &MarketParams, dist: &TypeDistribution, g: &ImpliedRiskAversionFn) -> Result<f64> {
    let e = match g {
        ImpliedRiskAversionFn::Identity => distributions::mean_reciprocal(dist)?,
        ImpliedRiskAversionFn::Step { partition, values } => {
            let mut total = 0.0;
            for (i, &gi) in values.iter().enumerate() {
                let (lo, hi) = partition.cell(i);
                // assign shared boundaries to the lower cell only
                let lo = if i == 0 { lo } else { lo.next_up() };
                if hi < lo {
                    continue;
                }
                total += dist.integrate(lo, hi, |x| 2.0 / gi - x / (gi * gi))?;
            }
            total
        }
    };
    Ok(mp.r() + 0.5 * mp.sharpe_ratio().powi(2) * e)
}

fn cell_moments(dist: &TypeDistribution, partition: &Partition, i: usize) -> Result<(f64, f64)> {
    let (lo, hi) = partition.cell(i);
    let lo = if i == 0 { lo } else { lo.next_up() };
    if hi < lo {
        return Ok((0.0, 0.0));
    }
    Ok((dist.mass(lo, hi)?, dist.integrate(lo, hi, |g| g)?))
}

/// `sum_i P_i^2 / M_i`; every cell must carry mass.
pub fn e_star(dist: &TypeDistribution, partition: &Partition) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..partition.len() {
        let (p, m) = cell_moments(dist, partition, i)?;
        if p <= 0.0 {
            let (lo, hi) = partition.cell(i);
            return Err(Error::ZeroMass { lo, hi });
        }
        total += p * p / m;
    }
    Ok(total)
}

/// As [`e_star`], but cells without mass contribute nothing.
fn e_star_skipping_empty(dist: &TypeDistribution, partition: &Partition) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..partition.len() {
        let (p, m) = cell_moments(dist, partition, i)?;
        if p > 0.0 {
            total += p * p / m;
        }
    }
    Ok(total)
}

/// `E[1/gamma]`, the value with a decision tailored to every type.
pub fn e_star_infinity(dist: &TypeDistribution) -> Result<f64> {
    distributions::mean_reciprocal(dist)
}

/// `((b/a)^(1/n) + (a/b)^(1/n) + 2) / 4`.
pub fn bound_factor(a: RiskType, b: RiskType, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "need at least one group"));
    }
    if b.value() < a.value() {
        return Err(invalid("b", "support end below start"));
    }
    let q = (b.value() / a.value()).powf(1.0 / n as f64);
    Ok((q + 1.0 / q + 2.0) / 4.0)
}

/// `log(b/a) / log(4R - 3)`: any menu size at or above it keeps `bound_factor` below `R`.
/// Infinite for `R = 1` unless `a = b`.
pub fn min_menu_size(a: RiskType, b: RiskType, r: f64) -> Result<f64> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(invalid("R", format!("loss ratio must be finite and at least 1, got {r}")));
    }
    if b.value() < a.value() {
        return Err(invalid("b", "support end below start"));
    }
    if a == b {
        return Ok(0.0);
    }
    if r == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok((b.value() / a.value()).ln() / (4.0 * r - 3.0).ln())
}

/// The equal-weight two-point distribution on `{a, b}`, for which the single-decision bound is
/// tight, with `|E[1/gamma] E[gamma] 4ab/(a+b)^2 - 1|`.
pub fn sharpness_witness(a: RiskType, b: RiskType) -> Result<(TypeDistribution, f64)> {
    if !(a.value() < b.value()) {
        return Err(invalid("b", "witness needs a < b"));
    }
    let dist = TypeDistribution::two_point(a.value(), b.value(), 0.5)?;
    let (a, b) = (a.value(), b.value());
    let product = e_star_infinity(&dist)? * distributions::mean(&dist)?;
    let gap = (product * 4.0 * a * b / ((a + b) * (a + b)) - 1.0).abs();
    Ok((dist, gap))
}

/// `E_n*` together with the optimal partition of a logarithmic planner.
pub fn optimal_e_star(dist: &TypeDistribution, n: usize) -> Result<(f64, Partition)> {
    // the logarithmic planner's partition does not depend on the market
    let mp = MarketParams::new(0.0, 1.0, 1.0, 1.0)?;
    let sol = partition::solve_grouping(&mp, dist, &PlannerPreferences::logarithmic(), n)?;
    Ok((e_star_skipping_empty(dist, &sol.partition)?, sol.partition))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub e_value: f64,
    pub e_infinity: f64,
    pub bound_factor: f64,
    /// `E_inf* / E_n*`, at most `bound_factor`.
    pub ratio: f64,
}

pub fn bound_report(dist: &TypeDistribution, n: usize) -> Result<BoundReport> {
    let (e_value, _) = optimal_e_star(dist, n)?;
    let (a, b) = dist.support();
    let e_infinity = e_star_infinity(dist)?;
    Ok(BoundReport {
        n,
        e_value,
        e_infinity,
        bound_factor: bound_factor(RiskType::new(a)?, RiskType::new(b)?, n)?,
        ratio: e_infinity / e_value,
    })
}
