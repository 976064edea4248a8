//! Interval partitions of the risk-type support and the matching decision menus.
//!
//! Each cell of a partition gets its own planner decision. At an optimum every interior
//! boundary is the harmonic mean of the risk types implied by the two adjacent decisions, which
//! is exactly the type indifferent between them; offering the decisions as a menu therefore
//! reproduces the grouping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distributions::{self, TypeDistribution};
use crate::error::{invalid, Error, Result};
use crate::model::{log_certainty_equivalent, merton_fraction, Decision, MarketParams, RiskType};
use crate::single::{self, PlannerPreferences};

/// Boundaries `a = g_0 <= ... <= g_n = b`. Strictly increasing unless `a = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    boundaries: Vec<f64>,
}

impl Partition {
    pub fn new(boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(invalid("boundaries", "a partition needs at least two boundaries"));
        }
        if boundaries.iter().any(|g| !g.is_finite() || *g <= 0.0) {
            return Err(invalid("boundaries", "boundaries must be positive and finite"));
        }
        let flat = boundaries.iter().all(|g| *g == boundaries[0]);
        if !flat && boundaries.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("boundaries", "boundaries must be strictly increasing"));
        }
        Ok(Partition { boundaries })
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell `i` (0-based) as `(g_i, g_{i+1})`.
    pub fn cell(&self, i: usize) -> (f64, f64) {
        (self.boundaries[i], self.boundaries[i + 1])
    }

    pub fn interior(&self) -> &[f64] {
        &self.boundaries[1..self.boundaries.len() - 1]
    }

    /// Index of the closed cell containing `g`, the lower one on a shared boundary.
    pub fn locate(&self, g: f64) -> usize {
        self.interior().iter().position(|&b| g <= b).unwrap_or(self.len() - 1)
    }
}

/// Strictly decreasing positive decisions `m_1 > ... > m_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionMenu {
    decisions: Vec<Decision>,
}

impl DecisionMenu {
    pub fn new(decisions: Vec<Decision>) -> Result<Self> {
        if decisions.is_empty() {
            return Err(invalid("menu", "a menu needs at least one decision"));
        }
        if decisions.iter().any(|m| m.value() <= 0.0) {
            return Err(invalid("menu", "decisions must be positive"));
        }
        if decisions.windows(2).any(|w| w[1].value() >= w[0].value()) {
            return Err(invalid("menu", "decisions must be strictly decreasing"));
        }
        Ok(DecisionMenu { decisions })
    }

    pub fn from_values(values: &[f64]) -> Result<Self> {
        let ds = values.iter().map(|&m| Decision::new(m)).collect::<Result<Vec<_>>>()?;
        DecisionMenu::new(ds)
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupingDiagnostics {
    /// Lloyd sweeps performed for the returned solution.
    pub iterations: usize,
    /// Welfare after each sweep.
    pub trace: Vec<f64>,
    pub converged: bool,
    /// True if the sweep cap was hit and random restarts were tried.
    pub multistart: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupedSolution {
    pub partition: Partition,
    pub menu: DecisionMenu,
    /// Risk types implied by the menu decisions.
    pub cell_types: Vec<RiskType>,
    pub welfare: f64,
    pub diagnostics: GroupingDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupingOptions {
    pub max_iterations: usize,
    /// Stop once welfare improves by less than this.
    pub welfare_tol: f64,
    /// ...and no boundary moved by more than this, relative.
    pub boundary_tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for GroupingOptions {
    fn default() -> Self {
        GroupingOptions {
            max_iterations: 1000,
            welfare_tol: 1e-12,
            boundary_tol: 1e-10,
            restarts: 16,
            seed: 0x5eed,
        }
    }
}

pub fn harmonic_mean(x: f64, y: f64) -> f64 {
    2.0 * x * y / (x + y)
}

/// The `n - 1` risk types indifferent between adjacent menu decisions.
pub fn boundaries_from_menu(mp: &MarketParams, menu: &DecisionMenu) -> Vec<f64> {
    menu.decisions
        .windows(2)
        .map(|w| {
            let (gi, gj) = (mp.merton_scale() / w[0].value(), mp.merton_scale() / w[1].value());
            harmonic_mean(gi, gj)
        })
        .collect()
}

/// 0-based index of the menu entry with the highest certainty equivalent for `gamma`;
/// ties go to the lower index.
pub fn agent_choice(mp: &MarketParams, gamma: RiskType, menu: &DecisionMenu) -> usize {
    let bounds = boundaries_from_menu(mp, menu);
    bounds.iter().position(|&b| gamma.value() <= b).unwrap_or(menu.len() - 1)
}

fn check_shapes(partition: &Partition, menu: &DecisionMenu) -> Result<()> {
    if partition.len() != menu.len() {
        return Err(invalid(
            "menu",
            format!("{} decisions for {} cells", menu.len(), partition.len()),
        ));
    }
    Ok(())
}

/// `sum_i ∫_cell_i v(CE(g, m_i)) dF(g)`. Cells are closed; atoms only ever sit at the support
/// endpoints, which belong to the first and last cells.
pub fn grouped_welfare(
    mp: &MarketParams,
    dist: &TypeDistribution,
    prefs: &PlannerPreferences,
    partition: &Partition,
    menu: &DecisionMenu,
) -> Result<f64> {
    check_shapes(partition, menu)?;
    (0..partition.len())
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = partition.cell(i);
            let m = menu.decisions[i].value();
            dist.integrate(lo, hi, |g| prefs.value_from_log(log_certainty_equivalent(mp, g, m)))
        })
        .collect::<Result<Vec<f64>>>()
        .map(|v| v.iter().sum())
}

/// `g_i = a^(1 - i/n) b^(i/n)`.
pub fn geometric_partition(a: RiskType, b: RiskType, n: usize) -> Result<Partition> {
    if n == 0 {
        return Err(invalid("n", "need at least one group"));
    }
    let (a, b) = (a.value(), b.value());
    if b < a {
        return Err(invalid("b", "support end below start"));
    }
    let mut g: Vec<f64> = (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            a.powf(1.0 - t) * b.powf(t)
        })
        .collect();
    g[0] = a;
    g[n] = b;
    Partition::new(g)
}

/// Best decision for each cell; a cell without mass gets the Merton fraction of its midpoint.
fn cell_decisions(
    mp: &MarketParams,
    dist: &TypeDistribution,
    prefs: &PlannerPreferences,
    partition: &Partition,
) -> Result<Vec<f64>> {
    (0..partition.len())
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = partition.cell(i);
            match distributions::restrict(dist, lo, hi) {
                Ok(cell) => Ok(single::solve(mp, &cell, prefs)?.m_star.value()),
                Err(Error::ZeroMass { .. }) => Ok(mp.merton_scale() / (0.5 * (lo + hi))),
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn menu_of(values: &[f64]) -> Result<DecisionMenu> {
    DecisionMenu::new(values.iter().map(|&m| Decision::from_f64(m)).collect())
}

struct LloydRun {
    partition: Partition,
    menu: DecisionMenu,
    welfare: f64,
    trace: Vec<f64>,
    converged: bool,
}

fn lloyd(
    mp: &MarketParams,
    dist: &TypeDistribution,
    prefs: &PlannerPreferences,
    start: Partition,
    opts: &GroupingOptions,
) -> Result<LloydRun> {
    let mut partition = start;
    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_iterations {
        let menu = menu_of(&cell_decisions(mp, dist, prefs, &partition)?)?;
        let welfare = grouped_welfare(mp, dist, prefs, &partition, &menu)?;
        let improvement = trace.last().map(|w| welfare - w);
        trace.push(welfare);

        let mut next = partition.boundaries.clone();
        let interior = boundaries_from_menu(mp, &menu);
        let n = next.len() - 1;
        next[1..n].copy_from_slice(&interior);
        let movement = partition
            .boundaries
            .iter()
            .zip(&next)
            .map(|(x, y)| ((x - y) / x).abs())
            .fold(0.0, f64::max);
        partition = Partition::new(next)?;
        if let Some(dw) = improvement {
            if dw.abs() < opts.welfare_tol && movement < opts.boundary_tol {
                converged = true;
                break;
            }
        }
    }
    // decisions consistent with the final boundaries
    let menu = menu_of(&cell_decisions(mp, dist, prefs, &partition)?)?;
    let welfare = grouped_welfare(mp, dist, prefs, &partition, &menu)?;
    Ok(LloydRun {
        partition,
        menu,
        welfare,
        trace,
        converged,
    })
}

fn random_partition(a: f64, b: f64, n: usize, rng: &mut ChaCha8Rng) -> Result<Partition> {
    let (la, lb) = (a.ln(), b.ln());
    let mut interior: Vec<f64> = (1..n).map(|_| (la + (lb - la) * rng.random::<f64>()).exp()).collect();
    interior.sort_by(|x, y| x.total_cmp(y));
    let mut g = vec![a];
    g.extend(interior);
    g.push(b);
    Partition::new(g)
}

fn package(mp: &MarketParams, run: LloydRun, multistart: bool) -> Result<GroupedSolution> {
    let cell_types = run
        .menu
        .decisions
        .iter()
        .map(|m| RiskType::new(mp.merton_scale() / m.value()))
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupedSolution {
        partition: run.partition,
        menu: run.menu,
        cell_types,
        welfare: run.welfare,
        diagnostics: GroupingDiagnostics {
            iterations: run.trace.len(),
            trace: run.trace,
            converged: run.converged,
            multistart,
        },
    })
}

/// Optimal `n`-cell grouping with default [`GroupingOptions`].
pub fn solve_grouping(
    mp: &MarketParams,
    dist: &TypeDistribution,
    prefs: &PlannerPreferences,
    n: usize,
) -> Result<GroupedSolution> {
    solve_grouping_with(mp, dist, prefs, n, &GroupingOptions::default())
}

/// Lloyd alternation from the geometric partition: solve each cell, then move every interior
/// boundary to the indifference type of its neighbours. A point-mass population collapses to
/// a single group.
pub fn solve_grouping_with(
    mp: &MarketParams,
    dist: &TypeDistribution,
    prefs: &PlannerPreferences,
    n: usize,
    opts: &GroupingOptions,
) -> Result<GroupedSolution> {
    if n == 0 {
        return Err(invalid("n", "need at least one group"));
    }
    let (a, b) = dist.support();
    let n = if a == b { 1 } else { n };
    let start = geometric_partition(RiskType::new(a)?, RiskType::new(b)?, n)?;
    let run = lloyd(mp, dist, prefs, start, opts)?;
    if run.converged || n == 1 {
        return package(mp, run, false);
    }
    let mut best = run;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<Partition> = (0..opts.restarts)
        .map(|_| random_partition(a, b, n, &mut rng))
        .collect::<Result<_>>()?;
    for start in starts {
        let run = lloyd(mp, dist, prefs, start, opts)?;
        if run.welfare > best.welfare {
            best = run;
        }
    }
    package(mp, best, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub consistent: bool,
    pub checked: usize,
    pub mismatches: usize,
}

/// Grid points checked by [`menu_equivalence_check`].
pub const EQUIVALENCE_GRID: usize = 10_000;

/// Whether every agent, choosing freely from the menu, lands in their own partition cell.
/// Points within `1e-12` (relative) of a boundary are skipped.
pub fn menu_equivalence_check(mp: &MarketParams, solution: &GroupedSolution) -> EquivalenceReport {
    let p = &solution.partition;
    let (a, b) = (p.boundaries[0], p.boundaries[p.len()]);
    let mut checked = 0;
    let mut mismatches = 0;
    for k in 0..EQUIVALENCE_GRID {
        let g = a + (b - a) * (k as f64 + 0.5) / EQUIVALENCE_GRID as f64;
        if p.interior().iter().any(|&x| (g - x).abs() <= 1e-12 * x) {
            continue;
        }
        let Ok(gamma) = RiskType::new(g) else { continue };
        checked += 1;
        if agent_choice(mp, gamma, &solution.menu) != p.locate(g) {
            mismatches += 1;
        }
    }
    EquivalenceReport {
        consistent: mismatches == 0,
        checked,
        mismatches,
    }
}

/// Upper bound on grouped welfare: every type receives their own Merton fraction.
pub fn individual_welfare(
    mp: &MarketParams,
    dist: &TypeDistribution,
    prefs: &PlannerPreferences,
) -> Result<f64> {
    distributions::quadrature_expectation(dist, |g| {
        let m = merton_fraction(mp, RiskType::new(g).expect("support is positive"));
        prefs.value_from_log(log_certainty_equivalent(mp, g, m.value()))
    })
}
