//! Decisions that are robust to not knowing the type distribution beyond its support `[a, b]`.
//!
//! A logarithmic planner plays against an adversary who picks the distribution. Under the
//! absolute criterion the adversary simply concentrates on `b`. Under the relative criterion
//! (regret against the best decision for the true distribution) the single-decision game has a
//! mixed equilibrium on `{a, b}` and the `n`-entry menu has a closed form in which the adversary
//! is indifferent between point masses at every cell boundary.
//!
//! Regret is measured in units of `Z = (mu - r)^2 T / sigma^2`.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::model::{Decision, MarketParams, RiskType};
use crate::partition::{self, DecisionMenu};
use crate::roots::{bisect, golden_max};
use crate::distributions::{self, TypeDistribution};

/// `E_F[log CE(gamma, m)] = rT + (mu - r) m T - m^2 sigma^2 T E_F[gamma] / 2`.
pub fn absolute_criterion(mp: &MarketParams, m: Decision, dist: &TypeDistribution) -> Result<f64> {
    let mean = distributions::mean(dist)?;
    Ok(mp.r() * mp.horizon() + absolute_excess(mp, m.value(), mean))
}

fn absolute_excess(mp: &MarketParams, m: f64, mean: f64) -> f64 {
    let t = mp.horizon();
    mp.excess_return() * m * t - 0.5 * m * m * mp.variance() * t * mean
}

/// Regret of `m` when the mean risk type is `mean`; never positive.
pub fn relative_at_mean(mp: &MarketParams, m: f64, mean: f64) -> f64 {
    absolute_excess(mp, m, mean) - 0.5 * mp.regret_scale() / mean
}

/// `A(m, F) - max_m' A(m', F)`.
pub fn relative_criterion(mp: &MarketParams, m: Decision, dist: &TypeDistribution) -> Result<f64> {
    Ok(relative_at_mean(mp, m.value(), distributions::mean(dist)?))
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlannerMove {
    Single(Decision),
    Menu(DecisionMenu),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameOutcome {
    pub planner: PlannerMove,
    /// Locations of the adversary's point masses.
    pub adversary_support: Vec<f64>,
    /// Weight on the lowest support point when the adversary mixes.
    pub mixing_probability: Option<f64>,
    pub value: f64,
}

fn check_support(a: RiskType, b: RiskType) -> Result<(f64, f64)> {
    if b.value() < a.value() {
        return Err(invalid("b", "support end below start"));
    }
    Ok((a.value(), b.value()))
}

/// Absolute-criterion game: the adversary puts everything on `b`.
pub fn acg_equilibrium(mp: &MarketParams, a: RiskType, b: RiskType) -> Result<GameOutcome> {
    let (_, b) = check_support(a, b)?;
    let m = mp.merton_scale() / b;
    Ok(GameOutcome {
        planner: PlannerMove::Single(Decision::from_f64(m)),
        adversary_support: vec![b],
        mixing_probability: None,
        value: mp.r() * mp.horizon() + absolute_excess(mp, m, b),
    })
}

/// Relative-criterion game with a single decision: the planner targets `sqrt(ab)` and the
/// adversary mixes `a` (weight `sqrt b / (sqrt a + sqrt b)`) with `b`.
pub fn rcg_equilibrium(mp: &MarketParams, a: RiskType, b: RiskType) -> Result<GameOutcome> {
    let (a, b) = check_support(a, b)?;
    if a == b {
        return Ok(GameOutcome {
            planner: PlannerMove::Single(Decision::from_f64(mp.merton_scale() / a)),
            adversary_support: vec![a],
            mixing_probability: None,
            value: 0.0,
        });
    }
    let (sa, sb) = (a.sqrt(), b.sqrt());
    Ok(GameOutcome {
        planner: PlannerMove::Single(Decision::from_f64(mp.merton_scale() / (sa * sb))),
        adversary_support: vec![a, b],
        mixing_probability: Some(sb / (sa + sb)),
        value: -0.5 * mp.regret_scale() * (1.0 / sa - 1.0 / sb).powi(2),
    })
}

/// Closed-form robust menu. Index `i` of `targeted_types` and `decisions` is cell `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustMenu {
    pub n: usize,
    /// `h_0 = sqrt b` down to `h_n = sqrt a`.
    pub h: Vec<f64>,
    pub targeted_types: Vec<f64>,
    /// `g_0 = a` up to `g_n = b`.
    pub boundaries: Vec<f64>,
    pub decisions: Vec<Decision>,
    /// Worst-case regret guaranteed by the menu; `<= 0`.
    pub regret_guarantee: f64,
}

impl RobustMenu {
    /// The decisions as a menu; collapses to one entry when the support is a point.
    pub fn menu(&self) -> Result<DecisionMenu> {
        let mut ds = self.decisions.clone();
        ds.dedup();
        DecisionMenu::new(ds)
    }
}

/// `h_i`, targeted types and boundaries of the robust partition; independent of the market.
pub fn robust_partition(a: RiskType, b: RiskType, n: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let (a, b) = check_support(a, b)?;
    if n == 0 {
        return Err(invalid("n", "need at least one decision"));
    }
    let (sa, sb) = (a.sqrt(), b.sqrt());
    let nf = n as f64;
    let h: Vec<f64> = (0..=n).map(|i| sa * i as f64 / nf + sb * (n - i) as f64 / nf).collect();
    let gammas: Vec<f64> = (1..=n).map(|i| a * b / (h[i - 1] * h[i])).collect();
    let mut g: Vec<f64> = h.iter().map(|hi| a * b / (hi * hi)).collect();
    g[0] = a;
    g[n] = b;
    Ok((h, gammas, g))
}

pub fn robust_menu(mp: &MarketParams, a: RiskType, b: RiskType, n: usize) -> Result<RobustMenu> {
    let (h, targeted_types, boundaries) = robust_partition(a, b, n)?;
    let decisions = targeted_types
        .iter()
        .map(|g| Decision::from_f64(mp.merton_scale() / g))
        .collect();
    let (sa, sb) = (a.value().sqrt(), b.value().sqrt());
    let regret_guarantee = -0.5 * mp.regret_scale() / (n * n) as f64 * (1.0 / sa - 1.0 / sb).powi(2);
    Ok(RobustMenu {
        n,
        h,
        targeted_types,
        boundaries,
        decisions,
        regret_guarantee,
    })
}

/// Largest gap between the regret at each boundary point mass (under the decision the agents
/// there choose) and the guarantee, together with the gap in the per-cell loss formula.
pub fn verify_indifference(mp: &MarketParams, menu: &RobustMenu) -> Result<f64> {
    let dm = DecisionMenu::new(menu.decisions.clone())
        .or_else(|_| menu.menu())?;
    let mut worst: f64 = 0.0;
    for &g in &menu.boundaries {
        let j = partition::agent_choice(mp, RiskType::new(g)?, &dm);
        let value = relative_at_mean(mp, dm.decisions()[j].value(), g);
        worst = worst.max((value - menu.regret_guarantee).abs());
    }
    let (a, b) = (menu.boundaries[0], menu.boundaries[menu.n]);
    for w in menu.h.windows(2) {
        let cell_loss = -0.5 * mp.regret_scale() / (a * b) * (w[0] - w[1]).powi(2);
        worst = worst.max((cell_loss - menu.regret_guarantee).abs());
    }
    Ok(worst)
}

/// Regret when every agent sits at `x` and picks their preferred menu entry.
pub fn point_mass_regret(mp: &MarketParams, menu: &DecisionMenu, x: f64) -> f64 {
    menu.decisions()
        .iter()
        .map(|m| relative_at_mean(mp, m.value(), x))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Worst regret over all distributions on `[a, b]`, and where the adversary puts its mass.
///
/// Within a menu cell the regret of a point mass is concave in its location, so the minimum
/// sits at `a`, `b` or an indifference boundary. At a boundary both adjacent decisions are
/// evaluated and the lower value kept.
pub fn worst_case_regret(mp: &MarketParams, menu: &DecisionMenu, a: RiskType, b: RiskType) -> Result<(f64, f64)> {
    let (a, b) = check_support(a, b)?;
    let ds = menu.decisions();
    let mut best = (f64::INFINITY, a);
    let mut consider = |value: f64, x: f64| {
        if value < best.0 {
            best = (value, x);
        }
    };
    for x in [a, b] {
        consider(point_mass_regret(mp, menu, x), x);
    }
    for (i, g) in partition::boundaries_from_menu(mp, menu).into_iter().enumerate() {
        if g > a && g < b {
            let v = relative_at_mean(mp, ds[i].value(), g).min(relative_at_mean(mp, ds[i + 1].value(), g));
            consider(v, g);
        }
    }
    Ok(best)
}

/// Grid points in [`worst_case_regret_scan`].
pub const SCAN_GRID: usize = 10_000;

/// Brute-force counterpart of [`worst_case_regret`]: point masses on a uniform grid, with
/// golden-section refinement around the lowest grid point.
pub fn worst_case_regret_scan(mp: &MarketParams, menu: &DecisionMenu, a: RiskType, b: RiskType) -> Result<(f64, f64)> {
    let (a, b) = check_support(a, b)?;
    if a == b {
        return Ok((point_mass_regret(mp, menu, a), a));
    }
    let step = (b - a) / (SCAN_GRID - 1) as f64;
    let xs: Vec<f64> = (0..SCAN_GRID).map(|k| if k + 1 == SCAN_GRID { b } else { a + step * k as f64 }).collect();
    let vals: Vec<f64> = xs.par_iter().map(|&x| point_mass_regret(mp, menu, x)).collect();
    let k = (0..SCAN_GRID).fold(0, |best, k| if vals[k] < vals[best] { k } else { best });
    let (lo, hi) = (xs[k.saturating_sub(1)], xs[(k + 1).min(SCAN_GRID - 1)]);
    let refined = golden_max(|x| Ok(-point_mass_regret(mp, menu, x)), lo, hi, 1e-14)?;
    let v = point_mass_regret(mp, menu, refined.x);
    Ok(if v < vals[k] { (v, refined.x) } else { (vals[k], xs[k]) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticsRow {
    /// 1-based cell index.
    pub i: usize,
    pub g: f64,
    pub gamma: f64,
    /// `(g_i - a) / (b - a)`; `None` when `a = b`.
    pub r: Option<f64>,
    /// `(Gamma_i - a) / (b - a)`; `None` when `a = b`.
    pub rho: Option<f64>,
}

/// Relative positions of the robust boundaries and targeted types inside `[a, b]`.
pub fn comparative_statics(a: RiskType, b: RiskType, n: usize) -> Result<Vec<StaticsRow>> {
    let (_, gammas, g) = robust_partition(a, b, n)?;
    let (a, b) = (a.value(), b.value());
    let width = b - a;
    Ok((1..=n)
        .map(|i| StaticsRow {
            i,
            g: g[i],
            gamma: gammas[i - 1],
            r: (width > 0.0).then(|| (g[i] - a) / width),
            rho: (width > 0.0).then(|| (gammas[i - 1] - a) / width),
        })
        .collect())
}

/// The boundary/target sequence rebuilt step by step from a regret level.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimsReport {
    /// `S = -2R / Z`.
    pub s: f64,
    /// `g_0 = a, g_1, ...`.
    pub boundaries: Vec<f64>,
    /// `Gamma_1, Gamma_2, ...`.
    pub targeted_types: Vec<f64>,
}

const CLAIMS_TOL: f64 = 1e-12;

/// Starting from `g_0 = a`, alternately finds the targeted type `Gamma_i > g_{i-1}` and the next
/// boundary `g_i > Gamma_i` at which a point mass has regret exactly `r_target`.
///
/// Both solve `S = g x^2 - 2x + 1/g` with `x = 1/Gamma`, first for `x` given `g`, then for `g`
/// given `x`. No `Gamma` exists once `S >= 1/g`.
pub fn claims_check(mp: &MarketParams, a: RiskType, r_target: f64, steps: usize) -> Result<ClaimsReport> {
    if !(r_target < 0.0) || !r_target.is_finite() {
        return Err(invalid("R_target", format!("regret level must be negative, got {r_target}")));
    }
    let z = mp.regret_scale();
    let s = -2.0 * r_target / z;
    let mut g = a.value();
    let mut boundaries = vec![g];
    let mut targeted_types = Vec::with_capacity(steps);
    for step in 1..=steps {
        if s >= 1.0 / g {
            return Err(Error::Infeasible {
                step,
                regret: r_target,
                limit: -z / (2.0 * g),
            });
        }
        let gg = g;
        let x = bisect(|x| Ok(gg * x * x - 2.0 * x + 1.0 / gg - s), 0.0, 1.0 / g, CLAIMS_TOL * (1.0 / g))?.x;
        let gamma = 1.0 / x;
        let next = bisect(
            |y| Ok(1.0 / y + y / (gamma * gamma) - 2.0 / gamma - s),
            gamma,
            s * gamma * gamma + 2.0 * gamma,
            CLAIMS_TOL * gamma,
        )?
        .x;
        targeted_types.push(gamma);
        boundaries.push(next);
        g = next;
    }
    Ok(ClaimsReport {
        s,
        boundaries,
        targeted_types,
    })
}

/// Whether lowering the regret level pushes every reconstructed boundary and target up.
pub fn claims_monotone(mp: &MarketParams, a: RiskType, targets: &[f64], steps: usize) -> Result<bool> {
    let mut sorted = targets.to_vec();
    sorted.sort_by(|x, y| x.total_cmp(y));
    let reports = sorted
        .iter()
        .map(|&r| claims_check(mp, a, r, steps))
        .collect::<Result<Vec<_>>>()?;
    Ok(reports.windows(2).all(|w| {
        let (lower, higher) = (&w[0], &w[1]);
        lower.boundaries[1..].iter().zip(&higher.boundaries[1..]).all(|(x, y)| x > y)
            && lower.targeted_types.iter().zip(&higher.targeted_types).all(|(x, y)| x > y)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit() -> MarketParams {
        MarketParams::new(0.0, 1.0, 1.0, 1.0).unwrap()
    }

    fn mkt() -> MarketParams {
        MarketParams::new(0.02, 0.07, 0.25, 2.0).unwrap()
    }

    fn rt(g: f64) -> RiskType {
        RiskType::new(g).unwrap()
    }

    fn d(m: f64) -> Decision {
        Decision::new(m).unwrap()
    }

    fn uni() -> TypeDistribution {
        TypeDistribution::uniform(1.0, 10.0).unwrap()
    }

    #[test]
    fn absolute_criterion_examples() {
        let mp = mkt();
        assert!((absolute_criterion(&mp, d(0.0), &uni()).unwrap() - 0.04).abs() < 1e-16);
        let direct = distributions::quadrature_expectation(&uni(), |g| {
            crate::model::log_certainty_equivalent(&mp, g, 0.4)
        })
        .unwrap();
        assert!((absolute_criterion(&mp, d(0.4), &uni()).unwrap() - direct).abs() < 1e-12);
        let pm = TypeDistribution::point_mass(3.0).unwrap();
        let opt = mp.merton_scale() / 3.0;
        let at = absolute_criterion(&mp, d(opt), &pm).unwrap();
        for k in [-0.01, 0.01] {
            assert!(absolute_criterion(&mp, d(opt + k), &pm).unwrap() < at);
        }
    }

    #[test]
    fn relative_criterion_examples() {
        let mp = mkt();
        let opt = d(mp.merton_scale() / 5.5);
        assert!(relative_criterion(&mp, opt, &uni()).unwrap().abs() < 1e-15);
        // unit market, F_a with a = 1, m = m*(sqrt 10)
        let fa = TypeDistribution::point_mass(1.0).unwrap();
        let s = 10f64.sqrt();
        let r = relative_criterion(&unit(), d(1.0 / s), &fa).unwrap();
        let oracle = 1.0 / s - 1.0 / (2.0 * s * s) - 0.5;
        assert!((r - oracle).abs() < 1e-15);
        assert!((r + 0.233772).abs() < 1e-6);
        let direct = absolute_criterion(&unit(), d(1.0 / s), &fa).unwrap() - absolute_criterion(&unit(), d(1.0), &fa).unwrap();
        assert!((r - direct).abs() < 1e-15);
    }

    #[test]
    fn relative_criterion_concave_in_mean() {
        let mp = mkt();
        for m in [0.1, 0.5, 1.2] {
            let mid = relative_at_mean(&mp, m, 5.5);
            let avg = 0.5 * (relative_at_mean(&mp, m, 1.0) + relative_at_mean(&mp, m, 10.0));
            assert!(mid > avg);
        }
    }

    #[test]
    fn acg_examples() {
        let o = acg_equilibrium(&unit(), rt(1.0), rt(10.0)).unwrap();
        assert_eq!(o.planner, PlannerMove::Single(d(0.1)));
        let same = acg_equilibrium(&unit(), rt(3.0), rt(3.0)).unwrap();
        assert_eq!(same.planner, PlannerMove::Single(d(1.0 / 3.0)));
        // minimax: worst case over point masses on a grid
        let mp = mkt();
        let o = acg_equilibrium(&mp, rt(1.0), rt(10.0)).unwrap();
        let worst = |m: f64| {
            (0..1000)
                .map(|k| absolute_excess(&mp, m, 1.0 + 9.0 * k as f64 / 999.0))
                .fold(f64::INFINITY, f64::min)
        };
        let PlannerMove::Single(m0) = o.planner else { unreachable!() };
        let best = worst(m0.value());
        let (lo, hi) = (mp.merton_scale() / 10.0, mp.merton_scale());
        for k in 0..1000 {
            assert!(worst(lo + (hi - lo) * k as f64 / 999.0) <= best + 1e-15);
        }
    }

    #[test]
    fn rcg_examples() {
        let o = rcg_equilibrium(&unit(), rt(1.0), rt(10.0)).unwrap();
        let s = 10f64.sqrt();
        assert!((o.mixing_probability.unwrap() - s / (1.0 + s)).abs() < 1e-15);
        assert!((o.mixing_probability.unwrap() - 0.75975).abs() < 1e-5);
        let PlannerMove::Single(m) = o.planner else { unreachable!() };
        assert!((m.value() - 1.0 / s).abs() < 1e-15);
        let ra = relative_at_mean(&unit(), m.value(), 1.0);
        let rb = relative_at_mean(&unit(), m.value(), 10.0);
        assert!((ra - rb).abs() < 1e-12 && (ra - o.value).abs() < 1e-12);
        let p = o.mixing_probability.unwrap();
        assert!((1.0 / (p * 1.0 + (1.0 - p) * 10.0) - m.value()).abs() < 1e-12);
        let deg = rcg_equilibrium(&unit(), rt(2.0), rt(2.0)).unwrap();
        assert_eq!(deg.value, 0.0);
    }

    #[test]
    fn robust_menu_examples() {
        let one = robust_menu(&unit(), rt(1.0), rt(10.0), 1).unwrap();
        assert!((one.targeted_types[0] - 10f64.sqrt()).abs() < 1e-14);
        let two = robust_menu(&unit(), rt(1.0), rt(10.0), 2).unwrap();
        let s = 10f64.sqrt();
        assert!((two.h[1] - (1.0 + s) / 2.0).abs() < 1e-15);
        assert!((two.targeted_types[0] - 1.51949).abs() < 1e-5);
        assert!((two.targeted_types[1] - 4.80506).abs() < 1e-5);
        assert!((two.boundaries[1] - 2.30886).abs() < 1e-5);
        let flat = robust_menu(&unit(), rt(2.0), rt(2.0), 3).unwrap();
        assert!(flat.targeted_types.iter().chain(&flat.boundaries).all(|&g| (g - 2.0).abs() < 1e-15));
        assert_eq!(flat.menu().unwrap().len(), 1);
    }

    #[test]
    fn robust_menu_structure() {
        for n in 1..=8 {
            let m = robust_menu(&mkt(), rt(0.7), rt(13.0), n).unwrap();
            assert!(m.h.windows(2).all(|w| w[1] < w[0]));
            for i in 0..n {
                assert!(m.boundaries[i] < m.targeted_types[i] && m.targeted_types[i] < m.boundaries[i + 1]);
                assert!(((m.h[i] - m.h[i + 1]) - (13f64.sqrt() - 0.7f64.sqrt()) / n as f64).abs() < 1e-15);
            }
            for i in 1..n {
                let hm = partition::harmonic_mean(m.targeted_types[i - 1], m.targeted_types[i]);
                assert!(((hm - m.boundaries[i]) / hm).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn indifference_holds_and_breaks_under_perturbation() {
        let mp = unit();
        for n in [1, 2, 3, 5] {
            let m = robust_menu(&mp, rt(1.0), rt(10.0), n).unwrap();
            assert!(verify_indifference(&mp, &m).unwrap() < 1e-10);
        }
        let mut m = robust_menu(&mp, rt(1.0), rt(10.0), 3).unwrap();
        m.targeted_types[0] *= 1.01;
        m.decisions[0] = d(mp.merton_scale() / m.targeted_types[0]);
        assert!(verify_indifference(&mp, &m).unwrap() > 0.0);
        let (worst, _) = worst_case_regret(&mp, &m.menu().unwrap(), rt(1.0), rt(10.0)).unwrap();
        assert!(worst < m.regret_guarantee);
        // n = 1 is the single-decision game
        let one = robust_menu(&mp, rt(1.0), rt(10.0), 1).unwrap();
        let rcg = rcg_equilibrium(&mp, rt(1.0), rt(10.0)).unwrap();
        assert!((one.regret_guarantee - rcg.value).abs() < 1e-15);
    }

    #[test]
    fn worst_case_examples() {
        let mp = mkt();
        let m = robust_menu(&mp, rt(1.0), rt(10.0), 2).unwrap();
        let menu = m.menu().unwrap();
        let (v, _) = worst_case_regret(&mp, &menu, rt(1.0), rt(10.0)).unwrap();
        let oracle = -mp.regret_scale() / 8.0 * (1.0 - 1.0 / 10f64.sqrt()).powi(2);
        assert!((v - oracle).abs() < 1e-12);
        for x in [1.0, m.boundaries[1], 10.0] {
            assert!((point_mass_regret(&mp, &menu, x) - oracle).abs() < 1e-12);
        }
        let (scan, _) = worst_case_regret_scan(&mp, &menu, rt(1.0), rt(10.0)).unwrap();
        assert!((scan - v).abs() < 1e-8);
        let single = DecisionMenu::from_values(&[mp.merton_scale() / 10f64.sqrt()]).unwrap();
        let (v1, _) = worst_case_regret(&mp, &single, rt(1.0), rt(10.0)).unwrap();
        let rcg = rcg_equilibrium(&mp, rt(1.0), rt(10.0)).unwrap();
        assert!((v1 - rcg.value).abs() < 1e-12);
    }

    #[test]
    fn naive_menu_is_worse() {
        let mp = mkt();
        let robust = robust_menu(&mp, rt(1.0), rt(10.0), 3).unwrap();
        let naive: Vec<f64> = [2.5, 5.5, 8.5].iter().map(|g| mp.merton_scale() / g).collect();
        let naive = DecisionMenu::from_values(&naive).unwrap();
        let (v, _) = worst_case_regret(&mp, &naive, rt(1.0), rt(10.0)).unwrap();
        assert!(v < robust.regret_guarantee);
    }

    #[test]
    fn guarantee_scales_with_inverse_square() {
        let mp = mkt();
        let base = robust_menu(&mp, rt(1.0), rt(10.0), 1).unwrap().regret_guarantee;
        for n in 2..=8 {
            let r = robust_menu(&mp, rt(1.0), rt(10.0), n).unwrap().regret_guarantee;
            assert!((r * (n * n) as f64 - base).abs() < 1e-12);
        }
    }

    #[test]
    fn random_perturbations_are_worse() {
        let mp = mkt();
        let m = robust_menu(&mp, rt(1.0), rt(10.0), 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..64 {
            let vals: Vec<f64> = m
                .decisions
                .iter()
                .map(|x| x.value() * (1.0 + 0.01 * (2.0 * rng.random::<f64>() - 1.0)))
                .collect();
            let menu = DecisionMenu::from_values(&vals).unwrap();
            let (v, _) = worst_case_regret(&mp, &menu, rt(1.0), rt(10.0)).unwrap();
            assert!(v < m.regret_guarantee);
        }
    }

    #[test]
    fn comparative_statics_examples() {
        for n in [1, 3, 6] {
            let base = comparative_statics(rt(1.0), rt(10.0), n).unwrap();
            for lambda in [0.1, 7.0] {
                let scaled = comparative_statics(rt(lambda), rt(10.0 * lambda), n).unwrap();
                for (x, y) in base.iter().zip(&scaled) {
                    assert!((x.r.unwrap() - y.r.unwrap()).abs() < 1e-12);
                    assert!((x.rho.unwrap() - y.rho.unwrap()).abs() < 1e-12);
                }
            }
            let narrow = comparative_statics(rt(1.0), rt(1.0 + 1e-6), n).unwrap();
            for row in &narrow {
                let i = row.i as f64;
                assert!((row.r.unwrap() - i / n as f64).abs() < 1e-6);
                assert!((row.rho.unwrap() - (i - 0.5) / n as f64).abs() < 1e-6);
            }
        }
        let flat = comparative_statics(rt(2.0), rt(2.0), 2).unwrap();
        assert!(flat.iter().all(|r| r.r.is_none() && r.rho.is_none()));
    }

    #[test]
    fn comparative_statics_limits() {
        let n = 3;
        for i in 0..n - 1 {
            let rs: Vec<f64> = [1e2, 1e4, 1e6]
                .iter()
                .map(|&b| comparative_statics(rt(1.0), rt(b), n).unwrap()[i].r.unwrap())
                .collect();
            assert!(rs.windows(2).all(|w| w[1] < w[0]) && rs[2] < 1e-2);
            let ra: Vec<f64> = [1e-2, 1e-4, 1e-6]
                .iter()
                .map(|&a| comparative_statics(rt(a), rt(10.0), n).unwrap()[i].r.unwrap())
                .collect();
            assert!(ra.windows(2).all(|w| w[1] < w[0]) && ra[2] < 1e-2);
        }
    }

    #[test]
    fn claims_rebuild_robust_partition() {
        let mp = mkt();
        for n in [2, 4] {
            let m = robust_menu(&mp, rt(1.0), rt(10.0), n).unwrap();
            let rep = claims_check(&mp, rt(1.0), m.regret_guarantee, n).unwrap();
            for i in 0..=n {
                assert!((rep.boundaries[i] - m.boundaries[i]).abs() < 1e-8 * m.boundaries[i]);
            }
            for i in 0..n {
                assert!((rep.targeted_types[i] - m.targeted_types[i]).abs() < 1e-8 * m.targeted_types[i]);
            }
        }
    }

    #[test]
    fn claims_monotone_and_infeasible() {
        let mp = mkt();
        let r = robust_menu(&mp, rt(1.0), rt(10.0), 4).unwrap().regret_guarantee;
        let targets: Vec<f64> = [0.6, 0.8, 1.0, 1.2, 1.4].iter().map(|k| k * r).collect();
        assert!(claims_monotone(&mp, rt(1.0), &targets, 4).unwrap());
        let limit = -mp.regret_scale() / 2.0;
        match claims_check(&mp, rt(1.0), 1.5 * limit, 3) {
            Err(Error::Infeasible { step, .. }) => assert_eq!(step, 1),
            other => panic!("expected infeasible, got {other:?}"),
        }
        let tiny = claims_check(&mp, rt(1.0), -1e-12, 3).unwrap();
        assert!(tiny.boundaries.iter().all(|&g| (g - 1.0).abs() < 1e-4));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn regret_never_positive(m in -2.0f64..5.0, mean in 0.1f64..50.0) {
                let mp = mkt();
                let r = relative_at_mean(&mp, m, mean);
                prop_assert!(r <= 1e-15);
                let opt = mp.merton_scale() / mean;
                prop_assert!(relative_at_mean(&mp, opt, mean).abs() < 1e-14);
            }
        }
    }
}
