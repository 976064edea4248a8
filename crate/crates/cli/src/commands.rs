use crra_menus::bounds::{bound_report, min_menu_size};
use crra_menus::multi_asset::{
    ce_time_varying, effective_sharpe_squared, reduce_to_single_asset, sample_certainty_equivalent,
    simulate_terminal_wealth, tangency_portfolio,
};
use crra_menus::partition::solve_grouping_with;
use crra_menus::robust::{comparative_statics, robust_menu};
use crra_menus::single::{solve, SolveMethod};
use crra_menus::{Error, RiskType};

use crate::config::{Format, RunConfig};
use crate::output::{Cell, Table};
use crate::CliError;

pub const FIGURE_SIZES: [usize; 5] = [1, 2, 3, 4, 5];
const BOUND_SIZES: [usize; 8] = [1, 2, 3, 4, 5, 6, 7, 8];
const RATIOS: [f64; 7] = [2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 1000.0];
const LOSS_RATIOS: [f64; 6] = [1.05, 1.1, 1.25, 1.5, 2.0, 3.025];
const STATICS_RATIOS: [f64; 7] = [1.000001, 2.0, 5.0, 10.0, 100.0, 1e4, 1e6];

/// Errors raised while computing: bad inputs stay config errors, the rest are numerical.
fn numerical(e: Error) -> CliError {
    match e {
        Error::InvalidParameter { field, reason } => CliError::config(field, reason),
        e => CliError::Numerical(e.to_string()),
    }
}

fn rt(g: f64) -> Result<RiskType, CliError> {
    RiskType::new(g).map_err(numerical)
}

fn support(cfg: &RunConfig) -> Result<(RiskType, RiskType), CliError> {
    let (a, b) = cfg.distribution()?.support();
    Ok((rt(a)?, rt(b)?))
}

pub fn solve_single(cfg: &RunConfig) -> Result<(Table, Format), CliError> {
    let (mp, dist, prefs) = (cfg.single_market()?, cfg.distribution()?, cfg.planner()?);
    let s = solve(&mp, &dist, &prefs).map_err(numerical)?;
    let method = match s.diagnostics.method {
        SolveMethod::ClosedForm => "closed_form",
        SolveMethod::Bisection => "bisection",
        SolveMethod::GlobalScan => "global_scan",
    };
    let mut t = Table::new(&[
        "m_star",
        "gamma_star",
        "objective",
        "method",
        "iterations",
        "residual",
        "local_maxima",
        "tied_maxima",
    ]);
    t.push(vec![
        s.m_star.value().into(),
        s.gamma_star.value().into(),
        s.objective_value.into(),
        Cell::Text(method.into()),
        s.diagnostics.iterations.into(),
        s.diagnostics.residual.into(),
        s.diagnostics.local_maxima.len().into(),
        s.diagnostics.tied_maxima.into(),
    ]);
    Ok((t, Format::Json))
}

pub fn solve_menu(cfg: &RunConfig) -> Result<(Table, Format), CliError> {
    let (mp, dist, prefs) = (cfg.single_market()?, cfg.distribution()?, cfg.planner()?);
    let opts = cfg.grouping_options()?;
    let (sizes, sweep) = cfg.menu_sizes(&FIGURE_SIZES)?;
    let mut t = if sweep {
        Table::new(&["n", "i", "g_lo", "g_hi", "Gamma_i", "m_i", "welfare"])
    } else {
        Table::new(&["i", "g_lo", "g_hi", "Gamma_i", "m_i"])
    };
    for n in sizes {
        let sol = solve_grouping_with(&mp, &dist, &prefs, n, &opts).map_err(numerical)?;
        if !sol.diagnostics.converged {
            return Err(CliError::Numerical(format!(
                "grouping with n = {n} did not converge within {} iterations",
                opts.max_iterations
            )));
        }
        for (i, m) in sol.menu.decisions().iter().enumerate() {
            let (lo, hi) = sol.partition.cell(i);
            let mut row: Vec<Cell> = vec![
                (i + 1).into(),
                lo.into(),
                hi.into(),
                sol.cell_types[i].value().into(),
                m.value().into(),
            ];
            if sweep {
                row.insert(0, n.into());
                row.push(sol.welfare.into());
            }
            t.push(row);
        }
        if !sweep {
            t.summary.push(("welfare", sol.welfare));
        }
    }
    Ok((t, Format::Csv))
}

pub fn robust(cfg: &RunConfig) -> Result<(Table, Format), CliError> {
    let mp = cfg.single_market()?;
    let (a, b) = support(cfg)?;
    let (sizes, sweep) = cfg.menu_sizes(&FIGURE_SIZES)?;
    let mut t = if sweep {
        Table::new(&["n", "i", "h_i", "Gamma_i", "g_i", "m_i", "R_star"])
    } else {
        Table::new(&["i", "h_i", "Gamma_i", "g_i", "m_i"])
    };
    for n in sizes {
        let menu = robust_menu(&mp, a, b, n).map_err(numerical)?;
        for i in 1..=n {
            let mut row: Vec<Cell> = vec![
                i.into(),
                menu.h[i].into(),
                menu.targeted_types[i - 1].into(),
                menu.boundaries[i].into(),
                menu.decisions[i - 1].value().into(),
            ];
            if sweep {
                row.insert(0, n.into());
                row.push(menu.regret_guarantee.into());
            }
            t.push(row);
        }
        if !sweep {
            t.summary.push(("R_star", menu.regret_guarantee));
        }
    }
    Ok((t, Format::Csv))
}

pub fn bounds(cfg: &RunConfig) -> Result<(Table, Format), CliError> {
    let dist = cfg.distribution()?;
    let (sizes, _) = cfg.menu_sizes(&BOUND_SIZES)?;
    let mut t = Table::new(&["n", "E_n", "bound_factor", "E_inf", "ratio"]);
    for n in sizes {
        let r = bound_report(&dist, n).map_err(numerical)?;
        t.push(vec![n.into(), r.e_value.into(), r.bound_factor.into(), r.e_infinity.into(), r.ratio.into()]);
    }
    Ok((t, Format::Csv))
}

pub fn min_size(cfg: &RunConfig) -> Result<(Table, Format), CliError> {
    let ratios = cfg.ratios(&RATIOS)?;
    let losses = cfg.loss_ratios(&LOSS_RATIOS)?;
    // n_ceil is the bound rounded up and clamped below at one
    let mut t = Table::new(&["b_over_a", "R", "n_bound", "n_ceil"]);
    for &w in &ratios {
        for &r in &losses {
            let n = min_menu_size(rt(1.0)?, rt(w)?, r).map_err(numerical)?;
            let ceil = if n.is_finite() { Cell::Int(n.ceil().max(1.0) as u64) } else { Cell::Empty };
            t.push(vec![w.into(), r.into(), n.into(), ceil]);
        }
    }
    Ok((t, Format::Csv))
}

pub fn statics(cfg: &RunConfig) -> Result<(Table, Format), CliError> {
    let ratios = cfg.ratios(&STATICS_RATIOS)?;
    let (sizes, sweep) = cfg.menu_sizes(&FIGURE_SIZES)?;
    let mut t = if sweep {
        Table::new(&["n", "b_over_a", "i", "r_i", "rho_i"])
    } else {
        Table::new(&["b_over_a", "i", "r_i", "rho_i"])
    };
    for &n in &sizes {
        for &w in &ratios {
            for row in comparative_statics(rt(1.0)?, rt(w)?, n).map_err(numerical)? {
                let mut cells: Vec<Cell> = vec![w.into(), row.i.into(), row.r.into(), row.rho.into()];
                if sweep {
                    cells.insert(0, n.into());
                }
                t.push(cells);
            }
        }
    }
    Ok((t, Format::Csv))
}

pub fn simulate(cfg: &RunConfig) -> Result<(Table, Format), CliError> {
    let mp = cfg.single_market()?;
    let strategy = cfg.strategy(mp.horizon())?;
    let (paths, gammas) = (cfg.paths()?, cfg.gammas()?);
    let wealth = simulate_terminal_wealth(&mp, &strategy, paths, cfg.seed()).map_err(numerical)?;
    let mut t = Table::new(&["gamma", "sample_ce", "standard_error", "closed_form_ce", "z"]);
    for g in gammas {
        let g = rt(g)?;
        let est = sample_certainty_equivalent(g, &wealth).map_err(numerical)?;
        let exact = ce_time_varying(&mp, g, &strategy).map_err(numerical)?;
        let gap = est.ce - exact;
        // a riskless strategy leaves no sampling error, only rounding
        let z = if est.standard_error <= 1e-12 * exact {
            if gap.abs() <= 1e-12 * exact { 0.0 } else { gap.signum() * f64::INFINITY }
        } else {
            gap / est.standard_error
        };
        t.push(vec![g.value().into(), est.ce.into(), est.standard_error.into(), exact.into(), z.into()]);
    }
    Ok((t, Format::Json))
}

pub fn reduce_market(cfg: &RunConfig) -> Result<(Table, Format), CliError> {
    let (mkt, horizon) = cfg.multi_market()?;
    let red = reduce_to_single_asset(&mkt, horizon).map_err(numerical)?;
    let mut t = Table::new(&["asset", "tangency"]);
    for (j, w) in tangency_portfolio(&mkt).into_iter().enumerate() {
        t.push(vec![(j + 1).into(), w.into()]);
    }
    t.summary = vec![
        ("r", red.r()),
        ("mu", red.mu()),
        ("sigma", red.sigma()),
        ("T", red.horizon()),
        ("sharpe_squared", effective_sharpe_squared(&mkt)),
        ("merton_scale", red.merton_scale()),
        ("condition_number", mkt.condition_number()),
    ];
    Ok((t, Format::Json))
}
