//! Run configuration: one JSON document, every section optional, unknown keys rejected.

use std::path::{Path, PathBuf};

use crra_menus::distributions::DistributionSpec;
use crra_menus::multi_asset::{MultiAssetMarket, StepStrategy};
use crra_menus::partition::GroupingOptions;
use crra_menus::{Error, MarketParams, PlannerPreferences, TypeDistribution};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub market: Option<MarketConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planner: Option<PlannerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

/// Scalar `mu`/`sigma` give the one-asset market; a vector and a matrix give the multi-asset one.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub r: f64,
    pub mu: Drift,
    pub sigma: Volatility,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Drift {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Volatility {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    pub eta: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub welfare_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
}

/// Lists swept when the solver section does not pin a single value.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_over_a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss_ratio: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub const DEFAULT_SEED: u64 = 0x5eed;

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::config("--config", format!("{}: {e}", path.display())))?;
    parse(&bytes)
}

pub fn parse(bytes: &[u8]) -> Result<RunConfig, CliError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "config".to_string() } else { path };
        CliError::config(path, e.into_inner().to_string())
    })
}

/// Rewrites a core validation error as a config error under `section`.
pub fn in_section(section: &str) -> impl Fn(Error) -> CliError + '_ {
    move |e| match &e {
        Error::InvalidParameter { field, reason } => CliError::config(format!("{section}.{field}"), reason.clone()),
        _ => CliError::config(section.to_string(), e.to_string()),
    }
}

impl RunConfig {
    /// The one-asset market; defaults to `r = 0, mu = 1, sigma = 1, T = 1`.
    pub fn single_market(&self) -> Result<MarketParams, CliError> {
        let Some(m) = &self.market else {
            return Ok(MarketParams::new(0.0, 1.0, 1.0, 1.0).expect("unit market"));
        };
        let (Drift::Scalar(mu), Volatility::Scalar(sigma)) = (&m.mu, &m.sigma) else {
            return Err(CliError::config("market", "this command needs scalar mu and sigma"));
        };
        MarketParams::new(m.r, *mu, *sigma, m.horizon.unwrap_or(1.0)).map_err(in_section("market"))
    }

    pub fn multi_market(&self) -> Result<(MultiAssetMarket, f64), CliError> {
        let Some(m) = &self.market else {
            return Err(CliError::config("market", "a multi-asset market is required"));
        };
        let (Drift::Vector(mu), Volatility::Matrix(sigma)) = (&m.mu, &m.sigma) else {
            return Err(CliError::config("market", "this command needs a mu vector and a sigma matrix"));
        };
        let horizon = m.horizon.unwrap_or(1.0);
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(CliError::config("market.T", "must be finite and positive"));
        }
        let mkt = MultiAssetMarket::new(m.r, mu, sigma).map_err(|e| match e {
            Error::Conditioning { .. } => CliError::config("market.sigma", e.to_string()),
            e => in_section("market")(e),
        })?;
        Ok((mkt, horizon))
    }

    /// Defaults to Uniform(1, 10).
    pub fn distribution(&self) -> Result<TypeDistribution, CliError> {
        match &self.distribution {
            None => Ok(TypeDistribution::uniform(1.0, 10.0).expect("default distribution")),
            Some(spec) => TypeDistribution::try_from(spec.clone()).map_err(in_section("distribution")),
        }
    }

    /// Power planner; defaults to the logarithmic one.
    pub fn planner(&self) -> Result<PlannerPreferences, CliError> {
        let eta = self.planner.as_ref().map_or(1.0, |p| p.eta);
        if !eta.is_finite() {
            return Err(CliError::config("planner.eta", "must be finite"));
        }
        PlannerPreferences::power(eta).map_err(|e| CliError::config("planner.eta", e.to_string()))
    }

    pub fn solver(&self) -> SolverConfig {
        self.solver.clone().unwrap_or_default()
    }

    pub fn seed(&self) -> u64 {
        self.solver().seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn grouping_options(&self) -> Result<GroupingOptions, CliError> {
        let s = self.solver();
        let mut o = GroupingOptions {
            seed: self.seed(),
            ..GroupingOptions::default()
        };
        if let Some(k) = s.max_iterations {
            if k == 0 {
                return Err(CliError::config("solver.max_iterations", "must be positive"));
            }
            o.max_iterations = k;
        }
        for (name, v, slot) in [
            ("solver.welfare_tol", s.welfare_tol, &mut o.welfare_tol),
            ("solver.boundary_tol", s.boundary_tol, &mut o.boundary_tol),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::config(name, "must be finite and positive"));
                }
                *slot = v;
            }
        }
        if let Some(k) = s.restarts {
            o.restarts = k;
        }
        Ok(o)
    }

    /// A single `solver.n`, or else `sweep.n`, or else `default`. The flag says whether it was a sweep.
    pub fn menu_sizes(&self, default: &[usize]) -> Result<(Vec<usize>, bool), CliError> {
        if let Some(n) = self.solver().n {
            if n == 0 {
                return Err(CliError::config("solver.n", "must be at least 1"));
            }
            return Ok((vec![n], false));
        }
        let ns = self.sweep.as_ref().and_then(|s| s.n.clone()).unwrap_or_else(|| default.to_vec());
        if ns.is_empty() || ns.contains(&0) {
            return Err(CliError::config("sweep.n", "need a non-empty list of sizes >= 1"));
        }
        Ok((ns, true))
    }

    pub fn ratios(&self, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let v = self.sweep.as_ref().and_then(|s| s.b_over_a.clone()).unwrap_or_else(|| default.to_vec());
        if v.is_empty() || v.iter().any(|&x| !(x >= 1.0 && x.is_finite())) {
            return Err(CliError::config("sweep.b_over_a", "need a non-empty list of finite ratios >= 1"));
        }
        Ok(v)
    }

    pub fn loss_ratios(&self, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let v = self.sweep.as_ref().and_then(|s| s.loss_ratio.clone()).unwrap_or_else(|| default.to_vec());
        if v.is_empty() || v.iter().any(|&x| !(x >= 1.0 && x.is_finite())) {
            return Err(CliError::config("sweep.loss_ratio", "need a non-empty list of finite ratios >= 1"));
        }
        Ok(v)
    }

    /// Constant exposure or a step strategy, ending at the market horizon.
    pub fn strategy(&self, horizon: f64) -> Result<StepStrategy, CliError> {
        let sim = self.simulate.clone().unwrap_or_default();
        match (sim.m, sim.strategy) {
            (Some(_), Some(_)) => Err(CliError::config("simulate", "give either m or strategy, not both")),
            (None, None) => Err(CliError::config("simulate.m", "an exposure m or a strategy is required")),
            (Some(m), None) => StepStrategy::constant(m, horizon).map_err(|_| CliError::config("simulate.m", "must be finite")),
            (None, Some(s)) => {
                let s = StepStrategy::new(s.breakpoints, s.values).map_err(in_section("simulate.strategy"))?;
                if ((s.horizon() - horizon) / horizon).abs() > 1e-12 {
                    return Err(CliError::config(
                        "simulate.strategy.breakpoints",
                        format!("last breakpoint {} differs from the horizon {horizon}", s.horizon()),
                    ));
                }
                Ok(s)
            }
        }
    }

    pub fn paths(&self) -> Result<usize, CliError> {
        let p = self.simulate.as_ref().and_then(|s| s.paths).unwrap_or(100_000);
        if p < 2 {
            return Err(CliError::config("simulate.paths", "need at least two paths"));
        }
        Ok(p)
    }

    pub fn gammas(&self) -> Result<Vec<f64>, CliError> {
        let g = self
            .simulate
            .as_ref()
            .and_then(|s| s.gamma.clone())
            .unwrap_or_else(|| vec![0.5, 1.0, 2.0, 5.0]);
        if g.is_empty() || g.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(CliError::config("simulate.gamma", "need a non-empty list of positive risk aversions"));
        }
        Ok(g)
    }
}
