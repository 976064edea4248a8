//! Menus of portfolio decisions for investors with constant relative risk aversion.
//!
//! A planner who cannot observe each investor's risk type offers a short menu of risky-asset
//! fractions; each investor picks the entry maximizing their certainty equivalent. The crate
//! computes optimal single and grouped decisions, welfare-loss bounds, regret-robust menus
//! and the reduction of a multi-asset market to a single risky asset.

pub mod bounds;
pub mod distributions;
pub mod error;
pub mod model;
pub mod multi_asset;
pub mod partition;
pub mod quadrature;
pub mod robust;
pub mod roots;
pub mod single;

pub use distributions::{DistributionSpec, TypeDistribution, WealthProfile};
pub use error::{Error, Result};
pub use model::{Decision, MarketParams, RiskType};
pub use partition::{DecisionMenu, GroupedSolution, Partition};
pub use single::{PlannerPreferences, SingleSolution};
