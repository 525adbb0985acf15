//! Multi-objective bandits with Pareto regret, including piecewise-stationary
//! environments handled by change-detection restarts.

pub mod change_detection;
pub mod divergence;
pub mod environments;
pub mod error;
pub mod experiment;
pub mod pareto;
pub mod policies;

pub use error::{Error, Result};
pub use pareto::{dominates, pareto_front, pareto_regret, MeanMatrix, RegretTrace, RewardVector};
