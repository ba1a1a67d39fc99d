//! Dynamic programs over memories and over information-state nodes, the
//! cost-to-go of approximate strategies and the alpha error bounds.
//!
//! All argmins break ties towards the lowest action id.

mod bounds;
mod memory;
mod node;
mod strategy;
mod table;

pub use bounds::{
    alpha_recursion, bounds_with_epsilons, check_theorem_bounds, compute_alpha_bounds,
    cost_lipschitz, value_lipschitz, BoundReport, RootValues, StageGaps, SweepReport,
};
pub use memory::{
    evaluate_strategy, solve_memory_terminal_dp, solve_specialized_dp, strategy_root_values,
};
pub use node::{solve_approx_dp, solve_infostate_dp};
pub use strategy::CompressedStrategy;
pub use table::{argmin, NodeTable, StageValues, ValueTable};
