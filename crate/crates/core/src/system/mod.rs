//! The system model: dynamics, observations, costs and the memories they induce.

mod memory;
pub mod oracle;
pub mod problem;
mod simulate;
mod spec;

pub use memory::{
    conditional_accrued, count_memories, enumerate_memories, expand, expand_all, fold_memories,
    initial_beliefs, joint_range, transition_accrued, Belief, Branch, Child, Memory, MemoryCtx,
};
pub use simulate::{
    simulate, worst_case_by_root, worst_case_cost, FnStrategy, MemoryStrategy, Strategy, Trajectory,
};
pub use spec::{Space, Spaces, SystemSpec};
