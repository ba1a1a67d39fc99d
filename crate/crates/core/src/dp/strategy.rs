use crate::dp::table::NodeTable;
use crate::info::InfoStateMap;
use crate::scalar::Scalar;
use crate::sets::PointId;
use crate::system::{joint_range, Memory, MemoryCtx, Strategy, SystemSpec};

/// The strategy `g_t(m) = law_t(sigma_t(m))` induced by a node table.
pub struct CompressedStrategy<'a, S> {
    pub ism: &'a InfoStateMap<S>,
    pub table: &'a NodeTable<S>,
}

impl<'a, S: Scalar> CompressedStrategy<'a, S> {
    pub fn new(ism: &'a InfoStateMap<S>, table: &'a NodeTable<S>) -> Self {
        CompressedStrategy { ism, table }
    }
}

impl<S: Scalar> Strategy<S> for CompressedStrategy<'_, S> {
    fn action(&self, spec: &SystemSpec<S>, memory: &Memory) -> Option<PointId> {
        let belief = joint_range(spec, memory).ok()?;
        let ctx = MemoryCtx {
            stage: memory.stage(),
            observations: &memory.observations,
            actions: &memory.actions,
            belief: &belief,
        };
        let id = self.ism.sigma(&ctx)?;
        Some(self.table.node_law(ctx.stage, id))
    }
}
