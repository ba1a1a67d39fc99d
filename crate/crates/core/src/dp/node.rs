use rayon::prelude::*;

use crate::dp::table::{NodeTable, StageValues};
use crate::error::Result;
use crate::info::{validate_info_state, InfoStateMap};
use crate::scalar::Scalar;
use crate::sets::PointId;
use crate::system::SystemSpec;

fn node_dp<S: Scalar>(spec: &SystemSpec<S>, ism: &InfoStateMap<S>) -> NodeTable<S> {
    let horizon = spec.horizon();
    let actions: Vec<PointId> = spec.actions.ids().collect();
    let mut stages: Vec<StageValues<u32, S>> = Vec::with_capacity(horizon + 1);
    let mut next_v: Vec<S> = Vec::new();
    for t in (0..=horizon).rev() {
        let rows: Vec<(u32, Vec<S>)> = (0..ism.node_count(t) as u32)
            .into_par_iter()
            .map(|id| {
                let q = actions
                    .iter()
                    .map(|&u| {
                        if t == horizon {
                            let r = ism.accrued(t, id);
                            r.support()
                                .iter()
                                .map(|&(x, a)| spec.cost(t, x, u) + a)
                                .max()
                        } else {
                            let r = ism.transition(t, id, u);
                            r.support()
                                .iter()
                                .map(|&((x, next), a)| {
                                    spec.cost(t, x, u) + a + next_v[next.index()]
                                })
                                .max()
                        }
                        .expect("nodes carry nonempty distributions")
                    })
                    .collect();
                (id, q)
            })
            .collect();
        let stage = StageValues::from_q(rows);
        next_v = stage.v.clone();
        stages.push(stage);
    }
    stages.reverse();
    NodeTable::new(actions.len(), stages)
}

/// Exact dynamic program on an information state; fails with
/// `InvalidInfoState` when the compressor does not preserve the accrued
/// distributions.
pub fn solve_infostate_dp<S: Scalar>(
    spec: &SystemSpec<S>,
    ism: &InfoStateMap<S>,
) -> Result<NodeTable<S>> {
    validate_info_state(spec, ism).into_result()?;
    Ok(node_dp(spec, ism))
}

/// The same recursion on any compressor, conditioning on nodes by pooling.
pub fn solve_approx_dp<S: Scalar>(spec: &SystemSpec<S>, ism: &InfoStateMap<S>) -> NodeTable<S> {
    node_dp(spec, ism)
}
