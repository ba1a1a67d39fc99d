use crate::dp::table::{argmin, NodeTable, StageValues, ValueTable};
use crate::error::{Error, Result};
use crate::info::InfoStateMap;
use crate::scalar::Scalar;
use crate::sets::PointId;
use crate::system::{fold_memories, Branch, Memory, MemoryCtx, SystemSpec};

/// `max_x c_T(x, u) + a(x) - shift` per action, over the memory's support.
pub(crate) fn terminal_q<S: Scalar>(spec: &SystemSpec<S>, ctx: &MemoryCtx<S>, shift: S) -> Vec<S> {
    spec.actions
        .ids()
        .map(|u| {
            ctx.belief
                .raw_accrued()
                .map(|(x, a)| spec.cost(ctx.stage, x, u) + a - shift)
                .max()
                .expect("nonempty belief")
        })
        .collect()
}

/// `max_{x, m'} c_t(x, u) + r_t(x, m' | m, u) + next(u, m')` per action,
/// where `next` gives the continuation value of child `m'` of branch `u`.
pub(crate) fn specialized_q<S: Scalar>(
    spec: &SystemSpec<S>,
    ctx: &MemoryCtx<S>,
    branches: &[Branch<S>],
    next: impl Fn(usize, usize) -> S,
) -> Vec<S> {
    let top = ctx.belief.top();
    branches
        .iter()
        .enumerate()
        .map(|(ui, b)| {
            let mut best: Option<S> = None;
            for (i, (x, a)) in ctx.belief.raw_accrued().enumerate() {
                let base = spec.cost(ctx.stage, x, b.action) + a - top;
                for &j in &b.reach[i] {
                    let v = base + next(ui, j as usize);
                    best = Some(best.map_or(v, |w: S| w.max(v)));
                }
            }
            best.expect("feasible memories have successors")
        })
        .collect()
}

fn sorted_stages<S: Scalar>(mut rows: Vec<Vec<(Memory, Vec<S>)>>) -> Vec<StageValues<Memory, S>> {
    rows.iter_mut()
        .for_each(|r| r.sort_by(|a, b| a.0.cmp(&b.0)));
    rows.into_iter().map(StageValues::from_q).collect()
}

/// Backward induction on memories with the terminal cost `c_T(x, u) + v(x)`
/// where `v` is the worst cost-to-come: the intermediate costs are folded
/// into the terminal stage.
pub fn solve_memory_terminal_dp<S: Scalar>(spec: &SystemSpec<S>) -> ValueTable<Memory, S> {
    let mut rows: Vec<Vec<(Memory, Vec<S>)>> = vec![Vec::new(); spec.horizon() + 1];
    fold_memories(spec, |ctx, branches, children: Vec<Vec<S>>| {
        let q = if ctx.stage == spec.horizon() {
            terminal_q(spec, ctx, S::zero())
        } else {
            branches
                .iter()
                .enumerate()
                .map(|(ui, _)| {
                    children[ui]
                        .iter()
                        .copied()
                        .max()
                        .expect("feasible memories have successors")
                })
                .collect()
        };
        let v = argmin(&q).1;
        rows[ctx.stage].push((ctx.memory(), q));
        v
    });
    ValueTable::new(spec.actions.len(), sorted_stages(rows))
}

/// Backward induction on memories with stage costs weighted by the
/// normalized accrued distributions.
pub fn solve_specialized_dp<S: Scalar>(spec: &SystemSpec<S>) -> ValueTable<Memory, S> {
    let mut rows: Vec<Vec<(Memory, Vec<S>)>> = vec![Vec::new(); spec.horizon() + 1];
    fold_memories(spec, |ctx, branches, children: Vec<Vec<S>>| {
        let q = if ctx.stage == spec.horizon() {
            terminal_q(spec, ctx, ctx.belief.top())
        } else {
            specialized_q(spec, ctx, branches, |ui, j| children[ui][j])
        };
        let v = argmin(&q).1;
        rows[ctx.stage].push((ctx.memory(), q));
        v
    });
    ValueTable::new(spec.actions.len(), sorted_stages(rows))
}

pub(crate) fn node_of<S: Scalar>(ism: &InfoStateMap<S>, ctx: &MemoryCtx<S>) -> Result<u32> {
    ism.sigma(ctx).ok_or_else(|| {
        Error::InvalidInfoState(format!("no node for memory at stage {}", ctx.stage))
    })
}

/// Cost-to-go `Theta`/`Lambda` of the strategy `g_t(m) = law_t(sigma_t(m))`
/// on every memory: Q rows hold `Theta_t(m, u)`, V holds `Lambda_t(m)` and
/// the law holds the action actually played.
pub fn evaluate_strategy<S: Scalar>(
    spec: &SystemSpec<S>,
    ism: &InfoStateMap<S>,
    table: &NodeTable<S>,
) -> Result<ValueTable<Memory, S>> {
    let mut rows: Vec<Vec<(Memory, Vec<S>, PointId)>> = vec![Vec::new(); spec.horizon() + 1];
    let mut failure: Option<Error> = None;
    fold_memories(spec, |ctx, branches, children: Vec<Vec<S>>| {
        let theta = if ctx.stage == spec.horizon() {
            terminal_q(spec, ctx, ctx.belief.top())
        } else {
            specialized_q(spec, ctx, branches, |ui, j| children[ui][j])
        };
        let u = match node_of(ism, ctx) {
            Ok(id) => table.node_law(ctx.stage, id),
            Err(e) => {
                failure.get_or_insert(e);
                PointId(0)
            }
        };
        let lambda = theta[u.index()];
        rows[ctx.stage].push((ctx.memory(), theta, u));
        lambda
    });
    if let Some(e) = failure {
        return Err(e);
    }
    rows.iter_mut()
        .for_each(|r| r.sort_by(|a, b| a.0.cmp(&b.0)));
    Ok(ValueTable::new(
        spec.actions.len(),
        rows.into_iter().map(StageValues::with_law).collect(),
    ))
}

/// `Lambda_0` per initial observation, without storing the memory tables.
pub fn strategy_root_values<S: Scalar>(
    spec: &SystemSpec<S>,
    ism: &InfoStateMap<S>,
    table: &NodeTable<S>,
) -> Result<Vec<(PointId, S)>> {
    let mut failure: Option<Error> = None;
    let roots = fold_memories(spec, |ctx, branches, children: Vec<Vec<S>>| {
        let u = match node_of(ism, ctx) {
            Ok(id) => table.node_law(ctx.stage, id),
            Err(e) => {
                failure.get_or_insert(e);
                PointId(0)
            }
        };
        if ctx.stage == spec.horizon() {
            return terminal_q(spec, ctx, ctx.belief.top())[u.index()];
        }
        specialized_q(spec, ctx, &branches[u.index()..=u.index()], |_, j| {
            children[u.index()][j]
        })[0]
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(roots),
    }
}
