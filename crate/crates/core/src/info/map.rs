use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::distribution::{
    distribution_distance, distribution_distance_by, CostDistribution, Distribution,
    JointCostDistribution, TieBreak,
};
use crate::error::{Error, Result};
use crate::info::{Compressor, InfoNode};
use crate::scalar::Scalar;
use crate::sets::PointId;
use crate::system::{fold_memories, Branch, MemoryCtx, SystemSpec};

/// Per node and action, sorted `((state, next node), accrued)` entries.
type TransitionTable<S> = Vec<Vec<Vec<((PointId, PointId), S)>>>;

/// Nodes of one stage together with the pooled accrued tables needed to
/// condition on a node.
///
/// Conditioning on a node pools every memory mapped to it: raw accrued
/// costs are max-combined across those memories and normalized once.
#[derive(Debug)]
struct StageNodes<S> {
    nodes: Vec<InfoNode<S>>,
    index: HashMap<InfoNode<S>, u32>,
    memory_count: usize,
    /// Per node, worst raw accrued cost per state.
    accrued: Vec<Vec<(PointId, S)>>,
    /// Per node and action, worst raw accrued cost per (state, next node).
    transitions: TransitionTable<S>,
}

/// The image of a compressor on every feasible memory, stage by stage.
pub struct InfoStateMap<S> {
    compressor: Arc<dyn Compressor<S>>,
    stages: Vec<StageNodes<S>>,
}

impl<S: Scalar> std::fmt::Debug for InfoStateMap<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InfoStateMap")
            .field("compressor", &self.compressor.name())
            .field("node_counts", &self.node_counts())
            .finish()
    }
}

/// Joint accrued distribution of `(x_t, sigma_{t+1}(m_{t+1}))` given one
/// memory and action, with next nodes used as point ids.
pub(crate) fn memory_transition<S: Scalar>(
    ctx: &MemoryCtx<S>,
    branch: &Branch<S>,
    child_nodes: &[u32],
) -> JointCostDistribution<S> {
    let mut entries = Vec::new();
    for (i, (x, a)) in ctx.belief.raw_accrued().enumerate() {
        for &j in &branch.reach[i] {
            entries.push(((x, PointId(child_nodes[j as usize])), a));
        }
    }
    Distribution::normalized(entries).expect("feasible memories have successors")
}

impl<S: Scalar> InfoStateMap<S> {
    /// Evaluates `compressor` on every feasible memory and pools the accrued
    /// tables per node.
    pub fn build(spec: &SystemSpec<S>, compressor: Arc<dyn Compressor<S>>) -> Self {
        let horizon = spec.horizon();
        let nu = spec.actions.len();
        let mut stages: Vec<StageNodes<S>> = (0..=horizon)
            .map(|_| StageNodes {
                nodes: Vec::new(),
                index: HashMap::new(),
                memory_count: 0,
                accrued: Vec::new(),
                transitions: Vec::new(),
            })
            .collect();
        let mut accrued: Vec<Vec<BTreeMap<PointId, S>>> = vec![Vec::new(); horizon + 1];
        let mut trans: Vec<HashMap<(u32, u32, PointId, PointId), S>> =
            vec![HashMap::new(); horizon + 1];

        fold_memories(spec, |ctx, branches, children: Vec<Vec<u32>>| {
            let t = ctx.stage;
            let stage = &mut stages[t];
            let node = compressor.compress(ctx);
            let id = match stage.index.get(&node) {
                Some(&id) => id,
                None => {
                    let id = stage.nodes.len() as u32;
                    stage.index.insert(node.clone(), id);
                    stage.nodes.push(node);
                    accrued[t].push(BTreeMap::new());
                    id
                }
            };
            stage.memory_count += 1;
            let acc = &mut accrued[t][id as usize];
            for (x, a) in ctx.belief.raw_accrued() {
                let slot = acc.entry(x).or_insert(a);
                *slot = (*slot).max(a);
            }
            for (ui, branch) in branches.iter().enumerate() {
                for (i, (x, a)) in ctx.belief.raw_accrued().enumerate() {
                    for &j in &branch.reach[i] {
                        let next = PointId(children[ui][j as usize]);
                        let slot = trans[t].entry((id, ui as u32, x, next)).or_insert(a);
                        *slot = (*slot).max(a);
                    }
                }
            }
            id
        });

        for (t, stage) in stages.iter_mut().enumerate() {
            stage.accrued = std::mem::take(&mut accrued[t])
                .into_iter()
                .map(|m| m.into_iter().collect())
                .collect();
            if t < horizon {
                let mut grouped = vec![vec![Vec::new(); nu]; stage.nodes.len()];
                for ((id, u, x, next), a) in std::mem::take(&mut trans[t]) {
                    grouped[id as usize][u as usize].push(((x, next), a));
                }
                for per_u in grouped.iter_mut().flatten() {
                    per_u.sort_unstable();
                }
                stage.transitions = grouped;
            }
        }
        InfoStateMap { compressor, stages }
    }

    pub fn compressor(&self) -> &Arc<dyn Compressor<S>> {
        &self.compressor
    }

    pub fn name(&self) -> String {
        self.compressor.name()
    }

    pub fn horizon(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn node_count(&self, t: usize) -> usize {
        self.stages[t].nodes.len()
    }

    pub fn node_counts(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.nodes.len()).collect()
    }

    /// Feasible memories per stage seen while building.
    pub fn memory_counts(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.memory_count).collect()
    }

    pub fn nodes(&self, t: usize) -> &[InfoNode<S>] {
        &self.stages[t].nodes
    }

    pub fn node(&self, t: usize, id: u32) -> &InfoNode<S> {
        &self.stages[t].nodes[id as usize]
    }

    pub fn node_id(&self, t: usize, node: &InfoNode<S>) -> Option<u32> {
        self.stages[t].index.get(node).copied()
    }

    /// Node of a memory, `None` if the compressor produced a node never seen
    /// while building.
    pub fn sigma(&self, ctx: &MemoryCtx<S>) -> Option<u32> {
        self.node_id(ctx.stage, &self.compressor.compress(ctx))
    }

    /// `r_t(x_t | pi_t)` by pooling.
    pub fn accrued(&self, t: usize, id: u32) -> CostDistribution<S> {
        Distribution::normalized_sorted(self.stages[t].accrued[id as usize].clone())
    }

    /// `r_t(x_t, pi_{t+1} | pi_t, u_t)` by pooling; next nodes appear as point ids.
    pub fn transition(&self, t: usize, id: u32, u: PointId) -> JointCostDistribution<S> {
        Distribution::normalized_sorted(self.stages[t].transitions[id as usize][u.index()].clone())
    }

    /// Distance between two nodes of stage `t`.
    pub fn node_distance(&self, t: usize, a: u32, b: u32) -> Option<S> {
        if a == b {
            return Some(S::zero());
        }
        self.compressor
            .node_distance(self.node(t, a), self.node(t, b))
    }

    pub fn render_node(&self, spec: &SystemSpec<S>, t: usize, id: u32) -> String {
        self.compressor.render(self.node(t, id), spec)
    }
}

/// Builds the map of `compressor` on `spec`.
pub fn info_state_map<S: Scalar>(
    spec: &SystemSpec<S>,
    compressor: impl Compressor<S> + 'static,
) -> InfoStateMap<S> {
    InfoStateMap::build(spec, Arc::new(compressor))
}

/// First memory at which a compressor fails to be an information state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub stage: usize,
    pub memory: String,
    pub action: Option<String>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub compressor: String,
    pub counterexample: Option<Counterexample>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    pub fn into_result(self) -> Result<()> {
        match self.counterexample {
            None => Ok(()),
            Some(c) => Err(Error::InvalidInfoState(format!(
                "{} at t={} memory [{}]{}: {}",
                self.compressor,
                c.stage,
                c.memory,
                c.action.map(|a| format!(" action {a}")).unwrap_or_default(),
                c.detail
            ))),
        }
    }
}

fn same_distribution<K: Ord + Clone, S: Scalar>(
    a: &Distribution<K, S>,
    b: &Distribution<K, S>,
) -> bool {
    if S::EXACT {
        return a == b;
    }
    a.len() == b.len()
        && a.support()
            .iter()
            .zip(b.support())
            .all(|(p, q)| p.0 == q.0 && p.1.eq_tol(q.1))
}

/// Checks that conditioning on the node gives the same accrued
/// distributions as conditioning on the memory, for every feasible memory
/// and action, and for the terminal distribution.
pub fn validate_info_state<S: Scalar>(
    spec: &SystemSpec<S>,
    ism: &InfoStateMap<S>,
) -> ValidationReport {
    let mut first: Option<Counterexample> = None;
    fold_memories(spec, |ctx, branches, children: Vec<Vec<Option<u32>>>| {
        let id = ism.sigma(ctx);
        if first.is_some() {
            return id;
        }
        let Some(id) = id else {
            first = Some(Counterexample {
                stage: ctx.stage,
                memory: ctx.render(spec),
                action: None,
                detail: "node missing from the map".into(),
            });
            return None;
        };
        if ctx.stage == spec.horizon() {
            let mine = ctx.belief.accrued();
            let pooled = ism.accrued(ctx.stage, id);
            if !same_distribution(&mine, &pooled) {
                first = Some(Counterexample {
                    stage: ctx.stage,
                    memory: ctx.render(spec),
                    action: None,
                    detail: format!(
                        "terminal accrued {:?} differs from the node's {:?}",
                        mine.support(),
                        pooled.support()
                    ),
                });
            }
            return Some(id);
        }
        for (ui, branch) in branches.iter().enumerate() {
            let Some(nodes) = children[ui].iter().copied().collect::<Option<Vec<u32>>>() else {
                return Some(id);
            };
            let mine = memory_transition(ctx, branch, &nodes);
            let pooled = ism.transition(ctx.stage, id, branch.action);
            if !same_distribution(&mine, &pooled) {
                first = Some(Counterexample {
                    stage: ctx.stage,
                    memory: ctx.render(spec),
                    action: Some(spec.actions.label(branch.action).to_string()),
                    detail: format!(
                        "transition accrued {:?} differs from the node's {:?}",
                        mine.support(),
                        pooled.support()
                    ),
                });
                break;
            }
        }
        Some(id)
    });
    ValidationReport {
        compressor: ism.name(),
        counterexample: first,
    }
}

/// `epsilon_0 .. epsilon_T`: the largest distance between memory-conditioned
/// and node-conditioned accrued distributions, per stage. Joint distributions
/// over (state, next node) use the max of the state metric and the node metric.
pub fn compute_epsilons<S: Scalar>(spec: &SystemSpec<S>, ism: &InfoStateMap<S>) -> Result<Vec<S>> {
    let horizon = spec.horizon();
    let states = spec.states.clone();
    let mut eps = vec![S::zero(); horizon + 1];
    let mut missing: Option<Error> = None;
    let mut node_cache: Vec<HashMap<(u32, u32), Option<S>>> = vec![HashMap::new(); horizon + 1];
    let mut pooled_cache: HashMap<(usize, u32, PointId), JointCostDistribution<S>> = HashMap::new();
    let mut memo: HashMap<(usize, usize, u32, JointCostDistribution<S>), S> = HashMap::new();
    let mut terminal_memo: HashMap<(u32, CostDistribution<S>), S> = HashMap::new();

    fold_memories(spec, |ctx, branches, children: Vec<Vec<u32>>| {
        let t = ctx.stage;
        let id = ism.sigma(ctx).expect("map built from the same system");
        if missing.is_some() {
            return id;
        }
        if t == horizon {
            let mine = ctx.belief.accrued();
            let d = *terminal_memo
                .entry((id, mine))
                .or_insert_with_key(|(id, mine)| {
                    distribution_distance(mine, &ism.accrued(t, *id), &states)
                });
            eps[t] = eps[t].max(d);
            return id;
        }
        for (ui, branch) in branches.iter().enumerate() {
            let mine = memory_transition(ctx, branch, &children[ui]);
            if let Some(d) = memo.get(&(t, ui, id, mine.clone())) {
                eps[t] = eps[t].max(*d);
                continue;
            }
            let pooled = pooled_cache
                .entry((t, id, branch.action))
                .or_insert_with(|| ism.transition(t, id, branch.action));
            let cache = &mut node_cache[t + 1];
            let mut failed = false;
            let d = distribution_distance_by(
                &mine,
                pooled,
                |(x, p), (x2, p2)| {
                    let key = if p <= p2 { (p.0, p2.0) } else { (p2.0, p.0) };
                    let dn = *cache
                        .entry(key)
                        .or_insert_with(|| ism.node_distance(t + 1, key.0, key.1));
                    match dn {
                        Some(dn) => states.distance(*x, *x2).max(dn),
                        None => {
                            failed = true;
                            S::zero()
                        }
                    }
                },
                TieBreak::LowestId,
            );
            if failed {
                missing = Some(Error::NoNodeMetric(format!(
                    "{} nodes at stage {} need a metric",
                    ism.name(),
                    t + 1
                )));
                return id;
            }
            memo.insert((t, ui, id, mine), d);
            eps[t] = eps[t].max(d);
        }
        id
    });
    match missing {
        Some(e) => Err(e),
        None => Ok(eps),
    }
}
