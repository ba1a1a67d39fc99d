//! Memories and the depth-first fold over the tree of feasible memories.
//!
//! A memory `m_t = (y_{0:t}, u_{0:t-1})` is feasible when some initial state,
//! disturbance and noise sequence realizes its observations under its
//! actions. Feasible memories form a tree: the children of `m_t` under `u_t`
//! are the memories `(m_t, u_t, y_{t+1})` for every feasible next
//! observation. Each node of the tree carries its joint range
//! `[[X_t, A_t | m_t]]` of states and accrued costs.

use std::collections::BTreeMap;

use crate::distribution::{CostDistribution, Distribution, JointCostDistribution};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sets::PointId;
use crate::system::SystemSpec;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Memory {
    pub observations: Vec<PointId>,
    pub actions: Vec<PointId>,
}

impl Memory {
    pub fn initial(y0: PointId) -> Self {
        Memory {
            observations: vec![y0],
            actions: Vec::new(),
        }
    }

    pub fn stage(&self) -> usize {
        self.observations.len() - 1
    }

    pub fn extend(&self, u: PointId, y: PointId) -> Self {
        let mut m = self.clone();
        m.actions.push(u);
        m.observations.push(y);
        m
    }

    /// Truncation to stage `t`.
    pub fn prefix(&self, t: usize) -> Self {
        Memory {
            observations: self.observations[..=t].to_vec(),
            actions: self.actions[..t].to_vec(),
        }
    }

    /// `y0 u0 y1 u1 y2` with point labels.
    pub fn render<S: Scalar>(&self, spec: &SystemSpec<S>) -> String {
        render_history(spec, &self.observations, &self.actions)
    }

    fn check_shape<S: Scalar>(&self, spec: &SystemSpec<S>) -> Result<()> {
        if self.observations.is_empty() || self.observations.len() != self.actions.len() + 1 {
            return Err(Error::Domain(
                "memory needs exactly one more observation than actions".into(),
            ));
        }
        if self.stage() > spec.horizon() {
            return Err(Error::Domain(format!(
                "memory stage {} exceeds the horizon",
                self.stage()
            )));
        }
        if self
            .observations
            .iter()
            .any(|y| !spec.observations.contains(*y))
            || self.actions.iter().any(|u| !spec.actions.contains(*u))
        {
            return Err(Error::Domain(
                "memory refers to points outside the system".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn render_history<S: Scalar>(
    spec: &SystemSpec<S>,
    ys: &[PointId],
    us: &[PointId],
) -> String {
    let mut out = String::new();
    for (i, y) in ys.iter().enumerate() {
        if i > 0 {
            out.push(' ');
            out.push_str(spec.actions.label(us[i - 1]));
            out.push(' ');
        }
        out.push_str(spec.observations.label(*y));
    }
    out
}

/// The joint range `[[X_t, A_t | m_t]]`: feasible (state, accrued cost) pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Belief<S> {
    pairs: Vec<(PointId, S)>,
    support: Vec<PointId>,
    starts: Vec<usize>,
    cost_to_come: Vec<S>,
}

impl<S: Scalar> Belief<S> {
    pub fn new(mut pairs: Vec<(PointId, S)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let mut support = Vec::new();
        let mut starts = Vec::new();
        let mut cost_to_come = Vec::new();
        for (i, (x, a)) in pairs.iter().enumerate() {
            if support.last() != Some(x) {
                support.push(*x);
                starts.push(i);
                cost_to_come.push(*a);
            } else {
                let last = cost_to_come.len() - 1;
                cost_to_come[last] = cost_to_come[last].max(*a);
            }
        }
        starts.push(pairs.len());
        Belief {
            pairs,
            support,
            starts,
            cost_to_come,
        }
    }

    /// Sorted feasible pairs.
    pub fn pairs(&self) -> &[(PointId, S)] {
        &self.pairs
    }

    /// `[[X_t | m_t]]`, sorted.
    pub fn support(&self) -> &[PointId] {
        &self.support
    }

    /// Worst accrued cost per support state, aligned with [`Belief::support`].
    pub fn cost_to_come(&self) -> &[S] {
        &self.cost_to_come
    }

    /// `max [[A_t | m_t]]`.
    pub fn top(&self) -> S {
        self.cost_to_come
            .iter()
            .copied()
            .max()
            .expect("feasible memories have nonempty beliefs")
    }

    /// `r_t(. | m_t)` as raw (unnormalized) pairs, aligned with the support.
    pub fn raw_accrued(&self) -> impl Iterator<Item = (PointId, S)> + '_ {
        self.support
            .iter()
            .copied()
            .zip(self.cost_to_come.iter().copied())
    }

    /// The normalized accrued distribution `r_t(. | m_t)`.
    pub fn accrued(&self) -> CostDistribution<S> {
        Distribution::normalized_sorted(self.raw_accrued().collect())
    }

    fn accrued_values(&self, i: usize) -> &[(PointId, S)] {
        &self.pairs[self.starts[i]..self.starts[i + 1]]
    }
}

/// One feasible child memory `(m_t, u_t, y_{t+1})`.
#[derive(Clone, Debug)]
pub struct Child<S> {
    pub observation: PointId,
    pub belief: Belief<S>,
}

/// All children of a memory under one action.
#[derive(Clone, Debug)]
pub struct Branch<S> {
    pub action: PointId,
    /// Sorted by observation.
    pub children: Vec<Child<S>>,
    /// For each support state of the parent, the indices of the children it
    /// can produce under this action.
    pub reach: Vec<Vec<u32>>,
}

/// A feasible memory as seen by a fold visitor.
pub struct MemoryCtx<'a, S> {
    pub stage: usize,
    pub observations: &'a [PointId],
    pub actions: &'a [PointId],
    pub belief: &'a Belief<S>,
}

impl<S: Scalar> MemoryCtx<'_, S> {
    pub fn memory(&self) -> Memory {
        Memory {
            observations: self.observations.to_vec(),
            actions: self.actions.to_vec(),
        }
    }

    pub fn render(&self, spec: &SystemSpec<S>) -> String {
        render_history(spec, self.observations, self.actions)
    }
}

/// Initial beliefs keyed by `y_0`: `[[X_0 | y_0]] x {0}`.
pub fn initial_beliefs<S: Scalar>(spec: &SystemSpec<S>) -> Vec<(PointId, Belief<S>)> {
    let mut groups: BTreeMap<PointId, Vec<(PointId, S)>> = BTreeMap::new();
    for &x in spec.initial() {
        for n in spec.noises.ids() {
            groups
                .entry(spec.observe(0, x, n))
                .or_default()
                .push((x, S::zero()));
        }
    }
    groups
        .into_iter()
        .map(|(y, pairs)| (y, Belief::new(pairs)))
        .collect()
}

/// Children of a stage-`t` memory under action `u`.
pub fn expand<S: Scalar>(
    spec: &SystemSpec<S>,
    t: usize,
    belief: &Belief<S>,
    u: PointId,
) -> Branch<S> {
    let mut triples: Vec<(PointId, PointId, S)> = Vec::new();
    let mut reach_pairs: Vec<(u32, PointId)> = Vec::new();
    for (i, &x) in belief.support().iter().enumerate() {
        let c = spec.cost(t, x, u);
        let accrued = belief.accrued_values(i);
        for w in spec.disturbances.ids() {
            let next = spec.next_state(t, x, u, w);
            for n in spec.noises.ids() {
                let y = spec.observe(t + 1, next, n);
                reach_pairs.push((i as u32, y));
                triples.extend(accrued.iter().map(|(_, a)| (y, next, *a + c)));
            }
        }
    }
    triples.sort_unstable();
    triples.dedup();
    let mut children: Vec<Child<S>> = Vec::new();
    let mut start = 0;
    while start < triples.len() {
        let y = triples[start].0;
        let end = start + triples[start..].iter().take_while(|e| e.0 == y).count();
        let pairs = triples[start..end].iter().map(|e| (e.1, e.2)).collect();
        children.push(Child {
            observation: y,
            belief: Belief::new(pairs),
        });
        start = end;
    }
    reach_pairs.sort_unstable();
    reach_pairs.dedup();
    let mut reach = vec![Vec::new(); belief.support().len()];
    for (i, y) in reach_pairs {
        let j = children
            .binary_search_by(|c| c.observation.cmp(&y))
            .expect("reached observation has a child");
        reach[i as usize].push(j as u32);
    }
    Branch {
        action: u,
        children,
        reach,
    }
}

/// Children under every action, in action order.
pub fn expand_all<S: Scalar>(spec: &SystemSpec<S>, t: usize, belief: &Belief<S>) -> Vec<Branch<S>> {
    spec.actions
        .ids()
        .map(|u| expand(spec, t, belief, u))
        .collect()
}

/// Post-order fold over every feasible memory.
///
/// `visit` sees a memory, its branches (empty at the horizon) and the results
/// already computed for its children, indexed `[action][child]`. Roots are
/// returned with their initial observation, in observation order.
pub fn fold_memories<S, R, F>(spec: &SystemSpec<S>, mut visit: F) -> Vec<(PointId, R)>
where
    S: Scalar,
    F: FnMut(&MemoryCtx<S>, &[Branch<S>], Vec<Vec<R>>) -> R,
{
    let mut obs = Vec::with_capacity(spec.horizon() + 1);
    let mut acts = Vec::with_capacity(spec.horizon());
    initial_beliefs(spec)
        .into_iter()
        .map(|(y, belief)| {
            obs.push(y);
            let r = fold_node(spec, &mut obs, &mut acts, &belief, &mut visit);
            obs.pop();
            (y, r)
        })
        .collect()
}

fn fold_node<S, R, F>(
    spec: &SystemSpec<S>,
    obs: &mut Vec<PointId>,
    acts: &mut Vec<PointId>,
    belief: &Belief<S>,
    visit: &mut F,
) -> R
where
    S: Scalar,
    F: FnMut(&MemoryCtx<S>, &[Branch<S>], Vec<Vec<R>>) -> R,
{
    let t = obs.len() - 1;
    let branches = if t < spec.horizon() {
        expand_all(spec, t, belief)
    } else {
        Vec::new()
    };
    let mut results = Vec::with_capacity(branches.len());
    for b in &branches {
        acts.push(b.action);
        let mut rs = Vec::with_capacity(b.children.len());
        for c in &b.children {
            obs.push(c.observation);
            rs.push(fold_node(spec, obs, acts, &c.belief, visit));
            obs.pop();
        }
        acts.pop();
        results.push(rs);
    }
    let ctx = MemoryCtx {
        stage: t,
        observations: obs,
        actions: acts,
        belief,
    };
    visit(&ctx, &branches, results)
}

/// Feasible memory counts per stage, refusing to go past `budget` in total.
pub fn count_memories<S: Scalar>(spec: &SystemSpec<S>, budget: usize) -> Result<Vec<usize>> {
    fn walk<S: Scalar>(
        spec: &SystemSpec<S>,
        t: usize,
        belief: &Belief<S>,
        counts: &mut [usize],
        total: &mut usize,
        budget: usize,
    ) -> Result<()> {
        counts[t] += 1;
        *total += 1;
        if *total > budget {
            return Err(Error::BudgetExceeded {
                at_least: *total,
                budget,
            });
        }
        if t == spec.horizon() {
            return Ok(());
        }
        for u in spec.actions.ids() {
            let b = expand(spec, t, belief, u);
            if t + 1 == spec.horizon() {
                counts[t + 1] += b.children.len();
                *total += b.children.len();
                if *total > budget {
                    return Err(Error::BudgetExceeded {
                        at_least: *total,
                        budget,
                    });
                }
            } else {
                for c in &b.children {
                    walk(spec, t + 1, &c.belief, counts, total, budget)?;
                }
            }
        }
        Ok(())
    }
    let mut counts = vec![0; spec.horizon() + 1];
    let mut total = 0;
    for (_, belief) in initial_beliefs(spec) {
        walk(spec, 0, &belief, &mut counts, &mut total, budget)?;
    }
    Ok(counts)
}

/// Every feasible memory of stage `t`, in tree order.
pub fn enumerate_memories<S: Scalar>(spec: &SystemSpec<S>, t: usize) -> Vec<Memory> {
    fn walk<S: Scalar>(
        spec: &SystemSpec<S>,
        target: usize,
        m: Memory,
        belief: &Belief<S>,
        out: &mut Vec<Memory>,
    ) {
        let t = m.stage();
        if t == target {
            out.push(m);
            return;
        }
        for u in spec.actions.ids() {
            for c in expand(spec, t, belief, u).children {
                walk(spec, target, m.extend(u, c.observation), &c.belief, out);
            }
        }
    }
    let mut out = Vec::new();
    if t <= spec.horizon() {
        for (y, belief) in initial_beliefs(spec) {
            walk(spec, t, Memory::initial(y), &belief, &mut out);
        }
    }
    out
}

/// `[[X_t, A_t | m_t]]` by replaying the memory through [`expand`].
pub fn joint_range<S: Scalar>(spec: &SystemSpec<S>, m: &Memory) -> Result<Belief<S>> {
    m.check_shape(spec)?;
    let infeasible =
        || Error::ConditioningInfeasible(format!("memory {} is not feasible", m.render(spec)));
    let mut belief = initial_beliefs(spec)
        .into_iter()
        .find(|(y, _)| *y == m.observations[0])
        .map(|(_, b)| b)
        .ok_or_else(infeasible)?;
    for (t, (&u, &y)) in m.actions.iter().zip(&m.observations[1..]).enumerate() {
        belief = expand(spec, t, &belief, u)
            .children
            .into_iter()
            .find(|c| c.observation == y)
            .map(|c| c.belief)
            .ok_or_else(infeasible)?;
    }
    Ok(belief)
}

/// Worst cost-to-come `v_t(x)` consistent with `m`, by a max-plus forward filter.
fn cost_to_come<S: Scalar>(spec: &SystemSpec<S>, m: &Memory) -> Result<BTreeMap<PointId, S>> {
    m.check_shape(spec)?;
    let infeasible =
        || Error::ConditioningInfeasible(format!("memory {} is not feasible", m.render(spec)));
    let emits =
        |t: usize, x: PointId, y: PointId| spec.noises.ids().any(|n| spec.observe(t, x, n) == y);
    let mut v: BTreeMap<PointId, S> = spec
        .initial()
        .iter()
        .filter(|&&x| emits(0, x, m.observations[0]))
        .map(|&x| (x, S::zero()))
        .collect();
    for t in 0..m.stage() {
        let (u, y) = (m.actions[t], m.observations[t + 1]);
        let mut next: BTreeMap<PointId, S> = BTreeMap::new();
        for (&x, &a) in &v {
            let a = a + spec.cost(t, x, u);
            for w in spec.disturbances.ids() {
                let x2 = spec.next_state(t, x, u, w);
                if emits(t + 1, x2, y) {
                    let slot = next.entry(x2).or_insert(a);
                    *slot = (*slot).max(a);
                }
            }
        }
        v = next;
    }
    if v.is_empty() {
        return Err(infeasible());
    }
    Ok(v)
}

/// `r_t(. | m_t)`: worst cost-to-come consistent with `m`, normalized.
pub fn conditional_accrued<S: Scalar>(
    spec: &SystemSpec<S>,
    m: &Memory,
) -> Result<CostDistribution<S>> {
    Distribution::normalized(cost_to_come(spec, m)?)
}

/// `r_t(x_t, m_{t+1} | m_t, u_t)`. The next memory `(m_t, u_t, y)` is keyed by
/// its new observation `y`.
pub fn transition_accrued<S: Scalar>(
    spec: &SystemSpec<S>,
    m: &Memory,
    u: PointId,
) -> Result<JointCostDistribution<S>> {
    let t = m.stage();
    if t >= spec.horizon() {
        return Err(Error::Domain("no transition out of the horizon".into()));
    }
    if !spec.actions.contains(u) {
        return Err(Error::Domain(format!("{u} is not an action")));
    }
    let v = cost_to_come(spec, m)?;
    let mut entries = Vec::new();
    for (&x, &a) in &v {
        for w in spec.disturbances.ids() {
            let x2 = spec.next_state(t, x, u, w);
            for n in spec.noises.ids() {
                entries.push(((x, spec.observe(t + 1, x2, n)), a));
            }
        }
    }
    Distribution::normalized(entries)
}
