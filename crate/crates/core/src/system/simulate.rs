//! Rollouts of a strategy and the exhaustive worst-case criterion.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sets::PointId;
use crate::system::{Memory, SystemSpec};

/// A control strategy `u_t = g_t(m_t)`.
pub trait Strategy<S: Scalar>: Sync {
    /// Action at `memory`, `None` where the strategy is undefined.
    fn action(&self, spec: &SystemSpec<S>, memory: &Memory) -> Option<PointId>;
}

/// A strategy given by an explicit table over memories.
#[derive(Clone, Debug, Default)]
pub struct MemoryStrategy {
    pub table: HashMap<Memory, PointId>,
}

impl<S: Scalar> Strategy<S> for MemoryStrategy {
    fn action(&self, _spec: &SystemSpec<S>, memory: &Memory) -> Option<PointId> {
        self.table.get(memory).copied()
    }
}

/// Any closure over memories is a strategy.
pub struct FnStrategy<F>(pub F);

impl<S: Scalar, F: Fn(&SystemSpec<S>, &Memory) -> Option<PointId> + Sync> Strategy<S>
    for FnStrategy<F>
{
    fn action(&self, spec: &SystemSpec<S>, memory: &Memory) -> Option<PointId> {
        (self.0)(spec, memory)
    }
}

/// One realization of the closed loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory<S> {
    /// `x_{0:T}`
    pub states: Vec<PointId>,
    /// `y_{0:T}`
    pub observations: Vec<PointId>,
    /// `u_{0:T}`
    pub actions: Vec<PointId>,
    /// `w_{0:T-1}`
    pub disturbances: Vec<PointId>,
    /// `n_{0:T}`
    pub noises: Vec<PointId>,
    /// `a_{0:T+1}` with `a_0 = 0`
    pub accrued: Vec<S>,
}

impl<S: Scalar> Trajectory<S> {
    pub fn total_cost(&self) -> S {
        *self.accrued.last().expect("accrued costs start at a_0")
    }
}

/// Deterministic rollout of `strategy` from `x0` under the given inputs.
pub fn simulate<S: Scalar>(
    spec: &SystemSpec<S>,
    strategy: &dyn Strategy<S>,
    x0: PointId,
    ws: &[PointId],
    ns: &[PointId],
) -> Result<Trajectory<S>> {
    let horizon = spec.horizon();
    if ws.len() != horizon || ns.len() != horizon + 1 {
        return Err(Error::Domain(format!(
            "expected {horizon} disturbances and {} noises, got {} and {}",
            horizon + 1,
            ws.len(),
            ns.len()
        )));
    }
    if spec.initial().binary_search(&x0).is_err() {
        return Err(Error::Domain(format!(
            "{} is not an initial state",
            spec.states.label(x0)
        )));
    }
    if ws.iter().any(|w| !spec.disturbances.contains(*w))
        || ns.iter().any(|n| !spec.noises.contains(*n))
    {
        return Err(Error::Domain("input outside its feasible set".into()));
    }
    let mut traj = Trajectory {
        states: vec![x0],
        observations: Vec::with_capacity(horizon + 1),
        actions: Vec::with_capacity(horizon + 1),
        disturbances: ws.to_vec(),
        noises: ns.to_vec(),
        accrued: vec![S::zero()],
    };
    let mut memory = Memory {
        observations: Vec::new(),
        actions: Vec::new(),
    };
    let mut x = x0;
    for t in 0..=horizon {
        let y = spec.observe(t, x, ns[t]);
        traj.observations.push(y);
        memory.observations.push(y);
        let u = strategy
            .action(spec, &memory)
            .ok_or_else(|| Error::StrategyIncomplete(memory.render(spec)))?;
        traj.actions.push(u);
        let a = traj.accrued[t] + spec.cost(t, x, u);
        traj.accrued.push(a);
        if t < horizon {
            memory.actions.push(u);
            x = spec.next_state(t, x, u, ws[t]);
            traj.states.push(x);
        }
    }
    Ok(traj)
}

/// Every input sequence `(w_{0:T-1}, n_{0:T})`, in lexicographic order.
pub(crate) fn input_sequences<S: Scalar>(
    spec: &SystemSpec<S>,
) -> Vec<(Vec<PointId>, Vec<PointId>)> {
    let horizon = spec.horizon();
    let (nw, nn) = (spec.disturbances.len(), spec.noises.len());
    let digits: Vec<usize> = std::iter::repeat_n(nw, horizon)
        .chain(std::iter::repeat_n(nn, horizon + 1))
        .collect();
    let mut out = Vec::new();
    let mut odometer = vec![0usize; digits.len()];
    loop {
        let ws = odometer[..horizon]
            .iter()
            .map(|&i| PointId::from_index(i))
            .collect();
        let ns = odometer[horizon..]
            .iter()
            .map(|&i| PointId::from_index(i))
            .collect();
        out.push((ws, ns));
        let mut k = digits.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            odometer[k] += 1;
            if odometer[k] < digits[k] {
                break;
            }
            odometer[k] = 0;
        }
    }
}

/// Worst total cost of `strategy` for each initial observation `y_0`.
pub fn worst_case_by_root<S: Scalar>(
    spec: &SystemSpec<S>,
    strategy: &dyn Strategy<S>,
) -> Result<BTreeMap<PointId, S>> {
    let inputs = input_sequences(spec);
    let per_x0: Vec<Vec<(PointId, S)>> = spec
        .initial()
        .par_iter()
        .map(|&x0| {
            inputs
                .iter()
                .map(|(ws, ns)| {
                    simulate(spec, strategy, x0, ws, ns)
                        .map(|tr| (tr.observations[0], tr.total_cost()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut out: BTreeMap<PointId, S> = BTreeMap::new();
    for (y0, cost) in per_x0.into_iter().flatten() {
        let slot = out.entry(y0).or_insert(cost);
        *slot = (*slot).max(cost);
    }
    Ok(out)
}

/// The worst-case criterion: max total cost over every initial state,
/// disturbance sequence and noise sequence.
pub fn worst_case_cost<S: Scalar>(spec: &SystemSpec<S>, strategy: &dyn Strategy<S>) -> Result<S> {
    Ok(worst_case_by_root(spec, strategy)?
        .into_values()
        .max()
        .expect("initial range is nonempty"))
}
