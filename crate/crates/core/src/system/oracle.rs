//! Exhaustive minimization of the worst-case criterion over strategies.
//!
//! Works directly on rollouts: a strategy is grown one memory at a time, only
//! on memories some rollout actually reaches, and branches are pruned as soon
//! as the completed rollouts already cost at least the best strategy found.
//! Nothing here uses beliefs, accrued distributions or dynamic programming.

use std::collections::{BTreeMap, HashMap};

use crate::scalar::Scalar;
use crate::sets::PointId;
use crate::system::simulate::input_sequences;
use crate::system::{Memory, SystemSpec};

type Input = (PointId, Vec<PointId>, Vec<PointId>);

/// `min_g max_{x0, w, n}` of the total cost, separately for each initial
/// observation `y_0` (strategies may differ across roots, so the overall
/// optimum is the max of these values).
pub fn optimal_worst_case<S: Scalar>(spec: &SystemSpec<S>) -> BTreeMap<PointId, S> {
    let mut by_root: BTreeMap<PointId, Vec<Input>> = BTreeMap::new();
    for &x0 in spec.initial() {
        for (ws, ns) in input_sequences(spec) {
            let y0 = spec.observe(0, x0, ns[0]);
            by_root.entry(y0).or_default().push((x0, ws, ns));
        }
    }
    by_root
        .into_iter()
        .map(|(y0, inputs)| {
            let mut assigned = HashMap::new();
            let v = search(spec, &inputs, &mut assigned, None)
                .expect("unbounded search finds a strategy");
            (y0, v)
        })
        .collect()
}

enum Rollout<S> {
    Done(S),
    Open(Memory),
}

fn rollout<S: Scalar>(
    spec: &SystemSpec<S>,
    assigned: &HashMap<Memory, PointId>,
    input: &Input,
) -> Rollout<S> {
    let (x0, ws, ns) = input;
    let mut x = *x0;
    let mut total = S::zero();
    let mut m = Memory {
        observations: Vec::new(),
        actions: Vec::new(),
    };
    for t in 0..=spec.horizon() {
        m.observations.push(spec.observe(t, x, ns[t]));
        let Some(&u) = assigned.get(&m) else {
            return Rollout::Open(m);
        };
        total = total + spec.cost(t, x, u);
        if t < spec.horizon() {
            m.actions.push(u);
            x = spec.next_state(t, x, u, ws[t]);
        }
    }
    Rollout::Done(total)
}

/// Best value strictly below `bound`, if any.
fn search<S: Scalar>(
    spec: &SystemSpec<S>,
    inputs: &[Input],
    assigned: &mut HashMap<Memory, PointId>,
    bound: Option<S>,
) -> Option<S> {
    let mut worst = S::zero();
    let mut open: Option<Memory> = None;
    for input in inputs {
        match rollout(spec, assigned, input) {
            Rollout::Done(c) => worst = worst.max(c),
            Rollout::Open(m) => {
                if open.is_none() {
                    open = Some(m);
                }
            }
        }
        if bound.is_some_and(|b| worst >= b) {
            return None;
        }
    }
    let Some(m) = open else {
        return Some(worst);
    };
    let mut best = bound;
    let mut found = None;
    for u in spec.actions.ids() {
        assigned.insert(m.clone(), u);
        if let Some(v) = search(spec, inputs, assigned, best) {
            best = Some(v);
            found = Some(v);
        }
        assigned.remove(&m);
    }
    found
}
