use std::collections::HashMap;
use std::hash::Hash;

use crate::scalar::Scalar;
use crate::sets::PointId;

/// Index and value of the smallest entry, lowest index on ties.
pub fn argmin<S: Scalar>(values: &[S]) -> (usize, S) {
    let mut best = (0, values[0]);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < best.1 {
            best = (i, v);
        }
    }
    best
}

/// Q, V and the greedy law of one stage.
#[derive(Clone, Debug)]
pub struct StageValues<K, S> {
    pub keys: Vec<K>,
    /// `q[i * |U| + u]`
    pub q: Vec<S>,
    pub v: Vec<S>,
    pub law: Vec<PointId>,
    index: HashMap<K, usize>,
}

/// Backward-induction output: per stage, Q over (key, action), V over keys
/// and the argmin law (lowest action id on ties).
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable<K, S> {
    actions: usize,
    stages: Vec<StageValues<K, S>>,
}

impl<K: PartialEq, S: PartialEq> PartialEq for StageValues<K, S> {
    fn eq(&self, other: &Self) -> bool {
        self.keys == other.keys && self.q == other.q && self.v == other.v && self.law == other.law
    }
}

impl<K: Clone + Eq + Hash, S: Scalar> StageValues<K, S> {
    /// Builds a stage from Q rows; V and the law follow by minimization.
    pub fn from_q(rows: Vec<(K, Vec<S>)>) -> Self {
        let mut stage = StageValues {
            keys: Vec::new(),
            q: Vec::new(),
            v: Vec::new(),
            law: Vec::new(),
            index: HashMap::new(),
        };
        for (k, q) in rows {
            let (u, v) = argmin(&q);
            stage.index.insert(k.clone(), stage.keys.len());
            stage.keys.push(k);
            stage.q.extend(q);
            stage.v.push(v);
            stage.law.push(PointId::from_index(u));
        }
        stage
    }

    /// Builds a stage whose law is prescribed rather than greedy: V is Q at
    /// the prescribed action.
    pub fn with_law(rows: Vec<(K, Vec<S>, PointId)>) -> Self {
        let mut stage = StageValues {
            keys: Vec::new(),
            q: Vec::new(),
            v: Vec::new(),
            law: Vec::new(),
            index: HashMap::new(),
        };
        for (k, q, u) in rows {
            stage.index.insert(k.clone(), stage.keys.len());
            stage.keys.push(k);
            stage.v.push(q[u.index()]);
            stage.q.extend(q);
            stage.law.push(u);
        }
        stage
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn position(&self, key: &K) -> Option<usize> {
        self.index.get(key).copied()
    }
}

impl<K: Clone + Eq + Hash, S: Scalar> ValueTable<K, S> {
    pub fn new(actions: usize, stages: Vec<StageValues<K, S>>) -> Self {
        ValueTable { actions, stages }
    }

    pub fn horizon(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }

    pub fn stage(&self, t: usize) -> &StageValues<K, S> {
        &self.stages[t]
    }

    pub fn stages(&self) -> &[StageValues<K, S>] {
        &self.stages
    }

    pub fn q(&self, t: usize, key: &K, u: PointId) -> Option<S> {
        let s = &self.stages[t];
        s.position(key).map(|i| s.q[i * self.actions + u.index()])
    }

    pub fn q_row(&self, t: usize, key: &K) -> Option<&[S]> {
        let s = &self.stages[t];
        s.position(key)
            .map(|i| &s.q[i * self.actions..(i + 1) * self.actions])
    }

    pub fn v(&self, t: usize, key: &K) -> Option<S> {
        let s = &self.stages[t];
        s.position(key).map(|i| s.v[i])
    }

    pub fn law(&self, t: usize, key: &K) -> Option<PointId> {
        let s = &self.stages[t];
        s.position(key).map(|i| s.law[i])
    }

    pub fn key_counts(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.len()).collect()
    }
}

/// Value table over information-state nodes, keyed by node id.
pub type NodeTable<S> = ValueTable<u32, S>;

impl<S: Scalar> NodeTable<S> {
    /// `V(t, node)` by position; node ids are dense.
    pub fn node_value(&self, t: usize, id: u32) -> S {
        self.stages[t].v[id as usize]
    }

    pub fn node_q(&self, t: usize, id: u32, u: PointId) -> S {
        self.stages[t].q[id as usize * self.actions + u.index()]
    }

    pub fn node_law(&self, t: usize, id: u32) -> PointId {
        self.stages[t].law[id as usize]
    }
}
