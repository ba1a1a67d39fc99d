//! Max-plus cost distributions over finite sets.
//!
//! A cost distribution assigns each point a value in `[-a_max, 0]` or `-inf`.
//! Maxima play the role of sums and addition the role of products, so
//! marginalisation is a max over fibres and conditioning is a subtraction.
//! Here `-inf` is encoded by absence: a [`Distribution`] stores only its
//! finite support, sorted by key, and its largest value is always exactly 0.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sets::{hausdorff_by, FiniteMetricSpace, PointId};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Distribution<K, S> {
    support: Vec<(K, S)>,
}

/// Distribution over the points of one space.
pub type CostDistribution<S> = Distribution<PointId, S>;
/// Distribution over pairs of points of two spaces.
pub type JointCostDistribution<S> = Distribution<(PointId, PointId), S>;

impl<K: Ord + Clone, S: Scalar> Distribution<K, S> {
    /// Wraps an already normalized support: unique keys, values `<= 0`, max `== 0`.
    pub fn new(entries: impl IntoIterator<Item = (K, S)>) -> Result<Self> {
        let mut support: Vec<(K, S)> = entries.into_iter().collect();
        support.sort_by(|a, b| a.0.cmp(&b.0));
        if support.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain(
                "duplicate point in distribution support".into(),
            ));
        }
        match support.iter().map(|e| e.1).max() {
            None => Err(Error::Domain("cost distribution with empty support".into())),
            Some(m) if !m.is_zero() => Err(Error::Domain(format!(
                "cost distribution maximum is {m}, not 0"
            ))),
            Some(_) => Ok(Distribution { support }),
        }
    }

    /// Normalizes arbitrary finite values: duplicates combine by max, then the
    /// overall maximum is subtracted.
    pub fn normalized(entries: impl IntoIterator<Item = (K, S)>) -> Result<Self> {
        let mut merged: BTreeMap<K, S> = BTreeMap::new();
        for (k, v) in entries {
            merged
                .entry(k)
                .and_modify(|cur| *cur = (*cur).max(v))
                .or_insert(v);
        }
        let top = merged
            .values()
            .copied()
            .max()
            .ok_or_else(|| Error::ConditioningInfeasible("no feasible realization".into()))?;
        Ok(Distribution {
            support: merged.into_iter().map(|(k, v)| (k, v - top)).collect(),
        })
    }

    /// Same as [`Distribution::normalized`] for input already sorted by key
    /// with unique keys.
    pub(crate) fn normalized_sorted(mut support: Vec<(K, S)>) -> Self {
        debug_assert!(support.windows(2).all(|w| w[0].0 < w[1].0));
        let top = support.iter().map(|e| e.1).max().expect("nonempty support");
        for e in &mut support {
            e.1 = e.1 - top;
        }
        Distribution { support }
    }

    /// Zero on `keys`, `-inf` elsewhere.
    pub fn indicator(keys: impl IntoIterator<Item = K>) -> Result<Self> {
        let mut support: Vec<(K, S)> = keys.into_iter().map(|k| (k, S::zero())).collect();
        support.sort_by(|a, b| a.0.cmp(&b.0));
        support.dedup_by(|a, b| a.0 == b.0);
        if support.is_empty() {
            return Err(Error::Domain("indicator of an empty range".into()));
        }
        Ok(Distribution { support })
    }

    pub fn support(&self) -> &[(K, S)] {
        &self.support
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> + '_ {
        self.support.iter().map(|e| &e.0)
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Finite value at `k`, `None` standing for `-inf`.
    pub fn value(&self, k: &K) -> Option<S> {
        self.support
            .binary_search_by(|e| e.0.cmp(k))
            .ok()
            .map(|i| self.support[i].1)
    }

    /// `a_max`: the distance of the lowest finite value below zero.
    pub fn depth(&self) -> S {
        -self
            .support
            .iter()
            .map(|e| e.1)
            .min()
            .unwrap_or_else(S::zero)
    }

    pub fn is_indicator(&self) -> bool {
        self.support.iter().all(|e| e.1.is_zero())
    }
}

impl<S: Scalar> CostDistribution<S> {
    /// One CSV-ready row per point of `space`, `-inf` outside the support.
    pub fn render_rows(&self, space: &FiniteMetricSpace<S>) -> Vec<(String, String)> {
        space
            .ids()
            .map(|p| {
                let v = self
                    .value(&p)
                    .map(|v| v.render())
                    .unwrap_or_else(|| "-inf".to_string());
                (space.label(p).to_string(), v)
            })
            .collect()
    }
}

/// Indicator of a nonempty subset of `space`.
pub fn indicator<S: Scalar>(
    range: &[PointId],
    space: &FiniteMetricSpace<S>,
) -> Result<CostDistribution<S>> {
    if let Some(p) = range.iter().find(|p| !space.contains(**p)) {
        return Err(Error::Domain(format!("{p} is not a point of the space")));
    }
    Distribution::indicator(range.iter().copied())
}

/// `q(x | y) = q(x, y) - max_x q(x, y)`.
pub fn condition<S: Scalar>(
    joint: &JointCostDistribution<S>,
    y: PointId,
) -> Result<CostDistribution<S>> {
    let slice: Vec<(PointId, S)> = joint
        .support()
        .iter()
        .filter(|((_, b), _)| *b == y)
        .map(|((a, _), v)| (*a, *v))
        .collect();
    if slice.is_empty() {
        return Err(Error::ConditioningInfeasible(format!(
            "no supported pair with second component {y}"
        )));
    }
    Distribution::normalized(slice)
}

/// Image distribution under `f`: each image point takes the max over its fibre.
pub fn pushforward<K, K2, S>(q: &Distribution<K, S>, f: impl Fn(&K) -> K2) -> Distribution<K2, S>
where
    K: Ord + Clone,
    K2: Ord + Clone,
    S: Scalar,
{
    Distribution::normalized(q.support().iter().map(|(k, v)| (f(k), *v)))
        .expect("pushforward of a nonempty support")
}

/// `max_x (g(x) + q(x))` over the support of `q`.
pub fn max_functional<K, S: Scalar>(q: &Distribution<K, S>, g: impl Fn(&K) -> S) -> S {
    q.support
        .iter()
        .map(|(k, v)| g(k) + *v)
        .max()
        .expect("distributions have nonempty support")
}

/// Accrued distribution built from the feasible pairs `(x, a)` of a joint
/// range, `a` being a nonnegative accrued cost:
/// `r(x) = max{a : (x,a) feasible} - max{a : (., a) feasible}`.
pub fn accrued_distribution<K: Ord + Clone, S: Scalar>(
    pairs: &[(K, S)],
) -> Result<Distribution<K, S>> {
    if let Some((_, a)) = pairs.iter().find(|(_, a)| *a < S::zero()) {
        return Err(Error::Domain(format!("accrued cost {a} is negative")));
    }
    Distribution::normalized(pairs.iter().cloned())
}

/// How to resolve a non-unique nearest supported point.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TieBreak {
    /// Lowest key among the nearest points.
    LowestId,
    /// The choice that maximizes the value gap (an upper envelope over all tie-breaks).
    Worst,
}

/// Distance between two cost distributions: the larger of the Hausdorff
/// distance between supports and the largest value gap between nearest
/// supported points.
pub fn distribution_distance_by<K, S>(
    r: &Distribution<K, S>,
    q: &Distribution<K, S>,
    mut d: impl FnMut(&K, &K) -> S,
    tie: TieBreak,
) -> S
where
    K: Ord + Clone,
    S: Scalar,
{
    if r == q {
        return S::zero();
    }
    let rk: Vec<K> = r.keys().cloned().collect();
    let qk: Vec<K> = q.keys().cloned().collect();
    let mut worst = hausdorff_by(&rk, &qk, &mut d).expect("supports are nonempty");

    let nearest = |dist: &mut dyn FnMut(&K, &K) -> S, x: &K, s: &Distribution<K, S>| -> Vec<S> {
        if let Some(v) = s.value(x) {
            return vec![v];
        }
        let mut best: Option<S> = None;
        let mut vals = Vec::new();
        for (k, v) in s.support() {
            let dk = dist(x, k);
            match best {
                Some(b) if dk > b => {}
                Some(b) if dk == b => vals.push(*v),
                _ => {
                    best = Some(dk);
                    vals.clear();
                    vals.push(*v);
                }
            }
        }
        vals
    };

    let mut union: Vec<&K> = rk.iter().chain(&qk).collect();
    union.sort();
    union.dedup();
    for x in union {
        let rv = nearest(&mut d, x, r);
        let qv = nearest(&mut d, x, q);
        let gap = match tie {
            TieBreak::LowestId => (rv[0] - qv[0]).abs(),
            TieBreak::Worst => rv
                .iter()
                .flat_map(|a| qv.iter().map(move |b| (*a - *b).abs()))
                .max()
                .expect("nonempty"),
        };
        worst = worst.max(gap);
    }
    worst
}

/// [`distribution_distance_by`] on one metric space with lowest-id tie-breaking.
pub fn distribution_distance<S: Scalar>(
    r: &CostDistribution<S>,
    q: &CostDistribution<S>,
    space: &FiniteMetricSpace<S>,
) -> S {
    distribution_distance_by(r, q, |a, b| space.distance(*a, *b), TieBreak::LowestId)
}

/// Smallest `L` with `|g(a) - g(b)| <= L d(a, b)` over `points`; `None` if a
/// zero-distance pair has different values.
pub fn lipschitz_by<P, S: Scalar>(
    points: &[P],
    g: impl Fn(&P) -> S,
    mut d: impl FnMut(&P, &P) -> S,
) -> Option<S> {
    let values: Vec<S> = points.iter().map(&g).collect();
    let mut best = S::zero();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let gap = (values[i] - values[j]).abs();
            if gap.is_zero() {
                continue;
            }
            let dij = d(&points[i], &points[j]);
            if dij.is_zero() {
                return None;
            }
            if gap > best * dij {
                best = gap / dij;
            }
        }
    }
    Some(best)
}

/// Lipschitz constant of `g` over a whole metric space (0 for singletons).
pub fn lipschitz_constant<S: Scalar>(g: impl Fn(PointId) -> S, space: &FiniteMetricSpace<S>) -> S {
    let ids: Vec<PointId> = space.ids().collect();
    lipschitz_by(&ids, |p| g(*p), |a, b| space.distance(*a, *b))
        .expect("metric spaces separate points")
}

/// Both sides of the Lipschitz perturbation bound:
/// `|max(g + r) - max(g + q)|` and `(L_g + 1) * distance(r, q)`.
pub fn lemma2_gap<S: Scalar>(
    g: impl Fn(PointId) -> S,
    r: &CostDistribution<S>,
    q: &CostDistribution<S>,
    space: &FiniteMetricSpace<S>,
) -> (S, S) {
    let lhs = (max_functional(r, |x| g(*x)) - max_functional(q, |x| g(*x))).abs();
    let bound = (lipschitz_constant(&g, space) + S::one()) * distribution_distance(r, q, space);
    (lhs, bound)
}
