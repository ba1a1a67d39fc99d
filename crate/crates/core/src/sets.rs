//! Finite metric spaces, range relations and the Hausdorff distance.
//!
//! Every feasible set of the model (states, actions, observations,
//! disturbances, noises, information-state nodes) is a [`FiniteMetricSpace`]:
//! an ordered list of labelled points with a total distance function. Metric
//! axioms are checked when a space is constructed from raw data; spaces
//! derived from already-valid spaces (products, coordinate embeddings) are
//! metrics by construction and skip the cubic triangle check.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Spaces up to this size keep a dense distance table.
const DENSE_LIMIT: usize = 1024;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointId(pub u32);

impl PointId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        PointId(u32::try_from(i).expect("point index exceeds u32"))
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Point {
    pub id: PointId,
    pub label: String,
}

/// Norm used to turn coordinate lists into distances.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Norm::Euclidean),
            "manhattan" => Ok(Norm::Manhattan),
            "chebyshev" => Ok(Norm::Chebyshev),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug)]
enum Metric<S> {
    Table,
    Coordinates {
        coords: Vec<Vec<S>>,
        norm: Norm,
    },
    Product {
        components: Vec<Arc<FiniteMetricSpace<S>>>,
    },
}

#[derive(Debug)]
pub struct FiniteMetricSpace<S> {
    points: Vec<Point>,
    index: HashMap<String, PointId>,
    metric: Metric<S>,
    table: Option<Vec<S>>,
}

impl<S: Scalar> FiniteMetricSpace<S> {
    /// Builds a space from an explicit distance matrix, checking all metric axioms.
    pub fn from_table(labels: Vec<String>, table: Vec<Vec<S>>) -> Result<Self> {
        let n = labels.len();
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::Metric(format!("distance matrix must be {n}x{n}")));
        }
        let flat: Vec<S> = table.into_iter().flatten().collect();
        check_metric_table(n, &flat)?;
        Self::assemble(labels, Metric::Table, Some(flat))
    }

    /// Builds a space whose distances come from coordinates under `norm`.
    ///
    /// In exact arithmetic every Euclidean distance must have a rational
    /// square root, otherwise construction fails.
    pub fn from_coordinates(labels: Vec<String>, coords: Vec<Vec<S>>, norm: Norm) -> Result<Self> {
        let n = labels.len();
        if coords.len() != n {
            return Err(Error::Metric(format!(
                "{} coordinate rows for {n} points",
                coords.len()
            )));
        }
        if let Some(dim) = coords.first().map(Vec::len) {
            if let Some(i) = coords.iter().position(|c| c.len() != dim) {
                return Err(Error::Metric(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    coords[i].len()
                )));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if coords[i] == coords[j] {
                    return Err(Error::Metric(format!(
                        "points {i} and {j} share coordinates (distance 0)"
                    )));
                }
                if S::EXACT
                    && norm == Norm::Euclidean
                    && coordinate_distance(&coords[i], &coords[j], norm).is_none()
                {
                    return Err(Error::Metric(format!(
                        "euclidean distance between points {i} and {j} is irrational; use float arithmetic"
                    )));
                }
            }
        }
        Self::assemble(labels, Metric::Coordinates { coords, norm }, None)
    }

    fn assemble(labels: Vec<String>, metric: Metric<S>, table: Option<Vec<S>>) -> Result<Self> {
        let mut index = HashMap::with_capacity(labels.len());
        let mut points = Vec::with_capacity(labels.len());
        for (i, label) in labels.into_iter().enumerate() {
            let id = PointId::from_index(i);
            if index.insert(label.clone(), id).is_some() {
                return Err(Error::Metric(format!("duplicate label {label:?}")));
            }
            points.push(Point { id, label });
        }
        let mut space = FiniteMetricSpace {
            points,
            index,
            metric,
            table,
        };
        if space.table.is_none() && space.len() <= DENSE_LIMIT {
            let n = space.len();
            let mut flat = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    flat.push(space.compute(PointId::from_index(a), PointId::from_index(b)));
                }
            }
            space.table = Some(flat);
        }
        Ok(space)
    }

    /// Integer-line space `{0, 1, .., n-1}` with `d = |a - b|`, labelled by value.
    pub fn integer_line(values: &[i64]) -> Result<Self> {
        let labels = values.iter().map(|v| v.to_string()).collect();
        let coords = values.iter().map(|&v| vec![S::from_int(v)]).collect();
        Self::from_coordinates(labels, coords, Norm::Manhattan)
    }

    /// Space where distinct points are at distance one.
    pub fn discrete(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        let table = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { S::zero() } else { S::one() })
                    .collect()
            })
            .collect();
        Self::from_table(labels, table)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn ids(&self) -> impl Iterator<Item = PointId> + '_ {
        (0..self.points.len()).map(PointId::from_index)
    }

    pub fn contains(&self, p: PointId) -> bool {
        p.index() < self.points.len()
    }

    pub fn label(&self, p: PointId) -> &str {
        &self.points[p.index()].label
    }

    pub fn id_of(&self, label: &str) -> Option<PointId> {
        self.index.get(label).copied()
    }

    pub fn distance(&self, a: PointId, b: PointId) -> S {
        match &self.table {
            Some(t) => t[a.index() * self.len() + b.index()],
            None => self.compute(a, b),
        }
    }

    fn compute(&self, a: PointId, b: PointId) -> S {
        match &self.metric {
            Metric::Table => unreachable!("table metrics always carry their table"),
            Metric::Coordinates { coords, norm } => {
                coordinate_distance(&coords[a.index()], &coords[b.index()], *norm)
                    .expect("coordinate distances validated at construction")
            }
            Metric::Product { components } => {
                let (pa, pb) = (self.split(a), self.split(b));
                components
                    .iter()
                    .zip(pa.iter().zip(&pb))
                    .map(|(c, (&x, &y))| c.distance(x, y))
                    .max()
                    .unwrap_or_else(S::zero)
            }
        }
    }

    /// Coordinates of a point, if the space was built from coordinates.
    pub fn coordinates(&self, p: PointId) -> Option<&[S]> {
        match &self.metric {
            Metric::Coordinates { coords, .. } => Some(&coords[p.index()]),
            _ => None,
        }
    }

    /// Components of a product space (a single-element slice otherwise).
    pub fn components(&self) -> Option<&[Arc<FiniteMetricSpace<S>>]> {
        match &self.metric {
            Metric::Product { components } => Some(components),
            _ => None,
        }
    }

    /// Splits a product point into its component points (row-major order).
    pub fn split(&self, p: PointId) -> Vec<PointId> {
        match &self.metric {
            Metric::Product { components } => {
                let mut rest = p.index();
                let mut out = vec![PointId(0); components.len()];
                for (slot, c) in out.iter_mut().zip(components).rev() {
                    *slot = PointId::from_index(rest % c.len());
                    rest /= c.len();
                }
                out
            }
            _ => vec![p],
        }
    }

    /// Component `k` of a product point, without allocating.
    pub fn component(&self, p: PointId, k: usize) -> PointId {
        match &self.metric {
            Metric::Product { components } => {
                let stride: usize = components[k + 1..].iter().map(|c| c.len()).product();
                PointId::from_index((p.index() / stride) % components[k].len())
            }
            _ => p,
        }
    }

    /// Inverse of [`FiniteMetricSpace::split`].
    pub fn join(&self, parts: &[PointId]) -> PointId {
        match &self.metric {
            Metric::Product { components } => {
                assert_eq!(
                    parts.len(),
                    components.len(),
                    "wrong arity for product point"
                );
                let idx = components
                    .iter()
                    .zip(parts)
                    .fold(0usize, |acc, (c, p)| acc * c.len() + p.index());
                PointId::from_index(idx)
            }
            _ => parts[0],
        }
    }

    /// Returns `true` when all metric axioms hold (used by property tests).
    pub fn satisfies_axioms(&self) -> bool {
        let n = self.len();
        let flat: Vec<S> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .map(|(a, b)| self.distance(PointId::from_index(a), PointId::from_index(b)))
            .collect();
        check_metric_table(n, &flat).is_ok()
    }
}

fn coordinate_distance<S: Scalar>(a: &[S], b: &[S], norm: Norm) -> Option<S> {
    let diffs = a.iter().zip(b).map(|(&x, &y)| (x - y).abs());
    match norm {
        Norm::Manhattan => Some(diffs.fold(S::zero(), |acc, d| acc + d)),
        Norm::Chebyshev => Some(diffs.fold(S::zero(), |acc, d| acc.max(d))),
        Norm::Euclidean => diffs.fold(S::zero(), |acc, d| acc + d * d).sqrt(),
    }
}

fn check_metric_table<S: Scalar>(n: usize, t: &[S]) -> Result<()> {
    let d = |a: usize, b: usize| t[a * n + b];
    for a in 0..n {
        if !d(a, a).is_zero() {
            return Err(Error::Metric(format!(
                "d({a},{a}) = {} is not zero",
                d(a, a)
            )));
        }
        for b in 0..n {
            if d(a, b) != d(b, a) {
                return Err(Error::Metric(format!("d({a},{b}) != d({b},{a})")));
            }
            if a != b && d(a, b) <= S::zero() {
                return Err(Error::Metric(format!(
                    "d({a},{b}) = {} is not positive",
                    d(a, b)
                )));
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if d(a, c) > d(a, b) + d(b, c) {
                    return Err(Error::Metric(format!(
                        "triangle inequality fails for ({a},{b},{c})"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Cartesian product of spaces under the max (Chebyshev) combination of
/// component metrics. Points are numbered row-major: the last component
/// varies fastest.
pub fn product_space<S: Scalar>(
    spaces: &[Arc<FiniteMetricSpace<S>>],
) -> Result<FiniteMetricSpace<S>> {
    match spaces {
        [] => Err(Error::Domain("product of an empty list of spaces".into())),
        [single] => {
            let labels = single.points.iter().map(|p| p.label.clone()).collect();
            let table = single
                .ids()
                .map(|a| single.ids().map(|b| single.distance(a, b)).collect())
                .collect::<Vec<Vec<S>>>();
            let flat = table.into_iter().flatten().collect();
            FiniteMetricSpace::assemble(labels, Metric::Table, Some(flat))
        }
        _ => {
            let total: usize = spaces.iter().map(|s| s.len()).product();
            let mut labels = Vec::with_capacity(total);
            for i in 0..total {
                let mut rest = i;
                let mut parts = vec![""; spaces.len()];
                for (slot, c) in parts.iter_mut().zip(spaces).rev() {
                    *slot = c.label(PointId::from_index(rest % c.len()));
                    rest /= c.len();
                }
                labels.push(parts.join("|"));
            }
            FiniteMetricSpace::assemble(
                labels,
                Metric::Product {
                    components: spaces.to_vec(),
                },
                None,
            )
        }
    }
}

/// Hausdorff distance between two nonempty point sets under an arbitrary distance.
pub fn hausdorff_by<P, S: Scalar>(a: &[P], b: &[P], mut d: impl FnMut(&P, &P) -> S) -> Result<S> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("Hausdorff distance of an empty set".into()));
    }
    let mut worst = S::zero();
    for x in a {
        let near = b.iter().map(|y| d(x, y)).min().expect("nonempty");
        worst = worst.max(near);
    }
    for y in b {
        let near = a.iter().map(|x| d(x, y)).min().expect("nonempty");
        worst = worst.max(near);
    }
    Ok(worst)
}

/// Hausdorff distance between two nonempty subsets of `space`.
pub fn hausdorff<S: Scalar>(
    a: &[PointId],
    b: &[PointId],
    space: &FiniteMetricSpace<S>,
) -> Result<S> {
    if let Some(p) = a.iter().chain(b).find(|p| !space.contains(**p)) {
        return Err(Error::Domain(format!("point {p} not in space")));
    }
    hausdorff_by(a, b, |x, y| space.distance(*x, *y))
}

/// Feasible pairs of two uncertain variables: their joint range.
#[derive(Debug, Clone)]
pub struct RangeRelation<S> {
    pub domain: Arc<FiniteMetricSpace<S>>,
    pub codomain: Arc<FiniteMetricSpace<S>>,
    pairs: BTreeSet<(PointId, PointId)>,
}

impl<S: Scalar> RangeRelation<S> {
    pub fn new(
        domain: Arc<FiniteMetricSpace<S>>,
        codomain: Arc<FiniteMetricSpace<S>>,
        pairs: impl IntoIterator<Item = (PointId, PointId)>,
    ) -> Result<Self> {
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        if let Some((x, y)) = pairs
            .iter()
            .find(|(x, y)| !domain.contains(*x) || !codomain.contains(*y))
        {
            return Err(Error::Domain(format!("pair ({x}, {y}) outside its spaces")));
        }
        Ok(RangeRelation {
            domain,
            codomain,
            pairs,
        })
    }

    pub fn pairs(&self) -> &BTreeSet<(PointId, PointId)> {
        &self.pairs
    }

    /// `[[X | y]]`: every `x` jointly feasible with `y`. Empty means `y` is infeasible.
    pub fn conditional_range(&self, y: PointId) -> Result<BTreeSet<PointId>> {
        if !self.codomain.contains(y) {
            return Err(Error::Domain(format!("{y} is not in the codomain")));
        }
        Ok(self
            .pairs
            .iter()
            .filter(|(_, b)| *b == y)
            .map(|(a, _)| *a)
            .collect())
    }

    /// `[[X]]`, the projection onto the domain.
    pub fn domain_range(&self) -> BTreeSet<PointId> {
        self.pairs.iter().map(|(a, _)| *a).collect()
    }

    /// `[[Y]]`, the projection onto the codomain.
    pub fn codomain_range(&self) -> BTreeSet<PointId> {
        self.pairs.iter().map(|(_, b)| *b).collect()
    }
}

/// Conditional range of a relation, as a free function.
pub fn conditional_range<S: Scalar>(
    rel: &RangeRelation<S>,
    y: PointId,
) -> Result<BTreeSet<PointId>> {
    rel.conditional_range(y)
}
