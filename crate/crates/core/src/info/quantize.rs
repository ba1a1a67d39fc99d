//! Grid quantization and the quantized-range approximate information state.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::info::{Compressor, InfoNode};
use crate::scalar::Scalar;
use crate::sets::{hausdorff, FiniteMetricSpace, PointId};
use crate::system::{MemoryCtx, SystemSpec};

/// A covering map `mu` from grid cells onto designated quantization cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quantizer {
    /// Sorted quantization cells.
    points: Vec<PointId>,
    /// `mu` per cell id.
    image: Vec<PointId>,
}

fn integer_coords<S: Scalar>(space: &FiniteMetricSpace<S>, p: PointId) -> Result<(i64, i64)> {
    match space.coordinates(p) {
        Some([x, y]) => Ok((x.to_f64().round() as i64, y.to_f64().round() as i64)),
        _ => Err(Error::Quantizer(format!(
            "cell {} has no planar coordinates",
            space.label(p)
        ))),
    }
}

impl Quantizer {
    /// Quantization cells: every cell within Chebyshev distance `fine_radius`
    /// of `fine_center`, plus the cells of the center's checkerboard colour
    /// elsewhere. `mu` maps a cell to its nearest quantization cell, lowest id
    /// on ties. Fails when some cell is farther than 1 from every
    /// quantization cell, which obstacles can cause.
    pub fn checkerboard<S: Scalar>(
        fine_center: PointId,
        space: &FiniteMetricSpace<S>,
        fine_radius: i64,
    ) -> Result<Self> {
        if !space.contains(fine_center) {
            return Err(Error::Quantizer(format!(
                "center {fine_center} is not a cell"
            )));
        }
        let (cx, cy) = integer_coords(space, fine_center)?;
        let parity = (cx + cy).rem_euclid(2);
        let mut points = Vec::new();
        for p in space.ids() {
            let (x, y) = integer_coords(space, p)?;
            let fine = (x - cx).abs().max((y - cy).abs()) <= fine_radius;
            if fine || (x + y).rem_euclid(2) == parity {
                points.push(p);
            }
        }
        Self::from_points(points, space)
    }

    /// Every cell is its own quantization cell.
    pub fn identity<S: Scalar>(space: &FiniteMetricSpace<S>) -> Self {
        let points: Vec<PointId> = space.ids().collect();
        Quantizer {
            image: points.clone(),
            points,
        }
    }

    /// Nearest-point map onto an arbitrary set of quantization cells.
    pub fn from_points<S: Scalar>(
        mut points: Vec<PointId>,
        space: &FiniteMetricSpace<S>,
    ) -> Result<Self> {
        points.sort();
        points.dedup();
        if points.is_empty() {
            return Err(Error::Quantizer("no quantization cells".into()));
        }
        let mut image = Vec::with_capacity(space.len());
        for p in space.ids() {
            let mut best = points[0];
            let mut best_d = space.distance(p, best);
            for &q in &points[1..] {
                let d = space.distance(p, q);
                if d < best_d {
                    best = q;
                    best_d = d;
                }
            }
            if best_d > S::one() {
                return Err(Error::Quantizer(format!(
                    "cell {} is {} away from the nearest quantization cell",
                    space.label(p),
                    best_d.render()
                )));
            }
            image.push(best);
        }
        Ok(Quantizer { points, image })
    }

    pub fn points(&self) -> &[PointId] {
        &self.points
    }

    pub fn map(&self, cell: PointId) -> PointId {
        self.image[cell.index()]
    }

    /// `max_x min_q d(x, q)`.
    pub fn covering_radius<S: Scalar>(&self, space: &FiniteMetricSpace<S>) -> S {
        space
            .ids()
            .map(|p| {
                self.points
                    .iter()
                    .map(|&q| space.distance(p, q))
                    .min()
                    .expect("nonempty")
            })
            .max()
            .unwrap_or_else(S::zero)
    }
}

/// Free-function form of [`Quantizer::checkerboard`].
pub fn quantizer<S: Scalar>(
    fine_center: PointId,
    space: &FiniteMetricSpace<S>,
    fine_radius: i64,
) -> Result<Quantizer> {
    Quantizer::checkerboard(fine_center, space, fine_radius)
}

/// `(x^ag, mu([[X^ta | m_t]]), y_0)` for systems whose states are
/// (agent cell, target cell) pairs and whose observations reveal the agent.
#[derive(Debug)]
pub struct QuantizedRange<S> {
    cells: Arc<FiniteMetricSpace<S>>,
    states: Arc<FiniteMetricSpace<S>>,
    observations: Arc<FiniteMetricSpace<S>>,
    quantizer: Quantizer,
}

impl<S: Scalar> QuantizedRange<S> {
    pub fn new(spec: &SystemSpec<S>, quantizer: Quantizer) -> Result<Self> {
        let cells = match spec.states.components() {
            Some([a, b]) if Arc::ptr_eq(a, b) => a.clone(),
            _ => {
                return Err(Error::Config(
                    "states must be pairs of cells from one grid".into(),
                ))
            }
        };
        if quantizer.image.len() != cells.len() {
            return Err(Error::Quantizer(
                "quantizer built for a different grid".into(),
            ));
        }
        Ok(QuantizedRange {
            cells,
            states: spec.states.clone(),
            observations: spec.observations.clone(),
            quantizer,
        })
    }
}

impl<S: Scalar> Compressor<S> for QuantizedRange<S> {
    fn name(&self) -> String {
        "quantized".into()
    }

    fn compress(&self, ctx: &MemoryCtx<S>) -> InfoNode<S> {
        let support = ctx.belief.support();
        let agent = self.states.component(support[0], 0);
        let mut range: Vec<PointId> = support
            .iter()
            .map(|&x| self.quantizer.map(self.states.component(x, 1)))
            .collect();
        range.sort();
        range.dedup();
        InfoNode::Composite {
            exact: vec![agent, ctx.observations[0]],
            range,
        }
    }

    fn node_distance(&self, a: &InfoNode<S>, b: &InfoNode<S>) -> Option<S> {
        match (a, b) {
            (
                InfoNode::Composite {
                    exact: ea,
                    range: ra,
                },
                InfoNode::Composite {
                    exact: eb,
                    range: rb,
                },
            ) => {
                let agent = self.cells.distance(ea[0], eb[0]);
                let y0 = self.observations.distance(ea[1], eb[1]);
                Some(agent.max(y0).max(hausdorff(ra, rb, &self.cells).ok()?))
            }
            _ => None,
        }
    }

    fn render(&self, node: &InfoNode<S>, spec: &SystemSpec<S>) -> String {
        match node {
            InfoNode::Composite { exact, range } => {
                let cells: Vec<&str> = range.iter().map(|&c| self.cells.label(c)).collect();
                format!(
                    "ag={} y0={} {{{}}}",
                    self.cells.label(exact[0]),
                    self.observations.label(exact[1]),
                    cells.join(" ")
                )
            }
            other => crate::info::render_node(other, spec),
        }
    }
}
