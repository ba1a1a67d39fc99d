//! The grid pursuit benchmark.
//!
//! An agent moves on a grid of cells (minus obstacles) and tries to end the
//! horizon close to a target that drifts by one of five displacements per
//! stage. The agent sees itself exactly and the target through one of five
//! noise displacements. Moves that would leave the grid or enter an obstacle
//! leave the mover in place. Diagonal agent moves cost `diagonal_cost`; the
//! terminal cost is the distance between agent and target.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dp::{
    check_theorem_bounds, compute_alpha_bounds, solve_approx_dp, solve_infostate_dp, BoundReport,
    CompressedStrategy, NodeTable, SweepReport,
};
use crate::error::{Error, Result};
use crate::info::{conditional_range_info, quantized_range_info, InfoStateMap, Quantizer};
use crate::scalar::Scalar;
use crate::sets::{product_space, FiniteMetricSpace, Norm, PointId};
use crate::system::{count_memories, simulate, Spaces, SystemSpec};

/// Wait-type displacements, shared by target moves, observation noise and
/// the agent's straight moves.
pub const STRAIGHT: [(i64, i64); 5] = [(-1, 0), (1, 0), (0, 0), (0, 1), (0, -1)];
/// Diagonal agent moves.
pub const DIAGONAL: [(i64, i64); 4] = [(-1, 1), (1, 1), (1, -1), (-1, -1)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridMetric {
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl From<GridMetric> for Norm {
    fn from(m: GridMetric) -> Norm {
        match m {
            GridMetric::Euclidean => Norm::Euclidean,
            GridMetric::Manhattan => Norm::Manhattan,
            GridMetric::Chebyshev => Norm::Chebyshev,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantizerKind {
    /// Fine block around the initial observation plus a checkerboard elsewhere.
    Checkerboard,
    /// Every cell is a quantization cell.
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Label for the bench row.
    pub case: String,
    /// Cells run from `-half_width` to `half_width` on both axes.
    pub half_width: i64,
    pub obstacles: Vec<(i64, i64)>,
    pub horizon: usize,
    pub agent_start: (i64, i64),
    /// Initial noisy target observation.
    pub initial_observation: (i64, i64),
    pub diagonal_cost: String,
    pub metric: GridMetric,
    pub quantizer: QuantizerKind,
    pub fine_radius: i64,
    pub simulations: usize,
    pub seed: u64,
}

impl Default for GridConfig {
    /// The 9x9 grid with a declared obstacle layout and horizon 6.
    fn default() -> Self {
        GridConfig {
            case: "full".into(),
            half_width: 4,
            obstacles: vec![(2, 2), (2, 3), (-2, 1), (-3, 1)],
            horizon: 6,
            agent_start: (1, 1),
            initial_observation: (-1, -3),
            diagonal_cost: "1/2".into(),
            metric: GridMetric::Euclidean,
            quantizer: QuantizerKind::Checkerboard,
            fine_radius: 2,
            simulations: 5000,
            seed: 0,
        }
    }
}

impl GridConfig {
    /// 5x5 grid, no obstacles, horizon 3.
    pub fn reduced() -> Self {
        GridConfig {
            case: "reduced".into(),
            half_width: 2,
            obstacles: Vec::new(),
            horizon: 3,
            initial_observation: (-1, -1),
            ..GridConfig::default()
        }
    }
}

/// A built grid system plus the handles needed to read its points.
#[derive(Debug)]
pub struct Grid<S> {
    pub spec: SystemSpec<S>,
    pub cells: Arc<FiniteMetricSpace<S>>,
    cell_index: HashMap<(i64, i64), PointId>,
    /// Initial observation as an observation point.
    pub initial_observation: PointId,
}

impl<S: Scalar> Grid<S> {
    pub fn cell(&self, x: i64, y: i64) -> Option<PointId> {
        self.cell_index.get(&(x, y)).copied()
    }

    pub fn state(&self, agent: PointId, target: PointId) -> PointId {
        self.spec.states.join(&[agent, target])
    }
}

fn cell_label(c: (i64, i64)) -> String {
    format!("({},{})", c.0, c.1)
}

fn displacement_space<S: Scalar>(moves: &[(i64, i64)]) -> Result<FiniteMetricSpace<S>> {
    FiniteMetricSpace::discrete(moves.iter().map(|&m| cell_label(m)).collect())
}

/// Builds the pursuit system. States and observations are (agent, target)
/// cell pairs. The initial observation map is pinned so that every initial
/// state reports exactly `(agent_start, initial_observation)`.
pub fn build_gridworld<S: Scalar>(cfg: &GridConfig) -> Result<SystemSpec<S>> {
    Ok(build_grid(cfg)?.spec)
}

/// [`build_gridworld`] keeping the cell lookup.
pub fn build_grid<S: Scalar>(cfg: &GridConfig) -> Result<Grid<S>> {
    let h = cfg.half_width;
    if h < 0 {
        return Err(Error::Config("half_width must be nonnegative".into()));
    }
    let inside = |c: (i64, i64)| c.0.abs() <= h && c.1.abs() <= h;
    for &o in &cfg.obstacles {
        if !inside(o) {
            return Err(Error::Config(format!(
                "obstacle {} lies outside the grid",
                cell_label(o)
            )));
        }
    }
    for (what, c) in [
        ("agent_start", cfg.agent_start),
        ("initial_observation", cfg.initial_observation),
    ] {
        if !inside(c) || cfg.obstacles.contains(&c) {
            return Err(Error::Config(format!(
                "{what} {} is not a free cell",
                cell_label(c)
            )));
        }
    }
    if cfg.fine_radius < 0 {
        return Err(Error::Config("fine_radius must be nonnegative".into()));
    }
    let diagonal_cost = S::parse(&cfg.diagonal_cost)?;
    if diagonal_cost < S::zero() {
        return Err(Error::Config("diagonal_cost must be nonnegative".into()));
    }

    let mut coords = Vec::new();
    for x in -h..=h {
        for y in -h..=h {
            if !cfg.obstacles.contains(&(x, y)) {
                coords.push((x, y));
            }
        }
    }
    let cells = Arc::new(FiniteMetricSpace::from_coordinates(
        coords.iter().map(|&c| cell_label(c)).collect(),
        coords
            .iter()
            .map(|&(x, y)| vec![S::from_int(x), S::from_int(y)])
            .collect(),
        cfg.metric.into(),
    )?);
    let cell_index: HashMap<(i64, i64), PointId> = coords
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, PointId::from_index(i)))
        .collect();
    let pairs = Arc::new(product_space(&[cells.clone(), cells.clone()])?);
    let moves: Vec<(i64, i64)> = STRAIGHT.iter().chain(&DIAGONAL).copied().collect();
    let spaces = Spaces {
        states: pairs.clone(),
        actions: Arc::new(displacement_space(&moves)?),
        observations: pairs.clone(),
        disturbances: Arc::new(displacement_space(&STRAIGHT)?),
        noises: Arc::new(displacement_space(&STRAIGHT)?),
    };

    let step = |c: PointId, d: (i64, i64)| {
        let (x, y) = coords[c.index()];
        cell_index.get(&(x + d.0, y + d.1)).copied().unwrap_or(c)
    };
    let agent0 = cell_index[&cfg.agent_start];
    let y0 = cell_index[&cfg.initial_observation];
    let mut initial: Vec<PointId> = cells
        .ids()
        .filter(|&ta| STRAIGHT.iter().any(|&n| step(ta, n) == y0))
        .map(|ta| pairs.join(&[agent0, ta]))
        .collect();
    initial.sort();
    let observed0 = pairs.join(&[agent0, y0]);

    let spec = SystemSpec::from_fn(
        cfg.horizon,
        spaces,
        &initial,
        |_, x, u, w| {
            let (ag, ta) = (pairs.component(x, 0), pairs.component(x, 1));
            pairs.join(&[step(ag, moves[u.index()]), step(ta, STRAIGHT[w.index()])])
        },
        |t, x, n| {
            if t == 0 && initial.binary_search(&x).is_ok() {
                return observed0;
            }
            let (ag, ta) = (pairs.component(x, 0), pairs.component(x, 1));
            pairs.join(&[ag, step(ta, STRAIGHT[n.index()])])
        },
        |t, x, u| {
            if t == cfg.horizon {
                cells.distance(pairs.component(x, 0), pairs.component(x, 1))
            } else if u.index() >= STRAIGHT.len() {
                diagonal_cost
            } else {
                S::zero()
            }
        },
    )?;
    Ok(Grid {
        spec,
        cells,
        cell_index,
        initial_observation: observed0,
    })
}

/// The quantizer a config asks for.
pub fn grid_quantizer<S: Scalar>(cfg: &GridConfig, grid: &Grid<S>) -> Result<Quantizer> {
    match cfg.quantizer {
        QuantizerKind::Identity => Ok(Quantizer::identity(&grid.cells)),
        QuantizerKind::Checkerboard => {
            let center = grid
                .cell(cfg.initial_observation.0, cfg.initial_observation.1)
                .expect("validated");
            Quantizer::checkerboard(center, &grid.cells, cfg.fine_radius)
        }
    }
}

/// Outcome of one benchmark run.
#[derive(Clone, Debug, Serialize)]
pub struct BenchResult<S> {
    pub case: String,
    pub agent_start: String,
    pub initial_observation: String,
    /// Optimal value from the exact information-state program.
    pub v0: S,
    /// Value of the approximate program.
    pub v_hat0: S,
    /// Worst-case cost of the approximate strategy.
    pub lambda0: S,
    pub alpha0: S,
    pub runtime_exact_s: f64,
    pub runtime_approx_s: f64,
    pub memory_counts: Vec<usize>,
    pub exact_node_counts: Vec<usize>,
    pub approx_node_counts: Vec<usize>,
    pub bounds: BoundReport<S>,
    pub sweep: SweepReport<S>,
    /// `(approximate cost - optimal cost, frequency)` over paired rollouts.
    pub histogram: Vec<(S, usize)>,
    pub simulations: usize,
    /// Rollouts whose realized cost exceeded their strategy's value.
    pub rollout_violations: usize,
}

impl<S: Scalar> BenchResult<S> {
    /// `|Lambda_0 - V_0| <= 2 alpha_0`.
    pub fn lambda_within_bound(&self) -> bool {
        (self.lambda0 - self.v0)
            .abs()
            .le_tol(S::from_int(2) * self.alpha0)
    }

    /// Every asserted invariant of the run.
    pub fn passed(&self) -> bool {
        self.lambda_within_bound() && self.sweep.holds() && self.rollout_violations == 0
    }
}

/// Uniform draws of the initial state and of every disturbance and noise
/// for rollout `k`, from a stream of the seed dedicated to `k`.
pub fn rollout_inputs<S: Scalar>(
    spec: &SystemSpec<S>,
    seed: u64,
    k: u64,
) -> (PointId, Vec<PointId>, Vec<PointId>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    let x0 = spec.initial()[rng.gen_range(0..spec.initial().len())];
    let ws = (0..spec.horizon())
        .map(|_| PointId::from_index(rng.gen_range(0..spec.disturbances.len())))
        .collect();
    let ns = (0..=spec.horizon())
        .map(|_| PointId::from_index(rng.gen_range(0..spec.noises.len())))
        .collect();
    (x0, ws, ns)
}

/// The two solved programs of a benchmark run, before bounds and rollouts.
pub struct BenchSetup<S> {
    pub grid: Grid<S>,
    pub memory_counts: Vec<usize>,
    /// Exact conditional-range information state and its program.
    pub exact: InfoStateMap<S>,
    pub exact_table: NodeTable<S>,
    /// Quantized approximate information state and its program.
    pub approx: InfoStateMap<S>,
    pub approx_table: NodeTable<S>,
    pub runtime_exact_s: f64,
    pub runtime_approx_s: f64,
}

/// Builds the grid, checks the memory budget and solves both programs,
/// timing each path from compressor construction to the solved table.
pub fn prepare_benchmark<S: Scalar>(cfg: &GridConfig, budget: usize) -> Result<BenchSetup<S>> {
    let grid = build_grid::<S>(cfg)?;
    let spec = &grid.spec;
    let memory_counts = count_memories(spec, budget)?;
    let quantizer = grid_quantizer(cfg, &grid)?;

    let started = Instant::now();
    let exact = conditional_range_info(spec)?;
    let exact_table = solve_infostate_dp(spec, &exact)?;
    let runtime_exact_s = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let approx = quantized_range_info(spec, quantizer)?;
    let approx_table = solve_approx_dp(spec, &approx);
    let runtime_approx_s = started.elapsed().as_secs_f64();

    Ok(BenchSetup {
        grid,
        memory_counts,
        exact,
        exact_table,
        approx,
        approx_table,
        runtime_exact_s,
        runtime_approx_s,
    })
}

impl<S: Scalar> BenchSetup<S> {
    /// Total costs `(optimal, approximate)` of paired rollouts sharing
    /// their seeded draws.
    pub fn paired_rollouts(&self, simulations: usize, seed: u64) -> Result<Vec<(S, S)>> {
        let spec = &self.grid.spec;
        let optimal = CompressedStrategy::new(&self.exact, &self.exact_table);
        let approximate = CompressedStrategy::new(&self.approx, &self.approx_table);
        (0..simulations as u64)
            .into_par_iter()
            .map(|k| {
                let (x0, ws, ns) = rollout_inputs(spec, seed, k);
                let a = simulate(spec, &optimal, x0, &ws, &ns)?.total_cost();
                let b = simulate(spec, &approximate, x0, &ws, &ns)?.total_cost();
                Ok((a, b))
            })
            .collect()
    }

    /// Bounds, the memory sweep and the rollouts of `cfg`.
    pub fn evaluate(&self, cfg: &GridConfig) -> Result<BenchResult<S>> {
        let spec = &self.grid.spec;
        let bounds = compute_alpha_bounds(spec, &self.approx, &self.approx_table)?;
        let sweep = check_theorem_bounds(spec, &self.approx, &self.approx_table, &bounds.alphas)?;
        let root = sweep
            .roots
            .iter()
            .find(|r| r.observation == self.grid.initial_observation)
            .expect("the pinned initial observation is the only root")
            .clone();
        let v0 = self.exact_table.node_value(0, 0);

        let outcomes = self.paired_rollouts(cfg.simulations, cfg.seed)?;
        let histogram = cost_histogram(&outcomes);
        let rollout_violations = outcomes
            .iter()
            .filter(|&&(a, b)| !a.le_tol(v0) || !b.le_tol(root.realized))
            .count();

        Ok(BenchResult {
            case: cfg.case.clone(),
            agent_start: cell_label(cfg.agent_start),
            initial_observation: cell_label(cfg.initial_observation),
            v0,
            v_hat0: root.approximate,
            lambda0: root.realized,
            alpha0: bounds.alphas[0],
            runtime_exact_s: self.runtime_exact_s,
            runtime_approx_s: self.runtime_approx_s,
            memory_counts: self.memory_counts.clone(),
            exact_node_counts: self.exact.node_counts(),
            approx_node_counts: self.approx.node_counts(),
            bounds,
            sweep,
            histogram,
            simulations: cfg.simulations,
            rollout_violations,
        })
    }
}

/// Frequencies of `approximate - optimal` over paired outcomes.
pub fn cost_histogram<S: Scalar>(outcomes: &[(S, S)]) -> Vec<(S, usize)> {
    let mut histogram: BTreeMap<S, usize> = BTreeMap::new();
    for &(a, b) in outcomes {
        *histogram.entry(b - a).or_default() += 1;
    }
    histogram.into_iter().collect()
}

/// Solves the exact and the quantized programs, bounds their gap, checks the
/// bounds on every memory and runs paired rollouts. Refuses systems with
/// more than `budget` feasible memories.
pub fn run_benchmark<S: Scalar>(cfg: &GridConfig, budget: usize) -> Result<BenchResult<S>> {
    prepare_benchmark::<S>(cfg, budget)?.evaluate(cfg)
}
