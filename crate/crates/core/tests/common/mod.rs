//! Checks shared by the integration tests and the acceptance report.

#![allow(dead_code)]

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use minimax_core::distribution::{
    accrued_distribution, condition, indicator, lemma2_gap, max_functional, pushforward,
    CostDistribution, Distribution, JointCostDistribution,
};
use minimax_core::dp::{
    check_theorem_bounds, compute_alpha_bounds, solve_approx_dp, solve_infostate_dp,
    solve_memory_terminal_dp, solve_specialized_dp, NodeTable, ValueTable,
};
use minimax_core::fixtures::{desk1, desk1_action_costs, random_small_spec, Variant};
use minimax_core::gridworld::{prepare_benchmark, BenchResult, BenchSetup, GridConfig, GridMetric};
use minimax_core::info::{
    conditional_range_info, info_state_map, joint_range_info, normalized_accrued_info,
    perfect_observation_info, ConditionalRange, InfoStateMap, Quantizer, RandomLabels,
};
use minimax_core::sets::{hausdorff, FiniteMetricSpace, Norm, PointId};
use minimax_core::system::oracle::optimal_worst_case;
use minimax_core::system::{
    conditional_accrued, enumerate_memories, joint_range, transition_accrued, Memory, MemoryCtx,
    SystemSpec,
};
use minimax_core::{Float, Rational, Scalar};

pub type Q = Rational;

/// Result of one acceptance check.
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

pub fn q(n: i64) -> Q {
    Q::from_int(n)
}

/// The desk system followed by 60 random systems.
pub fn family() -> Vec<(String, SystemSpec<Q>)> {
    let mut out = vec![("desk1".to_string(), desk1::<Q>())];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..60 {
        out.push((
            format!("random-{i}"),
            random_small_spec(&mut rng, Variant::Generic).unwrap(),
        ));
    }
    out
}

pub fn variant_family(variant: Variant, count: usize, seed: u64) -> Vec<(String, SystemSpec<Q>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            (
                format!("{variant:?}-{i}"),
                random_small_spec(&mut rng, variant).unwrap(),
            )
        })
        .collect()
}

/// Node of a memory, found by replaying it.
pub fn node_of<S: Scalar>(spec: &SystemSpec<S>, ism: &InfoStateMap<S>, m: &Memory) -> u32 {
    let belief = joint_range(spec, m).unwrap();
    let ctx = MemoryCtx {
        stage: m.stage(),
        observations: &m.observations,
        actions: &m.actions,
        belief: &belief,
    };
    ism.sigma(&ctx).expect("every feasible memory has a node")
}

/// Memories at which the node table's Q or V differs from the memory table's.
pub fn pullback_mismatches(
    spec: &SystemSpec<Q>,
    ism: &InfoStateMap<Q>,
    nodes: &NodeTable<Q>,
    memories: &ValueTable<Memory, Q>,
) -> Vec<String> {
    let mut bad = Vec::new();
    for t in 0..=spec.horizon() {
        for m in &memories.stage(t).keys {
            let id = node_of(spec, ism, m);
            let row = memories.q_row(t, m).unwrap();
            let node_row: Vec<Q> = spec.actions.ids().map(|u| nodes.node_q(t, id, u)).collect();
            if row != node_row.as_slice() || memories.v(t, m).unwrap() != nodes.node_value(t, id) {
                bad.push(format!("t={t} [{}]", m.render(spec)));
            }
        }
    }
    bad
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed <= limit
}

fn first_failure(failures: &[String]) -> String {
    failures
        .first()
        .map(|f| format!(", first: {f}"))
        .unwrap_or_default()
}

/// Oracle optimality of the memory-terminal program.
pub fn criterion1() -> Outcome {
    let started = Instant::now();
    let mut failures = Vec::new();
    let specs = family();
    for (name, spec) in &specs {
        let tm = solve_memory_terminal_dp(spec);
        for (y0, best) in optimal_worst_case(spec) {
            let v = tm.v(0, &Memory::initial(y0)).unwrap();
            if v != best {
                failures.push(format!(
                    "{name} y0={}: dp {v} oracle {best}",
                    spec.observations.label(y0)
                ));
            }
        }
    }
    let elapsed = started.elapsed();
    let pass = failures.is_empty() && within(elapsed, Duration::from_secs(120));
    Outcome::new(
        pass,
        format!(
            "{} systems, {} mismatches, {:.1}s{}",
            specs.len(),
            failures.len(),
            elapsed.as_secs_f64(),
            first_failure(&failures)
        ),
    )
}

/// `Q^tm(m, u) = Q(m, u) + max accrued` on every feasible memory.
pub fn criterion2() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for (name, spec) in family() {
        let tm = solve_memory_terminal_dp(&spec);
        let sp = solve_specialized_dp(&spec);
        for t in 0..=spec.horizon() {
            if tm.stage(t).keys != sp.stage(t).keys {
                failures.push(format!("{name}: memory sets differ at t={t}"));
                continue;
            }
            for m in &sp.stage(t).keys {
                let top = joint_range(&spec, m).unwrap().top();
                for u in spec.actions.ids() {
                    checked += 1;
                    if tm.q(t, m, u).unwrap() != sp.q(t, m, u).unwrap() + top {
                        failures.push(format!("{name} t={t} [{}] u={u}", m.render(&spec)));
                    }
                }
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{checked} (t,m,u) triples, {} mismatches{}",
            failures.len(),
            first_failure(&failures)
        ),
    )
}

/// `r_t(. | m)` is the indicator of `[[X_t | m]]` on every feasible memory.
pub fn indicator_mismatches(spec: &SystemSpec<Q>) -> usize {
    (0..=spec.horizon())
        .flat_map(|t| enumerate_memories(spec, t))
        .filter(|m| {
            let r = conditional_accrued(spec, m).unwrap();
            let range = joint_range(spec, m).unwrap();
            !(r.is_indicator() && r.keys().copied().collect::<Vec<_>>() == range.support())
        })
        .count()
}

/// Exact information states pull back to the specialized program.
pub fn criterion3() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    let mut run = |label: &str,
                   specs: &[(String, SystemSpec<Q>)],
                   build: &dyn Fn(&SystemSpec<Q>) -> InfoStateMap<Q>| {
        let mut bad = 0;
        for (name, spec) in specs {
            let ism = build(spec);
            let sp = solve_specialized_dp(spec);
            match solve_infostate_dp(spec, &ism) {
                Ok(table) => {
                    let mismatches = pullback_mismatches(spec, &ism, &table, &sp);
                    if !mismatches.is_empty() {
                        bad += 1;
                        eprintln!("{label} {name}: {:?}", mismatches[0]);
                    }
                }
                Err(e) => {
                    bad += 1;
                    eprintln!("{label} {name}: {e}");
                }
            }
        }
        pass &= bad == 0;
        lines.push(format!("{label} {}/{}", specs.len() - bad, specs.len()));
    };
    run("case1", &family(), &|s| normalized_accrued_info(s));
    run(
        "case2",
        &variant_family(Variant::PerfectlyObserved, 30, 21),
        &|s| perfect_observation_info(s).unwrap(),
    );
    let mut action = variant_family(Variant::ActionCosts, 30, 31);
    action.push(("desk1-action".into(), desk1_action_costs::<Q>()));
    run("case3", &action, &|s| conditional_range_info(s).unwrap());
    let indicator_bad: usize = action.iter().map(|(_, s)| indicator_mismatches(s)).sum();
    pass &= indicator_bad == 0;
    lines.push(format!("indicator mismatches {indicator_bad}"));
    Outcome::new(pass, lines.join(", "))
}

fn all_distributions(n: usize, values: &[Option<Q>]) -> Vec<CostDistribution<Q>> {
    let k = values.len();
    let mut out = Vec::new();
    for code in 0..k.pow(n as u32) {
        let mut rest = code;
        let mut entries = Vec::new();
        for x in 0..n {
            if let Some(v) = values[rest % k] {
                entries.push((PointId(x as u32), v));
            }
            rest /= k;
        }
        if let Ok(d) = Distribution::new(entries) {
            out.push(d);
        }
    }
    out
}

/// Pushforward and change of variables on every distribution over up to
/// five points, every map into up to four points, and the indicator form
/// of the change of variables on every relation of a 3x2 product.
pub fn criterion4() -> Outcome {
    let values = [None, Some(q(0)), Some(q(-1)), Some(Q::from_ratio(-5, 2))];
    let mut cases = 0usize;
    let mut failures = 0usize;
    for n in 1..=5usize {
        let dists = all_distributions(n, &values);
        for m in 1..=4usize {
            for fcode in 0..m.pow(n as u32) {
                let f: Vec<u32> = (0..n)
                    .map(|x| ((fcode / m.pow(x as u32)) % m) as u32)
                    .collect();
                let g = |y: u32| q(((y as i64 * 7 + fcode as i64) % 5) - 2);
                for d in &dists {
                    cases += 1;
                    let push = pushforward(d, |x| PointId(f[x.index()]));
                    for y in 0..m as u32 {
                        let fibre = d
                            .support()
                            .iter()
                            .filter(|(x, _)| f[x.index()] == y)
                            .map(|e| e.1)
                            .max();
                        if push.value(&PointId(y)) != fibre {
                            failures += 1;
                        }
                    }
                    let brute = d
                        .support()
                        .iter()
                        .map(|(x, v)| g(f[x.index()]) + *v)
                        .max()
                        .unwrap();
                    let lhs = max_functional(d, |x| g(f[x.index()]));
                    let rhs = max_functional(&push, |y| g(y.0));
                    if lhs != brute || rhs != brute {
                        failures += 1;
                    }
                }
            }
        }
    }
    for rel in 1u32..(1 << 6) {
        let pairs: Vec<(PointId, PointId)> = (0..6)
            .filter(|b| rel & (1 << b) != 0)
            .map(|b| (PointId(b / 2), PointId(b % 2)))
            .collect();
        let joint: JointCostDistribution<Q> =
            Distribution::indicator(pairs.iter().copied()).unwrap();
        for y in 0..2u32 {
            let range: Vec<u32> = pairs
                .iter()
                .filter(|p| p.1 == PointId(y))
                .map(|p| p.0 .0)
                .collect();
            let Ok(cond) = condition(&joint, PointId(y)) else {
                failures += usize::from(!range.is_empty());
                continue;
            };
            for gcode in 0..27 {
                cases += 1;
                let g = |x: u32| q((gcode / 3i64.pow(x)) % 3);
                let expected = range.iter().map(|&x| g(x)).max().unwrap();
                if !cond.is_indicator() || max_functional(&cond, |x| g(x.0)) != expected {
                    failures += 1;
                }
            }
        }
    }
    Outcome::new(
        failures == 0 && cases > 0,
        format!("{cases} cases, {failures} failures"),
    )
}

fn random_space(rng: &mut ChaCha8Rng) -> FiniteMetricSpace<Q> {
    let n = rng.gen_range(1..=6);
    let norm = if rng.gen_bool(0.5) {
        Norm::Manhattan
    } else {
        Norm::Chebyshev
    };
    let mut coords: Vec<Vec<Q>> = Vec::new();
    while coords.len() < n {
        let c = vec![q(rng.gen_range(-4..=4)), q(rng.gen_range(-4..=4))];
        if !coords.contains(&c) {
            coords.push(c);
        }
    }
    FiniteMetricSpace::from_coordinates((0..n).map(|i| format!("p{i}")).collect(), coords, norm)
        .unwrap()
}

fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> CostDistribution<Q> {
    let mut entries: Vec<(PointId, Q)> = Vec::new();
    for x in 0..n {
        if rng.gen_bool(0.6) {
            entries.push((PointId(x as u32), Q::from_ratio(-rng.gen_range(0..=8), 2)));
        }
    }
    if entries.is_empty() {
        return Distribution::indicator([PointId(rng.gen_range(0..n) as u32)]).unwrap();
    }
    Distribution::normalized(entries).unwrap()
}

/// The Lipschitz perturbation bound on 2000 random triples.
pub fn criterion5() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    let cases = 2000;
    for _ in 0..cases {
        let space = random_space(&mut rng);
        let n = space.len();
        let g: Vec<Q> = (0..n)
            .map(|_| Q::from_ratio(rng.gen_range(-10..=10), 2))
            .collect();
        let r = random_distribution(&mut rng, n);
        let p = random_distribution(&mut rng, n);
        let (lhs, bound) = lemma2_gap(|x| g[x.index()], &r, &p, &space);
        if lhs > bound {
            violations += 1;
        }
    }
    let elapsed = started.elapsed();
    Outcome::new(
        violations == 0 && within(elapsed, Duration::from_secs(30)),
        format!(
            "{cases} triples, {violations} violations, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

/// Bound sweep of one lossy compressor on one system.
pub fn lossy_sweep(spec: &SystemSpec<Q>, ism: &InfoStateMap<Q>) -> Result<bool, String> {
    let table = solve_approx_dp(spec, ism);
    let bounds = compute_alpha_bounds(spec, ism, &table).map_err(|e| e.to_string())?;
    let sweep =
        check_theorem_bounds(spec, ism, &table, &bounds.alphas).map_err(|e| e.to_string())?;
    Ok(sweep.holds())
}

/// The reduced grid benchmark, computed once per process.
pub fn reduced_bench() -> &'static (BenchSetup<Float>, BenchResult<Float>, Duration) {
    static BENCH: OnceLock<(BenchSetup<Float>, BenchResult<Float>, Duration)> = OnceLock::new();
    BENCH.get_or_init(|| {
        let started = Instant::now();
        let cfg = GridConfig::reduced();
        let setup =
            prepare_benchmark::<Float>(&cfg, 10_000_000).expect("reduced grid fits the budget");
        let result = setup.evaluate(&cfg).expect("reduced benchmark runs");
        (setup, result, started.elapsed())
    })
}

/// Value and realized-cost bounds for lossy compressors.
pub fn criterion6() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut random_ok = 0;
    let mut random_total = 0;
    let mut skipped_exact = 0;
    let mut first_error = None;
    let mut seed = 0;
    while random_total < 24 {
        let spec = random_small_spec(&mut rng, Variant::Generic).unwrap();
        seed += 1;
        let ism = match seed % 3 {
            0 => info_state_map(&spec, ConditionalRange::lossy(&spec)),
            k => info_state_map(&spec, RandomLabels::new(&spec, seed, k as u32).unwrap()),
        };
        if minimax_core::info::validate_info_state(&spec, &ism).passed() {
            skipped_exact += 1;
            continue;
        }
        random_total += 1;
        match lossy_sweep(&spec, &ism) {
            Ok(true) => random_ok += 1,
            Ok(false) => {}
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let (_, bench, bench_time) = reduced_bench();
    let grid_ok = bench.sweep.holds() && bench.lambda_within_bound();
    let elapsed = started.elapsed().max(*bench_time);
    let pass = random_ok == random_total && grid_ok && within(elapsed, Duration::from_secs(600));
    Outcome::new(
        pass,
        format!(
            "lossy random {random_ok}/{random_total} ({skipped_exact} exact draws skipped), grid sweep {} alpha0={} |L0-V0|={}, {:.1}s{}",
            if grid_ok { "holds" } else { "fails" },
            bench.alpha0.render(),
            (bench.lambda0 - bench.v0).abs().render(),
            elapsed.as_secs_f64(),
            first_error.map(|e| format!(" error: {e}")).unwrap_or_default()
        ),
    )
}

/// Node counts, wall-clock, rollout determinism and realized costs on the
/// reduced grid.
pub fn criterion7() -> Outcome {
    let (setup, bench, _) = reduced_bench();
    let cfg = GridConfig::reduced();
    let faster = bench.runtime_approx_s <= bench.runtime_exact_s;
    let fewer = bench
        .approx_node_counts
        .iter()
        .zip(&bench.exact_node_counts)
        .all(|(a, e)| a <= e);
    let mass: usize = bench.histogram.iter().map(|e| e.1).sum();
    let again = minimax_core::gridworld::cost_histogram(
        &setup.paired_rollouts(cfg.simulations, cfg.seed).unwrap(),
    );
    let deterministic = again == bench.histogram;
    let pass = faster
        && fewer
        && mass == cfg.simulations
        && deterministic
        && bench.rollout_violations == 0;
    Outcome::new(
        pass,
        format!(
            "approx {:.2}s vs exact {:.2}s, nodes {:?} vs {:?}, {} rollouts, deterministic {deterministic}, over-value rollouts {}",
            bench.runtime_approx_s,
            bench.runtime_exact_s,
            bench.approx_node_counts,
            bench.exact_node_counts,
            mass,
            bench.rollout_violations
        ),
    )
}

/// Case-1 nodes never outnumber joint-range nodes.
pub fn criterion8() -> Outcome {
    let desk = desk1::<Q>();
    let d1 = normalized_accrued_info(&desk).node_counts();
    let dj = joint_range_info(&desk).node_counts();
    let grid = minimax_core::gridworld::build_gridworld::<Float>(&GridConfig::reduced()).unwrap();
    let g1 = normalized_accrued_info(&grid).node_counts();
    let gj = joint_range_info(&grid).node_counts();
    let le = |a: &[usize], b: &[usize]| a.iter().zip(b).all(|(x, y)| x <= y);
    Outcome::new(
        le(&d1, &dj) && le(&g1, &gj),
        format!("desk {d1:?} <= {dj:?}, grid {g1:?} <= {gj:?}"),
    )
}

pub fn is_normalized<K: Ord + Clone, S: Scalar>(d: &Distribution<K, S>) -> bool {
    !d.is_empty() && d.support().iter().map(|e| e.1).max() == Some(S::zero())
}

/// Hausdorff axioms on all subsets of a 5-point space, normalization on every
/// construction path, and the covering radius of the 9x9 quantizer.
pub fn criterion9() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let mut hausdorff_failures = 0;
    for space in [
        FiniteMetricSpace::<Q>::integer_line(&[0, 1, 3, 6, 10]).unwrap(),
        FiniteMetricSpace::<Q>::from_coordinates(
            (0..5).map(|i| format!("p{i}")).collect(),
            [[0, 0], [1, 2], [3, 1], [0, 4], [2, 2]]
                .iter()
                .map(|c| vec![q(c[0]), q(c[1])])
                .collect(),
            Norm::Manhattan,
        )
        .unwrap(),
    ] {
        let subsets: Vec<Vec<PointId>> = (1u32..32)
            .map(|s| (0..5).filter(|b| s & (1 << b) != 0).map(PointId).collect())
            .collect();
        let d = |a: &Vec<PointId>, b: &Vec<PointId>| hausdorff(a, b, &space).unwrap();
        for a in &subsets {
            for b in &subsets {
                let dab = d(a, b);
                if (a == b) != dab.is_zero() || dab != d(b, a) {
                    hausdorff_failures += 1;
                }
                for c in &subsets {
                    if d(a, c) > dab + d(b, c) {
                        hausdorff_failures += 1;
                    }
                }
            }
        }
    }
    pass &= hausdorff_failures == 0;
    notes.push(format!("hausdorff failures {hausdorff_failures}"));

    let mut unnormalized = 0;
    let mut constructed = 0;
    let mut tally = |ok: bool| {
        constructed += 1;
        if !ok {
            unnormalized += 1;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let n = rng.gen_range(1..=5);
        let space =
            FiniteMetricSpace::<Q>::integer_line(&(0..n as i64).collect::<Vec<_>>()).unwrap();
        let raw: Vec<(PointId, Q)> = (0..rng.gen_range(1..8))
            .map(|_| (PointId(rng.gen_range(0..n) as u32), q(rng.gen_range(-3..6))))
            .collect();
        let d = Distribution::normalized(raw.clone()).unwrap();
        tally(is_normalized(&d));
        let pairs: Vec<(PointId, Q)> = raw.iter().map(|(x, a)| (*x, a.abs())).collect();
        tally(is_normalized(&accrued_distribution(&pairs).unwrap()));
        let keys: Vec<PointId> = raw.iter().map(|e| e.0).collect();
        tally(is_normalized(&indicator(&keys, &space).unwrap()));
        tally(is_normalized(&pushforward(&d, |x| PointId(x.0 % 2))));
        let joint: JointCostDistribution<Q> =
            Distribution::normalized(raw.iter().map(|(x, a)| ((*x, PointId(x.0 % 2)), *a)))
                .unwrap();
        tally(is_normalized(&joint));
        for y in 0..2 {
            if let Ok(c) = condition(&joint, PointId(y)) {
                tally(is_normalized(&c));
            }
        }
    }
    let mut specs = family();
    specs.truncate(21);
    for (_, spec) in &specs {
        for t in 0..=spec.horizon() {
            for m in enumerate_memories(spec, t) {
                tally(is_normalized(&conditional_accrued(spec, &m).unwrap()));
                tally(is_normalized(&joint_range(spec, &m).unwrap().accrued()));
                if t < spec.horizon() {
                    for u in spec.actions.ids() {
                        tally(is_normalized(&transition_accrued(spec, &m, u).unwrap()));
                    }
                }
            }
        }
        let ism = normalized_accrued_info(spec);
        for t in 0..=spec.horizon() {
            for id in 0..ism.node_count(t) as u32 {
                tally(is_normalized(&ism.accrued(t, id)));
                if t < spec.horizon() {
                    for u in spec.actions.ids() {
                        tally(is_normalized(&ism.transition(t, id, u)));
                    }
                }
            }
        }
    }
    pass &= unnormalized == 0;
    notes.push(format!(
        "{constructed} distributions, {unnormalized} unnormalized"
    ));

    let cfg = GridConfig::default();
    let mut radii = Vec::new();
    for metric in [
        GridMetric::Euclidean,
        GridMetric::Manhattan,
        GridMetric::Chebyshev,
    ] {
        let cfg = GridConfig {
            metric,
            horizon: 0,
            ..cfg.clone()
        };
        let grid = minimax_core::gridworld::build_grid::<Float>(&cfg).unwrap();
        let center = grid
            .cell(cfg.initial_observation.0, cfg.initial_observation.1)
            .unwrap();
        match Quantizer::checkerboard(center, &grid.cells, cfg.fine_radius) {
            Ok(qz) => {
                let r = qz.covering_radius(&grid.cells);
                pass &= r <= Float::one();
                radii.push(format!("{metric:?} {}", r.render()));
            }
            Err(e) => {
                pass = false;
                radii.push(format!("{metric:?} error {e}"));
            }
        }
    }
    notes.push(format!("9x9 covering radius {}", radii.join(" ")));
    Outcome::new(pass, notes.join(", "))
}

/// Zero-cost systems have zero value everywhere.
pub fn zero_cost(spec: &SystemSpec<Q>) -> SystemSpec<Q> {
    spec.with_costs(|_, _, _| Q::from_int(0)).unwrap()
}

pub fn float_of(spec: &SystemSpec<Q>) -> SystemSpec<Float> {
    let file = minimax_core::system::problem::ProblemFile::from_spec(spec);
    file.build().unwrap()
}
