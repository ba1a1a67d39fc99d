//! `minimax`: solve, bound and benchmark finite worst-case control problems
//! described by JSON problem files.
//!
//! Every run writes `manifest.json` to the output directory before any
//! solving starts. Exit codes: 0 when every checked invariant holds, 1 when
//! a bound sweep or benchmark invariant fails, 2 on errors and bad usage.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use minimax_core::dp::{
    bounds_with_epsilons, check_theorem_bounds, compute_alpha_bounds, solve_approx_dp,
    solve_infostate_dp, solve_memory_terminal_dp, solve_specialized_dp, NodeTable, ValueTable,
};
use minimax_core::gridworld::{build_grid, grid_quantizer, prepare_benchmark, GridMetric};
use minimax_core::info::{
    conditional_range_info, info_state_map, joint_range_info, normalized_accrued_info,
    perfect_observation_info, quantized_range_info, ConditionalRange, Identity, InfoStateMap,
    Quantizer, RandomLabels,
};
use minimax_core::report;
use minimax_core::system::problem::ProblemFile;
use minimax_core::system::{count_memories, Memory, SystemSpec};
use minimax_core::{Float, Rational, Scalar};

const DEFAULT_BUDGET: usize = 5_000_000;

#[derive(Parser, Debug)]
#[command(name = "minimax", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Arithmetic backend; defaults to float for Euclidean gridworlds and exact otherwise.
    #[arg(long, global = true, value_enum)]
    arith: Option<Arith>,

    /// Worker threads for dynamic programs and rollouts.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Largest number of feasible memories to enumerate.
    #[arg(long, global = true, env = "MINIMAX_DP_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one dynamic program and write its value table and law.
    Solve {
        config: PathBuf,
        #[arg(long, value_enum)]
        dp: DpKind,
        #[command(flatten)]
        info: InfoArgs,
    },
    /// Measure epsilons, compute alpha bounds and check them on every memory.
    CheckBounds {
        config: PathBuf,
        #[command(flatten)]
        info: InfoArgs,
        /// Use zero epsilons instead of measured ones.
        #[arg(long)]
        assume_exact: bool,
    },
    /// Exact versus quantized programs on a gridworld, with paired rollouts.
    Bench {
        config: PathBuf,
        /// Number of paired rollouts; overrides the config.
        #[arg(long)]
        sims: Option<usize>,
        /// Rollout seed; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(clap::Args, Debug)]
struct InfoArgs {
    #[arg(long, value_enum)]
    info: Option<InfoKind>,
    /// Label count for `random-labels`.
    #[arg(long, default_value_t = 2)]
    labels: u32,
    /// Seed for `random-labels`.
    #[arg(long, default_value_t = 0)]
    label_seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Arith {
    Exact,
    Float,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum DpKind {
    Memory,
    Specialized,
    Infostate,
    Approx,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum InfoKind {
    Case1,
    Case2,
    Case3,
    Joint,
    Quantized,
    Identity,
    LossyRange,
    RandomLabels,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::CheckBounds { .. } => "check-bounds",
            Command::Bench { .. } => "bench",
        }
    }

    fn config(&self) -> &Path {
        match self {
            Command::Solve { config, .. }
            | Command::CheckBounds { config, .. }
            | Command::Bench { config, .. } => config,
        }
    }
}

fn usage_error(msg: &str) -> ! {
    Cli::command()
        .error(clap::error::ErrorKind::ArgumentConflict, msg)
        .exit()
}

/// A loaded system plus the quantizer of its gridworld section, if any.
struct Loaded<S> {
    spec: SystemSpec<S>,
    quantizer: Option<Quantizer>,
}

fn load<S: Scalar>(file: &ProblemFile) -> anyhow::Result<Loaded<S>> {
    match &file.gridworld {
        Some(cfg) => {
            let grid = build_grid::<S>(cfg)?;
            let quantizer = grid_quantizer(cfg, &grid)?;
            Ok(Loaded {
                spec: grid.spec,
                quantizer: Some(quantizer),
            })
        }
        None => Ok(Loaded {
            spec: file.build()?,
            quantizer: None,
        }),
    }
}

fn build_info<S: Scalar>(
    loaded: &Loaded<S>,
    args: &InfoArgs,
    kind: InfoKind,
) -> anyhow::Result<InfoStateMap<S>> {
    let spec = &loaded.spec;
    Ok(match kind {
        InfoKind::Case1 => normalized_accrued_info(spec),
        InfoKind::Case2 => perfect_observation_info(spec)?,
        InfoKind::Case3 => conditional_range_info(spec)?,
        InfoKind::Joint => joint_range_info(spec),
        InfoKind::Identity => info_state_map(spec, Identity),
        InfoKind::LossyRange => info_state_map(spec, ConditionalRange::lossy(spec)),
        InfoKind::RandomLabels => {
            info_state_map(spec, RandomLabels::new(spec, args.label_seed, args.labels)?)
        }
        InfoKind::Quantized => match &loaded.quantizer {
            Some(q) => quantized_range_info(spec, q.clone())?,
            None => bail!("--info=quantized needs a config with a gridworld section"),
        },
    })
}

fn create(out: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = out.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json(out: &Path, name: &str, value: &impl Serialize) -> anyhow::Result<()> {
    let mut w = create(out, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    use std::io::Write;
    writeln!(w)?;
    Ok(())
}

fn write_manifest(cli: &Cli, file: &ProblemFile, arith: Arith) -> anyhow::Result<()> {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let seed = match &cli.command {
        Command::Bench { seed, .. } => seed.or(file.gridworld.as_ref().map(|g| g.seed)),
        Command::Solve { info, .. } | Command::CheckBounds { info, .. } => Some(info.label_seed),
    };
    let manifest = json!({
        "command": cli.command.name(),
        "config": cli.command.config(),
        "seed": seed,
        "out": cli.out,
        "timestamp_unix": timestamp,
        "version": env!("CARGO_PKG_VERSION"),
        "arith": arith,
        "budget": cli.budget,
        "jobs": cli.jobs,
        "args": std::env::args().skip(1).collect::<Vec<_>>(),
    });
    write_json(&cli.out, "manifest.json", &manifest)
}

fn render_all<S: Scalar>(values: &[S]) -> Vec<String> {
    values.iter().map(|v| v.render()).collect()
}

fn write_memory_table<S: Scalar>(
    cli: &Cli,
    spec: &SystemSpec<S>,
    table: &ValueTable<Memory, S>,
    dp: &str,
) -> anyhow::Result<serde_json::Value> {
    let label = |_: usize, m: &Memory| m.render(spec);
    report::write_values(
        create(&cli.out, &format!("values_{dp}.csv"))?,
        spec,
        table,
        label,
    )?;
    report::write_law(
        create(&cli.out, &format!("law_{dp}.csv"))?,
        spec,
        table,
        label,
    )?;
    let stage = table.stage(0);
    let roots: Vec<_> = stage
        .keys
        .iter()
        .zip(&stage.v)
        .map(|(m, v)| json!({ "node": m.render(spec), "value": v.render() }))
        .collect();
    Ok(json!({ "v0": roots, "memory_counts": table.key_counts() }))
}

fn write_node_table<S: Scalar>(
    cli: &Cli,
    spec: &SystemSpec<S>,
    ism: &InfoStateMap<S>,
    table: &NodeTable<S>,
    dp: &str,
) -> anyhow::Result<serde_json::Value> {
    let label = |t: usize, id: &u32| ism.render_node(spec, t, *id);
    report::write_values(
        create(&cli.out, &format!("values_{dp}.csv"))?,
        spec,
        table,
        label,
    )?;
    report::write_law(
        create(&cli.out, &format!("law_{dp}.csv"))?,
        spec,
        table,
        label,
    )?;
    let roots: Vec<_> = (0..ism.node_count(0) as u32)
        .map(|id| json!({ "node": ism.render_node(spec, 0, id), "value": table.node_value(0, id).render() }))
        .collect();
    Ok(json!({
        "info": ism.name(),
        "v0": roots,
        "memory_counts": ism.memory_counts(),
        "node_counts": ism.node_counts(),
    }))
}

fn solve<S: Scalar>(
    cli: &Cli,
    file: &ProblemFile,
    dp: DpKind,
    args: &InfoArgs,
) -> anyhow::Result<bool> {
    let loaded = load::<S>(file)?;
    let spec = &loaded.spec;
    count_memories(spec, cli.budget)?;
    let started = Instant::now();
    let mut summary = match dp {
        DpKind::Memory => write_memory_table(cli, spec, &solve_memory_terminal_dp(spec), "memory")?,
        DpKind::Specialized => {
            write_memory_table(cli, spec, &solve_specialized_dp(spec), "specialized")?
        }
        DpKind::Infostate | DpKind::Approx => {
            let kind = args.info.expect("checked before loading");
            let ism = build_info(&loaded, args, kind)?;
            if dp == DpKind::Infostate {
                write_node_table(
                    cli,
                    spec,
                    &ism,
                    &solve_infostate_dp(spec, &ism)?,
                    "infostate",
                )?
            } else {
                write_node_table(cli, spec, &ism, &solve_approx_dp(spec, &ism), "approx")?
            }
        }
    };
    summary["dp"] = json!(dp);
    summary["horizon"] = json!(spec.horizon());
    summary["runtime_s"] = json!(started.elapsed().as_secs_f64());
    let name = format!(
        "summary_{}.json",
        dp.to_possible_value()
            .expect("no skipped variants")
            .get_name()
    );
    write_json(&cli.out, &name, &summary)?;
    Ok(true)
}

fn check_bounds<S: Scalar>(
    cli: &Cli,
    file: &ProblemFile,
    args: &InfoArgs,
    assume_exact: bool,
) -> anyhow::Result<bool> {
    let loaded = load::<S>(file)?;
    let spec = &loaded.spec;
    let memories = count_memories(spec, cli.budget)?;
    let ism = build_info(&loaded, args, args.info.expect("required by clap"))?;
    let table = solve_approx_dp(spec, &ism);
    let bounds = if assume_exact {
        bounds_with_epsilons(spec, &ism, &table, vec![S::zero(); spec.horizon() + 1])?
    } else {
        compute_alpha_bounds(spec, &ism, &table)?
    };
    let sweep = check_theorem_bounds(spec, &ism, &table, &bounds.alphas)?;
    report::write_bounds(create(&cli.out, "bounds.csv")?, &bounds, &sweep)?;
    let nodes: Vec<String> = ism.node_counts().iter().map(|n| n.to_string()).collect();
    report::write_series(create(&cli.out, "nodes.csv")?, "nodes", &nodes)?;
    let roots: Vec<_> = sweep
        .roots
        .iter()
        .map(|r| {
            json!({
                "observation": spec.observations.label(r.observation),
                "optimal": r.optimal.render(),
                "approximate": r.approximate.render(),
                "realized": r.realized.render(),
            })
        })
        .collect();
    let holds = sweep.holds();
    write_json(
        &cli.out,
        "bounds_summary.json",
        &json!({
            "info": ism.name(),
            "assume_exact": assume_exact,
            "holds": holds,
            "epsilons": render_all(&bounds.epsilons),
            "alphas": render_all(&bounds.alphas),
            "violations": sweep.stages.iter().map(|s| s.violations).collect::<Vec<_>>(),
            "memory_counts": memories,
            "node_counts": ism.node_counts(),
            "roots": roots,
        }),
    )?;
    if !holds {
        eprintln!("bound sweep failed for {}", ism.name());
    }
    Ok(holds)
}

fn bench<S: Scalar>(
    cli: &Cli,
    file: &ProblemFile,
    sims: Option<usize>,
    seed: Option<u64>,
) -> anyhow::Result<bool> {
    let Some(mut cfg) = file.gridworld.clone() else {
        bail!("bench needs a config with a gridworld section");
    };
    if let Some(n) = sims {
        cfg.simulations = n;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let setup = prepare_benchmark::<S>(&cfg, cli.budget)?;
    let result = setup.evaluate(&cfg)?;
    report::write_bench(
        create(&cli.out, "bench.csv")?,
        std::slice::from_ref(&result),
    )?;
    report::write_histogram(create(&cli.out, "hist.csv")?, &result.histogram)?;
    report::write_node_counts(
        create(&cli.out, "node_counts.csv")?,
        &result.memory_counts,
        &result.exact_node_counts,
        &result.approx_node_counts,
    )?;
    report::write_bounds(
        create(&cli.out, "bounds.csv")?,
        &result.bounds,
        &result.sweep,
    )?;
    write_json(
        &cli.out,
        "bench_summary.json",
        &json!({
            "case": result.case,
            "v0": result.v0.render(),
            "v_hat0": result.v_hat0.render(),
            "lambda0": result.lambda0.render(),
            "alpha0": result.alpha0.render(),
            "epsilons": render_all(&result.bounds.epsilons),
            "alphas": render_all(&result.bounds.alphas),
            "sweep_holds": result.sweep.holds(),
            "lambda_within_bound": result.lambda_within_bound(),
            "memory_counts": result.memory_counts,
            "exact_node_counts": result.exact_node_counts,
            "approx_node_counts": result.approx_node_counts,
            "runtime_exact_s": result.runtime_exact_s,
            "runtime_approx_s": result.runtime_approx_s,
            "simulations": result.simulations,
            "rollout_violations": result.rollout_violations,
        }),
    )?;
    let passed = result.passed();
    if !passed {
        eprintln!(
            "benchmark invariants failed: sweep holds {}, |Lambda0 - V0| within 2 alpha0 {}, over-value rollouts {}",
            result.sweep.holds(),
            result.lambda_within_bound(),
            result.rollout_violations
        );
    }
    Ok(passed)
}

fn run<S: Scalar>(cli: &Cli, file: &ProblemFile) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Solve { dp, info, .. } => solve::<S>(cli, file, *dp, info),
        Command::CheckBounds {
            info, assume_exact, ..
        } => check_bounds::<S>(cli, file, info, *assume_exact),
        Command::Bench { sims, seed, .. } => bench::<S>(cli, file, *sims, *seed),
    }
}

fn check_usage(cli: &Cli) {
    match &cli.command {
        Command::Solve {
            dp: DpKind::Memory | DpKind::Specialized,
            info,
            ..
        } if info.info.is_some() => {
            usage_error("--info only applies to --dp=infostate and --dp=approx")
        }
        Command::Solve {
            dp: DpKind::Infostate | DpKind::Approx,
            info,
            ..
        } if info.info.is_none() => usage_error("--dp=infostate and --dp=approx need --info"),
        Command::CheckBounds { info, .. } if info.info.is_none() => {
            usage_error("check-bounds needs --info")
        }
        _ => {}
    }
    if cli.jobs == Some(0) {
        usage_error("--jobs must be at least 1");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    check_usage(&cli);
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(minimax_core::Error::BudgetExceeded { .. }) = e.downcast_ref() {
                eprintln!("raise --budget or MINIMAX_DP_BUDGET to attempt it");
            }
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<bool> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()?;
    }
    let path = cli.command.config();
    let file = ProblemFile::load(path).with_context(|| format!("loading {}", path.display()))?;
    let arith = cli.arith.unwrap_or(match &file.gridworld {
        Some(cfg) if cfg.metric == GridMetric::Euclidean => Arith::Float,
        _ => Arith::Exact,
    });
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    write_manifest(cli, &file, arith)?;
    match arith {
        Arith::Exact => run::<Rational>(cli, &file),
        Arith::Float => run::<Float>(cli, &file),
    }
}
