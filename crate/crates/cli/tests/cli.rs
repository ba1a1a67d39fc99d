use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use minimax_core::dp::{bounds_with_epsilons, check_theorem_bounds, solve_approx_dp};
use minimax_core::fixtures::{random_small_spec, Variant, DESK1_JSON};
use minimax_core::info::{info_state_map, validate_info_state, RandomLabels};
use minimax_core::system::problem::ProblemFile;
use minimax_core::Scalar;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn minimax(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minimax"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("MINIMAX_DP_BUDGET")
        .output()
        .expect("the binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn read_json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn tiny_grid(dir: &TempDir) -> PathBuf {
    write(
        dir,
        "grid.json",
        r#"{ "gridworld": {
            "case": "tiny", "half_width": 1, "obstacles": [], "horizon": 2,
            "agent_start": [1, 1], "initial_observation": [0, 0],
            "metric": "manhattan", "fine_radius": 0, "simulations": 300, "seed": 9
        } }"#,
    )
}

#[test]
fn memory_and_specialized_agree_at_the_root() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "desk.json", DESK1_JSON);
    let config = config.to_str().unwrap();
    for dp in ["memory", "specialized"] {
        let out = minimax(&["solve", config, "--dp", dp], dir.path());
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = read_json(dir.path().join("summary_memory.json"));
    let b = read_json(dir.path().join("summary_specialized.json"));
    assert_eq!(a["v0"], b["v0"]);
    assert_eq!(a["v0"][0]["value"], "1");
    assert_eq!(a["v0"][1]["value"], "3");
    assert!(dir.path().join("manifest.json").exists());
    assert!(dir.path().join("values_memory.csv").exists());
    let law = fs::read_to_string(dir.path().join("law_specialized.csv")).unwrap();
    assert!(law.starts_with("stage,node,action,value\n0,y0,stay,1\n0,y1,swap,3\n"));
}

#[test]
fn information_state_programs_match_in_both_arithmetics() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "desk.json", DESK1_JSON);
    let config = config.to_str().unwrap();
    let out = minimax(
        &["solve", config, "--dp", "infostate", "--info", "case1"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let exact = read_json(dir.path().join("summary_infostate.json"));
    let out = minimax(
        &[
            "solve",
            config,
            "--dp",
            "infostate",
            "--info",
            "case1",
            "--arith",
            "float",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let float = read_json(dir.path().join("summary_infostate.json"));
    assert_eq!(exact["v0"], float["v0"]);
    assert_eq!(exact["node_counts"], serde_json::json!([2, 3]));
}

#[test]
fn zero_costs_give_zero_values() {
    let dir = TempDir::new().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(DESK1_JSON).unwrap();
    for c in v["cost"].as_array_mut().unwrap() {
        c["output"] = serde_json::json!(0);
    }
    let config = write(&dir, "zero.json", &v.to_string());
    let config = config.to_str().unwrap();
    for (dp, info) in [
        ("memory", None),
        ("specialized", None),
        ("infostate", Some("case1")),
        ("approx", Some("lossy-range")),
    ] {
        let mut args = vec!["solve", config, "--dp", dp];
        if let Some(i) = info {
            args.extend(["--info", i]);
        }
        let out = minimax(&args, dir.path());
        assert!(
            out.status.success(),
            "{dp}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let summary = read_json(dir.path().join(format!("summary_{dp}.json")));
        for root in summary["v0"].as_array().unwrap() {
            assert_eq!(root["value"], "0", "{dp}");
        }
    }
}

#[test]
fn usage_and_precondition_errors() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "desk.json", DESK1_JSON);
    let config = config.to_str().unwrap();

    let out = minimax(&["solve", config, "--dp", "infostate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("need --info"));

    let out = minimax(
        &["solve", config, "--dp", "memory", "--info", "case1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));

    let out = minimax(
        &["solve", config, "--dp", "infostate", "--info", "case2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not perfectly observed"));

    let out = minimax(
        &["solve", config, "--dp", "infostate", "--info", "identity"],
        dir.path(),
    );
    assert!(out.status.success());
    let out = minimax(&["check-bounds", config, "--info", "quantized"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gridworld"));

    let mut v: serde_json::Value = serde_json::from_str(DESK1_JSON).unwrap();
    v["cost"].as_array_mut().unwrap().pop();
    let broken = write(&dir, "broken.json", &v.to_string());
    let out = minimax(
        &["solve", broken.to_str().unwrap(), "--dp", "memory"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cost"));
}

#[test]
fn budget_refusal_reports_the_estimate() {
    let dir = TempDir::new().unwrap();
    let config = tiny_grid(&dir);
    let out = minimax(
        &["bench", config.to_str().unwrap(), "--budget", "50"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("at least 5") && err.contains("budget 50"),
        "{err}"
    );
    assert!(!dir.path().join("bench.csv").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn bench_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let config = tiny_grid(&dir);
    let config = config.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let run = minimax(&["bench", config, "--seed", "3", "--jobs", "2"], out);
        assert!(
            run.status.success(),
            "{}",
            String::from_utf8_lossy(&run.stderr)
        );
    }
    for name in ["hist.csv", "node_counts.csv", "bounds.csv"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
    let strip = |p: &Path| -> Vec<String> {
        fs::read_to_string(p.join("bench.csv"))
            .unwrap()
            .lines()
            .map(|l| l.rsplitn(3, ',').nth(2).unwrap().to_string())
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
    let hist = fs::read_to_string(a.join("hist.csv")).unwrap();
    let total: usize = hist
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 300);
    let manifest = read_json(a.join("manifest.json"));
    assert_eq!(manifest["command"], "bench");
    assert_eq!(manifest["seed"], 3);
}

#[test]
fn zero_simulations_give_an_empty_histogram() {
    let dir = TempDir::new().unwrap();
    let config = tiny_grid(&dir);
    let out = minimax(
        &["bench", config.to_str().unwrap(), "--sims", "0"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("hist.csv")).unwrap(),
        "cost_difference,frequency\n"
    );
    assert_eq!(
        fs::read_to_string(dir.path().join("bench.csv"))
            .unwrap()
            .lines()
            .count(),
        2
    );
}

#[test]
fn identity_quantizer_has_zero_bounds() {
    let dir = TempDir::new().unwrap();
    let mut v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tiny_grid(&dir)).unwrap()).unwrap();
    v["gridworld"]["quantizer"] = serde_json::json!("identity");
    let config = write(&dir, "identity.json", &v.to_string());
    let out = minimax(
        &[
            "check-bounds",
            config.to_str().unwrap(),
            "--info",
            "quantized",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = read_json(dir.path().join("bounds_summary.json"));
    assert_eq!(summary["holds"], true);
    assert!(summary["alphas"]
        .as_array()
        .unwrap()
        .iter()
        .all(|a| a == "0"));
    assert!(summary["epsilons"]
        .as_array()
        .unwrap()
        .iter()
        .all(|a| a == "0"));
}

#[test]
fn quantized_grid_bounds_hold() {
    let dir = TempDir::new().unwrap();
    let config = tiny_grid(&dir);
    let out = minimax(
        &[
            "check-bounds",
            config.to_str().unwrap(),
            "--info",
            "quantized",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let bounds = fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    assert_eq!(bounds.lines().count(), 4);
}

/// A lossy compressor declared exact must fail its sweep.
#[test]
fn corrupted_bounds_fail_with_nonzero_exit() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (spec, seed) = (0..200u64)
        .find_map(|seed| {
            let spec = random_small_spec(&mut rng, Variant::Generic).unwrap();
            let ism = info_state_map(&spec, RandomLabels::new(&spec, seed, 1).unwrap());
            if validate_info_state(&spec, &ism).passed() {
                return None;
            }
            let table = solve_approx_dp(&spec, &ism);
            let zero = vec![Scalar::zero(); spec.horizon() + 1];
            let b = bounds_with_epsilons(&spec, &ism, &table, zero).unwrap();
            (!check_theorem_bounds(&spec, &ism, &table, &b.alphas)
                .unwrap()
                .holds())
            .then_some((spec, seed))
        })
        .expect("some lossy compressor breaks zero bounds");

    let dir = TempDir::new().unwrap();
    let config = write(
        &dir,
        "random.json",
        &ProblemFile::from_spec(&spec).to_json().unwrap(),
    );
    let config = config.to_str().unwrap();
    let seed = seed.to_string();
    let base = [
        "check-bounds",
        config,
        "--info",
        "random-labels",
        "--labels",
        "1",
        "--label-seed",
        &seed,
    ];
    let honest = minimax(&base, dir.path());
    assert!(
        honest.status.success(),
        "{}",
        String::from_utf8_lossy(&honest.stderr)
    );
    let mut args = base.to_vec();
    args.push("--assume-exact");
    let corrupted = minimax(&args, dir.path());
    assert_eq!(corrupted.status.code(), Some(1));
    assert_eq!(
        read_json(dir.path().join("bounds_summary.json"))["holds"],
        false
    );
}
