mod common;

use std::collections::HashMap;

use common::{family, q, zero_cost, Q};
use minimax_core::dp::{
    evaluate_strategy, solve_approx_dp, solve_infostate_dp, solve_memory_terminal_dp,
    solve_specialized_dp, strategy_root_values, CompressedStrategy,
};
use minimax_core::fixtures::{desk1, random_small_spec, Variant};
use minimax_core::info::{info_state_map, ConditionalRange, Identity, RandomLabels};
use minimax_core::sets::PointId;
use minimax_core::system::{worst_case_by_root, Memory, MemoryStrategy, SystemSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn label(spec: &SystemSpec<Q>, name: &str) -> PointId {
    spec.observations.id_of(name).unwrap()
}

#[test]
fn oracle_optimality() {
    let outcome = common::criterion1();
    assert!(outcome.pass, "{}", outcome.detail);
}

#[test]
fn terminal_cost_equivalence() {
    let outcome = common::criterion2();
    assert!(outcome.pass, "{}", outcome.detail);
}

#[test]
fn desk1_values_by_hand() {
    let spec = desk1::<Q>();
    let sp = solve_specialized_dp(&spec);
    let (y0, y1) = (
        Memory::initial(label(&spec, "y0")),
        Memory::initial(label(&spec, "y1")),
    );
    let (stay, swap) = (
        spec.actions.id_of("stay").unwrap(),
        spec.actions.id_of("swap").unwrap(),
    );
    assert_eq!(sp.v(0, &y0), Some(q(1)));
    assert_eq!(sp.v(0, &y1), Some(q(3)));
    assert_eq!(sp.q(0, &y1, stay), Some(q(4)));
    assert_eq!(sp.q(0, &y1, swap), Some(q(3)));
    assert_eq!(sp.law(0, &y0), Some(stay));
    assert_eq!(sp.law(0, &y1), Some(swap));
    // after swapping from y1 and seeing y1 again: {x1: 2, x0: 0}, normalized {x1: 0, x0: -2}
    let m = y1.extend(swap, label(&spec, "y1"));
    assert_eq!(sp.q(1, &m, stay), Some(q(2)));
    assert_eq!(sp.q(1, &m, swap), Some(q(1)));
}

#[test]
fn zero_costs_give_zero_values() {
    for (_, spec) in family().iter().take(20) {
        let spec = zero_cost(spec);
        for table in [solve_memory_terminal_dp(&spec), solve_specialized_dp(&spec)] {
            assert!(table
                .stages()
                .iter()
                .all(|s| s.v.iter().all(|v| *v == q(0))));
        }
        let ism = info_state_map(&spec, ConditionalRange::lossy(&spec));
        let approx = solve_approx_dp(&spec, &ism);
        assert!(approx
            .stages()
            .iter()
            .all(|s| s.v.iter().all(|v| *v == q(0))));
    }
}

#[test]
fn single_stage_is_min_max() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut seen = 0;
    while seen < 10 {
        let spec = random_small_spec(&mut rng, Variant::Generic).unwrap();
        if spec.horizon() != 0 {
            continue;
        }
        seen += 1;
        let tm = solve_memory_terminal_dp(&spec);
        for m in &tm.stage(0).keys {
            let range: Vec<PointId> = spec
                .initial()
                .iter()
                .copied()
                .filter(|&x| {
                    spec.noises
                        .ids()
                        .any(|n| spec.observe(0, x, n) == m.observations[0])
                })
                .collect();
            let expected = spec
                .actions
                .ids()
                .map(|u| range.iter().map(|&x| spec.cost(0, x, u)).max().unwrap())
                .min()
                .unwrap();
            assert_eq!(tm.v(0, m), Some(expected));
        }
    }
}

#[test]
fn greedy_laws_agree() {
    for (name, spec) in family() {
        let tm = solve_memory_terminal_dp(&spec);
        let sp = solve_specialized_dp(&spec);
        for t in 0..=spec.horizon() {
            assert_eq!(tm.stage(t).law, sp.stage(t).law, "{name} t={t}");
        }
    }
}

#[test]
fn identity_compressor_reproduces_specialized_values() {
    for (name, spec) in family() {
        let sp = solve_specialized_dp(&spec);
        let ism = info_state_map(&spec, Identity);
        let table = solve_infostate_dp(&spec, &ism).unwrap();
        assert!(
            common::pullback_mismatches(&spec, &ism, &table, &sp).is_empty(),
            "{name}"
        );
        assert_eq!(table.key_counts(), sp.key_counts(), "{name}");
    }
}

#[test]
fn optimal_law_fed_back_realizes_the_value() {
    for (name, spec) in family() {
        let sp = solve_specialized_dp(&spec);
        let ism = info_state_map(&spec, Identity);
        let table = solve_infostate_dp(&spec, &ism).unwrap();
        let eval = evaluate_strategy(&spec, &ism, &table).unwrap();
        for t in 0..=spec.horizon() {
            assert_eq!(eval.stage(t).keys, sp.stage(t).keys, "{name}");
            assert_eq!(eval.stage(t).v, sp.stage(t).v, "{name} t={t}");
            assert_eq!(eval.stage(t).q, sp.stage(t).q, "{name} t={t}");
        }
    }
}

/// The cost-to-go of an approximate strategy equals its worst case over
/// every rollout.
#[test]
fn realized_value_matches_rollout_worst_case() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut specs: Vec<SystemSpec<Q>> = vec![desk1()];
    specs.extend((0..30).map(|_| random_small_spec(&mut rng, Variant::Generic).unwrap()));
    for (i, spec) in specs.iter().enumerate() {
        let ism = if i % 2 == 0 {
            info_state_map(spec, RandomLabels::new(spec, i as u64, 2).unwrap())
        } else {
            info_state_map(spec, ConditionalRange::lossy(spec))
        };
        let table = solve_approx_dp(spec, &ism);
        let eval = evaluate_strategy(spec, &ism, &table).unwrap();
        let rollouts = worst_case_by_root(spec, &CompressedStrategy::new(&ism, &table)).unwrap();
        let roots = strategy_root_values(spec, &ism, &table).unwrap();
        assert_eq!(roots.len(), rollouts.len());
        for (y0, lambda) in roots {
            assert_eq!(rollouts[&y0], lambda, "system {i}");
            assert_eq!(eval.v(0, &Memory::initial(y0)), Some(lambda), "system {i}");
        }

        // the same strategy written out as an explicit table
        let mut explicit = HashMap::new();
        for t in 0..=spec.horizon() {
            let stage = eval.stage(t);
            for (m, u) in stage.keys.iter().zip(&stage.law) {
                explicit.insert(m.clone(), *u);
            }
        }
        let by_table = worst_case_by_root(spec, &MemoryStrategy { table: explicit }).unwrap();
        assert_eq!(by_table, rollouts, "system {i}");
    }
}

#[test]
fn value_tables_satisfy_their_invariants() {
    for (name, spec) in family() {
        for table in [solve_memory_terminal_dp(&spec), solve_specialized_dp(&spec)] {
            let nu = table.action_count();
            for stage in table.stages() {
                for (i, v) in stage.v.iter().enumerate() {
                    let row = &stage.q[i * nu..(i + 1) * nu];
                    assert_eq!(row.iter().min(), Some(v), "{name}");
                    let first = row.iter().position(|x| x == v).unwrap();
                    assert_eq!(
                        stage.law[i].index(),
                        first,
                        "{name}: ties go to the lowest action"
                    );
                }
            }
        }
    }
}
