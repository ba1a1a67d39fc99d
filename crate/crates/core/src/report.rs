//! CSV output for value tables, bounds and benchmark results.

use std::hash::Hash;
use std::io::Write;

use crate::dp::{BoundReport, SweepReport, ValueTable};
use crate::error::Result;
use crate::gridworld::BenchResult;
use crate::scalar::Scalar;
use crate::sets::PointId;
use crate::system::SystemSpec;

/// `stage,node,action,q` for every entry of a table.
pub fn write_values<K, S, W>(
    out: W,
    spec: &SystemSpec<S>,
    table: &ValueTable<K, S>,
    label: impl Fn(usize, &K) -> String,
) -> Result<()>
where
    K: Clone + Eq + Hash,
    S: Scalar,
    W: Write,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["stage", "node", "action", "q"])?;
    let nu = table.action_count();
    for (t, stage) in table.stages().iter().enumerate() {
        for (i, key) in stage.keys.iter().enumerate() {
            let node = label(t, key);
            for u in 0..nu {
                w.write_record([
                    t.to_string(),
                    node.clone(),
                    spec.actions.label(PointId::from_index(u)).to_string(),
                    stage.q[i * nu + u].render(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// `stage,node,action,value`: the law and its value per node.
pub fn write_law<K, S, W>(
    out: W,
    spec: &SystemSpec<S>,
    table: &ValueTable<K, S>,
    label: impl Fn(usize, &K) -> String,
) -> Result<()>
where
    K: Clone + Eq + Hash,
    S: Scalar,
    W: Write,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["stage", "node", "action", "value"])?;
    for (t, stage) in table.stages().iter().enumerate() {
        for (i, key) in stage.keys.iter().enumerate() {
            w.write_record([
                t.to_string(),
                label(t, key),
                spec.actions.label(stage.law[i]).to_string(),
                stage.v[i].render(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `stage,<column>` rows.
pub fn write_series<W: Write>(out: W, column: &str, values: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["stage", column])?;
    for (t, v) in values.iter().enumerate() {
        w.write_record([t.to_string(), v.clone()])?;
    }
    w.flush()?;
    Ok(())
}

fn opt<S: Scalar>(v: Option<&S>) -> String {
    v.map(|v| v.render()).unwrap_or_default()
}

/// Per stage: epsilon, Lipschitz constants, alpha and the largest observed
/// gaps of the sweep.
pub fn write_bounds<S: Scalar, W: Write>(
    out: W,
    bounds: &BoundReport<S>,
    sweep: &SweepReport<S>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "stage",
        "epsilon",
        "lipschitz_cost",
        "lipschitz_value_next",
        "lipschitz",
        "alpha",
        "memories",
        "max_q_gap",
        "max_v_gap",
        "max_theta_gap",
        "max_lambda_gap",
        "violations",
    ])?;
    for (t, gaps) in sweep.stages.iter().enumerate() {
        w.write_record([
            t.to_string(),
            bounds.epsilons[t].render(),
            bounds.cost_lipschitz[t].render(),
            opt(bounds.value_lipschitz.get(t)),
            opt(bounds.lipschitz.get(t)),
            bounds.alphas[t].render(),
            gaps.memories.to_string(),
            gaps.q_gap.render(),
            gaps.v_gap.render(),
            gaps.theta_gap.render(),
            gaps.lambda_gap.render(),
            gaps.violations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One `bench.csv` row per result.
pub fn write_bench<S: Scalar, W: Write>(out: W, results: &[BenchResult<S>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "case",
        "x0_ag",
        "y0",
        "V0",
        "Vhat0",
        "alpha0",
        "runtime_exact_s",
        "runtime_approx_s",
    ])?;
    for r in results {
        w.write_record([
            r.case.clone(),
            r.agent_start.clone(),
            r.initial_observation.clone(),
            r.v0.render(),
            r.v_hat0.render(),
            r.alpha0.render(),
            format!("{:.6}", r.runtime_exact_s),
            format!("{:.6}", r.runtime_approx_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `cost_difference,frequency` rows.
pub fn write_histogram<S: Scalar, W: Write>(out: W, histogram: &[(S, usize)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cost_difference", "frequency"])?;
    for (d, n) in histogram {
        w.write_record([d.render(), n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `stage,memories,exact_nodes,approx_nodes` rows.
pub fn write_node_counts<W: Write>(
    out: W,
    memories: &[usize],
    exact: &[usize],
    approx: &[usize],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["stage", "memories", "exact_nodes", "approx_nodes"])?;
    for t in 0..memories.len() {
        w.write_record([
            t.to_string(),
            memories[t].to_string(),
            exact[t].to_string(),
            approx[t].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
