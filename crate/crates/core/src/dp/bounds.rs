use std::cell::Cell;

use serde::Serialize;

use crate::distribution::lipschitz_by;
use crate::dp::memory::{node_of, specialized_q, terminal_q};
use crate::dp::table::{argmin, NodeTable};
use crate::error::{Error, Result};
use crate::info::{compute_epsilons, InfoStateMap};
use crate::scalar::Scalar;
use crate::sets::PointId;
use crate::system::{fold_memories, SystemSpec};

/// `alpha_T = (L_{c_T} + 1) eps_T`, `alpha_t = alpha_{t+1} + (2 L_t + 1) eps_t`.
///
/// `lipschitz[t]` is `L_t` for `t < T`.
pub fn alpha_recursion<S: Scalar>(eps: &[S], terminal_lipschitz: S, lipschitz: &[S]) -> Vec<S> {
    let horizon = eps.len() - 1;
    assert_eq!(
        lipschitz.len(),
        horizon,
        "one Lipschitz constant per non-terminal stage"
    );
    let mut alpha = vec![S::zero(); horizon + 1];
    alpha[horizon] = (terminal_lipschitz + S::one()) * eps[horizon];
    let two = S::from_int(2);
    for t in (0..horizon).rev() {
        alpha[t] = alpha[t + 1] + (two * lipschitz[t] + S::one()) * eps[t];
    }
    alpha
}

/// Lipschitz constant of `c_t(., u)` in the state, maximized over `u`.
pub fn cost_lipschitz<S: Scalar>(spec: &SystemSpec<S>, t: usize) -> S {
    let states: Vec<PointId> = spec.states.ids().collect();
    spec.actions
        .ids()
        .map(|u| {
            lipschitz_by(
                &states,
                |&x| spec.cost(t, x, u),
                |a, b| spec.states.distance(*a, *b),
            )
            .expect("metric spaces separate points")
        })
        .max()
        .unwrap_or_else(S::zero)
}

/// Lipschitz constant of `V(t, .)` over the nodes of stage `t`.
pub fn value_lipschitz<S: Scalar>(
    ism: &InfoStateMap<S>,
    table: &NodeTable<S>,
    t: usize,
) -> Result<S> {
    let ids: Vec<u32> = (0..ism.node_count(t) as u32).collect();
    let missing = Cell::new(false);
    let zero_distance = |a: u32, b: u32| {
        Error::Metric(format!(
            "distinct nodes {a} and {b} of stage {t} are at distance zero with different values"
        ))
    };
    let mut pair = (0, 0);
    let l = lipschitz_by(
        &ids,
        |&id| table.node_value(t, id),
        |&a, &b| {
            pair = (a, b);
            ism.node_distance(t, a, b).unwrap_or_else(|| {
                missing.set(true);
                S::one()
            })
        },
    );
    if missing.get() {
        return Err(Error::NoNodeMetric(format!(
            "{} nodes at stage {t} need a metric",
            ism.name()
        )));
    }
    l.ok_or_else(|| zero_distance(pair.0, pair.1))
}

/// Ingredients and result of the alpha recursion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport<S> {
    /// `eps_0 .. eps_T`
    pub epsilons: Vec<S>,
    /// `L_{c_0} .. L_{c_T}`
    pub cost_lipschitz: Vec<S>,
    /// `L_{V_1} .. L_{V_T}`, indexed by `t` for `t < T`.
    pub value_lipschitz: Vec<S>,
    /// `L_t = max(L_{V_{t+1}}, L_{c_t})` for `t < T`.
    pub lipschitz: Vec<S>,
    /// `alpha_0 .. alpha_T`
    pub alphas: Vec<S>,
}

/// Bounds from supplied epsilons.
pub fn bounds_with_epsilons<S: Scalar>(
    spec: &SystemSpec<S>,
    ism: &InfoStateMap<S>,
    table: &NodeTable<S>,
    epsilons: Vec<S>,
) -> Result<BoundReport<S>> {
    let horizon = spec.horizon();
    if epsilons.len() != horizon + 1 {
        return Err(Error::Domain(format!(
            "expected {} epsilons, got {}",
            horizon + 1,
            epsilons.len()
        )));
    }
    let cost_l: Vec<S> = (0..=horizon).map(|t| cost_lipschitz(spec, t)).collect();
    let value_l: Vec<S> = (0..horizon)
        .map(|t| value_lipschitz(ism, table, t + 1))
        .collect::<Result<_>>()?;
    let lipschitz: Vec<S> = (0..horizon).map(|t| value_l[t].max(cost_l[t])).collect();
    let alphas = alpha_recursion(&epsilons, cost_l[horizon], &lipschitz);
    Ok(BoundReport {
        epsilons,
        cost_lipschitz: cost_l,
        value_lipschitz: value_l,
        lipschitz,
        alphas,
    })
}

/// Epsilons measured on the compressor, then the alpha recursion.
pub fn compute_alpha_bounds<S: Scalar>(
    spec: &SystemSpec<S>,
    ism: &InfoStateMap<S>,
    table: &NodeTable<S>,
) -> Result<BoundReport<S>> {
    let eps = compute_epsilons(spec, ism)?;
    bounds_with_epsilons(spec, ism, table, eps)
}

/// Largest observed gaps of one stage.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageGaps<S> {
    pub stage: usize,
    pub memories: usize,
    pub alpha: S,
    /// `max |Q_t(m, u) - Qhat_t(sigma(m), u)|`
    pub q_gap: S,
    /// `max |V_t(m) - Vhat_t(sigma(m))|`
    pub v_gap: S,
    /// `max |Q_t(m, u) - Theta_t(m, u)|`
    pub theta_gap: S,
    /// `max |V_t(m) - Lambda_t(m)|`
    pub lambda_gap: S,
    /// Memories breaking any of the four bounds.
    pub violations: usize,
}

/// Values at one initial observation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootValues<S> {
    pub observation: PointId,
    /// Optimal `V_0`.
    pub optimal: S,
    /// `Vhat_0` at the root's node.
    pub approximate: S,
    /// `Lambda_0`: true cost of the approximate strategy.
    pub realized: S,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport<S> {
    pub stages: Vec<StageGaps<S>>,
    pub roots: Vec<RootValues<S>>,
}

impl<S: Scalar> SweepReport<S> {
    pub fn holds(&self) -> bool {
        self.stages.iter().all(|s| s.violations == 0)
    }
}

/// Visits every memory once, computing the optimal `Q`/`V`, the realized
/// `Theta`/`Lambda` of the approximate strategy, and their gaps to the
/// approximate table, checked against `alpha_t` and `2 alpha_t`.
pub fn check_theorem_bounds<S: Scalar>(
    spec: &SystemSpec<S>,
    ism: &InfoStateMap<S>,
    table: &NodeTable<S>,
    alphas: &[S],
) -> Result<SweepReport<S>> {
    let horizon = spec.horizon();
    if alphas.len() != horizon + 1 {
        return Err(Error::Domain(format!(
            "expected {} alphas, got {}",
            horizon + 1,
            alphas.len()
        )));
    }
    let two = S::from_int(2);
    let mut stages: Vec<StageGaps<S>> = (0..=horizon)
        .map(|t| StageGaps {
            stage: t,
            memories: 0,
            alpha: alphas[t],
            q_gap: S::zero(),
            v_gap: S::zero(),
            theta_gap: S::zero(),
            lambda_gap: S::zero(),
            violations: 0,
        })
        .collect();
    let mut failure: Option<Error> = None;
    let roots = fold_memories(spec, |ctx, branches, children: Vec<Vec<(S, S, S)>>| {
        let t = ctx.stage;
        let (q, theta) = if t == horizon {
            let q = terminal_q(spec, ctx, ctx.belief.top());
            (q.clone(), q)
        } else {
            (
                specialized_q(spec, ctx, branches, |ui, j| children[ui][j].0),
                specialized_q(spec, ctx, branches, |ui, j| children[ui][j].1),
            )
        };
        let id = match node_of(ism, ctx) {
            Ok(id) => id,
            Err(e) => {
                failure.get_or_insert(e);
                return (S::zero(), S::zero(), S::zero());
            }
        };
        let v = argmin(&q).1;
        let u = table.node_law(t, id);
        let lambda = theta[u.index()];
        let v_hat = table.node_value(t, id);

        let gaps = &mut stages[t];
        gaps.memories += 1;
        let alpha = gaps.alpha;
        let mut ok = true;
        let mut check = |gap: S, bound: S, slot: &mut S| {
            *slot = (*slot).max(gap);
            ok &= gap.le_tol(bound);
        };
        for (ui, &qu) in q.iter().enumerate() {
            check(
                (qu - table.node_q(t, id, PointId::from_index(ui))).abs(),
                alpha,
                &mut gaps.q_gap,
            );
            check((qu - theta[ui]).abs(), two * alpha, &mut gaps.theta_gap);
        }
        check((v - v_hat).abs(), alpha, &mut gaps.v_gap);
        check((v - lambda).abs(), two * alpha, &mut gaps.lambda_gap);
        if !ok {
            gaps.violations += 1;
        }
        (v, lambda, v_hat)
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let roots = roots
        .into_iter()
        .map(|(y, (v, lambda, v_hat))| RootValues {
            observation: y,
            optimal: v,
            approximate: v_hat,
            realized: lambda,
        })
        .collect();
    Ok(SweepReport { stages, roots })
}
