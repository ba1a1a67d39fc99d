use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distribution::{distribution_distance, Distribution};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sets::{hausdorff, FiniteMetricSpace, PointId};
use crate::system::{fold_memories, Memory, MemoryCtx, SystemSpec};

/// Value taken by an information state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InfoNode<S> {
    /// The memory itself.
    History(Memory),
    /// A normalized accrued distribution over states, as its sorted support.
    Distribution(Vec<(PointId, S)>),
    /// A single state.
    State(PointId),
    /// A nonempty sorted set of states.
    Range(Vec<PointId>),
    /// A sorted set of (state, accrued cost) pairs.
    JointRange(Vec<(PointId, S)>),
    /// Exactly known points plus a range.
    Composite {
        exact: Vec<PointId>,
        range: Vec<PointId>,
    },
    /// An opaque label.
    Label(u32),
}

/// A map `sigma_t` from memories to information-state nodes.
pub trait Compressor<S: Scalar>: Send + Sync {
    fn name(&self) -> String;

    fn compress(&self, ctx: &MemoryCtx<S>) -> InfoNode<S>;

    /// Metric on nodes of one stage, `None` when the node space carries none.
    fn node_distance(&self, _a: &InfoNode<S>, _b: &InfoNode<S>) -> Option<S> {
        None
    }

    fn render(&self, node: &InfoNode<S>, spec: &SystemSpec<S>) -> String {
        render_node(node, spec)
    }
}

fn join_labels<S: Scalar>(space: &FiniteMetricSpace<S>, ids: &[PointId]) -> String {
    ids.iter()
        .map(|p| space.label(*p))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Text form of a node using the system's point labels.
pub fn render_node<S: Scalar>(node: &InfoNode<S>, spec: &SystemSpec<S>) -> String {
    let states = &spec.states;
    match node {
        InfoNode::History(m) => m.render(spec),
        InfoNode::Distribution(d) | InfoNode::JointRange(d) => d
            .iter()
            .map(|(x, v)| format!("{}:{}", states.label(*x), v.render()))
            .collect::<Vec<_>>()
            .join(" "),
        InfoNode::State(x) => states.label(*x).to_string(),
        InfoNode::Range(r) => format!("{{{}}}", join_labels(states, r)),
        InfoNode::Composite { exact, range } => {
            let ex = exact
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            format!("({ex}) {{{}}}", join_labels(states, range))
        }
        InfoNode::Label(l) => format!("label {l}"),
    }
}

/// The trivial compressor: every memory is its own node.
#[derive(Clone, Debug, Default)]
pub struct Identity;

impl<S: Scalar> Compressor<S> for Identity {
    fn name(&self) -> String {
        "identity".into()
    }

    fn compress(&self, ctx: &MemoryCtx<S>) -> InfoNode<S> {
        InfoNode::History(ctx.memory())
    }
}

/// The normalized accrued distribution `r_t(. | m_t)`.
#[derive(Clone, Debug)]
pub struct NormalizedAccrued<S> {
    states: Arc<FiniteMetricSpace<S>>,
}

impl<S: Scalar> NormalizedAccrued<S> {
    pub fn new(spec: &SystemSpec<S>) -> Self {
        NormalizedAccrued {
            states: spec.states.clone(),
        }
    }
}

impl<S: Scalar> Compressor<S> for NormalizedAccrued<S> {
    fn name(&self) -> String {
        "case1".into()
    }

    fn compress(&self, ctx: &MemoryCtx<S>) -> InfoNode<S> {
        InfoNode::Distribution(ctx.belief.accrued().support().to_vec())
    }

    fn node_distance(&self, a: &InfoNode<S>, b: &InfoNode<S>) -> Option<S> {
        match (a, b) {
            (InfoNode::Distribution(a), InfoNode::Distribution(b)) => {
                let a = Distribution::new(a.iter().copied()).ok()?;
                let b = Distribution::new(b.iter().copied()).ok()?;
                Some(distribution_distance(&a, &b, &self.states))
            }
            _ => None,
        }
    }
}

/// The current state, for systems whose observations reveal it.
#[derive(Clone, Debug)]
pub struct PerfectObservation<S> {
    states: Arc<FiniteMetricSpace<S>>,
    /// Per stage, the state behind each observation.
    inverse: Vec<HashMap<PointId, PointId>>,
}

impl<S: Scalar> PerfectObservation<S> {
    /// Fails unless every `h_t` ignores the noise and is injective in the state.
    pub fn new(spec: &SystemSpec<S>) -> Result<Self> {
        let mut inverse = Vec::with_capacity(spec.horizon() + 1);
        for t in 0..=spec.horizon() {
            let mut inv = HashMap::new();
            for x in spec.states.ids() {
                let y = spec.observe(t, x, PointId(0));
                if let Some(n) = spec.noises.ids().find(|&n| spec.observe(t, x, n) != y) {
                    return Err(Error::NotPerfectlyObserved(format!(
                        "at t={t} state {} gives different observations under noises {} and {}",
                        spec.states.label(x),
                        spec.noises.label(PointId(0)),
                        spec.noises.label(n)
                    )));
                }
                if let Some(other) = inv.insert(y, x) {
                    return Err(Error::NotPerfectlyObserved(format!(
                        "at t={t} states {} and {} share observation {}",
                        spec.states.label(other),
                        spec.states.label(x),
                        spec.observations.label(y)
                    )));
                }
            }
            inverse.push(inv);
        }
        Ok(PerfectObservation {
            states: spec.states.clone(),
            inverse,
        })
    }
}

impl<S: Scalar> Compressor<S> for PerfectObservation<S> {
    fn name(&self) -> String {
        "case2".into()
    }

    fn compress(&self, ctx: &MemoryCtx<S>) -> InfoNode<S> {
        let y = *ctx
            .observations
            .last()
            .expect("memories hold an observation");
        InfoNode::State(self.inverse[ctx.stage][&y])
    }

    fn node_distance(&self, a: &InfoNode<S>, b: &InfoNode<S>) -> Option<S> {
        match (a, b) {
            (InfoNode::State(a), InfoNode::State(b)) => Some(self.states.distance(*a, *b)),
            _ => None,
        }
    }
}

/// The conditional range `[[X_t | m_t]]`.
#[derive(Clone, Debug)]
pub struct ConditionalRange<S> {
    states: Arc<FiniteMetricSpace<S>>,
    gated: bool,
}

impl<S: Scalar> ConditionalRange<S> {
    /// Fails when some interim cost depends on the state.
    pub fn new(spec: &SystemSpec<S>) -> Result<Self> {
        if !spec.interim_costs_action_only() {
            return Err(Error::CostShape("interim costs depend on the state".into()));
        }
        Ok(ConditionalRange {
            states: spec.states.clone(),
            gated: true,
        })
    }

    /// The same map on any system; in general only an approximate information state.
    pub fn lossy(spec: &SystemSpec<S>) -> Self {
        ConditionalRange {
            states: spec.states.clone(),
            gated: false,
        }
    }
}

impl<S: Scalar> Compressor<S> for ConditionalRange<S> {
    fn name(&self) -> String {
        if self.gated { "case3" } else { "lossy-range" }.into()
    }

    fn compress(&self, ctx: &MemoryCtx<S>) -> InfoNode<S> {
        InfoNode::Range(ctx.belief.support().to_vec())
    }

    fn node_distance(&self, a: &InfoNode<S>, b: &InfoNode<S>) -> Option<S> {
        match (a, b) {
            (InfoNode::Range(a), InfoNode::Range(b)) => hausdorff(a, b, &self.states).ok(),
            _ => None,
        }
    }
}

/// The joint range `[[X_t, A_t | m_t]]`.
#[derive(Clone, Debug, Default)]
pub struct JointRange;

impl<S: Scalar> Compressor<S> for JointRange {
    fn name(&self) -> String {
        "joint".into()
    }

    fn compress(&self, ctx: &MemoryCtx<S>) -> InfoNode<S> {
        InfoNode::JointRange(ctx.belief.pairs().to_vec())
    }
}

/// Random relabelling of the normalized accrued distribution into a few
/// integer labels with metric `|i - j|`. Distinct distributions may collide,
/// so this is a deliberately lossy compressor.
#[derive(Clone, Debug)]
pub struct RandomLabels<S> {
    labels: Vec<HashMap<Vec<(PointId, S)>, u32>>,
    seed: u64,
}

impl<S: Scalar> RandomLabels<S> {
    pub fn new(spec: &SystemSpec<S>, seed: u64, label_count: u32) -> Result<Self> {
        if label_count == 0 {
            return Err(Error::Domain("need at least one label".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels: Vec<HashMap<Vec<(PointId, S)>, u32>> =
            vec![HashMap::new(); spec.horizon() + 1];
        fold_memories(spec, |ctx, _, _| {
            let key = ctx.belief.accrued().support().to_vec();
            labels[ctx.stage]
                .entry(key)
                .or_insert_with(|| rng.gen_range(0..label_count));
        });
        Ok(RandomLabels { labels, seed })
    }
}

impl<S: Scalar> Compressor<S> for RandomLabels<S> {
    fn name(&self) -> String {
        format!("labels-{}", self.seed)
    }

    fn compress(&self, ctx: &MemoryCtx<S>) -> InfoNode<S> {
        InfoNode::Label(self.labels[ctx.stage][ctx.belief.accrued().support()])
    }

    fn node_distance(&self, a: &InfoNode<S>, b: &InfoNode<S>) -> Option<S> {
        match (a, b) {
            (InfoNode::Label(a), InfoNode::Label(b)) => {
                Some(S::from_int((*a as i64 - *b as i64).abs()))
            }
            _ => None,
        }
    }
}
