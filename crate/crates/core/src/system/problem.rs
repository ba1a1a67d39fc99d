//! JSON problem files.
//!
//! ```json
//! {
//!   "horizon": 1,
//!   "spaces": {
//!     "states": { "points": ["s0", "s1"], "metric": "explicit", "distances": [["0", "1"], ["1", "0"]] },
//!     "actions": { "points": ["a", "b"], "metric": "discrete" },
//!     "observations": { "points": ["o0", "o1"], "metric": "euclidean", "coordinates": [["0"], ["1"]] },
//!     "disturbances": { "points": ["w"] },
//!     "noises": { "points": ["n0", "n1"] }
//!   },
//!   "initial_range": ["s0", "s1"],
//!   "dynamics": [{ "state": "s0", "action": "a", "disturbance": "w", "output": "s0" }],
//!   "observation": [{ "t": 0, "state": "s0", "noise": "n0", "output": "o0" }],
//!   "cost": [{ "state": "s0", "action": "a", "output": "1/2" }]
//! }
//! ```
//!
//! Records without `t` apply to every stage; records with `t` override them.
//! Numbers may be JSON numbers or strings holding decimals or `p/q`. A file
//! with a `gridworld` section describes the pursuit benchmark instead.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridworld::{build_gridworld, GridConfig};
use crate::scalar::Scalar;
use crate::sets::{FiniteMetricSpace, Norm, PointId};
use crate::system::{Spaces, SystemSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Text(String),
    Number(serde_json::Number),
}

impl Num {
    fn parse<S: Scalar>(&self) -> Result<S> {
        match self {
            Num::Text(s) => S::parse(s),
            Num::Number(n) => S::parse(&n.to_string()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpaceDef {
    pub points: Vec<String>,
    /// `explicit`, `euclidean`, `manhattan`, `chebyshev` or `discrete` (the default).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<Num>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<Vec<Num>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    pub state: String,
    pub action: String,
    pub disturbance: String,
    pub output: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    pub state: String,
    pub noise: String,
    pub output: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    pub state: String,
    pub action: String,
    pub output: Num,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub spaces: BTreeMap<String, SpaceDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial_range: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dynamics: Vec<DynamicsRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observation: Vec<ObservationRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cost: Vec<CostRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gridworld: Option<GridConfig>,
}

const SPACE_NAMES: [&str; 5] = [
    "states",
    "actions",
    "observations",
    "disturbances",
    "noises",
];

impl ProblemFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Builds the system, validating metric axioms and table totality.
    pub fn build<S: Scalar>(&self) -> Result<SystemSpec<S>> {
        if let Some(cfg) = &self.gridworld {
            return build_gridworld(cfg);
        }
        let horizon = self
            .horizon
            .ok_or_else(|| Error::Config("missing horizon".into()))?;
        let mut built = Vec::new();
        for name in SPACE_NAMES {
            let def = self
                .spaces
                .get(name)
                .ok_or_else(|| Error::Config(format!("missing space {name:?}")))?;
            built.push(Arc::new(build_space::<S>(name, def)?));
        }
        if let Some(extra) = self
            .spaces
            .keys()
            .find(|k| !SPACE_NAMES.contains(&k.as_str()))
        {
            return Err(Error::Config(format!("unknown space {extra:?}")));
        }
        let spaces = Spaces {
            states: built[0].clone(),
            actions: built[1].clone(),
            observations: built[2].clone(),
            disturbances: built[3].clone(),
            noises: built[4].clone(),
        };
        let (nx, nu, nw, nn) = (
            spaces.states.len(),
            spaces.actions.len(),
            spaces.disturbances.len(),
            spaces.noises.len(),
        );
        let find = |space: &FiniteMetricSpace<S>, kind: &str, label: &str| {
            space
                .id_of(label)
                .ok_or_else(|| Error::Config(format!("unknown {kind} {label:?}")))
        };
        let stages =
            |t: Option<usize>, last: usize, what: &str| -> Result<std::ops::Range<usize>> {
                match t {
                    None => Ok(0..last + 1),
                    Some(t) if t <= last => Ok(t..t + 1),
                    Some(t) => Err(Error::Config(format!(
                        "{what} record at t={t} is past the last stage {last}"
                    ))),
                }
            };

        let initial = self
            .initial_range
            .iter()
            .map(|l| find(&spaces.states, "initial state", l))
            .collect::<Result<Vec<_>>>()?;

        let mut dynamics = Table::new(horizon, nx * nu * nw);
        if horizon > 0 {
            for r in &self.dynamics {
                let x = find(&spaces.states, "state", &r.state)?;
                let u = find(&spaces.actions, "action", &r.action)?;
                let w = find(&spaces.disturbances, "disturbance", &r.disturbance)?;
                let out = find(&spaces.states, "state", &r.output)?;
                let slot = (x.index() * nu + u.index()) * nw + w.index();
                for t in stages(r.t, horizon - 1, "dynamics")? {
                    dynamics.set(t, slot, r.t.is_some(), out, "dynamics")?;
                }
            }
        } else if !self.dynamics.is_empty() {
            return Err(Error::Config(
                "dynamics records given for a zero horizon".into(),
            ));
        }
        let mut observation = Table::new(horizon + 1, nx * nn);
        for r in &self.observation {
            let x = find(&spaces.states, "state", &r.state)?;
            let n = find(&spaces.noises, "noise", &r.noise)?;
            let out = find(&spaces.observations, "observation", &r.output)?;
            for t in stages(r.t, horizon, "observation")? {
                observation.set(
                    t,
                    x.index() * nn + n.index(),
                    r.t.is_some(),
                    out,
                    "observation",
                )?;
            }
        }
        let mut cost = Table::new(horizon + 1, nx * nu);
        for r in &self.cost {
            let x = find(&spaces.states, "state", &r.state)?;
            let u = find(&spaces.actions, "action", &r.action)?;
            let v: S = r.output.parse()?;
            for t in stages(r.t, horizon, "cost")? {
                cost.set(t, x.index() * nu + u.index(), r.t.is_some(), v, "cost")?;
            }
        }

        let dynamics = dynamics.finish("dynamics", |i| {
            format!(
                "state {} action {} disturbance {}",
                i / (nu * nw),
                (i / nw) % nu,
                i % nw
            )
        })?;
        let observation = observation.finish("observation", |i| {
            format!("state {} noise {}", i / nn, i % nn)
        })?;
        let cost = cost.finish("cost", |i| format!("state {} action {}", i / nu, i % nu))?;
        SystemSpec::from_fn(
            horizon,
            spaces,
            &initial,
            |t, x, u, w| dynamics[t][(x.index() * nu + u.index()) * nw + w.index()],
            |t, x, n| observation[t][x.index() * nn + n.index()],
            |t, x, u| cost[t][x.index() * nu + u.index()],
        )
    }

    /// Explicit serialization of a system: every space as a distance table,
    /// every record with its stage.
    pub fn from_spec<S: Scalar>(spec: &SystemSpec<S>) -> Self {
        let space_def = |space: &FiniteMetricSpace<S>| SpaceDef {
            points: space.points().iter().map(|p| p.label.clone()).collect(),
            metric: Some("explicit".into()),
            distances: Some(
                space
                    .ids()
                    .map(|a| {
                        space
                            .ids()
                            .map(|b| Num::Text(space.distance(a, b).render()))
                            .collect()
                    })
                    .collect(),
            ),
            coordinates: None,
        };
        let spaces = [
            &spec.states,
            &spec.actions,
            &spec.observations,
            &spec.disturbances,
            &spec.noises,
        ];
        let label = |space: &FiniteMetricSpace<S>, p: PointId| space.label(p).to_string();
        let mut file = ProblemFile {
            horizon: Some(spec.horizon()),
            spaces: SPACE_NAMES
                .iter()
                .zip(spaces)
                .map(|(n, s)| (n.to_string(), space_def(s)))
                .collect(),
            initial_range: spec
                .initial()
                .iter()
                .map(|&x| label(&spec.states, x))
                .collect(),
            ..Default::default()
        };
        for t in 0..=spec.horizon() {
            for x in spec.states.ids() {
                for u in spec.actions.ids() {
                    if t < spec.horizon() {
                        for w in spec.disturbances.ids() {
                            file.dynamics.push(DynamicsRecord {
                                t: Some(t),
                                state: label(&spec.states, x),
                                action: label(&spec.actions, u),
                                disturbance: label(&spec.disturbances, w),
                                output: label(&spec.states, spec.next_state(t, x, u, w)),
                            });
                        }
                    }
                    file.cost.push(CostRecord {
                        t: Some(t),
                        state: label(&spec.states, x),
                        action: label(&spec.actions, u),
                        output: Num::Text(spec.cost(t, x, u).render()),
                    });
                }
                for n in spec.noises.ids() {
                    file.observation.push(ObservationRecord {
                        t: Some(t),
                        state: label(&spec.states, x),
                        noise: label(&spec.noises, n),
                        output: label(&spec.observations, spec.observe(t, x, n)),
                    });
                }
            }
        }
        file
    }
}

fn build_space<S: Scalar>(name: &str, def: &SpaceDef) -> Result<FiniteMetricSpace<S>> {
    let ctx = |e: Error| Error::Config(format!("space {name:?}: {e}"));
    let labels = def.points.clone();
    let parse_rows = |rows: &Vec<Vec<Num>>| -> Result<Vec<Vec<S>>> {
        rows.iter()
            .map(|row| row.iter().map(|v| v.parse::<S>()).collect())
            .collect()
    };
    match def.metric.as_deref().unwrap_or("discrete") {
        "discrete" => FiniteMetricSpace::discrete(labels).map_err(ctx),
        "explicit" => {
            let rows = def
                .distances
                .as_ref()
                .ok_or_else(|| ctx(Error::Config("explicit metric needs distances".into())))?;
            FiniteMetricSpace::from_table(labels, parse_rows(rows).map_err(ctx)?).map_err(ctx)
        }
        other => {
            let norm: Norm = other.parse().map_err(ctx)?;
            let rows = def
                .coordinates
                .as_ref()
                .ok_or_else(|| ctx(Error::Config(format!("{other} metric needs coordinates"))))?;
            FiniteMetricSpace::from_coordinates(labels, parse_rows(rows).map_err(ctx)?, norm)
                .map_err(ctx)
        }
    }
}

/// Per-stage dense table filled from general and stage-specific records.
struct Table<V> {
    cells: Vec<Vec<Option<(V, bool)>>>,
}

impl<V: Copy + PartialEq + std::fmt::Debug> Table<V> {
    fn new(stages: usize, width: usize) -> Self {
        Table {
            cells: vec![vec![None; width]; stages],
        }
    }

    fn set(&mut self, t: usize, slot: usize, specific: bool, v: V, what: &str) -> Result<()> {
        let cell = &mut self.cells[t][slot];
        match *cell {
            Some((old, old_specific)) if old_specific == specific && old != v => {
                Err(Error::Config(format!(
                    "conflicting {what} records at t={t}, entry {slot}: {old:?} and {v:?}"
                )))
            }
            Some((_, true)) if !specific => Ok(()),
            _ => {
                *cell = Some((v, specific));
                Ok(())
            }
        }
    }

    fn finish(self, what: &str, describe: impl Fn(usize) -> String) -> Result<Vec<Vec<V>>> {
        self.cells
            .into_iter()
            .enumerate()
            .map(|(t, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(i, c)| {
                        c.map(|(v, _)| v).ok_or_else(|| {
                            Error::InvalidSystem(format!(
                                "{what} undefined at t={t} for {}",
                                describe(i)
                            ))
                        })
                    })
                    .collect()
            })
            .collect()
    }
}
