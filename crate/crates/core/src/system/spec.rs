use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sets::{FiniteMetricSpace, PointId};

pub type Space<S> = Arc<FiniteMetricSpace<S>>;

/// A finite partially observed system over a horizon `0..=T`.
///
/// `X_{t+1} = f_t(X_t, U_t, W_t)`, `Y_t = h_t(X_t, N_t)` and stage cost
/// `c_t(X_t, U_t) >= 0`. Tables are dense and stored per stage.
#[derive(Debug)]
pub struct SystemSpec<S> {
    horizon: usize,
    pub states: Space<S>,
    pub actions: Space<S>,
    pub observations: Space<S>,
    pub disturbances: Space<S>,
    pub noises: Space<S>,
    initial: Vec<PointId>,
    /// `dynamics[t][(x * |U| + u) * |W| + w]` for `t < T`.
    dynamics: Vec<Vec<PointId>>,
    /// `observation[t][x * |N| + n]` for `t <= T`.
    observation: Vec<Vec<PointId>>,
    /// `cost[t][x * |U| + u]` for `t <= T`.
    cost: Vec<Vec<S>>,
}

/// The five spaces of a system, in the order states, actions, observations,
/// disturbances, noises.
#[derive(Clone, Debug)]
pub struct Spaces<S> {
    pub states: Space<S>,
    pub actions: Space<S>,
    pub observations: Space<S>,
    pub disturbances: Space<S>,
    pub noises: Space<S>,
}

impl<S: Scalar> SystemSpec<S> {
    /// Tabulates the three model functions and checks that they are total,
    /// land in the right spaces and that costs are nonnegative.
    pub fn from_fn(
        horizon: usize,
        spaces: Spaces<S>,
        initial: &[PointId],
        f: impl Fn(usize, PointId, PointId, PointId) -> PointId,
        h: impl Fn(usize, PointId, PointId) -> PointId,
        c: impl Fn(usize, PointId, PointId) -> S,
    ) -> Result<Self> {
        let Spaces {
            states,
            actions,
            observations,
            disturbances,
            noises,
        } = spaces;
        for (name, space) in [
            ("states", &states),
            ("actions", &actions),
            ("observations", &observations),
            ("disturbances", &disturbances),
            ("noises", &noises),
        ] {
            if space.is_empty() {
                return Err(Error::InvalidSystem(format!("{name} space is empty")));
            }
        }
        let mut init: Vec<PointId> = initial.to_vec();
        init.sort();
        init.dedup();
        if init.is_empty() {
            return Err(Error::InvalidSystem("initial range is empty".into()));
        }
        if let Some(x) = init.iter().find(|x| !states.contains(**x)) {
            return Err(Error::InvalidSystem(format!(
                "initial state {x} is not a state"
            )));
        }

        let (nx, nu, nw, nn) = (
            states.len(),
            actions.len(),
            disturbances.len(),
            noises.len(),
        );
        let mut dynamics = Vec::with_capacity(horizon);
        for t in 0..horizon {
            let mut table = Vec::with_capacity(nx * nu * nw);
            for x in states.ids() {
                for u in actions.ids() {
                    for w in disturbances.ids() {
                        let next = f(t, x, u, w);
                        if !states.contains(next) {
                            return Err(Error::InvalidSystem(format!(
                                "dynamics at t={t}, x={}, u={}, w={} leave the state space",
                                x.0, u.0, w.0
                            )));
                        }
                        table.push(next);
                    }
                }
            }
            dynamics.push(table);
        }
        let mut observation = Vec::with_capacity(horizon + 1);
        let mut cost = Vec::with_capacity(horizon + 1);
        for t in 0..=horizon {
            let mut table = Vec::with_capacity(nx * nn);
            for x in states.ids() {
                for n in noises.ids() {
                    let y = h(t, x, n);
                    if !observations.contains(y) {
                        return Err(Error::InvalidSystem(format!(
                            "observation at t={t}, x={}, n={} is not an observation",
                            x.0, n.0
                        )));
                    }
                    table.push(y);
                }
            }
            observation.push(table);
            let mut table = Vec::with_capacity(nx * nu);
            for x in states.ids() {
                for u in actions.ids() {
                    let v = c(t, x, u);
                    if v < S::zero() {
                        return Err(Error::InvalidSystem(format!(
                            "negative cost {v} at t={t}, x={}, u={}",
                            x.0, u.0
                        )));
                    }
                    table.push(v);
                }
            }
            cost.push(table);
        }
        Ok(SystemSpec {
            horizon,
            states,
            actions,
            observations,
            disturbances,
            noises,
            initial: init,
            dynamics,
            observation,
            cost,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Sorted initial range `X_0`.
    pub fn initial(&self) -> &[PointId] {
        &self.initial
    }

    pub fn spaces(&self) -> Spaces<S> {
        Spaces {
            states: self.states.clone(),
            actions: self.actions.clone(),
            observations: self.observations.clone(),
            disturbances: self.disturbances.clone(),
            noises: self.noises.clone(),
        }
    }

    #[inline]
    pub fn next_state(&self, t: usize, x: PointId, u: PointId, w: PointId) -> PointId {
        let (nu, nw) = (self.actions.len(), self.disturbances.len());
        self.dynamics[t][(x.index() * nu + u.index()) * nw + w.index()]
    }

    #[inline]
    pub fn observe(&self, t: usize, x: PointId, n: PointId) -> PointId {
        self.observation[t][x.index() * self.noises.len() + n.index()]
    }

    #[inline]
    pub fn cost(&self, t: usize, x: PointId, u: PointId) -> S {
        self.cost[t][x.index() * self.actions.len() + u.index()]
    }

    /// `true` when `c_t` does not depend on the state for every `t < T`.
    pub fn interim_costs_action_only(&self) -> bool {
        (0..self.horizon).all(|t| {
            self.actions.ids().all(|u| {
                let first = self.cost(t, PointId(0), u);
                self.states.ids().all(|x| self.cost(t, x, u) == first)
            })
        })
    }

    /// `true` when every stage cost is zero.
    pub fn costs_vanish(&self) -> bool {
        self.cost.iter().flatten().all(|c| c.is_zero())
    }

    /// Same system with a different cost function.
    pub fn with_costs(&self, c: impl Fn(usize, PointId, PointId) -> S) -> Result<Self> {
        SystemSpec::from_fn(
            self.horizon,
            self.spaces(),
            &self.initial,
            |t, x, u, w| self.next_state(t, x, u, w),
            |t, x, n| self.observe(t, x, n),
            c,
        )
    }
}
