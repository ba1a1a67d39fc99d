//! Shared small systems: the two-state desk system and a random generator
//! of tiny systems for exhaustive checks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::scalar::{Rational, Scalar};
use crate::sets::{FiniteMetricSpace, PointId};
use crate::system::problem::ProblemFile;
use crate::system::{Spaces, SystemSpec};

/// JSON text of the desk system: two states on a unit line, actions `stay`
/// and `swap`, one disturbance and an observation that reveals `x0` only
/// under one of two noises. Horizon 1, integer costs.
pub const DESK1_JSON: &str = include_str!("../../../configs/desk1.json");

pub fn desk1<S: Scalar>() -> SystemSpec<S> {
    ProblemFile::from_json(DESK1_JSON)
        .and_then(|p| p.build())
        .expect("the desk system is well formed")
}

/// The desk system with interim costs that depend on the action only.
pub fn desk1_action_costs<S: Scalar>() -> SystemSpec<S> {
    desk1::<S>()
        .with_costs(|t, x, u| match t {
            0 => S::from_int(1 + 2 * u.index() as i64),
            _ => S::from_int(x.index() as i64 + u.index() as i64),
        })
        .expect("nonnegative costs")
}

/// Shape restrictions for [`random_small_spec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// No restriction.
    Generic,
    /// Observations equal the state, whatever the noise.
    PerfectlyObserved,
    /// Interim costs depend on the action only.
    ActionCosts,
}

fn labelled(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// A random system with at most 3 states, 2 actions, 2 observations,
/// 2 disturbances, 2 noises and horizon at most 2. States sit on an integer
/// line at random distinct positions; costs are multiples of 1/2 in `[0, 3]`.
pub fn random_small_spec<R: Rng + ?Sized>(
    rng: &mut R,
    variant: Variant,
) -> Result<SystemSpec<Rational>> {
    let nx = rng.gen_range(1..=3);
    let nu = rng.gen_range(1..=2);
    let ny = if variant == Variant::PerfectlyObserved {
        nx
    } else {
        rng.gen_range(1..=2)
    };
    let nw = rng.gen_range(1..=2);
    let nn = rng.gen_range(1..=2);
    let horizon = rng.gen_range(0..=2);

    let mut positions: Vec<i64> = (0..6).collect();
    positions.shuffle(rng);
    positions.truncate(nx);
    let states = Arc::new(FiniteMetricSpace::from_coordinates(
        labelled("x", nx),
        positions
            .iter()
            .map(|&p| vec![Rational::from_int(p)])
            .collect(),
        crate::sets::Norm::Euclidean,
    )?);
    let spaces = Spaces {
        states,
        actions: Arc::new(FiniteMetricSpace::discrete(labelled("u", nu))?),
        observations: Arc::new(FiniteMetricSpace::discrete(labelled("y", ny))?),
        disturbances: Arc::new(FiniteMetricSpace::discrete(labelled("w", nw))?),
        noises: Arc::new(FiniteMetricSpace::discrete(labelled("n", nn))?),
    };

    let mut initial: Vec<PointId> = (0..nx)
        .filter(|_| rng.gen_bool(0.7))
        .map(PointId::from_index)
        .collect();
    if initial.is_empty() {
        initial.push(PointId::from_index(rng.gen_range(0..nx)));
    }
    let dynamics: Vec<usize> = (0..horizon * nx * nu * nw)
        .map(|_| rng.gen_range(0..nx))
        .collect();
    let observation: Vec<usize> = (0..(horizon + 1) * nx * nn)
        .map(|_| rng.gen_range(0..ny))
        .collect();
    let mut half = |_: usize| Rational::from_ratio(rng.gen_range(0..=6), 2);
    let action_cost: Vec<Rational> = (0..(horizon + 1) * nu).map(&mut half).collect();
    let cost: Vec<Rational> = (0..(horizon + 1) * nx * nu).map(&mut half).collect();

    SystemSpec::from_fn(
        horizon,
        spaces,
        &initial,
        |t, x, u, w| {
            PointId::from_index(dynamics[((t * nx + x.index()) * nu + u.index()) * nw + w.index()])
        },
        |t, x, n| match variant {
            Variant::PerfectlyObserved => x,
            _ => PointId::from_index(observation[(t * nx + x.index()) * nn + n.index()]),
        },
        |t, x, u| match variant {
            Variant::ActionCosts if t < horizon => action_cost[t * nu + u.index()],
            _ => cost[(t * nx + x.index()) * nu + u.index()],
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn desk_shape() {
        let spec = desk1::<Rational>();
        assert_eq!(
            [
                spec.states.len(),
                spec.actions.len(),
                spec.observations.len(),
                spec.disturbances.len(),
                spec.noises.len()
            ],
            [2, 2, 2, 1, 2]
        );
        assert_eq!(spec.horizon(), 1);
        assert!(!spec.interim_costs_action_only());
        assert!(desk1_action_costs::<Rational>().interim_costs_action_only());
    }

    #[test]
    fn variants_have_their_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let s = random_small_spec(&mut rng, Variant::ActionCosts).unwrap();
            assert!(s.interim_costs_action_only());
            let s = random_small_spec(&mut rng, Variant::PerfectlyObserved).unwrap();
            for x in s.states.ids() {
                assert_eq!(s.observe(0, x, PointId(0)), x);
            }
        }
    }
}
