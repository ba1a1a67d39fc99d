//! Information states: compressions of memories that keep the accrued
//! distributions needed by the dynamic program, exactly or up to a bounded
//! distance.

mod map;
mod node;
mod quantize;

pub use map::{
    compute_epsilons, info_state_map, validate_info_state, Counterexample, InfoStateMap,
    ValidationReport,
};
pub use node::{
    render_node, Compressor, ConditionalRange, Identity, InfoNode, JointRange, NormalizedAccrued,
    PerfectObservation, RandomLabels,
};
pub use quantize::{quantizer, QuantizedRange, Quantizer};

use crate::error::Result;
use crate::scalar::Scalar;
use crate::system::SystemSpec;

/// Case 1: the normalized accrued distribution.
pub fn normalized_accrued_info<S: Scalar>(spec: &SystemSpec<S>) -> InfoStateMap<S> {
    info_state_map(spec, NormalizedAccrued::new(spec))
}

/// Case 2: the state itself, for perfectly observed systems.
pub fn perfect_observation_info<S: Scalar>(spec: &SystemSpec<S>) -> Result<InfoStateMap<S>> {
    Ok(info_state_map(spec, PerfectObservation::new(spec)?))
}

/// Case 3: the conditional range, for systems with action-dependent interim costs.
pub fn conditional_range_info<S: Scalar>(spec: &SystemSpec<S>) -> Result<InfoStateMap<S>> {
    Ok(info_state_map(spec, ConditionalRange::new(spec)?))
}

/// The joint range of states and accrued costs.
pub fn joint_range_info<S: Scalar>(spec: &SystemSpec<S>) -> InfoStateMap<S> {
    info_state_map(spec, JointRange)
}

/// The quantized composite range of a gridworld system.
pub fn quantized_range_info<S: Scalar>(
    spec: &SystemSpec<S>,
    quantizer: Quantizer,
) -> Result<InfoStateMap<S>> {
    Ok(info_state_map(spec, QuantizedRange::new(spec, quantizer)?))
}
