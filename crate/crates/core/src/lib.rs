//! Worst-case control of finite partially observed systems.
//!
//! The crate builds max-plus cost distributions on finite metric spaces,
//! enumerates the memories of a finite system, compresses them into
//! information states and solves the resulting dynamic programs, exactly or
//! approximately with explicit error bounds.

pub mod distribution;
pub mod dp;
pub mod error;
pub mod fixtures;
pub mod gridworld;
pub mod info;
pub mod report;
pub mod scalar;
pub mod sets;
pub mod system;

pub use error::{Error, Result};
pub use scalar::{Float, Rational, Scalar};
