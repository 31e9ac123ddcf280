// SPDX-License-Identifier: Apache-2.0

//! Exact exponent bookkeeping for multi-scale incidence bounds on tube families.

pub mod algebraic;
pub mod calculus;
pub mod derivation;
pub mod rational;
pub mod scalar;

pub use rational::{rat, Rational};
pub use scalar::Scalar;
