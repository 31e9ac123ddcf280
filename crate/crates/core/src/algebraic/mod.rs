// SPDX-License-Identifier: Apache-2.0

//! Exact quadratic-field arithmetic and low-degree rational maps.

pub mod map;
pub mod quadratic;

pub use map::{
    FixedPoints, IterateError, IterateOptions, MapError, Monotonicity, Polynomial, RationalMap, Rounding,
    StopReason, Trajectory,
};
pub use quadratic::{squarefree_decompose, FieldError, QuadraticNumber};

use crate::rational::rat;

/// The fixed point of the α′ map inside (0, 1]: `(75 − 3√145)/40`.
pub fn alpha_star() -> QuadraticNumber {
    QuadraticNumber::new(rat(75, 40), rat(-3, 40), 145).expect("145 is squarefree")
}

/// `4 − α″(α*)` = `(159 + √145)/56`.
pub fn d0() -> QuadraticNumber {
    QuadraticNumber::new(rat(159, 56), rat(1, 56), 145).expect("145 is squarefree")
}
