//! Named single-qubit gates.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::invariants::UnitaryPair;
use crate::su::{Su2, C64};

/// `[[1, 1], [−1, 1]]/√2`.
pub fn hadamard1() -> Su2 {
    Su2::new(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0))
}

/// `[[1, −i], [−i, 1]]/√2`.
pub fn hadamard2() -> Su2 {
    Su2::new(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, -FRAC_1_SQRT_2))
}

/// `(H₁, H₂)`.
pub fn hadamard_pair() -> UnitaryPair {
    UnitaryPair::new(hadamard1(), hadamard2())
}

/// Looks up `hadamard1`, `hadamard2` or `identity`.
pub fn named(name: &str) -> Option<Su2> {
    match name.trim().to_ascii_lowercase().as_str() {
        "hadamard1" => Some(hadamard1()),
        "hadamard2" => Some(hadamard2()),
        "identity" => Some(Su2::identity()),
        _ => None,
    }
}
