//! The single spin on SU(2) and the Λ-configuration three-level system on
//! SU(3), each with a closed-form control extraction and an end-to-end demo.

pub mod lambda;
pub mod single_spin;

pub use lambda::{
    canonical_form, design_lambda, lambda_controls, lambda_coords, lambda_dhat, lambda_generator, LambdaCoords,
    LambdaDemo, LambdaDesign, LambdaSample,
};
pub use single_spin::{design_single_spin, disc_point, single_spin_control, DiscPoint, SpinDemo, SpinDesign};

/// `6s(1−s)`: unit-area bump vanishing at both ends.
pub(crate) fn bump(s: f64) -> f64 {
    6.0 * s * (1.0 - s)
}

/// `30s²(1−s)²`: unit-area bump that also has zero slope at both ends.
pub(crate) fn bump2(s: f64) -> f64 {
    30.0 * s * s * (1.0 - s) * (1.0 - s)
}

/// `3s² − 2s³`.
pub(crate) fn smoothstep(s: f64) -> f64 {
    s * s * (3.0 - 2.0 * s)
}
