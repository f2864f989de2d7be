//! Smooth control design for right-invariant quantum systems by symmetry
//! reduction.
//!
//! The central system is a pair of spin-½ particles in a common field,
//! `U̇ = σU`, `V̇ = γσV` on SU(2)×SU(2), reduced by simultaneous conjugation
//! to a three-dimensional quotient. A design runs a preliminary pulse off the
//! singular stratum, tracks a cubic quotient trajectory through `Π⁻¹`, and
//! conjugates the result into the requested gate.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod export;
pub mod gates;
pub mod gauge;
pub mod integrator;
pub mod invariants;
pub mod pipeline;
pub mod prelim;
pub mod reduction;
pub mod signal;
pub mod su;
pub mod trajectory;
pub mod worked;

pub use error::{Error, Result};
pub use gauge::{adjoint_matrix, conjugate_signal, remove_drift, solve_gauge, split_singular_target, DriftFrame};
pub use integrator::{integrate_pair, integrate_reduced, reduced_rhs, steer_on_quotient, SystemParams};
pub use invariants::{cylinder_coords, delta_of, invariants_of, is_singular, InvariantPoint, UnitaryPair};
pub use pipeline::{design, verify, Design, DesignConfig, Verification};
pub use prelim::{prelim_sigma, run_preliminary, shape_functions, PrelimParams};
pub use reduction::{pi_det, pi_inverse_times, pi_of, PiMatrix};
pub use signal::{ControlSample, ControlSignal};
pub use su::{conjugate, exp_su2, random_su2, Su2, Su2Algebra, Su3, C64};
pub use trajectory::{plan_cubic, validate, TrajectorySpec, ValidationReport};
