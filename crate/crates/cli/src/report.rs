//! Machine-readable design report (`report.json`).
//!
//! Keys:
//! - `passed`: re-integration fidelities reach `threshold`, the control is
//!   zero at both ends and no discontinuity was flagged.
//! - `threshold`, `gamma`, `seed`, `split`, `duration`.
//! - `target`, `achieved`: pairs as `{"u": [[re, im]; 4], "v": ...}`, row order.
//! - `fidelity`: per-gate `|tr(A†B)|/2` and the matched global sign.
//! - `invariant_residual`: quotient distance between achieved and target.
//! - `min_delta`, `max_amplitude`.
//! - `continuity`: endpoint magnitude, largest sample step, flagged jumps.
//! - `legs`: per-leg target, gauge `K`, goal residual, tracking error,
//!   minimal `Δ` along the plan and duration.
//!
//! Timing is printed, never stored, so the file is a pure function of the
//! configuration and seed.

use serde::Serialize;
use smoothctl::invariants::{invariants_of, UnitaryPair};
use smoothctl::pipeline::{Design, DesignConfig, Leg};
use smoothctl::su::Su2;

#[derive(Debug, Serialize)]
pub struct Matrix {
    pub u: [[f64; 2]; 4],
    pub v: [[f64; 2]; 4],
}

pub fn entries(g: &Su2) -> [[f64; 2]; 4] {
    let m = g.matrix();
    [m[0][0], m[0][1], m[1][0], m[1][1]].map(|z| [z.re, z.im])
}

impl From<&UnitaryPair> for Matrix {
    fn from(p: &UnitaryPair) -> Self {
        Self {
            u: entries(&p.u),
            v: entries(&p.v),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Fidelity {
    pub u: f64,
    pub v: f64,
    pub sign_u: i8,
    pub sign_v: i8,
}

#[derive(Debug, Serialize)]
pub struct Continuity {
    pub endpoint_magnitude: f64,
    pub endpoints_zero: bool,
    pub max_step: f64,
    pub discontinuities: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct LegReport {
    pub target: Matrix,
    pub gauge: [[f64; 2]; 4],
    pub goal_residual: f64,
    pub max_tracking_error: f64,
    pub min_delta: f64,
    pub min_delta_t: f64,
    pub duration: f64,
}

impl From<&Leg> for LegReport {
    fn from(l: &Leg) -> Self {
        Self {
            target: (&l.target).into(),
            gauge: entries(&l.gauge),
            goal_residual: l.steering.goal_residual,
            max_tracking_error: l.steering.max_tracking_error,
            min_delta: l.validation.min_delta,
            min_delta_t: l.validation.min_delta_t,
            duration: l.duration(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DesignReport {
    pub passed: bool,
    pub threshold: f64,
    pub gamma: f64,
    pub seed: u64,
    pub split: bool,
    pub duration: f64,
    pub target: Matrix,
    pub achieved: Matrix,
    pub fidelity: Fidelity,
    pub invariant_residual: f64,
    pub min_delta: f64,
    pub max_amplitude: f64,
    pub continuity: Continuity,
    pub legs: Vec<LegReport>,
}

impl DesignReport {
    pub fn new(config: &DesignConfig, d: &Design, threshold: f64) -> Self {
        let v = &d.verification;
        Self {
            passed: v.passed(threshold),
            threshold,
            gamma: config.gamma,
            seed: config.seed,
            split: d.split,
            duration: d.signal.end() - d.signal.start(),
            target: (&config.target).into(),
            achieved: (&v.achieved).into(),
            fidelity: Fidelity {
                u: v.fidelity_u,
                v: v.fidelity_v,
                sign_u: v.sign_u,
                sign_v: v.sign_v,
            },
            invariant_residual: invariants_of(&v.achieved).distance(&invariants_of(&config.target)),
            min_delta: d.min_delta(),
            max_amplitude: d.signal.max_amplitude(),
            continuity: Continuity {
                endpoint_magnitude: v.endpoint_magnitude,
                endpoints_zero: v.endpoints_zero(),
                max_step: v.max_step,
                discontinuities: v.discontinuities.iter().map(|j| j.t).collect(),
            },
            legs: d.legs.iter().map(LegReport::from).collect(),
        }
    }
}
