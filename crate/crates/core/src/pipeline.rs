//! End-to-end design: preliminary phase, quotient plan, validation,
//! steering, gauge fix-up and re-integration check.

use crate::error::Result;
use crate::gauge::{conjugate_signal, solve_gauge, split_singular_target_with, SPLIT_ATTEMPTS};
use crate::integrator::{integrate_pair, steer_on_quotient, StateTrace, Steering, SystemParams, HYDROGEN_CARBON_GAMMA};
use crate::invariants::{delta_of, invariants_of, UnitaryPair};
use crate::prelim::{run_preliminary, PrelimOutcome, PrelimParams};
use crate::signal::{ControlSignal, Discontinuity, ZERO_TOL};
use crate::su::{Su2, Su2Algebra};
use crate::trajectory::{plan_cubic, validate_with_floor, TrajectorySpec, ValidationReport, DELTA_FLOOR};

/// Neighbour factor for the discontinuity detector.
pub const JUMP_FACTOR: f64 = 3.0;

/// Default fidelity threshold for [`Verification::passed`].
pub const VERIFY_THRESHOLD: f64 = 0.999;

#[derive(Clone, Debug, PartialEq)]
pub struct DesignConfig {
    pub gamma: f64,
    pub prelim: PrelimParams,
    pub t2: f64,
    pub target: UnitaryPair,
    pub step: f64,
    pub delta_floor: f64,
    pub seed: u64,
    pub validation_samples: usize,
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self {
            gamma: HYDROGEN_CARBON_GAMMA,
            prelim: PrelimParams::default(),
            t2: 10.0,
            target: crate::gates::hadamard_pair(),
            step: 1e-3,
            delta_floor: DELTA_FLOOR,
            seed: 0,
            validation_samples: 1000,
        }
    }
}

/// One steering leg from the identity to `target`.
#[derive(Clone, Debug)]
pub struct Leg {
    pub target: UnitaryPair,
    pub prelim: PrelimOutcome,
    pub spec: TrajectorySpec,
    pub validation: ValidationReport,
    pub steering: Steering,
    pub gauge: Su2,
    /// Gauge-corrected preliminary and steering controls.
    pub signal: ControlSignal,
    /// Preliminary and steering states, uncorrected.
    pub trace: StateTrace,
}

impl Leg {
    pub fn duration(&self) -> f64 {
        self.signal.end() - self.signal.start()
    }
}

#[derive(Clone, Debug)]
pub struct Design {
    pub legs: Vec<Leg>,
    /// Whether the target was split into two regular legs.
    pub split: bool,
    pub signal: ControlSignal,
    pub verification: Verification,
}

impl Design {
    pub fn min_delta(&self) -> f64 {
        self.legs
            .iter()
            .map(|l| l.validation.min_delta)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Gate fidelity `|tr(A†B)|/2` together with the sign of `tr(A†B)`.
pub fn fidelity(a: &Su2, b: &Su2) -> (f64, i8) {
    let tr = 2.0 * (a.x().conj() * b.x() + a.y().conj() * b.y()).re;
    (0.5 * tr.abs(), if tr < 0.0 { -1 } else { 1 })
}

#[derive(Clone, Debug)]
pub struct Verification {
    pub achieved: UnitaryPair,
    pub fidelity_u: f64,
    pub fidelity_v: f64,
    /// `±1`: which of `±U_target` was matched.
    pub sign_u: i8,
    pub sign_v: i8,
    pub endpoint_magnitude: f64,
    pub max_step: f64,
    pub discontinuities: Vec<Discontinuity>,
}

impl Verification {
    pub fn endpoints_zero(&self) -> bool {
        self.endpoint_magnitude <= ZERO_TOL
    }

    pub fn passed(&self, threshold: f64) -> bool {
        self.fidelity_u >= threshold
            && self.fidelity_v >= threshold
            && self.endpoints_zero()
            && self.discontinuities.is_empty()
    }
}

/// Re-integrates `signal` from `(I, I)` with linear interpolation.
pub fn verify(signal: &ControlSignal, params: &SystemParams, target: &UnitaryPair) -> Result<Verification> {
    let achieved = if signal.is_empty() {
        UnitaryPair::identity()
    } else {
        let s = signal.clone();
        integrate_pair(
            &UnitaryPair::identity(),
            move |t| Su2Algebra::from_components(s.eval(t)),
            params,
            (signal.start(), signal.end()),
        )?
        .0
    };
    let (fidelity_u, sign_u) = fidelity(&achieved.u, &target.u);
    let (fidelity_v, sign_v) = fidelity(&achieved.v, &target.v);
    Ok(Verification {
        achieved,
        fidelity_u,
        fidelity_v,
        sign_u,
        sign_v,
        endpoint_magnitude: signal.endpoint_magnitude(),
        max_step: signal.max_step(),
        discontinuities: signal.discontinuities(JUMP_FACTOR, ZERO_TOL),
    })
}

fn plan_for(
    config: &DesignConfig,
    prelim: &PrelimOutcome,
    target: &UnitaryPair,
) -> Result<(TrajectorySpec, ValidationReport)> {
    let spec = plan_cubic(invariants_of(&prelim.pair), invariants_of(target), config.t2)?;
    let report = validate_with_floor(&spec, config.validation_samples, config.delta_floor)?;
    Ok((spec, report))
}

fn leg_to(config: &DesignConfig, params: &SystemParams, prelim: &PrelimOutcome, target: &UnitaryPair) -> Result<Leg> {
    let (spec, report) = plan_for(config, prelim, target)?;
    let validation = report.into_result()?;
    steer_leg(params, prelim, target, spec, validation)
}

/// Steers from a given preliminary endpoint along `spec` and gauge-fixes to
/// `target`.
pub fn steer_leg(
    params: &SystemParams,
    prelim: &PrelimOutcome,
    target: &UnitaryPair,
    spec: TrajectorySpec,
    validation: ValidationReport,
) -> Result<Leg> {
    let steering = steer_on_quotient(&prelim.pair, &spec, params)?;
    let gauge = solve_gauge(&steering.pair, target)?;
    let signal = conjugate_signal(&gauge, &prelim.signal.concat(&steering.signal));
    let mut trace = prelim.trace.clone();
    trace.append_shifted(&steering.trace, prelim.signal.end());
    Ok(Leg {
        target: *target,
        prelim: prelim.clone(),
        spec,
        validation,
        steering,
        gauge,
        signal,
        trace,
    })
}

/// Full design to `config.target`, splitting singular targets into two
/// regular legs.
pub fn design(config: &DesignConfig) -> Result<Design> {
    let params = SystemParams::new(config.gamma, config.step)?;
    let prelim = run_preliminary(&config.prelim, config.gamma, config.step)?;
    let target = config.target;

    let (legs, split) = if delta_of(&target) >= config.delta_floor {
        (vec![leg_to(config, &params, &prelim, &target)?], false)
    } else {
        let feasible = |leg: &UnitaryPair| {
            delta_of(leg) >= config.delta_floor && plan_for(config, &prelim, leg).is_ok_and(|(_, r)| r.passed)
        };
        let (first, second) =
            split_singular_target_with(&target, config.seed, SPLIT_ATTEMPTS, |a, b| feasible(a) && feasible(b))?;
        (
            vec![
                leg_to(config, &params, &prelim, &first)?,
                leg_to(config, &params, &prelim, &second)?,
            ],
            true,
        )
    };

    let signal = legs
        .iter()
        .skip(1)
        .fold(legs[0].signal.clone(), |acc, l| acc.concat(&l.signal));
    let verification = verify(&signal, &params, &target)?;
    Ok(Design {
        legs,
        split,
        signal,
        verification,
    })
}
