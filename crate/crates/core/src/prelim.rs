//! Preliminary control moving the pair off the singular stratum.
//!
//! `U(t) = [[cos δ, e^{iε} sin δ], [−e^{−iε} sin δ, cos δ]]` with smooth
//! shape functions whose derivatives vanish at both ends, so `σ = U̇U†`
//! switches on and off continuously.

use crate::error::{Error, Result};
use crate::integrator::{integrate_pair_unchecked, StateTrace};
use crate::invariants::UnitaryPair;
use crate::signal::ControlSignal;
use crate::su::{Su2, Su2Algebra, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrelimParams {
    delta0: f64,
    epsilon0: f64,
    t1: f64,
}

impl PrelimParams {
    pub fn new(delta0: f64, epsilon0: f64, t1: f64) -> Result<Self> {
        if !delta0.is_finite() || delta0.sin().abs() < 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "delta0 must be nonzero mod pi, got {delta0}"
            )));
        }
        if !epsilon0.is_finite() || epsilon0 == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon0 must be nonzero, got {epsilon0}"
            )));
        }
        if !(t1 > 0.0 && t1.is_finite()) {
            return Err(Error::InvalidParameter(format!("t1 must be positive, got {t1}")));
        }
        Ok(Self { delta0, epsilon0, t1 })
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn epsilon0(&self) -> f64 {
        self.epsilon0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }
}

impl Default for PrelimParams {
    fn default() -> Self {
        Self {
            delta0: 0.5,
            epsilon0: 1.0,
            t1: 1.0,
        }
    }
}

/// `δ, ε` and their time derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shape {
    pub delta: f64,
    pub epsilon: f64,
    pub ddelta: f64,
    pub depsilon: f64,
}

pub fn shape_functions(params: &PrelimParams, t: f64) -> Result<Shape> {
    if !(0.0..=params.t1).contains(&t) {
        return Err(Error::OutOfRange {
            t,
            lo: 0.0,
            hi: params.t1,
        });
    }
    Ok(shape_at(params, t))
}

fn shape_at(params: &PrelimParams, t: f64) -> Shape {
    let s = (t / params.t1).clamp(0.0, 1.0);
    let (d0, e0) = (params.delta0, params.epsilon0);
    let bump = 6.0 * (s - s * s) / params.t1;
    Shape {
        delta: 6.0 * d0 * (s * s / 2.0 - s * s * s / 3.0),
        epsilon: e0 + 6.0 * e0 * (s * s * s / 3.0 - s * s / 2.0),
        ddelta: d0 * bump,
        depsilon: -e0 * bump,
    }
}

/// `U(t)` in closed form.
pub fn prelim_u(params: &PrelimParams, t: f64) -> Result<Su2> {
    let sh = shape_functions(params, t)?;
    Ok(u_of(&sh))
}

fn u_of(sh: &Shape) -> Su2 {
    Su2::new(
        C64::new(sh.delta.cos(), 0.0),
        C64::from_polar(sh.delta.sin(), sh.epsilon),
    )
}

/// `σ(t) = U̇U†`.
pub fn prelim_sigma(params: &PrelimParams, t: f64) -> Result<Su2Algebra> {
    let sh = shape_functions(params, t)?;
    Ok(sigma_of(&sh))
}

fn sigma_of(sh: &Shape) -> Su2Algebra {
    let phase = C64::from_polar(1.0, sh.epsilon);
    let s12 = (C64::new(sh.ddelta, 0.0) + C64::new(0.0, 0.5 * sh.depsilon * (2.0 * sh.delta).sin())) * phase;
    let uz = sh.depsilon * sh.delta.sin().powi(2);
    Su2Algebra::new(s12.im, s12.re, uz)
}

#[derive(Clone, Debug)]
pub struct PrelimOutcome {
    /// `(U(T₁), V(T₁))` with `U` in closed form.
    pub pair: UnitaryPair,
    pub signal: ControlSignal,
    pub trace: StateTrace,
    /// Distance between the integrated and closed-form `U(T₁)`.
    pub u_residual: f64,
}

/// Runs the preliminary phase from `(I, I)`.
///
/// Any finite `γ` is accepted, including `γ = 1`.
pub fn run_preliminary(params: &PrelimParams, gamma: f64, step: f64) -> Result<PrelimOutcome> {
    let p = *params;
    let out = integrate_pair_unchecked(
        &UnitaryPair::identity(),
        move |t| sigma_of(&shape_at(&p, t)),
        gamma,
        step,
        (0.0, params.t1),
    )?;
    let u = u_of(&shape_at(params, params.t1));
    Ok(PrelimOutcome {
        pair: UnitaryPair::new(u, out.pair.v),
        signal: out.signal,
        trace: out.trace,
        u_residual: out.pair.u.max_entry_diff(&u),
    })
}
