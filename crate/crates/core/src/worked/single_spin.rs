//! Single spin-½: `U̇ = [[0, α], [−α*, 0]] U` on SU(2), with the diagonal
//! subgroup as symmetry and the unit disc `z = u₁₁` as quotient.

use super::bump;
use crate::error::{Error, Result};
use crate::gauge::conjugate_signal;
use crate::integrator::{integrate_su2, DEFAULT_STEP};
use crate::signal::ControlSignal;
use crate::su::{Su2, Su2Algebra, C64};

/// Below this `|u₂₁|` the point is treated as diagonal.
pub const REGULAR_TOL: f64 = 1e-9;

/// A point of the open unit disc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscPoint {
    pub z: C64,
}

impl DiscPoint {
    /// Requires `|z| < 1 − 1e−9`.
    pub fn new(z: C64) -> Result<Self> {
        if !(z.norm() < 1.0 - REGULAR_TOL) {
            return Err(Error::BoundaryPoint { modulus: z.norm() });
        }
        Ok(Self { z })
    }
}

/// Orbit coordinate `u₁₁`.
pub fn disc_point(u: &Su2) -> Result<DiscPoint> {
    DiscPoint::new(u.x())
}

/// `[[0, α], [−α*, 0]]` in component form.
pub fn spin_generator(alpha: C64) -> Su2Algebra {
    Su2Algebra::new(alpha.im, alpha.re, 0.0)
}

/// `α = ż_d / u₂₁`.
pub fn single_spin_control(u: &Su2, zdot_d: C64) -> Result<C64> {
    let u21 = -u.y().conj();
    if !(u21.norm() >= REGULAR_TOL) {
        return Err(Error::SingularPoint { value: u21.norm() });
    }
    Ok(zdot_d / u21)
}

/// Demo schedule: a real nudge of angle `nudge` over `t1`, then a straight
/// disc path over `t2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinDemo {
    pub nudge: f64,
    pub t1: f64,
    pub t2: f64,
    pub step: f64,
}

impl Default for SpinDemo {
    fn default() -> Self {
        Self {
            nudge: 0.5,
            t1: 1.0,
            t2: 5.0,
            step: DEFAULT_STEP,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpinDesign {
    /// Endpoint of the uncorrected design; same orbit as the target.
    pub achieved: Su2,
    /// Diagonal gauge element.
    pub gauge: Su2,
    /// Gauge-corrected controls as `(Im α, Re α, 0)`.
    pub signal: ControlSignal,
    /// Re-integrated endpoint of `signal` from the identity.
    pub verified: Su2,
    pub fidelity: f64,
}

pub(crate) fn su2_fidelity(a: &Su2, b: &Su2) -> f64 {
    let tr = 2.0 * (a.x().conj() * b.x() + a.y().conj() * b.y()).re;
    0.5 * tr.abs()
}

pub fn design_single_spin(target: &Su2, demo: &SpinDemo) -> Result<SpinDesign> {
    let zf = disc_point(target)?.z;
    if !(demo.t1 > 0.0 && demo.t2 > 0.0) || demo.nudge.sin().abs() < REGULAR_TOL {
        return Err(Error::InvalidParameter(
            "spin demo needs t1, t2 > 0 and a nonzero nudge".into(),
        ));
    }
    let (t1, t2) = (demo.t1, demo.t2);
    let a = demo.nudge;
    let (u1, nudge) = integrate_su2(
        &Su2::identity(),
        |t, _| Ok(spin_generator(C64::new(a * bump(t / t1) / t1, 0.0))),
        demo.step,
        (0.0, t1),
    )?;
    let z0 = u1.x();
    let (achieved, steer) = integrate_su2(
        &u1,
        |t, u| {
            let zdot = (zf - z0) * (bump((t / t2).clamp(0.0, 1.0)) / t2);
            single_spin_control(u, zdot).map(spin_generator)
        },
        demo.step,
        (0.0, t2),
    )?;

    let y_hat = achieved.y();
    if !(y_hat.norm() >= REGULAR_TOL) {
        return Err(Error::SingularPoint { value: y_hat.norm() });
    }
    let chi = 0.5 * (target.y() / y_hat).arg();
    let gauge = Su2::new(C64::from_polar(1.0, chi), C64::new(0.0, 0.0));
    let signal = conjugate_signal(&gauge, &nudge.concat(&steer));

    let s = signal.clone();
    let (verified, _) = integrate_su2(
        &Su2::identity(),
        move |t, _| Ok(Su2Algebra::from_components(s.eval(t))),
        demo.step,
        (signal.start(), signal.end()),
    )?;
    Ok(SpinDesign {
        achieved,
        gauge,
        fidelity: su2_fidelity(&verified, target),
        signal,
        verified,
    })
}
