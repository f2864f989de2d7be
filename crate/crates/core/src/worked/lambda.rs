//! Λ-configuration three-level system on SU(3): controls couple level 1 to
//! levels 2 and 3, the symmetry group is S(U(1)×U(2)) and the regular
//! quotient is the open bidisc in `(z₁, z₂)`.

use nalgebra::{Matrix2, Matrix3};

use super::{bump, bump2};
use crate::error::{Error, Result};
use crate::su::{Su3, C64};

/// Below this `|D̂|` the point is treated as singular.
pub const REGULAR_TOL: f64 = 1e-9;

/// Smallest `1 − |z₂|` allowed along a planned demo path.
pub const PATH_MARGIN: f64 = 1e-3;

/// Orbit coordinates `(z₁, T)` and the derived `z₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaCoords {
    pub z1: C64,
    pub t: C64,
    pub z2: C64,
}

impl LambdaCoords {
    /// `z₂ = (T* − z₁T)/(1 − |z₁|²)`.
    pub fn from_z1_t(z1: C64, t: C64) -> Result<Self> {
        let m = z1.norm();
        if !(m < 1.0 - REGULAR_TOL) {
            return Err(Error::BoundaryPoint { modulus: m });
        }
        Ok(Self {
            z1,
            t,
            z2: (t.conj() - z1 * t) / (1.0 - z1.norm_sqr()),
        })
    }

    pub fn is_regular(&self) -> bool {
        self.z1.norm() < 1.0 - REGULAR_TOL && self.z2.norm() < 1.0 - REGULAR_TOL
    }
}

/// `D̂ = u₁₃* u₂₁ − u₃₁ u₁₂*`.
pub fn lambda_dhat(u: &Su3) -> C64 {
    dhat_of(u.matrix())
}

fn dhat_of(m: &Matrix3<C64>) -> C64 {
    m[(0, 2)].conj() * m[(1, 0)] - m[(2, 0)] * m[(0, 1)].conj()
}

/// `(α, β)` moving `(z₁, T)` with velocities `(ż₁, Ṫ)`.
pub fn lambda_controls(u: &Su3, z1dot_d: C64, tdot_d: C64) -> Result<(C64, C64)> {
    controls_of(u.matrix(), z1dot_d, tdot_d)
}

fn controls_of(m: &Matrix3<C64>, z1dot: C64, tdot: C64) -> Result<(C64, C64)> {
    let d = dhat_of(m);
    if !(d.norm() >= REGULAR_TOL) {
        return Err(Error::SingularPoint { value: d.norm() });
    }
    let td = tdot.conj();
    let alpha = (m[(0, 2)].conj() * z1dot + m[(2, 0)] * td) / d;
    let beta = -(m[(0, 1)].conj() * z1dot + m[(1, 0)] * td) / d;
    Ok((alpha, beta))
}

pub fn lambda_coords(u: &Su3) -> Result<LambdaCoords> {
    let m = u.matrix();
    LambdaCoords::from_z1_t(m[(0, 0)], m[(1, 1)] + m[(2, 2)])
}

/// `[[z₁, s, 0], [−s, z₁*, 0], [0, 0, 1]] · [[1, 0, 0], [0, z₂, w], [0, −w*, z₂*]]`
/// with `s = √(1 − |z₁|²)`.
pub fn canonical_form(z1: C64, z2: C64, w: C64) -> Result<Su3> {
    if z1.norm() > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!("|z1| = {} exceeds 1", z1.norm())));
    }
    if (z2.norm_sqr() + w.norm_sqr() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter("|z2|^2 + |w|^2 must equal 1".into()));
    }
    let s = C64::new((1.0 - z1.norm_sqr()).max(0.0).sqrt(), 0.0);
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let a = Matrix3::new(z1, s, o, -s, z1.conj(), o, o, o, one);
    let b = Matrix3::new(one, o, o, o, z2, w, o, -w.conj(), z2.conj());
    Su3::new(a * b)
}

/// `[[0, α, β], [−α*, 0, 0], [−β*, 0, 0]]`.
pub fn lambda_generator(alpha: C64, beta: C64) -> Matrix3<C64> {
    let o = C64::new(0.0, 0.0);
    Matrix3::new(o, alpha, beta, -alpha.conj(), o, o, -beta.conj(), o, o)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaSample {
    pub t: f64,
    pub alpha: C64,
    pub beta: C64,
}

/// Piecewise-linear interpolation; zero outside the sampled span.
pub fn interpolate(samples: &[LambdaSample], t: f64) -> (C64, C64) {
    let zero = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    if samples.is_empty() || t < samples[0].t || t > samples[samples.len() - 1].t {
        return zero;
    }
    let k = samples.partition_point(|s| s.t <= t);
    if k == samples.len() {
        let s = samples[k - 1];
        return (s.alpha, s.beta);
    }
    let (a, b) = (samples[k - 1], samples[k]);
    let w = (t - a.t) / (b.t - a.t);
    (a.alpha + (b.alpha - a.alpha) * w, a.beta + (b.beta - a.beta) * w)
}

/// RK4 for `U̇ = A(α, β)U` with reunitarization after every step.
pub fn integrate_lambda(
    u0: &Su3,
    control: impl Fn(f64, &Matrix3<C64>) -> Result<(C64, C64)>,
    step: f64,
    span: (f64, f64),
) -> Result<(Su3, Vec<LambdaSample>)> {
    let (t0, t1) = span;
    if !(step > 0.0) || !(t1 >= t0) {
        return Err(Error::InvalidParameter("bad step or span".into()));
    }
    let n = ((t1 - t0) / step - 1e-9).ceil().max(0.0) as usize;
    let h = if n == 0 { 0.0 } else { (t1 - t0) / n as f64 };
    let rate = |t: f64, m: &Matrix3<C64>| -> Result<Matrix3<C64>> {
        let (a, b) = control(t, m)?;
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        Ok(lambda_generator(a, b) * m)
    };
    let mut u = *u0.matrix();
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = if k == n { t1 } else { t0 + k as f64 * h };
        let (alpha, beta) = control(t, &u)?;
        samples.push(LambdaSample { t, alpha, beta });
        if k == n {
            break;
        }
        let hc = C64::new(h, 0.0);
        let k1 = lambda_generator(alpha, beta) * u;
        let k2 = rate(t + 0.5 * h, &(u + k1 * (hc * 0.5)))?;
        let k3 = rate(t + 0.5 * h, &(u + k2 * (hc * 0.5)))?;
        let k4 = rate(t + h, &(u + k3 * hc))?;
        u = *Su3::reunitarize(u + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * (hc / 6.0)).matrix();
    }
    Ok((Su3::reunitarize(u), samples))
}

/// `|tr(A†B)| / 3`.
pub fn su3_fidelity(a: &Su3, b: &Su3) -> f64 {
    (a.matrix().adjoint() * b.matrix()).trace().norm() / 3.0
}

/// Demo schedule: nudge `α = a₀·b₁(s)·e^{iωs}`, `β = b₀·b₂(s)` with
/// `s = t/t1`, then a straight `(z₁, T)` path over `t2`.
///
/// A fixed relative phase between `α` and `β` keeps the flow in a conjugate
/// of SO(3), which never leaves `D̂ = 0`; the chirp `ω` avoids that.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaDemo {
    pub alpha0: f64,
    pub beta0: f64,
    pub omega: f64,
    pub t1: f64,
    pub t2: f64,
    pub step: f64,
}

impl Default for LambdaDemo {
    fn default() -> Self {
        Self {
            alpha0: 2.0,
            beta0: 2.0,
            omega: std::f64::consts::TAU,
            t1: 1.0,
            t2: 5.0,
            step: 1e-3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LambdaDesign {
    pub achieved: Su3,
    /// `diag(1, W)` rescaled into SU(3).
    pub gauge: Su3,
    /// Gauge-corrected nudge and steering controls.
    pub samples: Vec<LambdaSample>,
    pub verified: Su3,
    pub fidelity: f64,
}

/// Unitary factor of the polar decomposition.
fn polar_unitary(m: Matrix2<C64>) -> Matrix2<C64> {
    let svd = m.svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

/// `W` with `diag(1, W) Û diag(1, W)† = target`.
fn gauge_block(achieved: &Matrix3<C64>, target: &Matrix3<C64>) -> Result<Matrix2<C64>> {
    let cols = |m: &Matrix3<C64>| Matrix2::new(m[(1, 0)], m[(0, 1)].conj(), m[(2, 0)], m[(0, 2)].conj());
    let src = cols(achieved);
    let inv = src.try_inverse().ok_or(Error::SingularPoint {
        value: dhat_of(achieved).norm(),
    })?;
    Ok(polar_unitary(cols(target) * inv))
}

pub fn design_lambda(target: &Su3, demo: &LambdaDemo) -> Result<LambdaDesign> {
    let goal = lambda_coords(target)?;
    let dt = lambda_dhat(target).norm();
    if !(dt >= REGULAR_TOL) {
        return Err(Error::SingularPoint { value: dt });
    }
    let (t1, t2) = (demo.t1, demo.t2);
    if !(t1 > 0.0 && t2 > 0.0) {
        return Err(Error::InvalidParameter("lambda demo needs t1, t2 > 0".into()));
    }
    let (a0, b0, omega) = (demo.alpha0, demo.beta0, demo.omega);
    let (u1, nudge) = integrate_lambda(
        &Su3::identity(),
        |t, _| {
            let s = (t / t1).clamp(0.0, 1.0);
            Ok((
                C64::from_polar(a0 * bump(s) / t1, omega * s),
                C64::new(b0 * bump2(s) / t1, 0.0),
            ))
        },
        demo.step,
        (0.0, t1),
    )?;
    let start = lambda_coords(&u1)?;
    let (dz, dtr) = (goal.z1 - start.z1, goal.t - start.t);
    let worst = (0..=200)
        .map(|k| {
            let s = super::smoothstep(k as f64 / 200.0);
            LambdaCoords::from_z1_t(start.z1 + dz * s, start.t + dtr * s).map_or(0.0, |c| 1.0 - c.z2.norm())
        })
        .fold(f64::INFINITY, f64::min);
    if !(worst >= PATH_MARGIN) {
        return Err(Error::SingularPoint { value: worst });
    }
    let (achieved, steer) = integrate_lambda(
        &u1,
        |t, m| {
            let b = bump((t / t2).clamp(0.0, 1.0)) / t2;
            controls_of(m, dz * b, dtr * b)
        },
        demo.step,
        (0.0, t2),
    )?;

    let w = gauge_block(achieved.matrix(), target.matrix())?;
    let wd = w.adjoint();
    let rotate = |s: &LambdaSample| LambdaSample {
        t: s.t,
        alpha: s.alpha * wd[(0, 0)] + s.beta * wd[(1, 0)],
        beta: s.alpha * wd[(0, 1)] + s.beta * wd[(1, 1)],
    };
    let mut samples: Vec<_> = nudge.iter().map(rotate).collect();
    samples.extend(steer.iter().skip(1).map(|s| LambdaSample {
        t: s.t + t1,
        ..rotate(s)
    }));

    let o = C64::new(0.0, 0.0);
    let k = Matrix3::new(
        C64::new(1.0, 0.0),
        o,
        o,
        o,
        w[(0, 0)],
        w[(0, 1)],
        o,
        w[(1, 0)],
        w[(1, 1)],
    );
    let (verified, _) = integrate_lambda(
        &Su3::identity(),
        |t, _| Ok(interpolate(&samples, t)),
        demo.step,
        (0.0, t1 + t2),
    )?;
    Ok(LambdaDesign {
        achieved,
        gauge: Su3::reunitarize(k),
        fidelity: su3_fidelity(&verified, target),
        samples,
        verified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su::{random_su2_with, random_su3_with};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random element of S(U(1)×U(2)).
    fn random_block(rng: &mut ChaCha8Rng) -> Matrix3<C64> {
        let w = random_su2_with(rng).matrix();
        let psi = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        let o = C64::new(0.0, 0.0);
        Matrix3::new(
            psi.conj() * psi.conj(),
            o,
            o,
            o,
            w[0][0] * psi,
            w[0][1] * psi,
            o,
            w[1][0] * psi,
            w[1][1] * psi,
        )
    }

    fn conj(k: &Matrix3<C64>, u: &Su3) -> Su3 {
        Su3::new(k * u.matrix() * k.adjoint()).unwrap()
    }

    #[test]
    fn identity_is_singular() {
        assert_eq!(lambda_dhat(&Su3::identity()), C64::new(0.0, 0.0));
        assert!(matches!(
            lambda_coords(&Su3::identity()),
            Err(Error::BoundaryPoint { .. })
        ));
        assert!(matches!(
            lambda_controls(&Su3::identity(), C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn dhat_and_coords_are_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let u = random_su3_with(&mut rng);
            let k = random_block(&mut rng);
            let v = conj(&k, &u);
            // D̂ picks up conj(k₁₁)³; its modulus is invariant.
            let law = k[(0, 0)].conj().powu(3) * lambda_dhat(&u);
            assert!((lambda_dhat(&v) - law).norm() < 1e-12);
            assert!((lambda_dhat(&v).norm() - lambda_dhat(&u).norm()).abs() < 1e-12);
            let (a, b) = (lambda_coords(&u).unwrap(), lambda_coords(&v).unwrap());
            assert!((a.z1 - b.z1).norm() < 1e-12 && (a.t - b.t).norm() < 1e-12);
            // Exact invariance on the subgroup with k₁₁ = 1.
            let w = random_su2_with(&mut rng).matrix();
            let o = C64::new(0.0, 0.0);
            let k1 = Matrix3::new(C64::new(1.0, 0.0), o, o, o, w[0][0], w[0][1], o, w[1][0], w[1][1]);
            assert!((lambda_dhat(&conj(&k1, &u)) - lambda_dhat(&u)).norm() < 1e-12);
        }
    }

    #[test]
    fn canonical_round_trip_and_regularity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let z1 = C64::from_polar(rng.random_range(0.0..0.95), rng.random_range(0.0..6.3));
            let z2 = C64::from_polar(rng.random_range(0.0..0.95), rng.random_range(0.0..6.3));
            let w = C64::from_polar((1.0 - z2.norm_sqr()).sqrt(), rng.random_range(0.0..6.3));
            let u = canonical_form(z1, z2, w).unwrap();
            let c = lambda_coords(&u).unwrap();
            assert!((c.z1 - z1).norm() < 1e-12 && (c.z2 - z2).norm() < 1e-12);
            assert!(c.is_regular());
            assert!(lambda_dhat(&u).norm() > 0.0);
        }
        // Boundary probes.
        let w = C64::new(0.6, 0.0);
        let on_z1 = canonical_form(C64::from_polar(1.0, 0.3), C64::new(0.0, 0.8), w).unwrap();
        assert!(lambda_dhat(&on_z1).norm() < 1e-15);
        let on_z2 = canonical_form(C64::new(0.2, 0.1), C64::from_polar(1.0, 1.1), C64::new(0.0, 0.0)).unwrap();
        assert!(lambda_dhat(&on_z2).norm() < 1e-15);
    }

    #[test]
    fn controls_solve_the_linear_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let u = random_su3_with(&mut rng);
            let z1d = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let td = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let (a, b) = lambda_controls(&u, z1d, td).unwrap();
            let r1 = a * u.u(2, 1) + b * u.u(3, 1) - z1d;
            let r2 = -a * u.u(1, 2).conj() - b * u.u(1, 3).conj() - td.conj();
            let scale = 1.0 + a.norm() + b.norm();
            assert!(r1.norm() <= 1e-12 * scale && r2.norm() <= 1e-12 * scale);
        }
        let u = random_su3_with(&mut rng);
        let zero = C64::new(0.0, 0.0);
        assert_eq!(lambda_controls(&u, zero, zero).unwrap(), (zero, zero));
    }

    #[test]
    fn flow_moves_coordinates_at_requested_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = 1e-6;
        for _ in 0..50 {
            let u = random_su3_with(&mut rng);
            let z1d = C64::new(0.3, -0.7);
            let td = C64::new(-0.2, 0.5);
            let (a, b) = lambda_controls(&u, z1d, td).unwrap();
            let g = lambda_generator(a, b);
            let at = |s: f64| {
                let m = (g * C64::new(s, 0.0)).exp() * u.matrix();
                (m[(0, 0)], m[(1, 1)] + m[(2, 2)])
            };
            let (p, m) = (at(h), at(-h));
            assert!(((p.0 - m.0) / (2.0 * h) - z1d).norm() < 1e-6);
            assert!(((p.1 - m.1) / (2.0 * h) - td).norm() < 1e-6);
        }
    }

    #[test]
    fn demo_reaches_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let canon = canonical_form(
            C64::new(0.3, 0.2),
            C64::new(0.4, -0.1),
            C64::new(0.0, (1.0f64 - 0.17).sqrt()),
        )
        .unwrap();
        let target = conj(&random_block(&mut rng), &canon);
        let d = design_lambda(&target, &LambdaDemo::default()).unwrap();
        assert!(d.fidelity >= 0.9999, "{}", d.fidelity);
        let (first, last) = (d.samples[0], *d.samples.last().unwrap());
        for s in [first, last] {
            assert!(s.alpha.norm() < 1e-9 && s.beta.norm() < 1e-9);
        }
    }
}
