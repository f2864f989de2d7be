//! Orbit-to-gate fix-up, singular-target splitting and drift removal.

use nalgebra::{DMatrix, Matrix3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::invariants::{delta_of, eigvec_plus, invariants_of, UnitaryPair, DEGENERATE_SIN};
use crate::signal::ControlSignal;
use crate::su::{random_su2_with, Su2, Su2Algebra, C64};
use crate::trajectory::DELTA_FLOOR;

/// Invariant residual above which two pairs are on different orbits.
pub const ORBIT_TOL: f64 = 1e-4;

/// Below this `|M₁₂|` the phase equation is solved in least squares.
pub const PHASE_ENTRY_TOL: f64 = 1e-8;

/// Attempts made by [`split_singular_target`].
pub const SPLIT_ATTEMPTS: usize = 64;

/// Tolerance for the drift-frame orthonormality and invariance checks.
pub const BASIS_TOL: f64 = 1e-9;

/// Unitary `P ∈ SU(2)` with `P† U P = diag(e^{iφ}, e^{−iφ})`, `φ ∈ (0, π)`.
fn eigenbasis(u: &Su2) -> Result<Su2> {
    let n = u.axis();
    if (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() <= DEGENERATE_SIN {
        return Err(Error::DegenerateSpectrum);
    }
    let [a, b] = eigvec_plus(n);
    Ok(Su2::new(a, -b.conj()))
}

/// `K` with `K Û K† = U_target` and `K V̂ K† = V_target`, normalized to
/// `Re K₁₁ ≥ 0`.
pub fn solve_gauge(achieved: &UnitaryPair, target: &UnitaryPair) -> Result<Su2> {
    let residual = invariants_of(achieved).distance(&invariants_of(target));
    if !(residual <= ORBIT_TOL) {
        return Err(Error::OrbitMismatch { residual });
    }
    let p = eigenbasis(&achieved.u)?;
    let r = eigenbasis(&target.u)?;
    let m12 = (p.adjoint() * achieved.v * p).y();
    let n12 = (r.adjoint() * target.v * r).y();
    let two_theta = if m12.norm() >= PHASE_ENTRY_TOL {
        (n12 / m12).arg()
    } else {
        (n12 * m12.conj()).arg()
    };
    let d = Su2::new(C64::from_polar(1.0, 0.5 * two_theta), C64::new(0.0, 0.0));
    let k = r * d * p.adjoint();
    Ok(if k.x().re < 0.0 { k.neg() } else { k })
}

/// `‖KÛK† − U‖_F + ‖KV̂K† − V‖_F`.
pub fn gauge_residual(k: &Su2, achieved: &UnitaryPair, target: &UnitaryPair) -> f64 {
    let c = achieved.conjugated_by(k);
    c.u.distance(&target.u) + c.v.distance(&target.v)
}

/// Rotation `R` with `K·i(u·σ)·K† = i((Ru)·σ)`.
pub fn adjoint_matrix(k: &Su2) -> Matrix3<f64> {
    let kd = k.adjoint().matrix();
    let km = k.matrix();
    let mut r = Matrix3::zeros();
    for l in 0..3 {
        let mut e = [0.0; 3];
        e[l] = 1.0;
        let g = Su2Algebra::from_components(e).matrix();
        let m = crate::su::mat2_mul(&crate::su::mat2_mul(&km, &g), &kd);
        let c = Su2Algebra::from_matrix(m).components();
        for j in 0..3 {
            r[(j, l)] = c[j];
        }
    }
    r
}

/// Rotates every sample by [`adjoint_matrix`]`(k)`.
pub fn conjugate_signal(k: &Su2, signal: &ControlSignal) -> ControlSignal {
    let r = adjoint_matrix(k);
    signal.map(|u| {
        let v = r * nalgebra::Vector3::from(u);
        [v[0], v[1], v[2]]
    })
}

/// Component-wise `(A·B, A'·B')`.
fn pair_mul(a: &UnitaryPair, b: &UnitaryPair) -> UnitaryPair {
    UnitaryPair::new(a.u * b.u, a.v * b.v)
}

/// Two regular legs `(S, target·S⁻¹)`; steering to `S` and then to
/// `target·S⁻¹` reaches `target` by right invariance.
pub fn split_singular_target(target: &UnitaryPair, seed: u64) -> Result<(UnitaryPair, UnitaryPair)> {
    split_singular_target_with(target, seed, SPLIT_ATTEMPTS, |s, t| {
        delta_of(s) >= DELTA_FLOOR && delta_of(t) >= DELTA_FLOOR
    })
}

/// As [`split_singular_target`] with a caller-supplied acceptance test on
/// the two legs.
pub fn split_singular_target_with(
    target: &UnitaryPair,
    seed: u64,
    attempts: usize,
    accept: impl Fn(&UnitaryPair, &UnitaryPair) -> bool,
) -> Result<(UnitaryPair, UnitaryPair)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts {
        let s = UnitaryPair::new(random_su2_with(&mut rng), random_su2_with(&mut rng));
        let rest = pair_mul(target, &s.inverse());
        if accept(&s, &rest) {
            return Ok((s, rest));
        }
    }
    Err(Error::SearchExhausted { attempts })
}

/// A drift `A` and control basis `B_j` with `e^{−At} B_j e^{At} = Σ_k a_kj(t) B_k`.
#[derive(Clone, Debug)]
pub struct DriftFrame {
    drift: DMatrix<C64>,
    basis: Vec<DMatrix<C64>>,
    /// Common value of `⟨B_j, B_j⟩ = Re tr(B_j† B_j)`.
    scale: f64,
}

fn inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

impl DriftFrame {
    /// Requires a non-empty basis with Gram matrix `c·1`, `c > 0`, and at
    /// most three elements.
    pub fn new(drift: DMatrix<C64>, basis: Vec<DMatrix<C64>>) -> Result<Self> {
        if basis.is_empty() || basis.len() > 3 {
            return Err(Error::InvalidParameter(format!(
                "drift removal needs 1 to 3 basis elements, got {}",
                basis.len()
            )));
        }
        let n = drift.nrows();
        if drift.ncols() != n || basis.iter().any(|b| b.shape() != (n, n)) {
            return Err(Error::InvalidParameter("drift and basis shapes differ".into()));
        }
        let scale = inner(&basis[0], &basis[0]);
        if !(scale > 0.0) {
            return Err(Error::BasisNotOrthonormal);
        }
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let want = if i == j { scale } else { 0.0 };
                if (inner(a, b) - want).abs() > BASIS_TOL * scale {
                    return Err(Error::BasisNotOrthonormal);
                }
            }
        }
        Ok(Self { drift, basis, scale })
    }

    /// Frame for an su(2) drift and su(2) control directions.
    pub fn su2(drift: Su2Algebra, basis: &[Su2Algebra]) -> Result<Self> {
        Self::new(
            algebra_matrix(drift),
            basis.iter().map(|b| algebra_matrix(*b)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `a(t)` with `a_kj = ⟨B_k, e^{−At} B_j e^{At}⟩ / c`, after checking the
    /// conjugated basis stays in the span.
    pub fn coefficients(&self, t: f64) -> Result<DMatrix<f64>> {
        let e = (&self.drift * C64::new(t, 0.0)).exp();
        let e_inv = e.adjoint();
        let m = self.dim();
        let mut a = DMatrix::zeros(m, m);
        for (j, b) in self.basis.iter().enumerate() {
            let rotated = &e_inv * b * &e;
            let mut rest = rotated.clone();
            for (k, bk) in self.basis.iter().enumerate() {
                let c = inner(bk, &rotated) / self.scale;
                a[(k, j)] = c;
                rest -= bk * C64::new(c, 0.0);
            }
            let residual = inner(&rest, &rest).sqrt();
            if residual > BASIS_TOL * self.scale.sqrt() {
                return Err(Error::BasisNotInvariant { residual });
            }
        }
        Ok(a)
    }
}

/// Dense `i(u·σ)`.
pub fn algebra_matrix(a: Su2Algebra) -> DMatrix<C64> {
    let m = a.matrix();
    DMatrix::from_fn(2, 2, |i, j| m[i][j])
}

/// Controls `u = a(t)ᵀ û` for the drifted system `Ẋ = AX + Σ u_j B_j X`
/// from a design `û` for the driftless one.
pub fn remove_drift(frame: &DriftFrame, u_hat: &ControlSignal) -> Result<ControlSignal> {
    let m = frame.dim();
    let mut samples = Vec::with_capacity(u_hat.len());
    for s in u_hat.samples() {
        let a = frame.coefficients(s.t)?;
        let mut u = [0.0; 3];
        for (j, uj) in u.iter_mut().enumerate().take(m) {
            *uj = (0..m).map(|k| a[(k, j)] * s.u[k]).sum();
        }
        samples.push(crate::signal::ControlSample { t: s.t, u });
    }
    ControlSignal::new(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{integrate_pair, SystemParams};
    use crate::su::{conjugate, exp_su2, random_su2};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn hadamard_pair() -> UnitaryPair {
        let h = FRAC_1_SQRT_2;
        UnitaryPair::new(
            Su2::new(C64::new(h, 0.0), C64::new(h, 0.0)),
            Su2::new(C64::new(h, 0.0), C64::new(0.0, -h)),
        )
    }

    fn random_regular(seed: u64) -> UnitaryPair {
        UnitaryPair::new(random_su2(2 * seed + 500), random_su2(2 * seed + 501))
    }

    #[test]
    fn aligned_pair_gives_identity() {
        let h = hadamard_pair();
        let k = solve_gauge(&h, &h).unwrap();
        assert!(k.max_entry_diff(&Su2::identity()) < 1e-12);
    }

    #[test]
    fn scramble_and_recover() {
        for s in 0..200 {
            let p = random_regular(s);
            let k0 = random_su2(9000 + s);
            let scrambled = p.conjugated_by(&k0.adjoint());
            let k = solve_gauge(&scrambled, &p).unwrap();
            let err = k.max_entry_diff(&k0).min(k.max_entry_diff(&k0.neg()));
            assert!(err < 1e-10, "seed {s}: {err}");
            assert!(gauge_residual(&k, &scrambled, &p) < 1e-6);
            assert!(k.x().re >= 0.0);
        }
    }

    #[test]
    fn errors() {
        let h = hadamard_pair();
        assert!(matches!(
            solve_gauge(&UnitaryPair::identity(), &h),
            Err(Error::OrbitMismatch { .. })
        ));
        assert!(matches!(
            solve_gauge(&UnitaryPair::identity(), &UnitaryPair::identity()),
            Err(Error::DegenerateSpectrum)
        ));
    }

    #[test]
    fn adjoint_matrix_is_rotation() {
        for s in 0..50 {
            let k = random_su2(s);
            let r = adjoint_matrix(&k);
            assert!((r.transpose() * r - Matrix3::identity()).norm() < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-12);
            let a = Su2Algebra::new(0.3, -0.2, 0.7);
            let lhs = conjugate(&k, &exp_su2(a, 1.0));
            let ra = r * nalgebra::Vector3::from(a.components());
            let rhs = exp_su2(Su2Algebra::new(ra[0], ra[1], ra[2]), 1.0);
            assert!(lhs.max_entry_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn conjugated_signal_reintegrates_to_conjugated_pair() {
        let params = SystemParams::default();
        let sig = |t: f64| {
            let b = 6.0 * t * (1.0 - t);
            [b, -0.7 * b * t, 0.4 * b]
        };
        let signal = ControlSignal::sample_fn(sig, 0.0, 1.0, 1000).unwrap();
        let eval = |s: &ControlSignal| {
            let s = s.clone();
            move |t: f64| Su2Algebra::from_components(s.eval(t))
        };
        let (p, _) = integrate_pair(&UnitaryPair::identity(), eval(&signal), &params, (0.0, 1.0)).unwrap();
        let k = random_su2(77);
        let rotated = conjugate_signal(&k, &signal);
        assert!(rotated.zero_at_start() && rotated.zero_at_end());
        assert!((rotated.max_amplitude() - signal.max_amplitude()).abs() < 1e-12);
        let (q, _) = integrate_pair(&UnitaryPair::identity(), eval(&rotated), &params, (0.0, 1.0)).unwrap();
        assert!(q.max_entry_diff(&p.conjugated_by(&k)) < 1e-6);
        let unchanged = conjugate_signal(&Su2::identity(), &signal);
        assert_eq!(unchanged, signal);
    }

    #[test]
    fn split_identity_and_commuting_targets() {
        let commuting = UnitaryPair::new(
            exp_su2(Su2Algebra::new(0.0, 0.0, 1.0), 1.0),
            exp_su2(Su2Algebra::new(0.0, 0.0, 1.0), 2.0),
        );
        for target in [UnitaryPair::identity(), commuting, hadamard_pair()] {
            let (a, b) = split_singular_target(&target, 11).unwrap();
            assert!(delta_of(&a) >= DELTA_FLOOR && delta_of(&b) >= DELTA_FLOOR);
            assert!(pair_mul(&b, &a).max_entry_diff(&target) < 1e-12);
        }
        let again = split_singular_target(&UnitaryPair::identity(), 11).unwrap();
        assert_eq!(again, split_singular_target(&UnitaryPair::identity(), 11).unwrap());
        assert!(matches!(
            split_singular_target_with(&UnitaryPair::identity(), 1, 5, |_, _| false),
            Err(Error::SearchExhausted { attempts: 5 })
        ));
    }

    fn sx() -> Su2Algebra {
        Su2Algebra::new(1.0, 0.0, 0.0)
    }
    fn sy() -> Su2Algebra {
        Su2Algebra::new(0.0, 1.0, 0.0)
    }
    fn sz() -> Su2Algebra {
        Su2Algebra::new(0.0, 0.0, 1.0)
    }

    #[test]
    fn zero_drift_is_identity() {
        let frame = DriftFrame::su2(Su2Algebra::ZERO, &[sx(), sy(), sz()]).unwrap();
        let a = frame.coefficients(0.8).unwrap();
        assert!((a - DMatrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn sigma_z_drift_rotates_plane() {
        let frame = DriftFrame::su2(sz(), &[sx(), sy()]).unwrap();
        for k in 0..=40 {
            let t = 0.1 * k as f64;
            let a = frame.coefficients(t).unwrap();
            let (c, s) = ((2.0 * t).cos(), (2.0 * t).sin());
            // Numeric conjugation oracle against the planar rotation by 2t.
            let e = exp_su2(sz(), t);
            let bx = Su2Algebra::from_matrix(crate::su::mat2_mul(
                &crate::su::mat2_mul(&e.adjoint().matrix(), &sx().matrix()),
                &e.matrix(),
            ));
            assert!((bx.ux - a[(0, 0)]).abs() < 1e-12 && (bx.uy - a[(1, 0)]).abs() < 1e-12);
            assert!((a[(0, 0)] - c).abs() < 1e-12 && (a[(1, 0)] - s).abs() < 1e-12);
            assert!((a[(0, 1)] + s).abs() < 1e-12 && (a[(1, 1)] - c).abs() < 1e-12);
            assert!((a.transpose() * &a - DMatrix::identity(2, 2)).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_bases() {
        assert!(matches!(
            DriftFrame::su2(sz(), &[sx(), sx()]),
            Err(Error::BasisNotOrthonormal)
        ));
        let frame = DriftFrame::su2(sx(), &[sx(), sy()]).unwrap();
        assert!(matches!(frame.coefficients(0.3), Err(Error::BasisNotInvariant { .. })));
    }

    #[test]
    fn drift_removal_closes_the_loop() {
        let tf = 2.0;
        let n = 4000;
        let frame = DriftFrame::su2(sz(), &[sx(), sy()]).unwrap();
        let u_hat = ControlSignal::sample_fn(
            |t| {
                let s = t / tf;
                let b = 30.0 * s * s * (1.0 - s) * (1.0 - s);
                [b, -0.5 * b * s, 0.0]
            },
            0.0,
            tf,
            n,
        )
        .unwrap();
        let u = remove_drift(&frame, &u_hat).unwrap();
        assert!(u.zero_at_start() && u.zero_at_end());
        let rk4 = |f: &dyn Fn(f64) -> Su2Algebra, drift: Su2Algebra| {
            let mut x = Su2::identity();
            let h = tf / n as f64;
            let rate = |t: f64, x: &Su2| {
                let g = f(t);
                let m = Su2Algebra::new(g.ux + drift.ux, g.uy + drift.uy, g.uz + drift.uz);
                m.left_apply(x.x(), x.y())
            };
            for k in 0..n {
                let t = k as f64 * h;
                let step = |x: &Su2, d: (C64, C64), c: f64| Su2::new(x.x() + d.0 * c, x.y() + d.1 * c);
                let k1 = rate(t, &x);
                let k2 = rate(t + h / 2.0, &step(&x, k1, h / 2.0));
                let k3 = rate(t + h / 2.0, &step(&x, k2, h / 2.0));
                let k4 = rate(t + h, &step(&x, k3, h));
                x = Su2::new(
                    x.x() + (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0),
                    x.y() + (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0),
                );
            }
            x
        };
        // Analytic inputs on the grid: both signals are evaluated at exact stage times.
        let hat = |t: f64| {
            let s = t / tf;
            let b = 30.0 * s * s * (1.0 - s) * (1.0 - s);
            Su2Algebra::new(b, -0.5 * b * s, 0.0)
        };
        let full = |t: f64| {
            let a = frame.coefficients(t).unwrap();
            let h = hat(t);
            Su2Algebra::new(
                a[(0, 0)] * h.ux + a[(1, 0)] * h.uy,
                a[(0, 1)] * h.ux + a[(1, 1)] * h.uy,
                0.0,
            )
        };
        let y = rk4(&hat, Su2Algebra::ZERO);
        let x_f = exp_su2(sz(), tf) * y;
        let x = rk4(&full, sz());
        assert!(x.distance(&x_f) < 1e-6, "{}", x.distance(&x_f));
        for s in u.samples().iter().step_by(97) {
            let f = full(s.t);
            assert!((f.ux - s.u[0]).abs() < 1e-12 && (f.uy - s.u[1]).abs() < 1e-12);
        }
    }
}
