//! Invariant coordinates of SU(2)×SU(2) under simultaneous conjugation.

use crate::su::{conjugate, Su2, C64};

/// Default tolerance on `‖UV − VU‖_F` for the singularity test.
pub const SINGULAR_TOL: f64 = 1e-9;

/// Default tolerance on `Δ₁²+Δ₂²+Δ₃²` for the Δ-based singularity test.
///
/// `‖[U, V]‖_F = 2√2·√Δ`, so the commutator test with `tol` is equivalent to
/// `Δ ≤ tol²/8`; the two defaults agree outside `Δ ∈ (1.25e-19, 1e-18]`.
pub const SINGULAR_DELTA_TOL: f64 = 1e-18;

/// A point `p = (U, V)` of SU(2)×SU(2).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct UnitaryPair {
    pub u: Su2,
    pub v: Su2,
}

impl UnitaryPair {
    pub fn new(u: Su2, v: Su2) -> Self {
        Self { u, v }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    /// From `(x_R, x_I, y_R, y_I, z_R, z_I, w_R, w_I)`; each half is renormalized.
    pub fn from_reals(s: [f64; 8]) -> Self {
        Self {
            u: Su2::from_quaternion([s[0], s[1], s[2], s[3]]),
            v: Su2::from_quaternion([s[4], s[5], s[6], s[7]]),
        }
    }

    pub fn to_reals(&self) -> [f64; 8] {
        let a = self.u.quaternion();
        let b = self.v.quaternion();
        [a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]]
    }

    /// `(k U k†, k V k†)`.
    pub fn conjugated_by(&self, k: &Su2) -> Self {
        Self {
            u: conjugate(k, &self.u),
            v: conjugate(k, &self.v),
        }
    }

    /// Factorwise product `(U₁U₂, V₁V₂)`.
    pub fn compose(&self, rhs: &UnitaryPair) -> Self {
        Self {
            u: self.u * rhs.u,
            v: self.v * rhs.v,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            u: self.u.adjoint(),
            v: self.v.adjoint(),
        }
    }

    pub fn max_entry_diff(&self, other: &UnitaryPair) -> f64 {
        self.u.max_entry_diff(&other.u).max(self.v.max_entry_diff(&other.v))
    }

    /// Entrywise distance allowing an independent global sign on each factor.
    pub fn max_entry_diff_up_to_sign(&self, other: &UnitaryPair) -> f64 {
        let du = self
            .u
            .max_entry_diff(&other.u)
            .min(self.u.max_entry_diff(&other.u.neg()));
        let dv = self
            .v
            .max_entry_diff(&other.v)
            .min(self.v.max_entry_diff(&other.v.neg()));
        du.max(dv)
    }
}

/// Quotient coordinates `(x¹, x², x³)` and the regularity scalar
/// `Δ = (1 − x¹²)(1 − x²²) − x³²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantPoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub delta: f64,
}

impl InvariantPoint {
    /// Builds a point from coordinates; `delta` may come out negative for
    /// coordinates that no pair realizes.
    pub fn from_coords(x1: f64, x2: f64, x3: f64) -> Self {
        Self {
            x1,
            x2,
            x3,
            delta: (1.0 - x1 * x1) * (1.0 - x2 * x2) - x3 * x3,
        }
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    /// Largest coordinate difference.
    pub fn distance(&self, other: &InvariantPoint) -> f64 {
        (self.x1 - other.x1)
            .abs()
            .max((self.x2 - other.x2).abs())
            .max((self.x3 - other.x3).abs())
    }

    /// Bounds `−1 − x¹x² ≤ x³ ≤ 1 − x¹x²` from `|V⃗·W⃗| ≤ 1`.
    pub fn x3_bounds(&self) -> (f64, f64) {
        let p = self.x1 * self.x2;
        (-1.0 - p, 1.0 - p)
    }
}

/// `x¹ = x_R`, `x² = z_R`, `x³ = x_I z_I + w_R y_R + w_I y_I`.
pub fn invariants_of(p: &UnitaryPair) -> InvariantPoint {
    let [x_r, x_i, y_r, y_i] = p.u.quaternion();
    let [z_r, z_i, w_r, w_i] = p.v.quaternion();
    let x3 = x_i * z_i + w_r * y_r + w_i * y_i;
    let mut pt = InvariantPoint::from_coords(x_r, z_r, x3);
    pt.delta = delta_of(p);
    pt
}

/// `(Δ₁, Δ₂, Δ₃)`.
pub fn deltas_of(p: &UnitaryPair) -> [f64; 3] {
    let [_, x_i, y_r, y_i] = p.u.quaternion();
    let [_, z_i, w_r, w_i] = p.v.quaternion();
    [z_i * y_r - x_i * w_r, z_i * y_i - x_i * w_i, w_r * y_i - w_i * y_r]
}

/// `Δ₁² + Δ₂² + Δ₃²`, evaluated from the Δᵢ so it is nonnegative.
pub fn delta_of(p: &UnitaryPair) -> f64 {
    deltas_of(p).iter().map(|d| d * d).sum()
}

/// Frobenius norm of `UV − VU`.
pub fn commutator_norm(p: &UnitaryPair) -> f64 {
    let uv = p.u * p.v;
    let vu = p.v * p.u;
    uv.distance(&vu)
}

/// True iff `‖UV − VU‖_F ≤ tol`.
pub fn is_singular(p: &UnitaryPair, tol: f64) -> bool {
    commutator_norm(p) <= tol
}

/// Δ-based counterpart of [`is_singular`].
pub fn is_singular_by_delta(p: &UnitaryPair, tol: f64) -> bool {
    delta_of(p) <= tol
}

/// Solid-cylinder coordinates of an orbit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitCylinderCoord {
    /// Eigenphase of `U`, in `[0, π]`.
    pub phi: f64,
    /// `(1,1)` entry of `S V S†` where `S U S† = diag(e^{iφ}, e^{−iφ})`;
    /// `None` on the degenerate segments `φ ∈ {0, π}`.
    pub disc: Option<C64>,
    /// Eigenphase of `V`, reported only on the degenerate segments.
    pub psi: Option<f64>,
}

/// Below this `|sin φ|` the factor `U` is treated as `±1`.
pub const DEGENERATE_SIN: f64 = 1e-12;

pub fn cylinder_coords(p: &UnitaryPair) -> OrbitCylinderCoord {
    let n = p.u.axis();
    let sin_phi = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let phi = p.u.eigenphase();
    if sin_phi <= DEGENERATE_SIN {
        return OrbitCylinderCoord {
            phi,
            disc: None,
            psi: Some(p.v.eigenphase()),
        };
    }
    let e1 = eigvec_plus(n);
    let v = p.v.matrix();
    // e1† V e1
    let ve = [v[0][0] * e1[0] + v[0][1] * e1[1], v[1][0] * e1[0] + v[1][1] * e1[1]];
    let disc = e1[0].conj() * ve[0] + e1[1].conj() * ve[1];
    OrbitCylinderCoord {
        phi,
        disc: Some(disc),
        psi: None,
    }
}

/// Unit eigenvector of `n̂·σ` for eigenvalue `+1`, i.e. the eigenvector of
/// `x_R + i(n·σ)` with eigenvalue `e^{iφ}` when `|n| > 0`.
pub(crate) fn eigvec_plus(n: [f64; 3]) -> [C64; 2] {
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let (nx, ny, nz) = (n[0] / len, n[1] / len, n[2] / len);
    let (a, b) = if nz >= 0.0 {
        (C64::new(1.0 + nz, 0.0), C64::new(nx, ny))
    } else {
        (C64::new(nx, -ny), C64::new(1.0 - nz, 0.0))
    };
    let s = (a.norm_sqr() + b.norm_sqr()).sqrt();
    [a / s, b / s]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su::{exp_su2, random_su2, Su2Algebra};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    pub(crate) fn hadamard_pair() -> UnitaryPair {
        let h = FRAC_1_SQRT_2;
        UnitaryPair::new(
            Su2::new(C64::new(h, 0.0), C64::new(h, 0.0)),
            Su2::new(C64::new(h, 0.0), C64::new(0.0, -h)),
        )
    }

    #[test]
    fn hadamard_orbit() {
        let q = invariants_of(&hadamard_pair());
        assert!((q.x1 - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((q.x2 - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(q.x3.abs() < 1e-15);
    }

    #[test]
    fn identity_pair() {
        let q = invariants_of(&UnitaryPair::identity());
        assert_eq!((q.x1, q.x2, q.x3, q.delta), (1.0, 1.0, 0.0, 0.0));
        assert!(is_singular(&UnitaryPair::identity(), SINGULAR_TOL));
    }

    #[test]
    fn commuting_pairs_are_singular() {
        let z = Su2Algebra::new(0.0, 0.0, 1.0);
        let p = UnitaryPair::new(exp_su2(z, 0.4), exp_su2(z, -1.3));
        assert_eq!(deltas_of(&p), [0.0, 0.0, 0.0]);
        let x = Su2Algebra::new(1.0, 0.0, 0.0);
        let p = UnitaryPair::new(exp_su2(x, 1.0), exp_su2(x, 2.0));
        assert!(is_singular(&p, SINGULAR_TOL));
        let p = UnitaryPair::new(Su2::identity(), random_su2(3));
        assert!(is_singular(&p, SINGULAR_TOL));
    }

    #[test]
    fn delta_identity_on_random_pairs() {
        for s in 0..200 {
            let p = UnitaryPair::new(random_su2(2 * s), random_su2(2 * s + 1));
            let q = invariants_of(&p);
            let rhs = (1.0 - q.x1 * q.x1) * (1.0 - q.x2 * q.x2) - q.x3 * q.x3;
            assert!((q.delta - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn commutator_norm_matches_delta() {
        for s in 0..50 {
            let p = UnitaryPair::new(random_su2(500 + s), random_su2(900 + s));
            let lhs = commutator_norm(&p);
            let rhs = 2.0 * 2f64.sqrt() * delta_of(&p).sqrt();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn hadamard_cylinder_phase() {
        let c = cylinder_coords(&hadamard_pair());
        // eigenvalues of H1 solve λ² − √2 λ + 1 = 0, i.e. e^{±iπ/4}
        assert!((c.phi - FRAC_PI_4).abs() < 1e-14);
        assert!(c.disc.is_some() && c.psi.is_none());
    }

    #[test]
    fn degenerate_segment() {
        let p = UnitaryPair::new(Su2::identity(), exp_su2(Su2Algebra::new(0.0, 0.0, 1.0), 0.3));
        let c = cylinder_coords(&p);
        assert_eq!(c.phi, 0.0);
        assert!(c.disc.is_none());
        assert!((c.psi.unwrap() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn disc_entry_closed_form() {
        // e1† V e1 = z_R + i (n·m)/|n| = z_R + i x³ / sin φ
        for s in 0..50 {
            let p = UnitaryPair::new(random_su2(70 + s), random_su2(170 + s));
            let q = invariants_of(&p);
            let c = cylinder_coords(&p);
            let want = C64::new(q.x2, q.x3 / c.phi.sin());
            assert!((c.disc.unwrap() - want).norm() < 1e-12);
        }
    }
}
