//! Exact-structure matrix layer for SU(2) and SU(3).
//!
//! An element of SU(2) is stored as its top row `(x, y)`; the full matrix is
//! `[[x, y], [-y*, x*]]`. The four reals `(x_R, x_I, y_R, y_I)` form a unit
//! quaternion, and writing `U = x_R·1 + i(n·σ)` the vector part is
//! `n = (y_I, y_R, x_I)`.

use std::ops::Mul;

use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Renormalize when `| |x|²+|y|² - 1 |` exceeds this.
pub const RENORM_DRIFT: f64 = 1e-12;

/// An element of SU(2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2 {
    x: C64,
    y: C64,
}

impl Su2 {
    /// Builds `[[x, y], [-y*, x*]]`, rescaling `(x, y)` onto the unit sphere.
    ///
    /// Panics if `(x, y)` is zero or non-finite.
    pub fn new(x: C64, y: C64) -> Self {
        let norm_sq = x.norm_sqr() + y.norm_sqr();
        assert!(
            norm_sq.is_finite() && norm_sq > 0.0,
            "Su2::new needs a finite nonzero (x, y)"
        );
        let mut g = Self { x, y };
        if (norm_sq - 1.0).abs() > RENORM_DRIFT {
            let s = norm_sq.sqrt().recip();
            g.x *= s;
            g.y *= s;
        }
        g
    }

    pub const fn identity() -> Self {
        Self {
            x: C64::new(1.0, 0.0),
            y: C64::new(0.0, 0.0),
        }
    }

    /// Validates a dense 2×2 matrix and returns it as an [`Su2`].
    ///
    /// The matrix must have the `[[x, y], [-y*, x*]]` structure and unit
    /// determinant to within `tol`; the result is renormalized.
    pub fn from_matrix(m: [[C64; 2]; 2], tol: f64) -> Result<Self> {
        let (x, y) = (m[0][0], m[0][1]);
        let structure = (m[1][0] + y.conj()).norm() + (m[1][1] - x.conj()).norm();
        let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0] - 1.0).norm();
        let residual = structure.max(det);
        if !residual.is_finite() || residual > tol {
            return Err(Error::NotSpecialUnitary { residual });
        }
        Ok(Self::new(x, y))
    }

    pub fn from_quaternion(q: [f64; 4]) -> Self {
        Self::new(C64::new(q[0], q[1]), C64::new(q[2], q[3]))
    }

    pub fn x(&self) -> C64 {
        self.x
    }

    pub fn y(&self) -> C64 {
        self.y
    }

    /// `(x_R, x_I, y_R, y_I)`.
    pub fn quaternion(&self) -> [f64; 4] {
        [self.x.re, self.x.im, self.y.re, self.y.im]
    }

    /// Vector part `n` in `U = x_R·1 + i(n·σ)`.
    pub fn axis(&self) -> [f64; 3] {
        [self.y.im, self.y.re, self.x.im]
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        [[self.x, self.y], [-self.y.conj(), self.x.conj()]]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            x: self.x.conj(),
            y: -self.y,
        }
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.x.re
    }

    pub fn norm_drift(&self) -> f64 {
        (self.x.norm_sqr() + self.y.norm_sqr() - 1.0).abs()
    }

    /// Frobenius distance between the dense matrices.
    pub fn distance(&self, other: &Su2) -> f64 {
        (2.0 * ((self.x - other.x).norm_sqr() + (self.y - other.y).norm_sqr())).sqrt()
    }

    /// Largest entrywise modulus difference.
    pub fn max_entry_diff(&self, other: &Su2) -> f64 {
        (self.x - other.x).norm().max((self.y - other.y).norm())
    }

    pub fn neg(&self) -> Self {
        Self { x: -self.x, y: -self.y }
    }

    /// Eigenphase `φ ∈ [0, π]`: the eigenvalues are `e^{±iφ}`.
    pub fn eigenphase(&self) -> f64 {
        let n = self.axis();
        let s = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        s.atan2(self.x.re)
    }
}

impl Default for Su2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Mul for Su2 {
    type Output = Su2;

    fn mul(self, rhs: Su2) -> Su2 {
        let x = self.x * rhs.x - self.y * rhs.y.conj();
        let y = self.x * rhs.y + self.y * rhs.x.conj();
        Su2::new(x, y)
    }
}

/// The su(2) element `i(u_x σ_x + u_y σ_y + u_z σ_z)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Su2Algebra {
    pub ux: f64,
    pub uy: f64,
    pub uz: f64,
}

impl Su2Algebra {
    pub const ZERO: Su2Algebra = Su2Algebra {
        ux: 0.0,
        uy: 0.0,
        uz: 0.0,
    };

    pub const fn new(ux: f64, uy: f64, uz: f64) -> Self {
        Self { ux, uy, uz }
    }

    pub fn from_components(u: [f64; 3]) -> Self {
        Self::new(u[0], u[1], u[2])
    }

    pub fn components(&self) -> [f64; 3] {
        [self.ux, self.uy, self.uz]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.ux * s, self.uy * s, self.uz * s)
    }

    pub fn norm(&self) -> f64 {
        (self.ux * self.ux + self.uy * self.uy + self.uz * self.uz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.ux.is_finite() && self.uy.is_finite() && self.uz.is_finite()
    }

    /// Dense matrix `[[i u_z, u_y + i u_x], [-u_y + i u_x, -i u_z]]`.
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        let d = C64::new(0.0, self.uz);
        let o = C64::new(self.uy, self.ux);
        [[d, o], [-o.conj(), -d]]
    }

    /// Reads the components of an anti-Hermitian traceless 2×2 matrix.
    pub fn from_matrix(m: [[C64; 2]; 2]) -> Self {
        let uz = 0.5 * (m[0][0].im - m[1][1].im);
        let o = 0.5 * (m[0][1] - m[1][0].conj());
        Self::new(o.im, o.re, uz)
    }

    /// Top row of `σ·U` (the remaining entries follow from SU(2) structure).
    pub fn left_apply(&self, x: C64, y: C64) -> (C64, C64) {
        let d = C64::new(0.0, self.uz);
        let o = C64::new(self.uy, self.ux);
        (d * x - o * y.conj(), d * y + o * x.conj())
    }
}

/// `exp(t · i(u·σ))` via the Rodrigues formula.
pub fn exp_su2(a: Su2Algebra, t: f64) -> Su2 {
    let norm = a.norm();
    if norm == 0.0 || t == 0.0 {
        return Su2::identity();
    }
    let theta = norm * t;
    let (s, c) = theta.sin_cos();
    let k = s / norm;
    Su2::new(C64::new(c, k * a.uz), C64::new(k * a.uy, k * a.ux))
}

/// `k g k†`.
pub fn conjugate(k: &Su2, g: &Su2) -> Su2 {
    *k * *g * k.adjoint()
}

/// Haar-distributed element of SU(2), deterministic per seed.
pub fn random_su2(seed: u64) -> Su2 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_su2_with(&mut rng)
}

/// Haar sample drawn from a caller-owned generator.
pub fn random_su2_with<R: Rng + ?Sized>(rng: &mut R) -> Su2 {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = q.iter().map(|v| v * v).sum::<f64>();
        if n > 1e-24 {
            return Su2::from_quaternion(q);
        }
    }
}

/// A special unitary 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su3(Matrix3<C64>);

impl Su3 {
    pub const UNITARITY_TOL: f64 = 1e-10;

    /// Validates unitarity and unit determinant to within `1e-10`.
    pub fn new(m: Matrix3<C64>) -> Result<Self> {
        let residual = Self::residual(&m);
        if !residual.is_finite() || residual > Self::UNITARITY_TOL {
            return Err(Error::NotSpecialUnitary { residual });
        }
        Ok(Self(m))
    }

    /// Projects a nearly special unitary matrix back onto SU(3):
    /// Gram-Schmidt on the rows followed by a determinant phase fix.
    pub fn reunitarize(m: Matrix3<C64>) -> Self {
        let mut rows: Vec<[C64; 3]> = (0..3).map(|r| [m[(r, 0)], m[(r, 1)], m[(r, 2)]]).collect();
        for i in 0..3 {
            for j in 0..i {
                let ip: C64 = (0..3).map(|c| rows[j][c].conj() * rows[i][c]).sum();
                let prev = rows[j];
                for (x, v) in rows[i].iter_mut().zip(prev) {
                    *x -= ip * v;
                }
            }
            let n = rows[i].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            for v in rows[i].iter_mut() {
                *v /= n;
            }
        }
        let mut out = Matrix3::from_fn(|r, c| rows[r][c]);
        let det = out.determinant();
        let fix = (det.conj() / det.norm()).powf(1.0 / 3.0);
        out *= fix;
        Self(out)
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<C64> {
        &self.0
    }

    /// Entry with 1-based indices, matching the usual `u_{i,j}` notation.
    pub fn u(&self, i: usize, j: usize) -> C64 {
        self.0[(i - 1, j - 1)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn max_entry_diff(&self, other: &Su3) -> f64 {
        (self.0 - other.0).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn residual(m: &Matrix3<C64>) -> f64 {
        let unitary = (m.adjoint() * m - Matrix3::identity()).norm();
        let det = (m.determinant() - C64::new(1.0, 0.0)).norm();
        unitary.max(det)
    }
}

impl Mul for Su3 {
    type Output = Su3;

    fn mul(self, rhs: Su3) -> Su3 {
        Su3(self.0 * rhs.0)
    }
}

/// Haar-random element of SU(3) (QR of a complex Ginibre matrix).
pub fn random_su3_with<R: Rng + ?Sized>(rng: &mut R) -> Su3 {
    let g = Matrix3::from_fn(|_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = Matrix3::from_diagonal(&nalgebra::Vector3::from_fn(|i, _| {
        let d = r[(i, i)];
        d / d.norm()
    }));
    Su3::reunitarize(q * phases)
}

/// Multiplies two dense 2×2 matrices.
pub fn mat2_mul(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}
