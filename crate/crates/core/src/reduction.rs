//! The reduction matrix Π(p) mapping control components to quotient velocities.
//!
//! Column `l` of Π(p) is the derivative of `(x¹, x², x³)` along
//! `t ↦ (e^{iσ_l t} U, e^{iγσ_l t} V)` at `t = 0`.

use crate::error::{Error, Result};
use crate::invariants::{deltas_of, UnitaryPair};
use crate::su::Su2Algebra;

/// Inversion is refused when `|det Π| < REGULARITY_RATIO · |γ(γ−1)|`,
/// i.e. when `Δ₁²+Δ₂²+Δ₃² < 1e-8`.
pub const REGULARITY_RATIO: f64 = 1e-8;

/// Rejects ratios for which the two-spin system is not controllable.
pub fn check_gamma(gamma: f64) -> Result<()> {
    if !gamma.is_finite() || gamma == 0.0 || (gamma.abs() - 1.0).abs() < 1e-12 {
        return Err(Error::DegenerateGamma { gamma });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiMatrix {
    /// Rows `x¹, x², x³`; columns `x, y, z`.
    pub entries: [[f64; 3]; 3],
    pub gamma: f64,
    pub det: f64,
}

impl PiMatrix {
    /// `Π · α`.
    pub fn apply(&self, alpha: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|r| (0..3).map(|c| self.entries[r][c] * alpha[c]).sum())
    }
}

pub fn pi_of(p: &UnitaryPair, gamma: f64) -> Result<PiMatrix> {
    check_gamma(gamma)?;
    let g = gamma;
    let [x_r, x_i, y_r, y_i] = p.u.quaternion();
    let [z_r, z_i, w_r, w_i] = p.v.quaternion();
    let [d1, d2, d3] = deltas_of(p);
    let entries = [
        [-y_i, -y_r, -x_i],
        [-g * w_i, -g * w_r, -g * z_i],
        [
            (g - 1.0) * d1 + g * z_r * y_i + w_i * x_r,
            (1.0 - g) * d2 + w_r * x_r + g * z_r * y_r,
            (g - 1.0) * d3 + x_r * z_i + g * z_r * x_i,
        ],
    ];
    Ok(PiMatrix {
        entries,
        gamma,
        det: closed_form_det(p, g),
    })
}

fn closed_form_det(p: &UnitaryPair, g: f64) -> f64 {
    let [d1, d2, d3] = deltas_of(p);
    g * (g - 1.0) * (d1 * d1 + d2 * d2 + d3 * d3)
}

/// `det Π(p) = γ(γ−1)(Δ₁²+Δ₂²+Δ₃²)`.
pub fn pi_det(p: &UnitaryPair, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(closed_form_det(p, gamma))
}

/// Closed-form `det(Π)·Π⁻¹`.
pub fn pi_adjugate(p: &UnitaryPair, gamma: f64) -> Result<[[f64; 3]; 3]> {
    check_gamma(gamma)?;
    let g = gamma;
    let gg1 = g * (g - 1.0);
    let [x_r, x_i, y_r, y_i] = p.u.quaternion();
    let [z_r, z_i, w_r, w_i] = p.v.quaternion();
    let [d1, d2, d3] = deltas_of(p);
    Ok([
        [
            gg1 * (-w_r * d3 - z_i * d2) + g * g * z_r * d1,
            (g - 1.0) * (x_i * d2 + y_r * d3) + x_r * d1,
            g * d1,
        ],
        [
            gg1 * (w_i * d3 - z_i * d1) - g * g * z_r * d2,
            (g - 1.0) * (x_i * d1 - y_i * d3) - x_r * d2,
            -g * d2,
        ],
        [
            gg1 * (w_i * d2 + w_r * d1) + g * g * z_r * d3,
            -(g - 1.0) * (y_i * d2 + y_r * d1) + x_r * d3,
            g * d3,
        ],
    ])
}

/// Control `(u_x, u_y, u_z) = Π⁻¹(p)·ẋ`.
pub fn pi_inverse_times(p: &UnitaryPair, gamma: f64, xdot: [f64; 3]) -> Result<Su2Algebra> {
    pi_inverse_times_at(p, gamma, xdot, 0.0)
}

/// As [`pi_inverse_times`], tagging a singularity error with time `t`.
pub(crate) fn pi_inverse_times_at(p: &UnitaryPair, gamma: f64, xdot: [f64; 3], t: f64) -> Result<Su2Algebra> {
    let det = pi_det(p, gamma)?;
    let threshold = REGULARITY_RATIO * (gamma * (gamma - 1.0)).abs();
    if !(det.abs() >= threshold) {
        return Err(Error::SingularReduction { t, det, threshold });
    }
    let adj = pi_adjugate(p, gamma)?;
    let u: [f64; 3] = std::array::from_fn(|r| (0..3).map(|c| adj[r][c] * xdot[c]).sum::<f64>() / det);
    Ok(Su2Algebra::from_components(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::invariants_of;
    use crate::su::{exp_su2, random_su2, Su2, C64};

    const GAMMA: f64 = 1.0 / 0.2514;

    fn random_pair(seed: u64) -> UnitaryPair {
        UnitaryPair::new(random_su2(2 * seed + 1000), random_su2(2 * seed + 1001))
    }

    #[test]
    fn identity_is_singular() {
        let pi = pi_of(&UnitaryPair::identity(), GAMMA).unwrap();
        assert_eq!(pi.det, 0.0);
        assert!(matches!(
            pi_inverse_times(&UnitaryPair::identity(), GAMMA, [1.0, 0.0, 0.0]),
            Err(Error::SingularReduction { .. })
        ));
    }

    #[test]
    fn first_entry_is_minus_y_imag() {
        let u = Su2::new(C64::new(0.954_0, 0.0), C64::new(0.0, 0.3));
        let p = UnitaryPair::new(u, random_su2(4));
        let pi = pi_of(&p, GAMMA).unwrap();
        assert!((pi.entries[0][0] + 0.3).abs() < 1e-3);
        assert_eq!(pi.entries[0][0], -p.u.y().im);
    }

    #[test]
    fn rejects_unit_gamma() {
        let p = random_pair(0);
        assert!(matches!(pi_of(&p, 1.0), Err(Error::DegenerateGamma { .. })));
        assert!(matches!(pi_of(&p, -1.0), Err(Error::DegenerateGamma { .. })));
        assert!(pi_det(&p, 0.0).is_err());
    }

    #[test]
    fn columns_match_finite_differences() {
        let h = 1e-6;
        for s in 0..25 {
            let p = random_pair(s);
            let pi = pi_of(&p, GAMMA).unwrap();
            for l in 0..3 {
                let mut dir = [0.0; 3];
                dir[l] = 1.0;
                let a = Su2Algebra::from_components(dir);
                let flow = |t: f64| {
                    invariants_of(&UnitaryPair::new(exp_su2(a, t) * p.u, exp_su2(a, GAMMA * t) * p.v)).coords()
                };
                let (fp, fm) = (flow(h), flow(-h));
                for j in 0..3 {
                    let fd = (fp[j] - fm[j]) / (2.0 * h);
                    assert!(
                        (fd - pi.entries[j][l]).abs() < 1e-6,
                        "({j},{l}) {fd} vs {}",
                        pi.entries[j][l]
                    );
                }
            }
        }
    }

    #[test]
    fn zero_velocity_gives_zero_control() {
        let u = pi_inverse_times(&random_pair(3), GAMMA, [0.0; 3]).unwrap();
        assert_eq!(u.components(), [0.0; 3]);
    }

    #[test]
    fn inverse_round_trip() {
        for s in 0..50 {
            let p = random_pair(s);
            let xdot = [0.3 * s as f64 - 1.0, 0.7, -0.2];
            let u = pi_inverse_times(&p, GAMMA, xdot).unwrap();
            let back = pi_of(&p, GAMMA).unwrap().apply(u.components());
            for j in 0..3 {
                assert!((back[j] - xdot[j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn helper_relations() {
        for s in 0..100 {
            let p = random_pair(s);
            let [_, x_i, y_r, y_i] = p.u.quaternion();
            let [_, z_i, w_r, w_i] = p.v.quaternion();
            let [d1, d2, d3] = deltas_of(&p);
            assert!((y_i * d1 - y_r * d2 + x_i * d3).abs() < 1e-12);
            assert!((w_i * d1 - w_r * d2 + z_i * d3).abs() < 1e-12);
        }
    }
}
