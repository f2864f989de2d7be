//! Fixed-step RK4 propagation of `U̇ = σU`, `V̇ = γσV` with per-step
//! projection back onto SU(2)×SU(2).
//!
//! Two closed-loop routes are provided for quotient steering: computing the
//! control from Π⁻¹ and pushing it through the pair dynamics
//! ([`steer_on_quotient`]), and integrating the reduced eight-equation system
//! directly ([`integrate_reduced`]). They must agree.

use crate::error::{Error, Result};
use crate::invariants::{invariants_of, InvariantPoint, UnitaryPair};
use crate::reduction::{check_gamma, pi_inverse_times_at, REGULARITY_RATIO};
use crate::signal::{ControlSample, ControlSignal};
use crate::su::{Su2, Su2Algebra, C64};
use crate::trajectory::TrajectorySpec;

/// Ratio of gyromagnetic ratios for the ¹H–¹³C pair.
pub const HYDROGEN_CARBON_GAMMA: f64 = 1.0 / 0.2514;

pub const DEFAULT_STEP: f64 = 1e-3;

/// Start-orbit tolerance for quotient steering.
pub const START_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    gamma: f64,
    step: f64,
}

impl SystemParams {
    pub fn new(gamma: f64, step: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
        }
        Ok(Self { gamma, step })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            gamma: HYDROGEN_CARBON_GAMMA,
            step: DEFAULT_STEP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    /// `(x_R, x_I, y_R, y_I, z_R, z_I, w_R, w_I)`.
    pub state: [f64; 8],
    pub invariants: InvariantPoint,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StateTrace {
    pub rows: Vec<TraceRow>,
}

impl StateTrace {
    fn push(&mut self, t: f64, state: [f64; 8]) {
        let pair = UnitaryPair::from_reals(state);
        self.rows.push(TraceRow {
            t,
            state,
            invariants: invariants_of(&pair),
        });
    }

    /// Appends `other` re-timed by `offset`, skipping a duplicated join row.
    pub fn append_shifted(&mut self, other: &StateTrace, offset: f64) {
        let last_t = self.rows.last().map(|r| r.t);
        for r in &other.rows {
            let t = r.t + offset;
            if last_t.is_some_and(|lt| t <= lt) {
                continue;
            }
            self.rows.push(TraceRow { t, ..*r });
        }
    }

    pub fn min_delta(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.invariants.delta)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Result of a propagation run.
#[derive(Clone, Debug)]
pub struct Propagation {
    pub pair: UnitaryPair,
    pub signal: ControlSignal,
    pub trace: StateTrace,
    /// Largest `| ‖·‖ − 1 |` of either 4-vector seen before renormalization.
    pub max_norm_drift: f64,
}

/// Result of quotient steering.
#[derive(Clone, Debug)]
pub struct Steering {
    pub pair: UnitaryPair,
    pub signal: ControlSignal,
    pub trace: StateTrace,
    pub max_norm_drift: f64,
    /// Largest `|invariants_of(p(t)) − spec(t)|` over the step grid.
    pub max_tracking_error: f64,
    /// `|invariants_of(p(T₂)) − goal|`.
    pub goal_residual: f64,
}

fn axpy<const N: usize>(a: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| a[i] + h * k[i])
}

/// One classical RK4 step.
pub fn rk4_step<const N: usize>(
    s: &[f64; N],
    t: f64,
    h: f64,
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
) -> Result<[f64; N]> {
    let k1 = f(t, s)?;
    rk4_finish(s, t, h, k1, f)
}

fn rk4_finish<const N: usize>(
    s: &[f64; N],
    t: f64,
    h: f64,
    k1: [f64; N],
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
) -> Result<[f64; N]> {
    let k2 = f(t + 0.5 * h, &axpy(s, 0.5 * h, &k1))?;
    let k3 = f(t + 0.5 * h, &axpy(s, 0.5 * h, &k2))?;
    let k4 = f(t + h, &axpy(s, h, &k3))?;
    Ok(std::array::from_fn(|i| {
        s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

/// Scales `s[off..off+4]` to unit length and returns the drift it removed.
fn renormalize(s: &mut [f64], off: usize) -> f64 {
    let n = s[off..off + 4].iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut s[off..off + 4] {
        *v /= n;
    }
    (n - 1.0).abs()
}

fn quaternion_rate(sigma: &Su2Algebra, q: &[f64]) -> [f64; 4] {
    let (dx, dy) = sigma.left_apply(C64::new(q[0], q[1]), C64::new(q[2], q[3]));
    [dx.re, dx.im, dy.re, dy.im]
}

/// Right-hand side of `U̇ = σU`, `V̇ = γσV` on the 8-real state.
pub fn pair_rhs(state: &[f64; 8], sigma: &Su2Algebra, gamma: f64) -> [f64; 8] {
    let a = quaternion_rate(sigma, &state[0..4]);
    let b = quaternion_rate(&sigma.scale(gamma), &state[4..8]);
    [a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]]
}

fn step_count(t0: f64, t1: f64, step: f64) -> Result<(usize, f64)> {
    let span = t1 - t0;
    if !(span >= 0.0 && span.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad time span [{t0}, {t1}]")));
    }
    let n = (span / step - 1e-9).ceil().max(0.0) as usize;
    Ok((n, if n == 0 { 0.0 } else { span / n as f64 }))
}

/// Step grid time, exact at the right end.
fn grid_time(t0: f64, t1: f64, h: f64, k: usize, n: usize) -> f64 {
    if k == n {
        t1
    } else {
        t0 + k as f64 * h
    }
}

/// Core loop: `control(t, state)` returns σ at a stage; samples are
/// recorded from the first stage of each step.
fn propagate(
    p0: &UnitaryPair,
    gamma: f64,
    step: f64,
    span: (f64, f64),
    control: impl Fn(f64, &[f64; 8]) -> Result<Su2Algebra>,
) -> Result<Propagation> {
    let (t0, t1) = span;
    let (n, h) = step_count(t0, t1, step)?;
    let mut state = p0.to_reals();
    let mut samples = Vec::with_capacity(n + 1);
    let mut trace = StateTrace::default();
    let mut max_norm_drift: f64 = 0.0;

    let sigma_at = |t: f64, s: &[f64; 8]| -> Result<Su2Algebra> {
        let sigma = control(t, s)?;
        if !sigma.is_finite() {
            return Err(Error::NonFinite { t });
        }
        Ok(sigma)
    };
    let eval = |t: f64, s: &[f64; 8]| sigma_at(t, s).map(|sg| pair_rhs(s, &sg, gamma));

    for k in 0..=n {
        let t = grid_time(t0, t1, h, k, n);
        trace.push(t, state);
        let sigma = sigma_at(t, &state)?;
        samples.push(ControlSample {
            t,
            u: sigma.components(),
        });
        if k == n {
            break;
        }
        let k1 = pair_rhs(&state, &sigma, gamma);
        let mut next = rk4_finish(&state, t, h, k1, eval)?;
        max_norm_drift = max_norm_drift
            .max(renormalize(&mut next, 0))
            .max(renormalize(&mut next, 4));
        state = next;
    }

    Ok(Propagation {
        pair: UnitaryPair::from_reals(state),
        signal: ControlSignal::new(samples)?,
        trace,
        max_norm_drift,
    })
}

/// Open-loop propagation under a time-varying `σ(t)`.
pub fn integrate_pair(
    p0: &UnitaryPair,
    sigma: impl Fn(f64) -> Su2Algebra,
    params: &SystemParams,
    t_span: (f64, f64),
) -> Result<(UnitaryPair, ControlSignal)> {
    let out = integrate_pair_traced(p0, sigma, params, t_span)?;
    Ok((out.pair, out.signal))
}

pub fn integrate_pair_traced(
    p0: &UnitaryPair,
    sigma: impl Fn(f64) -> Su2Algebra,
    params: &SystemParams,
    t_span: (f64, f64),
) -> Result<Propagation> {
    propagate(p0, params.gamma, params.step, t_span, |t, _| Ok(sigma(t)))
}

/// Like [`integrate_pair`] but with no restriction on `γ`.
///
/// Used by the preliminary phase, which is also meaningful for `γ = 1`.
pub fn integrate_pair_unchecked(
    p0: &UnitaryPair,
    sigma: impl Fn(f64) -> Su2Algebra,
    gamma: f64,
    step: f64,
    t_span: (f64, f64),
) -> Result<Propagation> {
    if !gamma.is_finite() {
        return Err(Error::DegenerateGamma { gamma });
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    propagate(p0, gamma, step, t_span, |t, _| Ok(sigma(t)))
}

/// Single-factor propagation of `U̇ = σ(t, U)U`.
pub fn integrate_su2(
    u0: &Su2,
    control: impl Fn(f64, &Su2) -> Result<Su2Algebra>,
    step: f64,
    t_span: (f64, f64),
) -> Result<(Su2, ControlSignal)> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    let p0 = UnitaryPair::new(*u0, *u0);
    let out = propagate(&p0, 1.0, step, t_span, |t, s| {
        control(t, &Su2::from_quaternion([s[0], s[1], s[2], s[3]]))
    })?;
    Ok((out.pair.u, out.signal))
}

fn check_start(p0: &UnitaryPair, spec: &TrajectorySpec) -> Result<()> {
    let residual = invariants_of(p0).distance(&spec.start());
    if !(residual <= START_TOL) {
        return Err(Error::StartMismatch { residual });
    }
    Ok(())
}

/// Closed-loop tracking of a quotient trajectory: at every stage
/// `u = Π⁻¹(p)·ẋ_spec(t)`.
pub fn steer_on_quotient(p0: &UnitaryPair, spec: &TrajectorySpec, params: &SystemParams) -> Result<Steering> {
    check_start(p0, spec)?;
    let gamma = params.gamma;
    let out = propagate(p0, gamma, params.step, (0.0, spec.t2()), |t, s| {
        let p = UnitaryPair::from_reals(*s);
        let xdot = spec.velocity_clamped(t);
        pi_inverse_times_at(&p, gamma, xdot, t)
    })?;
    let max_tracking_error = out
        .trace
        .rows
        .iter()
        .map(|r| r.invariants.distance(&spec.point_clamped(r.t)))
        .fold(0.0, f64::max);
    let goal_residual = invariants_of(&out.pair).distance(&spec.goal());
    Ok(Steering {
        pair: out.pair,
        signal: out.signal,
        trace: out.trace,
        max_norm_drift: out.max_norm_drift,
        max_tracking_error,
        goal_residual,
    })
}

/// The reduced system with `a = ẋ¹`, `b = ẋ²`, `c = ẋ³`.
pub fn reduced_rhs(state: &[f64; 8], abc: [f64; 3], gamma: f64) -> Result<[f64; 8]> {
    reduced_rhs_at(state, abc, gamma, 0.0)
}

fn reduced_rhs_at(state: &[f64; 8], abc: [f64; 3], gamma: f64, t: f64) -> Result<[f64; 8]> {
    check_gamma(gamma)?;
    let [x_r, x_i, y_r, y_i, z_r, z_i, w_r, w_i] = *state;
    let [a, b, c] = abc;
    let g = gamma;
    // Deltas from the raw stage state, which may sit slightly off the sphere.
    let d1 = z_i * y_r - x_i * w_r;
    let d2 = z_i * y_i - x_i * w_i;
    let d3 = w_r * y_i - w_i * y_r;
    let delta = d1 * d1 + d2 * d2 + d3 * d3;
    let det = g * (g - 1.0) * delta;
    let threshold = REGULARITY_RATIO * (g * (g - 1.0)).abs();
    if !(det.abs() >= threshold) {
        return Err(Error::SingularReduction { t, det, threshold });
    }
    let zz = x_i * z_i + y_r * w_r + y_i * w_i;
    let gg1 = g * (g - 1.0);

    let k_u = gg1 * delta;
    let s_u = g * g * z_r * a + g * c + g * b * x_r;
    let dx_i = ((1.0 - g) * d3 * b
        + s_u * (x_r * d3 - y_i * d2 - y_r * d1)
        + gg1 * a * (d3 * zz + x_r * (w_i * d2 + w_r * d1)))
        / k_u;
    let dy_r = ((g - 1.0) * d2 * b
        + s_u * (x_i * d1 - x_r * d2 - y_i * d3)
        + gg1 * a * (-d2 * zz + x_r * (w_i * d3 - z_i * d1)))
        / k_u;
    let dy_i = ((1.0 - g) * d1 * b
        + s_u * (x_r * d1 + x_i * d2 + y_r * d3)
        + gg1 * a * (d1 * zz - x_r * (w_r * d3 + z_i * d2)))
        / k_u;

    let k_v = (g - 1.0) * delta;
    let s_v = g * z_r * a + g * c + x_r * b;
    let dz_i = (gg1 * d3 * a
        + s_v * (z_r * d3 - w_r * d1 - w_i * d2)
        + (1.0 - g) * b * (d3 * zz + z_r * (y_r * d1 + y_i * d2)))
        / k_v;
    let dw_r = (g * (1.0 - g) * d2 * a
        + s_v * (z_i * d1 - d3 * w_i - z_r * d2)
        + (g - 1.0) * b * (d2 * zz + z_r * (x_i * d1 - y_i * d3)))
        / k_v;
    let dw_i = (gg1 * d1 * a
        + s_v * (d1 * z_r + z_i * d2 + w_r * d3)
        + (g - 1.0) * b * (-d1 * zz + z_r * (y_r * d3 + x_i * d2)))
        / k_v;

    Ok([a, dx_i, dy_r, dy_i, b, dz_i, dw_r, dw_i])
}

/// Quotient steering by direct integration of [`reduced_rhs`].
pub fn integrate_reduced(p0: &UnitaryPair, spec: &TrajectorySpec, params: &SystemParams) -> Result<UnitaryPair> {
    check_start(p0, spec)?;
    let gamma = params.gamma;
    let (n, h) = step_count(0.0, spec.t2(), params.step)?;
    let mut state = p0.to_reals();
    for k in 0..n {
        let t = grid_time(0.0, spec.t2(), h, k, n);
        let mut next = rk4_step(&state, t, h, |t, s| {
            reduced_rhs_at(s, spec.velocity_clamped(t), gamma, t)
        })?;
        renormalize(&mut next, 0);
        renormalize(&mut next, 4);
        state = next;
    }
    Ok(UnitaryPair::from_reals(state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::pi_inverse_times;
    use crate::su::{exp_su2, random_su2};

    #[test]
    fn zero_control_keeps_pair() {
        let p0 = UnitaryPair::new(random_su2(1), random_su2(2));
        let (p, sig) = integrate_pair(&p0, |_| Su2Algebra::ZERO, &SystemParams::default(), (0.0, 1.0)).unwrap();
        assert!(p.max_entry_diff(&p0) < 1e-15);
        assert_eq!(sig.max_amplitude(), 0.0);
    }

    #[test]
    fn constant_sigma_z_matches_exponential() {
        let params = SystemParams::default();
        let z = Su2Algebra::new(0.0, 0.0, 1.0);
        let p0 = UnitaryPair::new(random_su2(5), random_su2(6));
        let (p, _) = integrate_pair(&p0, |_| z, &params, (0.0, 1.0)).unwrap();
        let want = UnitaryPair::new(exp_su2(z, 1.0) * p0.u, exp_su2(z, params.gamma()) * p0.v);
        assert!(p.max_entry_diff(&want) < 1e-9);
    }

    #[test]
    fn step_grid_covers_span() {
        assert_eq!(step_count(0.0, 1.0, 1e-3).unwrap().0, 1000);
        assert_eq!(step_count(0.0, 10.0, 1e-3).unwrap().0, 10000);
        let (n, h) = step_count(0.0, 0.9995, 1e-3).unwrap();
        assert!(h <= 1e-3 && (n as f64 * h - 0.9995).abs() < 1e-12);
        assert_eq!(step_count(0.0, 0.0, 1e-3).unwrap().0, 0);
    }

    #[test]
    fn reduced_rhs_zero_velocity() {
        let p = UnitaryPair::new(random_su2(8), random_su2(9));
        let r = reduced_rhs(&p.to_reals(), [0.0; 3], HYDROGEN_CARBON_GAMMA).unwrap();
        assert_eq!(r, [0.0; 8]);
    }

    #[test]
    fn reduced_rhs_matches_path_a() {
        let g = HYDROGEN_CARBON_GAMMA;
        for s in 0..100u64 {
            let p = UnitaryPair::new(random_su2(3 * s + 40), random_su2(3 * s + 41));
            let abc = [0.3 - 0.01 * s as f64, -0.8, 1.1];
            let u = pi_inverse_times(&p, g, abc).unwrap();
            let a = pair_rhs(&p.to_reals(), &u, g);
            let b = reduced_rhs(&p.to_reals(), abc, g).unwrap();
            let scale = 1.0 + a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for i in 0..8 {
                assert!((a[i] - b[i]).abs() < 1e-10 * scale, "{i}: {} vs {}", a[i], b[i]);
            }
            assert_eq!(b[0], abc[0]);
            assert_eq!(b[4], abc[1]);
        }
    }

    #[test]
    fn record_matches_commanded_control() {
        let sig = |t: f64| Su2Algebra::new(t.sin(), 0.5 * t, -t * t);
        let (_, s) = integrate_pair(&UnitaryPair::identity(), sig, &SystemParams::default(), (0.0, 0.5)).unwrap();
        for x in s.samples() {
            let want = sig(x.t).components();
            assert!(x.u.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }
}
