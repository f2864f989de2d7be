//! Cubic quotient-space trajectories and their feasibility checks.

use std::fmt;

use crate::error::{Error, Result};
use crate::invariants::InvariantPoint;

/// Default lower bound on Δ along a validated trajectory.
pub const DELTA_FLOOR: f64 = 1e-4;

/// Minimum validation grid size.
pub const MIN_SAMPLES: usize = 100;

/// Per-coordinate `c₀ + c₂t² + c₃t³`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cubic {
    pub c0: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Cubic {
    fn through(x0: f64, xf: f64, t2: f64) -> Self {
        let d = xf - x0;
        Self {
            c0: x0,
            c2: 3.0 * d / (t2 * t2),
            c3: -2.0 * d / (t2 * t2 * t2),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.c0 + t * t * (self.c2 + t * self.c3)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        t * (2.0 * self.c2 + 3.0 * self.c3 * t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySpec {
    t2: f64,
    start: InvariantPoint,
    goal: InvariantPoint,
    cubics: [Cubic; 3],
}

impl TrajectorySpec {
    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn start(&self) -> InvariantPoint {
        self.start
    }

    pub fn goal(&self) -> InvariantPoint {
        self.goal
    }

    pub fn cubics(&self) -> &[Cubic; 3] {
        &self.cubics
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(0.0..=self.t2).contains(&t) {
            return Err(Error::OutOfRange {
                t,
                lo: 0.0,
                hi: self.t2,
            });
        }
        Ok(())
    }

    pub fn position(&self, t: f64) -> Result<[f64; 3]> {
        self.check(t)?;
        Ok(self.position_clamped(t))
    }

    /// Coordinates and Δ at `t`.
    pub fn point(&self, t: f64) -> Result<InvariantPoint> {
        self.check(t)?;
        Ok(self.point_clamped(t))
    }

    pub fn velocity(&self, t: f64) -> Result<[f64; 3]> {
        self.check(t)?;
        Ok(self.velocity_clamped(t))
    }

    pub(crate) fn position_clamped(&self, t: f64) -> [f64; 3] {
        let t = t.clamp(0.0, self.t2);
        self.cubics.map(|c| c.value(t))
    }

    pub(crate) fn point_clamped(&self, t: f64) -> InvariantPoint {
        let [a, b, c] = self.position_clamped(t);
        InvariantPoint::from_coords(a, b, c)
    }

    pub(crate) fn velocity_clamped(&self, t: f64) -> [f64; 3] {
        let t = t.clamp(0.0, self.t2);
        self.cubics.map(|c| c.derivative(t))
    }
}

/// `x(t) = x₀ + (x_f − x₀)(3s² − 2s³)` with `s = t/T₂`.
pub fn plan_cubic(start: InvariantPoint, goal: InvariantPoint, t2: f64) -> Result<TrajectorySpec> {
    if !(t2 > 0.0 && t2.is_finite()) {
        return Err(Error::InvalidParameter(format!("t2 must be positive, got {t2}")));
    }
    let (s, g) = (start.coords(), goal.coords());
    Ok(TrajectorySpec {
        t2,
        start,
        goal,
        cubics: std::array::from_fn(|j| Cubic::through(s[j], g[j], t2)),
    })
}

/// Free-function form of [`TrajectorySpec::velocity`].
pub fn velocity(spec: &TrajectorySpec, t: f64) -> Result<[f64; 3]> {
    spec.velocity(t)
}

/// Which feasibility condition failed first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    X1Bound,
    X2Bound,
    X3Lower,
    X3Upper,
    DeltaFloor,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::X1Bound => "|x1| < 1",
            Self::X2Bound => "|x2| < 1",
            Self::X3Lower => "x3 >= -1 - x1 x2",
            Self::X3Upper => "x3 <= 1 - x1 x2",
            Self::DeltaFloor => "Delta >= floor",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub constraint: Constraint,
    pub margin: f64,
}

/// Margins at one grid time; all are non-negative on a feasible point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginRow {
    pub t: f64,
    pub point: InvariantPoint,
    pub x1: f64,
    pub x2: f64,
    pub x3_lower: f64,
    pub x3_upper: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub passed: bool,
    pub delta_floor: f64,
    pub min_delta: f64,
    pub min_delta_t: f64,
    pub first_violation: Option<Violation>,
    pub rows: Vec<MarginRow>,
}

impl ValidationReport {
    pub fn summary(&self) -> String {
        match self.first_violation {
            None => format!(
                "passed; min Delta = {:.6e} at t = {:.4}",
                self.min_delta, self.min_delta_t
            ),
            Some(v) => format!(
                "{} violated at t = {:.4} (margin {:.6e}); min Delta = {:.6e}",
                v.constraint, v.t, v.margin, self.min_delta
            ),
        }
    }

    /// Converts a failed report into [`Error::ValidationFailed`].
    pub fn into_result(self) -> Result<Self> {
        if self.passed {
            Ok(self)
        } else {
            Err(Error::ValidationFailed(Box::new(self)))
        }
    }
}

fn margins(t: f64, p: InvariantPoint, floor: f64) -> (MarginRow, Option<Violation>) {
    let (x1, x2, x3) = (p.x1, p.x2, p.x3);
    let row = MarginRow {
        t,
        point: p,
        x1: 1.0 - x1.abs(),
        x2: 1.0 - x2.abs(),
        x3_lower: x3 + 1.0 + x1 * x2,
        x3_upper: 1.0 - x1 * x2 - x3,
        delta: p.delta,
    };
    let checks = [
        (Constraint::X1Bound, row.x1, row.x1 > 0.0),
        (Constraint::X2Bound, row.x2, row.x2 > 0.0),
        (Constraint::X3Lower, row.x3_lower, row.x3_lower >= 0.0),
        (Constraint::X3Upper, row.x3_upper, row.x3_upper >= 0.0),
        (Constraint::DeltaFloor, row.delta - floor, row.delta >= floor),
    ];
    let violation = checks
        .iter()
        .find(|c| !c.2)
        .map(|&(constraint, margin, _)| Violation { t, constraint, margin });
    (row, violation)
}

/// Checks a sampled trajectory `(t, point)` against the feasibility region.
pub fn validate_samples(points: &[(f64, InvariantPoint)], delta_floor: f64) -> ValidationReport {
    let mut rows = Vec::with_capacity(points.len());
    let mut first_violation = None;
    let (mut min_delta, mut min_delta_t) = (f64::INFINITY, 0.0);
    for &(t, p) in points {
        let (row, v) = margins(t, p, delta_floor);
        if first_violation.is_none() {
            first_violation = v;
        }
        if row.delta < min_delta {
            min_delta = row.delta;
            min_delta_t = t;
        }
        rows.push(row);
    }
    ValidationReport {
        passed: first_violation.is_none() && !points.is_empty(),
        delta_floor,
        min_delta,
        min_delta_t,
        first_violation,
        rows,
    }
}

pub fn validate_with_floor(spec: &TrajectorySpec, samples: usize, delta_floor: f64) -> Result<ValidationReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "validation needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let h = spec.t2 / samples as f64;
    let points: Vec<_> = (0..=samples)
        .map(|k| {
            let t = if k == samples { spec.t2 } else { k as f64 * h };
            (t, spec.point_clamped(t))
        })
        .collect();
    Ok(validate_samples(&points, delta_floor))
}

/// Validation with the default Δ floor.
pub fn validate(spec: &TrajectorySpec, samples: usize) -> Result<ValidationReport> {
    validate_with_floor(spec, samples, DELTA_FLOOR)
}
