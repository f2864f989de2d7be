//! Sampled control waveforms `(t, u_x, u_y, u_z)`.

use crate::error::{Error, Result};

/// Endpoint and junction values below this count as zero.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlSample {
    pub t: f64,
    pub u: [f64; 3],
}

/// Where two signals were joined, and the size of the step across the join.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Junction {
    pub t: f64,
    pub jump: f64,
}

/// A detected step between consecutive samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Discontinuity {
    pub index: usize,
    pub t: f64,
    pub jump: f64,
    pub local_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ControlSignal {
    samples: Vec<ControlSample>,
    junctions: Vec<Junction>,
}

fn norm3(u: [f64; 3]) -> f64 {
    (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt()
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn diff3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

impl ControlSignal {
    /// Requires finite values and strictly increasing times.
    pub fn new(samples: Vec<ControlSample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if !s.t.is_finite() || s.u.iter().any(|v| !v.is_finite()) {
                return Err(Error::MalformedSignal(format!("non-finite sample at row {i}")));
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::MalformedSignal(format!(
                "times not strictly increasing at row {}",
                i + 1
            )));
        }
        Ok(Self {
            samples,
            junctions: Vec::new(),
        })
    }

    /// Samples `f` at `n + 1` evenly spaced times on `[t0, t1]`.
    pub fn sample_fn(f: impl Fn(f64) -> [f64; 3], t0: f64, t1: f64, n: usize) -> Result<Self> {
        let h = (t1 - t0) / n as f64;
        let samples = (0..=n)
            .map(|k| {
                let t = if k == n { t1 } else { t0 + k as f64 * h };
                ControlSample { t, u: f(t) }
            })
            .collect();
        Self::new(samples)
    }

    pub fn samples(&self) -> &[ControlSample] {
        &self.samples
    }

    pub fn junctions(&self) -> &[Junction] {
        &self.junctions
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.t)
    }

    pub fn end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn zero_at_start(&self) -> bool {
        self.samples.first().is_none_or(|s| norm3(s.u) <= ZERO_TOL)
    }

    pub fn zero_at_end(&self) -> bool {
        self.samples.last().is_none_or(|s| norm3(s.u) <= ZERO_TOL)
    }

    /// `max(|u(t_start)|, |u(t_end)|)`.
    pub fn endpoint_magnitude(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => norm3(a.u).max(norm3(b.u)),
            _ => 0.0,
        }
    }

    pub fn max_amplitude(&self) -> f64 {
        self.samples.iter().map(|s| norm3(s.u)).fold(0.0, f64::max)
    }

    /// Piecewise-linear interpolation; zero outside the sampled span.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        let s = &self.samples;
        if s.is_empty() || t < s[0].t || t > s[s.len() - 1].t {
            return [0.0; 3];
        }
        let k = s.partition_point(|x| x.t <= t);
        if k == s.len() {
            return s[k - 1].u;
        }
        let (a, b) = (&s[k - 1], &s[k]);
        let w = (t - a.t) / (b.t - a.t);
        std::array::from_fn(|i| a.u[i] + w * (b.u[i] - a.u[i]))
    }

    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|s| ControlSample { t: s.t + dt, u: s.u })
                .collect(),
            junctions: self
                .junctions
                .iter()
                .map(|j| Junction {
                    t: j.t + dt,
                    jump: j.jump,
                })
                .collect(),
        }
    }

    /// Applies `f` to every sample value; times and junctions are kept.
    pub fn map(&self, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|s| ControlSample { t: s.t, u: f(s.u) })
                .collect(),
            junctions: self.junctions.clone(),
        }
    }

    /// Appends `next`, re-timed to start where `self` ends.
    ///
    /// When the two shared endpoint times coincide, the first sample of
    /// `next` is dropped and the step between the two values is recorded as
    /// the junction jump.
    pub fn concat(&self, next: &ControlSignal) -> Self {
        if self.is_empty() {
            return next.clone();
        }
        if next.is_empty() {
            return self.clone();
        }
        let offset = self.end() - next.start();
        let moved = next.shifted(offset);
        let last = *self.samples.last().unwrap();
        let first = moved.samples[0];
        let mut samples = self.samples.clone();
        samples.extend_from_slice(&moved.samples[1..]);
        let mut junctions = self.junctions.clone();
        junctions.push(Junction {
            t: last.t,
            jump: norm3(diff3(first.u, last.u)),
        });
        junctions.extend(moved.junctions);
        Self { samples, junctions }
    }

    /// Flags steps `|Δu_i|` exceeding `factor` times the neighbouring steps
    /// (the local `|du/dt|·h` estimate) plus `floor`, and isolated spikes:
    /// two opposing steps that both exceed `factor` times the steps just
    /// outside them.
    pub fn discontinuities(&self, factor: f64, floor: f64) -> Vec<Discontinuity> {
        let deltas: Vec<[f64; 3]> = self.samples.windows(2).map(|w| diff3(w[1].u, w[0].u)).collect();
        let steps: Vec<f64> = deltas.iter().map(|d| norm3(*d)).collect();
        let n = steps.len();
        if n < 2 {
            return Vec::new();
        }
        let step_at = |i: usize| steps.get(i).copied().unwrap_or(0.0);
        let before = |i: usize| i.checked_sub(1).map_or(0.0, step_at);
        let mut flagged: Vec<(usize, f64)> = (0..n)
            .map(|i| (i, factor * before(i).max(step_at(i + 1)) + floor))
            .filter(|&(i, bound)| steps[i] > bound)
            .collect();
        for i in 0..n - 1 {
            if dot3(deltas[i], deltas[i + 1]) >= 0.0 {
                continue;
            }
            let bound = factor * before(i).max(step_at(i + 2)) + floor;
            if steps[i] > bound && steps[i + 1] > bound {
                flagged.extend([(i, bound), (i + 1, bound)]);
            }
        }
        flagged.sort_by_key(|&(i, _)| i);
        flagged.dedup_by_key(|&mut (i, _)| i);
        flagged
            .into_iter()
            .map(|(i, bound)| Discontinuity {
                index: i,
                t: self.samples[i].t,
                jump: steps[i],
                local_bound: bound,
            })
            .collect()
    }

    /// Largest step between consecutive samples.
    pub fn max_step(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| norm3(diff3(w[1].u, w[0].u)))
            .fold(0.0, f64::max)
    }
}
