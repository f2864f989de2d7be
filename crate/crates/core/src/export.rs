//! CSV import and export of control signals, trajectories and state traces.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::integrator::StateTrace;
use crate::signal::{ControlSample, ControlSignal};
use crate::trajectory::TrajectorySpec;

pub const CONTROLS_HEADER: [&str; 4] = ["t", "ux", "uy", "uz"];
pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "x1", "x2", "x3", "dx1", "dx2", "dx3", "Delta"];
pub const TRACE_HEADER: [&str; 13] = [
    "t", "xR", "xI", "yR", "yI", "zR", "zI", "wR", "wI", "x1", "x2", "x3", "Delta",
];

/// 17 significant digits.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_controls<W: Write>(out: W, signal: &ControlSignal) -> Result<()> {
    write_rows(
        out,
        &CONTROLS_HEADER,
        signal.samples().iter().map(|s| vec![s.t, s.u[0], s.u[1], s.u[2]]),
    )
}

/// Reads a `t,ux,uy,uz` file; the header must match exactly.
pub fn read_controls<R: Read>(input: R) -> Result<ControlSignal> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().map(str::trim).ne(CONTROLS_HEADER) {
        return Err(Error::MalformedSignal(format!(
            "expected header {}, got {}",
            CONTROLS_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut samples = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::MalformedSignal(format!(
                "row {} has {} fields",
                i + 1,
                rec.len()
            )));
        }
        let mut v = [0.0; 4];
        for (j, field) in rec.iter().enumerate() {
            v[j] = field
                .trim()
                .parse()
                .map_err(|_| Error::MalformedSignal(format!("row {}: cannot parse {field:?}", i + 1)))?;
        }
        samples.push(ControlSample {
            t: v[0],
            u: [v[1], v[2], v[3]],
        });
    }
    ControlSignal::new(samples)
}

/// Planned coordinates, velocities and Δ on `n + 1` grid points, re-timed by
/// `offset`.
pub fn trajectory_rows(spec: &TrajectorySpec, n: usize, offset: f64) -> Vec<Vec<f64>> {
    (0..=n)
        .map(|k| {
            let t = if k == n {
                spec.t2()
            } else {
                spec.t2() * k as f64 / n as f64
            };
            let p = spec.point_clamped(t);
            let v = spec.velocity_clamped(t);
            vec![t + offset, p.x1, p.x2, p.x3, v[0], v[1], v[2], p.delta]
        })
        .collect()
}

pub fn write_trajectory<W: Write>(out: W, rows: &[Vec<f64>]) -> Result<()> {
    write_rows(out, &TRAJECTORY_HEADER, rows.iter().cloned())
}

pub fn write_trace<W: Write>(out: W, trace: &StateTrace) -> Result<()> {
    write_rows(
        out,
        &TRACE_HEADER,
        trace.rows.iter().map(|r| {
            let mut row = Vec::with_capacity(13);
            row.push(r.t);
            row.extend_from_slice(&r.state);
            row.extend_from_slice(&[r.invariants.x1, r.invariants.x2, r.invariants.x3, r.invariants.delta]);
            row
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn controls_round_trip() {
        let s = ControlSignal::sample_fn(|t| [t.sin(), 1e-300 * t, -t / 3.0], 0.0, 1.0, 50).unwrap();
        let mut buf = Vec::new();
        write_controls(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,ux,uy,uz\n"));
        let back = read_controls(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(read_controls("t,x,y,z\n0,0,0,0\n".as_bytes()).is_err());
        assert!(read_controls("t,ux,uy,uz\n0,0,zero,0\n".as_bytes()).is_err());
        assert!(read_controls("t,ux,uy,uz\n1,0,0,0\n0,0,0,0\n".as_bytes()).is_err());
        assert!(read_controls("t,ux,uy,uz\n".as_bytes()).unwrap().is_empty());
    }
}
