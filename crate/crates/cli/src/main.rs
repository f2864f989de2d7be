//! `smoothctl`: design, verify and inspect smooth two-spin controls.
//!
//! Exit codes: 0 success, 2 validation or verification failure, 3 singular
//! reduction, 4 bad input.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod report;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use smoothctl::export::{read_controls, trajectory_rows, write_controls, write_trace, write_trajectory};
use smoothctl::integrator::{StateTrace, SystemParams, DEFAULT_STEP};
use smoothctl::invariants::{commutator_norm, cylinder_coords, invariants_of, is_singular, UnitaryPair, SINGULAR_TOL};
use smoothctl::pipeline::{design, verify, VERIFY_THRESHOLD};
use smoothctl::Error;

use crate::config::{load_config, load_pair, parse_su2, BadInput};
use crate::report::DesignReport;

const OK: u8 = 0;
const FAILED: u8 = 2;
const SINGULAR: u8 = 3;
const BAD_INPUT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "smoothctl",
    version,
    about = "Smooth zero-endpoint controls for two spins in a common field"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full design and write controls, trajectory, trace and report.
    Design {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = VERIFY_THRESHOLD)]
        threshold: f64,
    },
    /// Re-integrate an exported control signal from the identity.
    Verify {
        #[arg(long)]
        controls: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        /// Gate name or four `re,im` entries in row order.
        #[arg(long, allow_hyphen_values = true)]
        target_u: String,
        #[arg(long, allow_hyphen_values = true)]
        target_v: String,
        #[arg(long, default_value_t = VERIFY_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
    },
    /// Print the quotient coordinates and regularity of a pair file.
    Invariants {
        #[arg(long)]
        pair: PathBuf,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<BadInput>().is_some() {
        return BAD_INPUT;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::SingularReduction { .. } | Error::SingularPoint { .. } | Error::SearchExhausted { .. }) => SINGULAR,
        Some(
            Error::ValidationFailed(_)
            | Error::StartMismatch { .. }
            | Error::OrbitMismatch { .. }
            | Error::DegenerateSpectrum
            | Error::NonFinite { .. },
        ) => FAILED,
        _ => BAD_INPUT,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn cmd_design(config: &Path, out: Option<PathBuf>, threshold: f64) -> Result<u8> {
    let started = Instant::now();
    let job = load_config(config)?;
    let out = out
        .or(job.out)
        .ok_or_else(|| BadInput("no output directory: pass --out or set `out`".into()))?;
    let cfg = job.config;
    let d = design(&cfg)?;
    fs::create_dir_all(&out).with_context(|| format!("cannot create {}", out.display()))?;

    write_controls(create(&out.join("controls.csv"))?, &d.signal)?;
    let (mut rows, mut trace, mut offset) = (Vec::new(), StateTrace::default(), 0.0);
    for leg in &d.legs {
        rows.extend(trajectory_rows(
            &leg.spec,
            cfg.validation_samples,
            offset + cfg.prelim.t1(),
        ));
        trace.append_shifted(&leg.trace, offset);
        offset += leg.duration();
    }
    write_trajectory(create(&out.join("trajectory.csv"))?, &rows)?;
    write_trace(create(&out.join("trace.csv"))?, &trace)?;

    let report = DesignReport::new(&cfg, &d, threshold);
    let json = serde_json::to_string_pretty(&report)? + "\n";
    fs::write(out.join("report.json"), json).with_context(|| format!("cannot write report in {}", out.display()))?;

    let v = &d.verification;
    println!(
        "legs: {}{}",
        d.legs.len(),
        if d.split { " (singular target split)" } else { "" }
    );
    println!("fidelity U: {:.10} (sign {:+})", v.fidelity_u, v.sign_u);
    println!("fidelity V: {:.10} (sign {:+})", v.fidelity_v, v.sign_v);
    println!("min Delta: {:.6e}", d.min_delta());
    println!("endpoint magnitude: {:.3e}", v.endpoint_magnitude);
    println!("discontinuities: {}", v.discontinuities.len());
    println!("elapsed: {:.3} s", started.elapsed().as_secs_f64());
    println!(
        "{}: artifacts in {}",
        if report.passed { "PASS" } else { "FAIL" },
        out.display()
    );
    Ok(if report.passed { OK } else { FAILED })
}

fn cmd_verify(controls: &Path, gamma: f64, target_u: &str, target_v: &str, threshold: f64, step: f64) -> Result<u8> {
    let file = File::open(controls).map_err(|e| BadInput(format!("cannot open {}: {e}", controls.display())))?;
    let signal = read_controls(file).map_err(|e| BadInput(e.to_string()))?;
    let params = SystemParams::new(gamma, step).map_err(|e| BadInput(e.to_string()))?;
    let target = UnitaryPair::new(parse_su2(target_u, "target_u")?, parse_su2(target_v, "target_v")?);
    let v = verify(&signal, &params, &target)?;
    println!("fidelity U: {:.10} (sign {:+})", v.fidelity_u, v.sign_u);
    println!("fidelity V: {:.10} (sign {:+})", v.fidelity_v, v.sign_v);
    println!("endpoint magnitude: {:.3e}", v.endpoint_magnitude);
    println!("max step: {:.3e}", v.max_step);
    println!("discontinuities: {}", v.discontinuities.len());
    for j in v.discontinuities.iter().take(10) {
        println!(
            "  t = {:.6}: jump {:.3e} (local bound {:.3e})",
            j.t, j.jump, j.local_bound
        );
    }
    let ok = v.fidelity_u >= threshold && v.fidelity_v >= threshold && v.endpoints_zero();
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { OK } else { FAILED })
}

fn cmd_invariants(pair: &Path) -> Result<u8> {
    let p = load_pair(pair)?;
    let x = invariants_of(&p);
    println!("x1 = {:.5}", x.x1);
    println!("x2 = {:.5}", x.x2);
    println!("x3 = {:.5}", x.x3);
    println!("Delta = {:.6e}", x.delta);
    println!("commutator = {:.6e}", commutator_norm(&p));
    let cyl = cylinder_coords(&p);
    println!("phi = {:.5}", cyl.phi);
    match (cyl.disc, cyl.psi) {
        (Some(z), _) => println!("disc = {:.5}{:+.5}i", z.re, z.im),
        (None, Some(psi)) => println!("psi = {psi:.5}"),
        (None, None) => {}
    }
    println!(
        "{}",
        if is_singular(&p, SINGULAR_TOL) {
            "singular"
        } else {
            "regular"
        }
    );
    Ok(OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Design { config, out, threshold } => cmd_design(&config, out, threshold),
        Command::Verify {
            controls,
            gamma,
            target_u,
            target_v,
            threshold,
            step,
        } => cmd_verify(&controls, gamma, &target_u, &target_v, threshold, step),
        Command::Invariants { pair } => cmd_invariants(&pair),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
