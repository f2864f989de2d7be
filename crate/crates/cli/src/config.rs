//! Flat `key = value` configuration files.
//!
//! Lines starting with `#` are comments. Complex numbers are written
//! `re,im`; a 2×2 matrix is four entries in row order separated by
//! whitespace or `;`, or one of the gate names `hadamard1`, `hadamard2`,
//! `identity`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use num_complex::Complex64;
use smoothctl::gates;
use smoothctl::invariants::UnitaryPair;
use smoothctl::pipeline::DesignConfig;
use smoothctl::prelim::PrelimParams;
use smoothctl::reduction::check_gamma;
use smoothctl::su::Su2;

/// Matrices farther than this from SU(2) are rejected.
pub const UNITARY_TOL: f64 = 1e-8;

/// Matrices farther than this from SU(2) are renormalized with a warning.
pub const RENORM_WARN: f64 = 1e-10;

/// Environment variable overriding the configured seed.
pub const SEED_ENV: &str = "SMOOTHCTL_SEED";

const KEYS: [&str; 12] = [
    "gamma",
    "delta0",
    "epsilon0",
    "t1",
    "t2",
    "target_u",
    "target_v",
    "step",
    "delta_floor",
    "seed",
    "validation_samples",
    "out",
];

/// Input the user got wrong; maps to the bad-input exit code.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct BadInput(pub String);

fn bad(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(BadInput(msg.into()))
}

/// Parses `key = value` lines, rejecting unknown and repeated keys.
pub fn parse_pairs(text: &str, allowed: &[&str]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("line {}: expected `key = value`", n + 1)))?;
        let key = key.trim().to_ascii_lowercase();
        if !allowed.contains(&key.as_str()) {
            return Err(bad(format!("line {}: unknown key `{key}`", n + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(bad(format!("line {}: duplicate key `{key}`", n + 1)));
        }
    }
    Ok(map)
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad(format!("bad complex entry `{s}`")))
    };
    Ok(Complex64::new(num(re)?, num(im)?))
}

/// Parses a gate name or four row-ordered complex entries into SU(2),
/// renormalizing small deviations.
pub fn parse_su2(spec: &str, what: &str) -> Result<Su2> {
    if let Some(g) = gates::named(spec) {
        return Ok(g);
    }
    let mut tidy = spec.replace(';', " ");
    while tidy.contains(" ,") || tidy.contains(", ") {
        tidy = tidy.replace(" ,", ",").replace(", ", ",");
    }
    let entries = tidy.split_whitespace().map(parse_complex).collect::<Result<Vec<_>>>()?;
    if entries.len() != 4 {
        return Err(bad(format!(
            "{what}: expected 4 complex entries or a gate name, got `{spec}`"
        )));
    }
    let m = [[entries[0], entries[1]], [entries[2], entries[3]]];
    let residual = su2_residual(&m);
    if !(residual <= UNITARY_TOL) {
        return Err(bad(format!("{what} is not in SU(2) (residual {residual:.3e})")));
    }
    if residual > RENORM_WARN {
        eprintln!("warning: {what} renormalized onto SU(2) (residual {residual:.3e})");
    }
    Su2::from_matrix(m, UNITARY_TOL).map_err(|e| bad(format!("{what}: {e}")))
}

/// Largest deviation of `M†M = I` and `det M = 1`.
fn su2_residual(m: &[[Complex64; 2]; 2]) -> f64 {
    let mut worst = (m[0][0] * m[1][1] - m[0][1] * m[1][0] - 1.0).norm();
    for i in 0..2 {
        for j in 0..2 {
            let g = m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - want).norm());
        }
    }
    worst
}

fn real(map: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad(format!("`{key}` must be a finite number, got `{v}`"))),
    }
}

/// A parsed design job.
#[derive(Clone, Debug)]
pub struct Job {
    pub config: DesignConfig,
    pub out: Option<PathBuf>,
}

/// Parses a design configuration; missing keys take the defaults of
/// [`DesignConfig::default`]. `seed_override` replaces the `seed` key.
pub fn parse_config(text: &str, seed_override: Option<&str>) -> Result<Job> {
    let map = parse_pairs(text, &KEYS)?;
    let d = DesignConfig::default();
    let gamma = real(&map, "gamma", d.gamma)?;
    check_gamma(gamma).map_err(|e| bad(e.to_string()))?;
    let prelim = PrelimParams::new(
        real(&map, "delta0", d.prelim.delta0())?,
        real(&map, "epsilon0", d.prelim.epsilon0())?,
        real(&map, "t1", d.prelim.t1())?,
    )
    .map_err(|e| bad(e.to_string()))?;
    let t2 = real(&map, "t2", d.t2)?;
    let step = real(&map, "step", d.step)?;
    let delta_floor = real(&map, "delta_floor", d.delta_floor)?;
    if !(t2 > 0.0 && step > 0.0 && delta_floor >= 0.0) {
        return Err(bad("t2 and step must be positive and delta_floor non-negative"));
    }
    let u = map.get("target_u").map(|s| parse_su2(s, "target_u")).transpose()?;
    let v = map.get("target_v").map(|s| parse_su2(s, "target_v")).transpose()?;
    let target = UnitaryPair::new(u.unwrap_or(d.target.u), v.unwrap_or(d.target.v));
    let seed_text = seed_override.or(map.get("seed").map(String::as_str));
    let seed = match seed_text {
        None => d.seed,
        Some(s) => s
            .trim()
            .parse::<u64>()
            .map_err(|_| bad(format!("seed must be a non-negative integer, got `{s}`")))?,
    };
    let validation_samples = match map.get("validation_samples") {
        None => d.validation_samples,
        Some(s) => s
            .parse::<usize>()
            .map_err(|_| bad(format!("validation_samples must be an integer, got `{s}`")))?,
    };
    Ok(Job {
        config: DesignConfig {
            gamma,
            prelim,
            t2,
            target,
            step,
            delta_floor,
            seed,
            validation_samples,
        },
        out: map.get("out").map(PathBuf::from),
    })
}

pub fn load_config(path: &Path) -> Result<Job> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    let seed = std::env::var(SEED_ENV).ok();
    parse_config(&text, seed.as_deref()).with_context(|| format!("in {}", path.display()))
}

/// Reads a pair file with keys `u` and `v`.
pub fn load_pair(path: &Path) -> Result<UnitaryPair> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    let map = parse_pairs(&text, &["u", "v"])?;
    let get = |k: &str| {
        map.get(k)
            .ok_or_else(|| bad(format!("{}: missing key `{k}`", path.display())))
            .and_then(|s| parse_su2(s, k))
    };
    Ok(UnitaryPair::new(get("u")?, get("v")?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_comments() {
        let job = parse_config("# nothing\n\n", None).unwrap();
        assert_eq!(job.config, DesignConfig::default());
        assert!(job.out.is_none());
    }

    #[test]
    fn full_config() {
        let text = "gamma = 2.5\nt2 = 8\ntarget_u = identity\ntarget_v = 0,0; 1,0; -1,0; 0,0\nseed = 7\nout = run";
        let job = parse_config(text, None).unwrap();
        assert_eq!(job.config.gamma, 2.5);
        assert_eq!(job.config.t2, 8.0);
        assert_eq!(job.config.seed, 7);
        assert_eq!(job.config.target.u, Su2::identity());
        assert!(
            job.config
                .target
                .v
                .max_entry_diff(&Su2::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)))
                < 1e-15
        );
        assert_eq!(job.out, Some(PathBuf::from("run")));
    }

    #[test]
    fn seed_override_wins() {
        let job = parse_config("seed = 3", Some("11")).unwrap();
        assert_eq!(job.config.seed, 11);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "gamma = 1",
            "gamma = -1",
            "bogus = 2",
            "gamma = 2\ngamma = 3",
            "target_u = 1,0 0,0 0,0 2,0",
            "target_u = 1,0 0,0",
            "t2 = -1",
            "no equals sign",
        ] {
            let err = parse_config(text, None).unwrap_err();
            assert!(err.downcast_ref::<BadInput>().is_some(), "{text}: {err}");
        }
    }

    #[test]
    fn renormalizes_small_deviations() {
        let h = std::f64::consts::FRAC_1_SQRT_2 * (1.0 + 1e-9);
        let spec = format!("{h},0 {h},0 -{h},0 {h},0");
        let g = parse_su2(&spec, "u").unwrap();
        assert!((g.x().norm_sqr() + g.y().norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex(" 0.5 , -2 ").unwrap(), Complex64::new(0.5, -2.0));
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
        assert!(parse_complex("a,b").is_err());
    }
}
