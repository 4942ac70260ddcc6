//! Text front ends used by the CLI and the fuzz targets. Every entry point
//! returns an error on malformed input and never panics.

use std::f64::consts::PI;

use crate::montecarlo::ExperimentConfig;
use crate::process::TriangularPath;
use crate::spectrum::{EigenSpec, UnitRootMode};
use crate::{Complex64, Error, Result};

const MAX_INPUT: usize = 1 << 20;

fn bad(what: &str, s: &str) -> Error {
    let shown: String = s.chars().take(40).collect();
    Error::Parse(format!("invalid {what}: '{shown}'"))
}

fn finite(x: f64, what: &str, s: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad(what, s))
    }
}

fn real(s: &str) -> Result<f64> {
    let t = s.trim();
    // reject forms Rust accepts but users should not rely on
    if t.is_empty() || t.eq_ignore_ascii_case("nan") || t.to_ascii_lowercase().contains("inf") {
        return Err(bad("number", s));
    }
    let x: f64 = t.parse().map_err(|_| bad("number", s))?;
    finite(x, "number", s)
}

/// Angle in radians, written as a number or as `[k*]pi[/m]`, optionally signed.
fn angle(s: &str) -> Result<f64> {
    let t = s.trim();
    if !t.contains("pi") {
        return real(t);
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, t.strip_prefix('+').unwrap_or(t).trim()),
    };
    let (num, den) = match body.split_once('/') {
        Some((a, b)) => (a.trim(), real(b)?),
        None => (body, 1.0),
    };
    if den == 0.0 {
        return Err(bad("angle", s));
    }
    let factor = match num.strip_suffix("pi").map(str::trim) {
        Some("") => 1.0,
        Some(k) => real(k.strip_suffix('*').unwrap_or(k))?,
        None => return Err(bad("angle", s)),
    };
    finite(sign * factor * PI / den, "angle", s)
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` or polar `r@theta` (theta in radians,
/// `pi` allowed).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad("complex number", s));
    }
    if let Some((r, th)) = t.split_once('@') {
        let r = real(r)?;
        return Ok(Complex64::from_polar(r, angle(th)?));
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return Ok(Complex64::new(real(&t)?, 0.0));
    };
    // split at the last sign that is not part of an exponent or the leading sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (real(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => real(other)?,
    };
    Ok(Complex64::new(re, im))
}

/// Comma-separated list of complex numbers; empty input gives an empty list.
pub fn parse_bulk_list(s: &str) -> Result<Vec<Complex64>> {
    if s.len() > MAX_INPUT {
        return Err(Error::Parse("bulk list too long".into()));
    }
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_complex).collect()
}

pub fn parse_unit_root_mode(s: &str) -> Result<UnitRootMode> {
    s.parse()
}

pub fn parse_eigen_spec_json(s: &str) -> Result<EigenSpec> {
    Ok(serde_json::from_str(s)?)
}

pub fn parse_path_csv(s: &str, p: usize) -> Result<TriangularPath> {
    if !(1..=crate::spectrum::MAX_ORDER).contains(&p) {
        return Err(Error::Parameter(format!("order p = {p} out of range")));
    }
    TriangularPath::from_csv(s, p)
}

pub fn parse_experiment_config_json(s: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(s)?;
    cfg.validate()?;
    Ok(cfg)
}
