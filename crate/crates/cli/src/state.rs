//! State presets, operator names and small argument parsers.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use qpd_core::ccr::CcrSystem;
use qpd_core::field_io::parse_matrix;
use qpd_core::linalg::{DensityOperator, HilbertSpec, Operator, C64};
use qpd_core::su2::{spin_coherent, SpherePoint, SpinSystem};

use crate::ConfigError;

/// `"1"`, `"3/2"` or `"1.5"` to `2j`.
pub fn parse_twice_j(text: &str) -> Result<u32> {
    let j = match text.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| ConfigError(format!("bad spin {text:?}")))?;
            let b: f64 = b.trim().parse().map_err(|_| ConfigError(format!("bad spin {text:?}")))?;
            a / b
        }
        None => text.trim().parse().map_err(|_| ConfigError(format!("bad spin {text:?}")))?,
    };
    let tj = 2.0 * j;
    if !(tj >= 1.0 && (tj - tj.round()).abs() < 1e-9) {
        return Err(ConfigError(format!("spin must be a positive half-integer, got {text:?}")).into());
    }
    Ok(tj.round() as u32)
}

/// `"a,b"` to a pair of floats.
pub fn parse_pair(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text.split_once(',').ok_or_else(|| ConfigError(format!("expected two comma-separated numbers, got {text:?}")))?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|_| ConfigError(format!("bad number {t:?}")));
    Ok((p(a)?, p(b)?))
}

pub fn load_matrix(space: &HilbertSpec, path: &Path) -> Result<Operator> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m = parse_matrix(&text)?;
    Ok(Operator::new(space.clone(), m)?)
}

pub fn spin_state(sys: &SpinSystem, preset: &str) -> Result<DensityOperator> {
    match preset.split_once(':') {
        None if preset == "jj" => Ok(sys.highest_weight()),
        None if preset == "mixed" => Ok(DensityOperator::maximally_mixed(sys.space())),
        Some(("coherent", rest)) => {
            let (theta, phi) = parse_pair(rest)?;
            Ok(DensityOperator::pure(sys.space(), &spin_coherent(sys, SpherePoint::new(theta, phi)))?)
        }
        _ => Err(ConfigError(format!("unknown spin state {preset:?} (jj, mixed, coherent:theta,phi)")).into()),
    }
}

pub fn ccr_state(sys: &CcrSystem, preset: &str) -> Result<DensityOperator> {
    let bad = || anyhow!(ConfigError(format!("bad state {preset:?}")));
    Ok(match preset.split_once(':') {
        None if preset == "vacuum" => sys.fock_state(0)?,
        None if preset == "mixed" => DensityOperator::maximally_mixed(sys.space()),
        Some(("fock", n)) => sys.fock_state(n.trim().parse().map_err(|_| bad())?)?,
        Some(("thermal", nbar)) => sys.thermal_state(nbar.trim().parse().map_err(|_| bad())?)?,
        Some(("coherent", rest)) => {
            let (re, im) = parse_pair(rest)?;
            sys.coherent_state(C64::new(re, im))?
        }
        _ => bail!(ConfigError(format!(
            "unknown state {preset:?} (vacuum, fock:n, coherent:re,im, thermal:nbar, mixed)"
        ))),
    })
}

pub fn spin_operator(sys: &SpinSystem, name: &str) -> Result<Operator> {
    Ok(match name {
        "jx" => sys.jx(),
        "jy" => sys.jy(),
        "jz" => sys.jz(),
        "id" => Operator::identity(sys.space()),
        _ => bail!(ConfigError(format!("unknown spin operator {name:?} (jx, jy, jz, id)"))),
    })
}

pub fn ccr_operator(sys: &CcrSystem, name: &str) -> Result<Operator> {
    Ok(match name {
        "a" => sys.annihilation(),
        "adag" => sys.creation(),
        "n" => sys.number(),
        "q" => sys.position(),
        "p" => sys.momentum(),
        "id" => Operator::identity(sys.space()),
        _ => bail!(ConfigError(format!("unknown operator {name:?} (a, adag, n, q, p, id)"))),
    })
}
