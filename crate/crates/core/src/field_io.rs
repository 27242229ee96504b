//! Plain-text formats for fields and density matrices.
//!
//! Field files are CSV with one header line
//! `# s=<s> backend=<backend> grid=<a>x<b>` followed by rows
//! `c1,c2,value` (real fields) or `c1,c2,re,im` (complex fields), in grid
//! order. Floats are written in shortest round-trip exponent form.
//!
//! Matrix files hold one row per line with `re,im` pairs interleaved.

use std::fmt::Write as _;

use crate::error::{QpdError, Result};
use crate::linalg::{CMatrix, C64};
use crate::spectral::{PhaseSpace, QPDField};

/// Imaginary parts below this are dropped when writing a field as real.
pub const REAL_FIELD_TOL: f64 = 1e-10;

/// A field read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub s: f64,
    pub backend: String,
    pub shape: (usize, usize),
    pub coords: Vec<(f64, f64)>,
    pub values: Vec<C64>,
}

/// Serialize a field. Written as real columns when every imaginary part is
/// below [`REAL_FIELD_TOL`].
pub fn format_field<X: PhaseSpace>(space: &X, field: &QPDField<X::Point>, backend: &str) -> String {
    let (a, b) = field.grid.layout().shape();
    let complex = field.max_imag() > REAL_FIELD_TOL;
    let mut out = String::with_capacity(field.values.len() * 48);
    let _ = writeln!(out, "# s={} backend={} grid={}x{}", field.s, backend, a, b);
    for (&p, v) in field.grid.nodes().iter().zip(&field.values) {
        let (c1, c2) = space.coords(p);
        if complex {
            let _ = writeln!(out, "{:e},{:e},{:e},{:e}", c1, c2, v.re, v.im);
        } else {
            let _ = writeln!(out, "{:e},{:e},{:e}", c1, c2, v.re);
        }
    }
    out
}

pub fn parse_field(text: &str) -> Result<FieldFile> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| QpdError::Parse("empty field file".into()))?;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| QpdError::Parse(format!("field header must start with '#': {header:?}")))?;
    let (mut s, mut backend, mut shape) = (None, None, None);
    for tok in header.split_whitespace() {
        if let Some(v) = tok.strip_prefix("s=") {
            s = Some(v.parse::<f64>().map_err(|e| QpdError::Parse(format!("bad s in header: {e}")))?);
        } else if let Some(v) = tok.strip_prefix("backend=") {
            backend = Some(v.to_string());
        } else if let Some(v) = tok.strip_prefix("grid=") {
            shape = Some(parse_shape(v)?);
        }
    }
    let s = s.ok_or_else(|| QpdError::Parse("header lacks s=".into()))?;
    let backend = backend.ok_or_else(|| QpdError::Parse("header lacks backend=".into()))?;
    let shape = shape.ok_or_else(|| QpdError::Parse("header lacks grid=".into()))?;

    let mut coords = Vec::with_capacity(shape.0 * shape.1);
    let mut values = Vec::with_capacity(shape.0 * shape.1);
    for (n, line) in lines.enumerate() {
        let nums = parse_numbers(line).map_err(|e| QpdError::Parse(format!("row {}: {e}", n + 1)))?;
        let v = match nums.len() {
            3 => C64::new(nums[2], 0.0),
            4 => C64::new(nums[2], nums[3]),
            k => return Err(QpdError::Parse(format!("row {}: expected 3 or 4 columns, found {k}", n + 1))),
        };
        coords.push((nums[0], nums[1]));
        values.push(v);
    }
    if values.len() != shape.0 * shape.1 {
        return Err(QpdError::Parse(format!("grid {}x{} needs {} rows, found {}", shape.0, shape.1, shape.0 * shape.1, values.len())));
    }
    Ok(FieldFile { s, backend, shape, coords, values })
}

/// `"64x128"` to `(64, 128)`.
pub fn parse_shape(text: &str) -> Result<(usize, usize)> {
    let (a, b) = text.split_once('x').ok_or_else(|| QpdError::Parse(format!("grid must look like AxB, got {text:?}")))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| QpdError::Parse(format!("bad grid size {t:?}: {e}")));
    Ok((p(a)?, p(b)?))
}

fn parse_numbers(line: &str) -> std::result::Result<Vec<f64>, String> {
    line.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"))).collect()
}

/// Row-major complex matrix, each line `re,im,re,im,...`. Lines starting
/// with `#` are ignored.
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(n, l)| parse_numbers(l).map_err(|e| QpdError::Parse(format!("matrix row {}: {e}", n + 1))))
        .collect::<Result<_>>()?;
    let d = rows.len();
    if d == 0 {
        return Err(QpdError::Parse("empty matrix file".into()));
    }
    for (n, r) in rows.iter().enumerate() {
        if r.len() != 2 * d {
            return Err(QpdError::Parse(format!(
                "matrix row {} has {} numbers; a {d}x{d} matrix needs {} (re,im pairs)",
                n + 1,
                r.len(),
                2 * d
            )));
        }
    }
    Ok(CMatrix::from_fn(d, d, |r, c| C64::new(rows[r][2 * c], rows[r][2 * c + 1])))
}

pub fn format_matrix(m: &CMatrix) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:e},{:e}", m[(r, c)].re, m[(r, c)].im)).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{husimi_spin, sphere_grid, SpinSystem};
    use proptest::prelude::*;
    use std::sync::Arc;

    #[test]
    fn field_round_trip_is_exact() {
        let sys = SpinSystem::new(2).unwrap();
        let grid = Arc::new(sphere_grid(&sys, 5, 7).unwrap());
        let f = husimi_spin(&sys, &sys.highest_weight(), &grid).unwrap();
        let text = format_field(&sys, &f, "spin(j=1)");
        assert!(text.starts_with("# s=1 backend=spin(j=1) grid=5x7\n"));
        let back = parse_field(&text).unwrap();
        assert_eq!(back.shape, (5, 7));
        assert_eq!(back.backend, "spin(j=1)");
        assert_eq!(back.values, f.values);
        assert_eq!(back.coords[3], (grid.nodes()[3].theta, grid.nodes()[3].phi));
    }

    #[test]
    fn rejects_malformed_fields() {
        assert!(parse_field("").is_err());
        assert!(parse_field("s=1 backend=x grid=1x1\n0,0,1\n").is_err());
        assert!(parse_field("# s=1 backend=x grid=1x2\n0,0,1\n").is_err());
        assert!(parse_field("# s=1 backend=x grid=1x1\n0,0\n").is_err());
        assert!(parse_field("# backend=x grid=1x1\n0,0,1\n").is_err());
        assert!(parse_field("# s=1 backend=x grid=1x1\n0,0,1,2\n").is_ok());
    }

    #[test]
    fn matrix_parse() {
        let m = parse_matrix("# rho\n0.5,0,0,0.1\n0,-0.1,0.5,0\n").unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.0, 0.1));
        assert_eq!(m[(1, 0)], C64::new(0.0, -0.1));
        assert!(parse_matrix("1,0,0\n0,0,1,0\n").is_err());
        assert!(parse_matrix("\n").is_err());
    }

    proptest! {
        #[test]
        fn matrix_round_trip(entries in proptest::collection::vec(-1e3f64..1e3, 18)) {
            let m = CMatrix::from_fn(3, 3, |r, c| C64::new(entries[2 * (3 * r + c)], entries[2 * (3 * r + c) + 1]));
            prop_assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
        }
    }
}
