//! One-dimensional quadrature rules and special functions.

use std::f64::consts::PI;

use crate::error::{QpdError, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
///
/// Exact for polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(QpdError::QuadratureTooSmall("Gauss-Legendre needs at least one node".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `P_0(x) .. P_lmax(x)` by the three-term recurrence.
pub fn legendre_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(1.0);
    if lmax == 0 {
        return out;
    }
    out.push(x);
    for l in 2..=lmax {
        let lf = l as f64;
        let p = ((2.0 * lf - 1.0) * x * out[l - 1] - (lf - 1.0) * out[l - 2]) / lf;
        out.push(p);
    }
    out
}

/// Real spherical harmonics up to degree `lmax`, orthonormal on the unit
/// sphere (`integral dOmega Y Y' = delta`).
///
/// Index of `(l, m)` with `-l <= m <= l` is `l*l + l + m`.
pub fn real_spherical_harmonics(lmax: usize, theta: f64, phi: f64) -> Vec<f64> {
    let x = theta.cos();
    let sx = theta.sin().abs();
    let n = (lmax + 1) * (lmax + 1);
    let mut out = vec![0.0; n];
    // Normalized associated Legendre functions Pbar_l^m, with the
    // 1/sqrt(4 pi) and sqrt((2l+1)(l-m)!/(l+m)!) factors folded in.
    // pmm[m] holds Pbar_m^m; the column recurrence then runs upward in l.
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sx;
        }
        let mf = m as f64;
        let mut p_prev = 0.0;
        let mut p_cur = pmm;
        for l in m..=lmax {
            if l > m {
                let lf = l as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
                let p_next = a * (x * p_cur - b * p_prev);
                p_prev = p_cur;
                p_cur = p_next;
            }
            let base = l * l + l;
            if m == 0 {
                out[base] = p_cur;
            } else {
                let s = std::f64::consts::SQRT_2;
                out[base + m] = s * p_cur * (mf * phi).cos();
                out[base - m] = s * p_cur * (mf * phi).sin();
            }
        }
    }
    out
}

/// Bessel function `J0(x)` from its integral representation
/// `(1/pi) int_0^pi cos(x sin t) dt`, evaluated with the periodic
/// trapezoid rule (spectrally accurate for this integrand).
pub fn bessel_j0(x: f64) -> f64 {
    let n = 32 + (x.abs() * 0.75) as usize;
    let h = PI / n as f64;
    // endpoints t = 0 and t = pi both contribute cos(0) = 1 with half weight
    let mut acc = 1.0;
    for k in 1..n {
        acc += (x * (k as f64 * h).sin()).cos();
    }
    acc * h / PI
}
