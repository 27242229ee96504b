//! Single-mode CCR (harmonic oscillator) coherent states on the plane.
//!
//! Phase space is `C` with `dmu = d^2 alpha / pi`, coordinates
//! `(Re alpha, Im alpha)`, and `hbar = 1`, so `q = (a + a^dagger)/sqrt 2`.
//! The kernel `Delta(alpha, beta) = exp(-|alpha - beta|^2)` is translation
//! invariant: its harmonic basis is plane waves and
//! `Delta^t` has Fourier symbol `exp(-t |k|^2 / 4)`, which we band-limit at
//! `|k| <= kappa`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{QpdError, Result};
use crate::fourier::PlanarFourier;
use crate::linalg::{matrix_exponential, CMatrix, CVector, DensityOperator, HilbertSpec, Operator, C64};
use crate::quadrature::{bessel_j0, gauss_legendre};
use crate::spectral::{husimi_values, Covariant, GridLayout, KernelSpectrum, PhaseGrid, PhaseSpace, QPDField};

/// Smallest Fock cutoff accepted for distribution computations.
pub const MIN_DISTRIBUTION_CUTOFF: usize = 8;

/// Largest `|chi|` tolerated on the outer ring of the dual grid.
pub const CHARACTERISTIC_BOUNDARY_TOL: f64 = 1e-6;

/// High-band energy fraction above which a P-function is flagged singular.
pub const DIVERGENCE_FRACTION: f64 = 1e-3;

const MAX_COHERENT_AMPLITUDE: f64 = 1e6;

/// One bosonic mode truncated at photon number `cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct CcrSystem {
    cutoff: usize,
    space: HilbertSpec,
}

impl CcrSystem {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(QpdError::InvalidParameter("Fock cutoff must be positive".into()));
        }
        Ok(Self { cutoff, space: HilbertSpec::fock(cutoff) })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn space(&self) -> &HilbertSpec {
        &self.space
    }

    /// Errors unless the cutoff is large enough for distribution work.
    pub fn require_distribution_cutoff(&self) -> Result<()> {
        if self.cutoff < MIN_DISTRIBUTION_CUTOFF {
            return Err(QpdError::InvalidParameter(format!(
                "Fock cutoff {} too small; distributions need N >= {MIN_DISTRIBUTION_CUTOFF}",
                self.cutoff
            )));
        }
        Ok(())
    }

    fn op(&self, m: CMatrix) -> Operator {
        Operator::new(self.space.clone(), m).expect("dimension matches space")
    }

    pub fn annihilation(&self) -> Operator {
        let d = self.cutoff + 1;
        let mut m = CMatrix::zeros(d, d);
        for n in 1..d {
            m[(n - 1, n)] = C64::from((n as f64).sqrt());
        }
        self.op(m)
    }

    pub fn creation(&self) -> Operator {
        self.annihilation().adjoint()
    }

    pub fn number(&self) -> Operator {
        let d = self.cutoff + 1;
        self.op(CMatrix::from_fn(d, d, |r, c| if r == c { C64::from(r as f64) } else { C64::new(0.0, 0.0) }))
    }

    /// `q = (a + a^dagger) / sqrt 2`
    pub fn position(&self) -> Operator {
        let a = self.annihilation();
        self.op((a.matrix() + a.matrix().adjoint()) * C64::from(std::f64::consts::FRAC_1_SQRT_2))
    }

    /// `p = -i (a - a^dagger) / sqrt 2`
    pub fn momentum(&self) -> Operator {
        let a = self.annihilation();
        self.op((a.matrix() - a.matrix().adjoint()) * C64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2))
    }

    pub fn fock_state(&self, n: usize) -> Result<DensityOperator> {
        if n > self.cutoff {
            return Err(QpdError::InvalidParameter(format!("Fock level {n} exceeds cutoff {}", self.cutoff)));
        }
        let mut v = CVector::zeros(self.cutoff + 1);
        v[n] = C64::from(1.0);
        DensityOperator::pure(&self.space, &v)
    }

    /// `(1 - lambda) sum lambda^n |n><n|` with `lambda = nbar / (nbar + 1)`,
    /// renormalized on the truncated space.
    pub fn thermal_state(&self, nbar: f64) -> Result<DensityOperator> {
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(QpdError::InvalidParameter(format!("mean photon number must be >= 0 (got {nbar})")));
        }
        let lambda = nbar / (nbar + 1.0);
        let d = self.cutoff + 1;
        let pops: Vec<f64> = (0..d).map(|n| lambda.powi(n as i32)).collect();
        let z: f64 = pops.iter().sum();
        let m = CMatrix::from_fn(d, d, |r, c| if r == c { C64::from(pops[r] / z) } else { C64::new(0.0, 0.0) });
        DensityOperator::new(self.op(m))
    }

    pub fn coherent_state(&self, alpha: C64) -> Result<DensityOperator> {
        let cv = coherent_vector(self, alpha)?;
        DensityOperator::pure(&self.space, &cv.vector)
    }
}

/// A truncated, renormalized coherent vector.
#[derive(Debug, Clone)]
pub struct CoherentVector {
    pub vector: CVector,
    /// Norm of the truncated series before renormalization (1 when nothing is lost).
    pub truncated_norm: f64,
    /// Set when `|alpha|^2 > N/4`: the tail beyond the cutoff is no longer negligible.
    pub truncation_warning: bool,
}

/// `c_n = e^{-|alpha|^2/2} alpha^n / sqrt(n!)`, `n = 0..=N`, evaluated in log
/// space and renormalized.
pub fn coherent_vector(sys: &CcrSystem, alpha: C64) -> Result<CoherentVector> {
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(QpdError::NonFinite);
    }
    let r = alpha.norm();
    if r > MAX_COHERENT_AMPLITUDE {
        return Err(QpdError::Overflow(format!("coherent amplitude |alpha| = {r:e}")));
    }
    let (vector, truncated_norm) = coherent_components(sys.cutoff, alpha);
    Ok(CoherentVector { vector, truncated_norm, truncation_warning: r * r > sys.cutoff as f64 / 4.0 })
}

fn coherent_components(cutoff: usize, alpha: C64) -> (CVector, f64) {
    let d = cutoff + 1;
    let r = alpha.norm();
    if r == 0.0 {
        let mut v = CVector::zeros(d);
        v[0] = C64::from(1.0);
        return (v, 1.0);
    }
    let (lr, arg) = (r.ln(), alpha.arg());
    let mut ln_fact = 0.0;
    let logs: Vec<f64> = (0..d)
        .map(|n| {
            if n > 0 {
                ln_fact += (n as f64).ln();
            }
            -r * r / 2.0 + n as f64 * lr - 0.5 * ln_fact
        })
        .collect();
    // Rescale by the largest term so huge amplitudes do not underflow.
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut v = CVector::from_fn(d, |n, _| C64::from_polar((logs[n] - top).exp(), n as f64 * arg));
    let scaled_norm = v.norm();
    v /= C64::from(scaled_norm);
    let truncated_norm = (top.exp() * scaled_norm).min(1.0);
    (v, truncated_norm)
}

/// `D(alpha) = exp(alpha a^dagger - conj(alpha) a)` on the truncated space.
pub fn displacement(sys: &CcrSystem, alpha: C64) -> Result<Operator> {
    let a = sys.annihilation();
    let gen = sys.creation().scale(alpha).sub(&a.scale(alpha.conj()))?;
    matrix_exponential(&gen)
}

/// Exact matrix elements `<m|D(beta)|n>` of the untruncated displacement,
/// for `m, n <= cutoff`:
/// `sqrt(n!/m!) beta^{m-n} e^{-|beta|^2/2} L_n^{(m-n)}(|beta|^2)` for `m >= n`.
///
/// Uses the Laguerre recurrence on normalized functions so nothing overflows.
pub fn displacement_elements(cutoff: usize, beta: C64) -> CMatrix {
    let d = cutoff + 1;
    let x = beta.norm_sqr();
    let r = beta.norm();
    let arg = beta.arg();
    let mut out = CMatrix::zeros(d, d);
    let mut ln_fact_d = 0.0;
    for off in 0..d {
        if off > 0 {
            ln_fact_d += (off as f64).ln();
        }
        let df = off as f64;
        // l_n = sqrt(n!/(n+off)!) r^off e^{-x/2} L_n^{(off)}(x)
        let l0 = if off == 0 { (-x / 2.0).exp() } else if r == 0.0 { 0.0 } else { (df * r.ln() - x / 2.0 - 0.5 * ln_fact_d).exp() };
        let up = C64::from_polar(1.0, df * arg);
        let down = if off % 2 == 0 { up.conj() } else { -up.conj() };
        let (mut prev, mut cur) = (0.0f64, l0);
        for n in 0..(d - off) {
            if n > 0 {
                let nf = (n - 1) as f64;
                let next = ((2.0 * nf + 1.0 + df - x) * cur - (nf * (nf + df)).sqrt() * prev) / ((nf + 1.0) * (nf + df + 1.0)).sqrt();
                prev = cur;
                cur = next;
            }
            out[(n + off, n)] = up * cur;
            if off > 0 {
                out[(n, n + off)] = down * cur;
            }
        }
    }
    out
}

/// `exp(-|alpha - beta|^2)`
pub fn ccr_delta(alpha: C64, beta: C64) -> f64 {
    (-(alpha - beta).norm_sqr()).exp()
}

pub type PlanarGrid = PhaseGrid<C64>;

/// `points x points` nodes `alpha = x_i + i y_j`, `x_i = -L + i h`,
/// `h = 2L / points`, with weights `h^2 / pi`. Node `(i, j)` sits at index
/// `i * points + j`.
///
/// Fails if the grid does not integrate `e^{-|alpha|^2}` to 1 within 1e-6.
pub fn planar_grid(half_width: f64, points: usize) -> Result<PlanarGrid> {
    if !(half_width.is_finite() && half_width > 0.0) || points < 2 {
        return Err(QpdError::InvalidParameter(format!("planar grid needs L > 0 and M >= 2 (got L={half_width}, M={points})")));
    }
    let h = 2.0 * half_width / points as f64;
    let w = h * h / PI;
    let mut nodes = Vec::with_capacity(points * points);
    for i in 0..points {
        for j in 0..points {
            nodes.push(C64::new(-half_width + i as f64 * h, -half_width + j as f64 * h));
        }
    }
    let weights = vec![w; nodes.len()];
    let gauss: f64 = nodes.iter().map(|a| w * (-a.norm_sqr()).exp()).sum();
    if (gauss - 1.0).abs() > 1e-6 {
        return Err(QpdError::QuadratureTooSmall(format!(
            "planar grid integrates exp(-|alpha|^2) to {gauss:.8} (L={half_width}, M={points})"
        )));
    }
    Ok(PhaseGrid::from_parts(nodes, weights, GridLayout::Planar { half_width, points }))
}

fn planar_layout(grid: &PlanarGrid) -> Result<(f64, usize)> {
    match grid.layout() {
        GridLayout::Planar { half_width, points } => Ok((half_width, points)),
        other => Err(QpdError::InvalidParameter(format!("expected a planar grid, got {other:?}"))),
    }
}

/// `<alpha|rho|alpha>` at every node.
pub fn husimi_ccr(sys: &CcrSystem, rho: &DensityOperator, grid: &Arc<PlanarGrid>) -> Result<QPDField<C64>> {
    sys.require_distribution_cutoff()?;
    let values = husimi_values(sys, grid, rho.as_operator())?;
    Ok(QPDField { s: 1.0, grid: Arc::clone(grid), values, label: "husimi".into() })
}

/// `chi(k) = Tr[A D(beta)]` with `beta = (-k_y + i k_x) / 2`.
///
/// With this pairing the Wigner function is
/// `F^(0)(x) = (1/4pi) int d^2k e^{-i k.x} chi(k)` in the units of `dmu`;
/// the vacuum gives `chi = e^{-|k|^2/8}`.
pub fn characteristic_function(sys: &CcrSystem, a: &Operator, kx: f64, ky: f64) -> Result<C64> {
    if a.dim() != sys.cutoff + 1 {
        return Err(QpdError::DimensionMismatch { expected: sys.cutoff + 1, found: a.dim() });
    }
    Ok(characteristic_raw(sys.cutoff, a.matrix(), kx, ky))
}

pub(crate) fn characteristic_raw(cutoff: usize, a: &CMatrix, kx: f64, ky: f64) -> C64 {
    let dmat = displacement_elements(cutoff, C64::new(-ky, kx) / 2.0);
    a.iter().zip(dmat.transpose().iter()).map(|(x, y)| x * y).sum()
}

/// Evaluate `f(kx, ky)` on every FFT bin, returning the values together
/// with the largest `|f|` on the boundary ring.
pub(crate) fn sample_dual_grid<F>(fourier: &PlanarFourier, f: F) -> (Vec<C64>, f64)
where
    F: Fn(f64, f64) -> C64 + Sync,
{
    let m = fourier.points();
    let vals: Vec<C64> = (0..m * m).into_par_iter().map(|b| f(fourier.k(b / m), fourier.k(b % m))).collect();
    let boundary = (0..m * m)
        .filter(|b| fourier.is_boundary_bin(b / m, b % m))
        .map(|b| vals[b].norm())
        .fold(0.0, f64::max);
    (vals, boundary)
}

pub(crate) fn fourier_for(grid: &PlanarGrid) -> Result<PlanarFourier> {
    let (half_width, points) = planar_layout(grid)?;
    if !points.is_power_of_two() {
        return Err(QpdError::InvalidParameter(format!("grid points per axis must be a power of two (got {points})")));
    }
    Ok(PlanarFourier::new(points, half_width))
}

/// Wigner function from the characteristic function by inverse FFT,
/// normalized so `int F^(0) dmu = 1` (vacuum peak value 2).
pub fn wigner_ccr(sys: &CcrSystem, rho: &DensityOperator, grid: &Arc<PlanarGrid>) -> Result<QPDField<C64>> {
    sys.require_distribution_cutoff()?;
    if rho.dim() != sys.cutoff + 1 {
        return Err(QpdError::DimensionMismatch { expected: sys.cutoff + 1, found: rho.dim() });
    }
    let fourier = fourier_for(grid)?;
    let (chi, boundary) = sample_dual_grid(&fourier, |kx, ky| characteristic_raw(sys.cutoff, rho.matrix(), -kx, -ky));
    if boundary > CHARACTERISTIC_BOUNDARY_TOL {
        return Err(QpdError::CutoffInadequate { boundary_modulus: boundary });
    }
    let spectrum: Vec<C64> = chi.into_iter().map(|c| c * PI).collect();
    Ok(QPDField { s: 0.0, grid: Arc::clone(grid), values: fourier.inverse(&spectrum), label: "wigner".into() })
}

/// Band-limited Glauber-Sudarshan function and its diagnostics.
#[derive(Debug, Clone)]
pub struct GlauberResult {
    pub field: QPDField<C64>,
    pub kappa: f64,
    /// Spectral energy in `0.8 kappa < |k| <= kappa` over the energy in `|k| <= kappa`.
    pub high_band_fraction: f64,
    /// The P-function is (numerically) singular at this band limit.
    pub divergence_warning: bool,
    /// Max deviation of the re-mollified field from the band-limited Husimi.
    pub reconstruction_error: f64,
    /// Max deviation of the re-mollified field from the raw Husimi (includes the
    /// Husimi tail beyond `kappa`).
    pub raw_reconstruction_error: f64,
}

/// Anti-mollify the Husimi field: multiply its transform by `e^{|k|^2/4}`
/// inside `|k| <= kappa`, discard everything outside.
pub fn glauber_sudarshan_ccr(sys: &CcrSystem, rho: &DensityOperator, grid: &Arc<PlanarGrid>, kappa: f64) -> Result<GlauberResult> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(QpdError::InvalidParameter(format!("band limit kappa must be positive (got {kappa})")));
    }
    let spec = CcrSpectrum::new(kappa)?;
    spec.check_power(-1.0)?;
    let husimi = husimi_ccr(sys, rho, grid)?;
    let fourier = fourier_for(grid)?;
    let m = fourier.points();
    let h_hat = fourier.forward(&husimi.values);

    let mut p_hat = vec![C64::new(0.0, 0.0); m * m];
    let mut band_hat = vec![C64::new(0.0, 0.0); m * m];
    let (mut total, mut high) = (0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            let k2 = fourier.k(i).powi(2) + fourier.k(j).powi(2);
            if k2 <= kappa * kappa {
                let b = i * m + j;
                band_hat[b] = h_hat[b];
                p_hat[b] = h_hat[b] * (k2 / 4.0).exp();
                let e = p_hat[b].norm_sqr();
                total += e;
                if k2 > (0.8 * kappa).powi(2) {
                    high += e;
                }
            }
        }
    }
    let high_band_fraction = if total > 0.0 { high / total } else { 0.0 };
    let values = fourier.inverse(&p_hat);

    let remollified = spec.convolve(grid, &values, 1.0)?;
    let band_husimi = fourier.inverse(&band_hat);
    let diff = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let reconstruction_error = diff(&remollified, &band_husimi);
    let raw_reconstruction_error = diff(&remollified, &husimi.values);

    Ok(GlauberResult {
        field: QPDField { s: -1.0, grid: Arc::clone(grid), values, label: "glauber-sudarshan".into() },
        kappa,
        high_band_fraction,
        divergence_warning: high_band_fraction > DIVERGENCE_FRACTION,
        reconstruction_error,
        raw_reconstruction_error,
    })
}

/// Plane-wave spectrum of `Delta` on the plane, band-limited at `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcrSpectrum {
    kappa: f64,
}

impl CcrSpectrum {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(QpdError::InvalidParameter(format!("band limit kappa must be positive (got {kappa})")));
        }
        Ok(Self { kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Fourier symbol of `Delta^t`.
    pub fn symbol(&self, t: f64, kx: f64, ky: f64) -> f64 {
        let k2 = kx * kx + ky * ky;
        if k2 > self.kappa * self.kappa {
            0.0
        } else {
            (-t * k2 / 4.0).exp()
        }
    }
}

impl KernelSpectrum<C64> for CcrSpectrum {
    fn max_power(&self, t: f64) -> f64 {
        if t < 0.0 {
            (-t * self.kappa * self.kappa / 4.0).exp()
        } else {
            1.0
        }
    }

    /// `Delta^t(r) = (1/2) int_0^kappa k J0(k r) e^{-t k^2/4} dk`, `r = |a - b|`.
    fn delta_power_unchecked(&self, t: f64, a: C64, b: C64) -> f64 {
        let r = (a - b).norm();
        let n = 48 + (self.kappa * r).ceil() as usize;
        let (x, w) = gauss_legendre(n).expect("nonzero node count");
        let half = self.kappa / 2.0;
        let sum: f64 = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let k = half * (xi + 1.0);
                wi * k * bessel_j0(k * r) * (-t * k * k / 4.0).exp()
            })
            .sum();
        0.5 * half * sum
    }

    /// Periodic FFT convolution on the planar grid.
    fn convolve_many(&self, grid: &PhaseGrid<C64>, fields: &[Vec<C64>], t: f64) -> Result<Vec<Vec<C64>>> {
        self.check_power(t)?;
        let (half_width, points) = planar_layout(grid)?;
        let fourier = PlanarFourier::new(points, half_width);
        Ok(fields
            .par_iter()
            .map(|f| fourier.apply_symbol(f, |kx, ky| C64::from(self.symbol(t, kx, ky))))
            .collect())
    }
}

impl PhaseSpace for CcrSystem {
    type Point = C64;

    fn hilbert(&self) -> &HilbertSpec {
        &self.space
    }

    fn coherent(&self, p: C64) -> CVector {
        coherent_components(self.cutoff, p).0
    }

    fn delta(&self, a: C64, b: C64) -> f64 {
        ccr_delta(a, b)
    }

    fn describe(&self) -> String {
        format!("ccr(N={})", self.cutoff)
    }

    fn coords(&self, p: C64) -> (f64, f64) {
        (p.re, p.im)
    }
}

impl Covariant for CcrSystem {
    type Element = C64;

    fn identity_element(&self) -> C64 {
        C64::new(0.0, 0.0)
    }

    /// Small displacements on three rings.
    fn sample_elements(&self, n: usize) -> Vec<C64> {
        (0..n)
            .map(|k| C64::from_polar(0.2 * (1 + k % 3) as f64, 2.0 * PI * k as f64 / n as f64 + 0.1))
            .collect()
    }

    fn act(&self, g: C64, p: C64) -> C64 {
        p + g
    }

    fn unitary(&self, g: C64) -> Operator {
        displacement(self, g).expect("finite generator")
    }
}
