//! Spin-j coherent states on the sphere.
//!
//! Phase space is `S^2` with `dmu = (2j+1) sin(theta) dtheta dphi / (4 pi)`,
//! so that `int dmu |Omega><Omega| = 1`. The overlap kernel is
//! `Delta = cos^{4j}(Theta/2)` with `Theta` the angle between the two
//! directions; it is zonal, so its eigenfunctions are spherical harmonics
//! of degree `l <= 2j`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{QpdError, Result};
use crate::linalg::{matrix_exponential, CMatrix, CVector, DensityOperator, HilbertSpec, Operator, C64};
use crate::quadrature::{gauss_legendre, legendre_all, real_spherical_harmonics};
use crate::spectral::{husimi_values, Covariant, GridLayout, KernelSpectrum, PhaseGrid, PhaseSpace, QPDField};

/// A spin-j irrep of SU(2).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    twice_j: u32,
    space: HilbertSpec,
}

impl SpinSystem {
    pub fn new(twice_j: u32) -> Result<Self> {
        Ok(Self { twice_j, space: HilbertSpec::spin(twice_j)? })
    }

    /// From a (half-)integer `j >= 1/2`.
    pub fn from_j(j: f64) -> Result<Self> {
        let tj = 2.0 * j;
        if !(tj >= 1.0) || (tj - tj.round()).abs() > 1e-12 {
            return Err(QpdError::InvalidParameter(format!("spin j must be a positive half-integer (got {j})")));
        }
        Self::new(tj.round() as u32)
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn twice_j(&self) -> u32 {
        self.twice_j
    }

    pub fn space(&self) -> &HilbertSpec {
        &self.space
    }

    /// `m` value of basis index `i` (basis ordered `m = j, j-1, ..., -j`).
    pub fn m_of(&self, i: usize) -> f64 {
        self.j() - i as f64
    }

    pub fn jz(&self) -> Operator {
        let d = self.space.dim();
        let m = CMatrix::from_fn(d, d, |r, c| if r == c { C64::from(self.m_of(r)) } else { C64::new(0.0, 0.0) });
        Operator::new(self.space.clone(), m).expect("square")
    }

    /// Raising operator `J+|m> = sqrt(j(j+1) - m(m+1)) |m+1>`.
    pub fn jplus(&self) -> Operator {
        let d = self.space.dim();
        let j = self.j();
        let mut m = CMatrix::zeros(d, d);
        for c in 1..d {
            let mv = self.m_of(c);
            m[(c - 1, c)] = C64::from((j * (j + 1.0) - mv * (mv + 1.0)).sqrt());
        }
        Operator::new(self.space.clone(), m).expect("square")
    }

    pub fn jminus(&self) -> Operator {
        self.jplus().adjoint()
    }

    pub fn jx(&self) -> Operator {
        let m = (self.jplus().matrix() + self.jminus().matrix()) * C64::from(0.5);
        Operator::new(self.space.clone(), m).expect("square")
    }

    pub fn jy(&self) -> Operator {
        let m = (self.jplus().matrix() - self.jminus().matrix()) * C64::new(0.0, -0.5);
        Operator::new(self.space.clone(), m).expect("square")
    }

    /// Highest-weight state `|j, j>` as a density operator.
    pub fn highest_weight(&self) -> DensityOperator {
        let mut v = CVector::zeros(self.space.dim());
        v[0] = C64::from(1.0);
        DensityOperator::pure(&self.space, &v).expect("unit vector")
    }
}

/// A point on the sphere in polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub theta: f64,
    pub phi: f64,
}

impl SpherePoint {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn unit_vector(&self) -> Vector3<f64> {
        let st = self.theta.sin();
        Vector3::new(st * self.phi.cos(), st * self.phi.sin(), self.theta.cos())
    }

    pub fn from_unit_vector(v: &Vector3<f64>) -> Self {
        let n = v.norm();
        let z = (v.z / n).clamp(-1.0, 1.0);
        Self { theta: z.acos(), phi: v.y.atan2(v.x) }
    }

    /// `cos` of the angle between two directions.
    pub fn cos_angle(&self, other: &SpherePoint) -> f64 {
        self.unit_vector().dot(&other.unit_vector()).clamp(-1.0, 1.0)
    }
}

/// Spin coherent state `|Omega>` pointing along `n(theta, phi)`.
///
/// Components `<j,m|Omega> = sqrt(C(2j, j-m)) cos^{j+m}(theta/2) sin^{j-m}(theta/2) e^{i(j-m)phi}`,
/// which is `exp(-i phi Jz) exp(-i theta Jy) |j,j>` up to the global phase `e^{i j phi}`.
pub fn spin_coherent(sys: &SpinSystem, p: SpherePoint) -> CVector {
    let tj = sys.twice_j as usize;
    let (c, s) = ((p.theta / 2.0).cos(), (p.theta / 2.0).sin());
    let mut binom = 1.0f64;
    CVector::from_fn(tj + 1, |i, _| {
        if i > 0 {
            binom *= (tj + 1 - i) as f64 / i as f64;
        }
        let amp = binom.sqrt() * c.powi((tj - i) as i32) * s.powi(i as i32);
        C64::from_polar(amp, i as f64 * p.phi)
    })
}

/// `Delta(Omega, Omega') = cos^{4j}(Theta/2) = ((1 + cos Theta)/2)^{2j}`.
pub fn su2_delta(sys: &SpinSystem, a: SpherePoint, b: SpherePoint) -> f64 {
    ((1.0 + a.cos_angle(&b)) / 2.0).powi(sys.twice_j as i32)
}

pub type SphereGrid = PhaseGrid<SpherePoint>;

/// Gauss-Legendre in `cos(theta)` times `n_phi` uniform azimuths, weighted
/// by `dmu`. Exact for harmonics of degree `<= min(2 n_theta - 1, n_phi - 1)`.
///
/// Nodes are ordered with `theta` ascending, `phi` fastest.
pub fn sphere_grid(sys: &SpinSystem, n_theta: usize, n_phi: usize) -> Result<SphereGrid> {
    let tj = sys.twice_j as usize;
    if n_theta < tj + 1 {
        return Err(QpdError::QuadratureTooSmall(format!(
            "need at least 2j+1 = {} Gauss-Legendre nodes in cos(theta), got {n_theta}",
            tj + 1
        )));
    }
    if n_phi < 2 * tj + 1 {
        return Err(QpdError::QuadratureTooSmall(format!(
            "need at least 4j+1 = {} azimuthal nodes, got {n_phi}",
            2 * tj + 1
        )));
    }
    let (x, w) = gauss_legendre(n_theta)?;
    let scale = (tj as f64 + 1.0) / (4.0 * PI) * (2.0 * PI / n_phi as f64);
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    // x ascending means theta descending; walk backwards for theta ascending.
    for (xi, wi) in x.iter().zip(&w).rev() {
        let theta = xi.clamp(-1.0, 1.0).acos();
        for b in 0..n_phi {
            nodes.push(SpherePoint::new(theta, 2.0 * PI * b as f64 / n_phi as f64));
            weights.push(wi * scale);
        }
    }
    Ok(PhaseGrid::from_parts(nodes, weights, GridLayout::Sphere { n_theta, n_phi }))
}

/// Minimal exact grid: `n_theta` Gauss-Legendre nodes and `4j + 2` azimuths.
pub fn sphere_quadrature(sys: &SpinSystem, n_theta: usize) -> Result<SphereGrid> {
    sphere_grid(sys, n_theta, 2 * sys.twice_j as usize + 2)
}

/// Eigen-expansion of `Delta` in spherical harmonics orthonormal under `dmu`:
/// `Delta(a, b) = sum_{l <= 2j} v_l sum_m Y_lm(a) Y_lm(b)`.
#[derive(Debug, Clone)]
pub struct SpinSpectrum {
    twice_j: u32,
    eigenvalues: Vec<f64>,
}

/// Project `Delta` onto Legendre polynomials by Gauss quadrature.
///
/// With `Y` normalized against `dmu` the addition theorem gives
/// `sum_m Y_lm Y_lm = (2l+1)/(2j+1) P_l`, hence
/// `v_l = (2j+1)/2 int_{-1}^{1} ((1+x)/2)^{2j} P_l(x) dx`.
pub fn delta_spectrum(sys: &SpinSystem) -> SpinSpectrum {
    let tj = sys.twice_j as usize;
    let (x, w) = gauss_legendre(tj + 2).expect("nonzero node count");
    let mut eigenvalues = vec![0.0; tj + 1];
    for (xq, wq) in x.iter().zip(&w) {
        let f = ((1.0 + xq) / 2.0).powi(tj as i32);
        for (l, p) in legendre_all(tj, *xq).into_iter().enumerate() {
            eigenvalues[l] += wq * f * p;
        }
    }
    for v in &mut eigenvalues {
        *v *= (tj as f64 + 1.0) / 2.0;
    }
    SpinSpectrum { twice_j: sys.twice_j, eigenvalues }
}

impl SpinSpectrum {
    /// `v_l` for `l = 0..=2j`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn band(&self) -> usize {
        self.twice_j as usize
    }

    /// Number of basis functions, `(2j+1)^2`.
    pub fn basis_len(&self) -> usize {
        (self.band() + 1).pow(2)
    }

    /// Degree `l` of basis index `i`.
    pub fn degree_of(i: usize) -> usize {
        (i as f64).sqrt().floor() as usize
    }

    /// Real spherical harmonics orthonormal under `dmu`, index `l*l + l + m`.
    pub fn basis_values(&self, p: SpherePoint) -> Vec<f64> {
        let scale = (4.0 * PI / (self.twice_j as f64 + 1.0)).sqrt();
        let mut y = real_spherical_harmonics(self.band(), p.theta, p.phi);
        for v in &mut y {
            *v *= scale;
        }
        y
    }

    /// `Delta^t` through the explicit basis sum rather than the zonal form.
    pub fn delta_power_by_basis(&self, t: f64, a: SpherePoint, b: SpherePoint) -> f64 {
        let ya = self.basis_values(a);
        let yb = self.basis_values(b);
        (0..self.basis_len()).map(|i| self.eigenvalues[Self::degree_of(i)].powf(t) * ya[i] * yb[i]).sum()
    }
}

impl KernelSpectrum<SpherePoint> for SpinSpectrum {
    fn max_power(&self, t: f64) -> f64 {
        self.eigenvalues.iter().map(|v| v.powf(t)).fold(0.0, f64::max)
    }

    fn delta_power_unchecked(&self, t: f64, a: SpherePoint, b: SpherePoint) -> f64 {
        let tj = self.twice_j as f64;
        let p = legendre_all(self.band(), a.cos_angle(&b));
        p.iter()
            .zip(&self.eigenvalues)
            .enumerate()
            .map(|(l, (pl, v))| v.powf(t) * (2.0 * l as f64 + 1.0) / (tj + 1.0) * pl)
            .sum()
    }

    /// Projects onto the harmonics by grid quadrature, scales each degree by
    /// `v_l^t`, and resynthesizes. Algebraically identical to quadrature of
    /// `Delta^t(xi, .) f` at every node.
    fn convolve_many(&self, grid: &PhaseGrid<SpherePoint>, fields: &[Vec<C64>], t: f64) -> Result<Vec<Vec<C64>>> {
        self.check_power(t)?;
        let nb = self.basis_len();
        let table: Vec<Vec<f64>> = grid.nodes().par_iter().map(|&p| self.basis_values(p)).collect();
        let gains: Vec<f64> = (0..nb).map(|i| self.eigenvalues[Self::degree_of(i)].powf(t)).collect();
        Ok(fields
            .par_iter()
            .map(|f| {
                let mut coeff = vec![C64::new(0.0, 0.0); nb];
                for ((y, &w), v) in table.iter().zip(grid.weights()).zip(f) {
                    for (c, yi) in coeff.iter_mut().zip(y) {
                        *c += v * (w * yi);
                    }
                }
                for (c, g) in coeff.iter_mut().zip(&gains) {
                    *c *= *g;
                }
                table.iter().map(|y| coeff.iter().zip(y).map(|(c, yi)| c * *yi).sum()).collect()
            })
            .collect())
    }
}

/// `<Omega|rho|Omega>` at every node.
pub fn husimi_spin(sys: &SpinSystem, rho: &DensityOperator, grid: &Arc<SphereGrid>) -> Result<QPDField<SpherePoint>> {
    let values = husimi_values(sys, grid, rho.as_operator())?;
    Ok(QPDField { s: 1.0, grid: Arc::clone(grid), values, label: "husimi".into() })
}

/// Rotation `Rz(alpha) Ry(beta) Rz(gamma)` (active, zyz Euler angles).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Rotation {
    pub fn identity() -> Self {
        Self { alpha: 0.0, beta: 0.0, gamma: 0.0 }
    }

    pub fn matrix(&self) -> nalgebra::Matrix3<f64> {
        rz(self.alpha) * ry(self.beta) * rz(self.gamma)
    }
}

fn rz(a: f64) -> nalgebra::Matrix3<f64> {
    let (s, c) = a.sin_cos();
    nalgebra::Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn ry(b: f64) -> nalgebra::Matrix3<f64> {
    let (s, c) = b.sin_cos();
    nalgebra::Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

impl PhaseSpace for SpinSystem {
    type Point = SpherePoint;

    fn hilbert(&self) -> &HilbertSpec {
        &self.space
    }

    fn coherent(&self, p: SpherePoint) -> CVector {
        spin_coherent(self, p)
    }

    fn delta(&self, a: SpherePoint, b: SpherePoint) -> f64 {
        su2_delta(self, a, b)
    }

    fn describe(&self) -> String {
        if self.twice_j % 2 == 0 {
            format!("spin(j={})", self.twice_j / 2)
        } else {
            format!("spin(j={}/2)", self.twice_j)
        }
    }

    fn coords(&self, p: SpherePoint) -> (f64, f64) {
        (p.theta, p.phi)
    }
}

impl Covariant for SpinSystem {
    type Element = Rotation;

    fn identity_element(&self) -> Rotation {
        Rotation::identity()
    }

    /// Euler angles spread quasi-uniformly (golden-angle azimuths, evenly
    /// spaced `cos(beta)`).
    fn sample_elements(&self, n: usize) -> Vec<Rotation> {
        let golden = PI * (3.0 - 5f64.sqrt());
        (0..n)
            .map(|k| {
                let kf = k as f64;
                Rotation {
                    alpha: (golden * (kf + 1.0)) % (2.0 * PI),
                    beta: (1.0 - 2.0 * (kf + 0.5) / n as f64).acos(),
                    gamma: 0.37 * (kf + 1.0),
                }
            })
            .collect()
    }

    fn act(&self, g: Rotation, p: SpherePoint) -> SpherePoint {
        SpherePoint::from_unit_vector(&(g.matrix() * p.unit_vector()))
    }

    fn unitary(&self, g: Rotation) -> Operator {
        let d = self.space.dim();
        let zphase = |angle: f64| {
            CMatrix::from_fn(d, d, |r, c| if r == c { C64::from_polar(1.0, -angle * self.m_of(r)) } else { C64::new(0.0, 0.0) })
        };
        let gen = self.jy().scale(C64::new(0.0, -g.beta));
        let ey = matrix_exponential(&gen).expect("bounded generator");
        let m = zphase(g.alpha) * ey.matrix() * zphase(g.gamma);
        Operator::new(self.space.clone(), m).expect("square")
    }
}
