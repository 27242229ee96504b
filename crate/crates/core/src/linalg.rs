//! Dense operator algebra on finite Hilbert spaces.
//!
//! Everything here is double-precision complex and dense. Target dimensions
//! stay below ~2000 (a doubled Fock space at cutoff 40 has 1681 levels).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{QpdError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Hermiticity tolerance for density operators.
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-12;
/// Unit-trace tolerance for density operators.
pub const DENSITY_TRACE_TOL: f64 = 1e-12;
/// Minimum eigenvalue floor, absorbs eigensolver noise.
pub const DENSITY_POSITIVITY_FLOOR: f64 = -1e-10;

/// Which physical system a Hilbert space describes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceKind {
    /// Fock space truncated at photon number `cutoff` (dimension cutoff + 1).
    FockTruncated { cutoff: usize },
    /// Spin-j irrep, stored as `2j` so half-integers stay exact.
    Spin { twice_j: u32 },
    /// Tensor product of two spaces.
    Tensor(Box<HilbertSpec>, Box<HilbertSpec>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpec {
    kind: SpaceKind,
}

impl HilbertSpec {
    pub fn fock(cutoff: usize) -> Self {
        Self { kind: SpaceKind::FockTruncated { cutoff } }
    }

    pub fn spin(twice_j: u32) -> Result<Self> {
        if twice_j == 0 {
            return Err(QpdError::InvalidParameter("spin j must be at least 1/2".into()));
        }
        Ok(Self { kind: SpaceKind::Spin { twice_j } })
    }

    pub fn tensor(a: &HilbertSpec, b: &HilbertSpec) -> Self {
        Self { kind: SpaceKind::Tensor(Box::new(a.clone()), Box::new(b.clone())) }
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SpaceKind::FockTruncated { cutoff } => cutoff + 1,
            SpaceKind::Spin { twice_j } => *twice_j as usize + 1,
            SpaceKind::Tensor(a, b) => a.dim() * b.dim(),
        }
    }
}

/// A dense linear operator tied to a Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpec,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpec, matrix: CMatrix) -> Result<Self> {
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(QpdError::DimensionMismatch {
                expected: dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QpdError::NonFinite);
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: &HilbertSpec) -> Self {
        let d = space.dim();
        Self { space: space.clone(), matrix: CMatrix::identity(d, d) }
    }

    pub fn zeros(space: &HilbertSpec) -> Self {
        let d = space.dim();
        Self { space: space.clone(), matrix: CMatrix::zeros(d, d) }
    }

    /// `|psi><psi|` (not renormalized).
    pub fn projector(space: &HilbertSpec, psi: &CVector) -> Result<Self> {
        Self::new(space.clone(), psi * psi.adjoint())
    }

    /// `|bra><ket|` outer product.
    pub fn outer(space: &HilbertSpec, ket: &CVector, bra: &CVector) -> Result<Self> {
        Self::new(space.clone(), ket * bra.adjoint())
    }

    pub fn space(&self) -> &HilbertSpec {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix * c }
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix - &other.matrix })
    }

    pub fn mul(&self, other: &Operator) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { space: self.space.clone(), matrix: &self.matrix * &other.matrix })
    }

    /// `A B - B A`
    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.check_same(other)?;
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        Ok(Self { space: self.space.clone(), matrix: ab - ba })
    }

    /// `<bra|A|ket>`
    pub fn sandwich(&self, bra: &CVector, ket: &CVector) -> C64 {
        bra.dotc(&(&self.matrix * ket))
    }

    /// Largest entry modulus of `A - A^dagger`.
    pub fn hermitian_deviation(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// Hermitian part `(A + A^dagger)/2`.
    pub fn hermitian_part(&self) -> Self {
        let m = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        Self { space: self.space.clone(), matrix: m }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Operator (spectral) norm, the largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        let gram = self.matrix.adjoint() * &self.matrix;
        let top = gram.symmetric_eigen().eigenvalues.max();
        top.max(0.0).sqrt()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> =
            self.hermitian_part().matrix.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    fn check_same(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(QpdError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// Largest entry modulus of a matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A validated density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(Operator);

impl DensityOperator {
    pub fn new(op: Operator) -> Result<Self> {
        let herm = op.hermitian_deviation();
        if herm > DENSITY_HERMITIAN_TOL {
            return Err(QpdError::NotHermitian(herm));
        }
        let tr = op.trace();
        let dev = (tr - C64::new(1.0, 0.0)).norm();
        if dev > DENSITY_TRACE_TOL {
            return Err(QpdError::NotNormalized(dev));
        }
        let min = op.hermitian_eigenvalues()[0];
        if min < DENSITY_POSITIVITY_FLOOR {
            return Err(QpdError::NotPositive(min));
        }
        Ok(Self(op))
    }

    /// Symmetrize and renormalize a nearly-valid operator before validating it.
    pub fn normalized(op: Operator) -> Result<Self> {
        let h = op.hermitian_part();
        let tr = h.trace().re;
        if !(tr.abs() > f64::MIN_POSITIVE) {
            return Err(QpdError::NotNormalized(1.0));
        }
        Self::new(h.scale(C64::new(1.0 / tr, 0.0)))
    }

    /// `|psi><psi| / <psi|psi>`
    pub fn pure(space: &HilbertSpec, psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(QpdError::InvalidParameter("zero state vector".into()));
        }
        let v = psi.unscale(norm);
        Self::normalized(Operator::projector(space, &v)?)
    }

    pub fn maximally_mixed(space: &HilbertSpec) -> Self {
        let d = space.dim() as f64;
        Self(Operator::identity(space).scale(C64::new(1.0 / d, 0.0)))
    }

    /// Convex combination `sum_i p_i rho_i`; weights are renormalized.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| QpdError::InvalidParameter("empty mixture".into()))?;
        let mut acc = Operator::zeros(first.1.space());
        let mut total = 0.0;
        for (p, rho) in parts {
            if *p < 0.0 {
                return Err(QpdError::InvalidParameter("negative mixture weight".into()));
            }
            acc = acc.add(&rho.0.scale(C64::new(*p, 0.0)))?;
            total += p;
        }
        Self::normalized(acc.scale(C64::new(1.0 / total, 0.0)))
    }

    /// Wrap without validation; for integrators that track their own drift.
    pub(crate) fn from_operator_unchecked(op: Operator) -> Self {
        Self(op)
    }

    pub fn as_operator(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    pub fn space(&self) -> &HilbertSpec {
        self.0.space()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.0.matrix()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.hermitian_eigenvalues()[0]
    }
}

/// `Tr(AB)` by direct contraction, without forming the product.
pub fn trace_product(a: &Operator, b: &Operator) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(QpdError::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(trace_product_raw(a.matrix(), b.matrix()))
}

pub(crate) fn trace_product_raw(a: &CMatrix, b: &CMatrix) -> C64 {
    // Tr(AB) = sum_ik A_ik B_ki = sum over entries of A .* B^T
    a.iter().zip(b.transpose().iter()).map(|(x, y)| x * y).sum()
}

/// `exp(A)` by Pade scaling and squaring.
pub fn matrix_exponential(a: &Operator) -> Result<Operator> {
    let e = a.matrix().clone().exp();
    if e.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QpdError::Overflow("matrix exponential".into()));
    }
    Operator::new(a.space().clone(), e)
}

/// Kronecker product `A (x) B`; basis index is `i_a * dim_b + i_b`.
pub fn tensor_product(a: &Operator, b: &Operator) -> Operator {
    Operator {
        space: HilbertSpec::tensor(a.space(), b.space()),
        matrix: a.matrix().kronecker(b.matrix()),
    }
}

/// Hermitian matrix with i.i.d. complex Gaussian entries, symmetrized.
pub fn random_hermitian<R: Rng + ?Sized>(space: &HilbertSpec, rng: &mut R) -> Operator {
    let g = random_ginibre(space.dim(), rng);
    let m = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    Operator { space: space.clone(), matrix: m }
}

/// General (non-Hermitian) complex Gaussian matrix.
pub fn random_operator<R: Rng + ?Sized>(space: &HilbertSpec, rng: &mut R) -> Operator {
    Operator { space: space.clone(), matrix: random_ginibre(space.dim(), rng) }
}

/// Random mixed state `G G^dagger / Tr(G G^dagger)` from a Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(space: &HilbertSpec, rng: &mut R) -> DensityOperator {
    let g = random_ginibre(space.dim(), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let op = Operator { space: space.clone(), matrix: m / C64::new(tr, 0.0) };
    DensityOperator(op.hermitian_part())
}

/// Normalized random state vector.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| C64::new(standard_normal(rng), standard_normal(rng)));
    let n = v.norm();
    v.unscale(n)
}

fn random_ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| C64::new(standard_normal(rng), standard_normal(rng)))
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}
