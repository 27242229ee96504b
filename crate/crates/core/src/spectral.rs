//! The s-parameterized family of quasi-probability distributions built from
//! fractional powers of the squared overlap kernel `Delta = |K|^2`.
//!
//! Given a phase space with coherent states `|xi>` and measure `dmu`, every
//! distribution is a smoothing of the Husimi function:
//!
//! ```text
//! F^(s)_A(xi)  = int dmu(eta) <eta|A|eta> Delta^{(s-1)/2}(xi, eta)
//! Xi^(-s)(xi)  = int dmu(eta) |eta><eta|  Delta^{(s-1)/2}(xi, eta)
//! ```
//!
//! with `Delta^t` defined spectrally from the eigen-expansion of `Delta`.
//! Integrals are evaluated by the grid quadrature of a [`PhaseGrid`].

use std::fmt::Debug;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QpdError, Result};
use crate::linalg::{
    max_abs, random_hermitian, random_operator, trace_product_raw, CMatrix, CVector, HilbertSpec,
    Operator, C64,
};

/// Largest admissible eigenvalue power `alpha_n^t`.
pub const CONDITIONING_LIMIT: f64 = 1e14;

/// Smallest overlap modulus accepted for a weak value.
pub const WEAK_VALUE_MIN_OVERLAP: f64 = 1e-12;

/// How the nodes of a grid are laid out; used for file headers and reloading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GridLayout {
    /// `points x points` Cartesian grid over `[-L, L)^2` in `(Re alpha, Im alpha)`.
    Planar { half_width: f64, points: usize },
    /// Gauss-Legendre in `cos(theta)` times uniform `phi`.
    Sphere { n_theta: usize, n_phi: usize },
}

impl GridLayout {
    pub fn shape(&self) -> (usize, usize) {
        match *self {
            GridLayout::Planar { points, .. } => (points, points),
            GridLayout::Sphere { n_theta, n_phi } => (n_theta, n_phi),
        }
    }
}

/// Quadrature nodes and weights on a phase space, row-major in `shape()`.
#[derive(Debug, Clone)]
pub struct PhaseGrid<P> {
    nodes: Vec<P>,
    weights: Vec<f64>,
    layout: GridLayout,
}

impl<P: Copy> PhaseGrid<P> {
    pub(crate) fn from_parts(nodes: Vec<P>, weights: Vec<f64>, layout: GridLayout) -> Self {
        debug_assert_eq!(nodes.len(), weights.len());
        Self { nodes, weights, layout }
    }

    pub fn nodes(&self) -> &[P] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn layout(&self) -> GridLayout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_k w_k f_k`
    pub fn integrate(&self, values: &[C64]) -> C64 {
        self.weights.iter().zip(values).map(|(w, v)| v * *w).sum()
    }

    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// A coherent-state system: Hilbert space, coherent states over a phase
/// space, and the squared-overlap kernel.
pub trait PhaseSpace: Sync {
    type Point: Copy + Debug + Send + Sync;

    fn hilbert(&self) -> &HilbertSpec;

    /// Unit-norm coherent state `|xi>`.
    fn coherent(&self, p: Self::Point) -> CVector;

    /// `Delta(xi, eta) = |<xi|eta>|^2`
    fn delta(&self, a: Self::Point, b: Self::Point) -> f64;

    /// Short backend descriptor for file headers, e.g. `spin(j=1)`.
    fn describe(&self) -> String;

    /// Phase-space coordinates written to field files.
    fn coords(&self, p: Self::Point) -> (f64, f64);

    fn dim(&self) -> usize {
        self.hilbert().dim()
    }

    /// `K(xi, eta) = <xi|eta>`
    fn overlap(&self, a: Self::Point, b: Self::Point) -> C64 {
        self.coherent(a).dotc(&self.coherent(b))
    }
}

/// A phase space carrying a group action compatible with the coherent
/// states: `U(g)|xi> ~ |g.xi>` up to phase.
pub trait Covariant: PhaseSpace {
    type Element: Copy + Debug + Send + Sync;

    fn identity_element(&self) -> Self::Element;

    /// A fixed, deterministic set of `n` group elements.
    fn sample_elements(&self, n: usize) -> Vec<Self::Element>;

    fn act(&self, g: Self::Element, p: Self::Point) -> Self::Point;

    fn unitary(&self, g: Self::Element) -> Operator;
}

/// Spectral data of the kernel `Delta`, giving `Delta^t` for real `t`.
pub trait KernelSpectrum<P>: Sync {
    /// `max_n alpha_n^t` over the band.
    fn max_power(&self, t: f64) -> f64;

    /// `Delta^t(a, b)` evaluated pointwise.
    fn delta_power_unchecked(&self, t: f64, a: P, b: P) -> f64;

    /// Apply `f -> int dmu(eta) Delta^t(., eta) f(eta)` to each field.
    fn convolve_many(&self, grid: &PhaseGrid<P>, fields: &[Vec<C64>], t: f64) -> Result<Vec<Vec<C64>>>;

    fn check_power(&self, t: f64) -> Result<()> {
        let max_power = self.max_power(t);
        if !max_power.is_finite() || max_power > CONDITIONING_LIMIT {
            return Err(QpdError::Conditioning { max_power, limit: CONDITIONING_LIMIT });
        }
        Ok(())
    }

    fn convolve(&self, grid: &PhaseGrid<P>, values: &[C64], t: f64) -> Result<Vec<C64>> {
        let mut out = self.convolve_many(grid, &[values.to_vec()], t)?;
        Ok(out.pop().unwrap_or_default())
    }
}

/// `Delta^t(xi, eta)`, rejecting ill-conditioned powers.
pub fn delta_power<P, S: KernelSpectrum<P> + ?Sized>(spec: &S, t: f64, xi: P, eta: P) -> Result<f64> {
    spec.check_power(t)?;
    Ok(spec.delta_power_unchecked(t, xi, eta))
}

/// Exponent of `Delta` taking the Husimi function to order `s`.
pub fn husimi_exponent(s: f64) -> f64 {
    (s - 1.0) / 2.0
}

/// Sampled values of `F^(s)_A` on a grid.
#[derive(Debug, Clone)]
pub struct QPDField<P> {
    pub s: f64,
    pub grid: Arc<PhaseGrid<P>>,
    pub values: Vec<C64>,
    pub label: String,
}

impl<P: Copy> QPDField<P> {
    /// `sum_k w_k F(xi_k)`
    pub fn integral(&self) -> C64 {
        self.grid.integrate(&self.values)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn min_real(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }

    pub fn max_real(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_diff(&self, other: &[C64]) -> f64 {
        self.values.iter().zip(other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

/// The operator-valued map `xi -> Xi^(-s)(xi)` sampled on a grid.
#[derive(Debug, Clone)]
pub struct SWKernelField<P> {
    pub s: f64,
    pub grid: Arc<PhaseGrid<P>>,
    pub operators: Vec<CMatrix>,
}

/// `<eta|A|eta>` at every node.
pub fn husimi_values<X: PhaseSpace>(space: &X, grid: &PhaseGrid<X::Point>, a: &Operator) -> Result<Vec<C64>> {
    check_operator(space, a)?;
    Ok(grid
        .nodes()
        .par_iter()
        .map(|&p| {
            let v = space.coherent(p);
            a.sandwich(&v, &v)
        })
        .collect())
}

/// `F^(s)_A` on the grid, by smoothing the Husimi function with
/// `Delta^{(s-1)/2}`. At `s = 1` the Husimi function is returned as is.
pub fn qpd<X, S>(space: &X, spec: &S, a: &Operator, s: f64, grid: &Arc<PhaseGrid<X::Point>>) -> Result<QPDField<X::Point>>
where
    X: PhaseSpace,
    S: KernelSpectrum<X::Point> + ?Sized,
{
    check_order(s)?;
    let husimi = husimi_values(space, grid, a)?;
    let values = if s == 1.0 { husimi } else { spec.convolve(grid, &husimi, husimi_exponent(s))? };
    Ok(QPDField { s, grid: Arc::clone(grid), values, label: String::new() })
}

/// `F^(s)_A(xi)` at an arbitrary point, by direct quadrature over the grid.
pub fn qpd_at<X, S>(space: &X, spec: &S, a: &Operator, s: f64, grid: &PhaseGrid<X::Point>, xi: X::Point) -> Result<C64>
where
    X: PhaseSpace,
    S: KernelSpectrum<X::Point> + ?Sized,
{
    check_order(s)?;
    let t = husimi_exponent(s);
    spec.check_power(t)?;
    let husimi = husimi_values(space, grid, a)?;
    Ok(grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(&husimi)
        .map(|((&eta, w), h)| h * (w * spec.delta_power_unchecked(t, xi, eta)))
        .sum())
}

/// Re-express a field of order `field.s` at order `to`, via `Delta^{(to - s)/2}`.
pub fn transform<P, S>(spec: &S, field: &QPDField<P>, to: f64) -> Result<QPDField<P>>
where
    P: Copy,
    S: KernelSpectrum<P> + ?Sized,
{
    check_order(to)?;
    let t = (to - field.s) / 2.0;
    let values = if t == 0.0 { field.values.clone() } else { spec.convolve(&field.grid, &field.values, t)? };
    Ok(QPDField { s: to, grid: Arc::clone(&field.grid), values, label: field.label.clone() })
}

/// `Xi^(-s)(xi)` at an arbitrary point by quadrature of
/// `int dmu(eta) |eta><eta| Delta^{(s-1)/2}(xi, eta)`.
pub fn sw_kernel_at<X, S>(space: &X, spec: &S, s: f64, grid: &PhaseGrid<X::Point>, xi: X::Point) -> Result<CMatrix>
where
    X: PhaseSpace,
    S: KernelSpectrum<X::Point> + ?Sized,
{
    check_order(s)?;
    let t = husimi_exponent(s);
    spec.check_power(t)?;
    let d = space.dim();
    let mut acc = CMatrix::zeros(d, d);
    for (&eta, &w) in grid.nodes().iter().zip(grid.weights()) {
        let v = space.coherent(eta);
        let c = w * spec.delta_power_unchecked(t, xi, eta);
        acc += (&v * v.adjoint()) * C64::from(c);
    }
    Ok(acc)
}

/// `Xi^(-s)` at every grid node. Each matrix entry of `|eta><eta|` is a
/// scalar field, so the kernel field is the entrywise `Delta^{(s-1)/2}`
/// convolution of the coherent projectors.
pub fn sw_kernel_field<X, S>(space: &X, spec: &S, s: f64, grid: &Arc<PhaseGrid<X::Point>>) -> Result<SWKernelField<X::Point>>
where
    X: PhaseSpace,
    S: KernelSpectrum<X::Point> + ?Sized,
{
    check_order(s)?;
    let d = space.dim();
    let states: Vec<CVector> = grid.nodes().par_iter().map(|&p| space.coherent(p)).collect();
    let projector_entry = |r: usize, c: usize| -> Vec<C64> { states.iter().map(|v| v[r] * v[c].conj()).collect() };
    let n = grid.len();
    let mut operators = vec![CMatrix::zeros(d, d); n];
    if s == 1.0 {
        for (op, v) in operators.iter_mut().zip(&states) {
            *op = v * v.adjoint();
        }
    } else {
        // Upper triangle plus diagonal; the lower triangle follows from
        // Hermiticity of the real kernel Delta^t.
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|r| (r..d).map(move |c| (r, c))).collect();
        let fields: Vec<Vec<C64>> = pairs.iter().map(|&(r, c)| projector_entry(r, c)).collect();
        let smoothed = spec.convolve_many(grid, &fields, husimi_exponent(s))?;
        for ((r, c), values) in pairs.into_iter().zip(smoothed) {
            for (op, v) in operators.iter_mut().zip(values) {
                op[(r, c)] = v;
                if r != c {
                    op[(c, r)] = v.conj();
                }
            }
        }
    }
    Ok(SWKernelField { s, grid: Arc::clone(grid), operators })
}

/// Weak value `<eta|A|xi> / <eta|xi>` for pre-selection `xi`, post-selection `eta`.
pub fn weak_value<X: PhaseSpace>(space: &X, a: &Operator, xi: X::Point, eta: X::Point) -> Result<C64> {
    check_operator(space, a)?;
    let pre = space.coherent(xi);
    let post = space.coherent(eta);
    weak_value_vectors(a, &pre, &post)
}

fn weak_value_vectors(a: &Operator, pre: &CVector, post: &CVector) -> Result<C64> {
    let overlap = post.dotc(pre);
    if overlap.norm() < WEAK_VALUE_MIN_OVERLAP {
        return Err(QpdError::OrthogonalSelection { overlap: overlap.norm() });
    }
    Ok(a.sandwich(post, pre) / overlap)
}

/// `F^(s)_A(xi)` through weak values.
///
/// The Husimi function is itself a weak-value average,
/// `<zeta|A|zeta> = int dmu(eta) W_{zeta,eta}(A) Delta(zeta, eta)`, and the
/// order-`s` distribution smooths it with `Delta^{(s-1)/2}`. Pairs whose
/// overlap is below [`WEAK_VALUE_MIN_OVERLAP`] are skipped; the integrand
/// `W Delta` is bounded there by `|A| |<eta|zeta>|`.
pub fn qpd_via_weak_values<X, S>(space: &X, spec: &S, a: &Operator, s: f64, grid: &PhaseGrid<X::Point>, xi: X::Point) -> Result<C64>
where
    X: PhaseSpace,
    S: KernelSpectrum<X::Point> + ?Sized,
{
    check_order(s)?;
    check_operator(space, a)?;
    let t = husimi_exponent(s);
    spec.check_power(t)?;
    let states: Vec<CVector> = grid.nodes().iter().map(|&p| space.coherent(p)).collect();
    let weak_husimi = |zeta: X::Point, pre: &CVector| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for ((&eta, post), &w) in grid.nodes().iter().zip(&states).zip(grid.weights()) {
            if let Ok(wv) = weak_value_vectors(a, pre, post) {
                acc += wv * (w * space.delta(zeta, eta));
            }
        }
        acc
    };
    if t == 0.0 {
        // Delta^0 collapses the outer integral onto xi itself.
        return Ok(weak_husimi(xi, &space.coherent(xi)));
    }
    Ok(grid
        .nodes()
        .par_iter()
        .zip(grid.weights())
        .zip(&states)
        .map(|((&zeta, &w), pre)| weak_husimi(zeta, pre) * (w * spec.delta_power_unchecked(t, xi, zeta)))
        .collect::<Vec<_>>()
        .into_iter()
        .sum())
}

/// One line of an axiom report.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AxiomCheck {
    pub name: String,
    pub max_abs_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl AxiomCheck {
    fn new(name: &str, max_abs_deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            max_abs_deviation,
            tolerance,
            pass: max_abs_deviation.is_finite() && max_abs_deviation < tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub backend: String,
    pub s: f64,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Tolerances and sample sizes for [`axiom_report`].
#[derive(Debug, Clone)]
pub struct AxiomConfig {
    pub group_elements: usize,
    pub random_pairs: usize,
    pub seed: u64,
    pub tol_hermitian: f64,
    pub tol_covariance: f64,
    pub tol_trace: f64,
    pub tol_completeness: f64,
    pub tol_orthogonality: f64,
    pub tol_duality: f64,
}

impl Default for AxiomConfig {
    fn default() -> Self {
        Self {
            group_elements: 12,
            random_pairs: 20,
            seed: 0x5eed,
            tol_hermitian: 1e-10,
            tol_covariance: 1e-8,
            tol_trace: 1e-10,
            tol_completeness: 1e-8,
            tol_orthogonality: 1e-8,
            tol_duality: 1e-8,
        }
    }
}

/// Deviations of a kernel field `Xi^(-s)` and its partner `Xi^(s)` from the
/// Stratonovich-Weyl axioms, plus the induced symbol-map properties on
/// random operators.
///
/// `field` holds order `s`, `partner` order `-s`, on the same grid.
pub fn axiom_report<X, S>(
    space: &X,
    spec: &S,
    field: &SWKernelField<X::Point>,
    partner: &SWKernelField<X::Point>,
    cfg: &AxiomConfig,
) -> Result<AxiomReport>
where
    X: Covariant,
    S: KernelSpectrum<X::Point> + ?Sized,
{
    if !Arc::ptr_eq(&field.grid, &partner.grid) && field.grid.len() != partner.grid.len() {
        return Err(QpdError::InvalidParameter("kernel fields live on different grids".into()));
    }
    if (field.s + partner.s).abs() > 1e-12 {
        return Err(QpdError::InvalidParameter(format!(
            "partner field must have order {} (found {})",
            -field.s, partner.s
        )));
    }
    let grid = &field.grid;
    let d = space.dim();
    let ident = CMatrix::identity(d, d);
    let mut checks = Vec::new();

    // (K.1) self-adjointness
    let k1 = field
        .operators
        .iter()
        .chain(&partner.operators)
        .map(|m| max_abs(&(m - m.adjoint())))
        .fold(0.0, f64::max);
    checks.push(AxiomCheck::new("K.1 self-adjointness", k1, cfg.tol_hermitian));

    // (K.2) covariance Xi(g.xi) = U(g) Xi(xi) U(g)^dagger
    let elements = space.sample_elements(cfg.group_elements);
    let k2 = covariance_deviation(space, spec, field, &elements)?;
    checks.push(AxiomCheck::new("K.2 covariance", k2, cfg.tol_covariance));

    // (K.3) unit trace
    let k3 = field
        .operators
        .iter()
        .chain(&partner.operators)
        .map(|m| (m.trace() - C64::from(1.0)).norm())
        .fold(0.0, f64::max);
    checks.push(AxiomCheck::new("K.3 unit trace", k3, cfg.tol_trace));

    // (K.4) completeness
    let k4 = [field, partner]
        .iter()
        .map(|f| {
            let mut acc = CMatrix::zeros(d, d);
            for (m, &w) in f.operators.iter().zip(grid.weights()) {
                acc += m * C64::from(w);
            }
            max_abs(&(acc - &ident))
        })
        .fold(0.0, f64::max);
    checks.push(AxiomCheck::new("K.4 completeness", k4, cfg.tol_completeness));

    // (K.5') Tr[Xi^(-s)(xi) Xi^(s)(xi')] = band-limited delta Delta^0(xi, xi')
    spec.check_power(0.0)?;
    let nodes = grid.nodes();
    let k5 = (0..nodes.len())
        .into_par_iter()
        .map(|a| {
            let mut worst = 0.0f64;
            for b in 0..nodes.len() {
                let tr = trace_product_raw(&field.operators[a], &partner.operators[b]);
                let target = spec.delta_power_unchecked(0.0, nodes[a], nodes[b]);
                worst = worst.max((tr - C64::from(target)).norm());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    checks.push(AxiomCheck::new("K.5' orthogonality", k5, cfg.tol_orthogonality));

    // Symbol-map axioms on random operators.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let hs = space.hilbert();
    let symbols = |kernels: &SWKernelField<X::Point>, a: &CMatrix| -> Vec<C64> {
        kernels.operators.iter().map(|xi| trace_product_raw(a, xi)).collect()
    };

    let mut s1 = 0.0f64;
    let mut s3 = 0.0f64;
    let mut s4 = 0.0f64;
    let mut s4_sym = 0.0f64;
    for _ in 0..cfg.random_pairs {
        let a = random_hermitian(hs, &mut rng);
        let b = random_hermitian(hs, &mut rng);
        let g = random_operator(hs, &mut rng);

        // (S.1) F_{A^dagger} = conj(F_A), for a general A
        let fg = symbols(field, g.matrix());
        let fgd = symbols(field, &g.matrix().adjoint());
        for (x, y) in fg.iter().zip(&fgd) {
            s1 = s1.max((x.conj() - y).norm());
        }
        // (S.3) int F_A = Tr A
        let fa = symbols(field, a.matrix());
        s3 = s3.max((grid.integrate(&fa) - a.trace()).norm());

        // (S.4') int F^(s)_A F^(-s)_B = Tr(AB), and the swapped pairing
        let fb_partner = symbols(partner, b.matrix());
        let fa_partner = symbols(partner, a.matrix());
        let fb = symbols(field, b.matrix());
        let pair: C64 = fa.iter().zip(&fb_partner).zip(grid.weights()).map(|((x, y), w)| x * y * *w).sum();
        let swapped: C64 = fa_partner.iter().zip(&fb).zip(grid.weights()).map(|((x, y), w)| x * y * *w).sum();
        let tr_ab = trace_product_raw(a.matrix(), b.matrix());
        s4 = s4.max((pair - tr_ab).norm());
        s4_sym = s4_sym.max((pair - swapped).norm());
    }
    checks.push(AxiomCheck::new("S.1 conjugation", s1, cfg.tol_hermitian));

    // (S.2) F_{U^dagger A U}(xi) = F_A(g.xi)
    let a = random_hermitian(hs, &mut rng);
    let mut s2 = 0.0f64;
    for &g in &elements {
        let u = space.unitary(g);
        let rotated = u.adjoint().mul(&a)?.mul(&u)?;
        for (k, &xi) in grid.nodes().iter().enumerate().step_by(stride(grid.len())) {
            let lhs = trace_product_raw(rotated.matrix(), &field.operators[k]);
            let moved = sw_kernel_at(space, spec, field.s, grid, space.act(g, xi))?;
            let rhs = trace_product_raw(a.matrix(), &moved);
            s2 = s2.max((lhs - rhs).norm());
        }
    }
    checks.push(AxiomCheck::new("S.2 covariance", s2, cfg.tol_covariance));
    checks.push(AxiomCheck::new("S.3 normalization", s3, cfg.tol_completeness));
    checks.push(AxiomCheck::new("S.4' trace duality", s4, cfg.tol_duality));
    checks.push(AxiomCheck::new("S.4' duality symmetry", s4_sym, cfg.tol_duality));

    Ok(AxiomReport { backend: space.describe(), s: field.s, checks })
}

/// Max deviation of `Xi(g.xi) - U Xi(xi) U^dagger` over the given elements
/// and a subsample of grid nodes.
pub fn covariance_deviation<X, S>(space: &X, spec: &S, field: &SWKernelField<X::Point>, elements: &[X::Element]) -> Result<f64>
where
    X: Covariant,
    S: KernelSpectrum<X::Point> + ?Sized,
{
    let grid = &field.grid;
    let mut worst = 0.0f64;
    for &g in elements {
        let u = space.unitary(g);
        let um = u.matrix();
        let per_node: Result<Vec<f64>> = grid
            .nodes()
            .par_iter()
            .enumerate()
            .filter(|(k, _)| k % stride(grid.len()) == 0)
            .map(|(k, &xi)| {
                let moved = sw_kernel_at(space, spec, field.s, grid, space.act(g, xi))?;
                let conj = um * &field.operators[k] * um.adjoint();
                Ok(max_abs(&(moved - conj)))
            })
            .collect();
        worst = per_node?.into_iter().fold(worst, f64::max);
    }
    Ok(worst)
}

fn stride(n: usize) -> usize {
    // Keep off-grid kernel evaluations bounded on large grids.
    (n / 64).max(1)
}

fn check_order(s: f64) -> Result<()> {
    if !s.is_finite() {
        return Err(QpdError::InvalidParameter(format!("order s must be finite (got {s})")));
    }
    Ok(())
}

fn check_operator<X: PhaseSpace>(space: &X, a: &Operator) -> Result<()> {
    if a.dim() != space.dim() {
        return Err(QpdError::DimensionMismatch { expected: space.dim(), found: a.dim() });
    }
    Ok(())
}

/// Grid-discretized integral operator `sqrt(w_i) Delta(xi_i, xi_k) sqrt(w_k)`.
///
/// Its eigenvalues reproduce the spectrum of `Delta` when the quadrature is
/// exact on the band; used as an independent check of kernel spectra.
pub fn discretized_kernel_eigenvalues<X: PhaseSpace>(space: &X, grid: &PhaseGrid<X::Point>) -> Vec<f64> {
    let n = grid.len();
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let m = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, k| sw[i] * space.delta(grid.nodes()[i], grid.nodes()[k]) * sw[k]);
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Complex vector from real samples.
pub fn complexify(values: &[f64]) -> Vec<C64> {
    values.iter().map(|&v| C64::from(v)).collect()
}
