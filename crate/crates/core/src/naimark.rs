//! Joint position-momentum measurement through a doubled system.
//!
//! The composite observables `q (x) 1 - 1 (x) q` and `p (x) 1 + 1 (x) p`
//! commute, so they have a joint spectral measure. Its outcome density, with
//! the ancilla prepared in a probe state, is the Wigner function of the system
//! convolved with the reflected probe Wigner function. We evaluate it in the
//! Fourier domain as a product of characteristic functions.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::ccr::{characteristic_raw, fourier_for, sample_dual_grid, CcrSystem, PlanarGrid, CHARACTERISTIC_BOUNDARY_TOL};
use crate::error::{QpdError, Result};
use crate::linalg::{max_abs, tensor_product, CMatrix, CVector, DensityOperator, Operator, C64};
use crate::spectral::QPDField;

/// Commuting composite quadratures on `H (x) H`.
#[derive(Debug, Clone)]
pub struct CompositePair {
    pub q_comp: Operator,
    pub p_comp: Operator,
    pub cutoff: usize,
    /// `max |[q_comp, p_comp]|` over basis pairs with `n1 + n2 <= N/2`.
    pub interior_commutator_norm: f64,
    /// Spectral norm of the full truncated commutator; grows like `N`.
    pub full_commutator_norm: f64,
}

pub fn composite_pair(cutoff: usize) -> Result<CompositePair> {
    if cutoff < 16 {
        return Err(QpdError::InvalidParameter(format!("composite pair needs N >= 16 (got {cutoff})")));
    }
    let sys = CcrSystem::new(cutoff)?;
    let id = Operator::identity(sys.space());
    let (q, p) = (sys.position(), sys.momentum());
    let q_comp = tensor_product(&q, &id).sub(&tensor_product(&id, &q))?;
    let p_comp = tensor_product(&p, &id).add(&tensor_product(&id, &p))?;
    let comm = q_comp.commutator(&p_comp)?;

    let d = cutoff + 1;
    let interior: Vec<usize> = (0..d * d).filter(|&i| i / d + i % d <= cutoff / 2).collect();
    let block = CMatrix::from_fn(interior.len(), interior.len(), |r, c| comm.matrix()[(interior[r], interior[c])]);
    Ok(CompositePair {
        q_comp,
        p_comp,
        cutoff,
        interior_commutator_norm: max_abs(&block),
        full_commutator_norm: comm.spectral_norm(),
    })
}

/// The vacuum probe `|0>`.
pub fn vacuum_probe(sys: &CcrSystem) -> CVector {
    let mut v = CVector::zeros(sys.cutoff() + 1);
    v[0] = C64::from(1.0);
    v
}

/// Gaussian probe with `<q|psi> = (pi d)^{-1/4} exp(-q^2 / 2d)`; `d = 1` is the vacuum.
///
/// In the Fock basis this is a squeezed vacuum,
/// `sum_n (-tau/2)^n sqrt((2n)!)/n! |2n>` with `tau = (1-d)/(1+d)`, renormalized.
pub fn squeezed_probe(sys: &CcrSystem, d: f64) -> Result<CVector> {
    if !(d.is_finite() && d > 0.0) {
        return Err(QpdError::InvalidParameter(format!("probe variance d must be positive (got {d})")));
    }
    let tau = (1.0 - d) / (1.0 + d);
    let dim = sys.cutoff() + 1;
    let mut v = CVector::zeros(dim);
    // c_n = (-tau/2)^n sqrt((2n)!)/n!, via c_{n+1}/c_n = (-tau/2) sqrt((2n+1)(2n+2))/(n+1)
    let mut c = 1.0f64;
    let mut n = 0usize;
    while 2 * n < dim {
        v[2 * n] = C64::from(c);
        let nf = n as f64;
        c *= -tau / 2.0 * ((2.0 * nf + 1.0) * (2.0 * nf + 2.0)).sqrt() / (nf + 1.0);
        n += 1;
    }
    let norm = v.norm();
    Ok(v / C64::from(norm))
}

/// Fourier transform (in the convention of [`crate::fourier::PlanarFourier`])
/// of the joint outcome density: `pi chi_rho(-k) chi_psi(k)`.
pub fn joint_characteristic(sys: &CcrSystem, rho: &DensityOperator, probe: &CVector, kx: f64, ky: f64) -> Result<C64> {
    check_inputs(sys, rho, probe)?;
    let probe_op = probe * probe.adjoint();
    Ok(PI * characteristic_raw(sys.cutoff(), rho.matrix(), -kx, -ky) * characteristic_raw(sys.cutoff(), &probe_op, kx, ky))
}

/// Outcome density of the joint measurement over the planar grid, in units
/// of `d^2 alpha / pi`. With the vacuum probe this is the Husimi function.
pub fn joint_distribution(sys: &CcrSystem, rho: &DensityOperator, probe: &CVector, grid: &Arc<PlanarGrid>) -> Result<QPDField<C64>> {
    sys.require_distribution_cutoff()?;
    check_inputs(sys, rho, probe)?;
    let fourier = fourier_for(grid)?;
    let probe_op = probe * probe.adjoint();
    let (spectrum, boundary) = sample_dual_grid(&fourier, |kx, ky| {
        PI * characteristic_raw(sys.cutoff(), rho.matrix(), -kx, -ky) * characteristic_raw(sys.cutoff(), &probe_op, kx, ky)
    });
    if boundary > CHARACTERISTIC_BOUNDARY_TOL {
        return Err(QpdError::CutoffInadequate { boundary_modulus: boundary });
    }
    Ok(QPDField { s: 1.0, grid: Arc::clone(grid), values: fourier.inverse(&spectrum), label: "joint".into() })
}

fn check_inputs(sys: &CcrSystem, rho: &DensityOperator, probe: &CVector) -> Result<()> {
    let d = sys.cutoff() + 1;
    if rho.dim() != d {
        return Err(QpdError::DimensionMismatch { expected: d, found: rho.dim() });
    }
    if probe.len() != d {
        return Err(QpdError::DimensionMismatch { expected: d, found: probe.len() });
    }
    if (probe.norm() - 1.0).abs() > 1e-10 {
        return Err(QpdError::NotNormalized((probe.norm() - 1.0).abs()));
    }
    Ok(())
}

/// Means and variances of `Re alpha` and `Im alpha` under a density on the plane.
pub fn marginal_moments(field: &QPDField<C64>) -> ([f64; 2], [f64; 2]) {
    let grid = &field.grid;
    let mass: f64 = grid.weights().iter().zip(&field.values).map(|(w, v)| w * v.re).sum();
    let moment = |f: &dyn Fn(C64) -> f64| -> f64 {
        grid.nodes().iter().zip(grid.weights()).zip(&field.values).map(|((a, w), v)| w * v.re * f(*a)).sum::<f64>() / mass
    };
    let mx = moment(&|a| a.re);
    let my = moment(&|a| a.im);
    let vx = moment(&|a| (a.re - mx).powi(2));
    let vy = moment(&|a| (a.im - my).powi(2));
    ([mx, my], [vx, vy])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccr::{husimi_ccr, planar_grid};
    use crate::fourier::PlanarFourier;

    #[test]
    fn composite_quadratures_commute_on_interior() {
        let pair = composite_pair(20).unwrap();
        assert!(pair.interior_commutator_norm < 1e-10);
        // [q,p] = i(1 - (N+1)|N><N|), so the edge entries reach N + 1
        assert!((pair.full_commutator_norm - 21.0).abs() < 1e-8);
        assert!(pair.q_comp.hermitian_deviation() < 1e-13);
        assert!(pair.p_comp.hermitian_deviation() < 1e-13);
        assert!(composite_pair(10).is_err());
    }

    #[test]
    fn squeezed_probe_quadrature_variances() {
        let sys = CcrSystem::new(40).unwrap();
        let (q, p) = (sys.position(), sys.momentum());
        for d in [0.5, 1.0, 2.0] {
            let psi = squeezed_probe(&sys, d).unwrap();
            let q2 = q.mul(&q).unwrap().sandwich(&psi, &psi).re;
            let p2 = p.mul(&p).unwrap().sandwich(&psi, &psi).re;
            assert!((q2 - d / 2.0).abs() < 1e-10, "d={d} <q^2>={q2}");
            assert!((p2 - 1.0 / (2.0 * d)).abs() < 1e-10);
        }
        let vac = squeezed_probe(&sys, 1.0).unwrap();
        assert!((vac - vacuum_probe(&sys)).norm() < 1e-15);
    }

    #[test]
    fn vacuum_probe_gives_husimi() {
        let sys = CcrSystem::new(40).unwrap();
        let grid = Arc::new(planar_grid(5.0, 64).unwrap());
        let rho = sys.fock_state(2).unwrap();
        let joint = joint_distribution(&sys, &rho, &vacuum_probe(&sys), &grid).unwrap();
        let husimi = husimi_ccr(&sys, &rho, &grid).unwrap();
        assert!(joint.max_abs_diff(&husimi.values) < 1e-5);
    }

    #[test]
    fn vacuum_on_vacuum_is_gaussian() {
        let sys = CcrSystem::new(40).unwrap();
        let grid = Arc::new(planar_grid(5.0, 64).unwrap());
        let vac = sys.fock_state(0).unwrap();
        let joint = joint_distribution(&sys, &vac, &vacuum_probe(&sys), &grid).unwrap();
        for (a, v) in grid.nodes().iter().zip(&joint.values) {
            assert!((v.re - (-a.norm_sqr()).exp()).abs() < 1e-5);
        }
    }

    #[test]
    fn coherent_probe_shifts_the_husimi() {
        // D(alpha)|gamma> ~ |alpha + gamma>, so the density is Q(alpha + gamma).
        let sys = CcrSystem::new(40).unwrap();
        let grid = Arc::new(planar_grid(5.0, 64).unwrap());
        let gamma = C64::new(0.5, 0.0);
        let probe = crate::ccr::coherent_vector(&sys, gamma).unwrap().vector;
        let rho = sys.fock_state(1).unwrap();
        let joint = joint_distribution(&sys, &rho, &probe, &grid).unwrap();
        for (a, v) in grid.nodes().iter().zip(&joint.values) {
            let shifted = *a + gamma;
            if shifted.re.abs() < 4.0 && shifted.im.abs() < 4.0 {
                let r2 = shifted.norm_sqr();
                assert!((v.re - r2 * (-r2).exp()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn squeezed_probe_variance_arithmetic() {
        let sys = CcrSystem::new(40).unwrap();
        let grid = Arc::new(planar_grid(6.0, 128).unwrap());
        let d = 2.0;
        let probe = squeezed_probe(&sys, d).unwrap();
        let joint = joint_distribution(&sys, &sys.fock_state(0).unwrap(), &probe, &grid).unwrap();
        let (mean, var) = marginal_moments(&joint);
        assert!(mean[0].abs() < 1e-8 && mean[1].abs() < 1e-8);
        assert!((var[0] - (0.25 + d / 4.0)).abs() < 1e-3);
        assert!((var[1] - (0.25 + 1.0 / (4.0 * d))).abs() < 1e-3);
        assert!(joint.min_real() > -1e-9);
        assert!((joint.integral().re - 1.0).abs() < 1e-4);
    }

    #[test]
    fn fourier_consistency() {
        let sys = CcrSystem::new(30).unwrap();
        let grid = Arc::new(planar_grid(5.0, 64).unwrap());
        let rho = sys.thermal_state(0.5).unwrap();
        let probe = squeezed_probe(&sys, 0.7).unwrap();
        let joint = joint_distribution(&sys, &rho, &probe, &grid).unwrap();
        let fourier = PlanarFourier::new(64, 5.0);
        let spec = fourier.forward(&joint.values);
        for &(i, j) in &[(0usize, 0usize), (1, 3), (5, 60), (62, 2)] {
            let want = joint_characteristic(&sys, &rho, &probe, fourier.k(i), fourier.k(j)).unwrap();
            assert!((spec[i * 64 + j] - want).norm() < 1e-6);
        }
    }

    #[test]
    fn rejects_mismatched_probe() {
        let sys = CcrSystem::new(20).unwrap();
        let grid = Arc::new(planar_grid(5.0, 32).unwrap());
        let bad = CVector::zeros(5);
        assert!(joint_distribution(&sys, &sys.fock_state(0).unwrap(), &bad, &grid).is_err());
    }
}
