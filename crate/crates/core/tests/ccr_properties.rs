use std::sync::Arc;

use proptest::prelude::*;
use qpd_core::ccr::{
    coherent_vector, glauber_sudarshan_ccr, husimi_ccr, planar_grid, wigner_ccr, CcrSpectrum, CcrSystem,
};
use qpd_core::linalg::{max_abs, random_density, trace_product, CMatrix, CVector, DensityOperator, C64};
use qpd_core::spectral::{qpd, KernelSpectrum, PhaseSpace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coherent_mixture(sys: &CcrSystem, parts: &[(f64, C64)]) -> DensityOperator {
    let states: Vec<DensityOperator> = parts.iter().map(|&(_, a)| sys.coherent_state(a).unwrap()).collect();
    let refs: Vec<(f64, &DensityOperator)> = parts.iter().zip(&states).map(|(&(w, _), s)| (w, s)).collect();
    DensityOperator::mixture(&refs).unwrap()
}

#[test]
fn resolution_of_unity_on_low_block() {
    let sys = CcrSystem::new(40).unwrap();
    let grid = planar_grid(7.0, 128).unwrap();
    let block = 21;
    let mut acc = CMatrix::zeros(block, block);
    for (&a, &w) in grid.nodes().iter().zip(grid.weights()) {
        // undo the renormalization: exact series coefficients
        let cv = coherent_vector(&sys, a).unwrap();
        let v = cv.vector.rows(0, block) * C64::from(cv.truncated_norm);
        acc += (&v * v.adjoint()) * C64::from(w);
    }
    let dev = max_abs(&(acc - CMatrix::identity(block, block)));
    assert!(dev < 1e-4, "deviation {dev:e}");
}

#[test]
fn reproducing_property() {
    let sys = CcrSystem::new(40).unwrap();
    let grid = planar_grid(6.0, 96).unwrap();
    // psi supported on low Fock levels, well inside the grid
    let mut psi = CVector::zeros(41);
    psi[0] = C64::new(0.6, 0.0);
    psi[1] = C64::new(0.0, 0.48);
    psi[3] = C64::new(-0.64, 0.0);
    let psi = &psi / C64::from(psi.norm());
    let f = |a: C64| sys.coherent(a).dotc(&psi);
    let samples: Vec<C64> = grid.nodes().iter().map(|&a| f(a)).collect();
    for alpha in [C64::new(0.0, 0.0), C64::new(0.7, -1.1), C64::new(-1.5, 0.4)] {
        let conv: C64 = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .zip(&samples)
            .map(|((&b, &w), fb)| sys.overlap(alpha, b) * fb * w)
            .sum();
        assert!((conv - f(alpha)).norm() < 1e-5);
    }
}

#[test]
fn husimi_is_wigner_smoothed_by_vacuum_wigner() {
    let sys = CcrSystem::new(40).unwrap();
    let grid = Arc::new(planar_grid(5.0, 128).unwrap());
    let rho = DensityOperator::mixture(&[(0.3, &sys.fock_state(2).unwrap()), (0.7, &sys.coherent_state(C64::new(1.0, 0.5)).unwrap())]).unwrap();
    let w = wigner_ccr(&sys, &rho, &grid).unwrap();
    let h = husimi_ccr(&sys, &rho, &grid).unwrap();
    // (W0 * W)(xi) = int d^2eta/pi W0(xi - eta) W(eta), W0(z) = 2 exp(-2|z|^2)
    for k in [0usize, 4100, 8256, 9000, 12345] {
        let xi = grid.nodes()[k];
        let conv: C64 = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .zip(&w.values)
            .map(|((&eta, &wt), v)| v * (2.0 * (-2.0 * (xi - eta).norm_sqr()).exp()) * wt)
            .sum();
        assert!((conv - h.values[k]).norm() < 1e-3, "node {k}");
    }
    // same thing through the kernel spectrum: Delta^{1/2} = vacuum Wigner
    let spec = CcrSpectrum::new(12.0).unwrap();
    let smooth = spec.convolve(&grid, &w.values, 0.5).unwrap();
    for (x, y) in smooth.iter().zip(&h.values) {
        assert!((x - y).norm() < 1e-3);
    }
}

#[test]
fn spectral_wigner_matches_characteristic_route() {
    let sys = CcrSystem::new(40).unwrap();
    let grid = Arc::new(planar_grid(5.0, 128).unwrap());
    let spec = CcrSpectrum::new(10.0).unwrap();
    for rho in [sys.fock_state(0).unwrap(), sys.fock_state(1).unwrap(), sys.thermal_state(0.5).unwrap()] {
        let direct = wigner_ccr(&sys, &rho, &grid).unwrap();
        let spectral = qpd(&sys, &spec, rho.as_operator(), 0.0, &grid).unwrap();
        assert!(spectral.max_abs_diff(&direct.values) < 1e-3);
    }
}

#[test]
fn trace_duality_for_coherent_mixtures() {
    let sys = CcrSystem::new(40).unwrap();
    let grid = Arc::new(planar_grid(5.0, 128).unwrap());
    let a = coherent_mixture(&sys, &[(0.5, C64::new(0.3, 0.2)), (0.5, C64::new(-1.0, 0.4))]);
    let b = coherent_mixture(&sys, &[(0.25, C64::new(0.0, -0.5)), (0.75, C64::new(0.8, 0.8))]);
    let ha = husimi_ccr(&sys, &a, &grid).unwrap();
    let pb = glauber_sudarshan_ccr(&sys, &b, &grid, 6.0).unwrap();
    let pair: C64 = ha.values.iter().zip(&pb.field.values).zip(grid.weights()).map(|((x, y), w)| x * y * *w).sum();
    let tr = trace_product(a.as_operator(), b.as_operator()).unwrap();
    assert!((pair - tr).norm() < 1e-3, "{pair} vs {tr}");
}

#[test]
fn glauber_round_trip_is_band_limited_husimi() {
    let sys = CcrSystem::new(40).unwrap();
    let grid = Arc::new(planar_grid(5.0, 128).unwrap());
    let spec = CcrSpectrum::new(6.0).unwrap();
    let rho = sys.thermal_state(1.0).unwrap();
    let h = husimi_ccr(&sys, &rho, &grid).unwrap();
    let band = spec.convolve(&grid, &h.values, 0.0).unwrap();
    let p = spec.convolve(&grid, &h.values, -1.0).unwrap();
    let back = spec.convolve(&grid, &p, 1.0).unwrap();
    let err = back.iter().zip(&band).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(err < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn husimi_is_nonnegative_and_bounded(seed in any::<u64>()) {
        let sys = CcrSystem::new(12).unwrap();
        let grid = Arc::new(planar_grid(5.0, 32).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(sys.space(), &mut rng);
        let h = husimi_ccr(&sys, &rho, &grid).unwrap();
        prop_assert!(h.min_real() >= -1e-12);
        prop_assert!(h.max_real() <= 1.0 + 1e-12);
    }

    #[test]
    fn wigner_is_linear(w in 0.0f64..1.0, re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let sys = CcrSystem::new(20).unwrap();
        let grid = Arc::new(planar_grid(5.0, 64).unwrap());
        let r1 = sys.fock_state(1).unwrap();
        let r2 = sys.coherent_state(C64::new(re, im)).unwrap();
        let mix = DensityOperator::mixture(&[(w, &r1), (1.0 - w, &r2)]).unwrap();
        let (f1, f2, fm) = (wigner_ccr(&sys, &r1, &grid).unwrap(), wigner_ccr(&sys, &r2, &grid).unwrap(), wigner_ccr(&sys, &mix, &grid).unwrap());
        for ((a, b), m) in f1.values.iter().zip(&f2.values).zip(&fm.values) {
            prop_assert!((a * w + b * (1.0 - w) - m).norm() < 1e-10);
        }
    }
}
