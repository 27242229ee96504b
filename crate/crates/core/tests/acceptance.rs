//! Numbered acceptance criteria. Each prints one PASS/FAIL line with the
//! measured figure; the process exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use qpd_core::ccr::{glauber_sudarshan_ccr, husimi_ccr, planar_grid, wigner_ccr, CcrSpectrum, CcrSystem};
use qpd_core::dynamics::{evolve, LindbladSpec};
use qpd_core::linalg::{random_density, random_hermitian, trace_product, CMatrix, C64};
use qpd_core::naimark::{joint_distribution, vacuum_probe};
use qpd_core::spectral::{
    axiom_report, qpd, qpd_at, qpd_via_weak_values, sw_kernel_field, transform, AxiomConfig, KernelSpectrum, PhaseSpace,
};
use qpd_core::su2::{delta_spectrum, husimi_spin, sphere_quadrature, SpherePoint, SpinSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(value: f64, tol: f64, what: &str) -> Outcome {
    Outcome { pass: value.is_finite() && value < tol, detail: format!("{what} = {value:.3e} (tol {tol:.0e})") }
}

fn max_err(a: &[C64], b: impl IntoIterator<Item = C64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn spin_setup(twice_j: u32) -> (SpinSystem, qpd_core::su2::SpinSpectrum, Arc<qpd_core::su2::SphereGrid>) {
    let sys = SpinSystem::new(twice_j).unwrap();
    let spec = delta_spectrum(&sys);
    let grid = Arc::new(sphere_quadrature(&sys, twice_j as usize + 2).unwrap());
    (sys, spec, grid)
}

fn resolution_of_unity() -> Outcome {
    let mut worst = 0.0f64;
    for tj in 1..=10u32 {
        let (sys, _, grid) = spin_setup(tj);
        let d = sys.dim();
        let mut acc = CMatrix::zeros(d, d);
        for (&p, &w) in grid.nodes().iter().zip(grid.weights()) {
            let v = sys.coherent(p);
            acc += (&v * v.adjoint()) * C64::from(w);
        }
        worst = worst.max((acc - CMatrix::identity(d, d)).norm());
    }
    check(worst, 1e-12, "max Frobenius deviation, j=1/2..5")
}

fn axiom_suite() -> Outcome {
    let cfg = AxiomConfig::default();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for tj in [1u32, 2, 4] {
        let (sys, spec, grid) = spin_setup(tj);
        for s in [-1.0, 0.0, 1.0] {
            let field = sw_kernel_field(&sys, &spec, s, &grid).unwrap();
            let partner = sw_kernel_field(&sys, &spec, -s, &grid).unwrap();
            let report = axiom_report(&sys, &spec, &field, &partner, &cfg).unwrap();
            for c in report.checks.iter().filter(|c| c.name.starts_with('K')) {
                worst = worst.max(c.max_abs_deviation / c.tolerance);
                if !c.pass {
                    failures.push(format!("2j={tj} s={s} {}: {:.2e}", c.name, c.max_abs_deviation));
                }
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("all kernel axioms hold; worst deviation/tolerance = {worst:.3e}")
        } else {
            failures.join("; ")
        },
    }
}

fn trace_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst = 0.0f64;
    for tj in [2u32, 4] {
        let (sys, spec, grid) = spin_setup(tj);
        let pairs: Vec<_> =
            (0..20).map(|_| (random_hermitian(sys.space(), &mut rng), random_hermitian(sys.space(), &mut rng))).collect();
        for s in [-1.0, 0.0, 1.0] {
            for (a, b) in &pairs {
                let fa = qpd(&sys, &spec, a, s, &grid).unwrap();
                let fb = qpd(&sys, &spec, b, -s, &grid).unwrap();
                let pair: C64 = fa.values.iter().zip(&fb.values).zip(grid.weights()).map(|((x, y), w)| x * y * *w).sum();
                worst = worst.max((pair - trace_product(a, b).unwrap()).norm());
            }
        }
    }
    check(worst, 1e-8, "max |pairing - Tr(AB)|")
}

fn semigroup_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut spin_err = 0.0f64;
    for tj in [1u32, 2, 4] {
        let (sys, spec, grid) = spin_setup(tj);
        let rho = random_density(sys.space(), &mut rng);
        let f1 = husimi_spin(&sys, &rho, &grid).unwrap();
        let p = transform(&spec, &f1, -1.0).unwrap();
        let back = transform(&spec, &p, 1.0).unwrap();
        spin_err = spin_err.max(back.max_abs_diff(&f1.values));
    }

    let sys = CcrSystem::new(40).unwrap();
    let grid = Arc::new(planar_grid(5.0, 128).unwrap());
    let spec = CcrSpectrum::new(6.0).unwrap();
    let mut ccr_err = 0.0f64;
    for rho in [sys.thermal_state(1.0).unwrap(), sys.coherent_state(C64::new(1.0, -0.5)).unwrap(), sys.fock_state(2).unwrap()] {
        let h = husimi_ccr(&sys, &rho, &grid).unwrap();
        let band = spec.convolve(&grid, &h.values, 0.0).unwrap();
        let p = transform(&spec, &h, -1.0).unwrap();
        let back = transform(&spec, &p, 1.0).unwrap();
        ccr_err = ccr_err.max(back.max_abs_diff(&band));
    }
    Outcome {
        pass: spin_err < 1e-8 && ccr_err < 1e-5,
        detail: format!("spin 1->-1->1 = {spin_err:.3e} (tol 1e-8), ccr band-limited = {ccr_err:.3e} (tol 1e-5)"),
    }
}

fn goldens() -> Outcome {
    let sys = CcrSystem::new(40).unwrap();
    let grid = Arc::new(planar_grid(5.0, 128).unwrap());
    let nodes = grid.nodes();
    let vac = sys.fock_state(0).unwrap();

    let q = husimi_ccr(&sys, &vac, &grid).unwrap();
    let e_q = max_err(&q.values, nodes.iter().map(|a| C64::from((-a.norm_sqr()).exp())));
    let w = wigner_ccr(&sys, &vac, &grid).unwrap();
    let e_w = max_err(&w.values, nodes.iter().map(|a| C64::from(2.0 * (-2.0 * a.norm_sqr()).exp())));
    let origin = 64 * 128 + 64;
    assert!(nodes[origin].norm() < 1e-12);
    let w1 = wigner_ccr(&sys, &sys.fock_state(1).unwrap(), &grid).unwrap();
    let e_w1 = (w1.values[origin] - C64::from(-2.0)).norm();
    let p = glauber_sudarshan_ccr(&sys, &sys.thermal_state(1.0).unwrap(), &grid, 6.0).unwrap();
    let e_p = max_err(&p.field.values, nodes.iter().map(|a| C64::from((-a.norm_sqr()).exp())));

    Outcome {
        pass: e_q < 1e-6 && e_w < 1e-3 && e_w1 < 1e-3 && e_p < 1e-3,
        detail: format!(
            "Q(vac) {e_q:.3e} (1e-6), W(vac) {e_w:.3e} (1e-3), W(|1>)(0)+2 {e_w1:.3e} (1e-3), P(thermal 1) {e_p:.3e} (1e-3)"
        ),
    }
}

fn joint_measurement_is_husimi() -> Outcome {
    let sys = CcrSystem::new(40).unwrap();
    let grid = Arc::new(planar_grid(5.0, 128).unwrap());
    let probe = vacuum_probe(&sys);
    let states = [
        sys.fock_state(0).unwrap(),
        sys.fock_state(1).unwrap(),
        sys.coherent_state(C64::from(1.0)).unwrap(),
        sys.thermal_state(0.5).unwrap(),
    ];
    let mut worst = 0.0f64;
    for rho in &states {
        let joint = joint_distribution(&sys, rho, &probe, &grid).unwrap();
        let q = husimi_ccr(&sys, rho, &grid).unwrap();
        worst = worst.max(joint.max_abs_diff(&q.values));
    }
    check(worst, 1e-5, "max |joint - Husimi|")
}

fn weak_value_route() -> Outcome {
    let (sys, spec, grid) = spin_setup(2);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let a = random_hermitian(sys.space(), &mut rng);
    let mut worst = 0.0f64;
    for s in [-1.0, 0.0] {
        for _ in 0..50 {
            let xi = grid.nodes()[rng.gen_range(0..grid.len())];
            let direct = qpd_at(&sys, &spec, &a, s, &grid, xi).unwrap();
            let via = qpd_via_weak_values(&sys, &spec, &a, s, &grid, xi).unwrap();
            worst = worst.max((direct - via).norm());
        }
    }
    // off-node points too
    let xi = SpherePoint::new(1.1, 0.3 * PI);
    let off = (qpd_at(&sys, &spec, &a, 0.0, &grid, xi).unwrap() - qpd_via_weak_values(&sys, &spec, &a, 0.0, &grid, xi).unwrap()).norm();
    check(worst.max(off), 1e-8, "max |weak-value route - direct|")
}

fn damped_oscillator() -> Outcome {
    let sys = CcrSystem::new(30).unwrap();
    let spec = LindbladSpec::damped_oscillator(&sys, 1.0, 0.2).unwrap();
    let a0 = C64::from(1.5);
    let traj = evolve(&sys.coherent_state(a0).unwrap(), &spec, 1e-3, 5000, 1000).unwrap();
    let a = sys.annihilation();
    let mut amp_err = 0.0f64;
    for k in [1usize, 3, 5] {
        let t = traj.times[k];
        let got = trace_product(traj.states[k].as_operator(), &a).unwrap();
        amp_err = amp_err.max((got - a0 * (C64::new(-0.1, -1.0) * t).exp()).norm());
    }
    let grid = Arc::new(planar_grid(5.0, 64).unwrap());
    let husimi_min = traj
        .states
        .iter()
        .map(|st| husimi_ccr(&sys, st, &grid).unwrap().min_real())
        .fold(f64::INFINITY, f64::min);

    let fock = evolve(&sys.fock_state(1).unwrap(), &spec, 1e-3, 5000, 250).unwrap();
    let origin = 32 * 64 + 32;
    let centre: Vec<f64> = fock.states[1..].iter().map(|st| wigner_ccr(&sys, st, &grid).unwrap().values[origin].re).collect();
    let monotone = centre.len() == 20 && centre.windows(2).all(|w| w[1] > w[0]);

    Outcome {
        pass: amp_err < 1e-4 && husimi_min >= -1e-12 && monotone && centre[0] < 0.0,
        detail: format!(
            "<a> error {amp_err:.3e} (1e-4), Husimi min {husimi_min:.3e}, W(0) {:.3} -> {:.3} over {} samples, increasing: {monotone}",
            centre[0],
            centre[centre.len() - 1],
            centre.len()
        ),
    }
}

fn husimi_positivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (spin, _, sgrid) = spin_setup(4);
    let spin_min = (0..100)
        .map(|_| husimi_spin(&spin, &random_density(spin.space(), &mut rng), &sgrid).unwrap().min_real())
        .fold(f64::INFINITY, f64::min);
    let ccr = CcrSystem::new(20).unwrap();
    let cgrid = Arc::new(planar_grid(5.0, 48).unwrap());
    let ccr_min = (0..100)
        .map(|_| husimi_ccr(&ccr, &random_density(ccr.space(), &mut rng), &cgrid).unwrap().min_real())
        .fold(f64::INFINITY, f64::min);
    let worst = spin_min.min(ccr_min);
    Outcome { pass: worst >= -1e-12, detail: format!("min Husimi: spin {spin_min:.3e}, ccr {ccr_min:.3e} (floor -1e-12)") }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("resolution of unity", resolution_of_unity),
        ("kernel axioms", axiom_suite),
        ("trace duality", trace_duality),
        ("semigroup round trip", semigroup_round_trip),
        ("named distributions", goldens),
        ("joint measurement = Husimi", joint_measurement_is_husimi),
        ("weak-value representation", weak_value_route),
        ("damped oscillator", damped_oscillator),
        ("Husimi positivity", husimi_positivity),
    ];
    let mut all = true;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        all &= out.pass;
        println!(
            "[{}] {}. {name}: {} ({:.1}s)",
            if out.pass { "PASS" } else { "FAIL" },
            n + 1,
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
