//! Lindblad evolution of dense density matrices, and the induced
//! trajectories of phase-space distributions.

use std::sync::Arc;

use crate::ccr::CcrSystem;
use crate::error::{QpdError, Result};
use crate::linalg::{CMatrix, DensityOperator, Operator, C64};
use crate::spectral::{qpd, KernelSpectrum, PhaseGrid, PhaseSpace, QPDField};

/// Largest accepted `dt * (|H| + sum gamma |L|^2)`.
pub const STEP_BOUND: f64 = 0.1;

/// Minimum eigenvalue below which evolution aborts.
pub const POSITIVITY_ABORT: f64 = -1e-6;

/// `d rho/dt = -i[H, rho] + sum gamma (L rho L^dagger - {L^dagger L, rho}/2)`.
#[derive(Debug, Clone)]
pub struct LindbladSpec {
    hamiltonian: Operator,
    jumps: Vec<(Operator, f64)>,
}

impl LindbladSpec {
    pub fn new(hamiltonian: Operator, jumps: Vec<(Operator, f64)>) -> Result<Self> {
        let dev = hamiltonian.hermitian_deviation();
        if dev > 1e-12 {
            return Err(QpdError::NotHermitian(dev));
        }
        for (l, gamma) in &jumps {
            if l.dim() != hamiltonian.dim() {
                return Err(QpdError::DimensionMismatch { expected: hamiltonian.dim(), found: l.dim() });
            }
            if !(gamma.is_finite() && *gamma >= 0.0) {
                return Err(QpdError::InvalidParameter(format!("jump rate must be >= 0 (got {gamma})")));
            }
        }
        Ok(Self { hamiltonian, jumps })
    }

    /// `H = omega a^dagger a` with photon loss `L = a` at rate `gamma`.
    pub fn damped_oscillator(sys: &CcrSystem, omega: f64, gamma: f64) -> Result<Self> {
        let h = sys.number().scale(C64::from(omega));
        let jumps = if gamma > 0.0 { vec![(sys.annihilation(), gamma)] } else { Vec::new() };
        Self::new(h, jumps)
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[(Operator, f64)] {
        &self.jumps
    }

    /// `|H| + sum gamma |L|^2` in spectral norm.
    pub fn rate_bound(&self) -> f64 {
        self.hamiltonian.spectral_norm() + self.jumps.iter().map(|(l, g)| g * l.spectral_norm().powi(2)).sum::<f64>()
    }

    /// `drho/dt` for a raw matrix.
    pub fn generator(&self, rho: &CMatrix) -> CMatrix {
        Generator::new(self).apply(rho)
    }
}

/// Precomputed pieces of the Lindbladian.
struct Generator {
    /// `-i H_eff`, `H_eff = H - (i/2) sum gamma L^dagger L`
    minus_i_heff: CMatrix,
    jumps: Vec<(CMatrix, CMatrix, f64)>,
}

impl Generator {
    fn new(spec: &LindbladSpec) -> Self {
        let mut heff = spec.hamiltonian.matrix().clone();
        for (l, g) in &spec.jumps {
            let ldl = l.matrix().adjoint() * l.matrix();
            heff -= ldl * C64::new(0.0, 0.5 * g);
        }
        Self {
            minus_i_heff: heff * C64::new(0.0, -1.0),
            jumps: spec.jumps.iter().map(|(l, g)| (l.matrix().clone(), l.matrix().adjoint(), *g)).collect(),
        }
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        // -i(H_eff rho - rho H_eff^dagger) = G + G^dagger with G = -i H_eff rho
        let g = &self.minus_i_heff * rho;
        let mut out = &g + g.adjoint();
        for (l, ld, gamma) in &self.jumps {
            out += (l * rho * ld) * C64::from(*gamma);
        }
        out
    }
}

/// Recorded snapshots of an evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityOperator>,
    /// Largest `|Tr rho - 1|` seen over all steps.
    pub max_trace_drift: f64,
    /// Smallest eigenvalue seen over all steps.
    pub min_eigenvalue: f64,
}

/// Fixed-step RK4, symmetrizing after every step. Every `record_every`-th
/// state (and the initial one) is kept.
pub fn evolve(rho0: &DensityOperator, spec: &LindbladSpec, dt: f64, steps: usize, record_every: usize) -> Result<Trajectory> {
    if rho0.dim() != spec.hamiltonian.dim() {
        return Err(QpdError::DimensionMismatch { expected: spec.hamiltonian.dim(), found: rho0.dim() });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(QpdError::InvalidParameter(format!("time step must be positive (got {dt})")));
    }
    let stiffness = dt * spec.rate_bound();
    if stiffness >= STEP_BOUND {
        return Err(QpdError::StepSize(stiffness));
    }
    let stride = record_every.max(1);
    let gen = Generator::new(spec);
    let space = rho0.space().clone();
    let half = C64::from(dt / 2.0);
    let sixth = C64::from(dt / 6.0);
    let two = C64::from(2.0);

    let mut rho = rho0.matrix().clone();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![rho0.clone()],
        max_trace_drift: (rho0.as_operator().trace().re - 1.0).abs(),
        min_eigenvalue: rho0.min_eigenvalue(),
    };
    for step in 1..=steps {
        let k1 = gen.apply(&rho);
        let k2 = gen.apply(&(&rho + &k1 * half));
        let k3 = gen.apply(&(&rho + &k2 * half));
        let k4 = gen.apply(&(&rho + &k3 * C64::from(dt)));
        rho += (k1 + &k2 * two + &k3 * two + k4) * sixth;
        rho = (&rho + rho.adjoint()) * C64::from(0.5);

        let op = Operator::new(space.clone(), rho.clone())?;
        let state = DensityOperator::from_operator_unchecked(op);
        let min_ev = state.min_eigenvalue();
        traj.min_eigenvalue = traj.min_eigenvalue.min(min_ev);
        traj.max_trace_drift = traj.max_trace_drift.max((rho.trace().re - 1.0).abs());
        if min_ev < POSITIVITY_ABORT {
            return Err(QpdError::PositivityLost { step, min_eigenvalue: min_ev });
        }
        if step % stride == 0 {
            traj.times.push(step as f64 * dt);
            traj.states.push(state);
        }
    }
    Ok(traj)
}

/// `F^(s)` of every recorded snapshot.
pub fn qpd_trajectory<X, S>(space: &X, spec: &S, traj: &Trajectory, s: f64, grid: &Arc<PhaseGrid<X::Point>>) -> Result<Vec<QPDField<X::Point>>>
where
    X: PhaseSpace,
    S: KernelSpectrum<X::Point> + ?Sized,
{
    spec.check_power(crate::spectral::husimi_exponent(s))?;
    traj.states.iter().map(|rho| qpd(space, spec, rho.as_operator(), s, grid)).collect()
}
