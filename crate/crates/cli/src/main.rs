//! `qpd`: compute and check quasi-probability distributions from the shell.

mod state;

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use qpd_core::ccr::{glauber_sudarshan_ccr, husimi_ccr, planar_grid, wigner_ccr, CcrSpectrum, CcrSystem, PlanarGrid};
use qpd_core::dynamics::{evolve, qpd_trajectory, LindbladSpec};
use qpd_core::field_io::{format_field, parse_field, parse_shape, FieldFile};
use qpd_core::linalg::{trace_product, DensityOperator, Operator, C64};
use qpd_core::naimark::{composite_pair, joint_distribution, marginal_moments, squeezed_probe, vacuum_probe};
use qpd_core::spectral::{
    axiom_report, qpd, sw_kernel_field, transform, weak_value, AxiomConfig, PhaseGrid, PhaseSpace, QPDField,
};
use qpd_core::su2::{delta_spectrum, husimi_spin, sphere_grid, SphereGrid, SpherePoint, SpinSpectrum, SpinSystem};
use qpd_core::QpdError;

/// Bad flags, presets or file contents.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug)]
struct SingularP(f64);

impl fmt::Display for SingularP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P-function is singular at this band limit (high-band energy fraction {:.3e})", self.0)
    }
}

impl std::error::Error for SingularP {}

#[derive(Debug)]
struct ChecksFailed(Vec<String>);

impl fmt::Display for ChecksFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "checks failed: {}", self.0.join(", "))
    }
}

impl std::error::Error for ChecksFailed {}

#[derive(Parser)]
#[command(name = "qpd", version, about = "Quasi-probability distributions on coherent-state phase spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Husimi function (s = 1).
    Husimi(FieldArgs),
    /// Wigner function (s = 0).
    Wigner(FieldArgs),
    /// Glauber-Sudarshan function (s = -1), band-limited on the plane.
    Glauber(FieldArgs),
    /// Distribution of real order s (1 Husimi, 0 Wigner, -1 Glauber-Sudarshan).
    Qpd {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
    },
    /// Check the kernel axioms at order s and write a JSON report.
    Axioms(AxiomArgs),
    /// Joint q/p measurement with a probe mode (plane only).
    Naimark(NaimarkArgs),
    /// Damped-oscillator evolution (plane only).
    Dynamics(DynamicsArgs),
    /// Weak value <post|A|pre>/<post|pre> between two coherent states.
    Weakvalue(WeakArgs),
    /// Re-express a field file at another order.
    Transform(TransformArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    Spin,
    Ccr,
}

#[derive(Args, Clone)]
struct SystemArgs {
    #[arg(long, value_enum, default_value = "spin")]
    backend: Backend,
    /// Spin quantum number, e.g. 1 or 3/2.
    #[arg(long, default_value = "1")]
    j: String,
    /// Fock cutoff.
    #[arg(long = "N", default_value_t = 40)]
    cutoff: usize,
    /// AxB: Gauss-Legendre x azimuth nodes (spin) or MxM (plane).
    #[arg(long)]
    grid: Option<String>,
    /// Plane grid covers [-L, L)^2.
    #[arg(long, default_value_t = 5.0)]
    half_width: f64,
    /// Fourier band limit on the plane.
    #[arg(long, default_value_t = 6.0)]
    kappa: f64,
}

#[derive(Args, Clone)]
struct StateArgs {
    /// vacuum, fock:n, coherent:re,im, thermal:nbar, jj, mixed, coherent:theta,phi (spin).
    #[arg(long)]
    state: Option<String>,
    /// Density matrix file: one row per line, re,im interleaved.
    #[arg(long, conflicts_with = "state")]
    state_file: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct FieldArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    state: StateArgs,
    /// Output field file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Treat a singular P-function as an error.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct AxiomArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    s: f64,
    /// JSON report (stdout if omitted).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct NaimarkArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    state: StateArgs,
    /// Probe squeezing d; 1 is the vacuum probe.
    #[arg(long, default_value_t = 1.0)]
    probe_d: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DynamicsArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 0.2)]
    gamma: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 5000)]
    steps: usize,
    #[arg(long, default_value_t = 100)]
    record_every: usize,
    /// Time series of <a> (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a field of order --s per snapshot, to <prefix>_<k>.csv.
    #[arg(long)]
    fields_prefix: Option<String>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    s: f64,
}

#[derive(Args)]
struct WeakArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// jx, jy, jz, id (spin) or a, adag, n, q, p, id (plane).
    #[arg(long, default_value = "id")]
    op: String,
    #[arg(long, conflicts_with = "op")]
    op_file: Option<PathBuf>,
    /// theta,phi (spin) or re,im (plane).
    #[arg(long, allow_hyphen_values = true)]
    pre: String,
    #[arg(long, allow_hyphen_values = true)]
    post: String,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, allow_negative_numbers = true)]
    to: f64,
    #[arg(long = "in")]
    input: PathBuf,
    /// spin:<j> or ccr:<kappa>
    #[arg(long)]
    spectrum: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A backend with its grid and kernel spectrum.
enum System {
    Spin { sys: SpinSystem, spec: SpinSpectrum, grid: Arc<SphereGrid> },
    Ccr { sys: CcrSystem, spec: CcrSpectrum, grid: Arc<PlanarGrid>, half_width: f64 },
}

impl System {
    fn build(args: &SystemArgs, default_plane_points: usize) -> Result<Self> {
        let shape = args.grid.as_deref().map(parse_shape).transpose()?;
        match args.backend {
            Backend::Spin => {
                let sys = SpinSystem::new(state::parse_twice_j(&args.j)?)?;
                let tj = sys.twice_j() as usize;
                let (nt, np) = shape.unwrap_or((tj + 2, 2 * tj + 2));
                let grid = Arc::new(sphere_grid(&sys, nt, np)?);
                Ok(System::Spin { spec: delta_spectrum(&sys), sys, grid })
            }
            Backend::Ccr => {
                let sys = CcrSystem::new(args.cutoff)?;
                sys.require_distribution_cutoff()?;
                let (a, b) = shape.unwrap_or((default_plane_points, default_plane_points));
                if a != b {
                    bail!(ConfigError(format!("plane grids are square, got {a}x{b}")));
                }
                let grid = Arc::new(planar_grid(args.half_width, a)?);
                Ok(System::Ccr { spec: CcrSpectrum::new(args.kappa)?, sys, grid, half_width: args.half_width })
            }
        }
    }

    fn backend_tag(&self) -> String {
        match self {
            System::Spin { sys, .. } => sys.describe(),
            System::Ccr { sys, half_width, .. } => format!("ccr(N={},L={})", sys.cutoff(), half_width),
        }
    }

    fn state(&self, args: &StateArgs) -> Result<DensityOperator> {
        let (space, preset) = match self {
            System::Spin { sys, .. } => (sys.space(), "jj"),
            System::Ccr { sys, .. } => (sys.space(), "vacuum"),
        };
        if let Some(path) = &args.state_file {
            return Ok(DensityOperator::new(state::load_matrix(space, path)?)?);
        }
        let name = args.state.as_deref().unwrap_or(preset);
        match self {
            System::Spin { sys, .. } => state::spin_state(sys, name),
            System::Ccr { sys, .. } => state::ccr_state(sys, name),
        }
    }

    fn ccr(&self, what: &str) -> Result<(&CcrSystem, &CcrSpectrum, &Arc<PlanarGrid>)> {
        match self {
            System::Ccr { sys, spec, grid, .. } => Ok((sys, spec, grid)),
            System::Spin { .. } => bail!(ConfigError(format!("{what} needs --backend ccr"))),
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).context("writing stdout")?;
            out.flush().context("writing stdout")
        }
    }
}

fn emit<X: PhaseSpace>(space: &X, field: &QPDField<X::Point>, tag: &str, rho: &DensityOperator, out: Option<&Path>) -> Result<()> {
    write_output(out, &format_field(space, field, tag))?;
    let integral = field.integral();
    eprintln!(
        "normalization: integral = {:.12} (imag {:.1e}), trace = {:.12}; min = {:.6e}, max = {:.6e}",
        integral.re,
        integral.im,
        rho.as_operator().trace().re,
        field.min_real(),
        field.max_real()
    );
    Ok(())
}

fn run_field(args: &FieldArgs, s: f64) -> Result<()> {
    let system = System::build(&args.system, 128)?;
    let rho = system.state(&args.state)?;
    let tag = system.backend_tag();
    let out = args.out.as_deref();
    info!("order s = {s} on {tag}");
    match &system {
        System::Spin { sys, spec, grid } => {
            let field = if s == 1.0 { husimi_spin(sys, &rho, grid)? } else { qpd(sys, spec, rho.as_operator(), s, grid)? };
            emit(sys, &field, &tag, &rho, out)
        }
        System::Ccr { sys, spec, grid, .. } => {
            let field = if s == 1.0 {
                husimi_ccr(sys, &rho, grid)?
            } else if s == 0.0 {
                wigner_ccr(sys, &rho, grid)?
            } else if s == -1.0 {
                let p = glauber_sudarshan_ccr(sys, &rho, grid, spec.kappa())?;
                eprintln!(
                    "band limit kappa = {}: high-band fraction {:.3e}, re-mollification error {:.3e} (band-limited), {:.3e} (raw)",
                    p.kappa, p.high_band_fraction, p.reconstruction_error, p.raw_reconstruction_error
                );
                if p.divergence_warning {
                    if args.strict {
                        return Err(SingularP(p.high_band_fraction).into());
                    }
                    eprintln!("warning: P-function looks singular at this band limit; values are a band-limited surrogate");
                }
                p.field
            } else {
                qpd(sys, spec, rho.as_operator(), s, grid)?
            };
            emit(sys, &field, &tag, &rho, out)
        }
    }
}

fn run_axioms(args: &AxiomArgs) -> Result<()> {
    let system = System::build(&args.system, 32)?;
    let cfg = AxiomConfig::default();
    let report = match &system {
        System::Spin { sys, spec, grid } => {
            let field = sw_kernel_field(sys, spec, args.s, grid)?;
            let partner = sw_kernel_field(sys, spec, -args.s, grid)?;
            axiom_report(sys, spec, &field, &partner, &cfg)?
        }
        System::Ccr { sys, spec, grid, .. } => {
            let field = sw_kernel_field(sys, spec, args.s, grid)?;
            let partner = sw_kernel_field(sys, spec, -args.s, grid)?;
            axiom_report(sys, spec, &field, &partner, &cfg)?
        }
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_output(args.report.as_deref(), &text)?;
    for c in &report.checks {
        eprintln!("{:<28} {:.3e} (tol {:.0e}) {}", c.name, c.max_abs_deviation, c.tolerance, if c.pass { "ok" } else { "FAIL" });
    }
    let failed: Vec<String> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    if !failed.is_empty() {
        return Err(ChecksFailed(failed).into());
    }
    Ok(())
}

fn run_naimark(args: &NaimarkArgs) -> Result<()> {
    let system = System::build(&args.system, 128)?;
    let (sys, _, grid) = system.ccr("naimark")?;
    let rho = system.state(&args.state)?;
    let probe = if args.probe_d == 1.0 { vacuum_probe(sys) } else { squeezed_probe(sys, args.probe_d)? };
    let field = joint_distribution(sys, &rho, &probe, grid)?;
    let text = format_field(sys, &field, &system.backend_tag());
    // record the probe in the header
    let text = text.replacen('\n', &format!(" probe_d={}\n", args.probe_d), 1);
    write_output(args.out.as_deref(), &text)?;
    let (means, vars) = marginal_moments(&field);
    eprintln!(
        "marginals: <x> = {:.6e}, <y> = {:.6e}, var x = {:.6e}, var y = {:.6e}",
        means[0], means[1], vars[0], vars[1]
    );
    if sys.cutoff() >= 16 {
        let pair = composite_pair(sys.cutoff())?;
        eprintln!(
            "composite observables: |[q, p]| = {:.3e} on the low block, {:.3e} overall (truncation edge)",
            pair.interior_commutator_norm, pair.full_commutator_norm
        );
    }
    Ok(())
}

fn run_dynamics(args: &DynamicsArgs) -> Result<()> {
    let system = System::build(&args.system, 64)?;
    let (sys, spec, grid) = system.ccr("dynamics")?;
    let rho0 = system.state(&args.state)?;
    let lindblad = LindbladSpec::damped_oscillator(sys, args.omega, args.gamma)?;
    let traj = evolve(&rho0, &lindblad, args.dt, args.steps, args.record_every)?;
    let (a, n) = (sys.annihilation(), sys.number());
    let mut text = String::from("# t,re_a,im_a,mean_n\n");
    for (t, st) in traj.times.iter().zip(&traj.states) {
        let ea = trace_product(st.as_operator(), &a)?;
        let en = trace_product(st.as_operator(), &n)?;
        text.push_str(&format!("{:e},{:e},{:e},{:e}\n", t, ea.re, ea.im, en.re));
    }
    write_output(args.out.as_deref(), &text)?;
    eprintln!("trace drift {:.3e}, minimum eigenvalue {:.3e}", traj.max_trace_drift, traj.min_eigenvalue);
    if let Some(prefix) = &args.fields_prefix {
        let fields = if args.s == 0.0 {
            traj.states.iter().map(|st| wigner_ccr(sys, st, grid)).collect::<qpd_core::Result<Vec<_>>>()?
        } else {
            qpd_trajectory(sys, spec, &traj, args.s, grid)?
        };
        let tag = system.backend_tag();
        for (k, f) in fields.iter().enumerate() {
            let path = PathBuf::from(format!("{prefix}_{k:04}.csv"));
            write_output(Some(&path), &format_field(sys, f, &tag))?;
        }
    }
    Ok(())
}

fn run_weak(args: &WeakArgs) -> Result<()> {
    let system = System::build(&args.system, 32)?;
    let (pre, post) = (state::parse_pair(&args.pre)?, state::parse_pair(&args.post)?);
    let value = match &system {
        System::Spin { sys, .. } => {
            let op = match &args.op_file {
                Some(p) => state::load_matrix(sys.space(), p)?,
                None => state::spin_operator(sys, &args.op)?,
            };
            weak_value(sys, &op, SpherePoint::new(pre.0, pre.1), SpherePoint::new(post.0, post.1))?
        }
        System::Ccr { sys, .. } => {
            let op: Operator = match &args.op_file {
                Some(p) => state::load_matrix(sys.space(), p)?,
                None => state::ccr_operator(sys, &args.op)?,
            };
            weak_value(sys, &op, C64::new(pre.0, pre.1), C64::new(post.0, post.1))?
        }
    };
    let text = serde_json::json!({ "re": value.re, "im": value.im }).to_string() + "\n";
    write_output(None, &text)
}

/// Rebuild the grid a field file was written on and check its coordinates.
fn rebuilt_grid<P: Copy>(grid: PhaseGrid<P>, file: &FieldFile, coords: impl Fn(P) -> (f64, f64)) -> Result<Arc<PhaseGrid<P>>> {
    let worst = grid
        .nodes()
        .iter()
        .zip(&file.coords)
        .map(|(&p, &(a, b))| {
            let (x, y) = coords(p);
            (x - a).abs().max((y - b).abs())
        })
        .fold(0.0, f64::max);
    if worst > 1e-9 {
        bail!(ConfigError(format!("field coordinates do not match a standard {}x{} grid (off by {worst:.2e})", file.shape.0, file.shape.1)));
    }
    Ok(Arc::new(grid))
}

fn run_transform(args: &TransformArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let file = parse_field(&text)?;
    if (file.s - args.from).abs() > 1e-12 {
        bail!(ConfigError(format!("--from {} but {} holds order s={}", args.from, args.input.display(), file.s)));
    }
    let (kind, param) = args
        .spectrum
        .split_once(':')
        .ok_or_else(|| ConfigError(format!("--spectrum must be spin:<j> or ccr:<kappa>, got {:?}", args.spectrum)))?;
    let out = args.out.as_deref();
    match kind {
        "spin" => {
            let sys = SpinSystem::new(state::parse_twice_j(param)?)?;
            if file.backend != sys.describe() {
                bail!(ConfigError(format!("spectrum {} does not match field backend {}", sys.describe(), file.backend)));
            }
            let grid = rebuilt_grid(sphere_grid(&sys, file.shape.0, file.shape.1)?, &file, |p: SpherePoint| (p.theta, p.phi))?;
            let field = QPDField { s: file.s, grid, values: file.values.clone(), label: String::new() };
            let moved = transform(&delta_spectrum(&sys), &field, args.to)?;
            write_output(out, &format_field(&sys, &moved, &file.backend))
        }
        "ccr" => {
            let kappa: f64 = param.parse().map_err(|_| ConfigError(format!("bad kappa {param:?}")))?;
            if !file.backend.starts_with("ccr") {
                bail!(ConfigError(format!("spectrum ccr does not match field backend {}", file.backend)));
            }
            if file.shape.0 != file.shape.1 || file.coords.is_empty() {
                bail!(ConfigError("plane fields must be on a square grid".into()));
            }
            let half_width = -file.coords[0].0;
            let sys = CcrSystem::new(1)?;
            let grid = rebuilt_grid(planar_grid(half_width, file.shape.0)?, &file, |p: C64| (p.re, p.im))?;
            let spec = CcrSpectrum::new(kappa)?;
            let field = QPDField { s: file.s, grid, values: file.values.clone(), label: String::new() };
            let moved = transform(&spec, &field, args.to)?;
            write_output(out, &format_field(&sys, &moved, &file.backend))
        }
        other => bail!(ConfigError(format!("unknown spectrum kind {other:?}"))),
    }
}

/// Exit code and category for an error chain.
fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return (2, "config");
        }
        if cause.downcast_ref::<SingularP>().is_some() {
            return (5, "singular-p");
        }
        if cause.downcast_ref::<ChecksFailed>().is_some() {
            return (1, "checks-failed");
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return (6, "io");
        }
        if let Some(e) = cause.downcast_ref::<QpdError>() {
            return match e {
                QpdError::Conditioning { .. } => (3, "conditioning"),
                QpdError::CutoffInadequate { .. } => (4, "cutoff"),
                QpdError::Parse(_)
                | QpdError::InvalidParameter(_)
                | QpdError::QuadratureTooSmall(_)
                | QpdError::DimensionMismatch { .. }
                | QpdError::NotHermitian(_)
                | QpdError::NotNormalized(_)
                | QpdError::NotPositive(_)
                | QpdError::StepSize(_) => (2, "config"),
                _ => (7, "numerical"),
            };
        }
    }
    (7, "other")
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("QPD_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| ConfigError(format!("QPD_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            bail!(ConfigError("QPD_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring thread pool")?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Husimi(a) => run_field(a, 1.0),
        Command::Wigner(a) => run_field(a, 0.0),
        Command::Glauber(a) => run_field(a, -1.0),
        Command::Qpd { field, s } => run_field(field, *s),
        Command::Axioms(a) => run_axioms(a),
        Command::Naimark(a) => run_naimark(a),
        Command::Dynamics(a) => run_dynamics(a),
        Command::Weakvalue(a) => run_weak(a),
        Command::Transform(a) => run_transform(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, category) = classify(&err);
            let msg = serde_json::json!({ "error": category, "code": code, "message": format!("{err:#}") });
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}
