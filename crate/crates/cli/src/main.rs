//! `qeigen` command-line drivers.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info};
use serde::Serialize;

use qeigen::eigensearch::{
    eigenvalue_estimation_on, estimate_with_bits_on, rescaled_bits, Decision, EstimationResult, SearchParams, SearchStep,
    DEFAULT_NU, MIN_K,
};
use qeigen::elasticity::{elasticity_pipeline, StringGeometry};
use qeigen::experiments::{convergence_sweep, qpe_table, scaling_sweep};
use qeigen::groundstate::{overlap, prepare_ground_state, projector_low_energy, PrepOptions};
use qeigen::io::{fmt_f64, load_fixture, parse_matrix, render_json, CsvTable, DensityMatrixFile, RunConfig};
use qeigen::rng::{derive_seed, seeded_rng};
use qeigen::spectra::{gershgorin_bound, QueryLedger, RescaleMap};
use qeigen::{fidelity, Backend, DensityMatrix, Error, PrepMode};

#[derive(Parser)]
#[command(name = "qeigen", version, about = "Simulated quantum minimum-eigenvalue estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outcome distribution of median-boosted phase estimation.
    Qpe(QpeArgs),
    /// Smallest eigenvalue of a Hermitian matrix file.
    Estimate(EstimateArgs),
    /// Per-step errors of the search on random diagonal matrices.
    Converge(ConvergeArgs),
    /// Fundamental mode of a composite string.
    Elasticity(ElasticityArgs),
    /// Low-energy state preparation for a matrix file.
    Groundstate(GroundstateArgs),
    /// Estimates across a bond-length fixture.
    Fixture(FixtureArgs),
    /// Ledger growth with matrix dimension.
    Scaling(ScalingArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_NU)]
    nu: f64,
    #[arg(long, default_value_t = MIN_K)]
    k: u32,
}

#[derive(Args)]
struct QpeArgs {
    /// Phase in [0, 1); accepts a fraction such as 97/256.
    #[arg(long, value_parser = parse_phase)]
    phase: f64,
    #[arg(long, default_value_t = 6)]
    bits: u32,
    #[arg(long, default_value_t = 1)]
    copies: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rescale {
    Auto,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Structured,
    Faithful,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Structured => Backend::Structured,
            BackendArg::Faithful => Backend::Faithful,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Postselect,
    Grover,
}

impl From<ModeArg> for PrepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Postselect => PrepMode::Postselect,
            ModeArg::Grover => PrepMode::Grover,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = 5)]
    epsilon_bits: u32,
    /// `none` requires the spectrum in (2^-m, 1 − 2^-m).
    #[arg(long, value_enum, default_value_t = Rescale::None)]
    rescale: Rescale,
    #[arg(long, value_enum, default_value_t = BackendArg::Structured)]
    backend: BackendArg,
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 6)]
    epsilon_bits: u32,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ElasticityArgs {
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, value_parser = parse_phase, default_value = "-6/17", allow_hyphen_values = true)]
    z0: f64,
    #[arg(long, value_parser = parse_phase, default_value = "10/17")]
    d: f64,
    #[arg(long, default_value_t = 5.0)]
    eps_r: f64,
    #[arg(long, default_value_t = 5)]
    clock_bits: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mode-shape CSV (z, phi_semianalytic, phi_fem).
    #[arg(long)]
    mode_out: Option<PathBuf>,
    #[arg(long)]
    rho_out: Option<PathBuf>,
}

#[derive(Args)]
struct GroundstateArgs {
    /// Matrix with spectrum in (2^-m, 1 − 2^-m).
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = 5)]
    epsilon_bits: u32,
    #[arg(long, value_enum, default_value_t = ModeArg::Postselect)]
    mode: ModeArg,
    /// Median copies; defaults to the count implied by the failure budget.
    #[arg(long)]
    copies: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_NU)]
    nu: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    rho_out: Option<PathBuf>,
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(long)]
    path: PathBuf,
    #[arg(long, default_value_t = 1e-2)]
    epsilon: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ScalingArgs {
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 6)]
    epsilon_bits: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn parse_phase(text: &str) -> Result<f64, String> {
    let value = match text.split_once('/') {
        Some((a, b)) => {
            let num: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
            let den: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
            num / den
        }
        None => text.trim().parse().map_err(|e| format!("{e}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("not a finite number: {text}"))
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => {
            std::fs::write(p, text)?;
            info!("wrote {}", p.display());
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn validate(ok: bool, message: impl FnOnce() -> String) -> Result<(), Error> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(message()))
    }
}

fn run_qpe(args: &QpeArgs) -> Result<(), Error> {
    validate((0.0..1.0).contains(&args.phase), || format!("phase must lie in [0, 1), got {}", args.phase))?;
    validate((1..=20).contains(&args.bits), || format!("bits must lie in 1..=20, got {}", args.bits))?;
    validate(args.copies % 2 == 1, || format!("copies must be odd, got {}", args.copies))?;
    let table = qpe_table(args.phase, args.bits, &[args.copies])?;
    let config = RunConfig {
        epsilon_bits: args.bits,
        ..RunConfig::default()
    };
    let mut csv = CsvTable::new(&config, &["x_value", "prob"]);
    csv.comments.push(format!("phase={} bits={} copies={}", fmt_f64(args.phase), args.bits, args.copies));
    for (x, &p) in table.pmf[0].iter().enumerate() {
        if p > 0.0 {
            csv.push(vec![fmt_f64(table.x_value(x)), fmt_f64(p)]);
        }
    }
    emit(args.out.as_deref(), &csv.render())
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    matrix: String,
    dim: usize,
    estimate: f64,
    /// Target precision in the matrix's own units.
    epsilon: f64,
    rescale: Option<RescaleMap>,
    exact_min_eigenvalue: f64,
    params: &'a SearchParams,
    ledger: &'a QueryLedger,
    trace: &'a [SearchStep],
}

fn trace_csv(config: &RunConfig, result: &EstimationResult) -> CsvTable {
    let mut csv = CsvTable::new(config, &["i", "y_i", "p_tilde", "decision"]);
    for s in &result.trace {
        let d = match s.decision {
            Decision::Lower => "lower",
            Decision::Upper => "upper",
        };
        csv.push(vec![s.i.to_string(), fmt_f64(s.y), fmt_f64(s.p_tilde), d.to_string()]);
    }
    csv
}

fn run_estimate(args: &EstimateArgs) -> Result<(), Error> {
    let h = parse_matrix(&args.matrix)?;
    let c = &args.common;
    let backend: Backend = args.backend.into();
    let config = RunConfig {
        seed: c.seed,
        epsilon_bits: args.epsilon_bits,
        k: c.k,
        nu: c.nu,
        backend,
        mode: PrepMode::Postselect,
    };
    let epsilon = 0.5f64.powi(args.epsilon_bits as i32);
    let mut rng = seeded_rng(c.seed);
    let (estimate, map, result) = match args.rescale {
        Rescale::None => {
            let params = SearchParams::from_bits(h.dim(), args.epsilon_bits, c.nu, c.k)?;
            let r = eigenvalue_estimation_on(&h, &params, backend, &mut rng)?;
            (r.estimate, None, r)
        }
        Rescale::Auto => {
            let norm = gershgorin_bound(&h);
            let bits = rescaled_bits(epsilon, norm)?;
            debug!("gershgorin bound {norm}, internal bits {bits}");
            let g = estimate_with_bits_on(&h, bits, norm, c.nu, c.k, backend, &mut rng)?;
            (g.estimate, Some(g.map), g.scaled)
        }
    };
    let exact = h.eigendecomposition()?.min_eigenvalue();
    info!("estimate {estimate}, exact {exact}");
    let payload = EstimateOutput {
        matrix: args.matrix.display().to_string(),
        dim: h.dim(),
        estimate,
        epsilon,
        rescale: map,
        exact_min_eigenvalue: exact,
        params: &result.params,
        ledger: &result.ledger,
        trace: &result.trace,
    };
    if let Some(p) = &args.trace_out {
        trace_csv(&config, &result).write(p)?;
    }
    emit(args.out.as_deref(), &render_json(&config, &payload)?)
}

fn run_converge(args: &ConvergeArgs) -> Result<(), Error> {
    validate(args.trials > 0, || "trials must be positive".into())?;
    let c = &args.common;
    let params = SearchParams::from_bits(args.n, args.epsilon_bits, c.nu, c.k)?;
    let config = RunConfig {
        seed: c.seed,
        epsilon_bits: args.epsilon_bits,
        k: c.k,
        nu: c.nu,
        ..RunConfig::default()
    };
    let report = convergence_sweep(&params, args.trials, c.seed)?;
    info!(
        "{} envelope violations, worst final error {}",
        report.envelope_violations(),
        report.worst_final_error()
    );
    let mut csv = CsvTable::new(&config, &["series", "trial", "i", "error"]);
    for t in &report.trials {
        for (i, e) in t.errors.iter().enumerate() {
            csv.push(vec!["trial".into(), t.trial.to_string(), (i + 1).to_string(), fmt_f64(*e)]);
        }
    }
    for (name, series) in [
        ("average", &report.average),
        ("maximum", &report.maximum),
        ("envelope", &report.envelope),
    ] {
        for (i, v) in series.iter().enumerate() {
            csv.push(vec![name.into(), String::new(), (i + 1).to_string(), fmt_f64(*v)]);
        }
    }
    emit(args.out.as_deref(), &csv.render())
}

fn rho_json(config: &RunConfig, rho: &DensityMatrix) -> Result<String, Error> {
    render_json(config, &DensityMatrixFile::from_density(rho))
}

fn run_elasticity(args: &ElasticityArgs) -> Result<(), Error> {
    let g = StringGeometry::new(args.z0, args.d, args.eps_r)?;
    let config = RunConfig {
        seed: args.seed,
        epsilon_bits: args.clock_bits,
        ..RunConfig::default()
    };
    let run = elasticity_pipeline(args.n, &g, args.clock_bits, &mut seeded_rng(args.seed))?;
    info!(
        "λ_min {} estimate {} fidelity {}",
        run.report.lambda_exact, run.report.lambda_estimate, run.report.fidelity
    );
    if let Some(p) = &args.mode_out {
        let mut csv = CsvTable::new(&config, &["z", "phi_semianalytic", "phi_fem"]);
        for &(z, s, f) in &run.mode_rows {
            csv.push(vec![fmt_f64(z), fmt_f64(s), fmt_f64(f)]);
        }
        csv.write(p)?;
    }
    if let Some(p) = &args.rho_out {
        std::fs::write(p, rho_json(&config, &run.rho)?)?;
    }
    emit(args.out.as_deref(), &render_json(&config, &run.report)?)
}

#[derive(Serialize)]
struct GroundstateOutput<'a> {
    matrix: String,
    theta0: f64,
    epsilon: f64,
    low_energy_overlap: f64,
    fidelity: f64,
    p_good: f64,
    window_masses: &'a [f64],
    eigenvalues: &'a [f64],
    grover_iterations: Option<u64>,
    ledger: &'a QueryLedger,
}

fn run_groundstate(args: &GroundstateArgs) -> Result<(), Error> {
    let h = parse_matrix(&args.matrix)?;
    let mode: PrepMode = args.mode.into();
    let config = RunConfig {
        seed: args.seed,
        epsilon_bits: args.epsilon_bits,
        nu: args.nu,
        mode,
        ..RunConfig::default()
    };
    let epsilon = 0.5f64.powi(args.epsilon_bits as i32);
    let options = PrepOptions {
        mode,
        copies: args.copies,
        ..PrepOptions::default()
    };
    let run = prepare_ground_state(&h, epsilon, args.nu, &options, &mut seeded_rng(args.seed))?;
    let eig = h.eigendecomposition()?;
    let ground = DensityMatrix::from_pure(&eig.eigenvector(0));
    let p = &run.prepared;
    let payload = GroundstateOutput {
        matrix: args.matrix.display().to_string(),
        theta0: run.search.estimate,
        epsilon,
        low_energy_overlap: overlap(&p.rho, &projector_low_energy(&h, epsilon)?)?,
        fidelity: fidelity(&p.rho, &ground)?,
        p_good: p.p_good,
        window_masses: &p.window_masses,
        eigenvalues: &p.eigenvalues,
        grover_iterations: p.grover.as_ref().map(|g| g.iterations),
        ledger: &run.search.ledger,
    };
    if let Some(path) = &args.rho_out {
        std::fs::write(path, rho_json(&config, &p.rho)?)?;
    }
    emit(args.out.as_deref(), &render_json(&config, &payload)?)
}

fn run_fixture(args: &FixtureArgs) -> Result<(), Error> {
    let fixture = load_fixture(&args.path)?;
    let c = &args.common;
    let config = RunConfig {
        seed: c.seed,
        k: c.k,
        nu: c.nu,
        ..RunConfig::default()
    };
    let mut csv = CsvTable::new(&config, &["bond_length", "estimate", "exact", "abs_error"]);
    csv.comments.push(format!("fixture={} units={} epsilon={}", fixture.name, fixture.units, fmt_f64(args.epsilon)));
    for (i, (r, h)) in fixture.operators()?.into_iter().enumerate() {
        let norm = gershgorin_bound(&h);
        let bits = rescaled_bits(args.epsilon, norm)?;
        let mut rng = seeded_rng(derive_seed(c.seed, i as u64));
        let est = estimate_with_bits_on(&h, bits, norm, c.nu, c.k, Backend::Structured, &mut rng)?;
        let exact = h.eigendecomposition()?.min_eigenvalue();
        csv.push(vec![
            fmt_f64(r),
            fmt_f64(est.estimate),
            fmt_f64(exact),
            fmt_f64((est.estimate - exact).abs()),
        ]);
    }
    emit(args.out.as_deref(), &csv.render())
}

fn run_scaling(args: &ScalingArgs) -> Result<(), Error> {
    let c = &args.common;
    let config = RunConfig {
        seed: c.seed,
        epsilon_bits: args.epsilon_bits,
        k: c.k,
        nu: c.nu,
        ..RunConfig::default()
    };
    let report = scaling_sweep(&args.dims, args.epsilon_bits, c.nu, c.k, c.seed)?;
    let mut csv = CsvTable::new(&config, &["n", "grid", "a_applications", "evolution_segments"]);
    csv.comments.push(format!("fitted_exponent={}", fmt_f64(report.exponent)));
    for p in &report.points {
        csv.push(vec![
            p.n.to_string(),
            p.grid.to_string(),
            p.a_applications.to_string(),
            p.evolution_segments.to_string(),
        ]);
    }
    emit(args.out.as_deref(), &csv.render())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QEIGEN_LOG", "error")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Qpe(a) => run_qpe(a),
        Command::Estimate(a) => run_estimate(a),
        Command::Converge(a) => run_converge(a),
        Command::Elasticity(a) => run_elasticity(a),
        Command::Groundstate(a) => run_groundstate(a),
        Command::Fixture(a) => run_fixture(a),
        Command::Scaling(a) => run_scaling(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
