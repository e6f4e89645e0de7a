//! Command-line front end: analysis and simulation of two-species
//! competitive dynamics under random environment switching.

mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lvswitch::boundary::{boundary_measure, Face, MeasureKind};
use lvswitch::envmodel::{Environment, EnvironmentPair, Species, SwitchRates};
use lvswitch::invasion::{
    classify_outcome, frequency_limits, invasion_rate_y, sign_sweep, trace_zero_set, Outcome,
    Sign,
};
use lvswitch::pdmp::{
    extinction_ensemble, grid_edges, occupation_histogram, simulate, SimConfig,
};

#[derive(Parser)]
#[command(
    name = "lvswitch",
    version,
    about = "Competitive Lotka-Volterra dynamics under random environment switching"
)]
struct Cli {
    /// Cap on worker threads for sweeps and ensembles.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify each environment's single-regime flow (JSON).
    Classify(ClassifyArgs),
    /// Sign intervals I and J with quadratic diagnostics (JSON).
    Intervals(IntervalsArgs),
    /// Invasion rates, signs, and predicted outcome at one rate point (JSON).
    Rates(RatePointArgs),
    /// Invasion-rate signs over an (s, t) grid (CSV).
    Sweep(SweepArgs),
    /// Zero set t(s) of the y invasion rate over the interval I (CSV).
    Zeroset(ZerosetArgs),
    /// Boundary-measure densities on an extinction face (CSV).
    Boundary(BoundaryArgs),
    /// Simulate one switched path (CSV; optional phase-plane SVG).
    Simulate(SimulateArgs),
    /// Monte Carlo extinction ensemble (JSON).
    Ensemble(EnsembleArgs),
    /// Occupation histogram of one simulated path (CSV).
    Occupation(OccupationArgs),
    /// Run the built-in golden checks against the standard fixtures.
    Validate,
}

#[derive(Args, Serialize, Clone)]
struct PairArg {
    /// JSON file: {"env0": {"a":..,"b":..,"c":..,"d":..,"alpha":..,"beta":..}, "env1": {...}}.
    #[arg(long)]
    pair: PathBuf,
}

impl PairArg {
    fn load(&self) -> Result<EnvironmentPair, CliError> {
        let text = fs::read_to_string(&self.pair)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", self.pair.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("bad pair file {}: {e}", self.pair.display())))
    }
}

#[derive(Args, Serialize, Clone)]
struct RateArgs {
    /// Mixing weight in (0, 1): lambda0 = s t, lambda1 = (1 - s) t.
    #[arg(long, requires = "t", conflicts_with_all = ["lambda0", "lambda1"])]
    s: Option<f64>,
    /// Total switching intensity (with --s).
    #[arg(long, requires = "s")]
    t: Option<f64>,
    /// Raw jump rate out of regime 0 (with --lambda1).
    #[arg(long, requires = "lambda1")]
    lambda0: Option<f64>,
    /// Raw jump rate out of regime 1 (with --lambda0).
    #[arg(long, requires = "lambda0")]
    lambda1: Option<f64>,
}

impl RateArgs {
    fn resolve(&self) -> Result<SwitchRates, CliError> {
        let rates = match (self.s, self.t, self.lambda0, self.lambda1) {
            (Some(s), Some(t), None, None) => SwitchRates::from_mixture(s, t),
            (None, None, Some(l0), Some(l1)) => SwitchRates::new(l0, l1),
            _ => {
                return Err(CliError::Input(
                    "specify rates as --s S --t T or --lambda0 L0 --lambda1 L1".into(),
                ))
            }
        };
        rates.map_err(|e| CliError::Input(e.to_string()))
    }
}

#[derive(Args, Serialize, Clone)]
struct OutArg {
    /// Output file; stdout when omitted. File outputs get a sidecar
    /// <name>.manifest.json (JSON outputs embed the manifest instead).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Clone)]
struct ClassifyArgs {
    #[command(flatten)]
    pair: PairArg,
    /// Also classify the averaged environment at this mixing weight.
    #[arg(long)]
    s: Option<f64>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize, Clone)]
struct IntervalsArgs {
    #[command(flatten)]
    pair: PairArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize, Clone)]
struct RatePointArgs {
    #[command(flatten)]
    pair: PairArg,
    #[command(flatten)]
    rates: RateArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize, Clone)]
struct SweepArgs {
    #[command(flatten)]
    pair: PairArg,
    #[arg(long, default_value_t = 0.1)]
    s_min: f64,
    #[arg(long, default_value_t = 0.9)]
    s_max: f64,
    #[arg(long, default_value_t = 9)]
    s_steps: usize,
    #[arg(long, default_value_t = 0.1)]
    t_min: f64,
    #[arg(long, default_value_t = 1000.0)]
    t_max: f64,
    /// Number of intensities, log-spaced between t-min and t-max.
    #[arg(long, default_value_t = 10)]
    t_steps: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize, Clone)]
struct ZerosetArgs {
    #[command(flatten)]
    pair: PairArg,
    /// Number of mixing-weight samples placed strictly inside I.
    #[arg(long, default_value_t = 21)]
    samples: usize,
    #[arg(long, default_value_t = 1e-3)]
    t_min: f64,
    #[arg(long, default_value_t = 1e6)]
    t_max: f64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize, Clone)]
struct BoundaryArgs {
    #[command(flatten)]
    pair: PairArg,
    #[command(flatten)]
    rates: RateArgs,
    /// Which species is extinct on the face: "x" or "y".
    #[arg(long, default_value = "y")]
    face: String,
    /// Number of interior evaluation points.
    #[arg(long, default_value_t = 256)]
    points: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize, Clone)]
struct SimulateArgs {
    #[command(flatten)]
    pair: PairArg,
    #[command(flatten)]
    rates: RateArgs,
    #[arg(long, default_value_t = 0.5)]
    x0: f64,
    #[arg(long, default_value_t = 0.5)]
    y0: f64,
    #[arg(long, default_value_t = 0)]
    regime0: usize,
    #[arg(long, default_value_t = 1000.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0.05)]
    record_dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write a phase-plane plot to this path.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize, Clone)]
struct EnsembleArgs {
    #[command(flatten)]
    pair: PairArg,
    #[command(flatten)]
    rates: RateArgs,
    #[arg(long, default_value_t = 0.5)]
    x0: f64,
    #[arg(long, default_value_t = 0.5)]
    y0: f64,
    #[arg(long, default_value_t = 0)]
    regime0: usize,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long, default_value_t = 2000.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Serialize, Clone)]
struct OccupationArgs {
    #[command(flatten)]
    sim: SimulateArgs,
    /// Bins per axis.
    #[arg(long, default_value_t = 60)]
    bins: usize,
}

/// Failure classes mapped to exit codes: input 2, numerical 3, validation 4.
enum CliError {
    Input(String),
    Numerical(String),
    Validation(usize),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Validation(_) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Input(m) => m.clone(),
            CliError::Numerical(m) => m.clone(),
            CliError::Validation(n) => format!("{n} golden check(s) failed"),
        }
    }
}

fn numerical<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numerical(e.to_string())
}

#[derive(Serialize)]
struct Manifest<T: Serialize> {
    command: String,
    version: String,
    seed: Option<u64>,
    config: T,
    duration_seconds: f64,
}

fn manifest<T: Serialize>(
    command: &str,
    seed: Option<u64>,
    config: T,
    started: Instant,
) -> Manifest<T> {
    Manifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        config,
        duration_seconds: started.elapsed().as_secs_f64(),
    }
}

/// Full-precision scientific notation (17 significant digits): lossless
/// round-trip for downstream regression use.
fn full(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_output(out: &OutArg, content: &str) -> Result<(), CliError> {
    match &out.out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| CliError::Input(e.to_string())),
    }
}

fn write_sidecar_manifest<T: Serialize>(out: &OutArg, m: &Manifest<T>) -> Result<(), CliError> {
    if let Some(path) = &out.out {
        let mut sidecar = path.clone().into_os_string();
        sidecar.push(".manifest.json");
        let text = serde_json::to_string_pretty(m).map_err(|e| CliError::Input(e.to_string()))?;
        fs::write(Path::new(&sidecar), text)
            .map_err(|e| CliError::Input(format!("cannot write manifest: {e}")))?;
    }
    Ok(())
}

fn write_json<V: Serialize>(out: &OutArg, value: &V) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    write_output(out, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    let started = Instant::now();
    match command {
        Command::Classify(args) => cmd_classify(args, started),
        Command::Intervals(args) => cmd_intervals(args, started),
        Command::Rates(args) => cmd_rates(args, started),
        Command::Sweep(args) => cmd_sweep(args, started),
        Command::Zeroset(args) => cmd_zeroset(args, started),
        Command::Boundary(args) => cmd_boundary(args, started),
        Command::Simulate(args) => cmd_simulate(args, started),
        Command::Ensemble(args) => cmd_ensemble(args, started),
        Command::Occupation(args) => cmd_occupation(args, started),
        Command::Validate => cmd_validate(),
    }
}

#[derive(Serialize)]
struct EnvReport {
    parameters: Environment,
    favorable_to_x: bool,
    regime: Option<lvswitch::envmodel::Regime>,
    degenerate: Option<String>,
}

fn env_report(env: &Environment) -> EnvReport {
    let (regime, degenerate) = match env.classify() {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    EnvReport {
        parameters: *env,
        favorable_to_x: env.favorable_to_x(),
        regime,
        degenerate,
    }
}

fn cmd_classify(args: ClassifyArgs, started: Instant) -> Result<(), CliError> {
    let pair = args.pair.load()?;
    #[derive(Serialize)]
    struct Report<C: Serialize> {
        env0: EnvReport,
        env1: EnvReport,
        both_favorable_to_x: bool,
        averaged_s: Option<f64>,
        averaged: Option<EnvReport>,
        manifest: Manifest<C>,
    }
    if let Some(s) = args.s {
        if !(0.0..=1.0).contains(&s) {
            return Err(CliError::Input("--s must lie in [0, 1]".into()));
        }
    }
    let report = Report {
        env0: env_report(&pair.env0),
        env1: env_report(&pair.env1),
        both_favorable_to_x: pair.both_favorable_to_x(),
        averaged_s: args.s,
        averaged: args.s.map(|s| env_report(&pair.average(s))),
        manifest: manifest("classify", None, args.clone(), started),
    };
    write_json(&args.out, &report)
}

fn cmd_intervals(args: IntervalsArgs, started: Instant) -> Result<(), CliError> {
    let pair = args.pair.load()?;
    let set = pair.intervals();
    #[derive(Serialize)]
    struct Report<C: Serialize> {
        i: lvswitch::envmodel::IntervalResult,
        j: lvswitch::envmodel::IntervalResult,
        jointly_favorable: Option<bool>,
        manifest: Manifest<C>,
    }
    let report = Report {
        i: set.i,
        j: set.j,
        jointly_favorable: pair.jointly_favorable().ok(),
        manifest: manifest("intervals", None, args.clone(), started),
    };
    write_json(&args.out, &report)
}

fn cmd_rates(args: RatePointArgs, started: Instant) -> Result<(), CliError> {
    let pair = args.pair.load()?;
    let rates = args.rates.resolve()?;
    let report = classify_outcome(&pair, &rates).map_err(numerical)?;
    #[derive(Serialize)]
    struct Report<C: Serialize> {
        lambda0: f64,
        lambda1: f64,
        s: f64,
        t: f64,
        #[serde(flatten)]
        invasion: lvswitch::invasion::InvasionReport,
        manifest: Manifest<C>,
    }
    let out = Report {
        lambda0: rates.lambda0(),
        lambda1: rates.lambda1(),
        s: rates.mixture(),
        t: rates.intensity(),
        invasion: report,
        manifest: manifest("rates", None, args.clone(), started),
    };
    write_json(&args.out, &out)
}

fn outcome_label(outcome: Option<Outcome>) -> &'static str {
    match outcome {
        Some(Outcome::ExtinctionY) => "ExtinctionY",
        Some(Outcome::ExtinctionX) => "ExtinctionX",
        Some(Outcome::ExtinctionEither) => "ExtinctionEither",
        Some(Outcome::Persistence) => "Persistence",
        Some(Outcome::Indeterminate) => "Indeterminate",
        None => "Error",
    }
}

fn cmd_sweep(args: SweepArgs, started: Instant) -> Result<(), CliError> {
    let pair = args.pair.load()?;
    if args.s_steps < 1 || args.t_steps < 1 {
        return Err(CliError::Input("grid steps must be at least 1".into()));
    }
    let s_grid: Vec<f64> = (0..args.s_steps)
        .map(|k| {
            if args.s_steps == 1 {
                args.s_min
            } else {
                args.s_min + (args.s_max - args.s_min) * k as f64 / (args.s_steps - 1) as f64
            }
        })
        .collect();
    let t_grid: Vec<f64> = (0..args.t_steps)
        .map(|k| {
            if args.t_steps == 1 {
                args.t_min
            } else {
                (args.t_min.ln()
                    + (args.t_max / args.t_min).ln() * k as f64 / (args.t_steps - 1) as f64)
                    .exp()
            }
        })
        .collect();
    let cells = sign_sweep(&pair, &s_grid, &t_grid);
    let mut csv = String::from("s,t,lambda_x,lambda_y,outcome\n");
    for cell in &cells {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            full(cell.s),
            full(cell.t),
            cell.lambda_x.map(full).unwrap_or_default(),
            cell.lambda_y.map(full).unwrap_or_default(),
            outcome_label(cell.outcome),
        ));
    }
    write_output(&args.out, &csv)?;
    write_sidecar_manifest(&args.out, &manifest("sweep", None, args.clone(), started))
}

fn cmd_zeroset(args: ZerosetArgs, started: Instant) -> Result<(), CliError> {
    let pair = args.pair.load()?;
    let interval = pair
        .interval_i()
        .interval
        .ok_or_else(|| CliError::Numerical("interval I is empty; no zero set".into()))?;
    let n = args.samples.max(1);
    let samples: Vec<f64> = (0..n)
        .map(|k| interval.lo + interval.width() * (k as f64 + 1.0) / (n as f64 + 1.0))
        .collect();
    let curve = trace_zero_set(&pair, &samples, (args.t_min, args.t_max)).map_err(numerical)?;
    let mut csv = String::from("s,t_of_s,resolved\n");
    for sample in &curve.samples {
        csv.push_str(&format!(
            "{},{},{}\n",
            full(sample.s),
            sample.t.map(full).unwrap_or_default(),
            sample.resolved,
        ));
    }
    write_output(&args.out, &csv)?;
    write_sidecar_manifest(&args.out, &manifest("zeroset", None, args.clone(), started))
}

fn cmd_boundary(args: BoundaryArgs, started: Instant) -> Result<(), CliError> {
    let pair = args.pair.load()?;
    let rates = args.rates.resolve()?;
    let face = match args.face.as_str() {
        "x" | "X" => Face::X,
        "y" | "Y" => Face::Y,
        other => return Err(CliError::Input(format!("unknown face {other:?}"))),
    };
    let mu = boundary_measure(&pair, &rates, face).map_err(numerical)?;
    let mut csv = String::from("x,h0,h1,marginal\n");
    match mu.kind() {
        MeasureKind::Dirac { p, nu1 } => {
            // Point mass: one row carrying the atom and the regime weights.
            csv.push_str(&format!(
                "{},{},{},{}\n",
                full(*p),
                full(1.0 - nu1),
                full(*nu1),
                full(1.0)
            ));
        }
        MeasureKind::Continuous(c) => {
            let (lo, hi) = c.support();
            let n = args.points.max(2);
            for k in 0..n {
                let x = lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
                let h0 = mu
                    .density(x, 0)
                    .map_err(numerical)?
                    .value()
                    .unwrap_or(f64::NAN);
                let h1 = mu
                    .density(x, 1)
                    .map_err(numerical)?
                    .value()
                    .unwrap_or(f64::NAN);
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    full(x),
                    full(h0),
                    full(h1),
                    full(h0 + h1)
                ));
            }
        }
    }
    write_output(&args.out, &csv)?;
    write_sidecar_manifest(&args.out, &manifest("boundary", None, args.clone(), started))
}

fn cmd_simulate(args: SimulateArgs, started: Instant) -> Result<(), CliError> {
    let pair = args.pair.load()?;
    let rates = args.rates.resolve()?;
    let cfg = SimConfig {
        record_dt: args.record_dt,
        ..SimConfig::default()
    };
    let traj = simulate(
        &pair,
        &rates,
        args.x0,
        args.y0,
        args.regime0,
        args.horizon,
        args.seed,
        &cfg,
    )
    .map_err(numerical)?;
    let mut csv = String::from("t,x,y,regime\n");
    for s in &traj.samples {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            full(s.t),
            full(s.x()),
            full(s.y()),
            s.regime
        ));
    }
    write_output(&args.out, &csv)?;
    if let Some(svg_path) = &args.svg {
        let points: Vec<(f64, f64)> = traj.samples.iter().map(|s| (s.x(), s.y())).collect();
        fs::write(svg_path, svg::phase_plane(&pair, &points))
            .map_err(|e| CliError::Input(format!("cannot write svg: {e}")))?;
    }
    #[derive(Serialize)]
    struct SimManifestExtra {
        args: SimulateArgs,
        sim_config: SimConfig,
        jump_count: usize,
        extinct_x: Option<f64>,
        extinct_y: Option<f64>,
    }
    let extra = SimManifestExtra {
        args: args.clone(),
        sim_config: cfg,
        jump_count: traj.jump_times.len(),
        extinct_x: traj.extinct_x,
        extinct_y: traj.extinct_y,
    };
    write_sidecar_manifest(
        &args.out,
        &manifest("simulate", Some(args.seed), extra, started),
    )
}

fn cmd_ensemble(args: EnsembleArgs, started: Instant) -> Result<(), CliError> {
    let pair = args.pair.load()?;
    let rates = args.rates.resolve()?;
    let cfg = SimConfig::default();
    let report = extinction_ensemble(
        &pair,
        &rates,
        args.x0,
        args.y0,
        args.regime0,
        args.reps,
        args.horizon,
        args.seed,
        &cfg,
    )
    .map_err(numerical)?;
    #[derive(Serialize)]
    struct Report<C: Serialize> {
        #[serde(flatten)]
        ensemble: lvswitch::pdmp::EnsembleReport,
        manifest: Manifest<C>,
    }
    let out = Report {
        ensemble: report,
        manifest: manifest("ensemble", Some(args.seed), args.clone(), started),
    };
    write_json(&args.out, &out)
}

fn cmd_occupation(args: OccupationArgs, started: Instant) -> Result<(), CliError> {
    let pair = args.sim.pair.load()?;
    let rates = args.sim.rates.resolve()?;
    let cfg = SimConfig {
        record_dt: args.sim.record_dt,
        ..SimConfig::default()
    };
    let traj = simulate(
        &pair,
        &rates,
        args.sim.x0,
        args.sim.y0,
        args.sim.regime0,
        args.sim.horizon,
        args.sim.seed,
        &cfg,
    )
    .map_err(numerical)?;
    let max = lvswitch::pdmp::default_grid_max(&pair);
    let hist =
        occupation_histogram(&traj, grid_edges(max, args.bins), grid_edges(max, args.bins));
    let mut csv = String::from("x_lo,x_hi,y_lo,y_hi,mass_regime0,mass_regime1\n");
    for iy in 0..hist.ny() {
        for ix in 0..hist.nx() {
            let m0 = hist.mass[0][iy * hist.nx() + ix];
            let m1 = hist.mass[1][iy * hist.nx() + ix];
            if m0 == 0.0 && m1 == 0.0 {
                continue;
            }
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                full(hist.x_edges[ix]),
                full(hist.x_edges[ix + 1]),
                full(hist.y_edges[iy]),
                full(hist.y_edges[iy + 1]),
                full(m0),
                full(m1)
            ));
        }
    }
    write_output(&args.sim.out, &csv)?;
    write_sidecar_manifest(
        &args.sim.out,
        &manifest("occupation", Some(args.sim.seed), args.clone(), started),
    )
}

fn env6(vals: [f64; 6]) -> Environment {
    Environment::new(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]).unwrap()
}

fn standard_pair(rho: f64) -> EnvironmentPair {
    EnvironmentPair::new(
        env6([1.0, 1.0, 2.0, 2.0, 1.0, 5.0]),
        env6([3.0, 3.0, 4.0, 4.0 + rho, 5.0, 1.0]),
    )
}

struct Checker {
    failed: usize,
    total: usize,
}

impl Checker {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.total += 1;
        if ok {
            println!("ok   {name}: {detail}");
        } else {
            self.failed += 1;
            println!("FAIL {name}: {detail}");
        }
    }

    fn close(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.check(
            name,
            (got - want).abs() <= tol,
            format!("got {got:.12}, want {want:.12} (tol {tol:.1e})"),
        );
    }
}

/// Golden checks: exact closed-form values of the standard two-environment
/// fixture family (`rho` in 0, 1, 3).
fn cmd_validate() -> Result<(), CliError> {
    let mut c = Checker {
        failed: 0,
        total: 0,
    };
    let map = |u: f64| u / (5.0 * (1.0 - u) + u);

    // Interval I is rho-independent: endpoints are the images of
    // 3/4 -+ 1/(2 sqrt 6).
    let half = 1.0 / (2.0 * 6.0f64.sqrt());
    for rho in [0.0, 1.0, 3.0] {
        let iv = standard_pair(rho).interval_i().interval;
        match iv {
            Some(iv) => {
                c.close(
                    &format!("interval I lo (rho={rho})"),
                    iv.lo,
                    map(0.75 - half),
                    1e-10,
                );
                c.close(
                    &format!("interval I hi (rho={rho})"),
                    iv.hi,
                    map(0.75 + half),
                    1e-10,
                );
            }
            None => c.check(&format!("interval I (rho={rho})"), false, "empty".into()),
        }
    }
    // J: equals I at rho 0, shifted roots at rho 1, empty at rho 3.
    let j0 = standard_pair(0.0).interval_j().interval;
    let i0 = standard_pair(0.0).interval_i().interval;
    c.check("interval J = I (rho=0)", j0 == i0, format!("J = {j0:?}"));
    match standard_pair(1.0).interval_j().interval {
        Some(iv) => {
            let root = |sign: f64| (71.0 + sign * 241.0f64.sqrt()) / 96.0;
            c.close("interval J lo (rho=1)", iv.lo, map(root(-1.0)), 1e-10);
            c.close("interval J hi (rho=1)", iv.hi, map(root(1.0)), 1e-10);
        }
        None => c.check("interval J (rho=1)", false, "empty".into()),
    }
    c.check(
        "interval J empty (rho=3)",
        standard_pair(3.0).interval_j().interval.is_none(),
        "discriminant -39".into(),
    );

    // Averaged environment at s = 0.75, rho = 3.
    let avg = standard_pair(3.0).average(0.75);
    for (name, got, want) in [
        ("a_s", avg.a(), 2.875),
        ("b_s", avg.b(), 2.875),
        ("c_s", avg.c(), 2.75),
        ("d_s", avg.d(), 3.875),
        ("alpha_s", avg.alpha(), 4.0),
        ("beta_s", avg.beta(), 2.0),
    ] {
        c.close(&format!("average {name} (rho=3, s=0.75)"), got, want, 1e-12);
    }

    // Boundary measure at unit rates: support, exponents, chain masses.
    let rates = SwitchRates::new(1.0, 1.0).unwrap();
    match boundary_measure(&standard_pair(3.0), &rates, Face::Y) {
        Ok(mu) => {
            let cm = mu.continuous().expect("continuous branch");
            c.close("boundary support lo", cm.support().0, 1.0 / 3.0, 1e-12);
            c.close("boundary support hi", cm.support().1, 1.0, 1e-12);
            c.close("boundary gamma0", cm.gamma0(), 1.0, 1e-12);
            c.close("boundary gamma1", cm.gamma1(), 0.2, 1e-12);
            c.close("boundary mass regime 0", cm.mass(0), 0.5, 1e-9);
            c.close("boundary mass regime 1", cm.mass(1), 0.5, 1e-9);
        }
        Err(e) => c.check("boundary measure", false, e.to_string()),
    }

    // Point-mass branch invasion rate: equal capacities give the plain
    // average (-5 - 3)/2.
    let dirac_pair = EnvironmentPair::new(
        env6([1.0, 1.0, 2.0, 2.0, 1.0, 5.0]),
        env6([1.0, 3.0, 4.0, 7.0, 5.0, 1.0]),
    );
    match invasion_rate_y(&dirac_pair, &rates) {
        Ok(r) => c.close("point-mass invasion rate", r.value, -4.0, 1e-12),
        Err(e) => c.check("point-mass invasion rate", false, e.to_string()),
    }

    // Route cross-check at unit rates.
    match invasion_rate_y(&standard_pair(3.0), &rates) {
        Ok(r) => c.check(
            "invasion-rate route agreement",
            r.cross_check_diff <= 1e-7,
            format!("rel diff {:.2e}", r.cross_check_diff),
        ),
        Err(e) => c.check("invasion-rate route agreement", false, e.to_string()),
    }

    // Frequency limits at s = 0.75.
    let (low, high) = frequency_limits(&standard_pair(3.0), 0.75, Species::Y);
    c.close("slow-switching limit (y)", low, -1.5, 1e-12);
    c.close("fast-switching limit (y)", high, 0.25 / 2.875, 1e-12);

    // Outcomes at the standard simulation operating points, stated in the
    // scan variable w; the mixing weight is s = w / (5(1-w) + w).
    let operating_points = [
        (3.0, 0.4, 100.0, Outcome::ExtinctionY),
        (3.0, 0.75, 12.0, Outcome::Persistence),
        (1.0, 0.75, 10.0, Outcome::Persistence),
        (1.0, 0.75, 100.0, Outcome::ExtinctionX),
        (0.0, 0.75, 1.0 / 0.15, Outcome::ExtinctionEither),
    ];
    for (rho, w, t, want) in operating_points {
        let s = map(w);
        match SwitchRates::from_mixture(s, t)
            .map_err(|e| e.to_string())
            .and_then(|r| classify_outcome(&standard_pair(rho), &r).map_err(|e| e.to_string()))
        {
            Ok(report) => c.check(
                &format!("outcome (rho={rho}, w={w}, t={t:.3})"),
                report.outcome == want,
                format!(
                    "{} (lambda_x {:+.4}, lambda_y {:+.4})",
                    outcome_label(Some(report.outcome)),
                    report.lambda_x,
                    report.lambda_y
                ),
            ),
            Err(e) => c.check(&format!("outcome (rho={rho}, w={w}, t={t})"), false, e),
        }
    }

    // The sign pair (+, -) holds for every favorable pair at slow switching.
    match classify_outcome(
        &standard_pair(1.0),
        &SwitchRates::from_mixture(0.5, 1e-3).unwrap(),
    ) {
        Ok(report) => c.check(
            "slow switching keeps exclusion",
            report.sign_x == Sign::Positive && report.sign_y == Sign::Negative,
            format!("signs ({:?}, {:?})", report.sign_x, report.sign_y),
        ),
        Err(e) => c.check("slow switching keeps exclusion", false, e.to_string()),
    }

    println!("{} checks, {} failed", c.total, c.failed);
    if c.failed > 0 {
        Err(CliError::Validation(c.failed))
    } else {
        Ok(())
    }
}
