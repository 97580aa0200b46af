//! Command-line front end: coefficient reports, capability sweeps with
//! deterministic CSV output, crossover location, and self-verification.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical error,
//! 4 verification failure.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use covertsig_core::{
    c_diffuse_sensing, c_thermal_active, comm_crossover, comm_sweep, cp_direct, cp_meixner,
    optimal_two_point, run_verification, sense_sweep, sensing_crossover, CoefficientParams,
    CommScenario, Error as CoreError, MeanConstraint, SensingScenario, SweepScale, SweepSpec,
    TargetHypothesis, VerifyLevel,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(
    name = "covertsig",
    version,
    about = "Sparse covert-signaling numerics for lossy thermal-noise bosonic channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report detectability coefficients and the optimal two-point state.
    Coeff(CoeffArgs),
    /// Communication capability curves as CSV.
    CommSweep(CommSweepArgs),
    /// Sensing capability curves as CSV.
    SenseSweep(SenseSweepArgs),
    /// Locate the first brightness where the two-point scheme overtakes the
    /// Gaussian benchmark.
    Crossover(CrossoverArgs),
    /// Run the built-in cross-validation suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Comm,
    Sense,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Unit {
    Nats,
    Bits,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Level {
    Quick,
    Full,
}

#[derive(Args)]
struct ScenarioFlags {
    /// Plain key=value parameter file; command-line flags override it.
    #[arg(long, global = false)]
    config: Option<PathBuf>,
    /// Transmissivity to the intended receiver (communication mode).
    #[arg(long)]
    eta: Option<f64>,
    /// Environment thermal mean photon number (communication mode).
    #[arg(long = "n-bar-b")]
    n_bar_b: Option<f64>,
    /// Transmissivity of the sensing return path.
    #[arg(long = "tau-a")]
    tau_a: Option<f64>,
    /// Transmissivity of the adversary's sensing path.
    #[arg(long = "tau-w")]
    tau_w: Option<f64>,
    /// Target-present reflectivity toward the adversary.
    #[arg(long)]
    gamma1: Option<f64>,
    /// Thermal mean on the sensing return path.
    #[arg(long = "n-bar-a")]
    n_bar_a: Option<f64>,
    /// Thermal mean on the adversary's sensing path.
    #[arg(long = "n-bar-w")]
    n_bar_w: Option<f64>,
    /// Covertness budget.
    #[arg(long)]
    delta: Option<f64>,
    /// Photon-number truncation budget.
    #[arg(long = "eps-tail")]
    eps_tail: Option<f64>,
}

#[derive(Args)]
struct SweepFlags {
    #[arg(long = "n-s-min")]
    n_s_min: Option<f64>,
    #[arg(long = "n-s-max")]
    n_s_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum)]
    scale: Option<Scale>,
    /// Unit for capability and exponent columns.
    #[arg(long, value_enum)]
    unit: Option<Unit>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CoeffArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Active-state mean photon number.
    #[arg(long = "n-s")]
    n_s: Option<f64>,
    #[command(flatten)]
    scenario: ScenarioFlags,
}

#[derive(Args)]
struct CommSweepArgs {
    #[command(flatten)]
    scenario: ScenarioFlags,
    #[command(flatten)]
    sweep: SweepFlags,
}

#[derive(Args)]
struct SenseSweepArgs {
    #[command(flatten)]
    scenario: ScenarioFlags,
    #[command(flatten)]
    sweep: SweepFlags,
}

#[derive(Args)]
struct CrossoverArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[command(flatten)]
    scenario: ScenarioFlags,
    #[command(flatten)]
    sweep: SweepFlags,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "quick")]
    level: Level,
}

/// Failure with the exit code it maps to.
struct Failure {
    message: String,
    code: u8,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            message: message.into(),
            code: EXIT_CONFIG,
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure {
            code: if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERICAL
            },
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Coeff(args) => cmd_coeff(args),
        Command::CommSweep(args) => cmd_comm_sweep(args),
        Command::SenseSweep(args) => cmd_sense_sweep(args),
        Command::Crossover(args) => cmd_crossover(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

const KNOWN_KEYS: &[&str] = &[
    "mode", "eta", "n-bar-b", "tau-a", "tau-w", "gamma1", "n-bar-a", "n-bar-w", "delta",
    "eps-tail", "n-s", "n-s-min", "n-s-max", "points", "scale", "unit", "level", "output",
];

/// Parsed key=value parameter file.
struct FileConfig(HashMap<String, String>);

impl FileConfig {
    fn load(path: Option<&PathBuf>) -> Result<Self, Failure> {
        let mut map = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| {
                Failure::config(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(Failure::config(format!(
                        "config line {} is not key=value: {line:?}",
                        lineno + 1
                    )));
                };
                let key = key.trim().to_string();
                if !KNOWN_KEYS.contains(&key.as_str()) {
                    return Err(Failure::config(format!("unknown config key {key:?}")));
                }
                map.insert(key, value.trim().to_string());
            }
        }
        Ok(FileConfig(map))
    }

    fn f64(&self, key: &str, flag: Option<f64>) -> Result<Option<f64>, Failure> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Failure::config(format!("config key {key} = {raw:?} is not a number"))),
        }
    }

    fn required_f64(&self, key: &str, flag: Option<f64>) -> Result<f64, Failure> {
        self.f64(key, flag)?
            .ok_or_else(|| Failure::config(format!("missing required parameter --{key}")))
    }

    fn f64_or(&self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, Failure> {
        Ok(self.f64(key, flag)?.unwrap_or(default))
    }

    fn usize_or(&self, key: &str, flag: Option<usize>, default: usize) -> Result<usize, Failure> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.0.get(key) {
            None => Ok(default),
            Some(raw) => raw.parse::<usize>().map_err(|_| {
                Failure::config(format!("config key {key} = {raw:?} is not an integer"))
            }),
        }
    }

    fn choice<T: Copy>(
        &self,
        key: &str,
        flag: Option<T>,
        default: T,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<T, Failure> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.0.get(key) {
            None => Ok(default),
            Some(raw) => parse(raw)
                .ok_or_else(|| Failure::config(format!("config key {key} has invalid value {raw:?}"))),
        }
    }
}

struct ResolvedSweep {
    grid: SweepSpec,
    n_s_min: f64,
    n_s_max: f64,
    points: usize,
    scale: Scale,
    unit: Unit,
    output: Option<PathBuf>,
}

fn resolve_sweep(flags: &SweepFlags, file: &FileConfig) -> Result<ResolvedSweep, Failure> {
    let n_s_min = file.f64_or("n-s-min", flags.n_s_min, 0.01)?;
    let n_s_max = file.f64_or("n-s-max", flags.n_s_max, 1.0)?;
    let points = file.usize_or("points", flags.points, 200)?;
    let scale = file.choice("scale", flags.scale, Scale::Linear, |s| match s {
        "linear" => Some(Scale::Linear),
        "log" => Some(Scale::Log),
        _ => None,
    })?;
    let unit = file.choice("unit", flags.unit, Unit::Nats, |s| match s {
        "nats" => Some(Unit::Nats),
        "bits" => Some(Unit::Bits),
        _ => None,
    })?;
    let grid = SweepSpec::new(
        n_s_min,
        n_s_max,
        points,
        match scale {
            Scale::Linear => SweepScale::Linear,
            Scale::Log => SweepScale::Log,
        },
    )?;
    Ok(ResolvedSweep {
        grid,
        n_s_min,
        n_s_max,
        points,
        scale,
        unit,
        output: flags.output.clone(),
    })
}

struct CommParams {
    scenario: CommScenario,
    eta: f64,
    n_bar_b: f64,
    delta: f64,
    eps_tail: f64,
}

fn resolve_comm(flags: &ScenarioFlags, file: &FileConfig) -> Result<CommParams, Failure> {
    let eta = file.required_f64("eta", flags.eta)?;
    let n_bar_b = file.required_f64("n-bar-b", flags.n_bar_b)?;
    let delta = file.f64_or("delta", flags.delta, 0.05)?;
    let eps_tail = file.f64_or("eps-tail", flags.eps_tail, 1e-14)?;
    let scenario = CommScenario::new(eta, n_bar_b, delta)?.with_eps_tail(eps_tail)?;
    Ok(CommParams {
        scenario,
        eta,
        n_bar_b,
        delta,
        eps_tail,
    })
}

struct SenseParams {
    scenario: SensingScenario,
    tau_a: f64,
    tau_w: f64,
    gamma1: f64,
    n_bar_a: f64,
    n_bar_w: f64,
    delta: f64,
    eps_tail: f64,
}

fn resolve_sense(flags: &ScenarioFlags, file: &FileConfig) -> Result<SenseParams, Failure> {
    let tau_a = file.required_f64("tau-a", flags.tau_a)?;
    let tau_w = file.required_f64("tau-w", flags.tau_w)?;
    let gamma1 = file.required_f64("gamma1", flags.gamma1)?;
    let n_bar_a = file.required_f64("n-bar-a", flags.n_bar_a)?;
    let n_bar_w = file.required_f64("n-bar-w", flags.n_bar_w)?;
    let delta = file.f64_or("delta", flags.delta, 0.05)?;
    let eps_tail = file.f64_or("eps-tail", flags.eps_tail, 1e-14)?;
    let scenario = SensingScenario::new(tau_a, tau_w, gamma1, n_bar_a, n_bar_w, delta)?
        .with_eps_tail(eps_tail)?;
    Ok(SenseParams {
        scenario,
        tau_a,
        tau_w,
        gamma1,
        n_bar_a,
        n_bar_w,
        delta,
        eps_tail,
    })
}

/// 15 significant digits, '.' decimal, no separators.
fn cell(x: f64) -> String {
    format!("{x:.14e}")
}

fn unit_factor(unit: Unit) -> f64 {
    match unit {
        Unit::Nats => 1.0,
        Unit::Bits => std::f64::consts::LN_2,
    }
}

fn unit_name(unit: Unit) -> &'static str {
    match unit {
        Unit::Nats => "nats",
        Unit::Bits => "bits",
    }
}

fn scale_name(scale: Scale) -> &'static str {
    match scale {
        Scale::Linear => "linear",
        Scale::Log => "log",
    }
}

fn emit(output: Option<&PathBuf>, body: &str) -> Result<(), Failure> {
    match output {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(path) => {
            let mut file = fs::File::create(path).map_err(|e| {
                Failure::config(format!("cannot write {}: {e}", path.display()))
            })?;
            file.write_all(body.as_bytes())
                .map_err(|e| Failure::config(format!("write failed: {e}")))?;
            Ok(())
        }
    }
}

fn cmd_coeff(args: CoeffArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.scenario.config.as_ref())?;
    let n_s = file.required_f64("n-s", args.n_s)?;
    let constraint = MeanConstraint::new(n_s)?;
    let active = optimal_two_point(constraint);
    let k = constraint.kappa_floor();

    let mut out = String::new();
    match args.mode {
        Mode::Comm => {
            let p = resolve_comm(&args.scenario, &file)?;
            writeln!(
                out,
                "# covertsig {} coeff mode=comm eta={} n-bar-b={} n-s={} delta={} eps-tail={:e}",
                env!("CARGO_PKG_VERSION"),
                p.eta,
                p.n_bar_b,
                n_s,
                p.delta,
                p.eps_tail
            )
            .unwrap();
            let port = p.scenario.willie_port();
            let direct = cp_direct(port, &active)?;
            let ortho = cp_meixner(CoefficientParams::from_port(port)?, &active)?;
            writeln!(out, "two_point_fock_lo={k}").unwrap();
            writeln!(out, "two_point_fock_hi={}", k + 1).unwrap();
            writeln!(out, "two_point_rho_lo={}", cell(1.0 - constraint.beta())).unwrap();
            writeln!(out, "two_point_rho_hi={}", cell(constraint.beta())).unwrap();
            writeln!(out, "c_p_direct={}", cell(direct)).unwrap();
            writeln!(out, "c_p_meixner={}", cell(ortho)).unwrap();
            match c_thermal_active(port, n_s) {
                Ok(c_g) => writeln!(out, "c_g={}", cell(c_g)).unwrap(),
                Err(CoreError::Divergence(_)) => writeln!(out, "c_g=inf").unwrap(),
                Err(e) => return Err(e.into()),
            }
        }
        Mode::Sense => {
            let p = resolve_sense(&args.scenario, &file)?;
            writeln!(
                out,
                "# covertsig {} coeff mode=sense tau-a={} tau-w={} gamma1={} n-bar-a={} n-bar-w={} n-s={} delta={} eps-tail={:e}",
                env!("CARGO_PKG_VERSION"),
                p.tau_a,
                p.tau_w,
                p.gamma1,
                p.n_bar_a,
                p.n_bar_w,
                n_s,
                p.delta,
                p.eps_tail
            )
            .unwrap();
            let port = p.scenario.willie_port(TargetHypothesis::Absent);
            let direct = cp_direct(port, &active)?;
            let ortho = cp_meixner(CoefficientParams::from_port(port)?, &active)?;
            let diffuse = c_diffuse_sensing(p.tau_w, p.n_bar_w)?;
            writeln!(out, "two_point_fock_lo={k}").unwrap();
            writeln!(out, "two_point_fock_hi={}", k + 1).unwrap();
            writeln!(out, "two_point_rho_lo={}", cell(1.0 - constraint.beta())).unwrap();
            writeln!(out, "two_point_rho_hi={}", cell(constraint.beta())).unwrap();
            writeln!(out, "c_p_se_direct={}", cell(direct)).unwrap();
            writeln!(out, "c_p_se_meixner={}", cell(ortho)).unwrap();
            writeln!(out, "c_p_se_printed={}", cell(diffuse * n_s * n_s)).unwrap();
            writeln!(out, "c_diffuse={}", cell(diffuse)).unwrap();
            match c_thermal_active(port, n_s) {
                Ok(c) => writeln!(out, "c_tmsv={}", cell(c)).unwrap(),
                Err(CoreError::Divergence(_)) => writeln!(out, "c_tmsv=inf").unwrap(),
                Err(e) => return Err(e.into()),
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn cmd_comm_sweep(args: CommSweepArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.scenario.config.as_ref())?;
    let p = resolve_comm(&args.scenario, &file)?;
    let sweep = resolve_sweep(&args.sweep, &file)?;
    let rows = comm_sweep(&p.scenario, &sweep.grid)?;
    let f = unit_factor(sweep.unit);

    let mut body = String::new();
    writeln!(
        body,
        "# covertsig {} comm-sweep eta={} n-bar-b={} delta={} eps-tail={:e} unit={} n-s-min={} n-s-max={} points={} scale={}",
        env!("CARGO_PKG_VERSION"),
        p.eta,
        p.n_bar_b,
        p.delta,
        p.eps_tail,
        unit_name(sweep.unit),
        sweep.n_s_min,
        sweep.n_s_max,
        sweep.points,
        scale_name(sweep.scale)
    )
    .unwrap();
    writeln!(
        body,
        "n_s,capability_fock,capability_gaussian,c_p,c_g,crossover"
    )
    .unwrap();
    for r in &rows {
        writeln!(
            body,
            "{},{},{},{},{},{}",
            cell(r.n_s),
            cell(r.capability_fock / f),
            cell(r.capability_gaussian / f),
            cell(r.c_p),
            cell(r.c_g),
            u8::from(r.crossover)
        )
        .unwrap();
    }
    emit(sweep.output.as_ref(), &body)
}

fn cmd_sense_sweep(args: SenseSweepArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.scenario.config.as_ref())?;
    let p = resolve_sense(&args.scenario, &file)?;
    let sweep = resolve_sweep(&args.sweep, &file)?;
    let rows = sense_sweep(&p.scenario, &sweep.grid)?;
    let f = unit_factor(sweep.unit);

    let mut body = String::new();
    writeln!(
        body,
        "# covertsig {} sense-sweep tau-a={} tau-w={} gamma1={} n-bar-a={} n-bar-w={} delta={} eps-tail={:e} unit={} n-s-min={} n-s-max={} points={} scale={}",
        env!("CARGO_PKG_VERSION"),
        p.tau_a,
        p.tau_w,
        p.gamma1,
        p.n_bar_a,
        p.n_bar_w,
        p.delta,
        p.eps_tail,
        unit_name(sweep.unit),
        sweep.n_s_min,
        sweep.n_s_max,
        sweep.points,
        scale_name(sweep.scale)
    )
    .unwrap();
    writeln!(
        body,
        "n_s,capability_fock_sensing,capability_tmsv,phi_fock,phi_tmsv,s_star_fock,s_star_tmsv"
    )
    .unwrap();
    for r in &rows {
        writeln!(
            body,
            "{},{},{},{},{},{},{}",
            cell(r.n_s),
            cell(r.capability_fock / f),
            cell(r.capability_tmsv / f),
            cell(r.phi_fock / f),
            cell(r.phi_tmsv / f),
            cell(r.s_star_fock),
            cell(r.s_star_tmsv)
        )
        .unwrap();
    }
    emit(sweep.output.as_ref(), &body)
}

fn cmd_crossover(args: CrossoverArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.scenario.config.as_ref())?;
    let sweep = resolve_sweep(&args.sweep, &file)?;
    let found = match args.mode {
        Mode::Comm => {
            let p = resolve_comm(&args.scenario, &file)?;
            comm_crossover(&p.scenario, &sweep.grid)?
        }
        Mode::Sense => {
            let p = resolve_sense(&args.scenario, &file)?;
            sensing_crossover(&p.scenario, &sweep.grid)?
        }
    };
    match found {
        Some(n_s) => println!("crossover_n_s={}", cell(n_s)),
        None => println!("crossover=none"),
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let level = match args.level {
        Level::Quick => VerifyLevel::Quick,
        Level::Full => VerifyLevel::Full,
    };
    let reports = run_verification(level)?;
    let mut failed = 0usize;
    for r in &reports {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status} {} {}", r.name, r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    println!(
        "verify: {}/{} suites passed (level={})",
        reports.len() - failed,
        reports.len(),
        match level {
            VerifyLevel::Quick => "quick",
            VerifyLevel::Full => "full",
        }
    );
    if failed > 0 {
        return Err(Failure {
            message: format!("{failed} verification suites failed"),
            code: EXIT_VERIFY,
        });
    }
    Ok(())
}
