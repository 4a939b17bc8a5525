use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nlsgap::radialode::{integrate, launch_at_origin};
use nlsgap::{
    compute_ground_state_with, verify, EffectivePotential, Error, GapReport, GroundStateProfile, Operator,
    OperatorSelection, RunConfig,
};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "nlsgap",
    version,
    about = "Ground state and spectral-gap certificates for the 3D cubic NLS linearization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration; every field is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (profile JSON, report JSON or CSV depending on the command).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the ground state and write the profile JSON.
    Groundstate {
        #[command(flatten)]
        common: Common,
        /// Bisection width on the central height.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the gap certificates and write the report JSON.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        operator: Option<String>,
        /// Comma-separated λ values in (0, 1]; must contain 1.
        #[arg(long, value_delimiter = ',')]
        lambda_grid: Option<Vec<f64>>,
        #[arg(long)]
        t0_grid_step: Option<f64>,
        /// Integrator tolerance for channel solves.
        #[arg(long)]
        tol: Option<f64>,
        /// Load the profile from this file instead of computing it.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Force the named certificate to fail (test hook).
        #[arg(long)]
        inject_failure: Option<String>,
    },
    /// Write CSV: `profile`, `margins`, or `trajectory:<op>/<l>/<lambda>/<shift>`.
    Export {
        what: String,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Report JSON read by `margins`; defaults to the configured report path.
        #[arg(long)]
        report: Option<PathBuf>,
        /// End of the exported trajectory.
        #[arg(long, default_value_t = 30.0)]
        t_end: f64,
    },
}

/// Error carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::Config(_) | Error::Io(_) | Error::Json(_) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Failure> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn obtain_profile(cfg: &RunConfig, path: Option<&Path>) -> Result<GroundStateProfile, Failure> {
    match path {
        Some(p) if !p.exists() => Err(usage(format!("profile {} not found", p.display()))),
        Some(p) => Ok(GroundStateProfile::load(p)?),
        None => Ok(compute_ground_state_with(&cfg.groundstate, cfg.bisection_tol)?),
    }
}

fn cmd_groundstate(common: Common, tol: Option<f64>) -> Result<u8, Failure> {
    let mut cfg = load_config(common.config.as_deref())?;
    if let Some(t) = tol {
        cfg.bisection_tol = t;
    }
    cfg.validate()?;
    let out = common.out.unwrap_or_else(|| cfg.output.profile.clone());
    let profile = compute_ground_state_with(&cfg.groundstate, cfg.bisection_tol)?;
    write_file(&out, profile.to_json()?.as_bytes())?;
    println!(
        "shoot_param={:.12} tail_coeff={:.10} resolution_error={:.3e}",
        profile.shoot_param, profile.tail_coeff, profile.resolution_error
    );
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    common: Common,
    operator: Option<String>,
    lambda_grid: Option<Vec<f64>>,
    t0_grid_step: Option<f64>,
    tol: Option<f64>,
    profile: Option<PathBuf>,
    inject_failure: Option<String>,
) -> Result<u8, Failure> {
    let mut cfg = load_config(common.config.as_deref())?;
    if let Some(op) = operator {
        cfg.operator = op.parse::<OperatorSelection>()?;
    }
    if let Some(grid) = lambda_grid {
        cfg.verify.lambda_grid = grid;
    }
    if let Some(h) = t0_grid_step {
        cfg.verify.t0_grid_step = h;
    }
    if let Some(t) = tol {
        cfg.verify.tol = t;
    }
    if inject_failure.is_some() {
        cfg.verify.inject_failure = inject_failure;
    }
    cfg.validate()?;
    let out = common.out.unwrap_or_else(|| cfg.output.report.clone());
    let profile = obtain_profile(&cfg, profile.as_deref())?;
    let report = verify(&profile, cfg.operator, &cfg.verify)?;
    write_file(&out, report.to_json()?.as_bytes())?;
    print!("{}", report.margin_table());
    for c in report.failed() {
        eprintln!("failed certificate: {}", c.id);
    }
    Ok(if report.certified() { 0 } else { EXIT_FAILED })
}

/// `<op>/<l>/<lambda>/<shift>`, e.g. `lplus/1/1.0/0`.
fn parse_trajectory_spec(spec: &str) -> Result<(Operator, u32, f64, f64), Failure> {
    let bad = || usage(format!("bad trajectory spec '{spec}', expected <op>/<l>/<lambda>/<shift>"));
    let parts: Vec<&str> = spec.split('/').collect();
    if parts.len() != 4 {
        return Err(bad());
    }
    let op = parts[0].parse::<Operator>().map_err(|_| bad())?;
    let l = parts[1].parse::<u32>().map_err(|_| bad())?;
    let lambda = parts[2].parse::<f64>().map_err(|_| bad())?;
    let shift = parts[3].parse::<f64>().map_err(|_| bad())?;
    Ok((op, l, lambda, shift))
}

fn export_trajectory(
    profile: &GroundStateProfile,
    spec: &str,
    cfg: &RunConfig,
    t_end: f64,
    w: impl Write,
) -> Result<(), Failure> {
    let (op, l, lambda, shift) = parse_trajectory_spec(spec)?;
    let v = EffectivePotential::new(profile, op, l, lambda)?.shifted(shift)?;
    // l = 0 uses the downward launch of the baseline solves.
    let init = if shift > 0.0 {
        (0.0, [0.0, 1.0])
    } else {
        let sigma = if l == 0 { -1.0 } else { 1.0 };
        launch_at_origin(&v, cfg.verify.l1_t_start, sigma)?
    };
    let traj = integrate(&v, init, t_end, cfg.verify.tol)?;
    traj.write_csv(w)?;
    Ok(())
}

fn export_margins(report_path: &Path, w: impl Write) -> Result<(), Failure> {
    if !report_path.exists() {
        return Err(usage(format!("report {} not found; run `verify` first", report_path.display())));
    }
    let text = fs::read_to_string(report_path).map_err(Error::from)?;
    let report: GapReport = serde_json::from_str(&text).map_err(Error::from)?;
    let mut csv = csv::Writer::from_writer(w);
    let io = |e: csv::Error| usage(format!("csv: {e}"));
    csv.write_record(["id", "pass", "margin", "anchor"]).map_err(io)?;
    for c in &report.certificates {
        csv.write_record([c.id.as_str(), if c.pass { "true" } else { "false" }, &c.margin.to_string(), &c.anchor])
            .map_err(io)?;
    }
    csv.flush().map_err(|e| usage(format!("csv: {e}")))?;
    Ok(())
}

fn cmd_export(
    what: &str,
    common: Common,
    profile: Option<PathBuf>,
    report: Option<PathBuf>,
    t_end: f64,
) -> Result<u8, Failure> {
    let cfg = load_config(common.config.as_deref())?;
    let mut buf = Vec::new();
    match what {
        "profile" => obtain_profile(&cfg, profile.as_deref())?.write_csv(&mut buf)?,
        "margins" => export_margins(report.as_deref().unwrap_or(&cfg.output.report), &mut buf)?,
        s => match s.strip_prefix("trajectory:") {
            Some(spec) => {
                // Reject a malformed spec before paying for the profile.
                parse_trajectory_spec(spec)?;
                export_trajectory(&obtain_profile(&cfg, profile.as_deref())?, spec, &cfg, t_end, &mut buf)?
            }
            None => return Err(usage(format!("unknown export '{s}'"))),
        },
    }
    match common.out {
        Some(p) => write_file(&p, &buf)?,
        None => std::io::stdout().write_all(&buf).map_err(Error::from)?,
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Groundstate { common, tol } => cmd_groundstate(common, tol),
        Command::Verify { common, operator, lambda_grid, t0_grid_step, tol, profile, inject_failure } => {
            cmd_verify(common, operator, lambda_grid, t0_grid_step, tol, profile, inject_failure)
        }
        Command::Export { what, common, profile, report, t_end } => cmd_export(&what, common, profile, report, t_end),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
