//! Command-line front end: curves, closed forms, simulations and the
//! end-to-end verification suite.
//!
//! Every command writes its effective configuration as `#` comment lines
//! (CSV) or as a `config` object (JSON) so a result can be reproduced from
//! its own output. Exit codes: 0 success, 1 invariant or verification
//! failure, 2 usage or I/O error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod verify;

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use action_rate::binary::{bstar, BinaryExample};
use action_rate::model::{AuxDocument, ProblemSpec};
use action_rate::sim::{run_campaign, SimConfig, SimMode, DEFAULT_CEILING, DEFAULT_EPSILON};
use action_rate::solver::{evaluate_lossy_bounds, trace_curve, Mode, PointStatus, RateCostPoint, SolveConfig};
use action_rate::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use verify::{run_verify, Check, VerifyLevel, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "action-rate",
    version,
    about = "Rate-cost curves, bounds and coding simulations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a curve over budgets and print CSV.
    Curve(CurveArgs),
    /// Closed-form curves of the binary example as CSV.
    ClosedForm(ClosedFormArgs),
    /// Monte Carlo campaign(s); prints the report JSON.
    Simulate(SimulateArgs),
    /// Run the verification suite (`quick` or `full`).
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CurveMode {
    Noncausal,
    Causal,
    LossyCausal,
    Bounds,
}

#[derive(Debug, Args)]
pub struct SolverFlags {
    /// Grid resolution per simplex coordinate.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Refinement rounds (each divides the step by 4).
    #[arg(long)]
    pub refine: Option<usize>,
    #[arg(long)]
    pub vmax: Option<usize>,
    #[arg(long)]
    pub umax: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

impl SolverFlags {
    fn config(&self, spec: &ProblemSpec) -> SolveConfig {
        let mut cfg = SolveConfig::for_spec(spec);
        if let Some(g) = self.grid {
            cfg.grid_steps = g;
        }
        if let Some(r) = self.refine {
            cfg.refine_rounds = r;
        }
        if self.vmax.is_some() {
            cfg.v_size_max = self.vmax;
        }
        if self.umax.is_some() {
            cfg.u_size_max = self.umax;
        }
        if let Some(t) = self.tol {
            cfg.tolerance = t;
        }
        cfg
    }
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, value_enum)]
    pub mode: CurveMode,
    /// Comma list (`0,0.1,0.2`) or range `lo:hi:step`.
    #[arg(long)]
    pub budgets: String,
    /// Required by `lossy-causal` and `bounds`.
    #[arg(long)]
    pub distortion: Option<f64>,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Noncausal,
    Causal,
    Both,
}

#[derive(Debug, Args)]
pub struct ClosedFormArgs {
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    /// Erasure probability of the side information; omit for none.
    #[arg(long)]
    pub pe: Option<f64>,
    #[arg(long, default_value = "0:0.5:0.05")]
    pub budgets: String,
    #[arg(long, value_enum, default_value_t = Variant::Both)]
    pub variant: Variant,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub aux: PathBuf,
    /// thm1-binning, thm2-causal or cor1-covering.
    #[arg(long)]
    pub mode: String,
    #[arg(long)]
    pub n: usize,
    /// One rate or a comma list / range; one report per rate.
    #[arg(long)]
    pub rate: String,
    /// Codebook rate of `V`; defaults to `I(V;S) + ε`.
    #[arg(long)]
    pub codebook_rate: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 500)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_CEILING)]
    pub ceiling: u64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// `quick` or `full`.
    pub level: String,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub refine: Option<usize>,
    /// Solver-vs-closed-form tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NumericalIntegrity { .. } => EXIT_FAILURE,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::usage(e)
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Curve(a) => cmd_curve(&a, out).map(|_| EXIT_OK),
        Command::ClosedForm(a) => cmd_closed_form(&a, out).map(|_| EXIT_OK),
        Command::Simulate(a) => cmd_simulate(&a, out).map(|_| EXIT_OK),
        Command::Verify(a) => {
            let level: VerifyLevel = a.level.parse().map_err(Failure::usage)?;
            let opts = VerifyOptions {
                grid: a.grid,
                refine: a.refine,
                tol: a.tol,
            };
            let checks = run_verify(level, &opts, out)?;
            Ok(if checks.iter().all(|c| c.passed) {
                EXIT_OK
            } else {
                EXIT_FAILURE
            })
        }
    }
}

/// `0,0.1,0.2` or `lo:hi:step` (inclusive of `hi` up to rounding).
pub fn parse_budgets(text: &str) -> Result<Vec<f64>, Failure> {
    let num = |s: &str| -> Result<f64, Failure> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Failure::usage(format!("`{s}` is not a number")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [lo, hi, step] => {
            let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
            if !(step > 0.0) || hi < lo {
                return Err(Failure::usage("range needs lo <= hi and step > 0"));
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize;
            (0..=count)
                .map(|k| ((lo + k as f64 * step) * 1e12).round() / 1e12)
                .collect()
        }
        [_] => text.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(Failure::usage("budgets are a comma list or lo:hi:step")),
    };
    if values.is_empty() {
        return Err(Failure::usage("no budgets given"));
    }
    Ok(values)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<ProblemSpec, Failure> {
    ProblemSpec::from_json(&read(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn echo(out: &mut dyn Write, pairs: &[(&str, String)]) -> std::io::Result<()> {
    for (k, v) in pairs {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

fn opt<T: Display>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

fn solver_echo(cfg: &SolveConfig) -> Vec<(&'static str, String)> {
    vec![
        ("grid_steps", cfg.grid_steps.to_string()),
        ("refine_rounds", cfg.refine_rounds.to_string()),
        ("v_size_max", opt(cfg.v_size_max)),
        ("u_size_max", opt(cfg.u_size_max)),
        ("tolerance", cfg.tolerance.to_string()),
        ("grid_budget", cfg.grid_budget.to_string()),
        ("lossy_grid_budget", cfg.lossy_grid_budget.to_string()),
        ("bound_grid_budget", cfg.bound_grid_budget.to_string()),
        ("starts", cfg.starts.to_string()),
        ("refine_pool", cfg.refine_pool.to_string()),
        ("lossy_refine_pool", cfg.lossy_refine_pool.to_string()),
        ("policy_limit", cfg.policy_limit.to_string()),
    ]
}

const HEADER: [&str; 6] = ["B", "D", "R", "mode", "exact", "argmin"];

fn row(budget: f64, distortion: Option<f64>, rate: f64, mode: &str, exact: bool, summary: &str) -> [String; 6] {
    [
        budget.to_string(),
        opt(distortion).replace("none", ""),
        if rate.is_finite() {
            rate.to_string()
        } else {
            "inf".to_string()
        },
        mode.to_string(),
        exact.to_string(),
        summary.to_string(),
    ]
}

fn point_row(p: &RateCostPoint, mode: &str) -> [String; 6] {
    let summary = match p.status {
        PointStatus::Infeasible => format!("infeasible: {}", p.summary),
        _ => p.summary.clone(),
    };
    row(p.budget, p.distortion, p.rate, mode, p.exact, &summary)
}

pub fn cmd_curve(a: &CurveArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = load_spec(&a.spec)?;
    let budgets = parse_budgets(&a.budgets)?;
    if budgets.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Failure::usage("budgets must be strictly increasing"));
    }
    let cfg = a.solver.config(&spec);
    cfg.validate()?;
    let needs_d = matches!(a.mode, CurveMode::LossyCausal | CurveMode::Bounds);
    let distortion = match (needs_d, a.distortion) {
        (true, None) => return Err(Failure::usage("--distortion is required for this mode")),
        (true, d) => d,
        (false, Some(_)) => return Err(Failure::usage("--distortion only applies to lossy-causal and bounds")),
        (false, None) => None,
    };
    let mut rows = Vec::new();
    let mut envelope = "false".to_string();
    let mode_name = match a.mode {
        CurveMode::Noncausal => "noncausal",
        CurveMode::Causal => "causal",
        CurveMode::LossyCausal => "lossy-causal",
        CurveMode::Bounds => "bounds",
    };
    match a.mode {
        CurveMode::Bounds => {
            let d = distortion.expect("checked above");
            for &b in &budgets {
                for r in evaluate_lossy_bounds(&spec, b, d, &cfg)? {
                    let rate = if r.feasible { r.value } else { f64::INFINITY };
                    rows.push(row(b, Some(d), rate, &r.label.to_string(), false, &r.summary));
                }
            }
        }
        _ => {
            let mode = match a.mode {
                CurveMode::Noncausal => Mode::NonCausal,
                CurveMode::Causal => Mode::Causal,
                _ => Mode::LossyCausal {
                    distortion: distortion.expect("checked above"),
                },
            };
            let curve = trace_curve(&spec, &budgets, mode, &cfg)?;
            envelope = curve.envelope_applied.to_string();
            rows.extend(curve.points.iter().map(|p| point_row(p, mode_name)));
        }
    }
    let mut pairs = vec![
        ("command", "curve".to_string()),
        ("spec", a.spec.display().to_string()),
        ("mode", mode_name.to_string()),
        ("budgets", a.budgets.clone()),
        ("distortion", opt(distortion)),
        ("envelope", envelope),
    ];
    pairs.extend(solver_echo(&cfg));
    write_csv(out, &pairs, &rows)
}

fn write_csv(out: &mut dyn Write, pairs: &[(&str, String)], rows: &[[String; 6]]) -> Result<(), Failure> {
    echo(out, pairs)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_closed_form(a: &ClosedFormArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let budgets = parse_budgets(&a.budgets)?;
    if budgets.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Failure::usage("budgets must be strictly increasing"));
    }
    let mut rows = Vec::new();
    for &b in &budgets {
        let ex = BinaryExample::new(a.p, a.pe, b)?;
        if a.variant != Variant::Causal {
            rows.push(row(b, None, ex.rate_noncausal()?, "noncausal", true, "closed form"));
        }
        if a.variant != Variant::Noncausal {
            rows.push(row(b, None, ex.rate_causal()?, "causal", true, "closed form"));
        }
    }
    let b_star = bstar(a.p).map(|b| b.to_string()).unwrap_or_else(|_| "none".to_string());
    let variant = match a.variant {
        Variant::Noncausal => "noncausal",
        Variant::Causal => "causal",
        Variant::Both => "both",
    };
    let pairs = [
        ("command", "closed-form".to_string()),
        ("p", a.p.to_string()),
        ("pe", opt(a.pe)),
        ("budgets", a.budgets.clone()),
        ("variant", variant.to_string()),
        ("b*", b_star),
    ];
    write_csv(out, &pairs, &rows)
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = load_spec(&a.spec)?;
    let aux_text = read(&a.aux)?;
    let aux = AuxDocument::parse(&aux_text)
        .and_then(|d| d.into_choice(&spec))
        .map_err(|e| Failure::usage(format!("{}: {e}", a.aux.display())))?;
    let mode: SimMode = a.mode.parse()?;
    let rates = parse_budgets(&a.rate)?;
    let mut reports = Vec::with_capacity(rates.len());
    for rate in rates {
        let cfg = SimConfig {
            mode,
            n: a.n,
            rate,
            codebook_rate_v: a.codebook_rate,
            epsilon: a.epsilon,
            trials: a.trials,
            seed: a.seed,
            ceiling: a.ceiling,
        };
        reports.push(run_campaign(&spec, &aux, &cfg)?);
    }
    let text = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0])
    } else {
        serde_json::to_string_pretty(&reports)
    }
    .expect("reports serialize");
    writeln!(out, "{text}")?;
    Ok(())
}
