//! `verify quick` checks kernel and closed-form identities; `verify full`
//! adds the oracle equivalences and solver-vs-closed-form agreement.

use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use action_rate::binary::{
    binary_example_spec, bstar, lemma1_choice, lemma1_parametric_min, lemma2_choice, lemma2_parametric_min,
    rate_causal_binary, rate_erased_causal, rate_erased_noncausal, rate_noncausal_binary, DEFAULT_DELTA_GRID,
};
use action_rate::info::{
    binary_entropy, conditional_entropy, entropy, mutual_information, ConditionalKernel, DiscreteDistribution,
    JointTable,
};
use action_rate::model::{
    assemble_joint, bound_theorem5, expected_cost, objective_theorem1, objective_theorem2, AuxiliaryChoice,
};
use action_rate::solver::{solve_causal, solve_noncausal, OracleTable, SolveConfig, ORACLE_SLACK_CONSTANT};
use action_rate::Result;

use crate::Failure;

pub const P: f64 = 0.1;
pub const CLOSED_FORM_TOLERANCE: f64 = 5e-3;
pub const IDENTITY_TOLERANCE: f64 = 1e-9;
pub const PARAMETRIC_TOLERANCE: f64 = 1e-6;
pub const ORACLE_STEPS: usize = 64;
pub const ORACLE_V: usize = 4;
pub const SOLVER_BUDGETS: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
pub const ORACLE_BUDGETS: [f64; 3] = [0.1, 0.25, 0.4];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyLevel {
    Quick,
    Full,
}

impl FromStr for VerifyLevel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "quick" => Ok(VerifyLevel::Quick),
            "full" => Ok(VerifyLevel::Full),
            other => Err(format!("unknown verify level `{other}` (quick, full)")),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub grid: Option<usize>,
    pub refine: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Largest deviation seen.
    pub worst: f64,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, limit: f64, detail: impl Into<String>) -> Check {
    Check {
        name,
        passed: worst <= limit,
        worst,
        detail: detail.into(),
    }
}

/// Runs the suite, writing one line per check.
pub fn run_verify(
    level: VerifyLevel,
    opts: &VerifyOptions,
    out: &mut dyn Write,
) -> std::result::Result<Vec<Check>, Failure> {
    let start = Instant::now();
    let mut checks = quick()?;
    if level == VerifyLevel::Full {
        checks.extend(full(opts)?);
    }
    writeln!(out, "# command=verify")?;
    writeln!(
        out,
        "# level={}",
        if level == VerifyLevel::Full { "full" } else { "quick" }
    )?;
    writeln!(
        out,
        "# grid={} refine={} tol={}",
        opt(opts.grid),
        opt(opts.refine),
        opts.tol.unwrap_or(CLOSED_FORM_TOLERANCE)
    )?;
    for c in &checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{verdict} {} worst={:.3e} {}", c.name, c.worst, c.detail)?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    writeln!(
        out,
        "{} checks, {failed} failed, {:.2}s",
        checks.len(),
        start.elapsed().as_secs_f64()
    )?;
    Ok(checks)
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "default".to_string(), |v| v.to_string())
}

fn max_dev(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) })
}

fn quick() -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let joint = JointTable::new(vec![2, 3], vec![0.1, 0.2, 0.05, 0.3, 0.15, 0.2])?;
    let chain = joint.entropy_of(&[0, 1])? - joint.entropy_of(&[0])? - conditional_entropy(&joint, &[1], &[0])?;
    let sym = mutual_information(&joint, &[0], &[1])? - mutual_information(&joint, &[1], &[0])?;
    let uniform = entropy(&DiscreteDistribution::uniform(4)?) - 2.0;
    let h_half = binary_entropy(0.5)? - 1.0;
    out.push(check(
        "kernel-identities",
        max_dev([chain.abs(), sym.abs(), uniform.abs(), h_half.abs()]),
        IDENTITY_TOLERANCE,
        "chain rule, symmetry of I, H(uniform), H2(1/2)",
    ));

    let b_star = bstar(P)?;
    let ends = max_dev([
        (rate_noncausal_binary(0.0, P)? - 1.0).abs(),
        (rate_noncausal_binary(0.5, P)? - binary_entropy(P)?).abs(),
        (rate_causal_binary(0.0, P)? - 1.0).abs(),
        (rate_causal_binary(0.5, P)? - binary_entropy(P)?).abs(),
    ]);
    out.push(check(
        "closed-form-endpoints",
        ends,
        IDENTITY_TOLERANCE,
        "R(0) = 1, R(1/2) = H2(p)",
    ));

    let step = b_star / 8.0;
    let lin: Vec<f64> = (0..=8)
        .map(|k| rate_noncausal_binary(k as f64 * step, P))
        .collect::<Result<_>>()?;
    let second = max_dev(lin.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]).abs()));
    let jump = (rate_noncausal_binary(b_star - 1e-12, P)? - rate_noncausal_binary(b_star + 1e-12, P)?).abs();
    out.push(check(
        "closed-form-branches",
        second.max(jump),
        IDENTITY_TOLERANCE,
        format!("linear below b*={b_star:.6}, continuous at b*"),
    ));

    let pe = 0.5;
    let mut mix = Vec::new();
    for k in 0..=10 {
        let b = k as f64 * 0.05;
        // components from the no-side-information closed forms
        let hp = binary_entropy(P)?;
        mix.push((rate_erased_noncausal(b, P, pe)? - (pe * rate_noncausal_binary(b, P)? + (1.0 - pe) * hp)).abs());
        mix.push((rate_erased_causal(b, P, pe)? - (pe * rate_causal_binary(b, P)? + (1.0 - pe) * hp)).abs());
        mix.push((rate_erased_noncausal(b, P, 0.0)? - hp).abs());
        mix.push((rate_erased_noncausal(b, P, 1.0)? - rate_noncausal_binary(b, P)?).abs());
        mix.push((rate_erased_causal(b, P, 1.0)? - rate_causal_binary(b, P)?).abs());
    }
    out.push(check(
        "erased-mixtures",
        max_dev(mix),
        PARAMETRIC_TOLERANCE,
        "pe in {0, 0.5, 1}",
    ));

    let mut param = Vec::new();
    for k in 1..10 {
        let b = k as f64 * 0.05;
        param.push((lemma1_parametric_min(b, P, DEFAULT_DELTA_GRID)?.value - rate_noncausal_binary(b, P)?).abs());
        param.push((lemma2_parametric_min(b, P)?.0 - rate_causal_binary(b, P)?).abs());
    }
    out.push(check(
        "parametric-minima",
        max_dev(param),
        PARAMETRIC_TOLERANCE,
        "structured families vs closed forms",
    ));

    let spec = binary_example_spec(P)?;
    let mut model = Vec::new();
    for (theta, delta) in [(0.3, 0.2), (0.8, 0.4), (1.0, 0.5)] {
        let aux = lemma1_choice(theta, delta)?;
        let joint = assemble_joint(&spec, &aux, false)?;
        let expect = theta * (binary_entropy(P)? - binary_entropy(delta)?) + 1.0;
        model.push((objective_theorem1(&joint)? - expect).abs());
        model.push((expected_cost(&joint, &spec)? - theta * delta).abs());
        let ident = identity_description(&aux)?;
        let bound = bound_theorem5(&assemble_joint(&spec, &ident, false)?)?;
        model.push((bound.value - objective_theorem1(&joint)?).abs());
    }
    let joint = assemble_joint(&spec, &lemma2_choice(0.4)?, true)?;
    model.push((objective_theorem2(&joint)? - (0.4 * binary_entropy(P)? + 0.6)).abs());
    out.push(check(
        "structured-objectives",
        max_dev(model),
        IDENTITY_TOLERANCE,
        "assembled joints vs parametric values, identity U",
    ));
    Ok(out)
}

/// `U = Y` with `ŷ(z,u) = u`.
fn identity_description(aux: &AuxiliaryChoice) -> Result<AuxiliaryChoice> {
    Ok(aux
        .clone()
        .with_description(ConditionalKernel::identity(2)?, vec![0, 1]))
}

fn full(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let spec = binary_example_spec(P)?;
    let mut out = Vec::new();
    let slack = ORACLE_SLACK_CONSTANT / ORACLE_STEPS as f64;

    let nc = OracleTable::build(&spec, false, ORACLE_STEPS, ORACLE_V)?;
    let c = OracleTable::build(&spec, true, ORACLE_STEPS, ORACLE_V)?;
    let (mut dn, mut dc) = (Vec::new(), Vec::new());
    for b in ORACLE_BUDGETS {
        dn.push((nc.query(b)?.rate - lemma1_parametric_min(b, P, DEFAULT_DELTA_GRID)?.value).abs());
        dc.push((c.query(b)?.rate - lemma2_parametric_min(b, P)?.0).abs());
    }
    out.push(check(
        "oracle-lemma1",
        max_dev(dn),
        slack,
        format!("|V|={ORACLE_V} N={ORACLE_STEPS} slack={slack}"),
    ));
    out.push(check(
        "oracle-lemma2",
        max_dev(dc),
        slack,
        format!("|V|={ORACLE_V} N={ORACLE_STEPS} slack={slack}"),
    ));

    let mut cfg = SolveConfig::for_spec(&spec);
    if let Some(g) = opts.grid {
        cfg.grid_steps = g;
    }
    if let Some(r) = opts.refine {
        cfg.refine_rounds = r;
    }
    let tol = opts.tol.unwrap_or(CLOSED_FORM_TOLERANCE);
    let (mut en, mut ec) = (Vec::new(), Vec::new());
    for b in SOLVER_BUDGETS {
        en.push((solve_noncausal(&spec, b, &cfg)?.rate - rate_noncausal_binary(b, P)?).abs());
        ec.push((solve_causal(&spec, b, &cfg)?.rate - rate_causal_binary(b, P)?).abs());
    }
    let detail = format!("grid={} refine={}", cfg.grid_steps, cfg.refine_rounds);
    out.push(check(
        "solver-noncausal-vs-closed-form",
        max_dev(en),
        tol,
        detail.clone(),
    ));
    out.push(check("solver-causal-vs-closed-form", max_dev(ec), tol, detail));
    Ok(out)
}
