//! Global minimization of the single-letter objectives.
//!
//! Every solve enumerates deterministic action tables `f(s,v)` for each
//! `|V| ≤ v_size_max`, scans a uniform grid over the continuous part of
//! the auxiliary law, and refines the best grid points by a shrinking
//! pattern search that can slide along the cost constraint. Relabeling the
//! values of `V` permutes the columns `s ↦ f(s,v)` without changing any
//! objective, so only column multisets (sorted column lists) are visited.
//!
//! Infeasible budgets come back as [`PointStatus::Infeasible`] points, not
//! errors. Every reported argmin is re-evaluated on the assembled joint and
//! must reproduce the rate within `SolveConfig::tolerance`.

mod blahut;
mod columns;
mod curve;
mod lossy;
mod oracle;
mod search;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use blahut::BlahutConfig;
pub use curve::{dual_bound, lagrangian_sweep, lower_envelope, trace_curve, LagrangePoint, RateCurve};
pub use lossy::{bound_theorem4_search, evaluate_lossy_bounds, solve_lossy_causal, BoundLabel, BoundResult};
pub use oracle::{brute_force_oracle, OracleTable, ORACLE_SLACK_CONSTANT, ORACLE_WORK_LIMIT};

use crate::error::{usage, Error, Result};
use crate::model::{
    assemble_joint, objective_theorem1, objective_theorem2, ActionPolicy, AuxiliaryChoice, ProblemSpec,
};
use columns::{multiset_count, multisets, Columns};
use search::{rows_of, search, Found, Landscape, Row, SearchPlan};

/// Oracle argmins must re-evaluate to the reported rate within this;
/// solver argmins use `SolveConfig::tolerance`.
pub const REEVALUATION_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// `None` means `|S| + 2`.
    pub v_size_max: Option<usize>,
    /// `None` means `|Y| + 2`; only the description bounds use it.
    pub u_size_max: Option<usize>,
    /// Grid resolution per simplex coordinate (upper limit, see `grid_budget`).
    pub grid_steps: usize,
    /// Each round divides the refinement step by 4.
    pub refine_rounds: usize,
    pub lagrange_sweep: Vec<f64>,
    /// Re-evaluation gap allowed for argmins and accepted overshoot of
    /// the distortion target.
    pub tolerance: f64,
    /// Grid points scanned per action table: the resolution is lowered
    /// below `grid_steps` until the product grid fits.
    pub grid_budget: usize,
    pub lossy_grid_budget: usize,
    pub bound_grid_budget: usize,
    /// Grid points kept per action table.
    pub starts: usize,
    /// Grid points refined overall.
    pub refine_pool: usize,
    pub lossy_refine_pool: usize,
    /// Refusal threshold on the number of action tables.
    pub policy_limit: u64,
    pub blahut: BlahutConfig,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            v_size_max: None,
            u_size_max: None,
            grid_steps: 32,
            refine_rounds: 3,
            lagrange_sweep: vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 16.0],
            tolerance: 1e-6,
            grid_budget: 20_000,
            lossy_grid_budget: 64,
            bound_grid_budget: 256,
            starts: 2,
            refine_pool: 24,
            lossy_refine_pool: 4,
            policy_limit: 200_000,
            blahut: BlahutConfig::default(),
        }
    }
}

impl SolveConfig {
    /// Defaults with the cardinality caps resolved for `spec`.
    pub fn for_spec(spec: &ProblemSpec) -> Self {
        Self {
            v_size_max: Some(spec.s_size() + 2),
            u_size_max: Some(spec.y_size() + 2),
            ..Self::default()
        }
    }

    pub fn v_cap(&self, spec: &ProblemSpec) -> usize {
        self.v_size_max.unwrap_or(spec.s_size() + 2)
    }

    pub fn u_cap(&self, spec: &ProblemSpec) -> usize {
        self.u_size_max.unwrap_or(spec.y_size() + 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_steps < 2 {
            return Err(usage("grid_steps must be at least 2"));
        }
        if self.v_size_max == Some(0) || self.u_size_max == Some(0) {
            return Err(usage("cardinality caps must be at least 1"));
        }
        if self.starts == 0 || self.refine_pool == 0 || self.lossy_refine_pool == 0 {
            return Err(usage("starts and refine pools must be positive"));
        }
        if self.lagrange_sweep.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return Err(usage("Lagrange multipliers must be finite and >= 0"));
        }
        if !(self.tolerance > 0.0) {
            return Err(usage("tolerance must be positive"));
        }
        Ok(())
    }

    fn plan(&self, budget: usize, pool: usize) -> SearchPlan {
        SearchPlan {
            grid_steps: self.grid_steps,
            grid_budget: budget,
            starts: self.starts,
            pool,
            refine_rounds: self.refine_rounds,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Solved,
    Infeasible,
    /// Replaced by the lower convex envelope (time sharing of neighbours).
    Interpolated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateCostPoint {
    pub budget: f64,
    pub distortion: Option<f64>,
    /// Bits per symbol; `+∞` when infeasible.
    pub rate: f64,
    pub status: PointStatus,
    /// True for closed-form values, false for search results.
    pub exact: bool,
    /// Cost reached by the argmin.
    pub cost: Option<f64>,
    pub achieved_distortion: Option<f64>,
    pub argmin: Option<AuxiliaryChoice>,
    pub summary: String,
    pub v_size_max: usize,
}

impl RateCostPoint {
    pub(crate) fn infeasible(budget: f64, distortion: Option<f64>, v_size_max: usize, why: &str) -> Self {
        Self {
            budget,
            distortion,
            rate: f64::INFINITY,
            status: PointStatus::Infeasible,
            exact: false,
            cost: None,
            achieved_distortion: None,
            argmin: None,
            summary: why.to_string(),
            v_size_max,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status != PointStatus::Infeasible
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Mode {
    NonCausal,
    Causal,
    LossyCausal { distortion: f64 },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::NonCausal => f.write_str("noncausal"),
            Mode::Causal => f.write_str("causal"),
            Mode::LossyCausal { .. } => f.write_str("lossy-causal"),
        }
    }
}

/// Solves one point of the curve selected by `mode`.
pub fn solve(spec: &ProblemSpec, budget: f64, mode: Mode, config: &SolveConfig) -> Result<RateCostPoint> {
    match mode {
        Mode::NonCausal => solve_noncausal(spec, budget, config),
        Mode::Causal => solve_causal(spec, budget, config),
        Mode::LossyCausal { distortion } => solve_lossy_causal(spec, budget, distortion, config),
    }
}

pub(crate) fn check_budget(budget: f64) -> Result<()> {
    if !(budget >= 0.0) || budget.is_nan() {
        return Err(Error::Domain {
            param: "B",
            value: budget,
            expected: "B >= 0",
        });
    }
    Ok(())
}

pub(crate) fn budget_reachable(spec: &ProblemSpec, budget: f64) -> bool {
    budget >= spec.min_expected_cost() - 1e-12
}

/// Column multisets for `|V| = 1..=v_max`, refused above `limit`.
pub(crate) fn policy_keys(cols: &Columns, v_max: usize, limit: u64) -> Result<Vec<PolicyKey>> {
    let total = (1..=v_max).fold(0u128, |acc, v| {
        acc.saturating_add(multiset_count(cols.count as u128, v as u128))
    });
    if total > limit as u128 {
        return Err(Error::SearchSpace {
            count: total,
            limit: limit as u128,
        });
    }
    let mut keys = Vec::with_capacity(total as usize);
    for v in 1..=v_max {
        for m in multisets(cols.count, v) {
            keys.push(PolicyKey {
                policy: cols.policy(&m),
                cols: m,
            });
        }
    }
    Ok(keys)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct PolicyKey {
    pub policy: ActionPolicy,
    pub cols: Vec<usize>,
}

/// Layout of the auxiliary law: `[s][v]` non-causal, `[v]` causal, or `[v]`
/// copied to every state (non-causal storage with `V ⫫ S`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Storage {
    NonCausal,
    Causal,
    Independent,
}

impl Storage {
    pub fn rows(self, s: usize, v: usize) -> Vec<Row> {
        match self {
            Storage::NonCausal => rows_of(&[(s, v)]),
            Storage::Causal | Storage::Independent => rows_of(&[(1, v)]),
        }
    }

    /// Expands search coordinates into `w`, `[s][v]` or `[v]`.
    pub fn expand(self, x: &[f64], s: usize, out: &mut Vec<f64>) {
        out.clear();
        match self {
            Storage::Independent => {
                for _ in 0..s {
                    out.extend_from_slice(x);
                }
            }
            _ => out.extend_from_slice(x),
        }
    }

    pub fn causal(self) -> bool {
        self == Storage::Causal
    }
}

struct Lossless<'a> {
    cols: &'a Columns,
    key: Vec<usize>,
    rows: Vec<Row>,
    storage: Storage,
    budget: f64,
    lambda: f64,
    scratch: Vec<f64>,
    w: Vec<f64>,
}

impl<'a> Lossless<'a> {
    fn new(cols: &'a Columns, key: &[usize], storage: Storage, budget: f64, lambda: f64) -> Self {
        Self {
            cols,
            key: key.to_vec(),
            rows: storage.rows(cols.s, key.len()),
            storage,
            budget,
            lambda,
            scratch: cols.scratch(),
            w: Vec::new(),
        }
    }

    fn rate(&mut self, x: &[f64]) -> f64 {
        self.storage.expand(x, self.cols.s, &mut self.w);
        if self.storage.causal() {
            self.cols.causal_objective(&self.key, &self.w)
        } else {
            self.cols.nc_objective(&self.key, &self.w, &mut self.scratch)
        }
    }
}

impl Landscape for Lossless<'_> {
    fn rows(&self) -> &[Row] {
        &self.rows
    }

    fn objective(&mut self, x: &[f64]) -> Option<f64> {
        let r = self.rate(x);
        Some(if self.lambda > 0.0 {
            r + self.lambda * self.cost(x)
        } else {
            r
        })
    }

    fn slack(&mut self, x: &[f64]) -> f64 {
        self.budget - self.cost(x)
    }

    fn cost(&mut self, x: &[f64]) -> f64 {
        self.storage.expand(x, self.cols.s, &mut self.w);
        if self.storage.causal() {
            self.cols.causal_cost(&self.key, &self.w)
        } else {
            self.cols.nc_cost(&self.key, &self.w)
        }
    }
}

/// Best lossless point for one storage; `lambda > 0` adds `λ·cost` to the
/// objective (with `budget = ∞` for the Lagrangian sweep).
pub(crate) fn lossless_search(
    cols: &Columns,
    keys: &[PolicyKey],
    storage: Storage,
    budget: f64,
    lambda: f64,
    config: &SolveConfig,
) -> Option<Found<PolicyKey>> {
    search(
        keys,
        |k| Lossless::new(cols, &k.cols, storage, budget, lambda),
        &config.plan(config.grid_budget, config.refine_pool),
    )
}

fn lossless_point(
    spec: &ProblemSpec,
    cols: &Columns,
    budget: f64,
    found: Found<PolicyKey>,
    storage: Storage,
    v_cap: usize,
    tolerance: f64,
) -> Result<RateCostPoint> {
    let mut w = Vec::new();
    storage.expand(&found.x, cols.s, &mut w);
    let aux = cols.choice(&found.key.cols, &w, storage.causal())?;
    let joint = assemble_joint(spec, &aux, storage.causal())?;
    let check = if storage.causal() {
        objective_theorem2(&joint)?
    } else {
        objective_theorem1(&joint)?
    };
    if (check - found.value).abs() > tolerance {
        return Err(Error::NumericalIntegrity {
            what: "argmin re-evaluation gap",
            value: check - found.value,
        });
    }
    Ok(RateCostPoint {
        budget,
        distortion: None,
        rate: found.value,
        status: PointStatus::Solved,
        exact: false,
        cost: Some(found.cost),
        achieved_distortion: None,
        summary: aux.summary(),
        argmin: Some(aux),
        v_size_max: v_cap,
    })
}

/// Minimizes `I(V;S|Z) + H(Y|V,Z)` over `p(v|s)` and `f` subject to
/// `E Λ ≤ B`. The `V ⫫ S` sub-family is searched separately as well (it is
/// the causal feasible set), so the result never exceeds [`solve_causal`].
pub fn solve_noncausal(spec: &ProblemSpec, budget: f64, config: &SolveConfig) -> Result<RateCostPoint> {
    config.validate()?;
    check_budget(budget)?;
    let v_cap = config.v_cap(spec);
    if !budget_reachable(spec, budget) {
        return Ok(RateCostPoint::infeasible(
            budget,
            None,
            v_cap,
            "budget below the minimum expected cost",
        ));
    }
    let cols = Columns::new(spec, config.policy_limit as u128)?;
    let keys = policy_keys(&cols, v_cap, config.policy_limit)?;
    let general = lossless_search(&cols, &keys, Storage::NonCausal, budget, 0.0, config);
    let independent = lossless_search(&cols, &keys, Storage::Independent, budget, 0.0, config);
    let (found, storage) = match (general, independent) {
        (Some(g), Some(i)) => {
            if search::prefer(&i, &g) {
                (i, Storage::Independent)
            } else {
                (g, Storage::NonCausal)
            }
        }
        (Some(g), None) => (g, Storage::NonCausal),
        (None, Some(i)) => (i, Storage::Independent),
        (None, None) => {
            return Ok(RateCostPoint::infeasible(budget, None, v_cap, "no feasible grid point"));
        }
    };
    lossless_point(spec, &cols, budget, found, storage, v_cap, config.tolerance)
}

/// Minimizes `H(Y|V,Z)` over `p(v)` and `f` subject to `E Λ ≤ B`.
pub fn solve_causal(spec: &ProblemSpec, budget: f64, config: &SolveConfig) -> Result<RateCostPoint> {
    config.validate()?;
    check_budget(budget)?;
    let v_cap = config.v_cap(spec);
    if !budget_reachable(spec, budget) {
        return Ok(RateCostPoint::infeasible(
            budget,
            None,
            v_cap,
            "budget below the minimum expected cost",
        ));
    }
    let cols = Columns::new(spec, config.policy_limit as u128)?;
    let keys = policy_keys(&cols, v_cap, config.policy_limit)?;
    match lossless_search(&cols, &keys, Storage::Causal, budget, 0.0, config) {
        Some(found) => lossless_point(spec, &cols, budget, found, Storage::Causal, v_cap, config.tolerance),
        None => Ok(RateCostPoint::infeasible(budget, None, v_cap, "no feasible grid point")),
    }
}
