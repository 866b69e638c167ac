//! Lossy objectives: the exact causal rate-distortion-cost function and the
//! three non-causal upper bounds.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::blahut::{conditional_rd, RdSolution};
use super::columns::{multiset_count, multisets, xlog2x, Columns};
use super::search::{self, grid_resolution, grid_scan, prefer, refine, rows_of, Candidate, Found, Landscape, Row};
use super::{
    budget_reachable, check_budget, lossless_search, policy_keys, PointStatus, PolicyKey, RateCostPoint, SolveConfig,
    Storage,
};
use crate::error::{usage, Error, Result};
use crate::info::{entropy_bits, ConditionalKernel};
use crate::model::{
    assemble_joint, bound_theorem4, bound_theorem5, bound_theorem6, expected_distortion, objective_theorem3,
    AuxiliaryChoice, ProblemSpec,
};

const DISTORTION_SLACK: f64 = 1e-9;

fn check_distortion(spec: &ProblemSpec, d: f64) -> Result<(usize, Vec<f64>)> {
    if !(d >= 0.0) {
        return Err(Error::Domain {
            param: "D",
            value: d,
            expected: "D >= 0",
        });
    }
    match (spec.yhat_size(), spec.distortion_table()) {
        (Some(yh), Some(t)) => Ok((yh, t.to_vec())),
        _ => Err(usage("the spec has no distortion table")),
    }
}

/// Outer law `p(v)` or `p(v|s)` with the reconstruction solved inside by
/// Blahut–Arimoto. With `state_information` the objective also carries
/// `I(V;S|Z)`.
struct RdLand<'a> {
    cols: &'a Columns,
    key: Vec<usize>,
    rows: Vec<Row>,
    storage: Storage,
    state_information: bool,
    budget: f64,
    target: f64,
    yh: usize,
    d: &'a [f64],
    config: &'a SolveConfig,
    w: Vec<f64>,
}

impl RdLand<'_> {
    fn solve(&mut self, x: &[f64]) -> Option<(f64, RdSolution)> {
        self.storage.expand(x, self.cols.s, &mut self.w);
        let ctx = self.cols.contexts(&self.key, &self.w, self.storage.causal());
        let rd = conditional_rd(
            &ctx,
            self.d,
            self.yh,
            self.target,
            self.config.tolerance,
            &self.config.blahut,
        )?;
        let extra = if self.state_information {
            self.cols.nc_state_information(self.key.len(), &self.w)
        } else {
            0.0
        };
        Some((extra + rd.rate, rd))
    }
}

impl Landscape for RdLand<'_> {
    fn rows(&self) -> &[Row] {
        &self.rows
    }

    fn objective(&mut self, x: &[f64]) -> Option<f64> {
        self.solve(x).map(|(v, _)| v)
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

/// `p(ŷ|y,v,z)` with inputs `[y, v, z]` from per-context kernels `[v][z]`.
fn recon_kernel(kernels: &[Vec<f64>], ys: usize, vs: usize, zs: usize, yh: usize) -> Result<ConditionalKernel> {
    let mut flat = Vec::with_capacity(ys * vs * zs * yh);
    for y in 0..ys {
        for v in 0..vs {
            for z in 0..zs {
                flat.extend_from_slice(&kernels[v * zs + z][y * yh..(y + 1) * yh]);
            }
        }
    }
    ConditionalKernel::new(vec![ys, vs, zs], yh, flat)
}

struct RdOutcome {
    value: f64,
    cost: f64,
    distortion: f64,
    aux: AuxiliaryChoice,
}

#[allow(clippy::too_many_arguments)]
fn rd_search(
    spec: &ProblemSpec,
    cols: &Columns,
    keys: &[PolicyKey],
    storage: Storage,
    state_information: bool,
    budget: f64,
    target: f64,
    yh: usize,
    d: &[f64],
    config: &SolveConfig,
) -> Result<Option<RdOutcome>> {
    let make = |k: &PolicyKey| RdLand {
        cols,
        key: k.cols.clone(),
        rows: storage.rows(cols.s, k.cols.len()),
        storage,
        state_information,
        budget,
        target,
        yh,
        d,
        config,
        w: Vec::new(),
    };
    // warm start from the lossless argmin
    let seeds: Vec<(usize, Vec<f64>)> = lossless_search(cols, keys, storage, budget, 0.0, config)
        .and_then(|f| keys.iter().position(|k| *k == f.key).map(|i| (i, f.x)))
        .into_iter()
        .collect();
    let plan = config.plan(config.lossy_grid_budget, config.lossy_refine_pool);
    let Some(found) = search::search_seeded(keys, make, &plan, &seeds) else {
        return Ok(None);
    };
    let mut land = make(&found.key);
    let (value, rd) = land.solve(&found.x).ok_or(Error::NumericalIntegrity {
        what: "argmin lost feasibility",
        value: found.value,
    })?;
    let mut w = Vec::new();
    storage.expand(&found.x, cols.s, &mut w);
    let recon = recon_kernel(&rd.kernels, spec.y_size(), found.key.cols.len(), spec.z_size(), yh)?;
    let aux = cols.choice(&found.key.cols, &w, storage.causal())?.with_recon(recon);
    let joint = assemble_joint(spec, &aux, storage.causal())?;
    let check = if state_information {
        bound_theorem4(&joint)?
    } else {
        objective_theorem3(&joint)?
    };
    if (check - value).abs() > config.tolerance {
        return Err(Error::NumericalIntegrity {
            what: "argmin re-evaluation gap",
            value: check - value,
        });
    }
    let distortion = expected_distortion(&joint, spec)?;
    if (distortion - rd.distortion).abs() > config.tolerance {
        return Err(Error::NumericalIntegrity {
            what: "argmin distortion gap",
            value: distortion - rd.distortion,
        });
    }
    Ok(Some(RdOutcome {
        value,
        cost: found.cost,
        distortion,
        aux,
    }))
}

/// Minimizes `I(Y;Ŷ|V,Z)` over `p(v)`, `f` and `p(ŷ|y,v,z)` subject to
/// `E Λ ≤ B` and `E d(Y,Ŷ) ≤ D`.
pub fn solve_lossy_causal(
    spec: &ProblemSpec,
    budget: f64,
    distortion: f64,
    config: &SolveConfig,
) -> Result<RateCostPoint> {
    config.validate()?;
    check_budget(budget)?;
    let (yh, d) = check_distortion(spec, distortion)?;
    let v_cap = config.v_cap(spec);
    if !budget_reachable(spec, budget) {
        return Ok(RateCostPoint::infeasible(
            budget,
            Some(distortion),
            v_cap,
            "budget below the minimum expected cost",
        ));
    }
    let cols = Columns::new(spec, config.policy_limit as u128)?;
    let keys = policy_keys(&cols, v_cap, config.policy_limit)?;
    match rd_search(
        spec,
        &cols,
        &keys,
        Storage::Causal,
        false,
        budget,
        distortion,
        yh,
        &d,
        config,
    )? {
        None => Ok(RateCostPoint::infeasible(
            budget,
            Some(distortion),
            v_cap,
            "distortion below the minimum reachable under the budget",
        )),
        Some(o) => Ok(RateCostPoint {
            budget,
            distortion: Some(distortion),
            rate: o.value,
            status: PointStatus::Solved,
            exact: false,
            cost: Some(o.cost),
            achieved_distortion: Some(o.distortion),
            summary: o.aux.summary(),
            argmin: Some(o.aux),
            v_size_max: v_cap,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundLabel {
    Thm4,
    Thm5,
    Thm6,
}

impl fmt::Display for BoundLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundLabel::Thm4 => "Thm4",
            BoundLabel::Thm5 => "Thm5",
            BoundLabel::Thm6 => "Thm6",
        })
    }
}

/// Best value found for one upper bound. Search results are upper bounds
/// on the rate-distortion-cost function, never claimed tight.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult {
    pub label: BoundLabel,
    pub budget: f64,
    pub distortion: f64,
    /// `+∞` when no feasible point was found.
    pub value: f64,
    pub feasible: bool,
    pub cost: Option<f64>,
    pub achieved_distortion: Option<f64>,
    pub argmin: Option<AuxiliaryChoice>,
    pub summary: String,
    pub v_size_max: usize,
    pub u_size_max: Option<usize>,
}

impl BoundResult {
    fn none(label: BoundLabel, budget: f64, distortion: f64, v: usize, u: Option<usize>, why: &str) -> Self {
        Self {
            label,
            budget,
            distortion,
            value: f64::INFINITY,
            feasible: false,
            cost: None,
            achieved_distortion: None,
            argmin: None,
            summary: why.to_string(),
            v_size_max: v,
            u_size_max: u,
        }
    }
}

/// Searches `I(V;S|Z) + I(Ŷ;Y|V,Z)` over `p(v|s)`, `f`, `p(ŷ|y,v,z)`.
/// With `independent` the search is restricted to `V ⫫ S`, where the
/// bound coincides with the causal rate-distortion-cost function.
pub fn bound_theorem4_search(
    spec: &ProblemSpec,
    budget: f64,
    distortion: f64,
    config: &SolveConfig,
    independent: bool,
) -> Result<BoundResult> {
    config.validate()?;
    check_budget(budget)?;
    let (yh, d) = check_distortion(spec, distortion)?;
    let v_cap = config.v_cap(spec);
    let label = BoundLabel::Thm4;
    if !budget_reachable(spec, budget) {
        return Ok(BoundResult::none(
            label,
            budget,
            distortion,
            v_cap,
            None,
            "budget below the minimum expected cost",
        ));
    }
    let cols = Columns::new(spec, config.policy_limit as u128)?;
    let keys = policy_keys(&cols, v_cap, config.policy_limit)?;
    let storage = if independent {
        Storage::Independent
    } else {
        Storage::NonCausal
    };
    Ok(
        match rd_search(spec, &cols, &keys, storage, true, budget, distortion, yh, &d, config)? {
            None => BoundResult::none(label, budget, distortion, v_cap, None, "no feasible point"),
            Some(o) => BoundResult {
                label,
                budget,
                distortion,
                value: o.value,
                feasible: true,
                cost: Some(o.cost),
                achieved_distortion: Some(o.distortion),
                summary: o.aux.summary(),
                argmin: Some(o.aux),
                v_size_max: v_cap,
                u_size_max: None,
            },
        },
    )
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct DescKey {
    policy: PolicyKey,
    /// Sorted columns `z ↦ ŷ(z,u)`, one per value of `U`.
    map: Vec<usize>,
}

/// `p(v|s)`, `f`, a description kernel `p(u|y)` (or `p(u|y,v)`) and a
/// fixed reconstruction table `ŷ(z,u)`.
struct DescLand<'a> {
    cols: &'a Columns,
    v: usize,
    u: usize,
    key: Vec<usize>,
    yhat: Vec<usize>,
    rows: Vec<Row>,
    /// `p(u|y,v)` rows are stored per `(y,v)`.
    per_v: bool,
    /// Whether the `I(V;S) ≤ I(V;Y)` filter applies.
    filtered: bool,
    budget: f64,
    target: f64,
    yh: usize,
    d: &'a [f64],
    pyvz: Vec<f64>,
}

struct Measures {
    value: f64,
    distortion: f64,
    cost: f64,
    admissible: bool,
}

impl<'a> DescLand<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        cols: &'a Columns,
        key: &DescKey,
        yh: usize,
        zs: usize,
        per_v: bool,
        filtered: bool,
        budget: f64,
        target: f64,
        d: &'a [f64],
    ) -> Self {
        let v = key.policy.cols.len();
        let u = key.map.len();
        let mut yhat = vec![0; zs * u];
        for (ui, &m) in key.map.iter().enumerate() {
            let mut rest = m;
            for z in (0..zs).rev() {
                yhat[z * u + ui] = rest % yh;
                rest /= yh;
            }
        }
        let ys = cols.y;
        let rows = if per_v {
            let mut r = rows_of(&[(cols.s, v)]);
            let mut offset = cols.s * v;
            for y in 0..ys {
                for _ in 0..v {
                    r.push(Row {
                        offset,
                        len: u,
                        group: 1 + y,
                    });
                    offset += u;
                }
            }
            r
        } else {
            rows_of(&[(cols.s, v), (ys, u)])
        };
        Self {
            cols,
            v,
            u,
            key: key.policy.cols.clone(),
            yhat,
            rows,
            per_v,
            filtered,
            budget,
            target,
            yh,
            d,
            pyvz: Vec::new(),
        }
    }

    fn kernel_row<'x>(&self, x: &'x [f64], y: usize, v: usize) -> &'x [f64] {
        let off = self.cols.s * self.v;
        let r = if self.per_v { y * self.v + v } else { y };
        &x[off + r * self.u..off + (r + 1) * self.u]
    }

    fn measure(&mut self, x: &[f64]) -> Measures {
        let c = self.cols;
        let (ss, zs, ys, vs, us) = (c.s, c.z, c.y, self.v, self.u);
        let w = &x[..ss * vs];
        // p(y,v,z) as [v][z][y]
        self.pyvz.clear();
        self.pyvz.resize(vs * zs * ys, 0.0);
        for (vi, &col) in self.key.iter().enumerate() {
            for si in 0..ss {
                let ws = w[si * vs + vi];
                if ws == 0.0 {
                    continue;
                }
                let ch = c.chan(col, si);
                for zi in 0..zs {
                    let p = c.p_sz[si * zs + zi] * ws;
                    let base = (vi * zs + zi) * ys;
                    for (acc, q) in self.pyvz[base..base + ys].iter_mut().zip(ch) {
                        *acc += p * q;
                    }
                }
            }
        }
        let mut puvz = vec![0.0; vs * zs * us];
        let mut pvz = vec![0.0; vs * zs];
        let mut h_u_yvz = 0.0;
        let mut distortion = 0.0;
        for vi in 0..vs {
            for zi in 0..zs {
                for yi in 0..ys {
                    let p = self.pyvz[(vi * zs + zi) * ys + yi];
                    if p == 0.0 {
                        continue;
                    }
                    pvz[vi * zs + zi] += p;
                    let row = self.kernel_row(x, yi, vi);
                    h_u_yvz += p * entropy_bits(row);
                    for (ui, &k) in row.iter().enumerate() {
                        puvz[(vi * zs + zi) * us + ui] += p * k;
                        distortion += p * k * self.d[yi * self.yh + self.yhat[zi * us + ui]];
                    }
                }
            }
        }
        let i_uy = (entropy_bits(&puvz) - entropy_bits(&pvz) - h_u_yvz).max(0.0);
        let value = c.nc_state_information(vs, w) + i_uy;
        let admissible = !self.filtered || {
            // I(V;S) ≤ I(V;Y)
            let mut pv = vec![0.0; vs];
            let mut h_v_s = 0.0;
            for si in 0..ss {
                for vi in 0..vs {
                    pv[vi] += c.p_s[si] * w[si * vs + vi];
                    h_v_s -= c.p_s[si] * xlog2x(w[si * vs + vi]);
                }
            }
            let mut pvy = vec![0.0; vs * ys];
            let mut py = vec![0.0; ys];
            for vi in 0..vs {
                for zi in 0..zs {
                    for yi in 0..ys {
                        let p = self.pyvz[(vi * zs + zi) * ys + yi];
                        pvy[vi * ys + yi] += p;
                        py[yi] += p;
                    }
                }
            }
            let h_v = entropy_bits(&pv);
            let i_vs = h_v - h_v_s;
            let i_vy = h_v + entropy_bits(&py) - entropy_bits(&pvy);
            i_vs <= i_vy + crate::model::STRUCTURE_TOLERANCE
        };
        Measures {
            value,
            distortion,
            cost: c.nc_cost(&self.key, w),
            admissible,
        }
    }

    /// Copies the `p(u|y)` rows of a shared-kernel point to every `v`.
    fn lift(&self, x: &[f64]) -> Vec<f64> {
        let off = self.cols.s * self.v;
        let mut out = x[..off].to_vec();
        for y in 0..self.cols.y {
            for _ in 0..self.v {
                out.extend_from_slice(&x[off + y * self.u..off + (y + 1) * self.u]);
            }
        }
        out
    }

    fn choice(&self, x: &[f64]) -> Result<AuxiliaryChoice> {
        let c = self.cols;
        let (ss, vs) = (c.s, self.v);
        let base = c.choice(&self.key, &x[..ss * vs], false)?;
        let mut flat = Vec::new();
        let inputs = if self.per_v {
            for y in 0..c.y {
                for v in 0..vs {
                    flat.extend_from_slice(self.kernel_row(x, y, v));
                }
            }
            vec![c.y, vs]
        } else {
            for y in 0..c.y {
                flat.extend_from_slice(self.kernel_row(x, y, 0));
            }
            vec![c.y]
        };
        let kernel = ConditionalKernel::new(inputs, self.u, renormalize(flat, self.u))?;
        Ok(base.with_description(kernel, self.yhat.clone()))
    }
}

fn renormalize(mut flat: Vec<f64>, width: usize) -> Vec<f64> {
    for row in flat.chunks_mut(width) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    flat
}

impl Landscape for DescLand<'_> {
    fn rows(&self) -> &[Row] {
        &self.rows
    }

    fn objective(&mut self, x: &[f64]) -> Option<f64> {
        let m = self.measure(x);
        m.admissible.then_some(m.value)
    }

    fn slack(&mut self, x: &[f64]) -> f64 {
        let m = self.measure(x);
        (self.budget - m.cost).min(self.target - m.distortion)
    }

    fn linear_slack(&self) -> bool {
        false
    }

    fn cost(&mut self, x: &[f64]) -> f64 {
        self.cols.nc_cost(&self.key, &x[..self.cols.s * self.v])
    }
}

/// The lossless argmin with `U = Y` and `ŷ(z,u)` the closest
/// reconstruction of `u`, as a shared-kernel point.
#[allow(clippy::too_many_arguments)]
fn identity_seed(
    cols: &Columns,
    keys: &[PolicyKey],
    dkeys: &[DescKey],
    yh: usize,
    zs: usize,
    d: &[f64],
    budget: f64,
    config: &SolveConfig,
) -> Option<(usize, Vec<f64>)> {
    let general = lossless_search(cols, keys, Storage::NonCausal, budget, 0.0, config);
    let independent = lossless_search(cols, keys, Storage::Independent, budget, 0.0, config);
    let (found, storage) = match (general, independent) {
        (Some(g), Some(i)) if prefer(&i, &g) => (i, Storage::Independent),
        (Some(g), _) => (g, Storage::NonCausal),
        (None, Some(i)) => (i, Storage::Independent),
        (None, None) => return None,
    };
    let ys = cols.y;
    let spread: usize = (0..zs).fold(0, |acc, _| acc * yh + 1);
    let mut columns: Vec<(usize, usize)> = (0..ys)
        .map(|y| {
            let best = (0..yh)
                .min_by(|&a, &b| d[y * yh + a].total_cmp(&d[y * yh + b]))
                .expect("non-empty reconstruction alphabet");
            (best * spread, y)
        })
        .collect();
    columns.sort();
    let key = DescKey {
        policy: found.key,
        map: columns.iter().map(|c| c.0).collect(),
    };
    let ki = dkeys.iter().position(|k| *k == key)?;
    let mut x = Vec::new();
    storage.expand(&found.x, cols.s, &mut x);
    let mut kernel = vec![0.0; ys * ys];
    for (u, &(_, y)) in columns.iter().enumerate() {
        kernel[y * ys + u] = 1.0;
    }
    x.extend(kernel);
    Some((ki, x))
}

#[allow(clippy::too_many_arguments)]
fn description_bound(
    spec: &ProblemSpec,
    cols: &Columns,
    keys: &[PolicyKey],
    label: BoundLabel,
    budget: f64,
    target: f64,
    yh: usize,
    d: &[f64],
    config: &SolveConfig,
) -> Result<BoundResult> {
    let v_cap = config.v_cap(spec);
    let u_cap = config.u_cap(spec);
    let zs = spec.z_size();
    let map_columns = (yh as u128).checked_pow(zs as u32).unwrap_or(u128::MAX);
    let maps_total = (1..=u_cap).fold(0u128, |acc, u| {
        acc.saturating_add(multiset_count(map_columns, u as u128))
    });
    let total = maps_total.saturating_mul(keys.len() as u128);
    if total > config.policy_limit as u128 {
        return Err(Error::SearchSpace {
            count: total,
            limit: config.policy_limit as u128,
        });
    }
    let mut dkeys = Vec::new();
    for u in 1..=u_cap {
        for map in multisets(map_columns as usize, u) {
            for k in keys {
                dkeys.push(DescKey {
                    policy: k.clone(),
                    map: map.clone(),
                });
            }
        }
    }
    let filtered = label == BoundLabel::Thm6;
    let shared = |k: &DescKey| DescLand::new(cols, k, yh, zs, false, filtered, budget, target, d);
    let mut pool: Vec<(usize, usize, Candidate)> = Vec::new();
    for (ki, k) in dkeys.iter().enumerate() {
        let mut land = shared(k);
        let m = grid_resolution(land.rows(), config.grid_steps, config.bound_grid_budget);
        for c in grid_scan(&mut land, m, config.starts) {
            pool.push((ki, m, c));
        }
    }
    pool.sort_by(|a, b| search::tie_order(a.2.value, b.2.value).then(a.0.cmp(&b.0)));
    pool.truncate(config.lossy_refine_pool.max(1) * 2);
    if let Some((ki, x)) = identity_seed(cols, keys, &dkeys, yh, zs, d, budget, config) {
        let mut land = shared(&dkeys[ki]);
        if land.slack(&x) >= -search::FEASIBILITY_TOL {
            if let Some(value) = land.objective(&x) {
                pool.push((ki, config.grid_steps, Candidate { x, value }));
            }
        }
    }
    let mut best: Option<(Found<DescKey>, bool)> = None;
    for (ki, m, c) in pool {
        let key = &dkeys[ki];
        let (r, per_v) = if filtered {
            let lifted = shared(key).lift(&c.x);
            let mut land = DescLand::new(cols, key, yh, zs, true, true, budget, target, d);
            (
                refine(
                    &mut land,
                    Candidate {
                        x: lifted,
                        value: c.value,
                    },
                    1.0 / m as f64,
                    config.refine_rounds,
                ),
                true,
            )
        } else {
            (refine(&mut shared(key), c, 1.0 / m as f64, config.refine_rounds), false)
        };
        let cost = cols.nc_cost(&key.policy.cols, &r.x[..cols.s * key.policy.cols.len()]);
        let cand = Found {
            key: key.clone(),
            x: r.x,
            value: r.value,
            cost,
        };
        best = match best {
            Some((b, bp)) if !prefer(&cand, &b) => Some((b, bp)),
            _ => Some((cand, per_v)),
        };
    }
    let Some((found, per_v)) = best else {
        return Ok(BoundResult::none(
            label,
            budget,
            target,
            v_cap,
            Some(u_cap),
            "no feasible point",
        ));
    };
    let land = DescLand::new(cols, &found.key, yh, zs, per_v, filtered, budget, target, d);
    let aux = land.choice(&found.x)?;
    let joint = assemble_joint(spec, &aux, false)?;
    let check = match label {
        BoundLabel::Thm5 => bound_theorem5(&joint)?,
        _ => bound_theorem6(&joint)?,
    };
    if (check.value - found.value).abs() > config.tolerance || !check.holds {
        return Err(Error::NumericalIntegrity {
            what: "bound argmin re-evaluation gap",
            value: check.value - found.value,
        });
    }
    let achieved = expected_distortion(&joint, spec)?;
    if achieved > target + DISTORTION_SLACK {
        return Err(Error::NumericalIntegrity {
            what: "bound argmin exceeds the distortion target",
            value: achieved - target,
        });
    }
    Ok(BoundResult {
        label,
        budget,
        distortion: target,
        value: found.value,
        feasible: true,
        cost: Some(found.cost),
        achieved_distortion: Some(achieved),
        summary: aux.summary(),
        argmin: Some(aux),
        v_size_max: v_cap,
        u_size_max: Some(u_cap),
    })
}

/// Best found values of the three non-causal upper bounds at `(B, D)`.
pub fn evaluate_lossy_bounds(
    spec: &ProblemSpec,
    budget: f64,
    distortion: f64,
    config: &SolveConfig,
) -> Result<Vec<BoundResult>> {
    config.validate()?;
    check_budget(budget)?;
    let (yh, d) = check_distortion(spec, distortion)?;
    let v_cap = config.v_cap(spec);
    let u_cap = config.u_cap(spec);
    if !budget_reachable(spec, budget) {
        return Ok([BoundLabel::Thm4, BoundLabel::Thm5, BoundLabel::Thm6]
            .into_iter()
            .map(|l| {
                let u = (l != BoundLabel::Thm4).then_some(u_cap);
                BoundResult::none(
                    l,
                    budget,
                    distortion,
                    v_cap,
                    u,
                    "budget below the minimum expected cost",
                )
            })
            .collect());
    }
    let cols = Columns::new(spec, config.policy_limit as u128)?;
    let keys = policy_keys(&cols, v_cap, config.policy_limit)?;
    let thm4 = bound_theorem4_search(spec, budget, distortion, config, false)?;
    let thm5 = description_bound(spec, &cols, &keys, BoundLabel::Thm5, budget, distortion, yh, &d, config)?;
    let thm6 = description_bound(spec, &cols, &keys, BoundLabel::Thm6, budget, distortion, yh, &d, config)?;
    Ok(vec![thm4, thm5, thm6])
}
