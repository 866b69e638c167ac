//! Curves over budgets, their lower convex envelope, and the Lagrangian
//! cross-check.

use serde::{Deserialize, Serialize};

use super::columns::Columns;
use super::{lossless_search, policy_keys, search, solve, Mode, PointStatus, RateCostPoint, SolveConfig, Storage};
use crate::error::{usage, Result};
use crate::model::ProblemSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct RateCurve {
    pub mode: Mode,
    pub points: Vec<RateCostPoint>,
    pub envelope_applied: bool,
}

/// Solves every budget (strictly increasing) and replaces the feasible
/// points by their non-increasing lower convex envelope.
pub fn trace_curve(spec: &ProblemSpec, budgets: &[f64], mode: Mode, config: &SolveConfig) -> Result<RateCurve> {
    if budgets.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(usage("budgets must be strictly increasing"));
    }
    let mut points = budgets
        .iter()
        .map(|&b| solve(spec, b, mode, config))
        .collect::<Result<Vec<_>>>()?;
    lower_envelope(&mut points);
    Ok(RateCurve {
        mode,
        points,
        envelope_applied: true,
    })
}

/// In place, over feasible points sorted by budget: a solution for a
/// smaller budget stays feasible for a larger one, so rates are first made
/// non-increasing; points above the lower convex hull are then replaced by
/// time sharing of their hull neighbours. Infeasible points are untouched.
pub fn lower_envelope(points: &mut [RateCostPoint]) {
    let feasible: Vec<usize> = (0..points.len()).filter(|&i| points[i].is_feasible()).collect();
    for w in 1..feasible.len() {
        let (prev, cur) = (feasible[w - 1], feasible[w]);
        if points[cur].rate > points[prev].rate {
            let carried = points[prev].clone();
            let p = &mut points[cur];
            p.rate = carried.rate;
            p.cost = carried.cost;
            p.achieved_distortion = carried.achieved_distortion;
            p.argmin = carried.argmin;
            p.summary = carried.summary;
            p.status = carried.status;
        }
    }
    let mut hull: Vec<usize> = Vec::new();
    for &i in &feasible {
        while hull.len() >= 2 {
            let (a, b) = (&points[hull[hull.len() - 2]], &points[hull[hull.len() - 1]]);
            let c = &points[i];
            let cross = (b.budget - a.budget) * (c.rate - a.rate) - (b.rate - a.rate) * (c.budget - a.budget);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    for seg in hull.windows(2) {
        let (l, r) = (seg[0], seg[1]);
        let (bl, rl, br, rr) = (points[l].budget, points[l].rate, points[r].budget, points[r].rate);
        for &i in feasible.iter().filter(|&&i| i > l && i < r) {
            let t = (points[i].budget - bl) / (br - bl);
            let chord = rl + t * (rr - rl);
            if points[i].rate > chord + 1e-12 {
                let p = &mut points[i];
                p.rate = chord;
                p.status = PointStatus::Interpolated;
                p.cost = None;
                p.achieved_distortion = None;
                p.argmin = None;
                p.summary = format!("time sharing of B={bl} and B={br}");
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LagrangePoint {
    pub lambda: f64,
    /// `min [rate + λ·cost]`.
    pub value: f64,
    pub rate: f64,
    pub cost: f64,
}

/// Unconstrained minima of `rate + λ·cost` for every multiplier in
/// `config.lagrange_sweep`; lossless modes only.
pub fn lagrangian_sweep(spec: &ProblemSpec, mode: Mode, config: &SolveConfig) -> Result<Vec<LagrangePoint>> {
    config.validate()?;
    let storages: &[Storage] = match mode {
        Mode::NonCausal => &[Storage::NonCausal, Storage::Independent],
        Mode::Causal => &[Storage::Causal],
        Mode::LossyCausal { .. } => return Err(usage("the Lagrangian sweep covers the lossless modes")),
    };
    let cols = Columns::new(spec, config.policy_limit as u128)?;
    let keys = policy_keys(&cols, config.v_cap(spec), config.policy_limit)?;
    let mut out = Vec::with_capacity(config.lagrange_sweep.len());
    for &lambda in &config.lagrange_sweep {
        let mut best: Option<search::Found<_>> = None;
        for &st in storages {
            if let Some(f) = lossless_search(&cols, &keys, st, f64::INFINITY, lambda, config) {
                best = match best {
                    Some(b) if !search::prefer(&f, &b) => Some(b),
                    _ => Some(f),
                };
            }
        }
        if let Some(b) = best {
            let rate = if lambda > 0.0 {
                b.value - lambda * b.cost
            } else {
                b.value
            };
            out.push(LagrangePoint {
                lambda,
                value: rate + lambda * b.cost,
                rate,
                cost: b.cost,
            });
        }
    }
    Ok(out)
}

/// `max_λ [g(λ) - λB]`, the dual lower estimate of `R(B)` from a sweep.
pub fn dual_bound(sweep: &[LagrangePoint], budget: f64) -> f64 {
    sweep
        .iter()
        .map(|p| p.value - p.lambda * budget)
        .fold(f64::NEG_INFINITY, f64::max)
}
