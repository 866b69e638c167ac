//! Grid scan plus pattern-search refinement over products of simplices.

use std::cmp::Ordering;

/// A block of coordinates that must stay on the probability simplex.
/// Rows sharing a `group` also get tied moves that shift every row of the
/// group at once.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Row {
    pub offset: usize,
    pub len: usize,
    pub group: usize,
}

pub(crate) fn rows_of(groups: &[(usize, usize)]) -> Vec<Row> {
    let mut rows = Vec::new();
    let mut offset = 0;
    for (group, &(count, len)) in groups.iter().enumerate() {
        for _ in 0..count {
            rows.push(Row { offset, len, group });
            offset += len;
        }
    }
    rows
}

/// One continuous search problem for a fixed discrete structure.
pub(crate) trait Landscape {
    fn rows(&self) -> &[Row];

    /// `None` when an inner constraint cannot be met at `x`.
    fn objective(&mut self, x: &[f64]) -> Option<f64>;

    /// `min_i (bound_i - value_i)`; feasible iff `≥ -FEASIBILITY_TOL`.
    fn slack(&mut self, x: &[f64]) -> f64;

    /// When the slack is affine in `x`, boundary snapping is solved in
    /// closed form instead of by bisection.
    fn linear_slack(&self) -> bool {
        true
    }

    fn cost(&mut self, x: &[f64]) -> f64;

    fn dim(&self) -> usize {
        self.rows().iter().map(|r| r.len).sum()
    }
}

pub(crate) const FEASIBILITY_TOL: f64 = 1e-12;
const IMPROVEMENT: f64 = 1e-15;
const MAX_STEPS_PER_LEVEL: usize = 400;
const COMPENSATED: usize = 4;

fn binomial(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc.saturating_mul(n as u128 - i) / (i + 1);
    }
    acc
}

/// Number of points of the product grid at resolution `1/m`.
pub(crate) fn grid_size(rows: &[Row], m: usize) -> u128 {
    rows.iter()
        .fold(1u128, |acc, r| acc.saturating_mul(binomial(m + r.len - 1, r.len - 1)))
}

/// Largest `m ≤ steps` whose product grid has at most `budget` points (≥ 1).
pub(crate) fn grid_resolution(rows: &[Row], steps: usize, budget: usize) -> usize {
    let mut m = 1;
    while m < steps && grid_size(rows, m + 1) <= budget as u128 {
        m += 1;
    }
    m
}

/// All compositions of `m` into `len` non-negative parts.
fn compositions(m: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; len];
    fn rec(out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, i: usize, left: usize) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for k in (0..=left).rev() {
            cur[i] = k;
            rec(out, cur, i + 1, left - k);
        }
    }
    rec(&mut out, &mut cur, 0, m);
    out
}

#[derive(Clone, Debug)]
pub(crate) struct Candidate {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Scans the product grid and keeps the `keep` best feasible points.
pub(crate) fn grid_scan<L: Landscape>(land: &mut L, m: usize, keep: usize) -> Vec<Candidate> {
    let rows = land.rows().to_vec();
    let mut tables: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut table_of = Vec::with_capacity(rows.len());
    for r in &rows {
        match tables.iter().position(|t| t[0].len() == r.len) {
            Some(i) => table_of.push(i),
            None => {
                tables.push(compositions(m, r.len));
                table_of.push(tables.len() - 1);
            }
        }
    }
    let mut idx = vec![0usize; rows.len()];
    let mut x = vec![0.0; land.dim()];
    let mut best: Vec<Candidate> = Vec::with_capacity(keep + 1);
    let scale = 1.0 / m as f64;
    loop {
        for (ri, r) in rows.iter().enumerate() {
            let comp = &tables[table_of[ri]][idx[ri]];
            for (j, &k) in comp.iter().enumerate() {
                x[r.offset + j] = k as f64 * scale;
            }
        }
        if land.slack(&x) >= -FEASIBILITY_TOL {
            if let Some(value) = land.objective(&x) {
                let worst = best.last().map(|c| c.value).unwrap_or(f64::INFINITY);
                if best.len() < keep || value < worst {
                    let pos = best.partition_point(|c| c.value <= value);
                    best.insert(pos, Candidate { x: x.clone(), value });
                    best.truncate(keep);
                }
            }
        }
        let mut k = rows.len();
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < tables[table_of[k]].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

type Move = Vec<(usize, f64)>;

fn moves(rows: &[Row], x: &[f64], h: f64) -> Vec<Move> {
    let mut out = Vec::new();
    for r in rows {
        for j in 0..r.len {
            let amt = h.min(x[r.offset + j]);
            if amt <= 0.0 {
                continue;
            }
            for k in 0..r.len {
                if k != j {
                    out.push(vec![(r.offset + j, -amt), (r.offset + k, amt)]);
                }
            }
        }
    }
    let groups = rows.iter().map(|r| r.group).max().map_or(0, |g| g + 1);
    for g in 0..groups {
        let members: Vec<&Row> = rows.iter().filter(|r| r.group == g).collect();
        if members.len() < 2 {
            continue;
        }
        let len = members[0].len;
        for j in 0..len {
            for k in 0..len {
                if j == k {
                    continue;
                }
                let mut mv = Vec::with_capacity(2 * members.len());
                for r in &members {
                    let amt = h.min(x[r.offset + j]);
                    if amt > 0.0 {
                        mv.push((r.offset + j, -amt));
                        mv.push((r.offset + k, amt));
                    }
                }
                if !mv.is_empty() {
                    out.push(mv);
                }
            }
        }
    }
    out
}

fn apply(x: &[f64], mv: &[(usize, f64)], t: f64, out: &mut Vec<f64>) -> bool {
    out.clear();
    out.extend_from_slice(x);
    for &(i, d) in mv {
        out[i] += t * d;
    }
    for v in out.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-13 {
                return false;
            }
            *v = 0.0;
        }
    }
    true
}

/// Largest `t ∈ (0, 1]` keeping `x + t·mv` feasible, given feasible `x`.
fn snap<L: Landscape>(
    land: &mut L,
    x: &[f64],
    s0: f64,
    s1: f64,
    mv: &[(usize, f64)],
    buf: &mut Vec<f64>,
) -> Option<f64> {
    if land.linear_slack() {
        let t = s0.max(0.0) / (s0.max(0.0) - s1);
        return (t > 1e-12).then_some(t.min(1.0));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if apply(x, mv, mid, buf) && land.slack(buf) >= -FEASIBILITY_TOL {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo > 1e-12).then_some(lo)
}

/// Steepest-descent pattern search: at each step size, repeatedly takes
/// the best improving move among single-row transfers and tied transfers.
/// A move that improves but leaves the feasible set is shortened onto the
/// boundary, and is also tried together with slack-increasing moves so
/// the search can slide along an active constraint. The step size starts
/// at `h0` and shrinks by 4 for `rounds` further levels.
pub(crate) fn refine<L: Landscape>(land: &mut L, start: Candidate, h0: f64, rounds: usize) -> Candidate {
    let rows = land.rows().to_vec();
    let mut x = start.x;
    let mut f = start.value;
    let mut buf = Vec::with_capacity(x.len());
    let mut h = h0;
    for _ in 0..=rounds {
        for _ in 0..MAX_STEPS_PER_LEVEL {
            let s0 = land.slack(&x);
            let mvs = moves(&rows, &x, h);
            let mut best: Option<(f64, Vec<f64>)> = None;
            let consider = |value: f64, y: &[f64], best: &mut Option<(f64, Vec<f64>)>| {
                if value < f - IMPROVEMENT && best.as_ref().is_none_or(|b| value < b.0) {
                    *best = Some((value, y.to_vec()));
                }
            };
            let mut promising: Vec<(f64, usize, f64)> = Vec::new();
            let mut relief: Vec<(usize, f64)> = Vec::new();
            for (mi, mv) in mvs.iter().enumerate() {
                if !apply(&x, mv, 1.0, &mut buf) {
                    continue;
                }
                let s1 = land.slack(&buf);
                if s1 >= -FEASIBILITY_TOL {
                    if s1 > s0 {
                        relief.push((mi, s1));
                    }
                    if let Some(v) = land.objective(&buf) {
                        consider(v, &buf, &mut best);
                    }
                    continue;
                }
                let Some(v) = land.objective(&buf) else { continue };
                if v >= f - IMPROVEMENT {
                    continue;
                }
                promising.push((v, mi, s1));
                if let Some(t) = snap(land, &x, s0, s1, mv, &mut buf) {
                    if apply(&x, mv, t, &mut buf) {
                        if let Some(v) = land.objective(&buf) {
                            consider(v, &buf, &mut best);
                        }
                    }
                }
            }
            promising.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
            promising.truncate(COMPENSATED);
            for &(_, mi, s1) in &promising {
                for &(ei, se) in &relief {
                    let mut combo = mvs[mi].clone();
                    let alpha = if land.linear_slack() {
                        // s(x + d + αe) = s1 + α (se - s0)
                        let a = -s1 / (se - s0);
                        if !(a > 0.0) || a > 1.0 {
                            continue;
                        }
                        a
                    } else {
                        1.0
                    };
                    combo.extend(mvs[ei].iter().map(|&(i, d)| (i, alpha * d)));
                    if !apply(&x, &combo, 1.0, &mut buf) {
                        continue;
                    }
                    let sc = land.slack(&buf);
                    if sc >= -FEASIBILITY_TOL {
                        if let Some(v) = land.objective(&buf) {
                            consider(v, &buf, &mut best);
                        }
                    } else if let Some(t) = snap(land, &x, s0, sc, &combo, &mut buf) {
                        if apply(&x, &combo, t, &mut buf) {
                            if let Some(v) = land.objective(&buf) {
                                consider(v, &buf, &mut best);
                            }
                        }
                    }
                }
            }
            match best {
                Some((v, y)) => {
                    x = y;
                    f = v;
                }
                None => break,
            }
        }
        h /= 4.0;
    }
    Candidate { x, value: f }
}

/// Outcome of a structured search.
#[derive(Clone, Debug)]
pub(crate) struct Found<K> {
    pub key: K,
    pub x: Vec<f64>,
    pub value: f64,
    pub cost: f64,
}

pub(crate) struct SearchPlan {
    pub grid_steps: usize,
    pub grid_budget: usize,
    pub starts: usize,
    pub pool: usize,
    pub refine_rounds: usize,
}

/// Grid-scans every structure, refines the `pool` best grid points overall
/// and returns the minimum. Ties within `1e-12` go to the smaller key,
/// then to the lower cost.
pub(crate) fn search<K: Ord + Clone, L: Landscape>(
    keys: &[K],
    make: impl FnMut(&K) -> L,
    plan: &SearchPlan,
) -> Option<Found<K>> {
    search_seeded(keys, make, plan, &[])
}

/// [`search`] with extra starting points `(key index, x)` that are refined
/// in addition to the pool when feasible.
pub(crate) fn search_seeded<K: Ord + Clone, L: Landscape>(
    keys: &[K],
    mut make: impl FnMut(&K) -> L,
    plan: &SearchPlan,
    seeds: &[(usize, Vec<f64>)],
) -> Option<Found<K>> {
    let mut pool: Vec<(usize, usize, Candidate)> = Vec::new();
    for (ki, key) in keys.iter().enumerate() {
        let mut land = make(key);
        let m = grid_resolution(land.rows(), plan.grid_steps, plan.grid_budget);
        for c in grid_scan(&mut land, m, plan.starts) {
            pool.push((ki, m, c));
        }
    }
    pool.sort_by(|a, b| tie_order(a.2.value, b.2.value).then(a.0.cmp(&b.0)));
    pool.truncate(plan.pool.max(1));
    for (ki, x) in seeds {
        let mut land = make(&keys[*ki]);
        if land.slack(x) < -FEASIBILITY_TOL {
            continue;
        }
        if let Some(value) = land.objective(x) {
            pool.push((*ki, plan.grid_steps, Candidate { x: x.clone(), value }));
        }
    }
    let mut best: Option<Found<K>> = None;
    for (ki, m, c) in pool {
        let mut land = make(&keys[ki]);
        let r = refine(&mut land, c, 1.0 / m as f64, plan.refine_rounds);
        let cost = land.cost(&r.x);
        let cand = Found {
            key: keys[ki].clone(),
            x: r.x,
            value: r.value,
            cost,
        };
        best = Some(match best {
            None => cand,
            Some(b) => {
                if prefer(&cand, &b) {
                    cand
                } else {
                    b
                }
            }
        });
    }
    best
}

/// Orders values on a `1e-12` lattice so near-equal values fall back to
/// the structure order.
pub(crate) fn tie_order(a: f64, b: f64) -> Ordering {
    let q = |v: f64| (v * 1e12).round();
    q(a).partial_cmp(&q(b)).unwrap_or(Ordering::Equal)
}

pub(crate) fn prefer<K: Ord>(a: &Found<K>, b: &Found<K>) -> bool {
    if (a.value - b.value).abs() > 1e-12 {
        return a.value < b.value;
    }
    match a.key.cmp(&b.key) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.cost < b.cost,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `Σ (x_i - t_i)^2` on one simplex with `x_0 ≤ cap`.
    struct Quad {
        rows: Vec<Row>,
        target: Vec<f64>,
        cap: f64,
    }

    impl Landscape for Quad {
        fn rows(&self) -> &[Row] {
            &self.rows
        }
        fn objective(&mut self, x: &[f64]) -> Option<f64> {
            Some(x.iter().zip(&self.target).map(|(a, b)| (a - b).powi(2)).sum())
        }
        fn slack(&mut self, x: &[f64]) -> f64 {
            self.cap - x[0]
        }
        fn cost(&mut self, x: &[f64]) -> f64 {
            x[0]
        }
    }

    #[test]
    fn compositions_cover_the_simplex_grid() {
        let rows = rows_of(&[(2, 3)]);
        assert_eq!(compositions(4, 3).len(), 15);
        assert_eq!(grid_size(&rows, 4), 225);
        assert_eq!(grid_resolution(&rows, 32, 225), 4);
        assert_eq!(grid_resolution(&rows, 3, 10_000), 3);
        assert_eq!(grid_resolution(&rows_of(&[(1, 1)]), 32, 1), 32);
    }

    #[test]
    fn refinement_reaches_an_active_constraint() {
        let mut q = Quad {
            rows: rows_of(&[(1, 3)]),
            target: vec![0.7, 0.2, 0.1],
            cap: 0.33,
        };
        let cands = grid_scan(&mut q, 4, 2);
        assert_eq!(cands.len(), 2);
        let r = refine(&mut q, cands[0].clone(), 0.25, 3);
        // optimum on x0 = 0.33: remaining mass split to match (0.2, 0.1) shifted equally
        assert!((r.x[0] - 0.33).abs() < 1e-9, "{:?}", r.x);
        let expected = (0.7f64 - 0.33).powi(2) + 2.0 * (0.37f64 / 2.0).powi(2);
        assert!((r.value - expected).abs() < 1e-4, "{} vs {expected}", r.value);
    }

    #[test]
    fn unconstrained_interior_minimum() {
        let mut q = Quad {
            rows: rows_of(&[(1, 3)]),
            target: vec![0.123, 0.456, 0.421],
            cap: 1.0,
        };
        let c = grid_scan(&mut q, 4, 1).remove(0);
        let r = refine(&mut q, c, 0.25, 3);
        assert!(r.value < 1e-5);
    }
}
