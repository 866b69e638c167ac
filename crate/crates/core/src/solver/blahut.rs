//! Conditional rate-distortion by Blahut–Arimoto with one shared slope.
//!
//! Given contexts `c` with weights `w_c` and output laws `p(y|c)`, computes
//! `min Σ_c w_c I(Y;Ŷ | c)` subject to `Σ_c w_c E[d(Y,Ŷ) | c] ≤ D`. Every
//! context runs its own iteration at the same slope `λ`, which puts all of
//! them at the same slope of their own curves; `λ` is bisected until the
//! pooled distortion meets `D`.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlahutConfig {
    pub max_iter: usize,
    /// Stop when successive rate iterates differ by less than this.
    pub rate_tol: f64,
    pub lambda_max: f64,
    pub bisection_steps: usize,
}

impl Default for BlahutConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            rate_tol: 1e-9,
            lambda_max: 50.0,
            bisection_steps: 60,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct RdSolution {
    /// Bits, recomputed exactly from `kernels`.
    pub rate: f64,
    pub distortion: f64,
    /// Per context, `p(ŷ|y)` row-major `[y][ŷ]`.
    pub kernels: Vec<Vec<f64>>,
}

fn mutual_information(py: &[f64], kernel: &[f64], yh: usize) -> f64 {
    let mut q = vec![0.0; yh];
    for (y, &p) in py.iter().enumerate() {
        for j in 0..yh {
            q[j] += p * kernel[y * yh + j];
        }
    }
    let mut total = 0.0;
    for (y, &p) in py.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for j in 0..yh {
            let k = kernel[y * yh + j];
            if k > 0.0 && q[j] > 0.0 {
                total += p * k * (k / q[j]).log2();
            }
        }
    }
    total.max(0.0)
}

fn distortion_of(py: &[f64], kernel: &[f64], d: &[f64], yh: usize) -> f64 {
    let mut total = 0.0;
    for (y, &p) in py.iter().enumerate() {
        for j in 0..yh {
            total += p * kernel[y * yh + j] * d[y * yh + j];
        }
    }
    total
}

/// One context at slope `lambda`, warm-started from `q`.
fn iterate(py: &[f64], d: &[f64], yh: usize, lambda: f64, q: &mut [f64], cfg: &BlahutConfig) -> Vec<f64> {
    let ys = py.len();
    let mut kernel = vec![0.0; ys * yh];
    let mut last = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        for y in 0..ys {
            let row = &mut kernel[y * yh..(y + 1) * yh];
            let base = (0..yh).map(|j| d[y * yh + j]).fold(f64::INFINITY, f64::min);
            let mut z = 0.0;
            for j in 0..yh {
                row[j] = q[j] * (-lambda * (d[y * yh + j] - base)).exp();
                z += row[j];
            }
            if z > 0.0 {
                row.iter_mut().for_each(|v| *v /= z);
            } else {
                row.iter_mut().for_each(|v| *v = 1.0 / yh as f64);
            }
        }
        q.iter_mut().for_each(|v| *v = 0.0);
        for y in 0..ys {
            for j in 0..yh {
                q[j] += py[y] * kernel[y * yh + j];
            }
        }
        let rate = mutual_information(py, &kernel, yh);
        if (rate - last).abs() < cfg.rate_tol {
            break;
        }
        last = rate;
    }
    kernel
}

struct Pooled {
    rate: f64,
    distortion: f64,
    kernels: Vec<Vec<f64>>,
}

fn at_slope(
    contexts: &[(f64, Vec<f64>)],
    d: &[f64],
    yh: usize,
    lambda: f64,
    qs: &mut [Vec<f64>],
    cfg: &BlahutConfig,
) -> Pooled {
    let mut rate = 0.0;
    let mut distortion = 0.0;
    let mut kernels = Vec::with_capacity(contexts.len());
    for ((w, py), q) in contexts.iter().zip(qs.iter_mut()) {
        if *w <= 0.0 {
            kernels.push(vec![1.0 / yh as f64; py.len() * yh]);
            continue;
        }
        let k = iterate(py, d, yh, lambda, q, cfg);
        rate += w * mutual_information(py, &k, yh);
        distortion += w * distortion_of(py, &k, d, yh);
        kernels.push(k);
    }
    Pooled {
        rate,
        distortion,
        kernels,
    }
}

/// Smallest pooled distortion any reconstruction can reach.
pub(crate) fn min_distortion(contexts: &[(f64, Vec<f64>)], d: &[f64], yh: usize) -> f64 {
    contexts
        .iter()
        .map(|(w, py)| {
            w * py
                .iter()
                .enumerate()
                .map(|(y, p)| p * (0..yh).map(|j| d[y * yh + j]).fold(f64::INFINITY, f64::min))
                .sum::<f64>()
        })
        .sum()
}

/// `None` when `target` is below the smallest distortion reached at
/// `lambda_max`, by more than `tol`, the accepted overshoot.
pub(crate) fn conditional_rd(
    contexts: &[(f64, Vec<f64>)],
    d: &[f64],
    yh: usize,
    target: f64,
    tol: f64,
    cfg: &BlahutConfig,
) -> Option<RdSolution> {
    // a constant reconstruction per context costs no rate
    let mut constant = Vec::with_capacity(contexts.len());
    let mut zero_rate_distortion = 0.0;
    for (w, py) in contexts {
        let ys = py.len();
        let (best, e) = (0..yh)
            .map(|j| (j, (0..ys).map(|y| py[y] * d[y * yh + j]).sum::<f64>()))
            .fold((0, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
        zero_rate_distortion += w * e;
        let mut k = vec![0.0; ys * yh];
        for y in 0..ys {
            k[y * yh + best] = 1.0;
        }
        constant.push(k);
    }
    if zero_rate_distortion <= target {
        return Some(RdSolution {
            rate: 0.0,
            distortion: zero_rate_distortion,
            kernels: constant,
        });
    }
    if min_distortion(contexts, d, yh) > target + tol {
        return None;
    }
    let mut qs: Vec<Vec<f64>> = contexts.iter().map(|_| vec![1.0 / yh as f64; yh]).collect();
    let top = at_slope(contexts, d, yh, cfg.lambda_max, &mut qs, cfg);
    if top.distortion > target + tol {
        return None;
    }
    if top.distortion > target {
        return Some(RdSolution {
            rate: top.rate,
            distortion: top.distortion,
            kernels: top.kernels,
        });
    }
    let (mut lo, mut hi) = (0.0, cfg.lambda_max);
    let mut feasible = top;
    let mut q_hi = qs.clone();
    for _ in 0..cfg.bisection_steps {
        let mid = 0.5 * (lo + hi);
        let mut q = q_hi.clone();
        let p = at_slope(contexts, d, yh, mid, &mut q, cfg);
        if p.distortion <= target {
            hi = mid;
            feasible = p;
            q_hi = q;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-9 * hi.max(1.0) {
            break;
        }
    }
    Some(RdSolution {
        rate: feasible.rate,
        distortion: feasible.distortion,
        kernels: feasible.kernels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::h2;

    const HAMMING: [f64; 4] = [0.0, 1.0, 1.0, 0.0];

    #[test]
    fn binary_source_hamming_curve() {
        let cfg = BlahutConfig::default();
        for (q, dd) in [(0.5, 0.1), (0.3, 0.05), (0.5, 0.25)] {
            let ctx = vec![(1.0, vec![1.0 - q, q])];
            let s = conditional_rd(&ctx, &HAMMING, 2, dd, 1e-6, &cfg).unwrap();
            assert!((s.rate - (h2(q) - h2(dd))).abs() < 1e-5, "q={q} D={dd}: {}", s.rate);
            assert!(s.distortion <= dd + 1e-12);
        }
    }

    #[test]
    fn zero_rate_and_infeasible_cases() {
        let cfg = BlahutConfig::default();
        let ctx = vec![(0.5, vec![0.8, 0.2]), (0.5, vec![0.5, 0.5])];
        let s = conditional_rd(&ctx, &HAMMING, 2, 0.35, 1e-6, &cfg).unwrap();
        assert_eq!(s.rate, 0.0);
        assert!((s.distortion - 0.35).abs() < 1e-12);

        // distortion can never go below 0.5 here
        let d = [0.5, 1.0, 1.0, 0.5];
        assert!(conditional_rd(&ctx, &d, 2, 0.2, 1e-6, &cfg).is_none());
    }

    #[test]
    fn zero_distortion_recovers_conditional_entropy() {
        let cfg = BlahutConfig::default();
        let ctx = vec![(0.4, vec![0.9, 0.1]), (0.6, vec![0.5, 0.5])];
        let s = conditional_rd(&ctx, &HAMMING, 2, 0.0, 1e-6, &cfg).unwrap();
        let h = 0.4 * h2(0.1) + 0.6;
        assert!((s.rate - h).abs() < 1e-6, "{} vs {h}", s.rate);
    }

    #[test]
    fn pooled_contexts_share_the_slope() {
        // two identical contexts behave like one
        let cfg = BlahutConfig::default();
        let one = conditional_rd(&[(1.0, vec![0.7, 0.3])], &HAMMING, 2, 0.1, 1e-6, &cfg).unwrap();
        let two = conditional_rd(
            &[(0.5, vec![0.7, 0.3]), (0.5, vec![0.7, 0.3])],
            &HAMMING,
            2,
            0.1,
            1e-6,
            &cfg,
        )
        .unwrap();
        assert!((one.rate - two.rate).abs() < 1e-9);
    }
}
