//! Per-column tables for fast objective evaluation.
//!
//! With `a = f(s,v)`, everything the lossless objectives need about one
//! value `v` is the column `s ↦ f(s,v)` and the weights `p(v|s)`; the joint
//! `p(y,v,z)` only mixes terms from the same column. Writing
//!
//! * non-causal: `I(V;S|Z) + H(Y|V,Z) = H(Y,V,Z) - H(Z) - H(V|S)`
//! * causal: `H(Y|V,Z) = Σ_v p(v) H(Y,Z | v) - H(Z)`
//!
//! both objectives and the expected cost become sums of per-column terms.

use crate::error::{Error, Result};
use crate::info::{entropy_bits, ConditionalKernel, DiscreteDistribution};
use crate::model::{reduced_cost, ActionPolicy, AuxiliaryChoice, ProblemSpec, VariableKernel};

pub(crate) fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Number of non-decreasing sequences of length `k` over `n` symbols.
pub(crate) fn multiset_count(n: u128, k: u128) -> u128 {
    // C(n + k - 1, k), saturating
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n + i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All non-decreasing sequences of length `k` over `0..n`, lexicographic.
pub(crate) fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut cur = vec![0usize; k];
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] + 1 < n {
                let next = cur[i] + 1;
                for c in cur[i..].iter_mut() {
                    *c = next;
                }
                break;
            }
        }
    }
}

pub(crate) struct Columns {
    pub s: usize,
    pub z: usize,
    pub y: usize,
    pub count: usize,
    pub p_sz: Vec<f64>,
    pub p_s: Vec<f64>,
    pub h_z: f64,
    actions: Vec<usize>,
    unit_cost: Vec<f64>,
    chan: Vec<f64>,
    causal_h: Vec<f64>,
    causal_cost: Vec<f64>,
}

impl Columns {
    /// Fails when `|A|^|S|` exceeds `limit`.
    pub fn new(spec: &ProblemSpec, limit: u128) -> Result<Self> {
        let (s, z, a, y) = (spec.s_size(), spec.z_size(), spec.a_size(), spec.y_size());
        let count = (a as u128).checked_pow(s as u32).unwrap_or(u128::MAX);
        if count > limit {
            return Err(Error::SearchSpace { count, limit });
        }
        let count = count as usize;
        let reduced = reduced_cost(spec);
        let p_sz: Vec<f64> = (0..s)
            .flat_map(|si| (0..z).map(move |zi| (si, zi)))
            .map(|(si, zi)| spec.state_prob(si, zi))
            .collect();
        let p_s = spec.state_marginal();
        let mut p_z = vec![0.0; z];
        for si in 0..s {
            for zi in 0..z {
                p_z[zi] += p_sz[si * z + zi];
            }
        }
        let h_z = entropy_bits(&p_z);
        let mut actions = vec![0; count * s];
        let mut unit_cost = vec![0.0; count * s];
        let mut chan = vec![0.0; count * s * y];
        let mut causal_h = vec![0.0; count];
        let mut causal_cost = vec![0.0; count];
        let mut r = vec![0.0; y * z];
        for c in 0..count {
            let mut rest = c;
            for si in (0..s).rev() {
                actions[c * s + si] = rest % a;
                rest /= a;
            }
            r.iter_mut().for_each(|x| *x = 0.0);
            for si in 0..s {
                let ai = actions[c * s + si];
                unit_cost[c * s + si] = reduced[si * a + ai];
                causal_cost[c] += p_s[si] * reduced[si * a + ai];
                for yi in 0..y {
                    let py = spec.channel_prob(ai, si, yi);
                    chan[(c * s + si) * y + yi] = py;
                    for zi in 0..z {
                        r[yi * z + zi] += p_sz[si * z + zi] * py;
                    }
                }
            }
            causal_h[c] = entropy_bits(&r);
        }
        Ok(Self {
            s,
            z,
            y,
            count,
            p_sz,
            p_s,
            h_z,
            actions,
            unit_cost,
            chan,
            causal_h,
            causal_cost,
        })
    }

    pub fn action(&self, c: usize, s: usize) -> usize {
        self.actions[c * self.s + s]
    }

    /// `p(y | a = c(s), s)`.
    pub fn chan(&self, c: usize, s: usize) -> &[f64] {
        let o = (c * self.s + s) * self.y;
        &self.chan[o..o + self.y]
    }

    pub fn policy(&self, cols: &[usize]) -> ActionPolicy {
        let v = cols.len();
        let mut table = vec![0; self.s * v];
        for si in 0..self.s {
            for (vi, &c) in cols.iter().enumerate() {
                table[si * v + vi] = self.action(c, si);
            }
        }
        ActionPolicy::from_table_unchecked(self.s, v, table)
    }

    /// `-Σ q log q + Σ_s p(s) w_s log w_s` for one column with weights
    /// `w_s = p(v|s)`, `q(y,z) = Σ_s p(s,z) w_s p(y|c(s),s)`.
    pub fn nc_term(&self, c: usize, w: impl Fn(usize) -> f64, scratch: &mut [f64]) -> f64 {
        let (ys, zs) = (self.y, self.z);
        let q = &mut scratch[..ys * zs];
        q.iter_mut().for_each(|x| *x = 0.0);
        let mut self_info = 0.0;
        let mut any = false;
        for si in 0..self.s {
            let ws = w(si);
            if ws <= 0.0 {
                continue;
            }
            any = true;
            self_info += self.p_s[si] * xlog2x(ws);
            let row = self.chan(c, si);
            for zi in 0..zs {
                let pz = self.p_sz[si * zs + zi] * ws;
                if pz == 0.0 {
                    continue;
                }
                for yi in 0..ys {
                    q[yi * zs + zi] += pz * row[yi];
                }
            }
        }
        if !any {
            return 0.0;
        }
        -q.iter().map(|&x| xlog2x(x)).sum::<f64>() + self_info
    }

    pub fn nc_cost_term(&self, c: usize, w: impl Fn(usize) -> f64) -> f64 {
        (0..self.s)
            .map(|si| self.p_s[si] * w(si) * self.unit_cost[c * self.s + si])
            .sum()
    }

    pub fn scratch(&self) -> Vec<f64> {
        vec![0.0; self.y * self.z]
    }

    /// Non-causal objective for `w` stored `[s][v]`.
    pub fn nc_objective(&self, cols: &[usize], w: &[f64], scratch: &mut [f64]) -> f64 {
        let v = cols.len();
        let total: f64 = cols
            .iter()
            .enumerate()
            .map(|(vi, &c)| self.nc_term(c, |si| w[si * v + vi], scratch))
            .sum();
        (total - self.h_z).max(0.0)
    }

    pub fn nc_cost(&self, cols: &[usize], w: &[f64]) -> f64 {
        let v = cols.len();
        cols.iter()
            .enumerate()
            .map(|(vi, &c)| self.nc_cost_term(c, |si| w[si * v + vi]))
            .sum()
    }

    /// `H(Y,Z | column c)`, so that the causal objective is
    /// `Σ_v w_v H_c - H(Z)`.
    pub fn causal_entropy(&self, c: usize) -> f64 {
        self.causal_h[c]
    }

    pub fn causal_unit_cost(&self, c: usize) -> f64 {
        self.causal_cost[c]
    }

    pub fn causal_objective(&self, cols: &[usize], w: &[f64]) -> f64 {
        let total: f64 = cols.iter().zip(w).map(|(&c, &wv)| wv * self.causal_h[c]).sum();
        (total - self.h_z).max(0.0)
    }

    pub fn causal_cost(&self, cols: &[usize], w: &[f64]) -> f64 {
        cols.iter().zip(w).map(|(&c, &wv)| wv * self.causal_cost[c]).sum()
    }

    /// Joint `p(y, v, z)` as `[v][z][y]` rows with weights `p(v,z)`, for
    /// either storage of `w`.
    pub fn contexts(&self, cols: &[usize], w: &[f64], causal: bool) -> Vec<(f64, Vec<f64>)> {
        let v = cols.len();
        let mut out = Vec::with_capacity(v * self.z);
        for (vi, &c) in cols.iter().enumerate() {
            for zi in 0..self.z {
                let mut row = vec![0.0; self.y];
                for si in 0..self.s {
                    let ws = if causal { w[vi] } else { w[si * v + vi] };
                    let pz = self.p_sz[si * self.z + zi] * ws;
                    if pz == 0.0 {
                        continue;
                    }
                    for (yi, p) in self.chan(c, si).iter().enumerate() {
                        row[yi] += pz * p;
                    }
                }
                let weight: f64 = row.iter().sum();
                if weight > 0.0 {
                    row.iter_mut().for_each(|x| *x /= weight);
                }
                out.push((weight, row));
            }
        }
        out
    }

    /// `I(V;S|Z) = H(V,Z) - H(Z) - H(V|S)` for non-causal `w`.
    pub fn nc_state_information(&self, v: usize, w: &[f64]) -> f64 {
        let mut p_vz = vec![0.0; v * self.z];
        let mut h_v_s = 0.0;
        for si in 0..self.s {
            for vi in 0..v {
                let ws = w[si * v + vi];
                h_v_s -= self.p_s[si] * xlog2x(ws);
                for zi in 0..self.z {
                    p_vz[vi * self.z + zi] += self.p_sz[si * self.z + zi] * ws;
                }
            }
        }
        (entropy_bits(&p_vz) - self.h_z - h_v_s).max(0.0)
    }

    pub fn choice(&self, cols: &[usize], w: &[f64], causal: bool) -> Result<AuxiliaryChoice> {
        let v = cols.len();
        let policy = self.policy(cols);
        let kernel = if causal {
            VariableKernel::Causal(DiscreteDistribution::normalized(w.to_vec(), 1e-9)?)
        } else {
            let mut rows = Vec::with_capacity(self.s);
            for si in 0..self.s {
                rows.push(DiscreteDistribution::normalized(
                    w[si * v..(si + 1) * v].to_vec(),
                    1e-9,
                )?);
            }
            VariableKernel::NonCausal(ConditionalKernel::from_rows(vec![self.s], rows)?)
        };
        Ok(AuxiliaryChoice::lossless(kernel, policy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::{binary_example_spec, erased_example_spec, lemma1_choice, lemma2_choice};
    use crate::model::{assemble_joint, objective_theorem1, objective_theorem2};

    #[test]
    fn multisets_are_counted_and_sorted() {
        for (n, k) in [(4, 1), (4, 3), (3, 4), (1, 5)] {
            let all = multisets(n, k);
            assert_eq!(all.len() as u128, multiset_count(n as u128, k as u128));
            assert!(all.windows(2).all(|p| p[0] < p[1]));
            assert!(all.iter().all(|m| m.windows(2).all(|p| p[0] <= p[1])));
        }
        assert_eq!(multiset_count(4, 4), 35);
        assert_eq!(multiset_count(u128::MAX / 2, 3), u128::MAX);
    }

    #[test]
    fn column_order_is_lexicographic() {
        let spec = binary_example_spec(0.1).unwrap();
        let cols = Columns::new(&spec, 1 << 20).unwrap();
        let as_vec: Vec<Vec<usize>> = (0..cols.count)
            .map(|c| (0..2).map(|s| cols.action(c, s)).collect())
            .collect();
        assert_eq!(as_vec, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn fast_objectives_match_assembled_joints() {
        let spec = erased_example_spec(0.1, 0.4).unwrap();
        let cols = Columns::new(&spec, 1 << 20).unwrap();
        let mut scratch = cols.scratch();
        let aux = lemma1_choice(0.7, 0.2).unwrap();
        let w: Vec<f64> = match &aux.v {
            VariableKernel::NonCausal(k) => k.flat().to_vec(),
            _ => unreachable!(),
        };
        let c = [1, 2, 0];
        let j = assemble_joint(&spec, &aux, false).unwrap();
        let fast = cols.nc_objective(&c, &w, &mut scratch);
        assert!((fast - objective_theorem1(&j).unwrap()).abs() < 1e-12);
        let choice = cols.choice(&c, &w, false).unwrap();
        assert_eq!(choice, aux);

        let aux = lemma2_choice(0.3).unwrap();
        let j = assemble_joint(&spec, &aux, true).unwrap();
        let fast = cols.causal_objective(&[1, 0], &[0.3, 0.7]);
        assert!((fast - objective_theorem2(&j).unwrap()).abs() < 1e-12);
        assert!((cols.causal_cost(&[1, 0], &[0.3, 0.7]) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn column_limit_is_enforced() {
        let spec = binary_example_spec(0.1).unwrap();
        assert!(matches!(
            Columns::new(&spec, 3),
            Err(Error::SearchSpace { count: 4, limit: 3 })
        ));
    }
}
