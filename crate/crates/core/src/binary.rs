//! Closed forms for the binary example.
//!
//! The state is a fair bit `S`, the action `A` is a bit whose frequency is
//! the cost (`E A ≤ B`), and the output is `Y = S ⊕ A ⊕ N` with
//! `N ~ Bern(p)`, `p < 1/2`. Without side information the non-causal
//! rate-cost function has a linear piece up to a threshold `b*` and a curved
//! piece `1 - H₂(B) + H₂(p)` after it; the causal one is the chord
//! `2B·H₂(p) + 1 - 2B`. With an erased copy of `S` at the decoder both
//! curves mix with `H₂(p)` in proportion to the erasure probability.
//!
//! The module also builds the corresponding [`ProblemSpec`]s and the
//! structured auxiliary choices used by the parametric reductions, so the
//! general solver can be checked against everything here.

use crate::error::{Error, Result};
use crate::info::{h2, ConditionalKernel, DiscreteDistribution, JointTable};
use crate::model::{ActionPolicy, Alphabets, AuxiliaryChoice, ProblemSpec, VariableKernel};

/// Default number of `Δ` samples in [`lemma1_parametric_min`] (resolution 1e-4 on `[0, 1/2]`).
pub const DEFAULT_DELTA_GRID: usize = 5000;

const BRACKET_EPS: f64 = 1e-12;

/// Parameters of one binary-example instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinaryExample {
    pub p: f64,
    pub pe: Option<f64>,
    pub budget: f64,
}

impl BinaryExample {
    pub fn new(p: f64, pe: Option<f64>, budget: f64) -> Result<Self> {
        check_p(p)?;
        if let Some(pe) = pe {
            check_pe(pe)?;
        }
        check_budget(budget)?;
        Ok(Self { p, pe, budget })
    }

    pub fn rate_noncausal(&self) -> Result<f64> {
        match self.pe {
            Some(pe) => rate_erased_noncausal(self.budget, self.p, pe),
            None => rate_noncausal_binary(self.budget, self.p),
        }
    }

    pub fn rate_causal(&self) -> Result<f64> {
        match self.pe {
            Some(pe) => rate_erased_causal(self.budget, self.p, pe),
            None => rate_causal_binary(self.budget, self.p),
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::Domain {
            param: "p",
            value: p,
            expected: "0 <= p < 1/2",
        });
    }
    Ok(())
}

fn check_pe(pe: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&pe) {
        return Err(Error::Domain {
            param: "pe",
            value: pe,
            expected: "0 <= pe <= 1",
        });
    }
    Ok(())
}

fn check_budget(b: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&b) {
        return Err(Error::Domain {
            param: "B",
            value: b,
            expected: "0 <= B <= 1/2",
        });
    }
    Ok(())
}

/// `g(b) = H₂(b) - H₂(p) - b·log₂((1-b)/b)`; its root in `(p, 1/2)` is `b*`.
fn tangency_gap(b: f64, hp: f64) -> f64 {
    h2(b) - hp - b * ((1.0 - b) / b).log2()
}

/// Threshold where the chord from `(0, H₂(p))` touches `H₂`: the `b` solving
/// `(H₂(b) - H₂(p)) / b = dH₂/db`, found by bisection on `(p, 1/2)`.
pub fn bstar(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::Domain {
            param: "p",
            value: p,
            expected: "0 < p < 1/2",
        });
    }
    let hp = h2(p);
    let (mut lo, mut hi) = (p + BRACKET_EPS, 0.5 - BRACKET_EPS);
    let (g_lo, g_hi) = (tangency_gap(lo, hp), tangency_gap(hi, hp));
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(Error::NumericalIntegrity {
            what: "b* bracket has no sign change",
            value: g_lo * g_hi,
        });
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if tangency_gap(mid, hp) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Non-causal rate-cost function without side information.
pub fn rate_noncausal_binary(budget: f64, p: f64) -> Result<f64> {
    check_budget(budget)?;
    check_p(p)?;
    let hp = h2(p);
    if p == 0.0 {
        return Ok(1.0 - h2(budget));
    }
    let b = bstar(p)?;
    Ok(if budget < b {
        1.0 - budget * (h2(b) - hp) / b
    } else {
        1.0 - h2(budget) + hp
    })
}

/// Causal rate-cost function without side information.
pub fn rate_causal_binary(budget: f64, p: f64) -> Result<f64> {
    if !(budget >= 0.0) {
        return Err(Error::Domain {
            param: "B",
            value: budget,
            expected: "B >= 0",
        });
    }
    check_p(p)?;
    let hp = h2(p);
    Ok(if budget <= 0.5 {
        2.0 * budget * hp + (1.0 - 2.0 * budget)
    } else {
        hp
    })
}

/// Non-causal rate with an erased copy of `S` at the decoder.
///
/// The budget enters the inner no-side-information problem unchanged
/// (the cost only involves `(S, A)`); budgets above 1/2 act as 1/2.
pub fn rate_erased_noncausal(budget: f64, p: f64, pe: f64) -> Result<f64> {
    check_pe(pe)?;
    if !(budget >= 0.0) {
        return Err(Error::Domain {
            param: "B",
            value: budget,
            expected: "B >= 0",
        });
    }
    let inner = rate_noncausal_binary(budget.min(0.5), p)?;
    Ok(pe * inner + (1.0 - pe) * h2(p))
}

/// Causal rate with an erased copy of `S` at the decoder.
pub fn rate_erased_causal(budget: f64, p: f64, pe: f64) -> Result<f64> {
    check_pe(pe)?;
    let inner = rate_causal_binary(budget, p)?;
    Ok(pe * inner + (1.0 - pe) * h2(p))
}

/// Minimizer of the structured non-causal family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma1Min {
    pub value: f64,
    pub theta: f64,
    pub delta: f64,
}

/// Value of `θ(H₂(p) - H₂(Δ)) + 1` at the best `θ ≤ min(1, B/Δ)` for this `Δ`.
fn structured_value(delta: f64, budget: f64, hp: f64) -> (f64, f64) {
    let gain = h2(delta) - hp;
    if gain <= 0.0 {
        return (1.0, 0.0);
    }
    let theta = if delta <= budget { 1.0 } else { budget / delta };
    (1.0 - theta * gain, theta)
}

/// Minimizes `θ(H₂(p) - H₂(Δ)) + 1` over `θ ∈ [0,1]`, `Δ ∈ [0,1/2]`,
/// `θΔ ≤ B`: a `Δ` grid of `grid + 1` points, the analytic best `θ` for
/// each `Δ`, then golden-section refinement around the best grid point.
pub fn lemma1_parametric_min(budget: f64, p: f64, grid: usize) -> Result<Lemma1Min> {
    if !(budget >= 0.0) {
        return Err(Error::Domain {
            param: "B",
            value: budget,
            expected: "B >= 0",
        });
    }
    check_p(p)?;
    let grid = grid.max(2);
    let hp = h2(p);
    let step = 0.5 / grid as f64;
    let mut best = Lemma1Min {
        value: 1.0,
        theta: 0.0,
        delta: 0.0,
    };
    let mut best_k = 0;
    for k in 0..=grid {
        let delta = k as f64 * step;
        let (value, theta) = structured_value(delta, budget, hp);
        if value < best.value {
            best = Lemma1Min { value, theta, delta };
            best_k = k;
        }
    }
    if best.theta == 0.0 {
        return Ok(best);
    }
    // golden-section on the bracket around the best grid point
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut lo = (best_k as f64 - 1.0).max(0.0) * step;
    let mut hi = ((best_k as f64 + 1.0) * step).min(0.5);
    let f = |d: f64| structured_value(d, budget, hp).0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-14 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    for delta in [lo, hi, 0.5 * (lo + hi)] {
        let (value, theta) = structured_value(delta, budget, hp);
        if value < best.value {
            best = Lemma1Min { value, theta, delta };
        }
    }
    Ok(best)
}

/// Minimizes `θH₂(p) + (1-θ)` over `θ ≤ min(1, 2B)`; returns `(value, θ*)`.
pub fn lemma2_parametric_min(budget: f64, p: f64) -> Result<(f64, f64)> {
    if !(budget >= 0.0) {
        return Err(Error::Domain {
            param: "B",
            value: budget,
            expected: "B >= 0",
        });
    }
    check_p(p)?;
    let theta = (2.0 * budget).min(1.0);
    Ok((theta * h2(p) + (1.0 - theta), theta))
}

fn binary_channel_spec(p: f64, state_joint: JointTable, z: usize) -> Result<ProblemSpec> {
    check_p(p)?;
    // channel[a][s][y]: y = s xor a with probability 1 - p
    let mut channel = Vec::with_capacity(8);
    let mut cost = Vec::with_capacity(8);
    for a in 0..2 {
        for s in 0..2 {
            for y in 0..2 {
                channel.push(if y == s ^ a { 1.0 - p } else { p });
                cost.push(a as f64);
            }
        }
    }
    ProblemSpec::new(
        Alphabets {
            s: 2,
            z,
            a: 2,
            y: 2,
            yhat: Some(2),
            u: None,
        },
        state_joint,
        ConditionalKernel::new(vec![2, 2], 2, channel)?,
        cost,
        Some(vec![0.0, 1.0, 1.0, 0.0]),
    )
}

/// The binary example without side information (`|Z| = 1`), with Hamming
/// distortion on `Y`.
pub fn binary_example_spec(p: f64) -> Result<ProblemSpec> {
    binary_channel_spec(p, JointTable::new(vec![2, 1], vec![0.5, 0.5])?, 1)
}

/// The binary example with `Z = S` w.p. `1 - pe` and `Z = e` (symbol 2)
/// otherwise.
pub fn erased_example_spec(p: f64, pe: f64) -> Result<ProblemSpec> {
    check_pe(pe)?;
    let keep = (1.0 - pe) / 2.0;
    let erased = pe / 2.0;
    // axes (s, z) with z in {0, 1, e}
    let state = vec![keep, 0.0, erased, 0.0, keep, erased];
    binary_channel_spec(p, JointTable::new(vec![2, 3], state)?, 3)
}

/// The structured non-causal choice: `V ∈ {0,1,2}`, `P(V=0) = P(V=1) = θ/2`,
/// `f(s,0) = s`, `f(s,1) = 1-s`, `f(s,2) = 0`, `P(S=1|V=0) = P(S=0|V=1) = Δ`
/// and `P(S=0|V=2) = 1/2`, written as `p(v|s)` for a fair `S`.
pub fn lemma1_choice(theta: f64, delta: f64) -> Result<AuxiliaryChoice> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Domain {
            param: "theta",
            value: theta,
            expected: "0 <= theta <= 1",
        });
    }
    if !(0.0..=0.5).contains(&delta) {
        return Err(Error::Domain {
            param: "delta",
            value: delta,
            expected: "0 <= delta <= 1/2",
        });
    }
    let rows = vec![
        theta * (1.0 - delta),
        theta * delta,
        1.0 - theta,
        theta * delta,
        theta * (1.0 - delta),
        1.0 - theta,
    ];
    let kernel = ConditionalKernel::new(vec![2], 3, rows)?;
    let policy = ActionPolicy::from_columns(&[vec![0, 1], vec![1, 0], vec![0, 0]], 2)?;
    Ok(AuxiliaryChoice::lossless(VariableKernel::NonCausal(kernel), policy))
}

/// The structured causal choice: `V ∈ {0,1}`, `P(V=0) = θ`, `f(s,0) = s`,
/// `f(s,1) = 0`.
pub fn lemma2_choice(theta: f64) -> Result<AuxiliaryChoice> {
    let v = DiscreteDistribution::new(vec![theta, 1.0 - theta])?;
    let policy = ActionPolicy::from_columns(&[vec![0, 1], vec![0, 0]], 2)?;
    Ok(AuxiliaryChoice::lossless(VariableKernel::Causal(v), policy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::binary_entropy_derivative;
    use crate::model::{assemble_joint, expected_cost, objective_theorem1, objective_theorem2};

    const P: f64 = 0.1;

    #[test]
    fn bstar_satisfies_tangency() {
        for p in [0.01, 0.05, 0.1, 0.2, 0.3, 0.45] {
            let b = bstar(p).unwrap();
            assert!(b > p && b < 0.5, "p = {p}, b* = {b}");
            let residual = h2(b) - h2(p) - b * binary_entropy_derivative(b).unwrap();
            assert!(residual.abs() < 1e-9, "p = {p}: residual {residual:e}");
        }
        assert_ne!(bstar(0.05).unwrap(), bstar(0.2).unwrap());
        assert!(bstar(0.0).is_err());
        assert!(bstar(0.5).is_err());
    }

    #[test]
    fn bstar_bracket_signs() {
        let hp = h2(P);
        assert!(tangency_gap(P + BRACKET_EPS, hp) < 0.0);
        assert!(tangency_gap(0.5 - BRACKET_EPS, hp) > 0.0);
    }

    #[test]
    fn noncausal_endpoints_and_continuity() {
        assert!((rate_noncausal_binary(0.0, P).unwrap() - 1.0).abs() < 1e-15);
        assert!((rate_noncausal_binary(0.5, P).unwrap() - h2(P)).abs() < 1e-15);
        let b = bstar(P).unwrap();
        let linear = 1.0 - b * (h2(b) - h2(P)) / b;
        let curved = 1.0 - h2(b) + h2(P);
        assert!((linear - curved).abs() < 1e-9);
        assert!(rate_noncausal_binary(0.6, P).is_err());
        assert!(rate_noncausal_binary(0.2, 0.5).is_err());
    }

    #[test]
    fn causal_values() {
        assert_eq!(rate_causal_binary(0.0, P).unwrap(), 1.0);
        assert!((rate_causal_binary(0.5, P).unwrap() - h2(P)).abs() < 1e-15);
        assert!((rate_causal_binary(0.25, P).unwrap() - (0.5 * h2(P) + 0.5)).abs() < 1e-15);
        assert!((rate_causal_binary(0.9, P).unwrap() - h2(P)).abs() < 1e-15);
    }

    #[test]
    fn erased_reductions() {
        for b in [0.0, 0.1, 0.3, 0.5] {
            let nc = rate_noncausal_binary(b, P).unwrap();
            let c = rate_causal_binary(b, P).unwrap();
            assert!((rate_erased_noncausal(b, P, 1.0).unwrap() - nc).abs() < 1e-15);
            assert!((rate_erased_causal(b, P, 1.0).unwrap() - c).abs() < 1e-15);
            assert!((rate_erased_noncausal(b, P, 0.0).unwrap() - h2(P)).abs() < 1e-15);
            assert!((rate_erased_causal(b, P, 0.0).unwrap() - h2(P)).abs() < 1e-15);
            assert!(rate_erased_causal(b, P, 0.5).unwrap() >= rate_erased_noncausal(b, P, 0.5).unwrap() - 1e-15);
        }
        assert!((rate_erased_noncausal(0.5, P, 0.5).unwrap() - h2(P)).abs() < 1e-15);
        assert!(rate_erased_noncausal(0.2, P, 1.5).is_err());
    }

    #[test]
    fn lemma1_matches_closed_form() {
        for k in 0..=50 {
            let b = k as f64 / 100.0;
            let m = lemma1_parametric_min(b, P, DEFAULT_DELTA_GRID).unwrap();
            let closed = rate_noncausal_binary(b, P).unwrap();
            assert!((m.value - closed).abs() < 1e-6, "B = {b}: {} vs {closed}", m.value);
            assert!(m.theta * m.delta <= b + 1e-12);
        }
        let zero = lemma1_parametric_min(0.0, P, DEFAULT_DELTA_GRID).unwrap();
        assert_eq!((zero.value, zero.theta), (1.0, 0.0));
        let half = lemma1_parametric_min(0.5, P, DEFAULT_DELTA_GRID).unwrap();
        assert!((half.delta - 0.5).abs() < 1e-12);
        assert!((half.value - h2(P)).abs() < 1e-12);
    }

    #[test]
    fn lemma2_matches_closed_form() {
        for k in 0..=60 {
            let b = k as f64 / 100.0;
            let (v, t) = lemma2_parametric_min(b, P).unwrap();
            assert_eq!(v, rate_causal_binary(b, P).unwrap());
            assert_eq!(t, (2.0 * b).min(1.0));
        }
        assert_eq!(lemma2_parametric_min(0.0, P).unwrap(), (1.0, 0.0));
        assert_eq!(lemma2_parametric_min(0.5, P).unwrap().1, 1.0);
    }

    #[test]
    fn noncausal_below_causal() {
        for k in 0..=50 {
            let b = k as f64 / 100.0;
            let nc = rate_noncausal_binary(b, P).unwrap();
            let c = rate_causal_binary(b, P).unwrap();
            assert!(nc <= c + 1e-12);
        }
        assert_eq!(
            rate_noncausal_binary(0.0, P).unwrap(),
            rate_causal_binary(0.0, P).unwrap()
        );
        assert!((rate_noncausal_binary(0.5, P).unwrap() - rate_causal_binary(0.5, P).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_convex_and_nonincreasing() {
        let n = 200;
        let f = |i: usize| i as f64 * 0.5 / n as f64;
        for rate in [rate_noncausal_binary as fn(f64, f64) -> Result<f64>, rate_causal_binary] {
            let r: Vec<f64> = (0..=n).map(|i| rate(f(i), P).unwrap()).collect();
            for i in 1..=n {
                assert!(r[i] <= r[i - 1] + 1e-15);
            }
            for i in 1..n {
                assert!(r[i - 1] - 2.0 * r[i] + r[i + 1] >= -1e-12);
            }
        }
    }

    #[test]
    fn structured_choices_evaluate_to_their_formulas() {
        let spec = binary_example_spec(P).unwrap();
        for (theta, delta) in [(1.0, 0.1), (0.6, 0.3), (0.0, 0.2), (1.0, 0.5)] {
            let aux = lemma1_choice(theta, delta).unwrap();
            let j = assemble_joint(&spec, &aux, false).unwrap();
            let s_marg = j.table.marginal(&[1]).unwrap();
            assert!((s_marg.mass()[0] - 0.5).abs() < 1e-12);
            let r = objective_theorem1(&j).unwrap();
            assert!((r - (theta * (h2(P) - h2(delta)) + 1.0)).abs() < 1e-12);
            assert!((expected_cost(&j, &spec).unwrap() - theta * delta).abs() < 1e-12);
        }
        for theta in [0.0, 0.3, 1.0] {
            let aux = lemma2_choice(theta).unwrap();
            let j = assemble_joint(&spec, &aux, true).unwrap();
            let r = objective_theorem2(&j).unwrap();
            assert!((r - (theta * h2(P) + 1.0 - theta)).abs() < 1e-12);
            assert!((expected_cost(&j, &spec).unwrap() - theta / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn binary_example_validates_parameters() {
        assert!(BinaryExample::new(0.6, None, 0.1).is_err());
        assert!(BinaryExample::new(0.1, Some(2.0), 0.1).is_err());
        assert!(BinaryExample::new(0.1, None, 0.7).is_err());
        let ex = BinaryExample::new(0.1, Some(0.5), 0.2).unwrap();
        assert!(ex.rate_causal().unwrap() >= ex.rate_noncausal().unwrap());
    }
}
