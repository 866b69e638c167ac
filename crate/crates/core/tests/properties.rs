use action_rate::info::{mutual_information, ConditionalKernel, JointTable};
use action_rate::model::{
    assemble_joint, bound_theorem5, expected_cost, expected_reduced_cost, markov_gap, objective_theorem1, reduced_cost,
    Alphabets, Layout, ProblemSpec,
};
use action_rate::solver::{solve, trace_curve, Mode, PointStatus, SolveConfig};
use proptest::prelude::*;

const MONOTONE_SLACK: f64 = 1e-6;
const MARKOV_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-12;

fn normalize(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

fn rows(raw: &[f64], width: usize) -> Vec<f64> {
    raw.chunks(width).flat_map(normalize).collect()
}

prop_compose! {
    fn small_spec()(s in 1usize..=3, z in 1usize..=2, a in 1usize..=3, y in 2usize..=3)
        (state in prop::collection::vec(0.05f64..1.0, s * z),
         chan in prop::collection::vec(0.02f64..1.0, a * s * y),
         cost in prop::collection::vec(0.0f64..1.0, a * s * y),
         s in Just(s), z in Just(z), a in Just(a), y in Just(y)) -> ProblemSpec {
        let hamming: Vec<f64> = (0..y * y).map(|k| (k / y != k % y) as u8 as f64).collect();
        ProblemSpec::new(
            Alphabets { s, z, a, y, yhat: Some(y), u: None },
            JointTable::new(vec![s, z], normalize(&state)).unwrap(),
            ConditionalKernel::new(vec![a, s], y, rows(&chan, y)).unwrap(),
            cost,
            Some(hamming),
        )
        .unwrap()
    }
}

fn config(spec: &ProblemSpec) -> SolveConfig {
    SolveConfig {
        v_size_max: Some(2),
        grid_steps: 16,
        grid_budget: 2_000,
        refine_pool: 8,
        ..SolveConfig::for_spec(spec)
    }
}

fn budgets(spec: &ProblemSpec) -> Vec<f64> {
    let lo = spec.min_expected_cost();
    let hi = spec.cost_table().iter().cloned().fold(0.0, f64::max);
    (0..4).map(|k| lo + (hi - lo) * k as f64 / 3.0 + 1e-9).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn rate_cost_curves_are_ordered(spec in small_spec()) {
        let cfg = config(&spec);
        let bs = budgets(&spec);
        let nc = trace_curve(&spec, &bs, Mode::NonCausal, &cfg).unwrap();
        let c = trace_curve(&spec, &bs, Mode::Causal, &cfg).unwrap();
        for curve in [&nc, &c] {
            for p in &curve.points {
                prop_assert!(p.status != PointStatus::Infeasible, "budget {} infeasible", p.budget);
            }
            for w in curve.points.windows(2) {
                prop_assert!(w[1].rate <= w[0].rate + MONOTONE_SLACK, "{} then {}", w[0].rate, w[1].rate);
            }
            for w in curve.points.windows(3) {
                let t = (w[1].budget - w[0].budget) / (w[2].budget - w[0].budget);
                let chord = (1.0 - t) * w[0].rate + t * w[2].rate;
                prop_assert!(w[1].rate <= chord + MONOTONE_SLACK, "above chord at {}", w[1].budget);
            }
        }
        for (a, b) in nc.points.iter().zip(&c.points) {
            prop_assert!(a.rate <= b.rate + MONOTONE_SLACK, "B={}: {} > {}", a.budget, a.rate, b.rate);
        }
    }

    #[test]
    fn argmins_respect_the_factorization(spec in small_spec()) {
        let cfg = config(&spec);
        let reduced = reduced_cost(&spec);
        let b = budgets(&spec)[1];
        for mode in [Mode::NonCausal, Mode::Causal] {
            let point = solve(&spec, b, mode, &cfg).unwrap();
            let aux = point.argmin.unwrap();
            let joint = assemble_joint(&spec, &aux, mode == Mode::Causal).unwrap();
            let (z, s, v, a, y) = (Layout::Z, Layout::S, Layout::V, Layout::A, Layout::Y);
            prop_assert!(markov_gap(&joint, &[y], &[v, z], &[a, s]).unwrap() <= MARKOV_TOL);
            prop_assert!(markov_gap(&joint, &[a], &[z], &[s, v]).unwrap() <= MARKOV_TOL);
            if mode == Mode::Causal {
                prop_assert!(mutual_information(&joint.table, &[v], &[s, z]).unwrap() <= MARKOV_TOL);
            } else {
                prop_assert!(markov_gap(&joint, &[v], &[z], &[s]).unwrap() <= MARKOV_TOL);
            }
            let full = expected_cost(&joint, &spec).unwrap();
            let via_reduced = expected_reduced_cost(&joint, &reduced).unwrap();
            prop_assert!((full - via_reduced).abs() <= COST_TOL, "{full} vs {via_reduced}");
        }
    }

    #[test]
    fn identity_description_recovers_the_lossless_objective(spec in small_spec()) {
        let cfg = config(&spec);
        let b = budgets(&spec)[2];
        let aux = solve(&spec, b, Mode::NonCausal, &cfg).unwrap().argmin.unwrap();
        let lossless = objective_theorem1(&assemble_joint(&spec, &aux, false).unwrap()).unwrap();
        let y = spec.y_size();
        let map: Vec<usize> = (0..spec.z_size()).flat_map(|_| 0..y).collect();
        let ident = aux.with_description(ConditionalKernel::identity(y).unwrap(), map);
        let bound = bound_theorem5(&assemble_joint(&spec, &ident, false).unwrap()).unwrap();
        prop_assert!((bound.value - lossless).abs() <= 1e-12, "{} vs {lossless}", bound.value);
    }
}
