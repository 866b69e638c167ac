use super::*;
use crate::binary::{binary_example_spec, lemma1_choice, lemma2_choice};
use crate::info::{binary_entropy, ConditionalKernel, DiscreteDistribution, JointTable};
use crate::model::{ActionPolicy, VariableKernel};

const H_P: f64 = 0.468_995_593_589_281_2;

fn config(mode: SimMode, n: usize, rate: f64, trials: u64, eps: f64) -> SimConfig {
    SimConfig {
        epsilon: eps,
        trials,
        seed: 11,
        ..SimConfig::new(mode, n, rate)
    }
}

/// `Z = Y = S`, a single action.
fn copy_spec() -> ProblemSpec {
    ProblemSpec::new(
        crate::model::Alphabets {
            s: 2,
            z: 2,
            a: 1,
            y: 2,
            yhat: None,
            u: None,
        },
        JointTable::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap(),
        ConditionalKernel::new(vec![1, 2], 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap(),
        vec![0.0; 4],
        None,
    )
    .unwrap()
}

/// `Y = A`, `f(s,v) = s`, no side information.
fn noiseless_spec() -> ProblemSpec {
    ProblemSpec::new(
        crate::model::Alphabets {
            s: 2,
            z: 1,
            a: 2,
            y: 2,
            yhat: None,
            u: None,
        },
        JointTable::new(vec![2, 1], vec![0.5, 0.5]).unwrap(),
        ConditionalKernel::new(vec![2, 2], 2, vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0]).unwrap(),
        vec![0.0; 8],
        None,
    )
    .unwrap()
}

fn single_v(policy_col: Vec<usize>, a: usize) -> AuxiliaryChoice {
    AuxiliaryChoice::lossless(
        VariableKernel::Causal(DiscreteDistribution::point_mass(1, 0).unwrap()),
        ActionPolicy::from_columns(&[policy_col], a).unwrap(),
    )
}

#[test]
fn hash_bins_partition_evenly() {
    let count = 1u64 << 10;
    for bits in [3, 5] {
        let loads = bin_loads(5, count, bits);
        assert_eq!(loads.iter().sum::<u64>(), count);
        let k = loads.len() as f64;
        let mean = count as f64 / k;
        let sd = (count as f64 * (1.0 / k) * (1.0 - 1.0 / k)).sqrt();
        assert!(loads.iter().all(|&l| (l as f64 - mean).abs() <= 5.0 * sd), "{loads:?}");
    }
}

#[test]
fn copy_side_information_decodes() {
    let spec = copy_spec();
    let aux = single_v(vec![0, 0], 1);
    let r = run_campaign(&spec, &aux, &config(SimMode::Thm1Binning, 10, 0.1, 50, 0.9)).unwrap();
    let typical_z = r.error_rate;
    // only yⁿ = zⁿ is typical with zⁿ; failures come from atypical zⁿ alone
    assert_eq!(r.error_breakdown.decoder_ambiguous, 0);
    assert!(typical_z < 0.1, "{typical_z}");
}

#[test]
fn noiseless_errors_are_collisions() {
    let spec = noiseless_spec();
    let aux = single_v(vec![0, 1], 2);
    let r = run_campaign(&spec, &aux, &config(SimMode::Thm1Binning, 10, 1.0, 200, 0.5)).unwrap();
    // one sequence per bin on average; an error needs another typical sequence
    // in the same bin or an atypical yⁿ
    let atypical: f64 = (0..=10u64)
        .filter(|&k| (k as f64 / 10.0 - 0.5).abs() > 0.25 + 1e-12)
        .map(|k| binom(10, k) / 1024.0)
        .sum();
    let typical_count: f64 = (0..=10u64)
        .filter(|&k| (k as f64 / 10.0 - 0.5).abs() <= 0.25 + 1e-12)
        .map(|k| binom(10, k))
        .sum();
    let collision = 1.0 - (-(typical_count - 1.0) / 1024.0).exp();
    let expected = atypical + (1.0 - atypical) * collision;
    let sd = (expected * (1.0 - expected) / 200.0).sqrt();
    assert!(
        (r.error_rate - expected).abs() < 4.0 * sd + 0.02,
        "{} vs {expected}",
        r.error_rate
    );
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[test]
fn campaign_is_deterministic() {
    let spec = binary_example_spec(0.1).unwrap();
    let aux = lemma2_choice(1.0).unwrap();
    let cfg = config(SimMode::Thm1Binning, 10, 0.8, 40, 0.5);
    let a = run_campaign(&spec, &aux, &cfg).unwrap();
    let b = run_campaign(&spec, &aux, &cfg).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.seed, 11);
    assert_eq!(a.error_breakdown.total(), a.errors);
    let c = run_campaign(&spec, &aux, &SimConfig { seed: 12, ..cfg }).unwrap();
    assert_ne!(a.to_json(), c.to_json());
}

#[test]
fn single_trial_matches_campaign_stream() {
    let spec = binary_example_spec(0.1).unwrap();
    let aux = lemma2_choice(1.0).unwrap();
    let cfg = config(SimMode::Thm2Causal, 8, 0.8, 1, 0.5);
    let sim = Simulator::new(&spec, &aux, &cfg).unwrap();
    let direct = run_thm2_trial(&spec, &aux, &cfg, &mut sim.trial_rng(0)).unwrap();
    let report = sim.campaign();
    assert_eq!(report.errors, direct.error.is_some() as u64);
    assert!((report.empirical_cost - direct.cost).abs() < 1e-15);
    assert!(run_thm1_trial(&spec, &aux, &cfg, &mut sim.trial_rng(0)).is_err());
}

#[test]
fn theta_one_cost_is_half() {
    let spec = binary_example_spec(0.1).unwrap();
    let aux = lemma2_choice(1.0).unwrap();
    let r = run_campaign(&spec, &aux, &config(SimMode::Thm2Causal, 12, H_P + 0.15, 300, 0.5)).unwrap();
    assert!((r.analytic_cost - 0.5).abs() < 1e-12);
    assert!((r.empirical_cost - 0.5).abs() < 3.0 * r.cost_std_error);
}

#[test]
fn thm2_zero_action_needs_one_bit() {
    let spec = binary_example_spec(0.1).unwrap();
    let aux = lemma2_choice(0.0).unwrap();
    let hi = run_campaign(&spec, &aux, &config(SimMode::Thm2Causal, 12, 1.1, 200, 0.5)).unwrap();
    let lo = run_campaign(&spec, &aux, &config(SimMode::Thm2Causal, 12, 0.8, 200, 0.5)).unwrap();
    assert!(hi.error_rate < lo.error_rate, "{} vs {}", hi.error_rate, lo.error_rate);
    assert!(hi.error_rate < 0.25);
}

#[test]
fn deterministic_channel_single_trial() {
    let spec = noiseless_spec();
    let aux = single_v(vec![0, 1], 2);
    let r = run_campaign(&spec, &aux, &config(SimMode::Thm2Causal, 10, 1.0, 1, 0.5)).unwrap();
    assert!(r.error_rate == 0.0 || r.error_rate == 1.0);
    assert_eq!(r.trials, 1);
}

#[test]
fn covering_mismatch_still_decodes() {
    let spec = binary_example_spec(0.1).unwrap();
    let aux = lemma1_choice(1.0, 0.5).unwrap();
    let mut cfg = config(SimMode::Cor1Covering, 12, 0.0, 100, 0.9);
    cfg.codebook_rate_v = Some(10.0 / 12.0);
    cfg.rate = 10.0 / 12.0 + H_P + 0.3;
    let r = run_campaign(&spec, &aux, &cfg).unwrap();
    assert!(r.mismatch_fraction.unwrap() > 0.0);
    assert!(r.mismatch_decoded.unwrap() > 0);
}

#[test]
fn refusals() {
    let spec = binary_example_spec(0.1).unwrap();
    let aux = lemma2_choice(1.0).unwrap();
    let cfg = config(SimMode::Thm1Binning, 21, 0.5, 1, 0.5);
    assert!(matches!(Simulator::new(&spec, &aux, &cfg), Err(Error::Ceiling { .. })));
    let nc = lemma1_choice(1.0, 0.5).unwrap();
    assert!(Simulator::new(&spec, &nc, &config(SimMode::Thm2Causal, 8, 0.5, 1, 0.5)).is_err());
    assert!(Simulator::new(
        &copy_spec(),
        &single_v(vec![0, 0], 1),
        &config(SimMode::Cor1Covering, 8, 0.5, 1, 0.5)
    )
    .is_err());
    assert!(Simulator::new(&spec, &aux, &config(SimMode::Thm1Binning, 8, 0.5, 0, 0.5)).is_err());
    assert!(Simulator::new(&spec, &aux, &config(SimMode::Thm1Binning, 8, 0.5, 1, 1.0)).is_err());
    assert!("bogus".parse::<SimMode>().is_err());
    assert_eq!("cor1-covering".parse::<SimMode>().unwrap(), SimMode::Cor1Covering);
}

#[test]
fn h_p_constant() {
    assert!((binary_entropy(0.1).unwrap() - H_P).abs() < 1e-15);
}
