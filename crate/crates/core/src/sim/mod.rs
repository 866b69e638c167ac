//! Finite-blocklength Monte Carlo of the achievability schemes.
//!
//! Three schemes are simulated at desk scale (`|Y|ⁿ` enumerable):
//!
//! * `thm1-binning`: a covering codebook of `vⁿ` picked by the action
//!   encoder, random binning of `yⁿ`, and a decoder that looks for the
//!   unique sequence in the bin jointly typical with `zⁿ` and any codeword;
//! * `thm2-causal`: `vⁿ` is a shared time-sharing sequence, so the decoder
//!   tests typicality against that one sequence;
//! * `cor1-covering`: the compressor re-finds a codeword `v̂ⁿ` typical with
//!   `yⁿ` and sends its index plus the position of `yⁿ` among the
//!   sequences typical with `v̂ⁿ`.
//!
//! Every trial draws its randomness from a ChaCha8 stream keyed by
//! `(seed, trial_index)`, so reports are reproducible bit for bit.

mod typical;

use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use typical::is_jointly_typical;

use crate::error::{usage, Error, Result};
use crate::info::mutual_information;
use crate::model::{assemble_joint, expected_cost, AuxiliaryChoice, Layout, ProblemSpec};
use typical::Typicality;

pub const DEFAULT_CEILING: u64 = 1 << 20;
pub const DEFAULT_EPSILON: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    Thm1Binning,
    Thm2Causal,
    Cor1Covering,
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimMode::Thm1Binning => "thm1-binning",
            SimMode::Thm2Causal => "thm2-causal",
            SimMode::Cor1Covering => "cor1-covering",
        })
    }
}

impl std::str::FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm1-binning" => Ok(SimMode::Thm1Binning),
            "thm2-causal" => Ok(SimMode::Thm2Causal),
            "cor1-covering" => Ok(SimMode::Cor1Covering),
            other => Err(usage(format!(
                "unknown simulation mode `{other}` (thm1-binning, thm2-causal, cor1-covering)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mode: SimMode,
    pub n: usize,
    /// Bits per symbol. Binning modes use `2^⌈nR⌉` bins; the covering mode
    /// spends `R` minus the codebook rate on the second index.
    pub rate: f64,
    /// `None` resolves to `I(V;S) + ε`.
    pub codebook_rate_v: Option<f64>,
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
    /// Largest number of enumerated sequences (or codewords).
    pub ceiling: u64,
}

impl SimConfig {
    pub fn new(mode: SimMode, n: usize, rate: f64) -> Self {
        Self {
            mode,
            n,
            rate,
            codebook_rate_v: None,
            epsilon: DEFAULT_EPSILON,
            trials: 500,
            seed: 0,
            ceiling: DEFAULT_CEILING,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(usage("blocklength n must be positive"));
        }
        if self.trials == 0 {
            return Err(usage("trials must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Domain {
                param: "epsilon",
                value: self.epsilon,
                expected: "0 < epsilon < 1",
            });
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(Error::Domain {
                param: "rate",
                value: self.rate,
                expected: "finite rate >= 0",
            });
        }
        if let Some(r) = self.codebook_rate_v {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::Domain {
                    param: "codebook_rate_v",
                    value: r,
                    expected: "finite rate >= 0",
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    EncoderCoveringFailure,
    DecoderNone,
    DecoderAmbiguous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub error: Option<ErrorKind>,
    /// `(1/n) Σ Λ(aᵢ, sᵢ, yᵢ)`.
    pub cost: f64,
    /// No codeword was typical with `sⁿ`; the encoder used a random index.
    pub covering_failure: bool,
    /// Covering mode only: `v̂ⁿ` differs from the encoder's `vⁿ`.
    pub mismatch: Option<bool>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ErrorBreakdown {
    pub encoder_covering_failure: u64,
    pub decoder_none: u64,
    pub decoder_ambiguous: u64,
}

impl ErrorBreakdown {
    pub fn total(&self) -> u64 {
        self.encoder_covering_failure + self.decoder_none + self.decoder_ambiguous
    }
}

/// Aggregate of one campaign. The config is echoed with the codebook rate
/// resolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimConfig,
    pub trials: u64,
    pub seed: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub error_breakdown: ErrorBreakdown,
    /// Trials whose encoder found no typical codeword, failed or not.
    pub covering_failures: u64,
    pub empirical_cost: f64,
    pub cost_std_error: f64,
    pub analytic_cost: f64,
    pub sequence_count: u64,
    pub codebook_size: u64,
    /// Bits of the bin index; in covering mode, of the second index.
    pub bin_bits: u32,
    pub mismatch_trials: Option<u64>,
    pub mismatch_fraction: Option<f64>,
    /// Mismatched trials that still reconstructed `yⁿ`.
    pub mismatch_decoded: Option<u64>,
}

impl SimulationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn checked_pow(base: u64, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

fn bits(n: usize, rate: f64) -> u32 {
    let b = (n as f64 * rate - 1e-9).ceil().max(0.0);
    b.min(64.0) as u32
}

/// Multiply-shift hash of a sequence index into `2^bits` bins.
#[derive(Clone, Copy, Debug)]
struct BinHash {
    a: u64,
    b: u64,
    bits: u32,
}

impl BinHash {
    fn draw(rng: &mut ChaCha8Rng, bits: u32) -> Self {
        Self {
            a: rng.random::<u64>() | 1,
            b: rng.random(),
            bits,
        }
    }

    fn bin(&self, x: u64) -> u64 {
        let h = self.a.wrapping_mul(x).wrapping_add(self.b);
        match self.bits {
            0 => 0,
            64.. => h,
            k => h >> (64 - k),
        }
    }
}

/// Everything a trial needs, prepared once per campaign.
pub struct Simulator<'a> {
    spec: &'a ProblemSpec,
    aux: &'a AuxiliaryChoice,
    config: SimConfig,
    codebook_rate: f64,
    state: WeightedIndex<f64>,
    v_marginal: WeightedIndex<f64>,
    channel: Vec<Option<WeightedIndex<f64>>>,
    vs: Typicality,
    vyz: Typicality,
    yz: Typicality,
    vy: Typicality,
    sequence_count: u64,
    codebook_size: u64,
    bin_bits: u32,
    list_bits: u32,
    analytic_cost: f64,
}

fn sampler(weights: &[f64]) -> Option<WeightedIndex<f64>> {
    WeightedIndex::new(weights.iter().copied()).ok()
}

impl<'a> Simulator<'a> {
    pub fn new(spec: &'a ProblemSpec, aux: &'a AuxiliaryChoice, config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let causal = aux.v.is_causal();
        if config.mode == SimMode::Thm2Causal && !causal {
            return Err(usage("thm2-causal needs an auxiliary stored as p(v)"));
        }
        if config.mode == SimMode::Cor1Covering && spec.z_size() != 1 {
            return Err(usage("cor1-covering needs a spec without side information (|Z| = 1)"));
        }
        let joint = assemble_joint(spec, aux, causal)?;
        let t = &joint.table;
        let (z, s, v, y) = (Layout::Z, Layout::S, Layout::V, Layout::Y);
        let info_vs = mutual_information(t, &[v], &[s])?;
        let codebook_rate = config.codebook_rate_v.unwrap_or(info_vs + config.epsilon);
        let mut config = config.clone();
        config.codebook_rate_v = Some(codebook_rate);

        let seq = checked_pow(spec.y_size() as u64, config.n);
        if seq > config.ceiling as u128 {
            return Err(Error::Ceiling {
                required: seq,
                allowed: config.ceiling as u128,
            });
        }
        let codebook_size = if config.mode == SimMode::Thm2Causal {
            1
        } else {
            let k = bits(config.n, codebook_rate);
            let size = if k >= 64 { u128::MAX } else { 1u128 << k };
            if size > config.ceiling as u128 {
                return Err(Error::Ceiling {
                    required: size,
                    allowed: config.ceiling as u128,
                });
            }
            size as u64
        };
        let list_bits = bits(config.n, (config.rate - codebook_rate).max(0.0));

        let state = WeightedIndex::new(spec.state_joint().mass().iter().copied())
            .map_err(|e| Error::InvalidDistribution(format!("state law: {e}")))?;
        let ps = spec.state_marginal();
        let v_marginal = WeightedIndex::new(aux.v.marginal(&ps))
            .map_err(|e| Error::InvalidDistribution(format!("auxiliary marginal: {e}")))?;
        let mut channel = Vec::with_capacity(spec.a_size() * spec.s_size());
        for a in 0..spec.a_size() {
            for si in 0..spec.s_size() {
                let row: Vec<f64> = (0..spec.y_size()).map(|yi| spec.channel_prob(a, si, yi)).collect();
                channel.push(sampler(&row));
            }
        }
        let eps = config.epsilon;
        let marg = |axes: &[usize]| -> Result<Typicality> { Ok(Typicality::new(&t.marginal(axes)?, eps)) };
        Ok(Self {
            spec,
            aux,
            codebook_rate,
            state,
            v_marginal,
            channel,
            vs: marg(&[v, s])?,
            vyz: marg(&[v, y, z])?,
            yz: marg(&[y, z])?,
            vy: marg(&[v, y])?,
            sequence_count: seq as u64,
            codebook_size,
            bin_bits: bits(config.n, config.rate),
            list_bits,
            analytic_cost: expected_cost(&joint, spec)?,
            config,
        })
    }

    /// The config with the codebook rate resolved.
    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn codebook_rate(&self) -> f64 {
        self.codebook_rate
    }

    pub fn analytic_cost(&self) -> f64 {
        self.analytic_cost
    }

    /// The generator of trial `index`.
    pub fn trial_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(index);
        rng
    }

    pub fn trial(&self, rng: &mut ChaCha8Rng) -> TrialOutcome {
        match self.config.mode {
            SimMode::Thm1Binning => self.thm1(rng),
            SimMode::Thm2Causal => self.thm2(rng),
            SimMode::Cor1Covering => self.cor1(rng),
        }
    }

    fn draw_state(&self, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
        let zs = self.spec.z_size();
        (0..self.config.n)
            .map(|_| {
                let cell = self.state.sample(rng);
                (cell / zs, cell % zs)
            })
            .unzip()
    }

    fn codebook(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
        (0..self.codebook_size)
            .map(|_| (0..self.config.n).map(|_| self.v_marginal.sample(rng)).collect())
            .collect()
    }

    /// Uniform pick among the typical codewords, or a uniform index and
    /// `true` when there is none.
    fn cover(&self, test: &Typicality, other: &[usize], book: &[Vec<usize>], rng: &mut ChaCha8Rng) -> (usize, bool) {
        let mut counts = Vec::new();
        let hits: Vec<usize> = (0..book.len())
            .filter(|&l| test.check(&[&book[l], other], &mut counts))
            .collect();
        if hits.is_empty() {
            (rng.random_range(0..book.len()), true)
        } else {
            (hits[rng.random_range(0..hits.len())], false)
        }
    }

    /// Actions, channel outputs and the empirical cost.
    fn transmit(&self, s: &[usize], v: &[usize], rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
        let ss = self.spec.s_size();
        let mut y = Vec::with_capacity(s.len());
        let mut cost = 0.0;
        for (&si, &vi) in s.iter().zip(v) {
            let a = self.aux.policy.action(si, vi);
            let yi = self.channel[a * ss + si]
                .as_ref()
                .expect("channel rows are distributions")
                .sample(rng);
            cost += self.spec.cost_at(a, si, yi);
            y.push(yi);
        }
        (y, cost / s.len() as f64)
    }

    fn encode(&self, y: &[usize]) -> u64 {
        let base = self.spec.y_size() as u64;
        y.iter().fold(0u64, |acc, &d| acc * base + d as u64)
    }

    fn decode_into(&self, mut x: u64, out: &mut [usize]) {
        let base = self.spec.y_size() as u64;
        for d in out.iter_mut().rev() {
            *d = (x % base) as usize;
            x /= base;
        }
    }

    /// Sequences in the bin of `y` accepted by `accept`, stopping at two.
    fn bin_decode(&self, y: &[usize], hash: &BinHash, mut accept: impl FnMut(&[usize]) -> bool) -> Option<ErrorKind> {
        let code = self.encode(y);
        let target = hash.bin(code);
        let mut buf = vec![0; self.config.n];
        let mut accepted = 0;
        let mut found_true = false;
        for x in 0..self.sequence_count {
            if hash.bin(x) != target {
                continue;
            }
            self.decode_into(x, &mut buf);
            if accept(&buf) {
                accepted += 1;
                found_true |= x == code;
                if accepted > 1 {
                    return Some(ErrorKind::DecoderAmbiguous);
                }
            }
        }
        match (accepted, found_true) {
            (1, true) => None,
            _ => Some(ErrorKind::DecoderNone),
        }
    }

    fn thm1(&self, rng: &mut ChaCha8Rng) -> TrialOutcome {
        let (s, z) = self.draw_state(rng);
        let book = self.codebook(rng);
        let (l, covering_failure) = self.cover(&self.vs, &s, &book, rng);
        let (y, cost) = self.transmit(&s, &book[l], rng);
        let hash = BinHash::draw(rng, self.bin_bits);
        let mut counts = Vec::new();
        let error = self
            .bin_decode(&y, &hash, |cand| {
                self.yz.check(&[cand, &z], &mut counts)
                    && book.iter().any(|v| self.vyz.check(&[v, cand, &z], &mut counts))
            })
            .map(|e| {
                if covering_failure {
                    ErrorKind::EncoderCoveringFailure
                } else {
                    e
                }
            });
        TrialOutcome {
            error,
            cost,
            covering_failure,
            mismatch: None,
        }
    }

    fn thm2(&self, rng: &mut ChaCha8Rng) -> TrialOutcome {
        let (s, z) = self.draw_state(rng);
        let v: Vec<usize> = (0..self.config.n).map(|_| self.v_marginal.sample(rng)).collect();
        let (y, cost) = self.transmit(&s, &v, rng);
        let hash = BinHash::draw(rng, self.bin_bits);
        let mut counts = Vec::new();
        let error = self.bin_decode(&y, &hash, |cand| self.vyz.check(&[&v, cand, &z], &mut counts));
        TrialOutcome {
            error,
            cost,
            covering_failure: false,
            mismatch: None,
        }
    }

    fn cor1(&self, rng: &mut ChaCha8Rng) -> TrialOutcome {
        let (s, _) = self.draw_state(rng);
        let book = self.codebook(rng);
        let (l, covering_failure) = self.cover(&self.vs, &s, &book, rng);
        let v = &book[l];
        let (y, cost) = self.transmit(&s, v, rng);
        let fail = |e: ErrorKind, mismatch| TrialOutcome {
            error: Some(if covering_failure {
                ErrorKind::EncoderCoveringFailure
            } else {
                e
            }),
            cost,
            covering_failure,
            mismatch,
        };
        let (lh, none) = self.cover(&self.vy, &y, &book, rng);
        if none {
            return fail(ErrorKind::DecoderNone, None);
        }
        let vh = &book[lh];
        let mismatch = vh != v;
        let code = self.encode(&y);
        let mut buf = vec![0; self.config.n];
        let mut counts = Vec::new();
        let mut position = 0u64;
        for x in 0..code {
            self.decode_into(x, &mut buf);
            if self.vy.check(&[vh, &buf], &mut counts) {
                position += 1;
            }
        }
        if self.list_bits < 64 && position >= 1u64 << self.list_bits {
            return fail(ErrorKind::DecoderNone, Some(mismatch));
        }
        TrialOutcome {
            error: None,
            cost,
            covering_failure,
            mismatch: Some(mismatch),
        }
    }

    /// Runs every trial and aggregates.
    pub fn campaign(&self) -> SimulationReport {
        let mut breakdown = ErrorBreakdown::default();
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        let mut covering_failures = 0;
        let (mut mismatch, mut mismatch_decoded) = (0u64, 0u64);
        for index in 0..self.config.trials {
            let mut rng = self.trial_rng(index);
            let out = self.trial(&mut rng);
            match out.error {
                Some(ErrorKind::EncoderCoveringFailure) => breakdown.encoder_covering_failure += 1,
                Some(ErrorKind::DecoderNone) => breakdown.decoder_none += 1,
                Some(ErrorKind::DecoderAmbiguous) => breakdown.decoder_ambiguous += 1,
                None => {}
            }
            covering_failures += out.covering_failure as u64;
            if out.mismatch == Some(true) {
                mismatch += 1;
                mismatch_decoded += out.error.is_none() as u64;
            }
            sum += out.cost;
            sum_sq += out.cost * out.cost;
        }
        let t = self.config.trials as f64;
        let mean = sum / t;
        let var = if self.config.trials > 1 {
            ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
        } else {
            0.0
        };
        let errors = breakdown.total();
        let covering = self.config.mode == SimMode::Cor1Covering;
        SimulationReport {
            trials: self.config.trials,
            seed: self.config.seed,
            errors,
            error_rate: errors as f64 / t,
            error_breakdown: breakdown,
            covering_failures,
            empirical_cost: mean,
            cost_std_error: (var / t).sqrt(),
            analytic_cost: self.analytic_cost,
            sequence_count: self.sequence_count,
            codebook_size: self.codebook_size,
            bin_bits: if covering { self.list_bits } else { self.bin_bits },
            mismatch_trials: covering.then_some(mismatch),
            mismatch_fraction: covering.then_some(mismatch as f64 / t),
            mismatch_decoded: covering.then_some(mismatch_decoded),
            config: self.config.clone(),
        }
    }
}

fn single_trial(
    spec: &ProblemSpec,
    aux: &AuxiliaryChoice,
    config: &SimConfig,
    mode: SimMode,
    rng: &mut ChaCha8Rng,
) -> Result<TrialOutcome> {
    if config.mode != mode {
        return Err(usage(format!("config mode is {}, expected {mode}", config.mode)));
    }
    Ok(Simulator::new(spec, aux, config)?.trial(rng))
}

pub fn run_thm1_trial(
    spec: &ProblemSpec,
    aux: &AuxiliaryChoice,
    config: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrialOutcome> {
    single_trial(spec, aux, config, SimMode::Thm1Binning, rng)
}

pub fn run_thm2_trial(
    spec: &ProblemSpec,
    aux: &AuxiliaryChoice,
    config: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrialOutcome> {
    single_trial(spec, aux, config, SimMode::Thm2Causal, rng)
}

pub fn run_cor1_trial(
    spec: &ProblemSpec,
    aux: &AuxiliaryChoice,
    config: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrialOutcome> {
    single_trial(spec, aux, config, SimMode::Cor1Covering, rng)
}

/// `trials` independent trials; trial `i` uses stream `i` of the seed.
pub fn run_campaign(spec: &ProblemSpec, aux: &AuxiliaryChoice, config: &SimConfig) -> Result<SimulationReport> {
    Ok(Simulator::new(spec, aux, config)?.campaign())
}

/// Loads of the `2^bits` bins over all `count` sequence indices.
pub fn bin_loads(seed: u64, count: u64, bits: u32) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hash = BinHash::draw(&mut rng, bits.min(24));
    let mut loads = vec![0u64; 1 << bits.min(24)];
    for x in 0..count {
        loads[hash.bin(x) as usize] += 1;
    }
    loads
}

#[cfg(test)]
mod tests;
