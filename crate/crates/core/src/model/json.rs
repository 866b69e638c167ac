//! JSON documents for problem specs and auxiliary choices.
//!
//! Spec layout:
//!
//! ```json
//! {
//!   "alphabets": {"s": 2, "z": 1, "a": 2, "y": 2, "yhat": 2, "u": null},
//!   "state_joint": [[0.5], [0.5]],
//!   "channel": [[[0.9, 0.1], [0.1, 0.9]], [[0.1, 0.9], [0.9, 0.1]]],
//!   "cost": [[[0, 0], [0, 0]], [[1, 1], [1, 1]]],
//!   "distortion": [[0, 1], [1, 0]]
//! }
//! ```
//!
//! `state_joint` is indexed `[s][z]` (a flat row-major list is accepted as
//! well), `channel` and `cost` are `[a][s][y]`, `distortion` is `[y][ŷ]`.
//! Probability rows may be off by at most `1e-9` and are renormalized.

use serde::{Deserialize, Serialize};

use super::{ActionPolicy, Alphabets, AuxiliaryChoice, ProblemSpec, VariableKernel};
use crate::error::{Error, Result};
use crate::info::{ConditionalKernel, DiscreteDistribution, JointTable};

/// Rows whose mass is off by more than this are rejected.
pub const DOCUMENT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphabetsDoc {
    pub s: usize,
    pub z: usize,
    pub a: usize,
    pub y: usize,
    #[serde(default)]
    pub yhat: Option<usize>,
    #[serde(default)]
    pub u: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Matrix {
    Nested(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub alphabets: AlphabetsDoc,
    pub state_joint: Matrix,
    pub channel: Vec<Vec<Vec<f64>>>,
    pub cost: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<Vec<Vec<f64>>>,
}

fn doc_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Document {
        path: path.into(),
        message: message.into(),
    }
}

fn parse<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        doc_err(
            if path.is_empty() { ".".to_string() } else { path },
            e.into_inner().to_string(),
        )
    })
}

fn check_len<T>(v: &[T], n: usize, path: &str) -> Result<()> {
    if v.len() != n {
        return Err(doc_err(path, format!("expected {n} entries, found {}", v.len())));
    }
    Ok(())
}

fn check_entries(row: &[f64], path: &str) -> Result<()> {
    for (i, x) in row.iter().enumerate() {
        if !x.is_finite() || *x < 0.0 {
            return Err(doc_err(
                format!("{path}[{i}]"),
                format!("entry {x} must be finite and >= 0"),
            ));
        }
    }
    Ok(())
}

fn prob_row(row: &[f64], n: usize, path: &str) -> Result<Vec<f64>> {
    check_len(row, n, path)?;
    check_entries(row, path)?;
    DiscreteDistribution::normalized(row.to_vec(), DOCUMENT_TOLERANCE)
        .map(|d| d.into_mass())
        .map_err(|e| doc_err(path, e.to_string()))
}

impl SpecDocument {
    pub fn parse(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn into_spec(self) -> Result<ProblemSpec> {
        let AlphabetsDoc { s, z, a, y, yhat, u } = self.alphabets;
        for (name, n) in [("s", s), ("z", z), ("a", a), ("y", y)] {
            if n == 0 {
                return Err(doc_err(format!("alphabets.{name}"), "alphabet size must be positive"));
            }
        }
        let flat: Vec<f64> = match &self.state_joint {
            Matrix::Nested(rows) => {
                check_len(rows, s, "state_joint")?;
                let mut out = Vec::with_capacity(s * z);
                for (i, r) in rows.iter().enumerate() {
                    let path = format!("state_joint[{i}]");
                    check_len(r, z, &path)?;
                    check_entries(r, &path)?;
                    out.extend_from_slice(r);
                }
                out
            }
            Matrix::Flat(v) => {
                check_len(v, s * z, "state_joint")?;
                check_entries(v, "state_joint")?;
                v.clone()
            }
        };
        let state = DiscreteDistribution::normalized(flat, DOCUMENT_TOLERANCE)
            .map_err(|e| doc_err("state_joint", e.to_string()))?;
        let state_joint =
            JointTable::new(vec![s, z], state.into_mass()).map_err(|e| doc_err("state_joint", e.to_string()))?;

        check_len(&self.channel, a, "channel")?;
        let mut channel = Vec::with_capacity(a * s * y);
        for (ai, per_a) in self.channel.iter().enumerate() {
            check_len(per_a, s, &format!("channel[{ai}]"))?;
            for (si, row) in per_a.iter().enumerate() {
                channel.extend(prob_row(row, y, &format!("channel[{ai}][{si}]"))?);
            }
        }
        let channel = ConditionalKernel::new(vec![a, s], y, channel).map_err(|e| doc_err("channel", e.to_string()))?;

        check_len(&self.cost, a, "cost")?;
        let mut cost = Vec::with_capacity(a * s * y);
        for (ai, per_a) in self.cost.iter().enumerate() {
            check_len(per_a, s, &format!("cost[{ai}]"))?;
            for (si, row) in per_a.iter().enumerate() {
                let path = format!("cost[{ai}][{si}]");
                check_len(row, y, &path)?;
                check_entries(row, &path)?;
                cost.extend_from_slice(row);
            }
        }

        let distortion = match &self.distortion {
            None => None,
            Some(rows) => {
                let yh = yhat.ok_or_else(|| doc_err("alphabets.yhat", "required when a distortion table is given"))?;
                check_len(rows, y, "distortion")?;
                let mut d = Vec::with_capacity(y * yh);
                for (yi, row) in rows.iter().enumerate() {
                    let path = format!("distortion[{yi}]");
                    check_len(row, yh, &path)?;
                    check_entries(row, &path)?;
                    d.extend_from_slice(row);
                }
                Some(d)
            }
        };
        let alphabets = Alphabets { s, z, a, y, yhat, u };
        ProblemSpec::new(alphabets, state_joint, channel, cost, distortion).map_err(|e| doc_err(".", e.to_string()))
    }

    pub fn from_spec(spec: &ProblemSpec) -> Self {
        let al = spec.alphabets();
        let state_joint = Matrix::Nested(
            (0..al.s)
                .map(|s| (0..al.z).map(|z| spec.state_prob(s, z)).collect())
                .collect(),
        );
        let cube = |f: &dyn Fn(usize, usize, usize) -> f64| -> Vec<Vec<Vec<f64>>> {
            (0..al.a)
                .map(|a| (0..al.s).map(|s| (0..al.y).map(|y| f(a, s, y)).collect()).collect())
                .collect()
        };
        let distortion = al.yhat.and_then(|yh| {
            spec.distortion_table()
                .map(|d| d.chunks(yh).map(|r| r.to_vec()).collect())
        });
        SpecDocument {
            alphabets: AlphabetsDoc {
                s: al.s,
                z: al.z,
                a: al.a,
                y: al.y,
                yhat: al.yhat,
                u: al.u,
            },
            state_joint,
            channel: cube(&|a, s, y| spec.channel_prob(a, s, y)),
            cost: cube(&|a, s, y| spec.cost_at(a, s, y)),
            distortion,
        }
    }
}

impl ProblemSpec {
    /// Parses and validates a JSON spec document.
    pub fn from_json(text: &str) -> Result<Self> {
        SpecDocument::parse(text)?.into_spec()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpecDocument::from_spec(self)).expect("spec serializes")
    }
}

/// Auxiliary choice for the lossless problems and the simulator.
///
/// ```json
/// {"v_size": 2, "policy": [[0, 1], [1, 0]], "v_kernel": [[0.5, 0.5], [0.5, 0.5]]}
/// ```
///
/// `policy` is `[s][v]`; give `v_kernel` (`[s][v]`, non-causal) or
/// `v_marginal` (`[v]`, causal), not both.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuxDocument {
    pub v_size: usize,
    pub policy: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_kernel: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_marginal: Option<Vec<f64>>,
}

impl AuxDocument {
    pub fn parse(text: &str) -> Result<Self> {
        parse(text)
    }

    pub fn into_choice(self, spec: &ProblemSpec) -> Result<AuxiliaryChoice> {
        let (s, a, vs) = (spec.s_size(), spec.a_size(), self.v_size);
        if vs == 0 {
            return Err(doc_err("v_size", "must be positive"));
        }
        check_len(&self.policy, s, "policy")?;
        let mut table = Vec::with_capacity(s * vs);
        for (si, row) in self.policy.iter().enumerate() {
            let path = format!("policy[{si}]");
            check_len(row, vs, &path)?;
            if let Some((vi, bad)) = row.iter().enumerate().find(|(_, &x)| x >= a) {
                return Err(doc_err(
                    format!("{path}[{vi}]"),
                    format!("action {bad} outside alphabet of size {a}"),
                ));
            }
            table.extend_from_slice(row);
        }
        let policy = ActionPolicy::new(s, vs, table, a).map_err(|e| doc_err("policy", e.to_string()))?;
        let v = match (self.v_kernel, self.v_marginal) {
            (Some(rows), None) => {
                check_len(&rows, s, "v_kernel")?;
                let mut flat = Vec::with_capacity(s * vs);
                for (si, row) in rows.iter().enumerate() {
                    flat.extend(prob_row(row, vs, &format!("v_kernel[{si}]"))?);
                }
                VariableKernel::NonCausal(
                    ConditionalKernel::new(vec![s], vs, flat).map_err(|e| doc_err("v_kernel", e.to_string()))?,
                )
            }
            (None, Some(m)) => VariableKernel::Causal(
                DiscreteDistribution::new(prob_row(&m, vs, "v_marginal")?)
                    .map_err(|e| doc_err("v_marginal", e.to_string()))?,
            ),
            _ => return Err(doc_err(".", "give exactly one of `v_kernel` or `v_marginal`")),
        };
        Ok(AuxiliaryChoice::lossless(v, policy))
    }

    pub fn from_choice(aux: &AuxiliaryChoice) -> Self {
        let p = &aux.policy;
        let policy = (0..p.s_size())
            .map(|s| (0..p.v_size()).map(|v| p.action(s, v)).collect())
            .collect();
        let (v_kernel, v_marginal) = match &aux.v {
            VariableKernel::NonCausal(k) => (
                Some(k.flat().chunks(k.output_size()).map(|r| r.to_vec()).collect()),
                None,
            ),
            VariableKernel::Causal(d) => (None, Some(d.mass().to_vec())),
        };
        Self {
            v_size: p.v_size(),
            policy,
            v_kernel,
            v_marginal,
        }
    }
}
