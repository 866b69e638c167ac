//! Problem instances, auxiliary choices and the single-letter objectives.
//!
//! A [`ProblemSpec`] fixes the state source `p(s,z)`, the channel `p(y|a,s)`,
//! the cost `Λ(a,s,y)` and optionally a distortion `d(y,ŷ)`. An
//! [`AuxiliaryChoice`] fixes everything the optimizer is free to pick: the
//! auxiliary `V`, the deterministic action table `a = f(s,v)`, and for the
//! lossy problems a reconstruction kernel or a `U` description.
//! [`assemble_joint`] multiplies the two into one [`JointTable`], and the
//! objective functions read information measures off that table.
//!
//! `|Z| = 1` stands for "no side information".

mod json;

pub use json::{AuxDocument, SpecDocument};

use crate::error::{usage, Result};
use crate::info::{
    conditional_entropy, conditional_mutual_information, mutual_information, ConditionalKernel, DiscreteDistribution,
    JointTable,
};

/// Tolerance used by the structural (Markov / feasibility) checks.
pub const STRUCTURE_TOLERANCE: f64 = 1e-10;

/// Alphabet sizes of one instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Alphabets {
    pub s: usize,
    pub z: usize,
    pub a: usize,
    pub y: usize,
    pub yhat: Option<usize>,
    pub u: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    alphabets: Alphabets,
    state_joint: JointTable,
    channel: ConditionalKernel,
    cost: Vec<f64>,
    distortion: Option<Vec<f64>>,
}

impl ProblemSpec {
    /// * `state_joint`: axes `(s, z)`
    /// * `channel`: inputs `(a, s)`, output `y`
    /// * `cost`: row-major `[a][s][y]`
    /// * `distortion`: row-major `[y][ŷ]`, requires `alphabets.yhat`
    pub fn new(
        alphabets: Alphabets,
        state_joint: JointTable,
        channel: ConditionalKernel,
        cost: Vec<f64>,
        distortion: Option<Vec<f64>>,
    ) -> Result<Self> {
        let Alphabets { s, z, a, y, yhat, u } = alphabets;
        if [s, z, a, y].contains(&0) || yhat == Some(0) || u == Some(0) {
            return Err(usage("alphabet sizes must be positive"));
        }
        if state_joint.axis_sizes() != [s, z] {
            return Err(usage(format!(
                "state_joint has axes {:?}, expected [{s}, {z}]",
                state_joint.axis_sizes()
            )));
        }
        if channel.input_sizes() != [a, s] || channel.output_size() != y {
            return Err(usage("channel must be a kernel from (a, s) to y"));
        }
        if cost.len() != a * s * y {
            return Err(usage(format!("cost needs {} entries, got {}", a * s * y, cost.len())));
        }
        if let Some(bad) = cost.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(usage(format!("cost entries must be finite and >= 0, found {bad}")));
        }
        if let Some(d) = &distortion {
            let yh = yhat.ok_or_else(|| usage("a distortion table needs alphabets.yhat"))?;
            if d.len() != y * yh {
                return Err(usage(format!("distortion needs {} entries, got {}", y * yh, d.len())));
            }
            if let Some(bad) = d.iter().find(|c| !c.is_finite() || **c < 0.0) {
                return Err(usage(format!(
                    "distortion entries must be finite and >= 0, found {bad}"
                )));
            }
        }
        Ok(Self {
            alphabets,
            state_joint,
            channel,
            cost,
            distortion,
        })
    }

    /// Same instance with a different distortion table (and `ŷ` alphabet).
    pub fn with_distortion(mut self, yhat_size: usize, distortion: Vec<f64>) -> Result<Self> {
        self.alphabets.yhat = Some(yhat_size);
        let Self {
            alphabets,
            state_joint,
            channel,
            cost,
            ..
        } = self;
        Self::new(alphabets, state_joint, channel, cost, Some(distortion))
    }

    pub fn alphabets(&self) -> Alphabets {
        self.alphabets
    }

    pub fn s_size(&self) -> usize {
        self.alphabets.s
    }

    pub fn z_size(&self) -> usize {
        self.alphabets.z
    }

    pub fn a_size(&self) -> usize {
        self.alphabets.a
    }

    pub fn y_size(&self) -> usize {
        self.alphabets.y
    }

    pub fn yhat_size(&self) -> Option<usize> {
        self.alphabets.yhat
    }

    pub fn state_joint(&self) -> &JointTable {
        &self.state_joint
    }

    pub fn channel(&self) -> &ConditionalKernel {
        &self.channel
    }

    pub fn state_prob(&self, s: usize, z: usize) -> f64 {
        self.state_joint.mass()[s * self.alphabets.z + z]
    }

    /// Marginal `p(s)`.
    pub fn state_marginal(&self) -> Vec<f64> {
        (0..self.s_size())
            .map(|s| (0..self.z_size()).map(|z| self.state_prob(s, z)).sum())
            .collect()
    }

    pub fn channel_prob(&self, a: usize, s: usize, y: usize) -> f64 {
        self.channel.flat()[(a * self.alphabets.s + s) * self.alphabets.y + y]
    }

    pub fn cost_at(&self, a: usize, s: usize, y: usize) -> f64 {
        self.cost[(a * self.alphabets.s + s) * self.alphabets.y + y]
    }

    pub fn cost_table(&self) -> &[f64] {
        &self.cost
    }

    pub fn distortion_table(&self) -> Option<&[f64]> {
        self.distortion.as_deref()
    }

    pub fn distortion_at(&self, y: usize, yhat: usize) -> Option<f64> {
        let yh = self.alphabets.yhat?;
        self.distortion.as_ref().map(|d| d[y * yh + yhat])
    }

    /// Smallest expected cost of any action strategy.
    pub fn min_expected_cost(&self) -> f64 {
        let reduced = reduced_cost(self);
        let a = self.a_size();
        self.state_marginal()
            .iter()
            .enumerate()
            .map(|(s, ps)| {
                let best = reduced[s * a..(s + 1) * a]
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                ps * best
            })
            .sum()
    }

    /// Largest entry of the distortion table.
    pub fn max_distortion(&self) -> Option<f64> {
        self.distortion.as_ref().map(|d| d.iter().copied().fold(0.0, f64::max))
    }
}

/// A deterministic action table `a = f(s, v)`, stored row-major `[s][v]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionPolicy {
    s_size: usize,
    v_size: usize,
    table: Vec<usize>,
}

impl ActionPolicy {
    pub fn new(s_size: usize, v_size: usize, table: Vec<usize>, a_size: usize) -> Result<Self> {
        if s_size == 0 || v_size == 0 {
            return Err(usage("policy alphabets must be non-empty"));
        }
        if table.len() != s_size * v_size {
            return Err(usage(format!(
                "policy table needs {} entries, got {}",
                s_size * v_size,
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|&&a| a >= a_size) {
            return Err(usage(format!("policy action {bad} outside alphabet of size {a_size}")));
        }
        Ok(Self { s_size, v_size, table })
    }

    /// Builds a policy from one column `s -> a` per auxiliary symbol.
    pub fn from_columns(columns: &[Vec<usize>], a_size: usize) -> Result<Self> {
        let v_size = columns.len();
        let s_size = columns.first().map_or(0, Vec::len);
        let mut table = vec![0; s_size * v_size];
        for (v, col) in columns.iter().enumerate() {
            if col.len() != s_size {
                return Err(usage("policy columns have different lengths"));
            }
            for (s, &a) in col.iter().enumerate() {
                table[s * v_size + v] = a;
            }
        }
        Self::new(s_size, v_size, table, a_size)
    }

    pub(crate) fn from_table_unchecked(s_size: usize, v_size: usize, table: Vec<usize>) -> Self {
        Self { s_size, v_size, table }
    }

    pub fn action(&self, s: usize, v: usize) -> usize {
        self.table[s * self.v_size + v]
    }

    pub fn s_size(&self) -> usize {
        self.s_size
    }

    pub fn v_size(&self) -> usize {
        self.v_size
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    /// Compact rendering, one column per `v`: `f=[01|00]`.
    pub fn summary(&self) -> String {
        let cols: Vec<String> = (0..self.v_size)
            .map(|v| (0..self.s_size).map(|s| self.action(s, v).to_string()).collect())
            .collect();
        format!("f=[{}]", cols.join("|"))
    }
}

/// Law of the auxiliary `V`: conditioned on the state (non-causal), or a
/// free marginal independent of everything (causal).
#[derive(Clone, Debug, PartialEq)]
pub enum VariableKernel {
    /// `p(v|s)`, a kernel with inputs `[s]`.
    NonCausal(ConditionalKernel),
    /// `p(v)`.
    Causal(DiscreteDistribution),
}

impl VariableKernel {
    pub fn v_size(&self) -> usize {
        match self {
            VariableKernel::NonCausal(k) => k.output_size(),
            VariableKernel::Causal(d) => d.support_size(),
        }
    }

    pub fn prob(&self, s: usize, v: usize) -> f64 {
        match self {
            VariableKernel::NonCausal(k) => k.flat()[s * k.output_size() + v],
            VariableKernel::Causal(d) => d.mass()[v],
        }
    }

    pub fn is_causal(&self) -> bool {
        matches!(self, VariableKernel::Causal(_))
    }

    /// Marginal `p(v)` under the state marginal `p_s`.
    pub fn marginal(&self, p_s: &[f64]) -> Vec<f64> {
        (0..self.v_size())
            .map(|v| p_s.iter().enumerate().map(|(s, ps)| ps * self.prob(s, v)).sum())
            .collect()
    }
}

/// Which variables the `U` description is allowed to depend on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DescriptionInputs {
    /// `p(u|y)`.
    Output,
    /// `p(u|y,v)`.
    OutputAndAuxiliary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuxiliaryChoice {
    pub v: VariableKernel,
    pub policy: ActionPolicy,
    /// `p(ŷ|y,v,z)`, inputs `[y, v, z]`.
    pub recon: Option<ConditionalKernel>,
    /// `p(u|y)` (inputs `[y]`) or `p(u|y,v)` (inputs `[y, v]`).
    pub u_kernel: Option<ConditionalKernel>,
    /// Deterministic reconstruction `ŷ(z,u)`, row-major `[z][u]`.
    pub yhat_map: Option<Vec<usize>>,
}

impl AuxiliaryChoice {
    pub fn lossless(v: VariableKernel, policy: ActionPolicy) -> Self {
        Self {
            v,
            policy,
            recon: None,
            u_kernel: None,
            yhat_map: None,
        }
    }

    pub fn with_recon(mut self, recon: ConditionalKernel) -> Self {
        self.recon = Some(recon);
        self
    }

    pub fn with_description(mut self, u_kernel: ConditionalKernel, yhat_map: Vec<usize>) -> Self {
        self.u_kernel = Some(u_kernel);
        self.yhat_map = Some(yhat_map);
        self
    }

    pub fn v_size(&self) -> usize {
        self.policy.v_size()
    }

    pub fn description_inputs(&self) -> Option<DescriptionInputs> {
        self.u_kernel.as_ref().map(|k| {
            if k.input_sizes().len() == 1 {
                DescriptionInputs::Output
            } else {
                DescriptionInputs::OutputAndAuxiliary
            }
        })
    }

    /// Short human-readable description used in CSV rows and reports.
    pub fn summary(&self) -> String {
        let v = match &self.v {
            VariableKernel::NonCausal(k) => {
                let rows: Vec<String> = k.flat().chunks(k.output_size()).map(fmt_row).collect();
                format!("p(v|s)=[{}]", rows.join(";"))
            }
            VariableKernel::Causal(d) => format!("p(v)={}", fmt_row(d.mass())),
        };
        let mut out = format!("|V|={} {} {}", self.v_size(), self.policy.summary(), v);
        if self.recon.is_some() {
            out.push_str(" recon");
        }
        if let Some(u) = &self.u_kernel {
            out.push_str(&format!(" |U|={}", u.output_size()));
        }
        out
    }

    fn check_shapes(&self, spec: &ProblemSpec) -> Result<()> {
        let vs = self.v_size();
        if self.policy.s_size() != spec.s_size() {
            return Err(usage("policy state alphabet does not match the spec"));
        }
        if self.policy.table().iter().any(|&a| a >= spec.a_size()) {
            return Err(usage("policy uses an action outside the spec alphabet"));
        }
        if self.v.v_size() != vs {
            return Err(usage(format!(
                "auxiliary law has |V|={} but the policy has |V|={vs}",
                self.v.v_size()
            )));
        }
        if let VariableKernel::NonCausal(k) = &self.v {
            if k.input_sizes() != [spec.s_size()] {
                return Err(usage("p(v|s) must have inputs [s]"));
            }
        }
        if self.recon.is_some() && self.u_kernel.is_some() {
            return Err(usage("choose either a reconstruction kernel or a U description"));
        }
        if let Some(r) = &self.recon {
            let yh = spec
                .yhat_size()
                .ok_or_else(|| usage("reconstruction kernel needs alphabets.yhat"))?;
            if r.input_sizes() != [spec.y_size(), vs, spec.z_size()] || r.output_size() != yh {
                return Err(usage("reconstruction kernel must map (y, v, z) to ŷ"));
            }
        }
        if let Some(u) = &self.u_kernel {
            let inputs = u.input_sizes();
            if inputs != [spec.y_size()] && inputs != [spec.y_size(), vs] {
                return Err(usage("U kernel must have inputs [y] or [y, v]"));
            }
            let map = self
                .yhat_map
                .as_ref()
                .ok_or_else(|| usage("a U description needs a ŷ(z,u) map"))?;
            let yh = spec
                .yhat_size()
                .ok_or_else(|| usage("ŷ(z,u) map needs alphabets.yhat"))?;
            if map.len() != spec.z_size() * u.output_size() || map.iter().any(|&x| x >= yh) {
                return Err(usage("ŷ(z,u) map has the wrong shape"));
            }
        } else if self.yhat_map.is_some() {
            return Err(usage("ŷ(z,u) map given without a U kernel"));
        }
        Ok(())
    }
}

fn fmt_row(r: &[f64]) -> String {
    let cells: Vec<String> = r.iter().map(|p| format!("{p:.4}")).collect();
    format!("({})", cells.join(","))
}

/// Axis positions inside an assembled joint `(z, s, v, a, y[, ŷ][, u])`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub yhat: Option<usize>,
    pub u: Option<usize>,
    pub description: Option<DescriptionInputs>,
}

impl Layout {
    pub const Z: usize = 0;
    pub const S: usize = 1;
    pub const V: usize = 2;
    pub const A: usize = 3;
    pub const Y: usize = 4;
}

/// The factorized joint of one (spec, auxiliary choice) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct AssembledJoint {
    pub table: JointTable,
    pub layout: Layout,
}

const Z: usize = Layout::Z;
const S: usize = Layout::S;
const V: usize = Layout::V;
const A: usize = Layout::A;
const Y: usize = Layout::Y;

/// Multiplies `p(z,s) p(v|s) 1{a=f(s,v)} p(y|a,s)` (or `p(v)` in causal
/// mode), then appends `p(ŷ|y,v,z)` or `p(u|y[,v]) 1{ŷ=ŷ(z,u)}` when the
/// auxiliary choice carries them.
pub fn assemble_joint(spec: &ProblemSpec, aux: &AuxiliaryChoice, causal: bool) -> Result<AssembledJoint> {
    aux.check_shapes(spec)?;
    if causal != aux.v.is_causal() {
        return Err(usage(if causal {
            "causal assembly needs an auxiliary stored as p(v)"
        } else {
            "non-causal assembly needs an auxiliary stored as p(v|s)"
        }));
    }
    let (zs, ss, vs, as_, ys) = (spec.z_size(), spec.s_size(), aux.v_size(), spec.a_size(), spec.y_size());
    let mut sizes = vec![zs, ss, vs, as_, ys];
    let yhat_axis = if aux.recon.is_some() || aux.u_kernel.is_some() {
        sizes.push(spec.yhat_size().expect("checked by check_shapes"));
        Some(sizes.len() - 1)
    } else {
        None
    };
    let u_axis = aux.u_kernel.as_ref().map(|k| {
        sizes.push(k.output_size());
        sizes.len() - 1
    });
    let cells: usize = sizes.iter().product();
    let mut mass = vec![0.0; cells];
    let mut idx = vec![0usize; sizes.len()];
    for cell in mass.iter_mut() {
        let (z, s, v, a, y) = (idx[Z], idx[S], idx[V], idx[A], idx[Y]);
        let mut p = 0.0;
        if aux.policy.action(s, v) == a {
            p = spec.state_prob(s, z) * aux.v.prob(s, v) * spec.channel_prob(a, s, y);
        }
        if p > 0.0 {
            if let (Some(r), Some(h)) = (&aux.recon, yhat_axis) {
                p *= r.row(&[y, v, z])[idx[h]];
            }
            if let (Some(k), Some(ua)) = (&aux.u_kernel, u_axis) {
                let u = idx[ua];
                let row = if k.input_sizes().len() == 1 {
                    k.row(&[y])
                } else {
                    k.row(&[y, v])
                };
                p *= row[u];
                let map = aux.yhat_map.as_ref().expect("checked by check_shapes");
                if map[z * k.output_size() + u] != idx[yhat_axis.expect("present with u")] {
                    p = 0.0;
                }
            }
        }
        *cell = p;
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < sizes[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    let table = JointTable::new(sizes, mass)?;
    Ok(AssembledJoint {
        table,
        layout: Layout {
            yhat: yhat_axis,
            u: u_axis,
            description: aux.description_inputs(),
        },
    })
}

/// `Λ′(s,a) = Σ_y p(y|a,s) Λ(a,s,y)`, row-major `[s][a]`.
pub fn reduced_cost(spec: &ProblemSpec) -> Vec<f64> {
    let (ss, as_, ys) = (spec.s_size(), spec.a_size(), spec.y_size());
    let mut out = vec![0.0; ss * as_];
    for s in 0..ss {
        for a in 0..as_ {
            out[s * as_ + a] = (0..ys)
                .map(|y| spec.channel_prob(a, s, y) * spec.cost_at(a, s, y))
                .sum();
        }
    }
    out
}

/// `E Λ(A,S,Y)` under an assembled joint.
pub fn expected_cost(joint: &AssembledJoint, spec: &ProblemSpec) -> Result<f64> {
    let m = joint.table.marginal(&[A, S, Y])?;
    let [as_, ss, ys] = [m.axis_sizes()[0], m.axis_sizes()[1], m.axis_sizes()[2]];
    if (as_, ss, ys) != (spec.a_size(), spec.s_size(), spec.y_size()) {
        return Err(usage("joint axes do not match the spec"));
    }
    let mut total = 0.0;
    m.for_each_cell(|i, p| total += p * spec.cost_at(i[0], i[1], i[2]));
    Ok(total)
}

/// `E Λ′(S,A)` with a reduced cost table from [`reduced_cost`].
pub fn expected_reduced_cost(joint: &AssembledJoint, reduced: &[f64]) -> Result<f64> {
    let m = joint.table.marginal(&[S, A])?;
    let as_ = m.axis_sizes()[1];
    if reduced.len() != m.mass().len() {
        return Err(usage("reduced cost table does not match the joint"));
    }
    let mut total = 0.0;
    m.for_each_cell(|i, p| total += p * reduced[i[0] * as_ + i[1]]);
    Ok(total)
}

/// `I(V;S|Z) + H(Y|V,Z)`: the non-causal lossless rate of a choice.
pub fn objective_theorem1(joint: &AssembledJoint) -> Result<f64> {
    Ok(conditional_mutual_information(&joint.table, &[V], &[S], &[Z])?
        + conditional_entropy(&joint.table, &[Y], &[V, Z])?)
}

/// `H(Y|V,Z)`: the causal lossless rate of a choice.
pub fn objective_theorem2(joint: &AssembledJoint) -> Result<f64> {
    conditional_entropy(&joint.table, &[Y], &[V, Z])
}

fn yhat_axis(joint: &AssembledJoint) -> Result<usize> {
    joint
        .layout
        .yhat
        .ok_or_else(|| usage("joint has no reconstruction axis"))
}

fn u_axis(joint: &AssembledJoint) -> Result<usize> {
    joint.layout.u.ok_or_else(|| usage("joint has no description (U) axis"))
}

/// `I(Y;Ŷ|V,Z)`: the causal lossy rate with side information at both ends.
pub fn objective_theorem3(joint: &AssembledJoint) -> Result<f64> {
    let h = yhat_axis(joint)?;
    conditional_mutual_information(&joint.table, &[Y], &[h], &[V, Z])
}

/// `I(V;S|Z) + I(Ŷ;Y|V,Z)`: non-causal lossy upper bound, side information
/// at both ends.
pub fn bound_theorem4(joint: &AssembledJoint) -> Result<f64> {
    let h = yhat_axis(joint)?;
    Ok(conditional_mutual_information(&joint.table, &[V], &[S], &[Z])?
        + conditional_mutual_information(&joint.table, &[h], &[Y], &[V, Z])?)
}

fn description_rate(joint: &AssembledJoint) -> Result<f64> {
    let u = u_axis(joint)?;
    Ok(conditional_mutual_information(&joint.table, &[V], &[S], &[Z])?
        + conditional_mutual_information(&joint.table, &[u], &[Y], &[V, Z])?)
}

/// Result of [`bound_theorem5`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DescriptionBound {
    pub value: f64,
    /// `U - Y - (V,Z)` in [`bound_theorem5`], `I(V;S) ≤ I(V;Y)` in [`bound_theorem6`].
    pub holds: bool,
}

/// `I(V;S|Z) + I(U;Y|V,Z)` for a description `p(u|y)`; the flag reports
/// whether `U - Y - (V,Z)` holds numerically in the joint.
pub fn bound_theorem5(joint: &AssembledJoint) -> Result<DescriptionBound> {
    if joint.layout.description != Some(DescriptionInputs::Output) {
        return Err(usage("bound_theorem5 needs a description generated by p(u|y) alone"));
    }
    let u = u_axis(joint)?;
    let value = description_rate(joint)?;
    let gap = conditional_mutual_information(&joint.table, &[u], &[V, Z], &[Y])?;
    Ok(DescriptionBound {
        value,
        holds: gap <= STRUCTURE_TOLERANCE,
    })
}

/// `I(V;S|Z) + I(U;Y|V,Z)` for a description `p(u|y,v)`, feasible when
/// `I(V;S) ≤ I(V;Y)`.
pub fn bound_theorem6(joint: &AssembledJoint) -> Result<DescriptionBound> {
    if joint.layout.description.is_none() {
        return Err(usage("bound_theorem6 needs a U description"));
    }
    let value = description_rate(joint)?;
    let ivs = mutual_information(&joint.table, &[V], &[S])?;
    let ivy = mutual_information(&joint.table, &[V], &[Y])?;
    Ok(DescriptionBound {
        value,
        holds: ivs <= ivy + STRUCTURE_TOLERANCE,
    })
}

/// `E d(Y, Ŷ)`.
pub fn expected_distortion(joint: &AssembledJoint, spec: &ProblemSpec) -> Result<f64> {
    if spec.distortion_table().is_none() {
        return Err(usage("the spec has no distortion table"));
    }
    let h = yhat_axis(joint)?;
    let m = joint.table.marginal(&[Y, h])?;
    let mut total = 0.0;
    m.for_each_cell(|i, p| {
        if p > 0.0 {
            total += p * spec.distortion_at(i[0], i[1]).expect("checked above");
        }
    });
    Ok(total)
}

/// `I(a; b | given)` on an assembled joint; zero when the Markov chain
/// `a - given - b` holds.
pub fn markov_gap(joint: &AssembledJoint, a: &[usize], b: &[usize], given: &[usize]) -> Result<f64> {
    conditional_mutual_information(&joint.table, a, b, given)
}
