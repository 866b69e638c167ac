//! Finite-alphabet probability tables and information measures.
//!
//! Every quantity here is in bits and uses the convention `0 log 0 = 0`.
//! Tables are dense: alphabets in this crate are tiny, so a joint table over
//! seven variables still fits in a few thousand doubles.

use crate::error::{usage, Error, Result};

/// Tolerance on the total mass of a distribution or table.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Negative information values above this threshold are floating-point
/// noise and are clamped to zero; anything below is reported as an error.
pub const NEGATIVE_CLAMP: f64 = -1e-10;

/// `-Σ p log₂ p` over a raw mass slice, skipping zero entries.
pub(crate) fn entropy_bits(mass: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in mass {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

fn check_mass(mass: &[f64], tolerance: f64) -> Result<()> {
    if mass.is_empty() {
        return Err(Error::InvalidDistribution("empty support".into()));
    }
    let mut sum = 0.0;
    for (i, &p) in mass.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!("entry {i} has mass {p}")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > tolerance {
        return Err(Error::InvalidDistribution(format!(
            "total mass {sum} differs from 1 by more than {tolerance:e}"
        )));
    }
    Ok(())
}

/// A probability mass function over `0..support_size`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    mass: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        check_mass(&mass, MASS_TOLERANCE)?;
        Ok(Self { mass })
    }

    /// Accepts a vector whose sum is within `tolerance` of one and
    /// renormalizes it exactly.
    pub fn normalized(mut mass: Vec<f64>, tolerance: f64) -> Result<Self> {
        check_mass(&mass, tolerance)?;
        let sum: f64 = mass.iter().sum();
        mass.iter_mut().for_each(|p| *p /= sum);
        Ok(Self { mass })
    }

    pub fn uniform(support_size: usize) -> Result<Self> {
        if support_size == 0 {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        Ok(Self {
            mass: vec![1.0 / support_size as f64; support_size],
        })
    }

    pub fn point_mass(support_size: usize, at: usize) -> Result<Self> {
        if at >= support_size {
            return Err(usage(format!(
                "point mass at {at} outside support of size {support_size}"
            )));
        }
        let mut mass = vec![0.0; support_size];
        mass[at] = 1.0;
        Ok(Self { mass })
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain {
                param: "p",
                value: p,
                expected: "0 <= p <= 1",
            });
        }
        Ok(Self { mass: vec![1.0 - p, p] })
    }

    pub fn support_size(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn into_mass(self) -> Vec<f64> {
        self.mass
    }
}

/// Shannon entropy of a distribution, in bits.
pub fn entropy(d: &DiscreteDistribution) -> f64 {
    entropy_bits(d.mass())
}

/// Entropy of a mass vector that has not been wrapped yet; validates first.
pub fn entropy_of_mass(mass: &[f64]) -> Result<f64> {
    check_mass(mass, MASS_TOLERANCE)?;
    Ok(entropy_bits(mass))
}

/// Dense joint probability table. Axis `k` has `axis_sizes()[k]` symbols and
/// the mass is stored row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    mass: Vec<f64>,
}

fn strides_for(sizes: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; sizes.len()];
    for k in (0..sizes.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * sizes[k + 1];
    }
    strides
}

impl JointTable {
    pub fn new(axis_sizes: Vec<usize>, mass: Vec<f64>) -> Result<Self> {
        if axis_sizes.contains(&0) {
            return Err(usage("joint table axes must be non-empty"));
        }
        let cells: usize = axis_sizes.iter().product();
        if cells != mass.len() {
            return Err(usage(format!(
                "axis sizes {axis_sizes:?} need {cells} cells, got {}",
                mass.len()
            )));
        }
        check_mass(&mass, MASS_TOLERANCE)?;
        Ok(Self {
            strides: strides_for(&axis_sizes),
            sizes: axis_sizes,
            mass,
        })
    }

    pub fn from_distribution(d: &DiscreteDistribution) -> Self {
        Self {
            sizes: vec![d.support_size()],
            strides: vec![1],
            mass: d.mass().to_vec(),
        }
    }

    /// Builds the table of independent variables, in order.
    pub fn product(factors: &[&DiscreteDistribution]) -> Result<Self> {
        let mut mass = vec![1.0];
        for d in factors {
            let mut next = Vec::with_capacity(mass.len() * d.support_size());
            for &m in &mass {
                next.extend(d.mass().iter().map(|&p| m * p));
            }
            mass = next;
        }
        Self::new(factors.iter().map(|d| d.support_size()).collect(), mass)
    }

    pub fn axis_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn rank(&self) -> usize {
        self.sizes.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.strides).map(|(&i, &s)| i * s).sum()
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.mass[self.flat_index(index)]
    }

    /// Calls `f(multi_index, mass)` for every cell in row-major order.
    pub fn for_each_cell(&self, mut f: impl FnMut(&[usize], f64)) {
        let mut idx = vec![0usize; self.sizes.len()];
        for &m in &self.mass {
            f(&idx, m);
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < self.sizes[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    fn check_axes(&self, axes: &[usize]) -> Result<()> {
        for (i, &a) in axes.iter().enumerate() {
            if a >= self.rank() {
                return Err(usage(format!(
                    "axis {a} out of range for a table of rank {}",
                    self.rank()
                )));
            }
            if axes[..i].contains(&a) {
                return Err(usage(format!("axis {a} listed twice")));
            }
        }
        Ok(())
    }

    /// Marginal over `axes`, with the result's axes in the order given.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointTable> {
        self.check_axes(axes)?;
        let sizes: Vec<usize> = axes.iter().map(|&a| self.sizes[a]).collect();
        let out_strides = strides_for(&sizes);
        let cells: usize = sizes.iter().product();
        let mut mass = vec![0.0; cells];
        self.for_each_cell(|idx, m| {
            let target: usize = axes.iter().zip(&out_strides).map(|(&a, &s)| idx[a] * s).sum();
            mass[target] += m;
        });
        Ok(JointTable {
            sizes,
            strides: out_strides,
            mass,
        })
    }

    /// Joint entropy of the variables on `axes` (0 for an empty list).
    pub fn entropy_of(&self, axes: &[usize]) -> Result<f64> {
        if axes.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_bits(self.marginal(axes)?.mass()))
    }

    /// The table conditioned on `axis == value`, with that axis removed.
    pub fn condition_on(&self, axis: usize, value: usize) -> Result<JointTable> {
        self.check_axes(&[axis])?;
        if value >= self.sizes[axis] {
            return Err(usage(format!(
                "value {value} outside axis {axis} of size {}",
                self.sizes[axis]
            )));
        }
        let keep: Vec<usize> = (0..self.rank()).filter(|&k| k != axis).collect();
        let sizes: Vec<usize> = keep.iter().map(|&k| self.sizes[k]).collect();
        let out_strides = strides_for(&sizes);
        let mut mass = vec![0.0; sizes.iter().product::<usize>().max(1)];
        let mut total = 0.0;
        self.for_each_cell(|idx, m| {
            if idx[axis] == value {
                let target: usize = keep.iter().zip(&out_strides).map(|(&k, &s)| idx[k] * s).sum();
                mass[target] += m;
                total += m;
            }
        });
        if total <= 0.0 {
            return Err(usage(format!(
                "conditioning event axis {axis} = {value} has zero probability"
            )));
        }
        mass.iter_mut().for_each(|p| *p /= total);
        Ok(JointTable {
            sizes,
            strides: out_strides,
            mass,
        })
    }
}

/// A family of distributions over `0..output_size`, one per tuple of inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalKernel {
    input_sizes: Vec<usize>,
    output_size: usize,
    rows: Vec<f64>,
}

impl ConditionalKernel {
    /// `rows` holds one row per input tuple (row-major over the inputs),
    /// each row of length `output_size`.
    pub fn new(input_sizes: Vec<usize>, output_size: usize, rows: Vec<f64>) -> Result<Self> {
        if output_size == 0 || input_sizes.contains(&0) {
            return Err(usage("kernel alphabets must be non-empty"));
        }
        let n_rows: usize = input_sizes.iter().product();
        if rows.len() != n_rows * output_size {
            return Err(usage(format!(
                "kernel with inputs {input_sizes:?} and {output_size} outputs needs {} entries, got {}",
                n_rows * output_size,
                rows.len()
            )));
        }
        for (r, row) in rows.chunks(output_size).enumerate() {
            check_mass(row, MASS_TOLERANCE).map_err(|e| Error::InvalidDistribution(format!("row {r}: {e}")))?;
        }
        Ok(Self {
            input_sizes,
            output_size,
            rows,
        })
    }

    pub fn from_rows(input_sizes: Vec<usize>, rows: Vec<DiscreteDistribution>) -> Result<Self> {
        let output_size = rows.first().map_or(0, |r| r.support_size());
        if rows.iter().any(|r| r.support_size() != output_size) {
            return Err(usage("kernel rows have different support sizes"));
        }
        let flat = rows.into_iter().flat_map(|r| r.into_mass()).collect();
        Self::new(input_sizes, output_size, flat)
    }

    /// `p(x'|x) = 1{x' = x}` over an alphabet of size `n`.
    pub fn identity(n: usize) -> Result<Self> {
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            rows[i * n + i] = 1.0;
        }
        Self::new(vec![n], n, rows)
    }

    /// A kernel whose every row is `d`.
    pub fn constant(input_sizes: Vec<usize>, d: &DiscreteDistribution) -> Result<Self> {
        let n_rows: usize = input_sizes.iter().product();
        let rows = (0..n_rows).flat_map(|_| d.mass().iter().copied()).collect();
        Self::new(input_sizes, d.support_size(), rows)
    }

    /// A deterministic kernel: row `r` is a point mass at `map[r]`.
    pub fn deterministic(input_sizes: Vec<usize>, output_size: usize, map: &[usize]) -> Result<Self> {
        let n_rows: usize = input_sizes.iter().product();
        if map.len() != n_rows || map.iter().any(|&o| o >= output_size) {
            return Err(usage("deterministic kernel map has the wrong shape"));
        }
        let mut rows = vec![0.0; n_rows * output_size];
        for (r, &o) in map.iter().enumerate() {
            rows[r * output_size + o] = 1.0;
        }
        Self::new(input_sizes, output_size, rows)
    }

    pub fn input_sizes(&self) -> &[usize] {
        &self.input_sizes
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn row_count(&self) -> usize {
        self.input_sizes.iter().product()
    }

    pub fn row_index(&self, inputs: &[usize]) -> usize {
        inputs
            .iter()
            .zip(&self.input_sizes)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn row(&self, inputs: &[usize]) -> &[f64] {
        self.row_at(self.row_index(inputs))
    }

    pub fn row_at(&self, r: usize) -> &[f64] {
        &self.rows[r * self.output_size..(r + 1) * self.output_size]
    }

    pub fn flat(&self) -> &[f64] {
        &self.rows
    }
}

fn check_disjoint(lists: &[&[usize]]) -> Result<()> {
    for (i, a) in lists.iter().enumerate() {
        for b in &lists[i + 1..] {
            if let Some(x) = a.iter().find(|x| b.contains(x)) {
                return Err(usage(format!("axis {x} appears in more than one argument")));
            }
        }
    }
    Ok(())
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

/// `H(targets | given)` in bits.
pub fn conditional_entropy(j: &JointTable, target_axes: &[usize], given_axes: &[usize]) -> Result<f64> {
    check_disjoint(&[target_axes, given_axes])?;
    let h = j.entropy_of(&union(target_axes, given_axes))? - j.entropy_of(given_axes)?;
    Ok(h.max(0.0))
}

/// `I(A; B | C)` in bits. Values in `(-1e-10, 0)` are clamped to zero.
pub fn conditional_mutual_information(
    j: &JointTable,
    axes_a: &[usize],
    axes_b: &[usize],
    given_axes: &[usize],
) -> Result<f64> {
    check_disjoint(&[axes_a, axes_b, given_axes])?;
    let ac = union(axes_a, given_axes);
    let bc = union(axes_b, given_axes);
    let abc = union(&ac, axes_b);
    let i = j.entropy_of(&ac)? + j.entropy_of(&bc)? - j.entropy_of(&abc)? - j.entropy_of(given_axes)?;
    if i < NEGATIVE_CLAMP {
        return Err(Error::NumericalIntegrity {
            what: "conditional mutual information",
            value: i,
        });
    }
    Ok(i.max(0.0))
}

/// `I(A; B)` in bits.
pub fn mutual_information(j: &JointTable, axes_a: &[usize], axes_b: &[usize]) -> Result<f64> {
    conditional_mutual_information(j, axes_a, axes_b, &[])
}

/// `H₂(x) = -x log₂ x - (1-x) log₂(1-x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            param: "x",
            value: x,
            expected: "0 <= x <= 1",
        });
    }
    Ok(h2(x))
}

/// Unchecked binary entropy for callers that already validated `x`.
pub(crate) fn h2(x: f64) -> f64 {
    entropy_bits(&[x, 1.0 - x])
}

/// `dH₂/dx = log₂((1-x)/x)` on the open interval.
pub fn binary_entropy_derivative(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain {
            param: "x",
            value: x,
            expected: "0 < x < 1",
        });
    }
    Ok(((1.0 - x) / x).log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(sizes: &[usize], mass: &[f64]) -> JointTable {
        JointTable::new(sizes.to_vec(), mass.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&DiscreteDistribution::uniform(2).unwrap()), 1.0);
        assert_eq!(entropy(&DiscreteDistribution::point_mass(3, 1).unwrap()), 0.0);
        // -0.1 log2 0.1 - 0.9 log2 0.9
        let direct = 0.1 * (10.0f64).log2() + 0.9 * (1.0f64 / 0.9).log2();
        let h = entropy(&DiscreteDistribution::new(vec![0.1, 0.9]).unwrap());
        assert!((h - direct).abs() < 1e-15);
        assert!((h - 0.4690).abs() < 1e-4);
    }

    #[test]
    fn invalid_distributions_rejected() {
        assert!(DiscreteDistribution::new(vec![-0.1, 1.1]).is_err());
        assert!(DiscreteDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(entropy_of_mass(&[0.3, 0.3]).is_err());
        assert!(DiscreteDistribution::normalized(vec![0.5, 0.5 + 5e-10], 1e-9).is_ok());
    }

    #[test]
    fn conditional_entropy_examples() {
        let indep = table(&[2, 2], &[0.25; 4]);
        assert!((conditional_entropy(&indep, &[0], &[1]).unwrap() - 1.0).abs() < 1e-15);
        let copy = table(&[2, 2], &[0.5, 0.0, 0.0, 0.5]);
        assert_eq!(conditional_entropy(&copy, &[0], &[1]).unwrap(), 0.0);
        // uniform input through BSC(0.1): axes (input, output)
        let bsc = table(&[2, 2], &[0.45, 0.05, 0.05, 0.45]);
        let h = conditional_entropy(&bsc, &[1], &[0]).unwrap();
        assert!((h - h2(0.1)).abs() < 1e-12);
        assert!(matches!(conditional_entropy(&bsc, &[0], &[0]), Err(Error::Usage(_))));
    }

    #[test]
    fn mutual_information_examples() {
        let indep = table(&[2, 2], &[0.25; 4]);
        assert_eq!(mutual_information(&indep, &[0], &[1]).unwrap(), 0.0);
        let copy = table(&[2, 2], &[0.5, 0.0, 0.0, 0.5]);
        assert!((mutual_information(&copy, &[0], &[1]).unwrap() - 1.0).abs() < 1e-15);
        // A = C = B, all copies of one fair bit
        let chain = table(&[2, 2, 2], &[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5]);
        assert_eq!(conditional_mutual_information(&chain, &[0], &[2], &[1]).unwrap(), 0.0);
        assert!(conditional_mutual_information(&chain, &[0], &[0], &[1]).is_err());
        assert!(conditional_mutual_information(&chain, &[0], &[1], &[3]).is_err());
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.1).unwrap() - 0.4690).abs() < 1e-4);
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(-0.01).is_err());
    }

    #[test]
    fn binary_entropy_derivative_examples() {
        assert_eq!(binary_entropy_derivative(0.5).unwrap(), 0.0);
        assert!((binary_entropy_derivative(0.25).unwrap() - 3f64.log2()).abs() < 1e-15);
        for x in [0.1, 0.2, 0.3, 0.45] {
            let a = binary_entropy_derivative(x).unwrap();
            let b = binary_entropy_derivative(1.0 - x).unwrap();
            assert!(a > 0.0 && b < 0.0);
            assert!((a + b).abs() < 1e-12);
        }
        assert!(binary_entropy_derivative(0.0).is_err());
        assert!(binary_entropy_derivative(1.0).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let step = 1e-5;
        for k in 1..=9 {
            let x = k as f64 / 10.0;
            let fd = (h2(x + step) - h2(x - step)) / (2.0 * step);
            assert!((binary_entropy_derivative(x).unwrap() - fd).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn conditioning_removes_axis() {
        let t = table(&[2, 3], &[0.1, 0.2, 0.1, 0.3, 0.1, 0.2]);
        let c = t.condition_on(0, 1).unwrap();
        assert_eq!(c.axis_sizes(), &[3]);
        assert!((c.mass()[0] - 0.5).abs() < 1e-12);
        assert!(t.condition_on(1, 3).is_err());
    }

    #[test]
    fn kernel_rows_validated() {
        assert!(ConditionalKernel::new(vec![2], 2, vec![0.5, 0.5, 0.7, 0.2]).is_err());
        let k = ConditionalKernel::new(vec![2, 3], 2, vec![0.5; 12]).unwrap();
        assert_eq!(k.row_index(&[1, 2]), 5);
        assert_eq!(k.row(&[1, 2]), &[0.5, 0.5]);
    }
}
