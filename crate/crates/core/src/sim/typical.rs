//! Robust joint typicality.

use crate::error::{usage, Result};
use crate::info::JointTable;

/// `|count(x)/n - p(x)| ≤ ε·p(x)` for every tuple `x`, so a tuple of
/// probability zero may not appear at all.
pub fn is_jointly_typical(sequences: &[&[usize]], joint: &JointTable, epsilon: f64) -> Result<bool> {
    if sequences.len() != joint.rank() {
        return Err(usage(format!(
            "{} sequences for a table of rank {}",
            sequences.len(),
            joint.rank()
        )));
    }
    let n = sequences.first().map_or(0, |s| s.len());
    if sequences.iter().any(|s| s.len() != n) {
        return Err(usage("sequences have different lengths"));
    }
    for (s, &size) in sequences.iter().zip(joint.axis_sizes()) {
        if s.iter().any(|&x| x >= size) {
            return Err(usage(format!("symbol outside an alphabet of size {size}")));
        }
    }
    let test = Typicality::new(joint, epsilon);
    let mut counts = Vec::new();
    Ok(test.check(sequences, &mut counts))
}

/// A typicality test with the table flattened once.
#[derive(Clone, Debug)]
pub(crate) struct Typicality {
    strides: Vec<usize>,
    mass: Vec<f64>,
    epsilon: f64,
}

impl Typicality {
    pub fn new(joint: &JointTable, epsilon: f64) -> Self {
        let sizes = joint.axis_sizes();
        let mut strides = vec![1; sizes.len()];
        for k in (0..sizes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * sizes[k + 1];
        }
        Self {
            strides,
            mass: joint.mass().to_vec(),
            epsilon,
        }
    }

    /// Sequences must have equal lengths and in-range symbols.
    pub fn check(&self, sequences: &[&[usize]], counts: &mut Vec<u32>) -> bool {
        let n = sequences.first().map_or(0, |s| s.len());
        if n == 0 {
            return false;
        }
        counts.clear();
        counts.resize(self.mass.len(), 0);
        for i in 0..n {
            let cell: usize = sequences.iter().zip(&self.strides).map(|(s, st)| s[i] * st).sum();
            if self.mass[cell] == 0.0 {
                return false;
            }
            counts[cell] += 1;
        }
        let n = n as f64;
        self.mass
            .iter()
            .zip(counts.iter())
            .all(|(&p, &c)| (c as f64 / n - p).abs() <= self.epsilon * p + 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_pair() -> JointTable {
        JointTable::new(vec![2, 2], vec![0.25; 4]).unwrap()
    }

    #[test]
    fn constant_sequence_is_not_typical() {
        let p = JointTable::new(vec![2], vec![0.5, 0.5]).unwrap();
        assert!(!is_jointly_typical(&[&[0; 10]], &p, 0.1).unwrap());
        assert!(is_jointly_typical(&[&[0, 1, 0, 1, 1, 0, 1, 0, 0, 1]], &p, 0.1).unwrap());
    }

    #[test]
    fn zero_probability_tuple_excludes() {
        let p = JointTable::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(is_jointly_typical(&[&[0, 1, 0, 1], &[0, 1, 0, 1]], &p, 0.5).unwrap());
        assert!(!is_jointly_typical(&[&[0, 1, 0, 1], &[0, 1, 0, 0]], &p, 0.99).unwrap());
    }

    #[test]
    fn slack_is_relative() {
        let p = uniform_pair();
        let a = [0, 0, 1, 1, 0, 0, 1, 1];
        let b = [0, 1, 0, 1, 0, 1, 0, 0];
        // counts 2, 2, 3, 1 against 2 each
        assert!(!is_jointly_typical(&[&a, &b], &p, 0.4).unwrap());
        assert!(is_jointly_typical(&[&a, &b], &p, 0.5).unwrap());
    }

    #[test]
    fn shape_errors() {
        let p = uniform_pair();
        assert!(is_jointly_typical(&[&[0, 1]], &p, 0.1).is_err());
        assert!(is_jointly_typical(&[&[0, 1], &[0]], &p, 0.1).is_err());
        assert!(is_jointly_typical(&[&[0, 2], &[0, 1]], &p, 0.1).is_err());
    }

    #[test]
    fn long_iid_sequence_is_typical() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let s: Vec<usize> = (0..20_000).map(|_| rng.random_range(0..2)).collect();
        let p = JointTable::new(vec![2], vec![0.5, 0.5]).unwrap();
        assert!(is_jointly_typical(&[&s], &p, 0.05).unwrap());
    }
}
