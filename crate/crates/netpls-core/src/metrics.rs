//! Partition agreement scores (adjusted Rand index, normalized mutual
//! information) and coefficient mean squared errors.

use ndarray::Array1;

use crate::error::{Error, Result};

/// A clustering of `n` items into labeled classes. Labels are
/// canonicalized to `0..k` in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new<I: IntoIterator<Item = usize>>(raw: I) -> Self {
        let mut map = std::collections::HashMap::new();
        let mut labels = Vec::new();
        for v in raw {
            let next = map.len();
            let id = *map.entry(v).or_insert(next);
            labels.push(id);
        }
        Partition { k: map.len(), labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

fn contingency(a: &Partition, b: &Partition) -> Vec<Vec<usize>> {
    let mut table = vec![vec![0usize; b.k]; a.k];
    for (&la, &lb) in a.labels.iter().zip(&b.labels) {
        table[la][lb] += 1;
    }
    table
}

fn comb2(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// Adjusted Rand index between two partitions of the same items. Equals 1
/// for identical partitions and is 0 in expectation under the permutation
/// model.
pub fn adjusted_rand_index(a: &Partition, b: &Partition) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "partition lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::invalid("empty partitions".to_string()));
    }
    let table = contingency(a, b);
    let sum_cells: f64 = table
        .iter()
        .flat_map(|row| row.iter())
        .map(|&c| comb2(c))
        .sum();
    let sum_a: f64 = a.class_sizes().iter().map(|&c| comb2(c)).sum();
    let sum_b: f64 = b.class_sizes().iter().map(|&c| comb2(c)).sum();
    let total = comb2(a.len());
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    if (max_index - expected).abs() < 1e-300 {
        // Both partitions are trivial (all singletons or one class); they
        // agree perfectly with themselves.
        return Ok(1.0);
    }
    Ok((sum_cells - expected) / (max_index - expected))
}

/// Normalization used for mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NmiNormalization {
    /// Geometric mean of the two entropies.
    #[default]
    Geometric,
    /// Arithmetic mean of the two entropies.
    Arithmetic,
}

/// Normalized mutual information `I(a; b) / norm(H(a), H(b))` with natural
/// logarithms. A partition with a single class has zero entropy; such
/// degenerate comparisons score 0 by convention.
pub fn normalized_mutual_information(a: &Partition, b: &Partition) -> Result<f64> {
    normalized_mutual_information_with(a, b, NmiNormalization::Geometric)
}

pub fn normalized_mutual_information_with(
    a: &Partition,
    b: &Partition,
    norm: NmiNormalization,
) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "partition lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::invalid("empty partitions".to_string()));
    }
    let n = a.len() as f64;
    let table = contingency(a, b);
    let sizes_a = a.class_sizes();
    let sizes_b = b.class_sizes();

    let entropy = |sizes: &[usize]| -> f64 {
        sizes
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let ha = entropy(&sizes_a);
    let hb = entropy(&sizes_b);
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let pij = c as f64 / n;
            let pa = sizes_a[i] as f64 / n;
            let pb = sizes_b[j] as f64 / n;
            mi += pij * (pij / (pa * pb)).ln();
        }
    }
    let denom = match norm {
        NmiNormalization::Geometric => (ha * hb).sqrt(),
        NmiNormalization::Arithmetic => 0.5 * (ha + hb),
    };
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((mi / denom).clamp(0.0, 1.0))
}

/// Per-coordinate mean squared error of a collection of estimates against a
/// single truth vector.
pub fn mse(estimates: &[Array1<f64>], truth: &Array1<f64>) -> Result<Array1<f64>> {
    if estimates.is_empty() {
        return Err(Error::invalid("no estimates provided".to_string()));
    }
    let p = truth.len();
    let mut acc = Array1::zeros(p);
    for est in estimates {
        if est.len() != p {
            return Err(Error::invalid(format!(
                "estimate has length {}, expected {p}",
                est.len()
            )));
        }
        for l in 0..p {
            let d = est[l] - truth[l];
            acc[l] += d * d;
        }
    }
    Ok(acc / estimates.len() as f64)
}
