use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::linalg::CMatrix;

use super::devices::EntropyBin;

/// Discrete outcome label of a readout device.
///
/// Matrix outcomes store the rounded entries as f64 bit patterns
/// (negative zero normalized away), which gives exact equality and a
/// deterministic ordering for merged outcome distributions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutcomeKey {
    /// Entrywise-rounded density matrix, row-major `(re, im)` bits.
    Matrix(Vec<(u64, u64)>),
    /// Entropy-meter bin.
    Bin(EntropyBin),
    /// Index of a POVM effect.
    Index(usize),
}

fn normalize_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

impl OutcomeKey {
    pub fn from_rounded_matrix(m: &CMatrix) -> Self {
        let mut bits = Vec::with_capacity(m.nrows() * m.ncols());
        for row in 0..m.nrows() {
            for col in 0..m.ncols() {
                let z = m[(row, col)];
                bits.push((normalize_zero(z.re).to_bits(), normalize_zero(z.im).to_bits()));
            }
        }
        OutcomeKey::Matrix(bits)
    }

    /// Reconstructs the rounded matrix of a `Matrix` key.
    pub fn matrix(&self, dim: usize) -> Option<CMatrix> {
        match self {
            OutcomeKey::Matrix(bits) if bits.len() == dim * dim => {
                Some(CMatrix::from_fn(dim, dim, |row, col| {
                    let (re, im) = bits[row * dim + col];
                    Complex64::new(f64::from_bits(re), f64::from_bits(im))
                }))
            }
            _ => None,
        }
    }
}

impl Serialize for OutcomeKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            OutcomeKey::Matrix(bits) => {
                let dim = (bits.len() as f64).sqrt().round() as usize;
                let rows: Vec<Vec<[f64; 2]>> = (0..dim)
                    .map(|r| {
                        (0..dim)
                            .map(|c| {
                                let (re, im) = bits[r * dim + c];
                                [f64::from_bits(re), f64::from_bits(im)]
                            })
                            .collect()
                    })
                    .collect();
                #[derive(Serialize)]
                struct M<'a> {
                    matrix: &'a Vec<Vec<[f64; 2]>>,
                }
                M { matrix: &rows }.serialize(serializer)
            }
            OutcomeKey::Bin(bin) => {
                #[derive(Serialize)]
                struct B {
                    bin: String,
                }
                B { bin: format!("{bin}") }.serialize(serializer)
            }
            OutcomeKey::Index(i) => {
                #[derive(Serialize)]
                struct I {
                    index: usize,
                }
                I { index: *i }.serialize(serializer)
            }
        }
    }
}

/// A finite outcome distribution with canonically ordered support.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    entries: BTreeMap<OutcomeKey, f64>,
}

impl OutcomeDistribution {
    pub fn new() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn add(&mut self, key: OutcomeKey, prob: f64) {
        *self.entries.entry(key).or_insert(0.0) += prob;
    }

    pub fn entries(&self) -> impl Iterator<Item = (&OutcomeKey, f64)> {
        self.entries.iter().map(|(k, &p)| (k, p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn prob(&self, key: &OutcomeKey) -> f64 {
        self.entries.get(key).copied().unwrap_or(0.0)
    }

    /// Total-variation distance, `(1/2) sum |p - q|` over the joint support.
    pub fn tv_distance(&self, other: &OutcomeDistribution) -> f64 {
        let mut keys: Vec<&OutcomeKey> = self.entries.keys().collect();
        for k in other.entries.keys() {
            if !self.entries.contains_key(k) {
                keys.push(k);
            }
        }
        0.5 * keys
            .into_iter()
            .map(|k| (self.prob(k) - other.prob(k)).abs())
            .sum::<f64>()
    }

    /// Rounded-matrix outcomes materialized for display.
    pub fn sr_outcomes(&self, dim: usize) -> Vec<SrOutcome> {
        self.entries()
            .filter_map(|(k, p)| k.matrix(dim).map(|m| SrOutcome { matrix: m, probability: p }))
            .collect()
    }
}

impl Default for OutcomeDistribution {
    fn default() -> Self {
        Self::new()
    }
}

impl Serialize for OutcomeDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            outcome: &'a OutcomeKey,
            probability: f64,
        }
        let mut seq = serializer.serialize_seq(Some(self.entries.len()))?;
        for (k, p) in self.entries() {
            seq.serialize_element(&Entry { outcome: k, probability: p })?;
        }
        seq.end()
    }
}

/// A state-readout outcome: the rounded reduced density matrix and the
/// probability of reading it.
#[derive(Debug, Clone)]
pub struct SrOutcome {
    pub matrix: CMatrix,
    pub probability: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, identity};

    #[test]
    fn tv_of_disjoint_supports_is_one() {
        let mut p = OutcomeDistribution::new();
        p.add(OutcomeKey::Index(0), 1.0);
        let mut q = OutcomeDistribution::new();
        q.add(OutcomeKey::Index(1), 0.5);
        q.add(OutcomeKey::Index(2), 0.5);
        assert!((p.tv_distance(&q) - 1.0).abs() < 1e-15);
        assert!((q.tv_distance(&p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identical_distributions_have_zero_tv() {
        let mut p = OutcomeDistribution::new();
        p.add(OutcomeKey::from_rounded_matrix(&identity(2).unscale(2.0)), 1.0);
        assert!(p.tv_distance(&p.clone()) == 0.0);
    }

    #[test]
    fn negative_zero_entries_merge() {
        let m1 = CMatrix::from_row_slice(1, 1, &[c(0.0, 0.0)]);
        let m2 = CMatrix::from_row_slice(1, 1, &[c(-0.0, -0.0)]);
        let mut p = OutcomeDistribution::new();
        p.add(OutcomeKey::from_rounded_matrix(&m1), 0.5);
        p.add(OutcomeKey::from_rounded_matrix(&m2), 0.5);
        assert_eq!(p.len(), 1);
        assert!((p.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matrix_key_round_trips() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, -0.2), c(0.1, 0.2), c(0.5, 0.0)]);
        let key = OutcomeKey::from_rounded_matrix(&m);
        let back = key.matrix(2).unwrap();
        assert_eq!(back, m);
    }
}
