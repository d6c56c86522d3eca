//! Classical binary differential evolution operators.
//!
//! A candidate feature subset is a [`BinaryVector`]; mutation produces a
//! real-valued donor combination that is pushed back to bits through a
//! sigmoid, and crossover mixes the discretized mutant with its target.
//! Survivor selection lives next to the population record type in
//! [`crate::engine::select`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chaos::RandomSource;

/// Fixed-length bit mask over the feature dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryVector {
    bits: Vec<bool>,
}

impl BinaryVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    /// Mask of length `len` with exactly the given bits set.
    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut mask = Self::zeros(len);
        for &index in indices {
            mask.set(index, true);
        }
        mask
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of selected features.
    pub fn cardinality(&self) -> usize {
        self.bits.iter().filter(|&&bit| bit).count()
    }

    pub fn get(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn set(&mut self, index: usize, value: bool) {
        self.bits[index] = value;
    }

    /// Indices of the selected features, ascending.
    pub fn ones_indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(index, &bit)| bit.then_some(index))
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    /// Force one uniformly chosen bit when the mask is empty. A zero-feature
    /// classifier is undefined, so every evolved mask passes through this.
    pub fn repair_empty(&mut self, rng: &mut RandomSource) {
        if !self.bits.is_empty() && self.cardinality() == 0 {
            let index = rng.next_index(self.bits.len());
            self.bits[index] = true;
        }
    }

    /// Compact `0`/`1` string, feature 0 first.
    pub fn as_bitstring(&self) -> String {
        self.bits
            .iter()
            .map(|&bit| if bit { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_bitstring())
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Differential mutation `x1 + f * (x2 - x3)` on bits read as reals.
pub fn de_mutation(x1: &BinaryVector, x2: &BinaryVector, x3: &BinaryVector, f: f64) -> Vec<f64> {
    assert_eq!(x1.len(), x2.len());
    assert_eq!(x1.len(), x3.len());
    x1.iter()
        .zip(x2.iter().zip(x3.iter()))
        .map(|(a, (b, c))| {
            let (a, b, c) = (a as u8 as f64, b as u8 as f64, c as u8 as f64);
            a + f * (b - c)
        })
        .collect()
}

/// Sigmoid-based discretization: bit j is set when the draw falls below
/// `sigmoid(m_j)`.
pub fn sigmoid_discretize(mutant: &[f64], rng: &mut RandomSource) -> BinaryVector {
    BinaryVector::new(
        mutant
            .iter()
            .map(|&value| rng.next_f64() < sigmoid(value))
            .collect(),
    )
}

/// Binomial crossover. Bit j comes from the mutant when the draw is below
/// `cr` and `j != locked_index`; the locked column always keeps the target's
/// bit. One draw is consumed per position, including the locked one.
pub fn binary_crossover(
    mutant: &BinaryVector,
    target: &BinaryVector,
    cr: f64,
    locked_index: usize,
    rng: &mut RandomSource,
) -> BinaryVector {
    assert_eq!(mutant.len(), target.len());
    BinaryVector::new(
        (0..mutant.len())
            .map(|j| {
                let take_mutant = rng.next_f64() < cr && j != locked_index;
                if take_mutant {
                    mutant.get(j)
                } else {
                    target.get(j)
                }
            })
            .collect(),
    )
}
