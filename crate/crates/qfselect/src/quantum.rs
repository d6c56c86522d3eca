//! Quantum-inspired solution representation.
//!
//! Each feature dimension is encoded as an amplitude pair `(alpha, beta)`
//! with `alpha^2 + beta^2 = 1`; `beta^2` is the probability that the feature
//! collapses to "selected". A population member carries one pair per feature
//! in a [`QuantumMatrix`]. Evolution happens in amplitude space — by
//! differential mutation and crossover, or by rotation-gate steering toward
//! the best solution — and binary masks are sampled from the matrix by one of
//! two collapse rules. The threshold-gated rule caps the expected number of
//! selected features at `theta * sum(beta^2)`, which is what keeps subset
//! cardinality under control in high dimensions.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::chaos::RandomSource;
use crate::de::BinaryVector;

/// Absolute tolerance on the per-column unit-norm invariant.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// One amplitude pair. `beta * beta` is the probability of collapsing to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitPair {
    alpha: f64,
    beta: f64,
}

impl QubitPair {
    /// Pair from raw amplitudes. The caller is responsible for the unit
    /// norm; use [`QubitPair::clamped_normalized`] to repair arbitrary
    /// values.
    pub fn from_amplitudes(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    /// Equal superposition: both states observed with probability 1/2.
    pub fn balanced() -> Self {
        Self {
            alpha: FRAC_1_SQRT_2,
            beta: FRAC_1_SQRT_2,
        }
    }

    /// Pair with the given `alpha`; `beta` completes the unit norm.
    pub fn from_alpha(alpha: f64) -> Self {
        let alpha = alpha.clamp(0.0, 1.0);
        Self {
            alpha,
            beta: (1.0 - alpha * alpha).max(0.0).sqrt(),
        }
    }

    /// Clamp both amplitudes to `[0, 1]` and rescale to unit norm. A column
    /// that clamps to `(0, 0)` is reset to the balanced pair.
    pub fn clamped_normalized(alpha: f64, beta: f64) -> Self {
        let alpha = alpha.clamp(0.0, 1.0);
        let beta = beta.clamp(0.0, 1.0);
        let norm = (alpha * alpha + beta * beta).sqrt();
        if norm == 0.0 {
            return Self::balanced();
        }
        Self {
            alpha: alpha / norm,
            beta: beta / norm,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Probability of observing this qubit as bit 1.
    pub fn one_probability(&self) -> f64 {
        self.beta * self.beta
    }

    /// Planar rotation by `delta_theta` radians:
    /// `(alpha', beta') = (cos t * alpha - sin t * beta, sin t * alpha + cos t * beta)`.
    /// Norm-preserving and exactly invertible by the opposite angle.
    pub fn rotated(&self, delta_theta: f64) -> Self {
        let (sin, cos) = delta_theta.sin_cos();
        Self {
            alpha: cos * self.alpha - sin * self.beta,
            beta: sin * self.alpha + cos * self.beta,
        }
    }

    /// Sign that makes a positive rotation angle increase `beta^2`.
    ///
    /// `d(beta^2)/d(theta) = 2 alpha beta`, so the steering direction flips
    /// whenever a previous rotation pushed the pair out of the first
    /// quadrant.
    pub fn steering_sign(&self) -> f64 {
        if self.alpha * self.beta < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Absolute deviation of `alpha^2 + beta^2` from 1.
    pub fn norm_deviation(&self) -> f64 {
        (self.alpha * self.alpha + self.beta * self.beta - 1.0).abs()
    }
}

/// Amplitude matrix of a population member: one [`QubitPair`] per feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumMatrix {
    columns: Vec<QubitPair>,
}

impl QuantumMatrix {
    pub fn from_columns(columns: Vec<QubitPair>) -> Self {
        Self { columns }
    }

    /// Matrix of `n` balanced pairs.
    pub fn balanced(n: usize) -> Self {
        Self {
            columns: vec![QubitPair::balanced(); n],
        }
    }

    /// Number of feature dimensions.
    pub fn dimension(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[QubitPair] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> QubitPair {
        self.columns[index]
    }

    /// Worst per-column deviation from the unit norm.
    pub fn max_norm_deviation(&self) -> f64 {
        self.columns
            .iter()
            .map(QubitPair::norm_deviation)
            .fold(0.0, f64::max)
    }
}

/// Standard collapse: bit j is set when the draw falls below `beta_j^2`.
/// Consumes one draw per column. May return an all-zero mask.
pub fn collapse_standard(matrix: &QuantumMatrix, rng: &mut RandomSource) -> BinaryVector {
    BinaryVector::new(
        matrix
            .columns()
            .iter()
            .map(|column| rng.next_f64() < column.one_probability())
            .collect(),
    )
}

/// Threshold-gated collapse: bit j is set when one draw falls below
/// `beta_j^2` *and* a second, independent draw falls below `theta`.
///
/// All amplitude draws are consumed before any gate draw, so with
/// `theta = 1` the produced bits coincide with [`collapse_standard`] on a
/// source in the same state. An all-zero result is repaired by forcing one
/// uniformly chosen bit.
pub fn collapse_threshold(
    matrix: &QuantumMatrix,
    rng: &mut RandomSource,
    theta: f64,
) -> BinaryVector {
    debug_assert!((0.0..=1.0).contains(&theta));
    let amplitude_draws: Vec<f64> = matrix.columns().iter().map(|_| rng.next_f64()).collect();
    let mut mask = BinaryVector::new(
        matrix
            .columns()
            .iter()
            .zip(&amplitude_draws)
            .map(|(column, &draw)| {
                let amplitude_hit = draw < column.one_probability();
                let gate_open = rng.next_f64() < theta;
                amplitude_hit && gate_open
            })
            .collect(),
    );
    mask.repair_empty(rng);
    mask
}

/// Signed rotation angles indexed by `(x_bit, best_bit, x_is_fitter)`,
/// stored as multiples of pi.
///
/// The default entries leave agreeing bits untouched, pull strongly
/// (0.05 pi) toward the best solution's bit when the best is fitter, and
/// nudge weakly (0.01 pi) toward the solution's own bit when the solution
/// itself is fitter. Positive angles increase `beta^2` for a first-quadrant
/// pair; see [`QubitPair::steering_sign`] for how the direction is kept
/// meaningful after overshoot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationTable {
    pi_multiples: [f64; 8],
}

impl RotationTable {
    /// Table from eight signed multiples of pi, rows ordered by the 3-bit
    /// index `(x_bit << 2) | (best_bit << 1) | x_is_fitter`.
    pub fn from_pi_multiples(pi_multiples: [f64; 8]) -> Self {
        Self { pi_multiples }
    }

    pub fn pi_multiples(&self) -> &[f64; 8] {
        &self.pi_multiples
    }

    /// Signed rotation angle in radians for one qubit.
    pub fn angle(&self, x_bit: bool, best_bit: bool, x_is_fitter: bool) -> f64 {
        let index = ((x_bit as usize) << 2) | ((best_bit as usize) << 1) | (x_is_fitter as usize);
        self.pi_multiples[index] * PI
    }
}

impl Default for RotationTable {
    fn default() -> Self {
        Self::from_pi_multiples([
            0.0,   // x=0 best=0, best fitter
            0.0,   // x=0 best=0, x fitter
            0.05,  // x=0 best=1, best fitter: pull toward 1
            -0.01, // x=0 best=1, x fitter: keep own 0
            -0.05, // x=1 best=0, best fitter: pull toward 0
            0.01,  // x=1 best=0, x fitter: keep own 1
            0.0,   // x=1 best=1, best fitter
            0.0,   // x=1 best=1, x fitter
        ])
    }
}

/// Differential mutation in amplitude space: per column
/// `q1 + f * (q2 - q3)`, clamped to `[0, 1]` and renormalized. Columns that
/// clamp to `(0, 0)` reset to the balanced pair.
pub fn quantum_mutation(
    q1: &QuantumMatrix,
    q2: &QuantumMatrix,
    q3: &QuantumMatrix,
    f: f64,
) -> QuantumMatrix {
    assert_eq!(q1.dimension(), q2.dimension());
    assert_eq!(q1.dimension(), q3.dimension());
    QuantumMatrix::from_columns(
        q1.columns()
            .iter()
            .zip(q2.columns().iter().zip(q3.columns()))
            .map(|(a, (b, c))| {
                QubitPair::clamped_normalized(
                    a.alpha() + f * (b.alpha() - c.alpha()),
                    a.beta() + f * (b.beta() - c.beta()),
                )
            })
            .collect(),
    )
}

/// Binomial crossover on whole columns. Column j comes from the mutant when
/// the draw is below `cr` and `j != locked_index`; the locked column always
/// keeps the target's pair. One draw per column, including the locked one.
pub fn quantum_crossover(
    mutant: &QuantumMatrix,
    target: &QuantumMatrix,
    cr: f64,
    locked_index: usize,
    rng: &mut RandomSource,
) -> QuantumMatrix {
    assert_eq!(mutant.dimension(), target.dimension());
    QuantumMatrix::from_columns(
        (0..mutant.dimension())
            .map(|j| {
                let take_mutant = rng.next_f64() < cr && j != locked_index;
                if take_mutant {
                    mutant.column(j)
                } else {
                    target.column(j)
                }
            })
            .collect(),
    )
}
