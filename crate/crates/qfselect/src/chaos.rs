//! Chaotic and uniform random sources.
//!
//! The logistic map `d_{t+1} = lambda * d_t * (1 - d_t)` is fully chaotic at
//! `lambda = 4`, where its Lyapunov exponent equals `ln 2`. Sequences drawn
//! from it are deterministic but ergodic, and their arcsine-shaped invariant
//! density concentrates mass near 0 and 1 — a qualitatively different
//! exploration profile from uniform draws. [`LogisticMapStream`] iterates the
//! map; a burn-in of [`DEFAULT_BURN_IN`] steps discards the transient so the
//! stream operates in the regime where the empirical Lyapunov exponent has
//! settled, which is what [`estimate_lyapunov`] measures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Steps discarded before a Lyapunov-guided stream emits its first value.
pub const DEFAULT_BURN_IN: usize = 5000;

/// Seed states rejected at construction: each maps into a fixed point of the
/// `lambda = 4` logistic map (0.5 -> 1 -> 0 -> 0, 0.25 -> 0.75 -> 0.75).
pub const REJECTED_SEEDS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Replacement state applied when a floating-point orbit lands exactly on a
/// degenerate point mid-stream. Generic and outside the rejected set.
const FALLBACK_STATE: f64 = 0.618_033_988_749_894_9;

/// One step of the logistic map.
#[inline]
pub fn logistic_step(state: f64, lambda: f64) -> f64 {
    debug_assert!((0.0..=4.0).contains(&lambda), "lambda out of [0, 4]");
    debug_assert!((0.0..=1.0).contains(&state), "state out of [0, 1]");
    lambda * state * (1.0 - state)
}

/// Stateful logistic-map iterator with burn-in control.
#[derive(Clone, Debug)]
pub struct LogisticMapStream {
    lambda: f64,
    state: f64,
    burn_in: usize,
    steps_emitted: u64,
}

impl LogisticMapStream {
    /// Stream seeded at `seed_state`, with `burn_in` leading iterates
    /// discarded up front. The first emitted value is the `burn_in + 1`-th
    /// iterate of the map from `seed_state`.
    ///
    /// Seeds in [`REJECTED_SEEDS`] are refused: their orbits degenerate to
    /// fixed points and never explore the interval.
    pub fn new(seed_state: f64, lambda: f64, burn_in: usize) -> Result<Self> {
        if !(0.0..=4.0).contains(&lambda) {
            return Err(Error::Config(format!(
                "logistic-map control parameter {lambda} outside [0, 4]"
            )));
        }
        if !seed_state.is_finite()
            || !(0.0..=1.0).contains(&seed_state)
            || REJECTED_SEEDS.contains(&seed_state)
        {
            return Err(Error::DegenerateSeed(seed_state));
        }
        Ok(Self::unchecked(seed_state, lambda, burn_in))
    }

    /// Stream with the default Lyapunov-guided burn-in of
    /// [`DEFAULT_BURN_IN`] steps.
    pub fn lyapunov_guided(seed_state: f64, lambda: f64) -> Result<Self> {
        Self::new(seed_state, lambda, DEFAULT_BURN_IN)
    }

    /// Bypasses seed validation. Intended for diagnostics of degenerate
    /// orbits; production call sites should use [`LogisticMapStream::new`].
    pub fn unchecked(seed_state: f64, lambda: f64, burn_in: usize) -> Self {
        let mut stream = Self {
            lambda,
            state: seed_state,
            burn_in,
            steps_emitted: 0,
        };
        for _ in 0..burn_in {
            stream.state = logistic_step(stream.state, lambda);
        }
        stream
    }

    /// Advance the map one step and return the new state.
    pub fn next_value(&mut self) -> f64 {
        self.state = logistic_step(self.state, self.lambda);
        self.steps_emitted += 1;
        self.state
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Current iterate `d_t`.
    pub fn state(&self) -> f64 {
        self.state
    }

    /// Number of leading iterates discarded at construction.
    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    /// Values emitted since construction (burn-in excluded).
    pub fn steps_emitted(&self) -> u64 {
        self.steps_emitted
    }

    fn reseed(&mut self, state: f64) {
        self.state = state;
    }
}

/// Time-averaged log-derivative `ln |lambda * (1 - 2 d_t)|` along the orbit,
/// the empirical Lyapunov exponent of the stream.
///
/// A 100-step transient is walked before averaging begins; `horizon` terms
/// are then accumulated. Any visited state with zero derivative (an orbit
/// passing exactly through `d = 0.5`) makes the exponent negative infinity,
/// which is reported as such.
///
/// Positive values indicate chaos; at `lambda = 4` the exact exponent is
/// `ln 2`.
pub fn estimate_lyapunov(stream: &mut LogisticMapStream, horizon: usize) -> f64 {
    assert!(horizon >= 1000, "horizon must be at least 1000");
    const TRANSIENT: usize = 100;
    let lambda = stream.lambda();
    let mut sum = 0.0;
    for step in 0..TRANSIENT + horizon {
        let derivative = (lambda * (1.0 - 2.0 * stream.state())).abs();
        if derivative == 0.0 {
            return f64::NEG_INFINITY;
        }
        if step >= TRANSIENT {
            sum += derivative.ln();
        }
        stream.next_value();
    }
    sum / horizon as f64
}

/// Which kind of sequence a [`RandomSource`] produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    Uniform,
    Chaotic,
    /// Fixed, caller-supplied draw sequence; used to script exact draws in
    /// tests and worked examples.
    Scripted,
}

#[derive(Clone, Debug)]
enum SourceInner {
    Uniform(Box<ChaCha8Rng>),
    Chaotic(LogisticMapStream),
    Scripted { draws: Vec<f64>, cursor: usize },
}

/// Deterministic draw source over `[0, 1)`, either uniform (counter-based
/// ChaCha) or chaotic (logistic map). Two sources built with the same kind
/// and seed emit identical sequences.
#[derive(Clone, Debug)]
pub struct RandomSource {
    inner: SourceInner,
}

impl RandomSource {
    /// Uniform source seeded from a 64-bit value.
    pub fn uniform(seed: u64) -> Self {
        Self {
            inner: SourceInner::Uniform(Box::new(ChaCha8Rng::seed_from_u64(seed))),
        }
    }

    /// Chaotic source drawing from a logistic-map stream.
    pub fn chaotic(stream: LogisticMapStream) -> Self {
        Self {
            inner: SourceInner::Chaotic(stream),
        }
    }

    /// Source that replays `draws` in order and cycles at the end.
    pub fn scripted(draws: Vec<f64>) -> Self {
        assert!(!draws.is_empty(), "scripted source needs at least one draw");
        Self {
            inner: SourceInner::Scripted { draws, cursor: 0 },
        }
    }

    pub fn kind(&self) -> SourceKind {
        match self.inner {
            SourceInner::Uniform(_) => SourceKind::Uniform,
            SourceInner::Chaotic(_) => SourceKind::Chaotic,
            SourceInner::Scripted { .. } => SourceKind::Scripted,
        }
    }

    /// Next draw in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        match &mut self.inner {
            SourceInner::Uniform(rng) => rng.gen::<f64>(),
            SourceInner::Chaotic(stream) => {
                let mut value = stream.next_value();
                // A floating-point orbit can in principle land exactly on a
                // fixed point and lock up; restart it from a generic state.
                if !(value > 0.0 && value < 1.0) || REJECTED_SEEDS.contains(&value) {
                    stream.reseed(FALLBACK_STATE);
                    value = stream.next_value();
                }
                value
            }
            SourceInner::Scripted { draws, cursor } => {
                let value = draws[*cursor];
                *cursor = (*cursor + 1) % draws.len();
                value
            }
        }
    }

    /// Uniformly chosen index in `0..n`. Consumes exactly one draw.
    pub fn next_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "cannot draw an index from an empty range");
        ((self.next_f64() * n as f64) as usize).min(n - 1)
    }
}

/// SplitMix-style mixer for deriving independent stream seeds from a base
/// seed. Distinct `stream` tags give statistically unrelated generators.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD134_2543_DE82_EF95));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Map a 64-bit seed to a logistic-map seed state in `(0, 1)` that is
/// guaranteed to avoid the rejected set.
pub fn unit_seed(seed: u64) -> f64 {
    let mut base = seed;
    loop {
        let mixed = derive_seed(base, 0x5EED);
        let value = ((mixed >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
        if value > 0.0 && value < 1.0 && !REJECTED_SEEDS.contains(&value) {
            return value;
        }
        base = base.wrapping_add(1);
    }
}

/// Counts of `values` over `bins` equal-width bins spanning `[0, 1]`.
/// Values at the upper boundary fall in the last bin.
pub fn histogram(values: impl IntoIterator<Item = f64>, bins: usize) -> Vec<u64> {
    assert!(bins > 0, "histogram needs at least one bin");
    let mut counts = vec![0u64; bins];
    for value in values {
        let index = ((value * bins as f64) as usize).min(bins - 1);
        counts[index] += 1;
    }
    counts
}
