//! Random streams, triangular delays and the customer-type corrections
//! applied to decision thresholds and delay distributions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Triangular};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StochasticError {
    #[error("probability {0} outside [0, 1]")]
    Domain(f64),
}

/// How strongly a customer type leans towards an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LikelihoodLevel {
    Low = 0,
    Moderate = 1,
    High = 2,
}

impl LikelihoodLevel {
    pub const ALL: [LikelihoodLevel; 3] = [Self::Low, Self::Moderate, Self::High];
}

/// Minimum / mode / maximum of a triangular duration, in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangularParams {
    pub min: f64,
    pub mode: f64,
    pub max: f64,
}

impl TriangularParams {
    pub const fn new(min: f64, mode: f64, max: f64) -> Self {
        Self { min, mode, max }
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite()
            && self.mode.is_finite()
            && self.max.is_finite()
            && self.min >= 0.0
            && self.min <= self.mode
            && self.mode <= self.max
    }

    pub fn mean(&self) -> f64 {
        (self.min + self.mode + self.max) / 3.0
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let TriangularParams { min, mode, max } = *self;
        if x <= min {
            0.0
        } else if x >= max {
            1.0
        } else if x <= mode {
            (x - min).powi(2) / ((max - min) * (mode - min))
        } else {
            1.0 - (max - x).powi(2) / ((max - min) * (max - mode))
        }
    }
}

impl fmt::Display for TriangularParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.min, self.mode, self.max)
    }
}

/// Purpose of a random stream within one replication. Each purpose draws
/// from its own ChaCha stream so extra draws in one area leave the others
/// untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamTag {
    Arrivals = 1,
    Picks = 2,
    Decisions = 3,
    Delays = 4,
    Staffing = 5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Lineage {
    pub master_seed: u64,
    pub tag: StreamTag,
    pub replication: u64,
}

/// A seeded, single-owner random stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    lineage: Lineage,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, tag: StreamTag, replication: u64) -> Self {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&master_seed.to_le_bytes());
        seed[8..16].copy_from_slice(&replication.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(tag as u64);
        Self {
            lineage: Lineage {
                master_seed,
                tag,
                replication,
            },
            rng,
        }
    }

    pub fn lineage(&self) -> Lineage {
        self.lineage
    }

    /// One uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// The set of tagged streams owned by one replication.
#[derive(Debug, Clone)]
pub struct Streams {
    pub arrivals: RandomStream,
    pub picks: RandomStream,
    pub decisions: RandomStream,
    pub delays: RandomStream,
    pub staffing: RandomStream,
}

impl Streams {
    pub fn new(master_seed: u64, replication: u64) -> Self {
        Self {
            arrivals: RandomStream::new(master_seed, StreamTag::Arrivals, replication),
            picks: RandomStream::new(master_seed, StreamTag::Picks, replication),
            decisions: RandomStream::new(master_seed, StreamTag::Decisions, replication),
            delays: RandomStream::new(master_seed, StreamTag::Delays, replication),
            staffing: RandomStream::new(master_seed, StreamTag::Staffing, replication),
        }
    }
}

/// Moves a decision threshold halfway towards 0 (Low) or towards 1 (High),
/// where "halfway" is measured against the nearer bound.
pub fn correct_threshold(
    original: f64,
    likelihood: LikelihoodLevel,
) -> Result<f64, StochasticError> {
    if !(0.0..=1.0).contains(&original) {
        return Err(StochasticError::Domain(original));
    }
    let limit = if original < 0.5 {
        original / 2.0
    } else {
        (1.0 - original) / 2.0
    };
    Ok(match likelihood {
        LikelihoodLevel::Low => original - limit,
        LikelihoodLevel::Moderate => original,
        LikelihoodLevel::High => original + limit,
    })
}

/// Bernoulli trial at the corrected threshold. Consumes exactly one draw.
pub fn corrected_bernoulli(
    original: f64,
    likelihood: LikelihoodLevel,
    stream: &mut RandomStream,
) -> Result<bool, StochasticError> {
    let p = correct_threshold(original, likelihood)?;
    Ok(stream.uniform() < p)
}

/// Shifts the mode halfway towards the max (High) or the min (Low); the
/// support is left untouched.
pub fn correct_delay(params: TriangularParams, likelihood: LikelihoodLevel) -> TriangularParams {
    let mode = match likelihood {
        LikelihoodLevel::Low => params.mode - (params.mode - params.min) / 2.0,
        LikelihoodLevel::Moderate => params.mode,
        LikelihoodLevel::High => params.mode + (params.max - params.mode) / 2.0,
    };
    TriangularParams { mode, ..params }
}

/// Inverse-CDF triangular sample. Consumes exactly one draw.
pub fn sample_triangular(params: TriangularParams, stream: &mut RandomStream) -> f64 {
    debug_assert!(params.is_valid(), "invalid triangle {params}");
    let dist = Triangular::new(params.min, params.max, params.mode)
        .expect("triangular parameters validated at load");
    dist.sample(stream.rng()).clamp(params.min, params.max)
}
