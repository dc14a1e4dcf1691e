//! Shared domain types: bounds, solutions, populations, the objective
//! contract, and the deterministic RNG stream used by every optimizer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("undefined correlation: {0}")]
    ZeroVariance(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Per-dimension box constraints on a genome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Config(format!(
                "bounds need matching non-empty lower/upper (got {}/{})",
                lower.len(),
                upper.len()
            )));
        }
        for (d, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::Config(format!(
                    "inverted or non-finite bounds at dimension {d}: [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn range(&self, d: usize) -> f64 {
        self.upper[d] - self.lower[d]
    }

    pub fn contains(&self, genome: &[f64]) -> bool {
        genome.len() == self.dimension()
            && genome
                .iter()
                .enumerate()
                .all(|(d, x)| *x >= self.lower[d] && *x <= self.upper[d])
    }
}

/// Project a genome onto the box `[lower, upper]`, coordinate-wise.
pub fn clamp(genome: &[f64], bounds: &Bounds) -> Result<Vec<f64>> {
    if genome.len() != bounds.dimension() {
        return Err(Error::DimensionMismatch {
            expected: bounds.dimension(),
            actual: genome.len(),
        });
    }
    Ok(genome
        .iter()
        .enumerate()
        .map(|(d, x)| x.clamp(bounds.lower[d], bounds.upper[d]))
        .collect())
}

/// A candidate parameter vector with its (lazily assigned) objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub genome: Vec<f64>,
    pub fitness: Option<f64>,
}

impl Solution {
    pub fn new(genome: Vec<f64>) -> Self {
        Self {
            genome,
            fitness: None,
        }
    }

    pub fn evaluated(genome: Vec<f64>, fitness: f64) -> Self {
        Self {
            genome,
            fitness: Some(fitness),
        }
    }

    pub fn is_evaluated(&self) -> bool {
        self.fitness.is_some()
    }

    /// Objective value; panics on unevaluated solutions, which only occur
    /// before the initial evaluation pass inside an optimizer.
    pub fn score(&self) -> f64 {
        self.fitness.expect("solution not evaluated")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub members: Vec<Solution>,
    pub generation: u32,
}

impl Population {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for i in 1..self.members.len() {
            if self.members[i].score() < self.members[best].score() {
                best = i;
            }
        }
        best
    }

    pub fn best(&self) -> &Solution {
        &self.members[self.best_index()]
    }
}

/// Minimum population size: DE difference vectors need at least three
/// parents distinct from the target.
pub const MIN_POPULATION: usize = 4;

/// Draw `np` genomes uniformly inside `bounds`.
pub fn init_population(np: usize, bounds: &Bounds, rng: &mut impl Rng) -> Result<Population> {
    if np < MIN_POPULATION {
        return Err(Error::Config(format!(
            "population size {np} below minimum {MIN_POPULATION}"
        )));
    }
    let dim = bounds.dimension();
    let members = (0..np)
        .map(|_| {
            let genome = (0..dim)
                .map(|d| bounds.lower[d] + bounds.range(d) * rng.random::<f64>())
                .collect();
            Solution::new(genome)
        })
        .collect();
    Ok(Population {
        members,
        generation: 0,
    })
}

/// Seedable, stream-addressable RNG source. Identical `(seed, stream)`
/// pairs reproduce the same draw sequence; distinct streams are
/// statistically independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// FNV-1a over label parts; used to derive stream ids that are stable
/// across platforms and execution order.
pub fn derive_stream_id(parts: &[&str], run_index: u32) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for part in parts {
        eat(part.as_bytes());
        eat(&[0x1f]);
    }
    eat(&run_index.to_le_bytes());
    hash
}

/// Scalar objective to minimize over a genome.
pub trait Objective: Sync {
    fn evaluate(&self, genome: &[f64]) -> Result<f64>;
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    fn evaluate(&self, genome: &[f64]) -> Result<f64> {
        self(genome)
    }
}

/// Evaluate and reject non-finite objective values with context.
pub fn evaluate_checked(objective: &dyn Objective, genome: &[f64]) -> Result<f64> {
    let value = objective.evaluate(genome)?;
    if !value.is_finite() {
        return Err(Error::NonFinite(format!(
            "objective value {value} at genome {genome:?}"
        )));
    }
    Ok(value)
}

/// Uniform optimizer output: best-ever solution plus the best-so-far
/// fitness after each generation (length = generation count).
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best: Solution,
    pub history: Vec<f64>,
}
