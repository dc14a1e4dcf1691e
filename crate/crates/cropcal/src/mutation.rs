//! Catalog of DE mutation operators plus binomial crossover.
//!
//! Every operator computes its mutant as scaled difference vectors over
//! parents sampled without replacement from the population (excluding the
//! target index), then projects the result back into bounds.

use rand::Rng;

use crate::core::{clamp, Bounds, Error, Population, Result, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationStrategy {
    /// v = x_r1 + F (x_r2 - x_r3)
    Rand1,
    /// v = x_i + F (x_r1 - x_r2)
    Current1,
    /// v = x_best + F (x_r1 - x_r2)
    Best1,
    /// v = x_r1 + F (x_r2 - x_r3) + F (x_r4 - x_r5)
    Rand2,
    /// v = x_best + F (x_r1 - x_r2) + F (x_r3 - x_r4)
    Best2,
    /// v = x_i + F (x_best - x_i) + F (x_r1 - x_r2)
    CurrentToBest1,
    /// v = x_i + F (x_r1 - x_i) + F (x_r2 - x_r3); used without crossover
    CurrentToRand1,
    /// v = x_i + F (x_pbest - x_i) + F (x_r1 - x_r2)
    CurrentToPbest1,
}

impl MutationStrategy {
    /// Number of random parents the operator draws (excluding target/best).
    pub fn parent_count(self) -> usize {
        match self {
            Self::Rand1 => 3,
            Self::Current1 | Self::Best1 | Self::CurrentToBest1 | Self::CurrentToPbest1 => 2,
            Self::Rand2 => 5,
            Self::Best2 => 4,
            Self::CurrentToRand1 => 3,
        }
    }

    /// Crossover convention: current-to-rand/1 is rotation invariant and
    /// skips binomial crossover; all others pass through it.
    pub fn uses_crossover(self) -> bool {
        !matches!(self, Self::CurrentToRand1)
    }
}

impl std::fmt::Display for MutationStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Self::Rand1 => "rand/1",
            Self::Current1 => "current/1",
            Self::Best1 => "best/1",
            Self::Rand2 => "rand/2",
            Self::Best2 => "best/2",
            Self::CurrentToBest1 => "current-to-best/1",
            Self::CurrentToRand1 => "current-to-rand/1",
            Self::CurrentToPbest1 => "current-to-pbest/1",
        };
        f.write_str(name)
    }
}

/// Inputs shared by every mutation operator.
pub struct MutationContext<'a> {
    pub population: &'a Population,
    pub best: &'a Solution,
    /// Archive backing current-to-pbest/1; may be empty for other operators.
    pub pbest_archive: &'a [Solution],
    /// Fraction of the archive eligible as "pbest".
    pub p_best_fraction: f64,
    pub scale_factor: f64,
    pub target_index: usize,
    pub bounds: &'a Bounds,
}

/// Sample `count` indices from `0..n`, mutually distinct and distinct from
/// `exclude`, uniformly without replacement.
pub fn sample_distinct(
    rng: &mut impl Rng,
    n: usize,
    exclude: usize,
    count: usize,
) -> Result<Vec<usize>> {
    if n <= count {
        return Err(Error::Config(format!(
            "population of {n} too small for {count} distinct parents"
        )));
    }
    let mut picked = Vec::with_capacity(count);
    while picked.len() < count {
        let idx = rng.random_range(0..n);
        if idx != exclude && !picked.contains(&idx) {
            picked.push(idx);
        }
    }
    Ok(picked)
}

/// Uniformly pick one of the best `ceil(p * len)` archive members.
pub fn select_pbest<'a>(
    archive: &'a [Solution],
    p: f64,
    rng: &mut impl Rng,
) -> Result<&'a Solution> {
    if archive.is_empty() {
        return Err(Error::Empty("pbest archive".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Config(format!("pbest fraction {p} outside (0, 1]")));
    }
    let take = ((p * archive.len() as f64).ceil() as usize).max(1);
    let mut order: Vec<usize> = (0..archive.len()).collect();
    order.sort_by(|&a, &b| {
        archive[a]
            .score()
            .partial_cmp(&archive[b].score())
            .expect("finite fitness")
    });
    let pick = order[rng.random_range(0..take)];
    Ok(&archive[pick])
}

/// Compute the mutant vector for `strategy`, clamped to bounds.
pub fn mutate(
    strategy: MutationStrategy,
    ctx: &MutationContext<'_>,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if !(ctx.scale_factor.is_finite() && ctx.scale_factor >= 0.0) {
        return Err(Error::Config(format!(
            "scale factor {} must be finite and non-negative",
            ctx.scale_factor
        )));
    }
    let pop = &ctx.population.members;
    let f = ctx.scale_factor;
    let target = &pop[ctx.target_index].genome;
    let dim = target.len();

    // current-to-pbest/1 draws its pbest before the difference parents.
    let pbest = if strategy == MutationStrategy::CurrentToPbest1 {
        Some(
            select_pbest(ctx.pbest_archive, ctx.p_best_fraction, rng)?
                .genome
                .clone(),
        )
    } else {
        None
    };
    let parents = sample_distinct(rng, pop.len(), ctx.target_index, strategy.parent_count())?;
    let g = |k: usize| &pop[parents[k]].genome;
    let best = &ctx.best.genome;

    let mut mutant = vec![0.0; dim];
    for d in 0..dim {
        mutant[d] = match strategy {
            MutationStrategy::Rand1 => g(0)[d] + f * (g(1)[d] - g(2)[d]),
            MutationStrategy::Current1 => target[d] + f * (g(0)[d] - g(1)[d]),
            MutationStrategy::Best1 => best[d] + f * (g(0)[d] - g(1)[d]),
            MutationStrategy::Rand2 => {
                g(0)[d] + f * (g(1)[d] - g(2)[d]) + f * (g(3)[d] - g(4)[d])
            }
            MutationStrategy::Best2 => {
                best[d] + f * (g(0)[d] - g(1)[d]) + f * (g(2)[d] - g(3)[d])
            }
            MutationStrategy::CurrentToBest1 => {
                target[d] + f * (best[d] - target[d]) + f * (g(0)[d] - g(1)[d])
            }
            MutationStrategy::CurrentToRand1 => {
                target[d] + f * (g(0)[d] - target[d]) + f * (g(1)[d] - g(2)[d])
            }
            MutationStrategy::CurrentToPbest1 => {
                let pb = pbest.as_ref().expect("pbest drawn above");
                target[d] + f * (pb[d] - target[d]) + f * (g(0)[d] - g(1)[d])
            }
        };
    }
    clamp(&mutant, ctx.bounds)
}

/// Binomial crossover: each coordinate taken from the mutant with
/// probability `cr`, with one uniformly chosen coordinate always taken
/// from the mutant.
pub fn binomial_crossover(
    target: &[f64],
    mutant: &[f64],
    cr: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if target.len() != mutant.len() {
        return Err(Error::DimensionMismatch {
            expected: target.len(),
            actual: mutant.len(),
        });
    }
    if !(0.0..=1.0).contains(&cr) {
        return Err(Error::Config(format!("crossover rate {cr} outside [0, 1]")));
    }
    let j_rand = rng.random_range(0..target.len());
    Ok(target
        .iter()
        .zip(mutant)
        .enumerate()
        .map(|(j, (t, m))| {
            let draw = rng.random::<f64>();
            if draw < cr || j == j_rand {
                *m
            } else {
                *t
            }
        })
        .collect())
}
