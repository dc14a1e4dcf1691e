//! Real-coded genetic algorithm: tournament selection, blend crossover,
//! per-coordinate Gaussian mutation, elitism of one.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::core::{
    clamp, evaluate_checked, init_population, Bounds, Error, Objective, OptimizeResult, Result,
    Solution,
};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    /// Blend crossover alpha: offspring coordinates are uniform in the
    /// alpha-extended parent interval.
    pub blend_alpha: f64,
    pub mutation_sigma: f64,
    /// Per-coordinate mutation probability (indpb).
    pub mutation_prob: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 10,
            generations: 50,
            tournament_size: 3,
            blend_alpha: 0.5,
            mutation_sigma: 1.0,
            mutation_prob: 0.2,
        }
    }
}

impl GaConfig {
    fn validate(&self) -> Result<()> {
        if self.tournament_size == 0 {
            return Err(Error::Config("tournament size must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(Error::Config(format!(
                "mutation probability {} outside [0, 1]",
                self.mutation_prob
            )));
        }
        Ok(())
    }
}

fn tournament_pick(members: &[Solution], size: usize, rng: &mut impl Rng) -> usize {
    let mut winner = rng.random_range(0..members.len());
    for _ in 1..size {
        let challenger = rng.random_range(0..members.len());
        if members[challenger].score() < members[winner].score() {
            winner = challenger;
        }
    }
    winner
}

/// Each coordinate uniform in [min - alpha*d, max + alpha*d] over the
/// parent values (d = |a - b|), before clamping.
pub fn blend_crossover(a: &[f64], b: &[f64], alpha: f64, rng: &mut impl Rng) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            let spread = hi - lo;
            if spread == 0.0 {
                x
            } else {
                rng.random_range(lo - alpha * spread..hi + alpha * spread)
            }
        })
        .collect()
}

pub fn ga_optimize(
    objective: &dyn Objective,
    bounds: &Bounds,
    config: &GaConfig,
    rng: &mut impl Rng,
) -> Result<OptimizeResult> {
    config.validate()?;
    let np = config.population_size;
    let mut population = init_population(np, bounds, rng)?;
    for member in &mut population.members {
        member.fitness = Some(evaluate_checked(objective, &member.genome)?);
    }
    let gaussian = Normal::new(0.0, config.mutation_sigma)
        .map_err(|e| Error::Config(format!("mutation sigma: {e}")))?;
    let mut best_ever = population.best().clone();
    let mut history = Vec::with_capacity(config.generations);

    for _ in 0..config.generations {
        let elite = population.best().clone();
        let mut next = Vec::with_capacity(np);
        next.push(elite);
        while next.len() < np {
            let pa = tournament_pick(&population.members, config.tournament_size, rng);
            let pb = tournament_pick(&population.members, config.tournament_size, rng);
            let mut child = blend_crossover(
                &population.members[pa].genome,
                &population.members[pb].genome,
                config.blend_alpha,
                rng,
            );
            for x in &mut child {
                if rng.random::<f64>() < config.mutation_prob {
                    *x += gaussian.sample(rng);
                }
            }
            let genome = clamp(&child, bounds)?;
            let fitness = evaluate_checked(objective, &genome)?;
            next.push(Solution::evaluated(genome, fitness));
        }
        population.members = next;
        population.generation += 1;
        let best_now = population.best();
        if best_now.score() < best_ever.score() {
            best_ever = best_now.clone();
        }
        history.push(best_ever.score());
    }

    Ok(OptimizeResult {
        best: best_ever,
        history,
    })
}
