//! Canonical single-mutation differential evolution (default best/1/bin).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::core::{
    evaluate_checked, init_population, Bounds, Error, Objective, OptimizeResult, Result, Solution,
};
use crate::mutation::{binomial_crossover, mutate, MutationContext, MutationStrategy};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct DeConfig {
    pub population_size: usize,
    pub generations: usize,
    pub strategy: MutationStrategy,
    /// F is redrawn uniformly from this interval once per generation; a
    /// collapsed interval is used verbatim without a draw.
    pub scale_factor_range: (f64, f64),
    pub crossover_rate: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            population_size: 10,
            generations: 50,
            strategy: MutationStrategy::Best1,
            scale_factor_range: (0.5, 1.0),
            crossover_rate: 0.7,
        }
    }
}

impl DeConfig {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.scale_factor_range;
        if !(lo.is_finite() && hi.is_finite()) || lo > hi || lo < 0.0 {
            return Err(Error::Config(format!(
                "scale factor range [{lo}, {hi}] invalid"
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(Error::Config(format!(
                "crossover rate {} outside [0, 1]",
                self.crossover_rate
            )));
        }
        Ok(())
    }
}

pub fn de_optimize(
    objective: &dyn Objective,
    bounds: &Bounds,
    config: &DeConfig,
    rng: &mut impl Rng,
) -> Result<OptimizeResult> {
    config.validate()?;
    let np = config.population_size;
    let mut population = init_population(np, bounds, rng)?;
    for member in &mut population.members {
        member.fitness = Some(evaluate_checked(objective, &member.genome)?);
    }
    let mut best_ever = population.best().clone();
    let mut history = Vec::with_capacity(config.generations);

    for _ in 0..config.generations {
        let (f_lo, f_hi) = config.scale_factor_range;
        let scale_factor = if f_lo < f_hi {
            rng.random_range(f_lo..f_hi)
        } else {
            f_lo
        };
        let global_best = population.best().clone();
        let mut trials: Vec<Solution> = Vec::with_capacity(np);
        for i in 0..np {
            let ctx = MutationContext {
                population: &population,
                best: &global_best,
                pbest_archive: &[],
                p_best_fraction: 1.0,
                scale_factor,
                target_index: i,
                bounds,
            };
            let mutant = mutate(config.strategy, &ctx, rng)?;
            let trial_genome = if config.strategy.uses_crossover() {
                binomial_crossover(
                    &population.members[i].genome,
                    &mutant,
                    config.crossover_rate,
                    rng,
                )?
            } else {
                mutant
            };
            let fitness = evaluate_checked(objective, &trial_genome)?;
            trials.push(Solution::evaluated(trial_genome, fitness));
        }
        for (i, trial) in trials.into_iter().enumerate() {
            if trial.score() < population.members[i].score() {
                population.members[i] = trial;
            }
        }
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
