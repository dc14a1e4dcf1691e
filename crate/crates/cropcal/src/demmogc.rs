//! Multi-mutation differential evolution with elite communication across
//! three subpopulations and success-driven operator reallocation.
//!
//! Each generation: every subpopulation evolves under its own mutation
//! operator, trials compete greedily with their targets, the best k% of
//! each subpopulation migrate to replace the worst members elsewhere, and
//! subpopulation sizes are reapportioned by each operator's success rate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::core::{
    evaluate_checked, init_population, Bounds, Error, Objective, OptimizeResult,
    Result, Solution,
};
use crate::mutation::{binomial_crossover, mutate, MutationContext, MutationStrategy};

pub const OPERATOR_COUNT: usize = 3;

/// The three operators assigned to the subpopulations, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubpopOperator {
    CurrentToBest1,
    RandToBest2,
    CurrentToPbest1,
}

pub const OPERATORS: [SubpopOperator; OPERATOR_COUNT] = [
    SubpopOperator::CurrentToBest1,
    SubpopOperator::RandToBest2,
    SubpopOperator::CurrentToPbest1,
];

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct DemmogcConfig {
    pub population_size: usize,
    pub generations: usize,
    pub scale_factor: f64,
    pub crossover_rate: f64,
    pub p_best_fraction: f64,
    /// k: fraction of each subpopulation migrated as elites per generation.
    pub elite_fraction: f64,
    /// Archive cap, in multiples of the population size.
    pub archive_capacity_factor: usize,
    /// Diagnostic override: run every subpopulation with one catalog
    /// strategy instead of the three dedicated operators.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unified_strategy: Option<MutationStrategy>,
}

impl Default for DemmogcConfig {
    fn default() -> Self {
        Self {
            population_size: 10,
            generations: 50,
            scale_factor: 0.6,
            crossover_rate: 0.9,
            p_best_fraction: 0.30,
            elite_fraction: 0.10,
            archive_capacity_factor: 10,
            unified_strategy: None,
        }
    }
}

impl DemmogcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 * OPERATOR_COUNT {
            return Err(Error::Config(format!(
                "population size {} cannot seat {} subpopulations of at least 2",
                self.population_size, OPERATOR_COUNT
            )));
        }
        if !(0.0..=0.5).contains(&self.elite_fraction) {
            return Err(Error::Config(format!(
                "elite fraction {} outside [0, 0.5]",
                self.elite_fraction
            )));
        }
        if !(self.p_best_fraction > 0.0 && self.p_best_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "pbest fraction {} outside (0, 1]",
                self.p_best_fraction
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

/// Per-operator success counts and selection probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorStats {
    pub successes: [u64; OPERATOR_COUNT],
    pub probabilities: [f64; OPERATOR_COUNT],
}

impl Default for OperatorStats {
    fn default() -> Self {
        Self {
            successes: [0; OPERATOR_COUNT],
            probabilities: [1.0 / OPERATOR_COUNT as f64; OPERATOR_COUNT],
        }
    }
}

/// p(s_i) = s_i / sum_j s_j, with add-one smoothing so an operator with a
/// dry generation keeps a nonzero share.
pub fn adapt_probabilities(successes: &[u64; OPERATOR_COUNT]) -> [f64; OPERATOR_COUNT] {
    let smoothed: [f64; OPERATOR_COUNT] = successes.map(|s| (s + 1) as f64);
    let total: f64 = smoothed.iter().sum();
    smoothed.map(|s| s / total)
}

/// Largest-remainder apportionment of `np` members by probability, with a
/// floor of 2 per subpopulation.
pub fn apportion_sizes(probs: &[f64; OPERATOR_COUNT], np: usize) -> [usize; OPERATOR_COUNT] {
    let quotas: [f64; OPERATOR_COUNT] = probs.map(|p| p * np as f64);
    let mut sizes: [usize; OPERATOR_COUNT] = quotas.map(|q| q.floor() as usize);
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..OPERATOR_COUNT).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for i in 0..(np - assigned) {
        sizes[order[i % OPERATOR_COUNT]] += 1;
    }
    // enforce the floor of 2, taking from the largest subpopulation
    while let Some(short) = (0..OPERATOR_COUNT).find(|&i| sizes[i] < 2) {
        let largest = (0..OPERATOR_COUNT)
            .max_by_key(|&i| sizes[i])
            .expect("non-empty");
        sizes[largest] -= 1;
        sizes[short] += 1;
    }
    sizes
}

/// Initial split: as equal as possible, earlier subpopulations take the
/// remainder (4/3/3 for np = 10).
pub fn equal_split(np: usize) -> [usize; OPERATOR_COUNT] {
    let base = np / OPERATOR_COUNT;
    let rem = np % OPERATOR_COUNT;
    let mut sizes = [base; OPERATOR_COUNT];
    for s in sizes.iter_mut().take(rem) {
        *s += 1;
    }
    sizes
}

fn subpop_ranges(sizes: &[usize; OPERATOR_COUNT]) -> [std::ops::Range<usize>; OPERATOR_COUNT] {
    let mut offset = 0;
    let mut ranges = std::array::from_fn(|_| 0..0);
    for (s, size) in sizes.iter().enumerate() {
        ranges[s] = offset..offset + size;
        offset += size;
    }
    ranges
}

/// v = x_r1 + F (x_best - x_r1) + F (x_r2 - x_r3) + F (x_r1 - x_r2),
/// applied verbatim, then clamped.
pub fn rand_to_best_2(ctx: &MutationContext<'_>, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let pop = &ctx.population.members;
    let f = ctx.scale_factor;
    let parents = crate::mutation::sample_distinct(rng, pop.len(), ctx.target_index, 3)?;
    let (r1, r2, r3) = (
        &pop[parents[0]].genome,
        &pop[parents[1]].genome,
        &pop[parents[2]].genome,
    );
    let best = &ctx.best.genome;
    let mutant: Vec<f64> = (0..r1.len())
        .map(|d| r1[d] + f * (best[d] - r1[d]) + f * (r2[d] - r3[d]) + f * (r1[d] - r2[d]))
        .collect();
    crate::core::clamp(&mutant, ctx.bounds)
}

/// Migrate each subpopulation's top `ceil(k * size)` members into a shared
/// elite pool and replace the same number of worst members in every
/// subpopulation with uniformly drawn elites, preferring elites from other
/// subpopulations. Returns the pool.
pub fn communicate(
    members: &mut [Solution],
    sizes: &[usize; OPERATOR_COUNT],
    k: f64,
    rng: &mut impl Rng,
) -> Vec<Solution> {
    let ranges = subpop_ranges(sizes);
    let mut pool: Vec<(Solution, usize)> = Vec::new();
    let mut worst_slots: Vec<(usize, usize)> = Vec::new(); // (member index, subpop)

    for (s, range) in ranges.iter().enumerate() {
        let count = (k * sizes[s] as f64).ceil() as usize;
        if count == 0 {
            continue;
        }
        let mut order: Vec<usize> = range.clone().collect();
        order.sort_by(|&a, &b| {
            members[a]
                .score()
                .partial_cmp(&members[b].score())
                .expect("finite fitness")
        });
        for &i in order.iter().take(count) {
            pool.push((members[i].clone(), s));
        }
        for &i in order.iter().rev().take(count) {
            worst_slots.push((i, s));
        }
    }
    for (slot, subpop) in worst_slots {
        let foreign: Vec<usize> = (0..pool.len()).filter(|&p| pool[p].1 != subpop).collect();
        let pick = if foreign.is_empty() {
            rng.random_range(0..pool.len())
        } else {
            foreign[rng.random_range(0..foreign.len())]
        };
        members[slot] = pool[pick].0.clone();
    }
    pool.into_iter().map(|(s, _)| s).collect()
}

/// Full optimizer run: returns the best-ever solution and the best-so-far
/// fitness after each generation.
pub fn optimize(
    objective: &dyn Objective,
    bounds: &Bounds,
    config: &DemmogcConfig,
    rng: &mut impl Rng,
) -> Result<OptimizeResult> {
    config.validate()?;
    let np = config.population_size;
    let mut population = init_population(np, bounds, rng)?;
    for member in &mut population.members {
        let fitness = evaluate_checked(objective, &member.genome)?;
        member.fitness = Some(fitness);
    }

    // The archive starts as the initial population so current-to-pbest/1
    // is defined from generation 0.
    let mut archive: Vec<Solution> = population.members.clone();
    let archive_cap = config.archive_capacity_factor * np;
    let mut elite_pool: Vec<Solution> = Vec::new();
    let mut sizes = equal_split(np);
    let mut best_ever = population.best().clone();
    let mut history = Vec::with_capacity(config.generations);

    for _ in 0..config.generations {
        let global_best = population.best().clone();
        let parents_snapshot = population.members.clone();
        let mut trials: Vec<(Solution, usize)> = Vec::with_capacity(np);

        let ranges = subpop_ranges(&sizes);
        for i in 0..np {
            let subpop = ranges
                .iter()
                .position(|r| r.contains(&i))
                .expect("index within some subpopulation");
            let needs_best = match config.unified_strategy {
                Some(s) => matches!(
                    s,
                    MutationStrategy::Best1
                        | MutationStrategy::Best2
                        | MutationStrategy::CurrentToBest1
                ),
                None => matches!(
                    OPERATORS[subpop],
                    SubpopOperator::CurrentToBest1 | SubpopOperator::RandToBest2
                ),
            };
            // x_best comes from the previous generation's elite pool when
            // one exists; otherwise the current population best.
            let best_for_mutation = if needs_best && !elite_pool.is_empty() {
                elite_pool[rng.random_range(0..elite_pool.len())].clone()
            } else {
                global_best.clone()
            };
            let ctx = MutationContext {
                population: &population,
                best: &best_for_mutation,
                pbest_archive: &archive,
                p_best_fraction: config.p_best_fraction,
                scale_factor: config.scale_factor,
                target_index: i,
                bounds,
            };
            let (mutant, crossover) = match config.unified_strategy {
                Some(strategy) => (mutate(strategy, &ctx, rng)?, strategy.uses_crossover()),
                None => match OPERATORS[subpop] {
                    SubpopOperator::CurrentToBest1 => {
                        (mutate(MutationStrategy::CurrentToBest1, &ctx, rng)?, true)
                    }
                    SubpopOperator::RandToBest2 => (rand_to_best_2(&ctx, rng)?, true),
                    SubpopOperator::CurrentToPbest1 => {
                        (mutate(MutationStrategy::CurrentToPbest1, &ctx, rng)?, true)
                    }
                },
            };
            let trial_genome = if crossover {
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
            trials.push((Solution::evaluated(trial_genome, fitness), subpop));
        }

        // Greedy selection; ties keep the incumbent. A replacement counts
        // one success for the operator that produced the trial.
        let mut successes = [0u64; OPERATOR_COUNT];
        for (i, (trial, subpop)) in trials.into_iter().enumerate() {
            if trial.score() < population.members[i].score() {
                successes[subpop] += 1;
                population.members[i] = trial;
            }
        }

        archive.extend(parents_snapshot);
        if archive.len() > archive_cap {
            archive.drain(0..archive.len() - archive_cap);
        }

        elite_pool = communicate(
            &mut population.members,
            &sizes,
            config.elite_fraction,
            rng,
        );
        sizes = apportion_sizes(&adapt_probabilities(&successes), np);

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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{Population, RngStream};

    fn sphere(genome: &[f64]) -> Result<f64> {
        Ok(genome.iter().map(|x| x * x).sum())
    }

    #[test]
    fn rand_to_best_2_direct_arithmetic() {
        // F = 0.6, x_r1 = [1,1], x_best = [2,2], x_r2 = [1,0], x_r3 = [0,1]
        // -> [2.2, 1.6]
        let pop = Population {
            members: vec![
                Solution::evaluated(vec![9.0, 9.0], 9.0), // target
                Solution::evaluated(vec![1.0, 1.0], 1.0),
                Solution::evaluated(vec![1.0, 0.0], 2.0),
                Solution::evaluated(vec![0.0, 1.0], 3.0),
            ],
            generation: 0,
        };
        let bounds = Bounds::new(vec![-10.0, -10.0], vec![10.0, 10.0]).unwrap();
        let best = Solution::evaluated(vec![2.0, 2.0], 0.0);
        // find a seed whose parent draw is exactly (1, 2, 3)
        for seed in 0..128 {
            let mut probe = RngStream::new(seed).rng();
            if crate::mutation::sample_distinct(&mut probe, 4, 0, 3).unwrap() == vec![1, 2, 3] {
                let ctx = MutationContext {
                    population: &pop,
                    best: &best,
                    pbest_archive: &[],
                    p_best_fraction: 0.3,
                    scale_factor: 0.6,
                    target_index: 0,
                    bounds: &bounds,
                };
                let mut rng = RngStream::new(seed).rng();
                let v = rand_to_best_2(&ctx, &mut rng).unwrap();
                assert!((v[0] - 2.2).abs() < 1e-12, "got {v:?}");
                assert!((v[1] - 1.6).abs() < 1e-12, "got {v:?}");
                return;
            }
        }
        panic!("no probe seed produced parent order (1,2,3)");
    }

    #[test]
    fn rand_to_best_2_zero_scale_returns_r1() {
        let pop = Population {
            members: (0..6)
                .map(|i| Solution::evaluated(vec![i as f64], i as f64))
                .collect(),
            generation: 0,
        };
        let bounds = Bounds::new(vec![-10.0], vec![10.0]).unwrap();
        let best = pop.members[0].clone();
        let ctx = MutationContext {
            population: &pop,
            best: &best,
            pbest_archive: &[],
            p_best_fraction: 0.3,
            scale_factor: 0.0,
            target_index: 0,
            bounds: &bounds,
        };
        let mut probe = RngStream::new(4).rng();
        let parents = crate::mutation::sample_distinct(&mut probe, 6, 0, 3).unwrap();
        let mut rng = RngStream::new(4).rng();
        let v = rand_to_best_2(&ctx, &mut rng).unwrap();
        assert_eq!(v, pop.members[parents[0]].genome);
    }

    #[test]
    fn adapt_probabilities_examples() {
        let p = adapt_probabilities(&[2, 1, 1]);
        assert!((p[0] - 3.0 / 7.0).abs() < 1e-12);
        assert!((p[1] - 2.0 / 7.0).abs() < 1e-12);
        assert!((p[2] - 2.0 / 7.0).abs() < 1e-12);
        let uniform = adapt_probabilities(&[0, 0, 0]);
        for p in uniform {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn apportionment_respects_floor() {
        let probs = adapt_probabilities(&[10, 0, 0]);
        assert_eq!(apportion_sizes(&probs, 10), [6, 2, 2]);
        let uniform = adapt_probabilities(&[0, 0, 0]);
        assert_eq!(apportion_sizes(&uniform, 10).iter().sum::<usize>(), 10);
    }

    #[test]
    fn equal_split_example() {
        assert_eq!(equal_split(10), [4, 3, 3]);
        assert_eq!(equal_split(9), [3, 3, 3]);
    }

    fn make_subpops(fitnesses: &[&[f64]]) -> (Vec<Solution>, [usize; 3]) {
        let mut members = Vec::new();
        let mut sizes = [0usize; 3];
        for (s, fs) in fitnesses.iter().enumerate() {
            sizes[s] = fs.len();
            for &f in *fs {
                members.push(Solution::evaluated(vec![f], f));
            }
        }
        (members, sizes)
    }

    #[test]
    fn communicate_migrates_elites() {
        // k = 0.5, subpop fitnesses {1,9}, {2,8}, {3,7}: pool {1,2,3},
        // each worst replaced, post-replacement max fitness <= 3... of the
        // replaced slots; survivors keep at most fitness 3 among newcomers.
        let (mut members, sizes) = make_subpops(&[&[1.0, 9.0], &[2.0, 8.0], &[3.0, 7.0]]);
        let mut rng = RngStream::new(2).rng();
        let pool = communicate(&mut members, &sizes, 0.5, &mut rng);
        let mut pool_fit: Vec<f64> = pool.iter().map(|s| s.score()).collect();
        pool_fit.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pool_fit, vec![1.0, 2.0, 3.0]);
        let max = members
            .iter()
            .map(|s| s.score())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(max <= 3.0, "worst member {max} after migration");
        // global best preserved
        let min = members.iter().map(|s| s.score()).fold(f64::INFINITY, f64::min);
        assert_eq!(min, 1.0);
    }

    #[test]
    fn communicate_counts_for_small_k() {
        let (mut members, sizes) =
            make_subpops(&[&[1.0, 4.0, 5.0, 9.0], &[2.0, 6.0, 8.0], &[3.0, 7.0, 10.0]]);
        let mut rng = RngStream::new(3).rng();
        let pool = communicate(&mut members, &sizes, 0.10, &mut rng);
        assert_eq!(pool.len(), 3); // ceil(0.1 * size) = 1 per subpopulation
    }

    #[test]
    fn communicate_noop_when_k_zero() {
        let (mut members, sizes) = make_subpops(&[&[1.0, 9.0], &[2.0, 8.0], &[3.0, 7.0]]);
        let before = members.clone();
        let mut rng = RngStream::new(1).rng();
        let pool = communicate(&mut members, &sizes, 0.0, &mut rng);
        assert!(pool.is_empty());
        assert_eq!(members, before);
    }

    #[test]
    fn optimize_sphere_converges() {
        let bounds = Bounds::new(vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        let config = DemmogcConfig::default();
        let mut rng = RngStream::new(12).rng();
        let result = optimize(&sphere, &bounds, &config, &mut rng).unwrap();
        assert!(
            result.best.score() < 1e-2,
            "fitness {} after 50 generations",
            result.best.score()
        );
        assert_eq!(result.history.len(), 50);
    }

    #[test]
    fn optimize_constant_objective_flat_history() {
        let constant = |_: &[f64]| Ok(4.2);
        let bounds = Bounds::new(vec![0.0], vec![1.0]).unwrap();
        let config = DemmogcConfig {
            generations: 12,
            ..DemmogcConfig::default()
        };
        let mut rng = RngStream::new(7).rng();
        let result = optimize(&constant, &bounds, &config, &mut rng).unwrap();
        assert_eq!(result.best.score(), 4.2);
        assert!(result.history.iter().all(|&f| f == 4.2));
    }

    #[test]
    fn optimize_zero_generations() {
        let bounds = Bounds::new(vec![-5.0], vec![5.0]).unwrap();
        let config = DemmogcConfig {
            generations: 0,
            ..DemmogcConfig::default()
        };
        let mut rng = RngStream::new(9).rng();
        let result = optimize(&sphere, &bounds, &config, &mut rng).unwrap();
        assert!(result.history.is_empty());
        assert!(result.best.is_evaluated());
    }

    #[test]
    fn optimize_aborts_on_non_finite_objective() {
        let bad = |_: &[f64]| Ok(f64::NAN);
        let bounds = Bounds::new(vec![0.0], vec![1.0]).unwrap();
        let mut rng = RngStream::new(0).rng();
        assert!(matches!(
            optimize(&bad, &bounds, &DemmogcConfig::default(), &mut rng),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn history_monotone_and_deterministic() {
        let bounds = Bounds::new(vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        let config = DemmogcConfig::default();
        let a = optimize(&sphere, &bounds, &config, &mut RngStream::new(5).rng()).unwrap();
        let b = optimize(&sphere, &bounds, &config, &mut RngStream::new(5).rng()).unwrap();
        assert_eq!(a, b);
        for w in a.history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }
}
