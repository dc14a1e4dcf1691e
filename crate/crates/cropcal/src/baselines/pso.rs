//! Global-best particle swarm with constriction-equivalent coefficients.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::core::{
    evaluate_checked, Bounds, Error, Objective, OptimizeResult, Result, Solution,
};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity clamp as a fraction of each dimension's range.
    pub velocity_clamp: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 10,
            iterations: 50,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            velocity_clamp: 0.2,
        }
    }
}

pub fn pso_optimize(
    objective: &dyn Objective,
    bounds: &Bounds,
    config: &PsoConfig,
    rng: &mut impl Rng,
) -> Result<OptimizeResult> {
    if config.swarm_size == 0 {
        return Err(Error::Config("swarm size must be positive".into()));
    }
    let dim = bounds.dimension();
    let n = config.swarm_size;
    let mut positions: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..dim)
                .map(|d| bounds.lower[d] + bounds.range(d) * rng.random::<f64>())
                .collect()
        })
        .collect();
    let mut velocities = vec![vec![0.0; dim]; n];
    let vmax: Vec<f64> = (0..dim).map(|d| config.velocity_clamp * bounds.range(d)).collect();

    let mut personal_best = positions.clone();
    let mut personal_fitness = Vec::with_capacity(n);
    for p in &positions {
        personal_fitness.push(evaluate_checked(objective, p)?);
    }
    let mut gbest_index = 0;
    for i in 1..n {
        if personal_fitness[i] < personal_fitness[gbest_index] {
            gbest_index = i;
        }
    }
    let mut gbest = personal_best[gbest_index].clone();
    let mut gbest_fitness = personal_fitness[gbest_index];
    let mut history = Vec::with_capacity(config.iterations);

    for _ in 0..config.iterations {
        for i in 0..n {
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = config.inertia * velocities[i][d]
                    + config.cognitive * r1 * (personal_best[i][d] - positions[i][d])
                    + config.social * r2 * (gbest[d] - positions[i][d]);
                velocities[i][d] = v.clamp(-vmax[d], vmax[d]);
                positions[i][d] =
                    (positions[i][d] + velocities[i][d]).clamp(bounds.lower[d], bounds.upper[d]);
            }
            let fitness = evaluate_checked(objective, &positions[i])?;
            if fitness < personal_fitness[i] {
                personal_fitness[i] = fitness;
                personal_best[i] = positions[i].clone();
                if fitness < gbest_fitness {
                    gbest_fitness = fitness;
                    gbest = positions[i].clone();
                }
            }
        }
        history.push(gbest_fitness);
    }

    Ok(OptimizeResult {
        best: Solution::evaluated(gbest, gbest_fitness),
        history,
    })
}
