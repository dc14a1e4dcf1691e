//! Harris hawks optimization, following the canonical published phases:
//! exploration, soft/hard besiege, and besiege with progressive rapid
//! dives selected by escape energy and random draws.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::core::{
    clamp, evaluate_checked, Bounds, Error, Objective, OptimizeResult, Result, Solution,
};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct HhoConfig {
    pub hawks: usize,
    pub iterations: usize,
    pub levy_beta: f64,
}

impl Default for HhoConfig {
    fn default() -> Self {
        Self {
            hawks: 10,
            iterations: 50,
            levy_beta: 1.5,
        }
    }
}

/// Hard besiege move: X' = X_rabbit - E * |X_rabbit - X|.
pub fn hard_besiege(rabbit: &[f64], hawk: &[f64], energy: f64) -> Vec<f64> {
    rabbit
        .iter()
        .zip(hawk)
        .map(|(r, x)| r - energy * (r - x).abs())
        .collect()
}

/// Soft besiege move: X' = (X_rabbit - X) - E * |J * X_rabbit - X|.
pub fn soft_besiege(rabbit: &[f64], hawk: &[f64], energy: f64, jump: f64) -> Vec<f64> {
    rabbit
        .iter()
        .zip(hawk)
        .map(|(r, x)| (r - x) - energy * (jump * r - x).abs())
        .collect()
}

fn levy_step(dim: usize, beta: f64, rng: &mut impl Rng) -> Vec<f64> {
    let sigma = ((gamma(1.0 + beta) * (std::f64::consts::PI * beta / 2.0).sin())
        / (gamma((1.0 + beta) / 2.0) * beta * 2.0f64.powf((beta - 1.0) / 2.0)))
    .powf(1.0 / beta);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (0..dim)
        .map(|_| {
            let u: f64 = normal.sample(rng) * sigma;
            let v: f64 = normal.sample(rng);
            0.01 * u / v.abs().powf(1.0 / beta)
        })
        .collect()
}

pub fn hho_optimize(
    objective: &dyn Objective,
    bounds: &Bounds,
    config: &HhoConfig,
    rng: &mut impl Rng,
) -> Result<OptimizeResult> {
    if config.hawks == 0 || config.levy_beta <= 0.0 {
        return Err(Error::Config("hawks and levy beta must be positive".into()));
    }
    let dim = bounds.dimension();
    let n = config.hawks;
    let total_iters = config.iterations.max(1) as f64;

    let mut positions: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..dim)
                .map(|d| bounds.lower[d] + bounds.range(d) * rng.random::<f64>())
                .collect()
        })
        .collect();
    let mut fitness = Vec::with_capacity(n);
    for p in &positions {
        fitness.push(evaluate_checked(objective, p)?);
    }
    let mut rabbit_index = 0;
    for i in 1..n {
        if fitness[i] < fitness[rabbit_index] {
            rabbit_index = i;
        }
    }
    let mut rabbit = positions[rabbit_index].clone();
    let mut rabbit_fitness = fitness[rabbit_index];
    let mut history = Vec::with_capacity(config.iterations);

    for t in 0..config.iterations {
        let decay = 2.0 * (1.0 - t as f64 / total_iters);
        let mean: Vec<f64> = (0..dim)
            .map(|d| positions.iter().map(|p| p[d]).sum::<f64>() / n as f64)
            .collect();
        for i in 0..n {
            let e0: f64 = 2.0 * rng.random::<f64>() - 1.0;
            let energy = decay * e0;
            let candidate = if energy.abs() >= 1.0 {
                // exploration: perch on a random hawk or on the rabbit
                // relative to the swarm mean
                let q: f64 = rng.random();
                if q >= 0.5 {
                    let other = &positions[rng.random_range(0..n)];
                    let r1: f64 = rng.random();
                    let r2: f64 = rng.random();
                    (0..dim)
                        .map(|d| other[d] - r1 * (other[d] - 2.0 * r2 * positions[i][d]).abs())
                        .collect()
                } else {
                    let r3: f64 = rng.random();
                    let r4: f64 = rng.random();
                    (0..dim)
                        .map(|d| {
                            (rabbit[d] - mean[d])
                                - r3 * (bounds.lower[d] + r4 * bounds.range(d))
                        })
                        .collect()
                }
            } else {
                let r: f64 = rng.random();
                let jump = 2.0 * (1.0 - rng.random::<f64>());
                if r >= 0.5 && energy.abs() >= 0.5 {
                    soft_besiege(&rabbit, &positions[i], energy, jump)
                } else if r >= 0.5 {
                    hard_besiege(&rabbit, &positions[i], energy)
                } else {
                    // progressive rapid dives: try a direct strike, then a
                    // Levy-flight dive, keep the better of the two if it
                    // beats the current position
                    let base = if energy.abs() >= 0.5 {
                        &positions[i]
                    } else {
                        &mean
                    };
                    let strike: Vec<f64> = (0..dim)
                        .map(|d| rabbit[d] - energy * (jump * rabbit[d] - base[d]).abs())
                        .collect();
                    let strike = clamp(&strike, bounds)?;
                    let strike_fitness = evaluate_checked(objective, &strike)?;
                    if strike_fitness < fitness[i] {
                        strike
                    } else {
                        let levy = levy_step(dim, config.levy_beta, rng);
                        let dive: Vec<f64> = (0..dim)
                            .map(|d| strike[d] + rng.random::<f64>() * levy[d])
                            .collect();
                        let dive = clamp(&dive, bounds)?;
                        let dive_fitness = evaluate_checked(objective, &dive)?;
                        if dive_fitness < fitness[i] {
                            dive
                        } else {
                            positions[i].clone()
                        }
                    }
                }
            };
            positions[i] = clamp(&candidate, bounds)?;
            fitness[i] = evaluate_checked(objective, &positions[i])?;
            if fitness[i] < rabbit_fitness {
                rabbit_fitness = fitness[i];
                rabbit = positions[i].clone();
            }
        }
        history.push(rabbit_fitness);
    }

    Ok(OptimizeResult {
        best: Solution::evaluated(rabbit, rabbit_fitness),
        history,
    })
}
