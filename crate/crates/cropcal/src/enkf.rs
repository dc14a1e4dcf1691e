//! Ensemble Kalman filter over the scalar LAI state: perturbed-parameter
//! ensemble propagation through the daily growth model, periodic
//! observation updates with perturbed observations.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::core::{Error, Result};
use crate::wofost::{lai_step, simulate_season, CropVariety, DailyWeather, Trajectory};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DegradedMode {
    /// Degraded observation days are dropped entirely.
    #[default]
    Missing,
    /// Degraded observations carry five-fold extra noise variance.
    Noisy,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct EnkfConfig {
    pub ensemble_size: usize,
    /// Process-noise variance added to each member per day.
    pub process_noise: f64,
    /// Observation-noise variance.
    pub observation_noise: f64,
    /// Scalar observation operator.
    pub observation_operator: f64,
    /// Days between observations; 0 disables observations.
    pub observation_interval: usize,
    /// Fraction of observation days that are degraded.
    pub degraded_fraction: f64,
    pub degraded_mode: DegradedMode,
    /// Relative sigma of the per-member parameter perturbation.
    pub parameter_sigma: f64,
    /// Standard deviation of the initial ensemble around the initial LAI.
    pub initial_spread: f64,
}

impl Default for EnkfConfig {
    fn default() -> Self {
        Self {
            ensemble_size: 50,
            process_noise: 1e-4,
            observation_noise: 0.1,
            observation_operator: 1.0,
            observation_interval: 5,
            degraded_fraction: 0.10,
            degraded_mode: DegradedMode::Missing,
            parameter_sigma: 0.1,
            initial_spread: 0.005,
        }
    }
}

impl EnkfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ensemble_size < 2 {
            return Err(Error::Config(format!(
                "ensemble size {} below minimum 2",
                self.ensemble_size
            )));
        }
        if self.observation_noise <= 0.0 {
            return Err(Error::Config(format!(
                "observation noise {} must be positive",
                self.observation_noise
            )));
        }
        if self.process_noise < 0.0 {
            return Err(Error::Config(format!(
                "process noise {} must be non-negative",
                self.process_noise
            )));
        }
        if !(0.0..=1.0).contains(&self.degraded_fraction) {
            return Err(Error::Config(format!(
                "degraded fraction {} outside [0, 1]",
                self.degraded_fraction
            )));
        }
        Ok(())
    }
}

pub fn ensemble_mean(members: &[f64]) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::Empty("ensemble".into()));
    }
    Ok(members.iter().sum::<f64>() / members.len() as f64)
}

/// Unbiased sample variance of the scalar ensemble.
pub fn ensemble_covariance(members: &[f64], mean: f64) -> Result<f64> {
    if members.len() < 2 {
        return Err(Error::Config(
            "covariance needs at least two ensemble members".into(),
        ));
    }
    let sum: f64 = members.iter().map(|a| (a - mean).powi(2)).sum();
    Ok(sum / (members.len() - 1) as f64)
}

/// K = P H / (H P H + R).
pub fn kalman_gain(p: f64, h: f64, r: f64) -> Result<f64> {
    let denom = h * p * h + r;
    if denom <= 0.0 {
        return Err(Error::NonFinite(format!(
            "kalman gain denominator {denom} not positive"
        )));
    }
    Ok(p * h / denom)
}

/// One independent Gaussian perturbation of the observation per member.
pub fn perturb_observation(
    y: f64,
    r: f64,
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if r == 0.0 {
        return Ok(vec![y; count]);
    }
    let noise = Normal::new(0.0, r.sqrt())
        .map_err(|e| Error::Config(format!("observation noise: {e}")))?;
    Ok((0..count).map(|_| y + noise.sample(rng)).collect())
}

/// Per-member correction a + K (y - H a).
pub fn update(forecast: &[f64], perturbed_obs: &[f64], gain: f64, h: f64) -> Result<Vec<f64>> {
    if forecast.len() != perturbed_obs.len() {
        return Err(Error::DimensionMismatch {
            expected: forecast.len(),
            actual: perturbed_obs.len(),
        });
    }
    Ok(forecast
        .iter()
        .zip(perturbed_obs)
        .map(|(a, y)| a + gain * (y - h * a))
        .collect())
}

/// Diagnostics of a single analysis step, for golden-value checks against
/// injected forecast and observation fixtures.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateDiagnostics {
    pub forecast_mean: f64,
    pub covariance: f64,
    pub gain: f64,
    pub updated: Vec<f64>,
    pub updated_mean: f64,
}

pub fn single_step_update(
    forecast: &[f64],
    perturbed_obs: &[f64],
    h: f64,
    r: f64,
) -> Result<UpdateDiagnostics> {
    let forecast_mean = ensemble_mean(forecast)?;
    let covariance = ensemble_covariance(forecast, forecast_mean)?;
    let gain = kalman_gain(covariance, h, r)?;
    let updated = update(forecast, perturbed_obs, gain, h)?;
    let updated_mean = ensemble_mean(&updated)?;
    Ok(UpdateDiagnostics {
        forecast_mean,
        covariance,
        gain,
        updated,
        updated_mean,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssimilationResult {
    /// Daily ensemble-mean LAI after assimilation.
    pub assimilated: Trajectory,
    /// Deterministic free-running model trajectory.
    pub simulated: Trajectory,
    /// Observation actually used per day; None off observation days and on
    /// missing-degraded days.
    pub observed: Vec<Option<f64>>,
}

fn perturbed_variety(variety: &CropVariety, epsilon: f64) -> CropVariety {
    let scale = (1.0 + epsilon).max(0.05);
    let mut v = variety.clone();
    v.crop.rgrlai *= scale;
    v.irrad *= scale;
    v.crop.smtab_max = Some(v.smtab_max() * scale);
    v
}

/// Propagate a perturbed-parameter ensemble through the season, correcting
/// toward the target LAI on observation days.
pub fn assimilate_season(
    variety: &CropVariety,
    weather: &[DailyWeather],
    target: &Trajectory,
    config: &EnkfConfig,
    rng: &mut impl Rng,
) -> Result<AssimilationResult> {
    config.validate()?;
    if weather.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: weather.len(),
            actual: target.len(),
        });
    }
    if weather.is_empty() {
        return Err(Error::Empty("weather series".into()));
    }
    let m = config.ensemble_size;
    let h = config.observation_operator;
    let days = weather.len();
    let lai0 = target[0];

    let simulated = simulate_season(variety, weather, lai0)?;

    let init_noise = Normal::new(0.0, config.initial_spread)
        .map_err(|e| Error::Config(format!("initial spread: {e}")))?;
    let param_noise = Normal::new(0.0, config.parameter_sigma)
        .map_err(|e| Error::Config(format!("parameter sigma: {e}")))?;
    let process_noise = Normal::new(0.0, config.process_noise.sqrt())
        .map_err(|e| Error::Config(format!("process noise: {e}")))?;

    let mut members: Vec<f64> = (0..m)
        .map(|_| (lai0 + init_noise.sample(rng)).clamp(0.0, variety.crop.lai_max))
        .collect();
    let varieties: Vec<CropVariety> = (0..m)
        .map(|_| perturbed_variety(variety, param_noise.sample(rng)))
        .collect();

    let mut assimilated = Vec::with_capacity(days);
    let mut observed = vec![None; days];
    assimilated.push(ensemble_mean(&members)?);

    for t in 1..days {
        for (member, member_variety) in members.iter_mut().zip(&varieties) {
            let delta = lai_step(*member, member_variety, &weather[t])?;
            let next = *member + delta + process_noise.sample(rng);
            if !next.is_finite() {
                return Err(Error::NonFinite(format!(
                    "ensemble member diverged on day {t}"
                )));
            }
            *member = next.clamp(0.0, member_variety.crop.lai_max);
        }

        let is_obs_day = config.observation_interval > 0 && t % config.observation_interval == 0;
        if is_obs_day {
            let degraded = rng.random::<f64>() < config.degraded_fraction;
            let y = match (degraded, config.degraded_mode) {
                (true, DegradedMode::Missing) => None,
                (true, DegradedMode::Noisy) => {
                    let extra = Normal::new(0.0, (5.0 * config.observation_noise).sqrt())
                        .expect("validated noise");
                    Some(target[t] + extra.sample(rng))
                }
                (false, _) => Some(target[t]),
            };
            if let Some(y) = y {
                let mean = ensemble_mean(&members)?;
                let p = ensemble_covariance(&members, mean)?;
                let gain = kalman_gain(p, h, config.observation_noise)?;
                let obs = perturb_observation(y, config.observation_noise, m, rng)?;
                members = update(&members, &obs, gain, h)?;
                for member in &mut members {
                    *member = member.clamp(0.0, variety.crop.lai_max);
                }
                observed[t] = Some(y);
            }
        }
        assimilated.push(ensemble_mean(&members)?);
    }

    Ok(AssimilationResult {
        assimilated,
        simulated,
        observed,
    })
}
