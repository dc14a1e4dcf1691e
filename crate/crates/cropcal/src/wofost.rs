//! Simplified daily LAI growth model: logistic expansion driven by
//! temperature above a base, water availability as a limiting-factor
//! minimum, and normalized radiation.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::core::{Bounds, Error, Result};

/// Season length in days.
pub const DEFAULT_DAYS: usize = 120;
/// LAI at day zero.
pub const INITIAL_LAI: f64 = 0.01;
/// Radiation normalization reference, J/m^2/day.
pub const IRRAD_REF: f64 = 1.5e7;

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SoilParams {
    /// Field capacity, volumetric fraction.
    pub fc: f64,
    /// Wilting point, volumetric fraction.
    pub wp: f64,
    /// Bulk density, g/cm^3. Descriptive only; no growth equation uses it.
    pub bd: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CropParams {
    /// Base temperature below which growth stops, degrees C.
    pub tbase: f64,
    /// Relative LAI growth rate, per degree-day.
    pub rgrlai: f64,
    pub lai_max: f64,
    /// Maximum soil moisture content; defaults to field capacity when absent.
    #[serde(default)]
    pub smtab_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct WeatherRange {
    /// Seasonal average temperature range, degrees C.
    pub tavg: (f64, f64),
    /// Seasonal rainfall total range, mm.
    pub rain: (f64, f64),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CropVariety {
    pub name: String,
    pub soil: SoilParams,
    pub crop: CropParams,
    pub weather: WeatherRange,
    /// Daily global radiation, J/m^2/day.
    #[serde(default = "default_irrad")]
    pub irrad: f64,
}

fn default_irrad() -> f64 {
    IRRAD_REF
}

impl CropVariety {
    pub fn validate(&self) -> Result<()> {
        if self.soil.wp >= self.soil.fc {
            return Err(Error::Config(format!(
                "{}: wilting point {} must be below field capacity {}",
                self.name, self.soil.wp, self.soil.fc
            )));
        }
        if self.crop.rgrlai <= 0.0 || self.crop.lai_max <= 0.0 {
            return Err(Error::Config(format!(
                "{}: growth rate and LAI ceiling must be positive",
                self.name
            )));
        }
        if self.weather.tavg.0 >= self.weather.tavg.1 || self.weather.rain.0 >= self.weather.rain.1
        {
            return Err(Error::Config(format!(
                "{}: weather ranges must be non-degenerate",
                self.name
            )));
        }
        if self.irrad <= 0.0 {
            return Err(Error::Config(format!(
                "{}: radiation must be positive",
                self.name
            )));
        }
        Ok(())
    }

    pub fn smtab_max(&self) -> f64 {
        self.crop.smtab_max.unwrap_or(self.soil.fc)
    }

    pub fn tavg_midpoint(&self) -> f64 {
        (self.weather.tavg.0 + self.weather.tavg.1) / 2.0
    }

    pub fn rain_midpoint(&self) -> f64 {
        (self.weather.rain.0 + self.weather.rain.1) / 2.0
    }

    /// Daily rainfall reference: the seasonal-range midpoint spread over
    /// the season.
    pub fn rain_ref(&self, days: usize) -> f64 {
        self.rain_midpoint() / days as f64
    }

    /// Search box for the (TAVG, seasonal RAIN) calibration genome.
    pub fn calibration_bounds(&self) -> Bounds {
        Bounds::new(
            vec![self.weather.tavg.0, self.weather.rain.0],
            vec![self.weather.tavg.1, self.weather.rain.1],
        )
        .expect("validated weather ranges")
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct DailyWeather {
    pub tavg: f64,
    /// Rainfall for the day, mm.
    pub rain: f64,
    pub irrad: f64,
}

pub type Trajectory = Vec<f64>;

/// Growing-degree driver, clamped at zero below the base temperature.
pub fn temperature_effect(tavg: f64, tbase: f64) -> f64 {
    (tavg - tbase).max(0.0)
}

/// Relative moisture between wilting point and field capacity, in [0, 1].
pub fn soil_moisture(smtab_max: f64, fc: f64, wp: f64) -> Result<f64> {
    if fc <= wp {
        return Err(Error::Config(format!(
            "field capacity {fc} must exceed wilting point {wp}"
        )));
    }
    Ok(((smtab_max - wp) / (fc - wp)).clamp(0.0, 1.0))
}

/// Limiting-factor minimum of normalized rain and soil moisture.
pub fn water_availability(rain: f64, rain_ref: f64, moisture: f64) -> f64 {
    (rain / rain_ref).clamp(0.0, 1.0).min(moisture)
}

/// Daily LAI increment; non-negative, zero at the logistic ceiling.
pub fn lai_step(current_lai: f64, variety: &CropVariety, weather: &DailyWeather) -> Result<f64> {
    let temp = temperature_effect(weather.tavg, variety.crop.tbase);
    let moisture = soil_moisture(variety.smtab_max(), variety.soil.fc, variety.soil.wp)?;
    let water = water_availability(weather.rain, variety.rain_ref(DEFAULT_DAYS), moisture);
    let irrad_norm = weather.irrad / IRRAD_REF;
    let headroom = 1.0 - current_lai / variety.crop.lai_max;
    Ok(variety.crop.rgrlai * temp * water * irrad_norm * headroom.max(0.0))
}

/// Run the daily model over a weather series; day 0 is the initial LAI and
/// day t consumes weather[t].
pub fn simulate_season(
    variety: &CropVariety,
    weather: &[DailyWeather],
    lai0: f64,
) -> Result<Trajectory> {
    if weather.is_empty() {
        return Err(Error::Empty("weather series".into()));
    }
    let mut lai = Vec::with_capacity(weather.len());
    lai.push(lai0);
    for day in weather.iter().skip(1) {
        let current = *lai.last().expect("non-empty trajectory");
        let delta = lai_step(current, variety, day)?;
        lai.push((current + delta).min(variety.crop.lai_max));
    }
    Ok(lai)
}

/// Expand a season-constant (TAVG, seasonal RAIN) pair into a daily series.
pub fn constant_weather(variety: &CropVariety, tavg: f64, rain_total: f64, days: usize) -> Vec<DailyWeather> {
    let daily = DailyWeather {
        tavg,
        rain: rain_total / days as f64,
        irrad: variety.irrad,
    };
    vec![daily; days]
}

/// Ground-truth trajectory: midpoint weather with per-day Gaussian jitter
/// of the given relative sigma on temperature and rainfall.
pub fn target_trajectory(
    variety: &CropVariety,
    jitter_fraction: f64,
    days: usize,
    rng: &mut impl Rng,
) -> Result<Trajectory> {
    let tavg_mid = variety.tavg_midpoint();
    let rain_mid_daily = variety.rain_midpoint() / days as f64;
    let weather: Vec<DailyWeather> = if jitter_fraction == 0.0 {
        constant_weather(variety, tavg_mid, variety.rain_midpoint(), days)
    } else {
        let tavg_noise = Normal::new(0.0, jitter_fraction * tavg_mid.abs())
            .map_err(|e| Error::Config(format!("temperature jitter: {e}")))?;
        let rain_noise = Normal::new(0.0, jitter_fraction * rain_mid_daily)
            .map_err(|e| Error::Config(format!("rain jitter: {e}")))?;
        (0..days)
            .map(|_| DailyWeather {
                tavg: tavg_mid + tavg_noise.sample(rng),
                rain: (rain_mid_daily + rain_noise.sample(rng)).max(0.0),
                irrad: variety.irrad,
            })
            .collect()
    };
    simulate_season(variety, &weather, INITIAL_LAI)
}

/// Embedded presets for the five studied varieties.
pub fn variety_presets() -> Vec<CropVariety> {
    let make = |name: &str,
                fc: f64,
                wp: f64,
                bd: f64,
                tbase: f64,
                rgrlai: f64,
                lai_max: f64,
                tavg: (f64, f64),
                rain: (f64, f64)| CropVariety {
        name: name.to_string(),
        soil: SoilParams { fc, wp, bd },
        crop: CropParams {
            tbase,
            rgrlai,
            lai_max,
            smtab_max: None,
        },
        weather: WeatherRange { tavg, rain },
        irrad: IRRAD_REF,
    };
    vec![
        make("HD-2967", 0.30, 0.12, 1.3, 0.0, 0.035, 6.5, (20.0, 25.0), (400.0, 600.0)),
        make("Lok-1", 0.28, 0.11, 1.4, 10.0, 0.028, 5.5, (18.0, 22.0), (300.0, 500.0)),
        make("IR64", 0.34, 0.15, 1.2, 10.0, 0.04, 7.0, (25.0, 30.0), (800.0, 1200.0)),
        make("Sahbhagi Dhan", 0.29, 0.13, 1.3, 10.0, 0.035, 6.0, (24.0, 28.0), (500.0, 900.0)),
        make("BT Cotton", 0.28, 0.12, 1.4, 15.0, 0.03, 5.5, (25.0, 35.0), (500.0, 900.0)),
    ]
}

/// Case-insensitive preset lookup.
pub fn find_preset(name: &str) -> Result<CropVariety> {
    variety_presets()
        .into_iter()
        .find(|v| v.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::Config(format!("unknown variety '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::RngStream;
    use approx::assert_relative_eq;

    #[test]
    fn temperature_effect_examples() {
        assert_eq!(temperature_effect(22.0, 0.0), 22.0);
        assert_eq!(temperature_effect(15.0, 15.0), 0.0);
        assert_eq!(temperature_effect(8.0, 10.0), 0.0);
    }

    #[test]
    fn soil_moisture_examples() {
        assert_eq!(soil_moisture(0.30, 0.30, 0.12).unwrap(), 1.0);
        assert_eq!(soil_moisture(0.12, 0.30, 0.12).unwrap(), 0.0);
        assert_relative_eq!(soil_moisture(0.21, 0.30, 0.12).unwrap(), 0.5);
        assert!(soil_moisture(0.2, 0.1, 0.1).is_err());
    }

    #[test]
    fn water_availability_min_rule() {
        assert_eq!(water_availability(5.0, 4.0, 1.0), 1.0);
        assert_eq!(water_availability(0.0, 4.0, 1.0), 0.0);
        assert_relative_eq!(water_availability(2.0, 4.0, 0.8), 0.5);
        assert_relative_eq!(water_availability(4.0, 4.0, 0.3), 0.3);
    }

    #[test]
    fn wheat_delta_at_zero_lai() {
        let wheat = find_preset("HD-2967").unwrap();
        let weather = DailyWeather {
            tavg: 22.0,
            rain: wheat.rain_ref(DEFAULT_DAYS),
            irrad: IRRAD_REF,
        };
        assert_relative_eq!(lai_step(0.0, &wheat, &weather).unwrap(), 0.77, epsilon = 1e-12);
    }

    #[test]
    fn zero_growth_cases() {
        let wheat = find_preset("HD-2967").unwrap();
        let cold = DailyWeather { tavg: -3.0, rain: 5.0, irrad: IRRAD_REF };
        assert_eq!(lai_step(1.0, &wheat, &cold).unwrap(), 0.0);
        let dry = DailyWeather { tavg: 22.0, rain: 0.0, irrad: IRRAD_REF };
        assert_eq!(lai_step(1.0, &wheat, &dry).unwrap(), 0.0);
        let warm = DailyWeather { tavg: 22.0, rain: 5.0, irrad: IRRAD_REF };
        assert_eq!(lai_step(wheat.crop.lai_max, &wheat, &warm).unwrap(), 0.0);
    }

    #[test]
    fn season_monotone_and_bounded() {
        let wheat = find_preset("HD-2967").unwrap();
        let weather = constant_weather(&wheat, 24.0, 550.0, DEFAULT_DAYS);
        let lai = simulate_season(&wheat, &weather, INITIAL_LAI).unwrap();
        assert_eq!(lai.len(), DEFAULT_DAYS);
        assert_eq!(lai[0], INITIAL_LAI);
        for w in lai.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!(lai.iter().all(|&x| x <= wheat.crop.lai_max));
    }

    #[test]
    fn cold_season_stays_flat() {
        let rice = find_preset("IR64").unwrap();
        let weather = vec![DailyWeather { tavg: 5.0, rain: 8.0, irrad: IRRAD_REF }; 30];
        let lai = simulate_season(&rice, &weather, INITIAL_LAI).unwrap();
        assert!(lai.iter().all(|&x| x == INITIAL_LAI));
    }

    #[test]
    fn radiation_normalization_invariance() {
        let mut wheat = find_preset("HD-2967").unwrap();
        let baseline = simulate_season(
            &wheat,
            &constant_weather(&wheat, 23.0, 500.0, 60),
            INITIAL_LAI,
        )
        .unwrap();
        // doubling irrad doubles irrad_norm: check against halved growth rate
        wheat.irrad = 2.0 * IRRAD_REF;
        wheat.crop.rgrlai /= 2.0;
        let scaled = simulate_season(
            &wheat,
            &constant_weather(&wheat, 23.0, 500.0, 60),
            INITIAL_LAI,
        )
        .unwrap();
        for (a, b) in baseline.iter().zip(&scaled) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn presets_are_valid_and_complete() {
        let presets = variety_presets();
        assert_eq!(presets.len(), 5);
        for v in &presets {
            v.validate().unwrap();
        }
        let wheat = find_preset("hd-2967").unwrap();
        assert_eq!(wheat.crop.lai_max, 6.5);
        assert_eq!(wheat.crop.rgrlai, 0.035);
        assert_eq!(wheat.crop.tbase, 0.0);
        assert_eq!(wheat.soil.fc, 0.30);
        assert_eq!(wheat.soil.wp, 0.12);
        assert_eq!(wheat.soil.bd, 1.3);
        assert_eq!(wheat.weather.tavg, (20.0, 25.0));
        assert_eq!(wheat.weather.rain, (400.0, 600.0));
        let rice = find_preset("IR64").unwrap();
        assert_eq!(rice.crop.lai_max, 7.0);
        assert_eq!(rice.crop.rgrlai, 0.04);
        assert_eq!(rice.soil.bd, 1.2);
        let cotton = find_preset("BT Cotton").unwrap();
        assert_eq!(cotton.crop.lai_max, 5.5);
        assert_eq!(cotton.crop.tbase, 15.0);
        assert!(find_preset("durum").is_err());
    }

    #[test]
    fn target_deterministic_and_matches_midpoint_when_unjittered() {
        let rice = find_preset("IR64").unwrap();
        let a = target_trajectory(&rice, 0.05, DEFAULT_DAYS, &mut RngStream::new(5).rng()).unwrap();
        let b = target_trajectory(&rice, 0.05, DEFAULT_DAYS, &mut RngStream::new(5).rng()).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| (0.0..=rice.crop.lai_max).contains(&x)));

        let flat =
            target_trajectory(&rice, 0.0, DEFAULT_DAYS, &mut RngStream::new(5).rng()).unwrap();
        let weather = constant_weather(&rice, rice.tavg_midpoint(), rice.rain_midpoint(), DEFAULT_DAYS);
        assert_eq!(flat, simulate_season(&rice, &weather, INITIAL_LAI).unwrap());
    }
}
