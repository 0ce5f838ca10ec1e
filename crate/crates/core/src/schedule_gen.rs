//! Synthetic 12-hour arrival schedules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::{Schedule, VehicleEvent, VehicleKind, DEFAULT_HORIZON_MIN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleGenConfig {
    pub n_evs: usize,
    pub n_cars: usize,
    /// Minutes.
    pub horizon: f64,
    /// Hours.
    pub parked_mean: f64,
    pub parked_std: f64,
    /// kW.
    pub rate_mean: f64,
    pub rate_std: f64,
    pub peak_rate_pool: Vec<f64>,
    pub seed: u64,
}

impl Default for ScheduleGenConfig {
    fn default() -> Self {
        ScheduleGenConfig {
            n_evs: 50,
            n_cars: 100,
            horizon: DEFAULT_HORIZON_MIN,
            parked_mean: 4.0,
            parked_std: 2.0,
            rate_mean: 10.0,
            rate_std: 5.0,
            peak_rate_pool: vec![3.3, 6.6, 7.2, 10.0, 19.2],
            seed: 0,
        }
    }
}

impl ScheduleGenConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::InvalidConfig(format!("schedule generator: {m}")));
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return err("horizon must be positive");
        }
        if !(self.parked_std >= 0.0 && self.rate_std >= 0.0) {
            return err("standard deviations must be >= 0");
        }
        if !(self.parked_mean.is_finite() && self.rate_mean.is_finite()) {
            return err("means must be finite");
        }
        if self.peak_rate_pool.is_empty() {
            return err("peak rate pool is empty");
        }
        if self
            .peak_rate_pool
            .iter()
            .any(|&p| !(p > 0.0 && p.is_finite()))
        {
            return err("peak rates must be positive");
        }
        // Rejection sampling needs positive mass inside the truncation window.
        if self.parked_std == 0.0 && self.parked_mean <= 0.0 {
            return err("parked duration distribution has no positive mass");
        }
        if self.rate_std == 0.0
            && self
                .peak_rate_pool
                .iter()
                .any(|&p| self.rate_mean <= 0.0 || self.rate_mean > p)
        {
            return err("degenerate rate distribution falls outside (0, peak]");
        }
        Ok(())
    }
}

/// Draws from `dist` until the sample lands in `(lo, hi]`.
fn sample_truncated<R: Rng>(rng: &mut R, dist: &Normal<f64>, lo: f64, hi: f64) -> f64 {
    loop {
        let x = dist.sample(rng);
        if x > lo && x <= hi {
            return x;
        }
    }
}

pub fn generate_schedule(config: &ScheduleGenConfig) -> Result<Schedule> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let parked = Normal::new(config.parked_mean, config.parked_std)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let rate = Normal::new(config.rate_mean, config.rate_std)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let mut events = Vec::with_capacity(config.n_evs + config.n_cars);
    let mut next_id = 0u32;
    for i in 0..config.n_evs + config.n_cars {
        let is_ev = i < config.n_evs;
        let arrival = rng.random_range(0.0..config.horizon);
        let hours = sample_truncated(&mut rng, &parked, 0.0, f64::INFINITY);
        let kind = if is_ev {
            let peak = config.peak_rate_pool[rng.random_range(0..config.peak_rate_pool.len())];
            let avg = sample_truncated(&mut rng, &rate, 0.0, peak);
            VehicleKind::Ev {
                energy_kwh: avg * hours,
                peak_rate_kw: peak,
            }
        } else {
            VehicleKind::Car
        };
        events.push(VehicleEvent {
            id: next_id,
            kind,
            arrival,
            departure: arrival + hours * 60.0,
        });
        next_id += 1;
    }
    Schedule::new(events, config.horizon)
}
