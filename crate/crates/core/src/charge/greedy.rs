use crate::error::{Error, Result};
use crate::layout::Cell;

use super::{ChargeConfig, ChargeScheduler, ChargeSession, RateProfile};

/// Charges each EV at its peak rate from arrival until its demand is met.
/// Optimal for the earliest-first objective when EVs do not share capacity.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyScheduler;

impl ChargeScheduler for GreedyScheduler {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn schedule(
        &self,
        evses: &[Cell],
        sessions: &[ChargeSession],
        config: &ChargeConfig,
    ) -> Result<RateProfile> {
        config.validate()?;
        if config.network_capacity.is_some() {
            return Err(Error::InvalidConfig(
                "greedy scheduling requires unbounded network capacity".into(),
            ));
        }
        let dh = config.slot_hours();
        let mut profile = RateProfile::zeros(evses.to_vec(), config);
        for s in sessions {
            let row = profile.row_of(s.evse).ok_or_else(|| {
                Error::InvalidPlacement(format!("EVSE {:?} not in layout", s.evse))
            })?;
            let mut remaining = s.energy_kwh;
            for t in s.slots() {
                if remaining <= 0.0 {
                    break;
                }
                let rate = s.peak_kw.min(remaining / dh);
                profile.rates[row][t] = rate;
                remaining -= rate * dh;
            }
        }
        Ok(profile)
    }
}
