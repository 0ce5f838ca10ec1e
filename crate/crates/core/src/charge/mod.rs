//! Per-EVSE charging-rate profiles and usage statistics.
//!
//! Charging algorithms implement [`ChargeScheduler`] and are looked up by
//! name in a [`SchedulerRegistry`]; `olp` re-solves a linear program at each
//! arrival, `greedy` charges every EV at its peak rate until satisfied.

mod greedy;
mod olp;

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use greedy::GreedyScheduler;
pub use olp::OlpScheduler;

use crate::error::{Error, Result};
use crate::layout::{Cell, CellType, Layout};
use crate::placement::Placement;
use crate::schedule::{Schedule, VehicleKind, DEFAULT_HORIZON_MIN};
use crate::stats::EvseStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChargeConfig {
    pub slot_minutes: u32,
    /// Total network limit in kW; `None` is unbounded.
    pub network_capacity: Option<f64>,
    pub horizon: f64,
}

impl Default for ChargeConfig {
    fn default() -> Self {
        ChargeConfig {
            slot_minutes: 5,
            network_capacity: None,
            horizon: DEFAULT_HORIZON_MIN,
        }
    }
}

impl ChargeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.slot_minutes == 0 {
            return Err(Error::InvalidConfig("slot_minutes must be > 0".into()));
        }
        let slots = self.horizon / self.slot_minutes as f64;
        if !(self.horizon > 0.0) || slots.fract() != 0.0 {
            return Err(Error::InvalidConfig(format!(
                "slot length {} does not divide horizon {}",
                self.slot_minutes, self.horizon
            )));
        }
        if let Some(c) = self.network_capacity {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidConfig(format!("capacity {c} must be > 0")));
            }
        }
        Ok(())
    }

    pub fn n_slots(&self) -> usize {
        (self.horizon / self.slot_minutes as f64) as usize
    }

    /// Slot length in hours.
    pub fn slot_hours(&self) -> f64 {
        self.slot_minutes as f64 / 60.0
    }
}

/// One EV's stay at an EVSE, in whole slots: it may charge in
/// `start_slot..end_slot`, the slots fully covered by its stay and the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeSession {
    pub ev_id: u32,
    pub evse: Cell,
    pub start_slot: usize,
    pub end_slot: usize,
    pub energy_kwh: f64,
    pub peak_kw: f64,
}

impl ChargeSession {
    pub fn slots(&self) -> std::ops::Range<usize> {
        self.start_slot..self.end_slot.max(self.start_slot)
    }
}

/// Resolves a placement against its schedule into charging sessions, sorted
/// by start slot. Car assignments on parking cells are ignored.
pub fn sessions_from_placement(
    layout: &Layout,
    schedule: &Schedule,
    placement: &Placement,
    config: &ChargeConfig,
) -> Result<Vec<ChargeSession>> {
    config.validate()?;
    let events: HashMap<u32, _> = schedule.events().iter().map(|e| (e.id, e)).collect();
    let slot = config.slot_minutes as f64;
    let n_slots = config.n_slots();
    let mut sessions = Vec::new();
    for a in &placement.assignments {
        let event = events
            .get(&a.vehicle_id)
            .ok_or_else(|| Error::InvalidPlacement(format!("unknown vehicle {}", a.vehicle_id)))?;
        let cell = if layout.contains(a.row, a.col) {
            layout.get(a.row, a.col)
        } else {
            return Err(Error::InvalidPlacement(format!(
                "vehicle {} at ({}, {}) is off the grid",
                a.vehicle_id, a.row, a.col
            )));
        };
        match event.kind {
            VehicleKind::Car if cell == CellType::Parking => continue,
            VehicleKind::Car => {
                return Err(Error::InvalidPlacement(format!(
                    "car {} placed on a {cell:?} cell",
                    a.vehicle_id
                )))
            }
            VehicleKind::Ev {
                energy_kwh,
                peak_rate_kw,
            } => {
                if cell != CellType::Evse {
                    return Err(Error::InvalidPlacement(format!(
                        "EV {} placed on non-EVSE cell ({}, {})",
                        a.vehicle_id, a.row, a.col
                    )));
                }
                let start_slot = ((event.arrival / slot).ceil() as usize).min(n_slots);
                let end_slot = ((event.departure / slot).floor() as usize).min(n_slots);
                sessions.push(ChargeSession {
                    ev_id: a.vehicle_id,
                    evse: a.cell(),
                    start_slot,
                    end_slot: end_slot.max(start_slot),
                    energy_kwh,
                    peak_kw: peak_rate_kw,
                });
            }
        }
    }
    sessions.sort_by_key(|s| (s.start_slot, s.ev_id));
    Ok(sessions)
}

/// Charging rate (kW) per EVSE per slot. Rows follow `evses`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateProfile {
    pub evses: Vec<Cell>,
    pub rates: Vec<Vec<f64>>,
    pub slot_minutes: u32,
}

impl RateProfile {
    pub fn zeros(evses: Vec<Cell>, config: &ChargeConfig) -> Self {
        let rates = vec![vec![0.0; config.n_slots()]; evses.len()];
        RateProfile {
            evses,
            rates,
            slot_minutes: config.slot_minutes,
        }
    }

    pub fn row_of(&self, evse: Cell) -> Option<usize> {
        self.evses.iter().position(|&e| e == evse)
    }

    pub fn n_slots(&self) -> usize {
        self.rates.first().map_or(0, Vec::len)
    }

    /// Sum over EVSEs for one slot.
    pub fn slot_total(&self, t: usize) -> f64 {
        self.rates.iter().map(|r| r[t]).sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["row".to_string(), "col".to_string()];
        header.extend((0..self.n_slots()).map(|t| format!("r_{t}")));
        wtr.write_record(&header)?;
        for (evse, rates) in self.evses.iter().zip(&self.rates) {
            let mut rec = vec![evse.0.to_string(), evse.1.to_string()];
            rec.extend(rates.iter().map(|r| r.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Per-vehicle delivered energy, keyed by EV id.
pub fn delivered_energy(
    profile: &RateProfile,
    sessions: &[ChargeSession],
    config: &ChargeConfig,
) -> BTreeMap<u32, f64> {
    let dh = config.slot_hours();
    sessions
        .iter()
        .map(|s| {
            let row = profile.row_of(s.evse).expect("session EVSE in profile");
            let e = s.slots().map(|t| profile.rates[row][t] * dh).sum();
            (s.ev_id, e)
        })
        .collect()
}

pub fn compute_stats(
    profile: &RateProfile,
    sessions: &[ChargeSession],
    config: &ChargeConfig,
) -> Vec<EvseStats> {
    let dh = config.slot_hours();
    let n_slots = profile.n_slots();
    let mut occupied = vec![vec![false; n_slots]; profile.evses.len()];
    for s in sessions {
        if let Some(row) = profile.row_of(s.evse) {
            for t in s.slots() {
                occupied[row][t] = true;
            }
        }
    }
    profile
        .evses
        .iter()
        .zip(&profile.rates)
        .zip(&occupied)
        .map(|((&(row, col), rates), occ)| {
            let p_tot: f64 = rates.iter().map(|r| r * dh).sum();
            let n_occ = occ.iter().filter(|&&o| o).count();
            let tau = if n_occ == 0 || p_tot == 0.0 {
                0.0
            } else {
                rates
                    .iter()
                    .zip(occ)
                    .filter(|(_, &o)| o)
                    .map(|(r, _)| r)
                    .sum::<f64>()
                    / n_occ as f64
            };
            EvseStats {
                row,
                col,
                tau,
                p_tot,
            }
        })
        .collect()
}

/// A charging algorithm that turns sessions into rate profiles.
pub trait ChargeScheduler: Send + Sync {
    fn name(&self) -> &'static str;

    fn schedule(
        &self,
        evses: &[Cell],
        sessions: &[ChargeSession],
        config: &ChargeConfig,
    ) -> Result<RateProfile>;
}

/// Charging algorithms by name.
#[derive(Clone)]
pub struct SchedulerRegistry {
    entries: BTreeMap<&'static str, Arc<dyn ChargeScheduler>>,
}

impl SchedulerRegistry {
    pub fn empty() -> Self {
        SchedulerRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, scheduler: Arc<dyn ChargeScheduler>) {
        self.entries.insert(scheduler.name(), scheduler);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ChargeScheduler>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Unknown {
                kind: "scheduler",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for SchedulerRegistry {
    fn default() -> Self {
        let mut reg = SchedulerRegistry::empty();
        reg.register(Arc::new(OlpScheduler));
        reg.register(Arc::new(GreedyScheduler));
        reg
    }
}

fn run_named(
    scheduler: &dyn ChargeScheduler,
    layout: &Layout,
    schedule: &Schedule,
    placement: &Placement,
    config: &ChargeConfig,
) -> Result<RateProfile> {
    let sessions = sessions_from_placement(layout, schedule, placement, config)?;
    scheduler.schedule(&layout.evses(), &sessions, config)
}

/// Online-LP charging profile for every EVSE of `layout`.
pub fn schedule_charging(
    layout: &Layout,
    schedule: &Schedule,
    placement: &Placement,
    config: &ChargeConfig,
) -> Result<RateProfile> {
    run_named(&OlpScheduler, layout, schedule, placement, config)
}

/// Peak-rate-until-full profile; only valid with unbounded capacity.
pub fn greedy_schedule(
    layout: &Layout,
    schedule: &Schedule,
    placement: &Placement,
    config: &ChargeConfig,
) -> Result<RateProfile> {
    run_named(&GreedyScheduler, layout, schedule, placement, config)
}
