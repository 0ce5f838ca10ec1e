//! Vehicle arrival schedules and their CSV form.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_HORIZON_MIN: f64 = 720.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VehicleKind {
    Car,
    Ev { energy_kwh: f64, peak_rate_kw: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleEvent {
    pub id: u32,
    pub kind: VehicleKind,
    /// Minutes from the start of the horizon.
    pub arrival: f64,
    pub departure: f64,
}

impl VehicleEvent {
    pub fn is_ev(&self) -> bool {
        matches!(self.kind, VehicleKind::Ev { .. })
    }

    pub fn duration_hours(&self) -> f64 {
        (self.departure - self.arrival) / 60.0
    }

    fn validate(&self, horizon: f64) -> Result<()> {
        let bad = |msg: String| {
            Err(Error::InvalidSchedule(format!(
                "vehicle {}: {msg}",
                self.id
            )))
        };
        if !(self.arrival.is_finite() && self.departure.is_finite()) {
            return bad("non-finite time".into());
        }
        if self.arrival < 0.0 || self.arrival >= horizon {
            return bad(format!("arrival {} outside [0, {horizon})", self.arrival));
        }
        if self.departure <= self.arrival {
            return bad("departure not after arrival".into());
        }
        if let VehicleKind::Ev {
            energy_kwh,
            peak_rate_kw,
        } = self.kind
        {
            if !(energy_kwh.is_finite() && energy_kwh >= 0.0) {
                return bad(format!("energy demand {energy_kwh} must be >= 0"));
            }
            if !(peak_rate_kw.is_finite() && peak_rate_kw > 0.0) {
                return bad(format!("peak rate {peak_rate_kw} must be > 0"));
            }
            let achievable = peak_rate_kw * self.duration_hours();
            if energy_kwh > achievable * (1.0 + 1e-9) {
                return bad(format!(
                    "demand {energy_kwh} kWh exceeds {achievable} kWh achievable at peak"
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    events: Vec<VehicleEvent>,
    horizon: f64,
}

impl Schedule {
    /// Sorts events by arrival (stable) and validates them.
    pub fn new(mut events: Vec<VehicleEvent>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "horizon {horizon} must be > 0"
            )));
        }
        events.sort_by(|a, b| a.arrival.total_cmp(&b.arrival));
        let mut ids = HashSet::with_capacity(events.len());
        for e in &events {
            e.validate(horizon)?;
            if !ids.insert(e.id) {
                return Err(Error::InvalidSchedule(format!("duplicate id {}", e.id)));
            }
        }
        Ok(Schedule { events, horizon })
    }

    pub fn events(&self) -> &[VehicleEvent] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn evs(&self) -> impl Iterator<Item = &VehicleEvent> {
        self.events.iter().filter(|e| e.is_ev())
    }

    pub fn find(&self, id: u32) -> Option<&VehicleEvent> {
        self.events.iter().find(|e| e.id == id)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for e in &self.events {
            wtr.serialize(ScheduleRow::from(e))?;
        }
        // An empty schedule still carries its header.
        if self.events.is_empty() {
            wtr.write_record(SCHEDULE_HEADER)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: Read>(r: R, horizon: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().ne(SCHEDULE_HEADER) {
            return Err(Error::InvalidSchedule(format!(
                "unexpected header {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let mut events = Vec::new();
        for row in rdr.deserialize::<ScheduleRow>() {
            events.push(row?.try_into()?);
        }
        Schedule::new(events, horizon)
    }
}

const SCHEDULE_HEADER: [&str; 6] = [
    "id",
    "kind",
    "arrival_min",
    "departure_min",
    "energy_kwh",
    "peak_rate_kw",
];

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleRow {
    id: u32,
    kind: String,
    arrival_min: f64,
    departure_min: f64,
    energy_kwh: Option<f64>,
    peak_rate_kw: Option<f64>,
}

impl From<&VehicleEvent> for ScheduleRow {
    fn from(e: &VehicleEvent) -> Self {
        let (kind, energy_kwh, peak_rate_kw) = match e.kind {
            VehicleKind::Car => ("CAR", None, None),
            VehicleKind::Ev {
                energy_kwh,
                peak_rate_kw,
            } => ("EV", Some(energy_kwh), Some(peak_rate_kw)),
        };
        ScheduleRow {
            id: e.id,
            kind: kind.into(),
            arrival_min: e.arrival,
            departure_min: e.departure,
            energy_kwh,
            peak_rate_kw,
        }
    }
}

impl TryFrom<ScheduleRow> for VehicleEvent {
    type Error = Error;

    fn try_from(row: ScheduleRow) -> Result<Self> {
        let kind = match (row.kind.as_str(), row.energy_kwh, row.peak_rate_kw) {
            ("CAR", None, None) => VehicleKind::Car,
            ("EV", Some(energy_kwh), Some(peak_rate_kw)) => VehicleKind::Ev {
                energy_kwh,
                peak_rate_kw,
            },
            (k, _, _) => {
                return Err(Error::InvalidSchedule(format!(
                    "vehicle {}: bad kind/energy fields for kind {k:?}",
                    row.id
                )))
            }
        };
        Ok(VehicleEvent {
            id: row.id,
            kind,
            arrival: row.arrival_min,
            departure: row.departure_min,
        })
    }
}
