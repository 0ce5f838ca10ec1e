//! Vehicle-to-spot assignments produced by the parking simulator.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{Cell, CellType, Layout};
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    #[serde(rename = "ev_id")]
    pub vehicle_id: u32,
    pub row: usize,
    pub col: usize,
}

impl Assignment {
    pub fn cell(&self) -> Cell {
        (self.row, self.col)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Placement {
    /// In the order vehicles were parked.
    pub assignments: Vec<Assignment>,
    pub skipped: Vec<u32>,
}

impl Placement {
    /// Restricts the placement to EV assignments, the content of a placement file.
    pub fn ev_only(&self, schedule: &Schedule) -> Placement {
        let evs: std::collections::HashSet<u32> = schedule.evs().map(|e| e.id).collect();
        Placement {
            assignments: self
                .assignments
                .iter()
                .filter(|a| evs.contains(&a.vehicle_id))
                .copied()
                .collect(),
            skipped: self
                .skipped
                .iter()
                .filter(|id| evs.contains(id))
                .copied()
                .collect(),
        }
    }

    pub fn cell_of(&self, vehicle_id: u32) -> Option<Cell> {
        self.assignments
            .iter()
            .find(|a| a.vehicle_id == vehicle_id)
            .map(Assignment::cell)
    }

    /// Checks type matching and that no cell is double-booked in time.
    /// Vehicles absent from the placement are not checked.
    pub fn validate(&self, layout: &Layout, schedule: &Schedule) -> Result<()> {
        let events: HashMap<u32, _> = schedule.events().iter().map(|e| (e.id, e)).collect();
        let mut per_cell: HashMap<Cell, Vec<(f64, f64)>> = HashMap::new();
        for a in &self.assignments {
            let e = events.get(&a.vehicle_id).ok_or_else(|| {
                Error::InvalidPlacement(format!("unknown vehicle {}", a.vehicle_id))
            })?;
            if !layout.contains(a.row, a.col) {
                return Err(Error::InvalidPlacement(format!(
                    "vehicle {} at ({}, {}) is off the grid",
                    a.vehicle_id, a.row, a.col
                )));
            }
            let want = if e.is_ev() {
                CellType::Evse
            } else {
                CellType::Parking
            };
            if layout.get(a.row, a.col) != want {
                return Err(Error::InvalidPlacement(format!(
                    "vehicle {} at ({}, {}) is not on a {:?} cell",
                    a.vehicle_id, a.row, a.col, want
                )));
            }
            per_cell
                .entry(a.cell())
                .or_default()
                .push((e.arrival, e.departure));
        }
        for (cell, mut spans) in per_cell {
            spans.sort_by(|a, b| a.0.total_cmp(&b.0));
            if spans.windows(2).any(|w| w[1].0 < w[0].1) {
                return Err(Error::InvalidPlacement(format!(
                    "cell {cell:?} is double-booked"
                )));
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        if self.assignments.is_empty() {
            wtr.write_record(["ev_id", "row", "col"])?;
        }
        for a in &self.assignments {
            wtr.serialize(a)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().ne(["ev_id", "row", "col"]) {
            return Err(Error::InvalidPlacement(format!(
                "unexpected header {:?}",
                headers.iter().collect::<Vec<_>>()
            )));
        }
        let assignments = rdr
            .deserialize::<Assignment>()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Placement {
            assignments,
            skipped: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{VehicleEvent, VehicleKind};

    fn sched() -> Schedule {
        let ev = |id, a, d| VehicleEvent {
            id,
            kind: VehicleKind::Ev {
                energy_kwh: 1.0,
                peak_rate_kw: 7.2,
            },
            arrival: a,
            departure: d,
        };
        Schedule::new(
            vec![
                ev(0, 0.0, 60.0),
                ev(1, 60.0, 120.0),
                ev(2, 30.0, 90.0),
                VehicleEvent {
                    id: 3,
                    kind: VehicleKind::Car,
                    arrival: 0.0,
                    departure: 10.0,
                },
            ],
            720.0,
        )
        .unwrap()
    }

    fn at(id: u32, row: usize, col: usize) -> Assignment {
        Assignment {
            vehicle_id: id,
            row,
            col,
        }
    }

    #[test]
    fn back_to_back_is_not_double_booking() {
        let layout: Layout = "DRE\nPPP\n".parse().unwrap();
        let p = Placement {
            assignments: vec![at(0, 0, 2), at(1, 0, 2), at(3, 1, 0)],
            skipped: vec![2],
        };
        p.validate(&layout, &sched()).unwrap();
    }

    #[test]
    fn overlap_and_type_mismatch_rejected() {
        let layout: Layout = "DRE\nPPP\n".parse().unwrap();
        let p = Placement {
            assignments: vec![at(0, 0, 2), at(2, 0, 2)],
            skipped: vec![],
        };
        assert!(p.validate(&layout, &sched()).is_err());
        let p = Placement {
            assignments: vec![at(3, 0, 2)],
            skipped: vec![],
        };
        assert!(p.validate(&layout, &sched()).is_err());
    }

    #[test]
    fn csv_keeps_evs_only() {
        let p = Placement {
            assignments: vec![at(0, 0, 2), at(3, 1, 0)],
            skipped: vec![1, 2],
        };
        let mut buf = Vec::new();
        p.ev_only(&sched()).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "ev_id,row,col\n0,0,2\n");
        let back = Placement::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.assignments, vec![at(0, 0, 2)]);
    }
}
