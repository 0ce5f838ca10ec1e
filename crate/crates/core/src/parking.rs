//! Behavioural parking simulation.
//!
//! Each arriving vehicle enters at a uniformly chosen door and walks the road
//! tree rooted there depth-first, visiting branches in uniformly random order.
//! At every road/door cell each free adjacent spot of the right type (EVSE for
//! EVs, parking for cars) is tried in N, E, S, W order with its
//! [`park_probability`]. A vehicle that exhausts the tree is skipped.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{Cell, CellType, Layout};
use crate::placement::{Assignment, Placement};
use crate::schedule::Schedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParkingRules {
    pub p_base: f64,
    /// Applied once per occupied 4-adjacent parking/EVSE cell.
    pub occupied_neighbor_factor: f64,
    /// Applied to spots on the lot boundary.
    pub edge_bonus: f64,
    pub p_max: f64,
}

impl Default for ParkingRules {
    fn default() -> Self {
        ParkingRules {
            p_base: 0.5,
            occupied_neighbor_factor: 0.5,
            edge_bonus: 1.5,
            p_max: 0.95,
        }
    }
}

impl ParkingRules {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |p: f64| p > 0.0 && p <= 1.0;
        if !in_unit(self.p_base) || !in_unit(self.p_max) {
            return Err(Error::InvalidConfig(
                "parking rules: p_base and p_max must be in (0, 1]".into(),
            ));
        }
        if !(self.occupied_neighbor_factor > 0.0 && self.edge_bonus > 0.0) {
            return Err(Error::InvalidConfig(
                "parking rules: factors must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Which spots are taken, and until when.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyState {
    width: usize,
    departures: Vec<Option<f64>>,
}

impl OccupancyState {
    pub fn new(layout: &Layout) -> Self {
        OccupancyState {
            width: layout.width(),
            departures: vec![None; layout.height() * layout.width()],
        }
    }

    pub fn is_occupied(&self, (r, c): Cell) -> bool {
        self.departures[r * self.width + c].is_some()
    }

    pub fn departure(&self, (r, c): Cell) -> Option<f64> {
        self.departures[r * self.width + c]
    }

    pub fn occupy(&mut self, (r, c): Cell, departure: f64) {
        self.departures[r * self.width + c] = Some(departure);
    }

    /// Frees every spot whose occupant has left by `time`.
    pub fn release_until(&mut self, time: f64) {
        for d in &mut self.departures {
            if matches!(*d, Some(t) if t <= time) {
                *d = None;
            }
        }
    }

    pub fn occupied_count(&self) -> usize {
        self.departures.iter().filter(|d| d.is_some()).count()
    }
}

pub fn park_probability(
    layout: &Layout,
    occupancy: &OccupancyState,
    spot: Cell,
    rules: &ParkingRules,
) -> Result<f64> {
    let (row, col) = spot;
    if !layout.contains(row, col) {
        return Err(Error::InvalidSpot {
            row,
            col,
            msg: "outside the grid".into(),
        });
    }
    if !layout.get(row, col).is_spot() {
        return Err(Error::InvalidSpot {
            row,
            col,
            msg: "not a parking or EVSE cell".into(),
        });
    }
    if occupancy.is_occupied(spot) {
        return Err(Error::InvalidSpot {
            row,
            col,
            msg: "spot is occupied".into(),
        });
    }
    Ok(spot_probability(layout, occupancy, spot, rules))
}

fn spot_probability(
    layout: &Layout,
    occupancy: &OccupancyState,
    spot: Cell,
    rules: &ParkingRules,
) -> f64 {
    let occupied_neighbors = layout
        .neighbors(spot)
        .filter(|&(r, c)| layout.get(r, c).is_spot() && occupancy.is_occupied((r, c)))
        .count();
    let edge = if layout.is_boundary(spot.0, spot.1) {
        rules.edge_bonus
    } else {
        1.0
    };
    let p = rules.p_base
        * rules
            .occupied_neighbor_factor
            .powi(occupied_neighbors as i32)
        * edge;
    p.clamp(0.0, rules.p_max)
}

/// Road network rooted at one door, with cycles broken by first-visit parent
/// in breadth-first order.
#[derive(Debug, Clone)]
pub struct RoadTree {
    pub root: Cell,
    /// Children per grid index, in N, E, S, W discovery order.
    children: Vec<Vec<Cell>>,
    width: usize,
}

impl RoadTree {
    pub fn build(layout: &Layout, root: Cell) -> Self {
        let n = layout.height() * layout.width();
        let mut children = vec![Vec::new(); n];
        let mut seen = vec![false; n];
        seen[layout.index(root.0, root.1)] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(cell) = queue.pop_front() {
            for next in layout.neighbors(cell) {
                let i = layout.index(next.0, next.1);
                if !seen[i] && layout.get(next.0, next.1).is_drivable() {
                    seen[i] = true;
                    children[layout.index(cell.0, cell.1)].push(next);
                    queue.push_back(next);
                }
            }
        }
        RoadTree {
            root,
            children,
            width: layout.width(),
        }
    }

    pub fn children(&self, (r, c): Cell) -> &[Cell] {
        &self.children[r * self.width + c]
    }
}

pub struct ParkingSimulator<'a> {
    layout: &'a Layout,
    rules: ParkingRules,
    trees: Vec<RoadTree>,
}

impl<'a> ParkingSimulator<'a> {
    pub fn new(layout: &'a Layout, rules: ParkingRules) -> Result<Self> {
        rules.validate()?;
        let doors = layout.doors();
        if doors.is_empty() {
            return Err(Error::InvalidLayout("layout has no doors".into()));
        }
        let trees = doors.iter().map(|&d| RoadTree::build(layout, d)).collect();
        Ok(ParkingSimulator {
            layout,
            rules,
            trees,
        })
    }

    pub fn trees(&self) -> &[RoadTree] {
        &self.trees
    }

    /// Routes one vehicle through the lot. Returns the chosen spot, if any;
    /// occupancy is not modified.
    pub fn route<R: Rng>(
        &self,
        occupancy: &OccupancyState,
        is_ev: bool,
        rng: &mut R,
    ) -> Option<Cell> {
        let want = if is_ev {
            CellType::Evse
        } else {
            CellType::Parking
        };
        let tree = &self.trees[rng.random_range(0..self.trees.len())];
        let mut stack = vec![tree.root];
        let mut order: Vec<Cell> = Vec::new();
        while let Some(node) = stack.pop() {
            for spot in self.layout.neighbors(node) {
                if self.layout.get(spot.0, spot.1) != want || occupancy.is_occupied(spot) {
                    continue;
                }
                let p = spot_probability(self.layout, occupancy, spot, &self.rules);
                if rng.random::<f64>() < p {
                    return Some(spot);
                }
            }
            order.clear();
            order.extend_from_slice(tree.children(node));
            order.shuffle(rng);
            stack.extend(order.iter().rev());
        }
        None
    }
}

/// Runs the parking simulation over a whole schedule.
pub fn simulate_parking(
    layout: &Layout,
    schedule: &Schedule,
    rules: &ParkingRules,
    seed: u64,
) -> Result<Placement> {
    let sim = ParkingSimulator::new(layout, rules.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut occupancy = OccupancyState::new(layout);
    let mut placement = Placement::default();
    for event in schedule.events() {
        occupancy.release_until(event.arrival);
        match sim.route(&occupancy, event.is_ev(), &mut rng) {
            Some(cell) => {
                occupancy.occupy(cell, event.departure);
                placement.assignments.push(Assignment {
                    vehicle_id: event.id,
                    row: cell.0,
                    col: cell.1,
                });
            }
            None => placement.skipped.push(event.id),
        }
    }
    Ok(placement)
}
