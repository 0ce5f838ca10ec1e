//! Procedural lot layouts: doors on the boundary, a road tree grown from
//! each door, then EVSEs scattered uniformly over the leftover cells.

use std::collections::VecDeque;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{Cell, CellType, Direction, Layout};
use crate::seeds::derive_seed;

const MAX_EVSE_RETRIES: u64 = 100;
const MAX_REACHABILITY_RETRIES: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LotGenConfig {
    pub height: usize,
    pub width: usize,
    pub n_evses: usize,
    /// Probability that a boundary cell becomes a door.
    pub p_door: f64,
    pub p_split0: f64,
    /// Split probability is `p_split0 * split_decay^(splits so far)`.
    pub split_decay: f64,
    /// Halt probability is `min(halt_cap, halt_slope * length)`.
    pub halt_slope: f64,
    pub halt_cap: f64,
    pub seed: u64,
}

impl Default for LotGenConfig {
    fn default() -> Self {
        LotGenConfig {
            height: 30,
            width: 30,
            n_evses: 15,
            p_door: 0.05,
            p_split0: 0.15,
            split_decay: 0.5,
            halt_slope: 0.02,
            halt_cap: 0.8,
            seed: 0,
        }
    }
}

impl LotGenConfig {
    pub fn new(height: usize, width: usize, n_evses: usize, seed: u64) -> Self {
        LotGenConfig {
            height,
            width,
            n_evses,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::InvalidConfig(format!("lot generator: {m}")));
        if self.height == 0 || self.width == 0 {
            return err("grid must be non-empty".into());
        }
        if self.n_evses == 0 || self.n_evses >= self.height * self.width {
            return err(format!(
                "n_evses must be in (0, {}), got {}",
                self.height * self.width,
                self.n_evses
            ));
        }
        for (name, p) in [
            ("p_door", self.p_door),
            ("p_split0", self.p_split0),
            ("split_decay", self.split_decay),
            ("halt_slope", self.halt_slope),
            ("halt_cap", self.halt_cap),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return err(format!("{name} = {p} not in [0, 1]"));
            }
        }
        if self.halt_cap >= 1.0 {
            return err("halt_cap must be < 1".into());
        }
        Ok(())
    }
}

/// A road that is still growing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActiveRoad {
    pub head: Cell,
    pub direction: Direction,
    pub length: usize,
}

struct Grower<'a> {
    config: &'a LotGenConfig,
    height: usize,
    width: usize,
    cells: Vec<Option<CellType>>,
    splits: u32,
}

impl<'a> Grower<'a> {
    fn new(config: &'a LotGenConfig) -> Self {
        Grower {
            config,
            height: config.height,
            width: config.width,
            cells: vec![None; config.height * config.width],
            splits: 0,
        }
    }

    fn step(&self, (r, c): Cell, dir: Direction) -> Option<Cell> {
        let (dr, dc) = dir.delta();
        let r = r as isize + dr;
        let c = c as isize + dc;
        (r >= 0 && c >= 0 && (r as usize) < self.height && (c as usize) < self.width)
            .then_some((r as usize, c as usize))
    }

    fn boundary(&self) -> Vec<Cell> {
        let (h, w) = (self.height, self.width);
        (0..h)
            .flat_map(|r| (0..w).map(move |c| (r, c)))
            .filter(|&(r, c)| r == 0 || c == 0 || r + 1 == h || c + 1 == w)
            .collect()
    }

    fn place_doors<R: Rng>(&mut self, rng: &mut R) -> Vec<Cell> {
        let boundary = self.boundary();
        let mut doors: Vec<Cell> = boundary
            .iter()
            .copied()
            .filter(|_| rng.random_bool(self.config.p_door))
            .collect();
        if doors.is_empty() {
            doors.push(boundary[rng.random_range(0..boundary.len())]);
        }
        for &(r, c) in &doors {
            self.cells[r * self.width + c] = Some(CellType::Door);
        }
        doors
    }

    fn grow_roads<R: Rng>(&mut self, rng: &mut R, doors: &[Cell]) {
        let mut active: VecDeque<ActiveRoad> = VecDeque::new();
        for &door in doors {
            let dirs: Vec<Direction> = Direction::ALL
                .into_iter()
                .filter(|&d| self.step(door, d).is_some())
                .collect();
            if dirs.is_empty() {
                continue;
            }
            active.push_back(ActiveRoad {
                head: door,
                direction: dirs[rng.random_range(0..dirs.len())],
                length: 0,
            });
        }

        while let Some(road) = active.pop_front() {
            let halt = (self.config.halt_slope * road.length as f64).min(self.config.halt_cap);
            let split = self.config.p_split0 * self.config.split_decay.powi(self.splits as i32);
            let u: f64 = rng.random();
            if u < halt {
                continue;
            }
            if u < halt + split {
                self.splits += 1;
                for direction in [road.direction.left(), road.direction.right()] {
                    active.push_back(ActiveRoad {
                        head: road.head,
                        direction,
                        length: 0,
                    });
                }
                continue;
            }
            let Some(next) = self.step(road.head, road.direction) else {
                continue;
            };
            let i = next.0 * self.width + next.1;
            match self.cells[i] {
                // Doors stop growth; existing road merges and halts.
                Some(_) => continue,
                None => {
                    self.cells[i] = Some(CellType::Road);
                    active.push_back(ActiveRoad {
                        head: next,
                        direction: road.direction,
                        length: road.length + 1,
                    });
                }
            }
        }
    }

    fn finish<R: Rng>(mut self, rng: &mut R) -> Option<Layout> {
        let free: Vec<usize> = (0..self.cells.len())
            .filter(|&i| self.cells[i].is_none())
            .collect();
        if free.len() < self.config.n_evses {
            return None;
        }
        for k in index::sample(rng, free.len(), self.config.n_evses) {
            self.cells[free[k]] = Some(CellType::Evse);
        }
        let cells = self
            .cells
            .into_iter()
            .map(|c| c.unwrap_or(CellType::Parking))
            .collect();
        Layout::new(self.height, self.width, cells).ok()
    }
}

fn attempt(config: &LotGenConfig, seed: u64) -> Option<Layout> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grower = Grower::new(config);
    let doors = grower.place_doors(&mut rng);
    grower.grow_roads(&mut rng, &doors);
    grower.finish(&mut rng)
}

/// Generates one layout. Deterministic in `config` (including its seed).
pub fn generate_layout(config: &LotGenConfig) -> Result<Layout> {
    config.validate()?;
    for k in 0..MAX_EVSE_RETRIES {
        let seed = if k == 0 {
            config.seed
        } else {
            derive_seed(config.seed, "lotgen-retry", k)
        };
        if let Some(layout) = attempt(config, seed) {
            return Ok(layout);
        }
    }
    Err(Error::Generation(format!(
        "could not fit {} EVSEs after {MAX_EVSE_RETRIES} attempts",
        config.n_evses
    )))
}

/// Regenerates with derived seeds until at least one EVSE is reachable.
pub fn generate_layout_with_reachability(config: &LotGenConfig) -> Result<Layout> {
    generate_reachable_counted(config).map(|(layout, _)| layout)
}

/// Like [`generate_layout_with_reachability`], also returning how many
/// layouts were rejected first.
pub fn generate_reachable_counted(config: &LotGenConfig) -> Result<(Layout, u64)> {
    config.validate()?;
    for k in 0..MAX_REACHABILITY_RETRIES {
        let seed = if k == 0 {
            config.seed
        } else {
            derive_seed(config.seed, "lotgen-reachability", k)
        };
        let layout = generate_layout(&LotGenConfig {
            seed,
            ..config.clone()
        })?;
        if !layout.reachable_evses().is_empty() {
            return Ok((layout, k));
        }
    }
    Err(Error::Generation(format!(
        "no layout with a reachable EVSE after {MAX_REACHABILITY_RETRIES} attempts"
    )))
}
