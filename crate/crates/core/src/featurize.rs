//! Neighbourhood encoding of an EVSE.
//!
//! The `m x m` window centred on the EVSE is one-hot encoded over the channels
//! `[road, parking, evse, door, off-grid]` and flattened row-major by
//! `(row, col, channel)`. Optionally the road-path distance to the nearest
//! door is appended.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{Cell, CellType, Layout};

pub const CHANNELS: usize = 5;
pub const CH_ROAD: usize = 0;
pub const CH_PARKING: usize = 1;
pub const CH_EVSE: usize = 2;
pub const CH_DOOR: usize = 3;
pub const CH_OFF_GRID: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Odd window side length.
    pub m: usize,
    pub include_door_distance: bool,
    pub normalize_distance: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            m: 9,
            include_door_distance: false,
            normalize_distance: false,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "neighbourhood size must be odd and >= 1, got {}",
                self.m
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.m * self.m * CHANNELS + usize::from(self.include_door_distance)
    }
}

fn channel(cell: Option<CellType>) -> usize {
    match cell {
        Some(CellType::Road) => CH_ROAD,
        Some(CellType::Parking) => CH_PARKING,
        Some(CellType::Evse) => CH_EVSE,
        Some(CellType::Door) => CH_DOOR,
        None => CH_OFF_GRID,
    }
}

/// Road-path distance helper shared across many EVSEs of one layout.
pub struct DoorDistances<'a> {
    layout: &'a Layout,
    dist: Vec<Option<u32>>,
}

impl<'a> DoorDistances<'a> {
    pub fn new(layout: &'a Layout) -> Self {
        DoorDistances {
            layout,
            dist: layout.door_distances(),
        }
    }

    pub fn sentinel(&self) -> f64 {
        2.0 * (self.layout.height() + self.layout.width()) as f64
    }

    /// Shortest road/door path from an adjacent drivable cell to a door, plus
    /// one; the sentinel `2 (H + W)` when no such path exists.
    pub fn get(&self, evse: Cell) -> f64 {
        self.layout
            .neighbors(evse)
            .filter_map(|(r, c)| self.dist[self.layout.index(r, c)])
            .min()
            .map_or(self.sentinel(), |d| (d + 1) as f64)
    }
}

pub fn door_distance(layout: &Layout, evse: Cell) -> f64 {
    DoorDistances::new(layout).get(evse)
}

fn check_center(layout: &Layout, evse: Cell) -> Result<()> {
    let (row, col) = evse;
    if !layout.contains(row, col) {
        return Err(Error::InvalidSpot {
            row,
            col,
            msg: "outside the grid".into(),
        });
    }
    if layout.get(row, col) != CellType::Evse {
        return Err(Error::InvalidSpot {
            row,
            col,
            msg: "not an EVSE cell".into(),
        });
    }
    Ok(())
}

fn encode(
    layout: &Layout,
    evse: Cell,
    config: &FeatureConfig,
    distances: Option<&DoorDistances<'_>>,
) -> Result<Vec<f64>> {
    config.validate()?;
    check_center(layout, evse)?;
    let half = (config.m / 2) as isize;
    let mut out = vec![0.0; config.len()];
    let mut pos = 0;
    for dr in -half..=half {
        for dc in -half..=half {
            let cell = layout.try_get(evse.0 as isize + dr, evse.1 as isize + dc);
            out[pos * CHANNELS + channel(cell)] = 1.0;
            pos += 1;
        }
    }
    if config.include_door_distance {
        let owned;
        let distances = match distances {
            Some(d) => d,
            None => {
                owned = DoorDistances::new(layout);
                &owned
            }
        };
        let mut d = distances.get(evse);
        if config.normalize_distance {
            d /= (layout.height() + layout.width()) as f64;
        }
        out[config.len() - 1] = d;
    }
    Ok(out)
}

pub fn extract_features(layout: &Layout, evse: Cell, config: &FeatureConfig) -> Result<Vec<f64>> {
    encode(layout, evse, config, None)
}

/// Features for every EVSE of `layout`, in row-major EVSE order.
pub fn extract_all(layout: &Layout, config: &FeatureConfig) -> Result<Vec<(Cell, Vec<f64>)>> {
    let distances = DoorDistances::new(layout);
    layout
        .evses()
        .into_iter()
        .map(|e| encode(layout, e, config, Some(&distances)).map(|f| (e, f)))
        .collect()
}
