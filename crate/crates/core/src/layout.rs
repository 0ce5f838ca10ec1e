//! Parking-lot layouts: a dense grid of typed cells.
//!
//! The text format is one character per cell (`D` door, `R` road, `E` EVSE,
//! `P` parking), one newline-terminated line per row, no header.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid coordinate as `(row, col)`.
pub type Cell = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellType {
    Door,
    Road,
    Evse,
    Parking,
}

impl CellType {
    pub fn to_char(self) -> char {
        match self {
            CellType::Door => 'D',
            CellType::Road => 'R',
            CellType::Evse => 'E',
            CellType::Parking => 'P',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'D' => Some(CellType::Door),
            'R' => Some(CellType::Road),
            'E' => Some(CellType::Evse),
            'P' => Some(CellType::Parking),
            _ => None,
        }
    }

    /// Door and road cells make up the drivable network.
    pub fn is_drivable(self) -> bool {
        matches!(self, CellType::Door | CellType::Road)
    }

    /// Cells a vehicle can occupy.
    pub fn is_spot(self) -> bool {
        matches!(self, CellType::Evse | CellType::Parking)
    }
}

/// Compass direction, listed in the fixed N, E, S, W scan order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::North => (-1, 0),
            Direction::East => (0, 1),
            Direction::South => (1, 0),
            Direction::West => (0, -1),
        }
    }

    pub fn left(self) -> Direction {
        match self {
            Direction::North => Direction::West,
            Direction::West => Direction::South,
            Direction::South => Direction::East,
            Direction::East => Direction::North,
        }
    }

    pub fn right(self) -> Direction {
        self.left().opposite()
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::South => Direction::North,
            Direction::East => Direction::West,
            Direction::West => Direction::East,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Layout {
    height: usize,
    width: usize,
    cells: Vec<CellType>,
}

impl Layout {
    /// Builds a layout from row-major cells, checking the grid invariants.
    pub fn new(height: usize, width: usize, cells: Vec<CellType>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidLayout("empty grid".into()));
        }
        if cells.len() != height * width {
            return Err(Error::InvalidLayout(format!(
                "expected {} cells for a {}x{} grid, got {}",
                height * width,
                height,
                width,
                cells.len()
            )));
        }
        let layout = Layout {
            height,
            width,
            cells,
        };
        if let Some((r, c)) = layout
            .cells_of(CellType::Door)
            .find(|&(r, c)| !layout.is_boundary(r, c))
        {
            return Err(Error::InvalidLayout(format!(
                "door not on boundary at ({r}, {c})"
            )));
        }
        Ok(layout)
    }

    /// Builds a layout from row strings in the file alphabet.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let mut cells = Vec::new();
        let mut width = None;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            let before = cells.len();
            for ch in row.chars() {
                let cell = CellType::from_char(ch).ok_or_else(|| Error::LayoutParse {
                    line: i + 1,
                    msg: format!("unknown cell character {ch:?}"),
                })?;
                cells.push(cell);
            }
            let w = cells.len() - before;
            match width {
                None => width = Some(w),
                Some(expected) if expected != w => {
                    return Err(Error::LayoutParse {
                        line: i + 1,
                        msg: format!("ragged row: expected {expected} cells, got {w}"),
                    })
                }
                _ => {}
            }
        }
        let width = width.unwrap_or(0);
        if width == 0 {
            return Err(Error::LayoutParse {
                line: 1,
                msg: "empty grid".into(),
            });
        }
        Layout::new(rows.len(), width, cells)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn cells(&self) -> &[CellType] {
        &self.cells
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> CellType {
        self.cells[self.index(row, col)]
    }

    pub fn try_get(&self, row: isize, col: isize) -> Option<CellType> {
        if row < 0 || col < 0 || row as usize >= self.height || col as usize >= self.width {
            None
        } else {
            Some(self.get(row as usize, col as usize))
        }
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row < self.height && col < self.width
    }

    pub fn is_boundary(&self, row: usize, col: usize) -> bool {
        row == 0 || col == 0 || row + 1 == self.height || col + 1 == self.width
    }

    /// One step from `(row, col)` in `dir`, if it stays on the grid.
    pub fn step(&self, (row, col): Cell, dir: Direction) -> Option<Cell> {
        let (dr, dc) = dir.delta();
        let r = row as isize + dr;
        let c = col as isize + dc;
        if r < 0 || c < 0 || r as usize >= self.height || c as usize >= self.width {
            None
        } else {
            Some((r as usize, c as usize))
        }
    }

    /// In-grid 4-neighbours in N, E, S, W order.
    pub fn neighbors(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        Direction::ALL
            .into_iter()
            .filter_map(move |d| self.step(cell, d))
    }

    pub fn cells_of(&self, kind: CellType) -> impl Iterator<Item = Cell> + '_ {
        let width = self.width;
        self.cells
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == kind)
            .map(move |(i, _)| (i / width, i % width))
    }

    pub fn evses(&self) -> Vec<Cell> {
        self.cells_of(CellType::Evse).collect()
    }

    pub fn doors(&self) -> Vec<Cell> {
        self.cells_of(CellType::Door).collect()
    }

    pub fn count(&self, kind: CellType) -> usize {
        self.cells.iter().filter(|&&c| c == kind).count()
    }

    /// Canonical text form: one line per row, each newline-terminated.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.height * (self.width + 1));
        for row in self.cells.chunks(self.width) {
            out.extend(row.iter().map(|c| c.to_char()));
            out.push('\n');
        }
        out
    }

    pub fn rows(&self) -> Vec<String> {
        self.cells
            .chunks(self.width)
            .map(|row| row.iter().map(|c| c.to_char()).collect())
            .collect()
    }

    /// Road-graph distance (in steps through road/door cells) from the
    /// nearest door, for every cell. `None` for non-drivable cells and
    /// drivable cells not connected to any door.
    pub fn door_distances(&self) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.cells.len()];
        let mut queue = VecDeque::new();
        for d in self.cells_of(CellType::Door) {
            dist[self.index(d.0, d.1)] = Some(0);
            queue.push_back(d);
        }
        while let Some(cell) = queue.pop_front() {
            let here = dist[self.index(cell.0, cell.1)].unwrap_or(0);
            for n in self.neighbors(cell) {
                let i = self.index(n.0, n.1);
                if dist[i].is_none() && self.cells[i].is_drivable() {
                    dist[i] = Some(here + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Marks every road/door cell connected to a door.
    pub fn connected_network(&self) -> Vec<bool> {
        self.door_distances().iter().map(Option::is_some).collect()
    }

    /// Whether a spot touches the door-connected road network.
    pub fn spot_reachable(&self, cell: Cell, network: &[bool]) -> bool {
        self.neighbors(cell).any(|(r, c)| network[self.index(r, c)])
    }

    /// EVSE cells adjacent to a road or door cell that is connected to a door.
    pub fn reachable_evses(&self) -> BTreeSet<Cell> {
        let network = self.connected_network();
        self.cells_of(CellType::Evse)
            .filter(|&cell| self.spot_reachable(cell, &network))
            .collect()
    }
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        if body.is_empty() {
            return Err(Error::LayoutParse {
                line: 1,
                msg: "empty grid".into(),
            });
        }
        let rows: Vec<&str> = body
            .split('\n')
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .collect();
        Layout::from_rows(&rows)
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub fn parse_layout(text: &str) -> Result<Layout> {
    text.parse()
}

pub fn serialize_layout(layout: &Layout) -> String {
    layout.to_text()
}

pub fn reachable_evses(layout: &Layout) -> BTreeSet<Cell> {
    layout.reachable_evses()
}
