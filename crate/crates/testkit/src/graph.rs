//! Door distances by Dijkstra over an explicit road graph.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use evsim::{Cell, CellType, Layout};

fn drivable(layout: &Layout, (r, c): Cell) -> bool {
    matches!(layout.get(r, c), CellType::Road | CellType::Door)
}

fn adjacent(layout: &Layout, (r, c): Cell) -> Vec<Cell> {
    let mut out = Vec::new();
    if r > 0 {
        out.push((r - 1, c));
    }
    if c + 1 < layout.width() {
        out.push((r, c + 1));
    }
    if r + 1 < layout.height() {
        out.push((r + 1, c));
    }
    if c > 0 {
        out.push((r, c - 1));
    }
    out
}

/// Unit-weight road graph: drivable cells and their drivable neighbours.
pub fn road_graph(layout: &Layout) -> BTreeMap<Cell, Vec<Cell>> {
    let mut g = BTreeMap::new();
    for r in 0..layout.height() {
        for c in 0..layout.width() {
            if drivable(layout, (r, c)) {
                let next = adjacent(layout, (r, c))
                    .into_iter()
                    .filter(|&n| drivable(layout, n))
                    .collect();
                g.insert((r, c), next);
            }
        }
    }
    g
}

/// Shortest distance from each drivable cell to its nearest door.
pub fn dijkstra_from_doors(layout: &Layout) -> BTreeMap<Cell, u64> {
    let g = road_graph(layout);
    let mut dist: BTreeMap<Cell, u64> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    for &cell in g.keys() {
        if layout.get(cell.0, cell.1) == CellType::Door {
            dist.insert(cell, 0);
            heap.push(Reverse((0u64, cell)));
        }
    }
    while let Some(Reverse((d, cell))) = heap.pop() {
        if dist.get(&cell).is_some_and(|&best| d > best) {
            continue;
        }
        for &n in &g[&cell] {
            let nd = d + 1;
            if dist.get(&n).is_none_or(|&best| nd < best) {
                dist.insert(n, nd);
                heap.push(Reverse((nd, n)));
            }
        }
    }
    dist
}

/// Distance term for one EVSE: nearest adjacent drivable cell's distance
/// plus one, or `2 (H + W)` when none connects to a door.
pub fn door_distance(layout: &Layout, evse: Cell) -> f64 {
    let dist = dijkstra_from_doors(layout);
    adjacent(layout, evse)
        .into_iter()
        .filter_map(|n| dist.get(&n))
        .min()
        .map_or(2.0 * (layout.height() + layout.width()) as f64, |&d| {
            (d + 1) as f64
        })
}
