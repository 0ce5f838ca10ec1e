//! Exact spot-choice distribution of one vehicle, by enumerating every door,
//! every sibling order and every accept/reject outcome of the DFS walk.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use evsim::parking::ParkingRules;
use evsim::{Cell, CellType, Layout};

fn neighbours(layout: &Layout, (r, c): Cell) -> Vec<Cell> {
    let (h, w) = (layout.height() as isize, layout.width() as isize);
    [(-1, 0), (0, 1), (1, 0), (0, -1)]
        .into_iter()
        .map(|(dr, dc)| (r as isize + dr, c as isize + dc))
        .filter(|&(r, c)| r >= 0 && c >= 0 && r < h && c < w)
        .map(|(r, c)| (r as usize, c as usize))
        .collect()
}

fn is_drivable(t: CellType) -> bool {
    matches!(t, CellType::Road | CellType::Door)
}

/// First-visit breadth-first children of each road cell.
fn bfs_children(layout: &Layout, root: Cell) -> BTreeMap<Cell, Vec<Cell>> {
    let mut children: BTreeMap<Cell, Vec<Cell>> = BTreeMap::new();
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(cell) = queue.pop_front() {
        for n in neighbours(layout, cell) {
            if is_drivable(layout.get(n.0, n.1)) && seen.insert(n) {
                children.entry(cell).or_default().push(n);
                queue.push_back(n);
            }
        }
    }
    children
}

fn probability(
    layout: &Layout,
    occupied: &BTreeSet<Cell>,
    spot: Cell,
    rules: &ParkingRules,
) -> f64 {
    let k = neighbours(layout, spot)
        .into_iter()
        .filter(|n| occupied.contains(n))
        .count();
    let on_edge =
        spot.0 == 0 || spot.1 == 0 || spot.0 + 1 == layout.height() || spot.1 + 1 == layout.width();
    let mut p = rules.p_base;
    for _ in 0..k {
        p *= rules.occupied_neighbor_factor;
    }
    if on_edge {
        p *= rules.edge_bonus;
    }
    p.clamp(0.0, rules.p_max)
}

fn permutations(items: &[Cell]) -> Vec<Vec<Cell>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

struct Walk<'a> {
    layout: &'a Layout,
    rules: &'a ParkingRules,
    occupied: &'a BTreeSet<Cell>,
    want: CellType,
    children: BTreeMap<Cell, Vec<Cell>>,
}

impl Walk<'_> {
    fn explore(&self, stack: Vec<Cell>, mass: f64, dist: &mut BTreeMap<Option<Cell>, f64>) {
        let mut stack = stack;
        let Some(node) = stack.pop() else {
            *dist.entry(None).or_default() += mass;
            return;
        };
        let mut left = mass;
        for spot in neighbours(self.layout, node) {
            if self.layout.get(spot.0, spot.1) != self.want || self.occupied.contains(&spot) {
                continue;
            }
            let p = probability(self.layout, self.occupied, spot, self.rules);
            *dist.entry(Some(spot)).or_default() += left * p;
            left *= 1.0 - p;
        }
        if left == 0.0 {
            return;
        }
        let kids = self.children.get(&node).cloned().unwrap_or_default();
        let orders = permutations(&kids);
        let share = left / orders.len() as f64;
        for order in orders {
            let mut next = stack.clone();
            next.extend(order.iter().rev());
            self.explore(next, share, dist);
        }
    }
}

/// Probability of each outcome (a spot, or `None` for skipped) for one
/// arriving vehicle, given the set of occupied spots.
pub fn spot_distribution(
    layout: &Layout,
    rules: &ParkingRules,
    occupied: &BTreeSet<Cell>,
    is_ev: bool,
) -> BTreeMap<Option<Cell>, f64> {
    let doors: Vec<Cell> = (0..layout.height())
        .flat_map(|r| (0..layout.width()).map(move |c| (r, c)))
        .filter(|&(r, c)| layout.get(r, c) == CellType::Door)
        .collect();
    let want = if is_ev {
        CellType::Evse
    } else {
        CellType::Parking
    };
    let mut dist = BTreeMap::new();
    for &door in &doors {
        let walk = Walk {
            layout,
            rules,
            occupied,
            want,
            children: bfs_children(layout, door),
        };
        walk.explore(vec![door], 1.0 / doors.len() as f64, &mut dist);
    }
    dist
}

/// Small two-door lot with a road loop, EVSEs both on and off the network,
/// and edge spots.
pub fn fixture() -> Layout {
    Layout::from_rows(&[
        "DRRRRE", //
        "PERPRP", //
        "PPRRRP", //
        "EPPEPP", //
        "PPPPRD", //
        "PEPPRR",
    ])
    .expect("fixture parses")
}
