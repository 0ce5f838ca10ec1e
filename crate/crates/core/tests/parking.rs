use std::collections::{BTreeMap, BTreeSet};

use evsim::parking::{
    park_probability, simulate_parking, OccupancyState, ParkingRules, ParkingSimulator,
};
use evsim::{Cell, Layout};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use testkit::gen::triple;
use testkit::parking::{fixture, spot_distribution};

const TRIALS: usize = 100_000;

fn monte_carlo(
    layout: &Layout,
    occupancy: &OccupancyState,
    is_ev: bool,
    seed: u64,
) -> BTreeMap<Option<Cell>, usize> {
    let sim = ParkingSimulator::new(layout, ParkingRules::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..TRIALS {
        *counts
            .entry(sim.route(occupancy, is_ev, &mut rng))
            .or_insert(0) += 1;
    }
    counts
}

fn assert_within_3_sigma(
    exact: &BTreeMap<Option<Cell>, f64>,
    counts: &BTreeMap<Option<Cell>, usize>,
) {
    let total: f64 = exact.values().sum();
    assert!((total - 1.0).abs() < 1e-12, "oracle mass {total}");
    for (outcome, &n) in counts {
        assert!(
            exact.contains_key(outcome),
            "{outcome:?} impossible but sampled {n} times"
        );
    }
    for (outcome, &p) in exact {
        let freq = *counts.get(outcome).unwrap_or(&0) as f64 / TRIALS as f64;
        let sd = (p * (1.0 - p) / TRIALS as f64).sqrt();
        assert!(
            (freq - p).abs() <= 3.0 * sd,
            "{outcome:?}: {freq} vs {p} (sd {sd})"
        );
    }
}

#[test]
fn ev_choice_matches_tree_enumeration() {
    let layout = fixture();
    let occupancy = OccupancyState::new(&layout);
    let exact = spot_distribution(&layout, &ParkingRules::default(), &BTreeSet::new(), true);
    let counts = monte_carlo(&layout, &occupancy, true, 1);
    assert_within_3_sigma(&exact, &counts);
    for unreachable in [(3, 0), (5, 1)] {
        assert!(!counts.contains_key(&Some(unreachable)));
        assert!(!exact.contains_key(&Some(unreachable)));
    }
}

#[test]
fn car_choice_with_neighbours_occupied_matches_enumeration() {
    let layout = fixture();
    let mut occupancy = OccupancyState::new(&layout);
    let taken = [(1, 3), (2, 1), (3, 4), (0, 5)];
    for &c in &taken {
        occupancy.occupy(c, 100.0);
    }
    let occupied: BTreeSet<Cell> = taken.into_iter().collect();
    let exact = spot_distribution(&layout, &ParkingRules::default(), &occupied, false);
    let counts = monte_carlo(&layout, &occupancy, false, 2);
    assert_within_3_sigma(&exact, &counts);
}

#[test]
fn simulated_placements_are_consistent() {
    for seed in 0..100 {
        let t = triple(seed);
        t.placement.validate(&t.layout, &t.schedule).unwrap();
        let assigned: BTreeSet<u32> = t
            .placement
            .assignments
            .iter()
            .map(|a| a.vehicle_id)
            .collect();
        let skipped: BTreeSet<u32> = t.placement.skipped.iter().copied().collect();
        assert!(assigned.is_disjoint(&skipped));
        assert_eq!(assigned.len() + skipped.len(), t.schedule.len());

        let reachable = t.layout.reachable_evses();
        let mut by_cell: BTreeMap<Cell, Vec<(f64, f64)>> = BTreeMap::new();
        for a in &t.placement.assignments {
            let e = t.schedule.find(a.vehicle_id).unwrap();
            let cell = t.layout.get(a.row, a.col);
            assert_eq!(cell == evsim::CellType::Evse, e.is_ev());
            assert!(cell.is_spot());
            if e.is_ev() {
                assert!(reachable.contains(&a.cell()));
            }
            by_cell
                .entry(a.cell())
                .or_default()
                .push((e.arrival, e.departure));
        }
        for stays in by_cell.values_mut() {
            stays.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in stays.windows(2) {
                assert!(w[0].1 <= w[1].0, "double booking {w:?}");
            }
        }
    }
}

#[test]
fn unreachable_evse_never_chosen_in_full_simulation() {
    let t = triple(7);
    let layout = fixture();
    let mut hits = 0;
    for seed in 0..50 {
        let p = simulate_parking(&layout, &t.schedule, &ParkingRules::default(), seed).unwrap();
        hits += p
            .assignments
            .iter()
            .filter(|a| [(3, 0), (5, 1)].contains(&a.cell()))
            .count();
    }
    assert_eq!(hits, 0);
}

#[test]
fn probability_monotone_in_neighbour_factor() {
    let layout = fixture();
    let mut occupancy = OccupancyState::new(&layout);
    occupancy.occupy((1, 0), 10.0);
    occupancy.occupy((2, 1), 10.0);
    let spot = (2, 0);
    let mut last = 0.0;
    for k in 1..=20 {
        let rules = ParkingRules {
            occupied_neighbor_factor: k as f64 / 20.0,
            ..Default::default()
        };
        let p = park_probability(&layout, &occupancy, spot, &rules).unwrap();
        assert!(p >= last);
        last = p;
    }
    assert!(park_probability(&layout, &occupancy, (2, 1), &ParkingRules::default()).is_err());
}
