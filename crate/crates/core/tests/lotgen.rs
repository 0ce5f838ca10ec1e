use evsim::lotgen::{
    generate_layout, generate_layout_with_reachability, generate_reachable_counted, LotGenConfig,
};
use evsim::{CellType, Layout};
use testkit::graph::dijkstra_from_doors;

fn check_invariants(l: &Layout, n_evses: usize) {
    assert_eq!(l.count(CellType::Evse), n_evses);
    assert!(l.count(CellType::Door) >= 1);
    for d in l.doors() {
        assert!(l.is_boundary(d.0, d.1));
    }
    let dist = dijkstra_from_doors(l);
    for road in l.cells_of(CellType::Road) {
        assert!(
            dist.contains_key(&road),
            "road {road:?} not connected to a door"
        );
    }
}

#[test]
fn small_lot_example() {
    for seed in 0..50 {
        let l = generate_layout(&LotGenConfig::new(5, 5, 4, seed)).unwrap();
        assert_eq!((l.height(), l.width()), (5, 5));
        check_invariants(&l, 4);
    }
}

#[test]
fn default_distribution_over_1000_seeds() {
    let mut doors = 0usize;
    let mut roads = 0usize;
    for seed in 0..1000 {
        let cfg = LotGenConfig::new(30, 30, 15, seed);
        let l = generate_layout(&cfg).unwrap();
        check_invariants(&l, 15);
        assert_eq!(l.to_text(), generate_layout(&cfg).unwrap().to_text());
        doors += l.count(CellType::Door);
        roads += l.count(CellType::Road);
    }
    let mean_doors = doors as f64 / 1000.0;
    let road_fraction = roads as f64 / (1000.0 * 900.0);
    assert!(
        (1.0..=0.05 * 116.0 * 2.0).contains(&mean_doors),
        "{mean_doors}"
    );
    assert!(
        road_fraction > 0.0 && road_fraction < 0.6,
        "{road_fraction}"
    );
}

#[test]
fn reachability_regeneration_over_1000_seeds() {
    let mut with_unreachable = 0;
    for seed in 0..1000 {
        let l = generate_layout_with_reachability(&LotGenConfig::new(30, 30, 15, seed)).unwrap();
        let reachable = l.reachable_evses();
        assert!(!reachable.is_empty());
        if reachable.len() < 15 {
            with_unreachable += 1;
        }
    }
    assert!(with_unreachable > 0);
}

#[test]
fn many_doors_rarely_regenerate() {
    let mut first_try = 0;
    for seed in 0..200 {
        let cfg = LotGenConfig {
            p_door: 0.5,
            ..LotGenConfig::new(30, 30, 15, seed)
        };
        let (_, rejected) = generate_reachable_counted(&cfg).unwrap();
        if rejected == 0 {
            first_try += 1;
        }
    }
    assert!(first_try >= 190, "{first_try}");
}
