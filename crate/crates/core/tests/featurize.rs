use evsim::featurize::{extract_all, extract_features, DoorDistances, FeatureConfig, CHANNELS};
use evsim::lotgen::{generate_layout, LotGenConfig};
use evsim::Layout;

#[test]
fn door_distance_matches_dijkstra() {
    for seed in 0..200 {
        let l =
            generate_layout(&LotGenConfig::new(12 + (seed % 10) as usize, 15, 8, seed)).unwrap();
        let fast = DoorDistances::new(&l);
        for e in l.evses() {
            assert_eq!(
                fast.get(e),
                testkit::graph::door_distance(&l, e),
                "seed {seed} {e:?}"
            );
        }
    }
}

#[test]
fn every_position_is_one_hot() {
    let config = FeatureConfig {
        m: 9,
        include_door_distance: true,
        normalize_distance: true,
    };
    for seed in 0..50 {
        let l = generate_layout(&LotGenConfig::new(30, 30, 15, seed)).unwrap();
        for (_, f) in extract_all(&l, &config).unwrap() {
            assert_eq!(f.len(), 406);
            for pos in f[..405].chunks(CHANNELS) {
                assert_eq!(pos.iter().filter(|&&v| v == 1.0).count(), 1);
                assert_eq!(pos.iter().sum::<f64>(), 1.0);
            }
            assert!(f[405] > 0.0 && f[405] <= 2.0);
        }
    }
}

#[test]
fn identical_neighbourhoods_give_identical_vectors() {
    // The two EVSEs see the same 3x3 window but sit at different distances.
    let l = Layout::from_rows(&["DRRRRRRRRR", "PPEPPPPPEP", "PPPPPPPPPP"]).unwrap();
    let config = FeatureConfig {
        m: 3,
        include_door_distance: true,
        normalize_distance: false,
    };
    let a = extract_features(&l, (1, 2), &config).unwrap();
    let b = extract_features(&l, (1, 8), &config).unwrap();
    assert_eq!(a[..45], b[..45]);
    assert_ne!(a[45], b[45]);
}
