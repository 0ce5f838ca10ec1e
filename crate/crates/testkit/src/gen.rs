//! Seeded end-to-end instances built from the library's own generators.

use evsim::lotgen::{generate_layout_with_reachability, LotGenConfig};
use evsim::parking::{simulate_parking, ParkingRules};
use evsim::placement::Placement;
use evsim::schedule::Schedule;
use evsim::schedule_gen::{generate_schedule, ScheduleGenConfig};
use evsim::seeds::derive_seed;
use evsim::Layout;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Triple {
    pub layout: Layout,
    pub schedule: Schedule,
    pub placement: Placement,
}

/// A reachable layout of random size with a default-rule placement.
pub fn triple(seed: u64) -> Triple {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "triple", 0));
    let h = rng.random_range(8..=20);
    let w = rng.random_range(8..=20);
    let n = rng.random_range(2..=10);
    let layout = generate_layout_with_reachability(&LotGenConfig::new(
        h,
        w,
        n,
        derive_seed(seed, "triple-lot", 0),
    ))
    .expect("layout");
    let schedule = generate_schedule(&ScheduleGenConfig {
        n_evs: rng.random_range(5..=40),
        n_cars: rng.random_range(0..=60),
        seed: derive_seed(seed, "triple-schedule", 0),
        ..Default::default()
    })
    .expect("schedule");
    let placement = simulate_parking(
        &layout,
        &schedule,
        &ParkingRules::default(),
        derive_seed(seed, "triple-parking", 0),
    )
    .expect("placement");
    Triple {
        layout,
        schedule,
        placement,
    }
}
