use evsim::charge::{compute_stats, sessions_from_placement, SchedulerRegistry};
use evsim::featurize::FeatureConfig;
use evsim::lotgen::{generate_layout_with_reachability, LotGenConfig};
use evsim::parking::simulate_parking;
use evsim::pipeline::{
    build_dataset, read_dataset_csv, run_dataset, run_experiment, LayoutSeeds, PipelineConfig,
    Split, MANIFEST_FILE, TRAIN_FILE, VAL_FILE,
};
use evsim::schedule_gen::{generate_schedule, ScheduleGenConfig};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small(seed: u64) -> PipelineConfig {
    PipelineConfig {
        n_train_layouts: 6,
        n_val_layouts: 2,
        schedules_per_layout: 3,
        seed,
        lot: LotGenConfig::new(12, 12, 5, 0),
        schedule: ScheduleGenConfig {
            n_evs: 20,
            n_cars: 30,
            ..Default::default()
        },
        features: FeatureConfig {
            m: 5,
            ..Default::default()
        },
        ..Default::default()
    }
}

#[test]
fn same_seed_same_bytes_regardless_of_threads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_dataset(&small(42), a.path(), 1).unwrap();
    run_dataset(&small(42), b.path(), 3).unwrap();
    for f in [TRAIN_FILE, VAL_FILE, MANIFEST_FILE, "lots/train_3.txt"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
    let c = tempfile::tempdir().unwrap();
    run_dataset(&small(43), c.path(), 1).unwrap();
    assert_ne!(
        std::fs::read(a.path().join(TRAIN_FILE)).unwrap(),
        std::fs::read(c.path().join(TRAIN_FILE)).unwrap()
    );
}

#[test]
fn written_rows_read_back_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_dataset(&small(1), dir.path(), 0).unwrap();
    assert_eq!(
        read_dataset_csv(dir.path().join(TRAIN_FILE)).unwrap(),
        out.train
    );
    assert_eq!(
        read_dataset_csv(dir.path().join(VAL_FILE)).unwrap(),
        out.val
    );
}

#[test]
fn targets_are_means_of_independently_recomputed_runs() {
    let config = small(9);
    let (out, _) = build_dataset(&config, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let scheduler = SchedulerRegistry::default().get(&config.scheduler).unwrap();
    for row in out.train.choose_multiple(&mut rng, 10) {
        let seeds = LayoutSeeds::derive(
            config.seed,
            Split::Train,
            row.lot_id,
            config.schedules_per_layout,
        );
        let layout = generate_layout_with_reachability(&LotGenConfig {
            seed: seeds.lot_seed,
            ..config.lot.clone()
        })
        .unwrap();
        let (mut tau, mut p_tot) = (0.0, 0.0);
        for k in 0..config.schedules_per_layout {
            let schedule = generate_schedule(&ScheduleGenConfig {
                seed: seeds.schedule_seeds[k],
                ..config.schedule.clone()
            })
            .unwrap();
            let placement =
                simulate_parking(&layout, &schedule, &config.parking, seeds.parking_seeds[k])
                    .unwrap();
            let sessions =
                sessions_from_placement(&layout, &schedule, &placement, &config.charge).unwrap();
            let profile = scheduler
                .schedule(&layout.evses(), &sessions, &config.charge)
                .unwrap();
            let s = compute_stats(&profile, &sessions, &config.charge)
                .into_iter()
                .find(|s| (s.row, s.col) == row.cell())
                .unwrap();
            tau += s.tau;
            p_tot += s.p_tot;
        }
        let n = config.schedules_per_layout as f64;
        assert!((row.tau - tau / n).abs() <= 1e-12);
        assert!((row.p_tot - p_tot / n).abs() <= 1e-12);
    }
}

#[test]
fn desk_scale_row_count() {
    let config = PipelineConfig {
        n_train_layouts: 100,
        n_val_layouts: 20,
        schedules_per_layout: 5,
        lot: LotGenConfig::new(20, 20, 10, 0),
        ..Default::default()
    };
    let (out, _) = build_dataset(&config, 0).unwrap();
    assert_eq!(out.train.len(), 1000);
    assert_eq!(out.val.len(), 200);
    assert_eq!(out.train[0].features.len(), 9 * 9 * 5 + 1);
}

#[test]
fn unreachable_evses_have_zero_targets() {
    let config = PipelineConfig {
        n_train_layouts: 100,
        n_val_layouts: 1,
        schedules_per_layout: 2,
        ..Default::default()
    };
    let (_, runs) = build_dataset(&config, 0).unwrap();
    let mut unreachable = 0;
    for run in &runs {
        let reachable = run.layout.reachable_evses();
        for stats in run.per_schedule.iter().chain([&run.averaged]) {
            for s in stats {
                if !reachable.contains(&(s.row, s.col)) {
                    unreachable += 1;
                    assert_eq!((s.tau, s.p_tot), (0.0, 0.0));
                }
            }
        }
    }
    assert!(unreachable > 0);
}

#[test]
fn experiment_writes_models_and_histories() {
    let data = tempfile::tempdir().unwrap();
    let models = tempfile::tempdir().unwrap();
    let mut config = small(5);
    config.train.epochs = 3;
    run_dataset(&config, data.path(), 0).unwrap();
    assert!(run_experiment(&config, data.path(), &[], models.path())
        .unwrap()
        .is_empty());
    let results = run_experiment(&config, data.path(), &[1, 4], models.path()).unwrap();
    assert_eq!(results.len(), 2);
    for (r, history) in &results {
        assert_eq!(history.epochs.len(), 3);
        let text = std::fs::read_to_string(&r.history_path).unwrap();
        assert_eq!(text.lines().count(), 4);
        let model = evsim::mlp::load_model(&r.model_path).unwrap();
        assert_eq!(model.config.model_id, r.model_id);
    }
}
