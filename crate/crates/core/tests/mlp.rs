use evsim::mlp::{
    load_model, save_model, train, MlpModel, ModelConfig, OutputTransform, Sample, MODEL_IDS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use testkit::nn::{check_model, forward, loss, random_features, Batch};

#[test]
fn forward_matches_matrix_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for id in MODEL_IDS {
        let config = ModelConfig {
            seed: rng.random(),
            ..ModelConfig::preset(id, 5).unwrap()
        };
        let mut model = MlpModel::init(&config).unwrap();
        for l in &mut model.layers {
            l.biases
                .iter_mut()
                .for_each(|b| *b = rng.random_range(-0.5..0.5));
        }
        for _ in 0..20 {
            let x = random_features(&config, &mut rng);
            let (oracle, _, _) = forward(&model, &x);
            let got = model.forward(&x).unwrap();
            for k in 0..2 {
                assert!((oracle[k] - got[k]).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    for id in MODEL_IDS {
        for pair in 0..20 {
            let r = check_model(id, 9, 1000 * id as u64 + pair, 12, 1e-5, 1e-4);
            assert!(
                r.checked >= 10,
                "model {id} pair {pair}: only {} params",
                r.checked
            );
            assert!(
                r.max_rel_error <= 1e-4,
                "model {id} pair {pair}: {}",
                r.max_rel_error
            );
        }
    }
}

#[test]
fn full_batch_loss_non_increasing_at_small_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let config = ModelConfig {
        hidden_layers: vec![16],
        learning_rate: 1e-4,
        ..ModelConfig::preset(2, 1).unwrap()
    };
    // Redraw until every hidden unit is well clear of its kink, so ten small
    // steps cannot flip any of them.
    let (mut model, batch) = loop {
        let model = MlpModel::init(&ModelConfig {
            seed: rng.random(),
            ..config.clone()
        })
        .unwrap();
        let batch: Batch = (0..8)
            .map(|_| {
                let x = (0..5).map(|_| rng.random_range(0.5..1.5)).collect();
                (x, [rng.random_range(0.0..2.0), rng.random_range(0.0..3.0)])
            })
            .collect();
        if batch.iter().all(|(x, _)| forward(&model, x).2 > 0.05) {
            break (model, batch);
        }
    };
    let pattern = |m: &MlpModel| {
        batch
            .iter()
            .map(|(x, _)| forward(m, x).1)
            .collect::<Vec<_>>()
    };
    let start = pattern(&model);
    let refs: Vec<(&[f64], [f64; 2])> = batch.iter().map(|(x, y)| (x.as_slice(), *y)).collect();
    let mut adam = evsim::mlp::Adam::new(&model, 1e-4);
    let mut last = loss(&model, &batch);
    for _ in 0..10 {
        let (_, g) = model.gradients(&refs).unwrap();
        adam.step(&mut model, &g);
        assert!(pattern(&model) == start, "left the smooth region");
        let now = loss(&model, &batch);
        assert!(now <= last, "{now} > {last}");
        last = now;
    }
}

#[test]
fn learns_a_linear_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let config = ModelConfig {
        output_transform: OutputTransform::Raw,
        hidden_layers: vec![32],
        seed: 4,
        ..ModelConfig::preset(1, 1).unwrap()
    };
    let w: Vec<[f64; 2]> = (0..5)
        .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    let sample = |rng: &mut ChaCha8Rng| {
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..1.0)).collect();
        let y = [0, 1].map(|k| x.iter().zip(&w).map(|(xi, wi)| xi * wi[k]).sum());
        Sample {
            features: x,
            targets: y,
        }
    };
    let train_set: Vec<Sample> = (0..500).map(|_| sample(&mut rng)).collect();
    let test_set: Vec<Sample> = (0..200).map(|_| sample(&mut rng)).collect();
    let (model, history) = train(&train_set, None, &config).unwrap();
    assert_eq!(history.epochs.len(), 200);
    let mse = evsim::mlp::evaluate(&model, &test_set)
        .unwrap()
        .physical
        .mean();
    assert!(mse < 1e-2, "{mse}");
}

#[test]
fn log_transform_round_trip() {
    let config = ModelConfig::preset(2, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let y = [
            rng.random_range(1e-3..500.0),
            1e-3 * rng.random_range(1.0..1e6),
        ];
        let back = config.invert_outputs(config.transform_targets(y));
        for k in 0..2 {
            assert!((back[k] - y[k]).abs() <= 1e-9 * y[k].max(1.0));
        }
    }
}

#[test]
fn model_file_size_scales_with_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let mut points = Vec::new();
    for width in [16usize, 64, 256, 1024] {
        let config = ModelConfig {
            hidden_layers: vec![width],
            ..ModelConfig::preset(2, 9).unwrap()
        };
        let model = MlpModel::init(&config).unwrap();
        let path = dir.path().join(format!("m{width}.json"));
        save_model(&model, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), model);
        let bytes = std::fs::metadata(&path).unwrap().len() as f64;
        points.push((model.num_params() as f64, bytes));
    }
    let per_param: Vec<f64> = points
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    for p in &per_param {
        assert!((p / per_param[0] - 1.0).abs() < 0.1, "{per_param:?}");
        assert!(*p < 30.0);
    }
}
