//! Plain matrix-arithmetic forward pass and finite-difference gradients.

use evsim::featurize::CHANNELS;
use evsim::mlp::{Gradients, MlpModel, ModelConfig};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Batch = Vec<(Vec<f64>, [f64; 2])>;

/// Output and hidden-unit sign pattern, using explicit `W^T x + b`.
pub fn forward(model: &MlpModel, x: &[f64]) -> ([f64; 2], Vec<bool>, f64) {
    let mut a = x.to_vec();
    let mut pattern = Vec::new();
    let mut closest = f64::INFINITY;
    let last = model.layers.len() - 1;
    for (k, layer) in model.layers.iter().enumerate() {
        let mut w = vec![vec![0.0; layer.inputs]; layer.outputs];
        for i in 0..layer.inputs {
            for o in 0..layer.outputs {
                w[o][i] = layer.weights[i * layer.outputs + o];
            }
        }
        let z: Vec<f64> = (0..layer.outputs)
            .map(|o| layer.biases[o] + (0..layer.inputs).map(|i| w[o][i] * a[i]).sum::<f64>())
            .collect();
        if k == last {
            return ([z[0], z[1]], pattern, closest);
        }
        for &v in &z {
            pattern.push(v > 0.0);
            closest = closest.min(v.abs());
        }
        a = z.iter().map(|&v| v.max(0.0)).collect();
    }
    unreachable!("model has an output layer")
}

/// `1/(2B) sum (out - y)^2` over the batch.
pub fn loss(model: &MlpModel, batch: &Batch) -> f64 {
    let s: f64 = batch
        .iter()
        .map(|(x, y)| {
            let (out, _, _) = forward(model, x);
            (out[0] - y[0]).powi(2) + (out[1] - y[1]).powi(2)
        })
        .sum();
    s / (2.0 * batch.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Param {
    pub layer: usize,
    pub bias: bool,
    pub index: usize,
}

fn slot(model: &mut MlpModel, p: Param) -> &mut f64 {
    let l = &mut model.layers[p.layer];
    if p.bias {
        &mut l.biases[p.index]
    } else {
        &mut l.weights[p.index]
    }
}

fn grad_of(g: &Gradients, p: Param) -> f64 {
    let l = &g[p.layer];
    if p.bias {
        l.biases[p.index]
    } else {
        l.weights[p.index]
    }
}

/// A random window encoding: one channel per position, plus a distance term
/// if the config asks for one.
pub fn random_features<R: Rng>(config: &ModelConfig, rng: &mut R) -> Vec<f64> {
    let m = config.features.m;
    let mut x = vec![0.0; config.input_size()];
    for pos in 0..m * m {
        x[pos * CHANNELS + rng.random_range(0..CHANNELS)] = 1.0;
    }
    if config.features.include_door_distance {
        *x.last_mut().unwrap() = rng.random_range(1..40) as f64;
    }
    x
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub checked: usize,
    pub rejected_points: usize,
}

/// Relative error with an absolute floor for gradients that are ~0.
pub fn rel_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-7)
}

/// Compares analytic gradients against central differences with step `h`
/// on `n_params` random parameters of a random model/batch for `model_id`.
///
/// Points are redrawn until every hidden pre-activation is at least `margin`
/// from zero, and parameters whose perturbation flips any hidden unit are
/// skipped, so the loss is smooth along every probed direction.
pub fn check_model(
    model_id: u8,
    m: usize,
    seed: u64,
    n_params: usize,
    h: f64,
    margin: f64,
) -> GradCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = ModelConfig {
        seed: rng.random(),
        ..ModelConfig::preset(model_id, m).unwrap()
    };
    let mut model = MlpModel::init(&config).unwrap();
    for l in &mut model.layers {
        l.biases
            .iter_mut()
            .for_each(|b| *b = rng.random_range(-0.1..0.1));
    }
    let mut report = GradCheck::default();
    let batch: Batch = loop {
        let b: Batch = (0..4)
            .map(|_| {
                let x = random_features(&config, &mut rng);
                (
                    x,
                    [rng.random_range(-3.0..3.0), rng.random_range(-3.0..6.0)],
                )
            })
            .collect();
        if b.iter().all(|(x, _)| forward(&model, x).2 >= margin) {
            break b;
        }
        report.rejected_points += 1;
    };
    let patterns: Vec<Vec<bool>> = batch.iter().map(|(x, _)| forward(&model, x).1).collect();
    let refs: Vec<(&[f64], [f64; 2])> = batch.iter().map(|(x, y)| (x.as_slice(), *y)).collect();
    let (_, grads) = model.gradients(&refs).unwrap();

    let active_inputs: Vec<usize> = (0..config.input_size())
        .filter(|&i| batch.iter().any(|(x, _)| x[i] != 0.0))
        .collect();
    let n_layers = model.layers.len();
    let mut attempts = 0;
    while report.checked < n_params && attempts < 50 * n_params {
        attempts += 1;
        let layer = rng.random_range(0..n_layers);
        let outputs = model.layers[layer].outputs;
        let bias = rng.random_bool(0.25);
        let index = if bias {
            rng.random_range(0..outputs)
        } else if layer == 0 {
            active_inputs.choose(&mut rng).unwrap() * outputs + rng.random_range(0..outputs)
        } else {
            rng.random_range(0..model.layers[layer].weights.len())
        };
        let p = Param { layer, bias, index };
        let base = *slot(&mut model, p);
        let mut probe = |v: f64| {
            *slot(&mut model, p) = v;
            let same = batch
                .iter()
                .zip(&patterns)
                .all(|((x, _), pat)| &forward(&model, x).1 == pat);
            (loss(&model, &batch), same)
        };
        let (up, same_up) = probe(base + h);
        let (down, same_down) = probe(base - h);
        *slot(&mut model, p) = base;
        if !(same_up && same_down) {
            continue;
        }
        let numeric = (up - down) / (2.0 * h);
        let err = rel_error(grad_of(&grads, p), numeric);
        report.max_rel_error = report.max_rel_error.max(err);
        report.checked += 1;
    }
    report
}
