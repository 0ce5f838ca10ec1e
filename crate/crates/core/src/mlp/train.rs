use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds::derive_seed;

use super::config::ModelConfig;
use super::network::{Gradients, MlpModel};

/// One training row: features and physical targets `(tau kW, p_tot kWh)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub targets: [f64; 2],
}

/// Adam state for every parameter of a model.
pub struct Adam {
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    lr: f64,
    step: i32,
    m: Gradients,
    v: Gradients,
}

impl Adam {
    pub fn new(model: &MlpModel, lr: f64) -> Self {
        let zeros = || -> Gradients {
            model
                .layers
                .iter()
                .map(|l| super::network::Dense::zeros(l.inputs, l.outputs))
                .collect()
        };
        Adam {
            beta1: model.config.adam_beta1,
            beta2: model.config.adam_beta2,
            epsilon: model.config.adam_epsilon,
            lr,
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn step(&mut self, model: &mut MlpModel, grads: &Gradients) {
        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let lr = self.lr;
        let eps = self.epsilon;
        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        };
        for (k, layer) in model.layers.iter_mut().enumerate() {
            update(
                &mut layer.weights,
                &grads[k].weights,
                &mut self.m[k].weights,
                &mut self.v[k].weights,
            );
            update(
                &mut layer.biases,
                &grads[k].biases,
                &mut self.m[k].biases,
                &mut self.v[k].biases,
            );
        }
    }
}

/// Mean squared errors per target, `[tau, p_tot]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TargetMse {
    pub tau: f64,
    pub p_tot: f64,
}

impl TargetMse {
    pub fn mean(&self) -> f64 {
        (self.tau + self.p_tot) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train: TargetMse,
    pub validation: Option<TargetMse>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
}

impl History {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }

    /// One row per epoch; MSEs are in the model's transformed target space.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "epoch",
            "train_mse",
            "val_mse",
            "train_mse_tau",
            "train_mse_p_tot",
            "val_mse_tau",
            "val_mse_p_tot",
        ])?;
        for r in &self.epochs {
            let val = |f: fn(&TargetMse) -> f64| {
                r.validation
                    .as_ref()
                    .map_or(String::new(), |v| f(v).to_string())
            };
            wtr.write_record([
                r.epoch.to_string(),
                r.train.mean().to_string(),
                val(TargetMse::mean),
                r.train.tau.to_string(),
                r.train.p_tot.to_string(),
                val(|v| v.tau),
                val(|v| v.p_tot),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Errors in transformed space and in physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub transformed: TargetMse,
    pub physical: TargetMse,
    pub rows: usize,
}

fn check_rows(rows: &[Sample], width: usize) -> Result<()> {
    for (i, s) in rows.iter().enumerate() {
        if s.features.len() != width {
            return Err(Error::Dimension {
                expected: width,
                got: s.features.len(),
            });
        }
        if !s.features.iter().chain(&s.targets).all(|v| v.is_finite()) {
            return Err(Error::Training(format!("row {i} has non-finite values")));
        }
    }
    Ok(())
}

pub fn evaluate(model: &MlpModel, rows: &[Sample]) -> Result<Evaluation> {
    let cfg = &model.config;
    let mut t = [0.0; 2];
    let mut p = [0.0; 2];
    for s in rows {
        let out = model.forward(&s.features)?;
        let target = cfg.transform_targets(s.targets);
        let phys = cfg.invert_outputs(out);
        for k in 0..2 {
            t[k] += (out[k] - target[k]).powi(2);
            p[k] += (phys[k] - s.targets[k]).powi(2);
        }
    }
    let n = rows.len().max(1) as f64;
    Ok(Evaluation {
        transformed: TargetMse {
            tau: t[0] / n,
            p_tot: t[1] / n,
        },
        physical: TargetMse {
            tau: p[0] / n,
            p_tot: p[1] / n,
        },
        rows: rows.len(),
    })
}

/// Mini-batch Adam on MSE in the configured target space.
///
/// Shuffling is seeded from `config.seed`, so training is reproducible.
/// Each epoch records the full-set MSE on `train` and, if given, `validation`.
pub fn train(
    train: &[Sample],
    validation: Option<&[Sample]>,
    config: &ModelConfig,
) -> Result<(MlpModel, History)> {
    if train.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let mut model = MlpModel::init(config)?;
    check_rows(train, model.input_size())?;
    if let Some(v) = validation {
        check_rows(v, model.input_size())?;
    }
    let targets: Vec<[f64; 2]> = train
        .iter()
        .map(|s| config.transform_targets(s.targets))
        .collect();
    let mut adam = Adam::new(&model, config.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "shuffle", 0));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = History::default();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<(&[f64], [f64; 2])> = chunk
                .iter()
                .map(|&i| (train[i].features.as_slice(), targets[i]))
                .collect();
            let (_, grads) = model.gradients(&batch)?;
            adam.step(&mut model, &grads);
        }
        let train_eval = evaluate(&model, train)?;
        if !train_eval.transformed.mean().is_finite() {
            return Err(Error::Training(format!("loss diverged at epoch {epoch}")));
        }
        let validation = validation
            .map(|v| evaluate(&model, v).map(|e| e.transformed))
            .transpose()?;
        history.epochs.push(EpochRecord {
            epoch,
            train: train_eval.transformed,
            validation,
        });
    }
    Ok((model, history))
}
