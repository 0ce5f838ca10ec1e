use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::ModelConfig;

pub const OUTPUTS: usize = 2;

/// Fully connected layer. Weights are stored input-major: `w[i * outputs + o]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn glorot<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        Dense {
            inputs,
            outputs,
            weights: (0..inputs * outputs)
                .map(|_| rng.random_range(-limit..=limit))
                .collect(),
            biases: vec![0.0; outputs],
        }
    }

    #[inline]
    pub fn weight(&self, i: usize, o: usize) -> f64 {
        self.weights[i * self.outputs + o]
    }

    fn affine(&self, x: &[f64], z: &mut Vec<f64>) {
        z.clear();
        z.extend_from_slice(&self.biases);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &self.weights[i * self.outputs..(i + 1) * self.outputs];
            for (zo, &w) in z.iter_mut().zip(row) {
                *zo += xi * w;
            }
        }
    }

    pub fn num_params(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Rectified-linear hidden layers and a linear 2-unit head `(tau, p_tot)`,
/// both in the model's transformed target space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub config: ModelConfig,
    pub layers: Vec<Dense>,
}

/// Per-layer gradients with the same shapes as the model.
pub type Gradients = Vec<Dense>;

impl MlpModel {
    /// Glorot-uniform weights and zero biases, seeded from `config.seed`.
    pub fn init(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut sizes = vec![config.input_size()];
        sizes.extend(&config.hidden_layers);
        sizes.push(OUTPUTS);
        let layers = sizes
            .windows(2)
            .map(|w| Dense::glorot(w[0], w[1], &mut rng))
            .collect();
        Ok(MlpModel {
            config: config.clone(),
            layers,
        })
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(Dense::num_params).sum()
    }

    pub fn check_dimensions(&self) -> Result<()> {
        let mut expected = self.config.input_size();
        let widths = self
            .config
            .hidden_layers
            .iter()
            .copied()
            .chain(std::iter::once(OUTPUTS));
        if self.layers.len() != self.config.hidden_layers.len() + 1 {
            return Err(Error::ModelFormat(format!(
                "expected {} layers, found {}",
                self.config.hidden_layers.len() + 1,
                self.layers.len()
            )));
        }
        for (layer, width) in self.layers.iter().zip(widths) {
            if layer.inputs != expected
                || layer.outputs != width
                || layer.weights.len() != layer.inputs * layer.outputs
                || layer.biases.len() != layer.outputs
            {
                return Err(Error::ModelFormat(format!(
                    "layer shape {}x{} does not match the {expected}->{width} chain",
                    layer.inputs, layer.outputs
                )));
            }
            expected = width;
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_size() {
            return Err(Error::Dimension {
                expected: self.input_size(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Pre-activations of every layer for one input.
    fn pre_activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let mut act = x.to_vec();
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(layer.outputs);
            layer.affine(&act, &mut z);
            if k + 1 < self.layers.len() {
                act = z.iter().map(|&v| v.max(0.0)).collect();
            }
            zs.push(z);
        }
        zs
    }

    /// Output in transformed space.
    pub fn forward(&self, x: &[f64]) -> Result<[f64; 2]> {
        self.check_input(x)?;
        let zs = self.pre_activations(x);
        let out = zs.last().expect("at least one layer");
        Ok([out[0], out[1]])
    }

    /// Hidden-layer pre-activations, for locating rectifier kinks.
    pub fn hidden_pre_activations(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut zs = self.pre_activations(x);
        zs.pop();
        Ok(zs.into_iter().flatten().collect())
    }

    /// Batch MSE `1/(2B) sum_b sum_k (out_bk - y_bk)^2` in transformed space,
    /// and its exact gradient.
    pub fn gradients(&self, batch: &[(&[f64], [f64; 2])]) -> Result<(f64, Gradients)> {
        let mut grads: Gradients = self
            .layers
            .iter()
            .map(|l| Dense::zeros(l.inputs, l.outputs))
            .collect();
        if batch.is_empty() {
            return Ok((0.0, grads));
        }
        let scale = 1.0 / (batch.len() * OUTPUTS) as f64;
        let mut loss = 0.0;
        let n_layers = self.layers.len();
        for &(x, y) in batch {
            self.check_input(x)?;
            let zs = self.pre_activations(x);
            let out = &zs[n_layers - 1];
            let mut delta: Vec<f64> = (0..OUTPUTS)
                .map(|k| {
                    let e = out[k] - y[k];
                    loss += e * e;
                    2.0 * e * scale
                })
                .collect();
            for k in (0..n_layers).rev() {
                let layer = &self.layers[k];
                let g = &mut grads[k];
                let input_act: std::borrow::Cow<'_, [f64]> = if k == 0 {
                    std::borrow::Cow::Borrowed(x)
                } else {
                    std::borrow::Cow::Owned(zs[k - 1].iter().map(|&v| v.max(0.0)).collect())
                };
                for (b, d) in g.biases.iter_mut().zip(&delta) {
                    *b += d;
                }
                for (i, &a) in input_act.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    let row = &mut g.weights[i * layer.outputs..(i + 1) * layer.outputs];
                    for (w, d) in row.iter_mut().zip(&delta) {
                        *w += a * d;
                    }
                }
                if k == 0 {
                    break;
                }
                let prev_z = &zs[k - 1];
                delta = (0..layer.inputs)
                    .map(|i| {
                        if prev_z[i] <= 0.0 {
                            return 0.0;
                        }
                        let row = &layer.weights[i * layer.outputs..(i + 1) * layer.outputs];
                        row.iter().zip(&delta).map(|(w, d)| w * d).sum()
                    })
                    .collect();
            }
        }
        Ok((loss * scale, grads))
    }
}
