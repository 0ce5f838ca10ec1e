use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurize::FeatureConfig;

/// How targets are mapped before training and mapped back at prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputTransform {
    Raw,
    /// `ln(max(y, log_epsilon))`.
    Log,
}

impl OutputTransform {
    pub fn apply(self, y: f64, log_epsilon: f64) -> f64 {
        match self {
            OutputTransform::Raw => y,
            OutputTransform::Log => y.max(log_epsilon).ln(),
        }
    }

    pub fn invert(self, z: f64) -> f64 {
        match self {
            OutputTransform::Raw => z,
            OutputTransform::Log => z.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model_id: u8,
    pub hidden_layers: Vec<usize>,
    pub features: FeatureConfig,
    pub output_transform: OutputTransform,
    pub log_epsilon: f64,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

/// Ids of the built-in architecture/input/output combinations.
pub const MODEL_IDS: [u8; 5] = [1, 2, 3, 4, 5];

impl ModelConfig {
    /// Built-in configuration `id` (1-5) with a window of side `m`.
    ///
    /// | id | hidden     | door distance | output |
    /// |----|------------|---------------|--------|
    /// | 1  | 128        | no            | raw    |
    /// | 2  | 128        | no            | log    |
    /// | 3  | 256        | no            | log    |
    /// | 4  | 128        | yes           | log    |
    /// | 5  | 256, 256   | yes           | log    |
    pub fn preset(id: u8, m: usize) -> Result<Self> {
        let (hidden, distance, transform) = match id {
            1 => (vec![128], false, OutputTransform::Raw),
            2 => (vec![128], false, OutputTransform::Log),
            3 => (vec![256], false, OutputTransform::Log),
            4 => (vec![128], true, OutputTransform::Log),
            5 => (vec![256, 256], true, OutputTransform::Log),
            _ => {
                return Err(Error::Unknown {
                    kind: "model id",
                    name: id.to_string(),
                })
            }
        };
        Ok(ModelConfig {
            model_id: id,
            hidden_layers: hidden,
            features: FeatureConfig {
                m,
                include_door_distance: distance,
                normalize_distance: false,
            },
            output_transform: transform,
            log_epsilon: 1e-3,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            batch_size: 32,
            epochs: 200,
            seed: 0,
        })
    }

    pub fn input_size(&self) -> usize {
        self.features.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        let bad = |m: &str| Err(Error::InvalidConfig(format!("model: {m}")));
        if self.hidden_layers.contains(&0) {
            return bad("hidden widths must be positive");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be > 0");
        }
        if !(self.log_epsilon > 0.0) {
            return bad("log_epsilon must be > 0");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be > 0");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("Adam betas must be in [0, 1)");
        }
        Ok(())
    }

    pub fn transform_targets(&self, y: [f64; 2]) -> [f64; 2] {
        y.map(|v| self.output_transform.apply(v, self.log_epsilon))
    }

    pub fn invert_outputs(&self, z: [f64; 2]) -> [f64; 2] {
        z.map(|v| self.output_transform.invert(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_table() {
        let sizes: Vec<_> = MODEL_IDS
            .iter()
            .map(|&id| {
                let c = ModelConfig::preset(id, 9).unwrap();
                (c.hidden_layers.clone(), c.input_size(), c.output_transform)
            })
            .collect();
        use OutputTransform::*;
        assert_eq!(
            sizes,
            vec![
                (vec![128], 405, Raw),
                (vec![128], 405, Log),
                (vec![256], 405, Log),
                (vec![128], 406, Log),
                (vec![256, 256], 406, Log),
            ]
        );
        assert!(ModelConfig::preset(6, 9).is_err());
    }

    #[test]
    fn models_one_and_two_differ_only_in_output() {
        let a = ModelConfig::preset(1, 9).unwrap();
        let b = ModelConfig::preset(2, 9).unwrap();
        assert_eq!(a.hidden_layers, b.hidden_layers);
        assert_eq!(a.features, b.features);
        assert_ne!(a.output_transform, b.output_transform);
    }

    #[test]
    fn log_floor() {
        assert_eq!(OutputTransform::Log.apply(0.0, 1e-3), 1e-3f64.ln());
        assert_eq!(OutputTransform::Log.invert(0.0), 1.0);
        assert_eq!(OutputTransform::Raw.apply(-2.0, 1e-3), -2.0);
    }
}
