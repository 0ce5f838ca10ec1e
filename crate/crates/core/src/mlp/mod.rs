//! Feed-forward regressor from EVSE neighbourhood features to `(tau, p_tot)`.

mod config;
mod network;
mod train;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use config::{ModelConfig, OutputTransform, MODEL_IDS};
pub use network::{Dense, Gradients, MlpModel, OUTPUTS};
pub use train::{evaluate, train, Adam, EpochRecord, Evaluation, History, Sample, TargetMse};

use crate::error::{Error, Result};

const FORMAT_TAG: &str = "evsim-mlp";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    model: MlpModel,
}

/// Prediction in physical units: `(tau kW, p_tot kWh)`.
pub fn predict_stats(model: &MlpModel, features: &[f64]) -> Result<(f64, f64)> {
    let [tau, p_tot] = model.config.invert_outputs(model.forward(features)?);
    Ok((tau, p_tot))
}

pub fn model_to_json(model: &MlpModel) -> Result<String> {
    let file = ModelFile {
        format: FORMAT_TAG.into(),
        version: FORMAT_VERSION,
        model: model.clone(),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn model_from_json(text: &str) -> Result<MlpModel> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if file.format != FORMAT_TAG || file.version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported format {} v{}",
            file.format, file.version
        )));
    }
    file.model.config.validate()?;
    file.model.check_dimensions()?;
    Ok(file.model)
}

pub fn save_model(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel> {
    model_from_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_mode_zero_output_is_one() {
        let cfg = ModelConfig::preset(2, 1).unwrap();
        let mut model = MlpModel::init(&cfg).unwrap();
        for l in &mut model.layers {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        assert_eq!(predict_stats(&model, &[0.0; 5]).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn raw_mode_passes_through() {
        let cfg = ModelConfig::preset(1, 1).unwrap();
        let model = MlpModel::init(&cfg).unwrap();
        let x = [1.0, 0.0, 0.0, 0.0, 0.0];
        let raw = model.forward(&x).unwrap();
        assert_eq!(predict_stats(&model, &x).unwrap(), (raw[0], raw[1]));
    }

    #[test]
    fn save_load_round_trip() {
        let cfg = ModelConfig {
            seed: 5,
            ..ModelConfig::preset(4, 3).unwrap()
        };
        let model = MlpModel::init(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&model, &path).unwrap();
        let back = load_model(&path).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x: Vec<f64> = (0..model.input_size())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            assert_eq!(model.forward(&x).unwrap(), back.forward(&x).unwrap());
        }
    }

    #[test]
    fn truncated_file_fails() {
        let model = MlpModel::init(&ModelConfig::preset(2, 1).unwrap()).unwrap();
        let text = model_to_json(&model).unwrap();
        assert!(matches!(
            model_from_json(&text[..text.len() / 2]),
            Err(Error::ModelFormat(_))
        ));
    }

    #[test]
    fn shape_mismatch_fails() {
        let mut model = MlpModel::init(&ModelConfig::preset(2, 1).unwrap()).unwrap();
        model.layers[0].biases.pop();
        let text = model_to_json(&model).unwrap();
        assert!(model_from_json(&text).is_err());
    }
}
