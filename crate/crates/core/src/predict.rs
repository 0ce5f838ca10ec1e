//! Per-EVSE predictions for a whole layout, shared by the CLI and the service.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::featurize::extract_all;
use crate::layout::Layout;
use crate::mlp::{predict_stats, MlpModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictRequest {
    /// Row strings in the layout-file alphabet.
    pub grid: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvsePrediction {
    pub row: usize,
    pub col: usize,
    pub tau_kw: f64,
    pub p_tot_kwh: f64,
    pub reachable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub model_id: u8,
    pub m: usize,
    pub evses: Vec<EvsePrediction>,
}

/// Predicts every EVSE of `layout` in row-major order.
pub fn predict_layout(model: &MlpModel, layout: &Layout) -> Result<PredictResponse> {
    let reachable = layout.reachable_evses();
    let evses = extract_all(layout, &model.config.features)?
        .into_iter()
        .map(|((row, col), features)| {
            let (tau_kw, p_tot_kwh) = predict_stats(model, &features)?;
            Ok(EvsePrediction {
                row,
                col,
                tau_kw,
                p_tot_kwh,
                reachable: reachable.contains(&(row, col)),
            })
        })
        .collect::<Result<_>>()?;
    Ok(PredictResponse {
        model_id: model.config.model_id,
        m: model.config.features.m,
        evses,
    })
}
