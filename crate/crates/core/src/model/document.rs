//! JSON model document.
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so `save_model` followed by `load_model` reproduces every parameter
//! bit for bit.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Layer, MlpParams};
use crate::calibration::CalibratorParams;
use crate::data::NormalizationParams;
use crate::losses::LossKind;
use crate::{Error, Result};

pub const MODEL_FORMAT: &str = "mcauc-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LayerDoc {
    /// `fan_in` rows of `fan_out` values.
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Document {
    format: String,
    version: u32,
    activation: String,
    layer_sizes: Vec<usize>,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    loss: Option<LossKind>,
    layers: Vec<LayerDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    calibrator: Option<CalibratorParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normalization: Option<NormalizationParams>,
}

/// A trained classifier together with what is needed to score raw features.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDocument {
    pub params: MlpParams,
    pub loss: Option<LossKind>,
    pub calibrator: Option<CalibratorParams>,
    pub normalization: Option<NormalizationParams>,
}

impl ModelDocument {
    pub fn new(params: MlpParams) -> Self {
        Self { params, loss: None, calibrator: None, normalization: None }
    }

    pub fn to_json(&self) -> Result<String> {
        let p = &self.params;
        let doc = Document {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            activation: "tanh".into(),
            layer_sizes: p.layer_sizes().to_vec(),
            seed: p.seed(),
            loss: self.loss,
            layers: p
                .layers()
                .iter()
                .map(|l| LayerDoc {
                    weights: l.weights.rows().into_iter().map(|r| r.to_vec()).collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
            calibrator: self.calibrator.clone(),
            normalization: self.normalization.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT || doc.version != MODEL_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported model document {} v{}",
                doc.format, doc.version
            )));
        }
        if doc.activation != "tanh" {
            return Err(Error::InvalidArgument(format!("unsupported activation '{}'", doc.activation)));
        }
        let layers = doc
            .layers
            .into_iter()
            .enumerate()
            .map(|(k, l)| {
                let rows = l.weights.len();
                let cols = l.weights.first().map_or(0, Vec::len);
                if l.weights.iter().any(|r| r.len() != cols) {
                    return Err(Error::Shape(format!("layer {k} has ragged weight rows")));
                }
                let flat: Vec<f64> = l.weights.into_iter().flatten().collect();
                Ok(Layer {
                    weights: Array2::from_shape_vec((rows, cols), flat)
                        .map_err(|e| Error::Shape(e.to_string()))?,
                    bias: Array1::from(l.bias),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let params = MlpParams::from_layers(&doc.layer_sizes, doc.seed, layers)?;
        if let Some(cal) = &doc.calibrator {
            cal.check_classes(params.n_classes())?;
        }
        Ok(Self { params, loss: doc.loss, calibrator: doc.calibrator, normalization: doc.normalization })
    }
}

pub fn save_model(model: &ModelDocument, path: &Path) -> Result<()> {
    fs::write(path, model.to_json()? + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelDocument> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ModelDocument::from_json(&text)
}
