//! Feed-forward classifier: tanh hidden layers, linear output, softmax head.
//!
//! Weights are stored `(fan_in, fan_out)` so a batch `X` (rows are examples) maps
//! to `X · W + b`. Forward and backward are written out by hand; the
//! [`gradcheck`] module verifies them against central differences.

mod document;
pub mod gradcheck;

pub use document::{load_model, save_model, ModelDocument};
pub use gradcheck::{grad_check, GradCheckConfig, GradCheckReport};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result, ScoreMatrix};

/// Weight matrix and bias vector of one dense layer. Also used for gradients and
/// optimizer moments, which share the parameter shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Layer {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self { weights: Array2::zeros((fan_in, fan_out)), bias: Array1::zeros(fan_out) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layer_sizes: Vec<usize>,
    seed: u64,
    layers: Vec<Layer>,
}

/// Parameter gradients, shaped like [`MlpParams::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

fn check_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(Error::InvalidArgument("an MLP needs at least an input and an output size".into()));
    }
    if let Some(k) = layer_sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidArgument(format!("layer {k} has size zero")));
    }
    Ok(())
}

impl MlpParams {
    /// Glorot-uniform weights, zero biases, fully determined by `seed`.
    pub fn init(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        check_sizes(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = layer_sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                Layer {
                    weights: Array2::from_shape_simple_fn((fan_in, fan_out), || {
                        rng.random_range(-limit..=limit)
                    }),
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Self { layer_sizes: layer_sizes.to_vec(), seed, layers })
    }

    /// Builds parameters from explicit layers, checking shapes and finiteness.
    pub fn from_layers(layer_sizes: &[usize], seed: u64, layers: Vec<Layer>) -> Result<Self> {
        check_sizes(layer_sizes)?;
        if layers.len() != layer_sizes.len() - 1 {
            return Err(Error::Shape(format!(
                "{} layers for {} layer sizes",
                layers.len(),
                layer_sizes.len()
            )));
        }
        for (k, (layer, w)) in layers.iter().zip(layer_sizes.windows(2)).enumerate() {
            if layer.weights.dim() != (w[0], w[1]) || layer.bias.len() != w[1] {
                return Err(Error::Shape(format!("layer {k} does not match sizes {w:?}")));
            }
            if layer.weights.iter().chain(&layer.bias).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("layer {k} parameters")));
            }
        }
        Ok(Self { layer_sizes: layer_sizes.to_vec(), seed, layers })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_classes(&self) -> usize {
        *self.layer_sizes.last().expect("at least two sizes")
    }

    /// Seed the parameters were initialised from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters as one vector: per layer, weights row-major then biases.
    pub fn flatten(&self) -> Vec<f64> {
        flatten_layers(&self.layers)
    }

    /// Copy of `self` with parameters taken from a vector laid out as [`Self::flatten`].
    pub fn with_flat(&self, flat: &[f64]) -> Result<Self> {
        if flat.len() != self.n_params() {
            return Err(Error::Shape(format!("{} values for {} parameters", flat.len(), self.n_params())));
        }
        let mut out = self.clone();
        let mut it = flat.iter().copied();
        for layer in &mut out.layers {
            layer.weights.iter_mut().chain(layer.bias.iter_mut()).for_each(|v| {
                *v = it.next().expect("length checked");
            });
        }
        Ok(out)
    }
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        flatten_layers(&self.layers)
    }
}

fn flatten_layers(layers: &[Layer]) -> Vec<f64> {
    layers.iter().flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied()).collect()
}

pub(crate) fn zeros_like(params: &MlpParams) -> Vec<Layer> {
    params.layer_sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect()
}

/// Everything `backward` needs from one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub inputs: Array2<f64>,
    /// Post-tanh activations of each hidden layer.
    pub hidden: Vec<Array2<f64>>,
    pub logits: Array2<f64>,
    pub scores: ScoreMatrix,
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(logits: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = logits.to_owned();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let z = row.sum();
        row.mapv_inplace(|v| v / z);
    }
    out
}

pub fn forward(params: &MlpParams, batch: ArrayView2<'_, f64>) -> Result<ForwardCache> {
    if batch.ncols() != params.input_size() {
        return Err(Error::Shape(format!(
            "batch has {} features, model expects {}",
            batch.ncols(),
            params.input_size()
        )));
    }
    if batch.nrows() == 0 {
        return Err(Error::Shape("empty batch".into()));
    }
    let (last, hidden_layers) = params.layers.split_last().expect("at least one layer");
    let mut hidden = Vec::with_capacity(hidden_layers.len());
    let mut act = batch.to_owned();
    for layer in hidden_layers {
        let mut z = act.dot(&layer.weights);
        z += &layer.bias;
        z.mapv_inplace(f64::tanh);
        hidden.push(z.clone());
        act = z;
    }
    let mut logits = act.dot(&last.weights);
    logits += &last.bias;
    let scores = ScoreMatrix::new(softmax_rows(logits.view()))?;
    Ok(ForwardCache { inputs: batch.to_owned(), hidden, logits, scores })
}

/// Backpropagates a gradient with respect to the softmax scores.
pub fn backward(
    params: &MlpParams,
    cache: &ForwardCache,
    grad_scores: ArrayView2<'_, f64>,
) -> Result<Gradients> {
    let s = cache.scores.view();
    if grad_scores.dim() != s.dim() {
        return Err(Error::Shape(format!("score gradient {:?} vs scores {:?}", grad_scores.dim(), s.dim())));
    }
    // ∂L/∂z_k = s_k (g_k − Σ_m g_m s_m)
    let inner = (&grad_scores * &s).sum_axis(Axis(1)).insert_axis(Axis(1));
    let grad_logits = &s * &(&grad_scores - &inner);
    backward_logits(params, cache, grad_logits.view())
}

/// Backpropagates a gradient with respect to the logits.
pub fn backward_logits(
    params: &MlpParams,
    cache: &ForwardCache,
    grad_logits: ArrayView2<'_, f64>,
) -> Result<Gradients> {
    if grad_logits.dim() != cache.logits.dim() {
        return Err(Error::Shape(format!(
            "logit gradient {:?} vs logits {:?}",
            grad_logits.dim(),
            cache.logits.dim()
        )));
    }
    let n_layers = params.layers.len();
    let mut grads: Vec<Layer> = Vec::with_capacity(n_layers);
    let mut delta = grad_logits.to_owned();
    for l in (0..n_layers).rev() {
        let input = if l == 0 { &cache.inputs } else { &cache.hidden[l - 1] };
        grads.push(Layer { weights: input.t().dot(&delta), bias: delta.sum_axis(Axis(0)) });
        if l > 0 {
            let back = delta.dot(&params.layers[l].weights.t());
            delta = back * cache.hidden[l - 1].mapv(|a| 1.0 - a * a);
        }
    }
    grads.reverse();
    Ok(Gradients { layers: grads })
}

/// Softmax scores for `features`, row by row.
pub fn predict_scores(params: &MlpParams, features: ArrayView2<'_, f64>) -> Result<ScoreMatrix> {
    Ok(forward(params, features)?.scores)
}
