use crate::model::{zeros_like, Gradients, Layer, MlpParams};
use crate::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Adam moment estimates for one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<Layer>,
    v: Vec<Layer>,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(params: &MlpParams) -> Self {
        Self {
            m: zeros_like(params),
            v: zeros_like(params),
            step: 0,
            beta1: BETA1,
            beta2: BETA2,
            epsilon: EPSILON,
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam update of `params` in place.
    ///
    /// Gradients are checked before anything is modified, so on error both the
    /// parameters and the state are unchanged.
    pub fn step(&mut self, params: &mut MlpParams, grads: &Gradients, lr: f64) -> Result<()> {
        if grads.layers.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "{} gradient layers for {} parameter layers",
                grads.layers.len(),
                self.m.len()
            )));
        }
        for (k, (g, m)) in grads.layers.iter().zip(&self.m).enumerate() {
            if g.weights.dim() != m.weights.dim() || g.bias.len() != m.bias.len() {
                return Err(Error::Shape(format!("gradient of layer {k} has the wrong shape")));
            }
            if g.weights.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("gradient of layer {k} weights")));
            }
            if g.bias.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("gradient of layer {k} bias")));
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        let layers = params.layers_mut();
        for (((p, g), m), v) in layers.iter_mut().zip(&grads.layers).zip(&mut self.m).zip(&mut self.v) {
            let tensors = [
                (
                    p.weights.as_slice_mut(),
                    g.weights.as_slice(),
                    m.weights.as_slice_mut(),
                    v.weights.as_slice_mut(),
                ),
                (p.bias.as_slice_mut(), g.bias.as_slice(), m.bias.as_slice_mut(), v.bias.as_slice_mut()),
            ];
            for (p, g, m, v) in tensors {
                let (p, g, m, v) = (
                    p.expect("standard layout"),
                    g.expect("standard layout"),
                    m.expect("standard layout"),
                    v.expect("standard layout"),
                );
                for i in 0..p.len() {
                    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                    let m_hat = m[i] / c1;
                    let v_hat = v[i] / c2;
                    p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
        Ok(())
    }
}
