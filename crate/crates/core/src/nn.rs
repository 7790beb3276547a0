//! Dense feed-forward network (the black-box predictor) with analytic backprop.
//!
//! Parameters are flattened layer-major; within a layer the weight matrix comes first
//! (row-major, shape `out × in`) followed by the bias. Every [`GradientVector`] uses the
//! same order, so gradients of different losses can be added elementwise.

use std::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::linalg::{all_finite, dot, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
    Sigmoid,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
            Activation::Sigmoid => sigmoid(z),
        }
    }

    /// Derivative expressed through the activation's output `a`.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    RegressionScalar,
    BinaryProbability,
}

impl OutputKind {
    pub fn final_activation(self) -> Activation {
        match self {
            OutputKind::RegressionScalar => Activation::Identity,
            OutputKind::BinaryProbability => Activation::Sigmoid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// `out × in`
    pub weight: DenseMatrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    #[inline]
    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    #[inline]
    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    fn param_count(&self) -> usize {
        self.weight.rows() * self.weight.cols() + self.bias.len()
    }
}

/// Per-parameter gradient in canonical flattening order.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVector(Vec<f64>);

impl GradientVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for GradientVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for GradientVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    layers: Vec<DenseLayer>,
    output_kind: OutputKind,
}

/// Post-activation outputs of every layer for one batch, kept for backprop.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `activations[0]` is the input batch; `activations[k + 1]` is layer `k`'s output.
    activations: Vec<DenseMatrix>,
}

impl ForwardCache {
    /// Network outputs for the batch, one per row.
    pub fn outputs(&self) -> &[f64] {
        self.activations
            .last()
            .expect("cache holds the input")
            .data()
    }
}

impl MlpModel {
    pub fn new(layers: Vec<DenseLayer>, output_kind: OutputKind) -> Result<Self> {
        let last = layers
            .last()
            .ok_or_else(|| Error::Invalid("an MLP needs at least one layer".into()))?;
        ensure_len("MlpModel output dim", 1, last.out_dim())?;
        if last.activation != output_kind.final_activation() {
            return Err(Error::Invalid(format!(
                "{output_kind:?} requires a final {:?} activation",
                output_kind.final_activation()
            )));
        }
        for pair in layers.windows(2) {
            ensure_len(
                "MlpModel layer chaining",
                pair[0].out_dim(),
                pair[1].in_dim(),
            )?;
        }
        for layer in &layers {
            ensure_len("MlpModel bias", layer.out_dim(), layer.bias.len())?;
            if !all_finite(layer.weight.data()) || !all_finite(&layer.bias) {
                return Err(Error::NonFinite("MLP parameters"));
            }
        }
        Ok(Self {
            layers,
            output_kind,
        })
    }

    /// Glorot-uniform weights, zero biases, ReLU hidden layers.
    pub fn init<R: Rng + ?Sized>(
        input_dim: usize,
        hidden: &[usize],
        output_kind: OutputKind,
        rng: &mut R,
    ) -> Self {
        let mut dims = Vec::with_capacity(hidden.len() + 2);
        dims.push(input_dim);
        dims.extend_from_slice(hidden);
        dims.push(1);
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let data = (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-limit..=limit))
                    .collect();
                let activation = if k + 2 == dims.len() {
                    output_kind.final_activation()
                } else {
                    Activation::Relu
                };
                DenseLayer {
                    weight: DenseMatrix::new(fan_out, fan_in, data).expect("finite init"),
                    bias: vec![0.0; fan_out],
                    activation,
                }
            })
            .collect();
        Self {
            layers,
            output_kind,
        }
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn output_kind(&self) -> OutputKind {
        self.output_kind
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    /// Hidden layer widths, input and output excluded.
    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(DenseLayer::out_dim)
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        ensure_len("mlp_forward input", self.input_dim(), x.len())?;
        let mut current = x.to_vec();
        for layer in &self.layers {
            current = layer
                .weight
                .iter_rows()
                .zip(&layer.bias)
                .map(|(w, b)| layer.activation.apply(dot(w, &current) + b))
                .collect();
        }
        Ok(current[0])
    }

    pub fn forward_batch(&self, batch: &DenseMatrix) -> Result<Vec<f64>> {
        Ok(self
            .forward_cached(batch)?
            .activations
            .pop()
            .unwrap()
            .into_data())
    }

    pub fn forward_cached(&self, batch: &DenseMatrix) -> Result<ForwardCache> {
        ensure_len("mlp_forward batch cols", self.input_dim(), batch.cols())?;
        let n = batch.rows();
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(batch.clone());
        for layer in &self.layers {
            let input = activations.last().unwrap();
            let mut out = DenseMatrix::zeros(n, layer.out_dim());
            for r in 0..n {
                let a = input.row(r);
                let o = out.row_mut(r);
                for ((slot, w), b) in o.iter_mut().zip(layer.weight.iter_rows()).zip(&layer.bias) {
                    *slot = layer.activation.apply(dot(w, a) + b);
                }
            }
            activations.push(out);
        }
        Ok(ForwardCache { activations })
    }

    /// Accumulates `Σ_i upstream[i] · ∇θ f(x_i)` over the cached batch.
    ///
    /// Feeding the derivative of a batch-mean loss as `upstream` yields the
    /// gradient of that batch-mean loss.
    pub fn backward_cached(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
    ) -> Result<GradientVector> {
        let n = cache.activations[0].rows();
        ensure_len("mlp_backward upstream", n, upstream.len())?;
        let mut grad = vec![0.0; self.param_count()];
        let mut offset = grad.len();

        // delta = ∂L/∂z for the current layer, batch × out.
        let last = self.layers.len() - 1;
        let out_act = &cache.activations[last + 1];
        let mut delta: Vec<f64> = upstream
            .iter()
            .zip(out_act.data())
            .map(|(u, a)| u * self.layers[last].activation.derivative_from_output(*a))
            .collect();

        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let (in_dim, out_dim) = (layer.in_dim(), layer.out_dim());
            let input = &cache.activations[k];
            offset -= layer.param_count();
            let (gw, gb) =
                grad[offset..offset + layer.param_count()].split_at_mut(in_dim * out_dim);
            for r in 0..n {
                let a = input.row(r);
                let d = &delta[r * out_dim..(r + 1) * out_dim];
                for (o, &dv) in d.iter().enumerate() {
                    if dv == 0.0 {
                        continue;
                    }
                    gb[o] += dv;
                    for (g, &ai) in gw[o * in_dim..(o + 1) * in_dim].iter_mut().zip(a) {
                        *g += dv * ai;
                    }
                }
            }
            if k == 0 {
                break;
            }
            let prev_act = self.layers[k - 1].activation;
            let mut next = vec![0.0; n * in_dim];
            for r in 0..n {
                let d = &delta[r * out_dim..(r + 1) * out_dim];
                let slot = &mut next[r * in_dim..(r + 1) * in_dim];
                for (o, &dv) in d.iter().enumerate() {
                    if dv == 0.0 {
                        continue;
                    }
                    for (s, &w) in slot.iter_mut().zip(layer.weight.row(o)) {
                        *s += dv * w;
                    }
                }
                for (s, &a) in slot.iter_mut().zip(input.row(r)) {
                    *s *= prev_act.derivative_from_output(a);
                }
            }
            delta = next;
        }
        Ok(GradientVector(grad))
    }

    pub fn backward(&self, batch: &DenseMatrix, upstream: &[f64]) -> Result<GradientVector> {
        ensure_len("mlp_backward upstream", batch.rows(), upstream.len())?;
        let cache = self.forward_cached(batch)?;
        self.backward_cached(&cache, upstream)
    }

    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(layer.weight.data());
            out.extend_from_slice(&layer.bias);
        }
        out
    }

    /// Overwrites all parameters from a canonical-order vector.
    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        ensure_len("unflatten_params", self.param_count(), params.len())?;
        let mut offset = 0;
        for layer in &mut self.layers {
            let nw = layer.weight.data().len();
            layer
                .weight
                .data_mut()
                .copy_from_slice(&params[offset..offset + nw]);
            offset += nw;
            let nb = layer.bias.len();
            layer.bias.copy_from_slice(&params[offset..offset + nb]);
            offset += nb;
        }
        Ok(())
    }

    pub fn unflatten_params(&self, params: &[f64]) -> Result<Self> {
        let mut out = self.clone();
        out.set_params(params)?;
        Ok(out)
    }
}
