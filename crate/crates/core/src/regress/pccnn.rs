//! From-scratch 1D convolutional regressor.
//!
//! The model maps a standardized quadrature window to a scalar g²(0). Layers
//! are plain loops over `f32` parameters with all arithmetic in `f64`;
//! parameters stay `f32` so a checkpoint round-trip reproduces predictions
//! bit for bit.
//!
//! The default stack is seven layers:
//! conv(16 taps, 8 filters, stride 4) → ReLU → avg-pool(4) →
//! conv(8 taps, 16 filters, stride 2) → ReLU → avg-pool(4) → dense(→1).
//! The strided convolutions and pools reduce a 5000-sample window to a short
//! feature map whose average the dense layer reads out, i.e. the network
//! learns an averaged local statistic of the window.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::RegressError;

/// One layer of the regressor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv1d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
    },
    Relu,
    AvgPool {
        width: usize,
    },
    Dense {
        inputs: usize,
        outputs: usize,
    },
}

impl LayerSpec {
    fn param_count(&self) -> usize {
        match *self {
            LayerSpec::Conv1d {
                in_channels,
                out_channels,
                kernel,
                ..
            } => out_channels * in_channels * kernel + out_channels,
            LayerSpec::Dense { inputs, outputs } => outputs * inputs + outputs,
            _ => 0,
        }
    }

    /// (fan_in, fan_out) for weight initialization.
    fn fans(&self) -> Option<(usize, usize)> {
        match *self {
            LayerSpec::Conv1d {
                in_channels,
                out_channels,
                kernel,
                ..
            } => Some((in_channels * kernel, out_channels * kernel)),
            LayerSpec::Dense { inputs, outputs } => Some((inputs, outputs)),
            _ => None,
        }
    }
}

/// (channels, length) of an activation buffer.
type Shape = (usize, usize);

/// The regressor: layer stack plus a flat `f32` parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PccnnModel {
    input_len: usize,
    layers: Vec<LayerSpec>,
    shapes: Vec<Shape>,
    layout: Vec<std::ops::Range<usize>>,
    params: Vec<f32>,
}

/// The seven-layer default stack for a given window length.
pub fn default_architecture(input_len: usize) -> Vec<LayerSpec> {
    let _ = input_len;
    vec![
        LayerSpec::Conv1d {
            in_channels: 1,
            out_channels: 8,
            kernel: 16,
            stride: 4,
        },
        LayerSpec::Relu,
        LayerSpec::AvgPool { width: 4 },
        LayerSpec::Conv1d {
            in_channels: 8,
            out_channels: 16,
            kernel: 8,
            stride: 2,
        },
        LayerSpec::Relu,
        LayerSpec::AvgPool { width: 4 },
        // Placeholder; `PccnnModel::with_default_architecture` fixes the
        // dense input to the flattened feature-map size.
        LayerSpec::Dense {
            inputs: 0,
            outputs: 1,
        },
    ]
}

impl PccnnModel {
    /// Builds a model, validating that the layer stack is shape-consistent
    /// and ends in a single scalar. Parameters start at zero.
    pub fn new(input_len: usize, layers: Vec<LayerSpec>) -> Result<Self, RegressError> {
        if input_len == 0 {
            return Err(RegressError::InvalidArchitecture(
                "input length must be positive".into(),
            ));
        }
        let mut shapes = Vec::with_capacity(layers.len() + 1);
        let mut shape: Shape = (1, input_len);
        shapes.push(shape);
        for (i, layer) in layers.iter().enumerate() {
            shape = propagate_shape(shape, layer).map_err(|msg| {
                RegressError::InvalidArchitecture(format!("layer {i}: {msg}"))
            })?;
            shapes.push(shape);
        }
        let (ch, len) = shape;
        if ch * len != 1 {
            return Err(RegressError::InvalidArchitecture(format!(
                "network must end in a single scalar, got {ch}x{len}"
            )));
        }
        let mut layout = Vec::with_capacity(layers.len());
        let mut offset = 0;
        for layer in &layers {
            let count = layer.param_count();
            layout.push(offset..offset + count);
            offset += count;
        }
        Ok(Self {
            input_len,
            layers,
            shapes,
            layout,
            params: vec![0.0; offset],
        })
    }

    /// The default seven-layer model for `input_len`-sample windows, with the
    /// dense read-out sized to the flattened feature map.
    pub fn with_default_architecture(input_len: usize) -> Result<Self, RegressError> {
        let mut layers = default_architecture(input_len);
        // Resolve the dense input size by propagating shapes through the
        // convolutional part.
        let mut shape: Shape = (1, input_len);
        for layer in &layers[..layers.len() - 1] {
            shape = propagate_shape(shape, layer)
                .map_err(RegressError::InvalidArchitecture)?;
        }
        if let Some(LayerSpec::Dense { inputs, .. }) = layers.last_mut() {
            *inputs = shape.0 * shape.1;
        }
        Self::new(input_len, layers)
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn parameters(&self) -> &[f32] {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut [f32] {
        &mut self.params
    }

    /// Per-layer offset ranges into the flat parameter vector.
    pub fn param_layout(&self) -> &[std::ops::Range<usize>] {
        &self.layout
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn set_parameters(&mut self, params: &[f32]) -> Result<(), RegressError> {
        if params.len() != self.params.len() {
            return Err(RegressError::LengthMismatch {
                a: params.len(),
                b: self.params.len(),
            });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    /// Seed-deterministic symmetric initialization: weights uniform in
    /// ±√(6/(fan_in+fan_out)), biases zero.
    pub fn init_parameters(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (layer, range) in self.layers.iter().zip(self.layout.clone()) {
            let Some((fan_in, fan_out)) = layer.fans() else {
                continue;
            };
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weight_count = range.len()
                - match *layer {
                    LayerSpec::Conv1d { out_channels, .. } => out_channels,
                    LayerSpec::Dense { outputs, .. } => outputs,
                    _ => 0,
                };
            for i in 0..range.len() {
                self.params[range.start + i] = if i < weight_count {
                    (rng.random::<f64>() * 2.0 - 1.0) as f32 * bound as f32
                } else {
                    0.0
                };
            }
        }
    }
}

fn propagate_shape(shape: Shape, layer: &LayerSpec) -> Result<Shape, String> {
    let (ch, len) = shape;
    match *layer {
        LayerSpec::Conv1d {
            in_channels,
            out_channels,
            kernel,
            stride,
        } => {
            if in_channels != ch {
                return Err(format!("expects {in_channels} channels, input has {ch}"));
            }
            if kernel == 0 || stride == 0 || out_channels == 0 {
                return Err("kernel, stride, and filter count must be positive".into());
            }
            if len < kernel {
                return Err(format!("kernel {kernel} longer than input {len}"));
            }
            Ok((out_channels, (len - kernel) / stride + 1))
        }
        LayerSpec::Relu => Ok(shape),
        LayerSpec::AvgPool { width } => {
            if width == 0 {
                return Err("pool width must be positive".into());
            }
            if len / width == 0 {
                return Err(format!("pool width {width} longer than input {len}"));
            }
            Ok((ch, len / width))
        }
        LayerSpec::Dense { inputs, outputs } => {
            if inputs != ch * len {
                return Err(format!(
                    "dense expects {inputs} inputs, feature map is {ch}x{len}"
                ));
            }
            if outputs == 0 {
                return Err("dense output width must be positive".into());
            }
            Ok((1, outputs))
        }
    }
}

/// Deterministic scalar prediction for a standardized window. The model is
/// not mutated.
pub fn forward(model: &PccnnModel, window: &[f64]) -> Result<f64, RegressError> {
    if window.len() != model.input_len {
        return Err(RegressError::ShapeMismatch {
            expected: model.input_len,
            got: window.len(),
        });
    }
    let mut current = window.to_vec();
    for (i, layer) in model.layers.iter().enumerate() {
        current = apply_layer(model, i, layer, &current);
    }
    Ok(current[0])
}

fn layer_weights(model: &PccnnModel, index: usize) -> Vec<f64> {
    model.params[model.layout[index].clone()]
        .iter()
        .map(|&w| w as f64)
        .collect()
}

fn apply_layer(model: &PccnnModel, index: usize, layer: &LayerSpec, input: &[f64]) -> Vec<f64> {
    let (in_ch, in_len) = model.shapes[index];
    let (out_ch, out_len) = model.shapes[index + 1];
    match *layer {
        LayerSpec::Conv1d { kernel, stride, .. } => {
            let p = layer_weights(model, index);
            let bias_base = out_ch * in_ch * kernel;
            let mut out = vec![0.0; out_ch * out_len];
            for oc in 0..out_ch {
                let row = &mut out[oc * out_len..(oc + 1) * out_len];
                row.fill(p[bias_base + oc]);
                for ic in 0..in_ch {
                    let w = &p[(oc * in_ch + ic) * kernel..(oc * in_ch + ic + 1) * kernel];
                    let x = &input[ic * in_len..(ic + 1) * in_len];
                    for (pos, r) in row.iter_mut().enumerate() {
                        let base = pos * stride;
                        let mut acc = 0.0;
                        for k in 0..kernel {
                            acc += w[k] * x[base + k];
                        }
                        *r += acc;
                    }
                }
            }
            out
        }
        LayerSpec::Relu => input.iter().map(|&v| v.max(0.0)).collect(),
        LayerSpec::AvgPool { width } => {
            let inv = 1.0 / width as f64;
            let mut out = vec![0.0; out_ch * out_len];
            for c in 0..in_ch {
                let x = &input[c * in_len..(c + 1) * in_len];
                let row = &mut out[c * out_len..(c + 1) * out_len];
                for (q, r) in row.iter_mut().enumerate() {
                    *r = x[q * width..(q + 1) * width].iter().sum::<f64>() * inv;
                }
            }
            out
        }
        LayerSpec::Dense { inputs, outputs } => {
            let p = layer_weights(model, index);
            let mut out = vec![0.0; outputs];
            for (o, r) in out.iter_mut().enumerate() {
                let w = &p[o * inputs..(o + 1) * inputs];
                let mut acc = p[outputs * inputs + o];
                for (wi, xi) in w.iter().zip(input.iter()) {
                    acc += wi * xi;
                }
                *r = acc;
            }
            out
        }
    }
}

/// Gradient of the squared error L = (forward(window) − label)² with respect
/// to every parameter, flattened in layout order.
pub fn backward(
    model: &PccnnModel,
    window: &[f64],
    label: f64,
) -> Result<Vec<f64>, RegressError> {
    backward_with_loss(model, window, label).map(|(_, g)| g)
}

/// Backward pass that also returns the per-sample squared error.
pub fn backward_with_loss(
    model: &PccnnModel,
    window: &[f64],
    label: f64,
) -> Result<(f64, Vec<f64>), RegressError> {
    if window.len() != model.input_len {
        return Err(RegressError::ShapeMismatch {
            expected: model.input_len,
            got: window.len(),
        });
    }
    // Forward pass keeping every layer input.
    let mut acts: Vec<Vec<f64>> = Vec::with_capacity(model.layers.len() + 1);
    acts.push(window.to_vec());
    for (i, layer) in model.layers.iter().enumerate() {
        let next = apply_layer(model, i, layer, &acts[i]);
        acts.push(next);
    }
    let pred = acts[model.layers.len()][0];
    let err = pred - label;
    let loss = err * err;

    let mut grads = vec![0.0; model.params.len()];
    let mut grad_out = vec![2.0 * err];
    for (i, layer) in model.layers.iter().enumerate().rev() {
        let input = &acts[i];
        let (in_ch, in_len) = model.shapes[i];
        let (out_ch, out_len) = model.shapes[i + 1];
        let need_input_grad = i > 0;
        let mut grad_in = vec![0.0; in_ch * in_len];
        match *layer {
            LayerSpec::Conv1d { kernel, stride, .. } => {
                let p = layer_weights(model, i);
                let g = &mut grads[model.layout[i].clone()];
                let bias_base = out_ch * in_ch * kernel;
                for oc in 0..out_ch {
                    let go = &grad_out[oc * out_len..(oc + 1) * out_len];
                    g[bias_base + oc] += go.iter().sum::<f64>();
                    for ic in 0..in_ch {
                        let wbase = (oc * in_ch + ic) * kernel;
                        let x = &input[ic * in_len..(ic + 1) * in_len];
                        let gi = &mut grad_in[ic * in_len..(ic + 1) * in_len];
                        for (pos, &gv) in go.iter().enumerate() {
                            let base = pos * stride;
                            for k in 0..kernel {
                                g[wbase + k] += gv * x[base + k];
                            }
                            if need_input_grad {
                                for k in 0..kernel {
                                    gi[base + k] += gv * p[wbase + k];
                                }
                            }
                        }
                    }
                }
            }
            LayerSpec::Relu => {
                for (j, gi) in grad_in.iter_mut().enumerate() {
                    *gi = if input[j] > 0.0 { grad_out[j] } else { 0.0 };
                }
            }
            LayerSpec::AvgPool { width } => {
                let inv = 1.0 / width as f64;
                for c in 0..in_ch {
                    let go = &grad_out[c * out_len..(c + 1) * out_len];
                    let gi = &mut grad_in[c * in_len..(c + 1) * in_len];
                    for (q, &gv) in go.iter().enumerate() {
                        let spread = gv * inv;
                        for slot in &mut gi[q * width..(q + 1) * width] {
                            *slot = spread;
                        }
                    }
                }
            }
            LayerSpec::Dense { inputs, outputs } => {
                let p = layer_weights(model, i);
                let g = &mut grads[model.layout[i].clone()];
                for (o, &gv) in grad_out.iter().enumerate().take(outputs) {
                    g[outputs * inputs + o] += gv;
                    let gw = &mut g[o * inputs..(o + 1) * inputs];
                    for (j, slot) in gw.iter_mut().enumerate() {
                        *slot += gv * input[j];
                    }
                    if need_input_grad {
                        let w = &p[o * inputs..(o + 1) * inputs];
                        for (j, slot) in grad_in.iter_mut().enumerate() {
                            *slot += gv * w[j];
                        }
                    }
                }
            }
        }
        grad_out = grad_in;
    }
    Ok((loss, grads))
}
