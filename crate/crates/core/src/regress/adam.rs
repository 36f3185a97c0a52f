//! Adam optimizer with bias correction.

use serde::{Deserialize, Serialize};

use super::RegressError;

/// Training hyperparameters. Defaults: learning rate 1e-3, batch 64,
/// 200 epochs, β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    /// Stop after the first epoch whose validation MSE falls at or below
    /// this value.
    pub early_stop_val_mse: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 64,
            epochs: 200,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
            early_stop_val_mse: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), RegressError> {
        let ok = self.learning_rate >= 0.0
            && self.learning_rate.is_finite()
            && self.batch_size >= 1
            && self.epochs >= 1
            && self.adam_beta1 > 0.0
            && self.adam_beta1 < 1.0
            && self.adam_beta2 > 0.0
            && self.adam_beta2 < 1.0
            && self.adam_epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(RegressError::InvalidConfig(format!("{self:?}")))
        }
    }
}

/// Optimizer state: first/second moment estimates and the step counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
}

impl AdamState {
    pub fn zeros(n: usize) -> Self {
        Self {
            first_moment: vec![0.0; n],
            second_moment: vec![0.0; n],
            step_count: 0,
        }
    }
}

/// One bias-corrected Adam update. Parameters are stored in `f32`; moment
/// estimates and arithmetic are `f64`.
pub fn adam_step(
    params: &mut [f32],
    grads: &[f64],
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<(), RegressError> {
    if params.len() != grads.len() {
        return Err(RegressError::LengthMismatch {
            a: params.len(),
            b: grads.len(),
        });
    }
    if state.first_moment.len() != params.len() || state.second_moment.len() != params.len() {
        return Err(RegressError::LengthMismatch {
            a: state.first_moment.len(),
            b: params.len(),
        });
    }
    config.validate()?;
    state.step_count += 1;
    let t = state.step_count as i32;
    let b1 = config.adam_beta1;
    let b2 = config.adam_beta2;
    let bias1 = 1.0 - b1.powi(t);
    let bias2 = 1.0 - b2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        let m = b1 * state.first_moment[i] + (1.0 - b1) * g;
        let v = b2 * state.second_moment[i] + (1.0 - b2) * g * g;
        state.first_moment[i] = m;
        state.second_moment[i] = v;
        let m_hat = m / bias1;
        let v_hat = v / bias2;
        let p = params[i] as f64 - config.learning_rate * m_hat / (v_hat.sqrt() + config.adam_epsilon);
        params[i] = p as f32;
    }
    Ok(())
}
