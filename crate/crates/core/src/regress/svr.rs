//! Linear support-vector regression trained by primal subgradient descent.
//!
//! Objective (per-sample form):
//!
//! ```text
//! J(w, b) = (1/n) Σ max(0, |yᵢ − w·xᵢ − b| − ε) + (λ/2)‖w‖²,  λ = 1/(c·n)
//! ```
//!
//! Full-batch subgradient steps with an O(1/√t) rate, returning the suffix
//! average of the iterates (last half of the trajectory); the recorded
//! objective trace is evaluated at the running average, which smooths the
//! kinks of the ε-insensitive loss. Features are expected standardized.

use super::RegressError;

pub const DEFAULT_SVR_EPOCHS: usize = 400;
pub const DEFAULT_SVR_LEARNING_RATE: f64 = 0.1;

/// w·x + b with the averaged weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvr {
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Objective value at the averaged iterate, one entry per epoch from the
/// point averaging starts (halfway through the run).
#[derive(Debug, Clone, PartialEq)]
pub struct SvrTrace {
    pub objective: Vec<f64>,
}

/// Fits with the default epoch count and step size.
pub fn fit_svr(
    features: &[Vec<f64>],
    labels: &[f64],
    c: f64,
    epsilon_tube: f64,
    seed: u64,
) -> Result<LinearSvr, RegressError> {
    fit_svr_with(
        features,
        labels,
        c,
        epsilon_tube,
        DEFAULT_SVR_EPOCHS,
        DEFAULT_SVR_LEARNING_RATE,
        seed,
    )
    .map(|(model, _)| model)
}

/// Full control over the descent. Zero epochs returns the zero model (bias
/// 0), matching the initialization. Deterministic for a fixed seed — the
/// descent is full-batch, so the seed currently has no effect and exists for
/// interface stability.
pub fn fit_svr_with(
    features: &[Vec<f64>],
    labels: &[f64],
    c: f64,
    epsilon_tube: f64,
    epochs: usize,
    learning_rate: f64,
    _seed: u64,
) -> Result<(LinearSvr, SvrTrace), RegressError> {
    if features.is_empty() {
        return Err(RegressError::EmptyTrainingSet);
    }
    if features.len() != labels.len() {
        return Err(RegressError::LengthMismatch {
            a: features.len(),
            b: labels.len(),
        });
    }
    if !(c > 0.0 && epsilon_tube >= 0.0 && learning_rate > 0.0) {
        return Err(RegressError::InvalidConfig(
            "require c > 0, epsilon_tube >= 0, learning_rate > 0".into(),
        ));
    }
    let dim = features[0].len();
    for f in features {
        if f.len() != dim {
            return Err(RegressError::LengthMismatch { a: f.len(), b: dim });
        }
    }
    let n = features.len();
    let lambda = 1.0 / (c * n as f64);

    let mut w = vec![0.0f64; dim];
    let mut b = 0.0f64;
    let mut w_avg = vec![0.0f64; dim];
    let mut b_avg = 0.0f64;
    // Averaging only the tail avoids dragging the returned weights toward
    // the zero initialization.
    let avg_start = epochs / 2;
    let mut trace = SvrTrace {
        objective: Vec::with_capacity(epochs - avg_start),
    };

    for t in 0..epochs {
        // Subgradient of the ε-insensitive loss plus the ridge term.
        let mut gw = vec![0.0f64; dim];
        let mut gb = 0.0f64;
        for (x, &y) in features.iter().zip(labels.iter()) {
            let r = y - dot(&w, x) - b;
            if r.abs() > epsilon_tube {
                let s = r.signum();
                for (g, xi) in gw.iter_mut().zip(x.iter()) {
                    *g -= s * xi;
                }
                gb -= s;
            }
        }
        let inv_n = 1.0 / n as f64;
        let eta = learning_rate / ((t + 1) as f64).sqrt();
        for (wi, g) in w.iter_mut().zip(gw.iter()) {
            *wi -= eta * (g * inv_n + lambda * *wi);
        }
        b -= eta * gb * inv_n;

        // Running average over the trajectory tail.
        if t >= avg_start {
            let k = (t - avg_start + 1) as f64;
            for (a, wi) in w_avg.iter_mut().zip(w.iter()) {
                *a += (wi - *a) / k;
            }
            b_avg += (b - b_avg) / k;
            trace
                .objective
                .push(objective(&w_avg, b_avg, features, labels, epsilon_tube, lambda));
        }
    }

    Ok((
        LinearSvr {
            weights: w_avg,
            bias: b_avg,
        },
        trace,
    ))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn objective(
    w: &[f64],
    b: f64,
    features: &[Vec<f64>],
    labels: &[f64],
    epsilon: f64,
    lambda: f64,
) -> f64 {
    let loss: f64 = features
        .iter()
        .zip(labels.iter())
        .map(|(x, &y)| ((y - dot(w, x) - b).abs() - epsilon).max(0.0))
        .sum::<f64>()
        / features.len() as f64;
    loss + 0.5 * lambda * dot(w, w)
}

pub fn predict_svr(model: &LinearSvr, features: &[Vec<f64>]) -> Vec<f64> {
    features
        .iter()
        .map(|x| dot(&model.weights, x) + model.bias)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_labels_fit_within_tube() {
        let features: Vec<Vec<f64>> = (0..50).map(|i| vec![(i as f64) / 50.0 - 0.5]).collect();
        let labels = vec![1.7; 50];
        let model = fit_svr(&features, &labels, 10.0, 0.1, 0).unwrap();
        for p in predict_svr(&model, &features) {
            assert!((p - 1.7).abs() <= 0.1 + 1e-6, "prediction {p}");
        }
    }

    #[test]
    fn recovers_linear_relation() {
        // y = 2·x₁ on standardized-ish inputs, large c (weak regularization).
        let features: Vec<Vec<f64>> = (0..100)
            .map(|i| vec![(i as f64) / 50.0 - 1.0])
            .collect();
        let labels: Vec<f64> = features.iter().map(|f| 2.0 * f[0]).collect();
        let (model, _) =
            fit_svr_with(&features, &labels, 1e4, 0.01, 2000, 0.2, 0).unwrap();
        assert!(
            (model.weights[0] - 2.0).abs() < 0.1,
            "slope {}",
            model.weights[0]
        );
    }

    #[test]
    fn zero_epochs_is_zero_model() {
        let features = vec![vec![1.0], vec![2.0]];
        let labels = vec![3.0, 4.0];
        let (model, trace) = fit_svr_with(&features, &labels, 1.0, 0.1, 0, 0.1, 0).unwrap();
        assert_eq!(predict_svr(&model, &features), vec![0.0, 0.0]);
        assert!(trace.objective.is_empty());
    }

    #[test]
    fn averaged_objective_non_increasing() {
        let features: Vec<Vec<f64>> = (0..80)
            .map(|i| {
                let x = (i as f64) / 40.0 - 1.0;
                vec![x, x * x]
            })
            .collect();
        let labels: Vec<f64> = features.iter().map(|f| 1.0 + 0.8 * f[0] - 0.3 * f[1]).collect();
        let (_, trace) = fit_svr_with(&features, &labels, 100.0, 0.05, 500, 0.1, 0).unwrap();
        for pair in trace.objective.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-12,
                "objective increased: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn empty_training_set_rejected() {
        assert!(matches!(
            fit_svr(&[], &[], 1.0, 0.1, 0),
            Err(RegressError::EmptyTrainingSet)
        ));
    }
}
