//! Minibatch MSE training and batch prediction.
//!
//! Determinism contract: for a fixed seed, data, and config the loss trace is
//! bitwise reproducible. Batches are shuffled with a seeded permutation, and
//! gradient/loss reductions sum fixed-size chunks in index order, so the
//! result does not depend on how many worker threads rayon happens to use.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::homodyne::{G2Estimate, G2Method};

use super::adam::{adam_step, AdamState, TrainConfig};
use super::dataset::WindowDataset;
use super::pccnn::{backward_with_loss, forward, PccnnModel};
use super::RegressError;

/// Windows per parallel reduction chunk. Fixed (rather than derived from the
/// thread count) so summation order is identical on any machine.
const REDUCTION_CHUNK: usize = 8;

/// Per-epoch training and validation MSE.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub train_mse: Vec<f64>,
    pub val_mse: Vec<f64>,
}

impl TrainTrace {
    pub fn epochs_run(&self) -> usize {
        self.train_mse.len()
    }
}

/// Trains `model` in place with minibatch Adam on squared error and returns
/// the loss trace for both splits. Validation MSE is evaluated after every
/// epoch; `config.early_stop_val_mse` ends training once reached.
pub fn train(
    model: &mut PccnnModel,
    train_set: &WindowDataset,
    val_set: &WindowDataset,
    config: &TrainConfig,
) -> Result<TrainTrace, RegressError> {
    config.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(RegressError::EmptySplit);
    }
    train_set.validate()?;
    val_set.validate()?;
    for ds in [train_set, val_set] {
        if ds.window_len() != model.input_len() {
            return Err(RegressError::ShapeMismatch {
                expected: model.input_len(),
                got: ds.window_len(),
            });
        }
    }

    let n_train = train_set.len();
    let mut state = AdamState::zeros(model.param_count());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n_train).collect();
    let mut trace = TrainTrace {
        train_mse: Vec::with_capacity(config.epochs),
        val_mse: Vec::with_capacity(config.epochs),
    };

    for _epoch in 0..config.epochs {
        shuffle(&mut order, &mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let (batch_loss, grads) = batch_gradient(model, train_set, batch)?;
            epoch_loss += batch_loss;
            adam_step(model.parameters_mut(), &grads, &mut state, config)?;
        }
        trace.train_mse.push(epoch_loss / n_train as f64);
        let val = dataset_mse(model, val_set)?;
        trace.val_mse.push(val);
        if let Some(target) = config.early_stop_val_mse {
            if val <= target {
                break;
            }
        }
    }
    Ok(trace)
}

/// Loss sum and mean gradient over one batch, reduced deterministically.
fn batch_gradient(
    model: &PccnnModel,
    data: &WindowDataset,
    batch: &[usize],
) -> Result<(f64, Vec<f64>), RegressError> {
    let chunks: Vec<&[usize]> = batch.chunks(REDUCTION_CHUNK).collect();
    let partials: Vec<Result<(f64, Vec<f64>), RegressError>> = chunks
        .par_iter()
        .map(|chunk| {
            let mut loss = 0.0;
            let mut grads = vec![0.0; model.param_count()];
            for &i in *chunk {
                let window = data.standardized(i);
                let (l, g) = backward_with_loss(model, &window, data.labels[i])?;
                loss += l;
                for (acc, v) in grads.iter_mut().zip(g.iter()) {
                    *acc += v;
                }
            }
            Ok((loss, grads))
        })
        .collect();

    let mut loss = 0.0;
    let mut grads = vec![0.0; model.param_count()];
    for partial in partials {
        let (l, g) = partial?;
        loss += l;
        for (acc, v) in grads.iter_mut().zip(g.iter()) {
            *acc += v;
        }
    }
    let inv = 1.0 / batch.len() as f64;
    for g in grads.iter_mut() {
        *g *= inv;
    }
    Ok((loss, grads))
}

/// MSE of the model over a dataset, chunk-reduced in index order.
pub fn dataset_mse(model: &PccnnModel, data: &WindowDataset) -> Result<f64, RegressError> {
    if data.is_empty() {
        return Err(RegressError::EmptySplit);
    }
    let indices: Vec<usize> = (0..data.len()).collect();
    let chunks: Vec<&[usize]> = indices.chunks(REDUCTION_CHUNK).collect();
    let partials: Vec<Result<f64, RegressError>> = chunks
        .par_iter()
        .map(|chunk| {
            let mut sum = 0.0;
            for &i in *chunk {
                let pred = forward(model, &data.standardized(i))?;
                let e = pred - data.labels[i];
                sum += e * e;
            }
            Ok(sum)
        })
        .collect();
    let mut total = 0.0;
    for p in partials {
        total += p?;
    }
    Ok(total / data.len() as f64)
}

/// Fisher–Yates with the training RNG.
fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
}

/// Predicts every (already standardized) window; order preserved, elementwise
/// equal to individual [`forward`] calls.
pub fn predict_batch(
    model: &PccnnModel,
    windows: &[Vec<f64>],
) -> Result<Vec<G2Estimate>, RegressError> {
    let preds: Vec<Result<f64, RegressError>> = windows
        .par_iter()
        .map(|w| forward(model, w))
        .collect();
    let mut out = Vec::with_capacity(windows.len());
    for (w, p) in windows.iter().zip(preds) {
        out.push(G2Estimate {
            value: p?,
            std_error: 0.0,
            n_samples: w.len() as u64,
            method: G2Method::Pccnn,
        });
    }
    Ok(out)
}

/// Mean squared error between two equal-length sequences.
pub fn mean_squared_error(predicted: &[f64], measured: &[f64]) -> f64 {
    assert_eq!(predicted.len(), measured.len(), "length mismatch");
    assert!(!predicted.is_empty(), "empty inputs");
    predicted
        .iter()
        .zip(measured.iter())
        .map(|(p, m)| (p - m) * (p - m))
        .sum::<f64>()
        / predicted.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regress::dataset::{Normalization, SplitTag};
    use crate::regress::pccnn::LayerSpec;

    fn tiny_dataset(n: usize, split: SplitTag) -> WindowDataset {
        // One fixed window/label pair repeated: the overfit-one-point case.
        let window: Vec<f64> = (0..64).map(|i| ((i as f64) * 0.37).sin()).collect();
        WindowDataset {
            windows: vec![window; n],
            labels: vec![1.3; n],
            normalization: Normalization::identity(),
            split,
        }
    }

    fn tiny_model(seed: u64) -> PccnnModel {
        let mut m = PccnnModel::new(
            64,
            vec![
                LayerSpec::Conv1d {
                    in_channels: 1,
                    out_channels: 4,
                    kernel: 8,
                    stride: 2,
                },
                LayerSpec::Relu,
                LayerSpec::AvgPool { width: 2 },
                LayerSpec::Dense {
                    inputs: 4 * 14,
                    outputs: 1,
                },
            ],
        )
        .unwrap();
        m.init_parameters(seed);
        m
    }

    #[test]
    fn overfits_one_point() {
        let train_set = tiny_dataset(64, SplitTag::Train);
        let val_set = tiny_dataset(8, SplitTag::Validation);
        let mut model = tiny_model(1);
        let cfg = TrainConfig {
            epochs: 200,
            ..TrainConfig::default()
        };
        let trace = train(&mut model, &train_set, &val_set, &cfg).unwrap();
        let last = *trace.train_mse.last().unwrap();
        assert!(last < 1e-4, "final training MSE {last}");
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let train_set = tiny_dataset(32, SplitTag::Train);
        let val_set = tiny_dataset(8, SplitTag::Validation);
        let mut model = tiny_model(2);
        let before = model.parameters().to_vec();
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 5,
            ..TrainConfig::default()
        };
        let trace = train(&mut model, &train_set, &val_set, &cfg).unwrap();
        assert_eq!(model.parameters(), &before[..]);
        assert!(trace.train_mse.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let train_set = tiny_dataset(48, SplitTag::Train);
        let val_set = tiny_dataset(8, SplitTag::Validation);
        let cfg = TrainConfig {
            epochs: 8,
            ..TrainConfig::default()
        };
        let mut a = tiny_model(3);
        let mut b = tiny_model(3);
        let ta = train(&mut a, &train_set, &val_set, &cfg).unwrap();
        let tb = train(&mut b, &train_set, &val_set, &cfg).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(a.parameters(), b.parameters());
    }

    #[test]
    fn empty_split_rejected() {
        let train_set = tiny_dataset(8, SplitTag::Train);
        let empty = WindowDataset {
            windows: vec![],
            labels: vec![],
            normalization: Normalization::identity(),
            split: SplitTag::Validation,
        };
        let mut model = tiny_model(4);
        assert!(matches!(
            train(&mut model, &train_set, &empty, &TrainConfig::default()),
            Err(RegressError::EmptySplit)
        ));
    }

    #[test]
    fn predict_batch_matches_forward() {
        let model = tiny_model(5);
        let ds = tiny_dataset(3, SplitTag::Test);
        let windows: Vec<Vec<f64>> = (0..ds.len()).map(|i| ds.standardized(i)).collect();
        let preds = predict_batch(&model, &windows).unwrap();
        assert_eq!(preds.len(), 3);
        for (w, p) in windows.iter().zip(&preds) {
            assert_eq!(p.value, forward(&model, w).unwrap());
            assert_eq!(p.method, G2Method::Pccnn);
        }
        let empty: Vec<Vec<f64>> = vec![];
        assert!(predict_batch(&model, &empty).unwrap().is_empty());
    }

    #[test]
    fn mse_hand_computed() {
        assert_eq!(mean_squared_error(&[1.0, 2.0], &[2.0, 1.0]), 1.0);
        assert_eq!(mean_squared_error(&[1.5, 2.5], &[1.5, 2.5]), 0.0);
    }
}
