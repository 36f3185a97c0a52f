//! Regression acceleration: window datasets, the convolutional g²(0)
//! regressor with Adam training, random-forest and linear-SVR baselines, and
//! checkpointing.

mod adam;
mod checkpoint;
mod dataset;
mod features;
mod forest;
mod pccnn;
mod svr;
mod train;

pub use adam::{adam_step, AdamState, TrainConfig};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, QCK_MAGIC, QCK_VERSION};
pub use dataset::{
    build_dataset, LabelSource, Normalization, SourceRecord, SplitTag, WindowDataset,
    DEFAULT_WINDOW_LEN, MIN_MOMENT_LABEL_SAMPLES,
};
pub use features::{summary_features, FeatureScaler, SUMMARY_FEATURE_COUNT};
pub use forest::{fit_random_forest, predict_forest, RandomForest};
pub use pccnn::{
    backward, backward_with_loss, default_architecture, forward, LayerSpec, PccnnModel,
};
pub use svr::{
    fit_svr, fit_svr_with, predict_svr, LinearSvr, SvrTrace, DEFAULT_SVR_EPOCHS,
    DEFAULT_SVR_LEARNING_RATE,
};
pub use train::{dataset_mse, mean_squared_error, predict_batch, train, TrainTrace};

use thiserror::Error;

use crate::homodyne::HomodyneError;

/// Errors from dataset construction, model evaluation, training, and
/// checkpoint parsing.
#[derive(Debug, Error)]
pub enum RegressError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("split contains no windows")]
    EmptySplit,
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("record {index} has {len} samples, {required} required")]
    RecordTooShort {
        index: usize,
        len: usize,
        required: usize,
    },
    #[error("window length {got} differs from dataset window length {expected}")]
    InconsistentWindowLength { expected: usize, got: usize },
    #[error("record {0} lacks an oracle label")]
    MissingOracleLabel(usize),
    #[error("label {index} is not a valid g2 value ({value})")]
    InvalidLabel { index: usize, value: f64 },
    #[error("moment labeling failed: {0}")]
    Label(#[from] HomodyneError),
    #[error("bad magic (not a QCK1 checkpoint)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    VersionMismatch(u32),
    #[error("checkpoint checksum mismatch or truncated data")]
    ChecksumMismatch,
    #[error("malformed checkpoint: {0}")]
    MalformedCheckpoint(String),
}
