//! Measurement data model and the moment-inversion chain.
//!
//! A balanced detector produces a stream of difference-photocurrent samples
//! ([`QuadratureRecord`]). The second and fourth central moments of that
//! stream, together with the local-oscillator photon-number scale obtained
//! from a vacuum record ([`LoCalibration`]), determine the mean photon number
//! and the normally ordered second moment of the signal field, and from those
//! the second-order correlation g²(0).
//!
//! Moments are accumulated in one pass and are mergeable
//! ([`MomentSet::merge`]), so records may be processed in partitions and
//! combined without changing the result.

mod calibration;
mod g2;
mod moments;

pub use calibration::{calibrate_lo, calibrate_lo_with_min, LoCalibration, MIN_CALIBRATION_SAMPLES};
pub use g2::{
    g2_block_bootstrap, g2_from_moments, g2_from_moments_with_floor, mean_photon_number,
    mean_photon_std_error, normally_ordered_second, photon_statistics, G2Estimate, G2Method,
    PhotonStatistics, MIN_BOOTSTRAP_BLOCKS, SIGNAL_FLOOR_FRACTION,
};
pub use moments::{accumulate_moments, merge_moments, MomentSet, MAX_MOMENT_ORDER};

use thiserror::Error;

/// Errors from moment accumulation, calibration, and g²(0) inversion.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HomodyneError {
    #[error("record contains no samples")]
    EmptyRecord,
    #[error("sample {0} is not finite")]
    NonFiniteSample(usize),
    #[error("record has {len} samples, calibration requires at least {min}")]
    RecordTooShort { len: usize, min: usize },
    #[error("record variance is zero (degenerate or clipped input)")]
    ZeroVariance,
    #[error("signal variance is within the noise floor of the vacuum level; nothing to correlate")]
    SignalTooWeak,
    #[error("{n_blocks} bootstrap blocks requested, at least {min} required")]
    TooFewBlocks { n_blocks: usize, min: usize },
}

/// A finite sequence of difference-photocurrent samples with acquisition
/// metadata. The sample unit is arbitrary but must be linear: every
/// moment-based quantity below is invariant under a common rescaling of the
/// signal record and the calibration record.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRecord {
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
    pub label: Option<String>,
}

impl QuadratureRecord {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Self {
        Self {
            samples,
            sample_rate_hz,
            label: None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Checks the estimation preconditions: non-empty, all samples finite.
    pub fn validate(&self) -> Result<(), HomodyneError> {
        if self.samples.is_empty() {
            return Err(HomodyneError::EmptyRecord);
        }
        for (i, s) in self.samples.iter().enumerate() {
            if !s.is_finite() {
                return Err(HomodyneError::NonFiniteSample(i));
            }
        }
        Ok(())
    }
}
