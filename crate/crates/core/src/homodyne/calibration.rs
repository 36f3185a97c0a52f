//! Local-oscillator calibration from a vacuum record.
//!
//! With the signal port blocked the difference photocurrent is pure shot
//! noise, and its variance fixes the LO photon-number scale N_LO. The sample
//! mean is retained as the residual DC imbalance; all downstream moments are
//! central, so a nonzero offset does not bias the estimators.

use serde::{Deserialize, Serialize};

use super::{accumulate_moments, HomodyneError, QuadratureRecord};

/// Default minimum vacuum-record length accepted for calibration.
pub const MIN_CALIBRATION_SAMPLES: usize = 10_000;

/// LO photon-number scale and residual detector imbalance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoCalibration {
    /// Vacuum-record variance, in squared sample units.
    pub n_lo: f64,
    /// Vacuum-record sample mean (residual DC imbalance).
    pub mean_offset: f64,
    /// Number of samples the calibration was computed from.
    pub n_samples_used: u64,
}

/// Calibrates against a vacuum record using the default minimum length.
pub fn calibrate_lo(vacuum_record: &QuadratureRecord) -> Result<LoCalibration, HomodyneError> {
    calibrate_lo_with_min(vacuum_record, MIN_CALIBRATION_SAMPLES)
}

/// Calibrates against a vacuum record, requiring at least `min_samples`.
pub fn calibrate_lo_with_min(
    vacuum_record: &QuadratureRecord,
    min_samples: usize,
) -> Result<LoCalibration, HomodyneError> {
    if vacuum_record.len() < min_samples {
        return Err(HomodyneError::RecordTooShort {
            len: vacuum_record.len(),
            min: min_samples,
        });
    }
    let m = accumulate_moments(vacuum_record)?;
    let n_lo = m.m2();
    if n_lo <= 0.0 {
        return Err(HomodyneError::ZeroVariance);
    }
    Ok(LoCalibration {
        n_lo,
        mean_offset: m.mean(),
        n_samples_used: m.count(),
    })
}
