//! Window datasets for the regressors.
//!
//! A dataset holds fixed-length raw quadrature windows with one g²(0) label
//! per window. Standardization is a single per-dataset z-score (mean and
//! scale fitted on the training split only) applied on the way into a model;
//! the raw photocurrent scale is arbitrary, so the pair (raw window,
//! normalization) is what carries meaning, not either alone.

use serde::{Deserialize, Serialize};

use crate::homodyne::{
    accumulate_moments, g2_from_moments, LoCalibration, QuadratureRecord,
};

use super::RegressError;

/// Minimum disjoint tail used for a moment-based label.
pub const MIN_MOMENT_LABEL_SAMPLES: usize = 1_000_000;

/// Default window length.
pub const DEFAULT_WINDOW_LEN: usize = 5000;

/// Per-dataset z-score parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: f64,
    pub scale: f64,
}

impl Normalization {
    pub fn identity() -> Self {
        Self {
            mean: 0.0,
            scale: 1.0,
        }
    }

    /// Fits mean and standard deviation over all values of all windows.
    /// A degenerate (constant) dataset gets scale 1.
    pub fn fit(windows: &[Vec<f64>]) -> Self {
        let n: usize = windows.iter().map(|w| w.len()).sum();
        if n == 0 {
            return Self::identity();
        }
        let mean = windows.iter().flatten().sum::<f64>() / n as f64;
        let var = windows
            .iter()
            .flatten()
            .map(|&x| (x - mean) * (x - mean))
            .sum::<f64>()
            / n as f64;
        let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        Self { mean, scale }
    }

    pub fn standardize(&self, raw: &[f64]) -> Vec<f64> {
        let inv = 1.0 / self.scale;
        raw.iter().map(|&x| (x - self.mean) * inv).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTag {
    Train,
    Validation,
    Test,
}

impl SplitTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Validation => "validation",
            SplitTag::Test => "test",
        }
    }
}

/// Where window labels come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    /// Moment inversion over a disjoint long tail of the same record.
    MomentLongRecord,
    /// The simulation oracle value supplied with the record.
    FieldOracle,
}

/// A record plus the ground-truth g²(0) of its source, when known.
#[derive(Debug, Clone)]
pub struct SourceRecord {
    pub record: QuadratureRecord,
    pub oracle_g2: Option<f64>,
}

/// Fixed-length windows with labels and the dataset normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowDataset {
    pub windows: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub normalization: Normalization,
    pub split: SplitTag,
}

impl WindowDataset {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn window_len(&self) -> usize {
        self.windows.first().map_or(0, |w| w.len())
    }

    /// Window `i` after the dataset z-score.
    pub fn standardized(&self, i: usize) -> Vec<f64> {
        self.normalization.standardize(&self.windows[i])
    }

    /// Checks the construction invariants: uniform window length, one finite
    /// non-negative label per window.
    pub fn validate(&self) -> Result<(), RegressError> {
        if self.windows.len() != self.labels.len() {
            return Err(RegressError::LengthMismatch {
                a: self.windows.len(),
                b: self.labels.len(),
            });
        }
        let expected = self.window_len();
        for w in &self.windows {
            if w.len() != expected {
                return Err(RegressError::InconsistentWindowLength {
                    expected,
                    got: w.len(),
                });
            }
        }
        for (i, &l) in self.labels.iter().enumerate() {
            if !l.is_finite() || l < 0.0 {
                return Err(RegressError::InvalidLabel { index: i, value: l });
            }
        }
        Ok(())
    }
}

/// Cuts contiguous non-overlapping windows from each source record and labels
/// them with the record's g²(0).
///
/// With [`LabelSource::MomentLongRecord`] each record must contain, after the
/// windowed region, a disjoint tail of at least
/// [`MIN_MOMENT_LABEL_SAMPLES`] samples; the label is the moment estimate over
/// that tail. With [`LabelSource::FieldOracle`] the label is the record's
/// `oracle_g2`.
///
/// `normalization: None` fits the z-score from these windows (the training
/// split); validation and test splits must pass the training normalization in.
pub fn build_dataset(
    sources: &[SourceRecord],
    cal: &LoCalibration,
    window_len: usize,
    windows_per_record: usize,
    label_source: LabelSource,
    split: SplitTag,
    normalization: Option<Normalization>,
) -> Result<WindowDataset, RegressError> {
    if window_len == 0 || windows_per_record == 0 {
        return Err(RegressError::InvalidConfig(
            "window_len and windows_per_record must be positive".into(),
        ));
    }
    let windowed = window_len * windows_per_record;
    let mut windows = Vec::with_capacity(sources.len() * windows_per_record);
    let mut labels = Vec::with_capacity(sources.len() * windows_per_record);
    for (index, source) in sources.iter().enumerate() {
        let rec = &source.record;
        let required = match label_source {
            LabelSource::MomentLongRecord => windowed + MIN_MOMENT_LABEL_SAMPLES,
            LabelSource::FieldOracle => windowed,
        };
        if rec.len() < required {
            return Err(RegressError::RecordTooShort {
                index,
                len: rec.len(),
                required,
            });
        }
        let label = match label_source {
            LabelSource::FieldOracle => source
                .oracle_g2
                .ok_or(RegressError::MissingOracleLabel(index))?,
            LabelSource::MomentLongRecord => {
                let tail = QuadratureRecord::new(
                    rec.samples[windowed..].to_vec(),
                    rec.sample_rate_hz,
                );
                let m = accumulate_moments(&tail)?;
                g2_from_moments(&m, cal)?.value
            }
        };
        if !label.is_finite() || label < 0.0 {
            return Err(RegressError::InvalidLabel {
                index,
                value: label,
            });
        }
        for w in 0..windows_per_record {
            windows.push(rec.samples[w * window_len..(w + 1) * window_len].to_vec());
            labels.push(label);
        }
    }
    let normalization = normalization.unwrap_or_else(|| Normalization::fit(&windows));
    let ds = WindowDataset {
        windows,
        labels,
        normalization,
        split,
    };
    ds.validate()?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homodyne::calibrate_lo_with_min;
    use crate::sim::{field_to_current, simulate_field, simulate_vacuum, AqnModel};

    fn cal() -> LoCalibration {
        LoCalibration {
            n_lo: 1.0,
            mean_offset: 0.0,
            n_samples_used: 1_000_000,
        }
    }

    fn source(len: usize, oracle: Option<f64>) -> SourceRecord {
        SourceRecord {
            record: simulate_vacuum(1.0, len, 7),
            oracle_g2: oracle,
        }
    }

    #[test]
    fn two_windows_share_the_label() {
        let ds = build_dataset(
            &[source(10_000, Some(1.5))],
            &cal(),
            5000,
            2,
            LabelSource::FieldOracle,
            SplitTag::Train,
            None,
        )
        .unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.labels, vec![1.5, 1.5]);
        assert_eq!(ds.window_len(), 5000);
    }

    #[test]
    fn oracle_labels_from_thermal_model() {
        let model = AqnModel {
            coherent_photon: 0.0,
            thermal_photon: 1.0,
            bandwidth_frac: 0.3,
            superbunch_k: None,
            n_lo: 1.0,
            seed: 3,
        };
        let field = simulate_field(&model, 60_000).unwrap();
        let g2 = crate::sim::empirical_field_g2(&field).unwrap();
        let sources: Vec<SourceRecord> = (0..3)
            .map(|i| SourceRecord {
                record: field_to_current(&field, 1.0, 100 + i),
                oracle_g2: Some(g2),
            })
            .collect();
        let ds = build_dataset(
            &sources,
            &cal(),
            5000,
            1,
            LabelSource::FieldOracle,
            SplitTag::Train,
            None,
        )
        .unwrap();
        for &l in &ds.labels {
            assert!((l - 2.0).abs() < 0.1, "label {l}");
        }
    }

    #[test]
    fn too_short_record_rejected() {
        let err = build_dataset(
            &[source(10_000, Some(1.0))],
            &cal(),
            5000,
            3,
            LabelSource::FieldOracle,
            SplitTag::Train,
            None,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            RegressError::RecordTooShort {
                index: 0,
                len: 10_000,
                required: 15_000
            }
        ));
    }

    #[test]
    fn missing_oracle_rejected() {
        let err = build_dataset(
            &[source(5000, None)],
            &cal(),
            5000,
            1,
            LabelSource::FieldOracle,
            SplitTag::Train,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, RegressError::MissingOracleLabel(0)));
    }

    #[test]
    fn moment_labels_use_the_disjoint_tail() {
        // Thermal source: the tail estimate should land near 2.
        let model = AqnModel {
            coherent_photon: 0.0,
            thermal_photon: 1.0,
            bandwidth_frac: 0.3,
            superbunch_k: None,
            n_lo: 1.0,
            seed: 11,
        };
        let n = 5000 + MIN_MOMENT_LABEL_SAMPLES;
        let field = simulate_field(&model, n).unwrap();
        let rec = field_to_current(&field, 1.0, 12);
        let vacuum = simulate_vacuum(1.0, 1_000_000, 13);
        let cal = calibrate_lo_with_min(&vacuum, 1000).unwrap();
        let ds = build_dataset(
            &[SourceRecord {
                record: rec,
                oracle_g2: None,
            }],
            &cal,
            5000,
            1,
            LabelSource::MomentLongRecord,
            SplitTag::Train,
            None,
        )
        .unwrap();
        assert_eq!(ds.len(), 1);
        assert!((ds.labels[0] - 2.0).abs() < 0.15, "label {}", ds.labels[0]);
    }

    #[test]
    fn normalization_fit_and_reuse() {
        let train = build_dataset(
            &[source(10_000, Some(1.0))],
            &cal(),
            5000,
            2,
            LabelSource::FieldOracle,
            SplitTag::Train,
            None,
        )
        .unwrap();
        // The z-scored training windows have mean ~0, variance ~1.
        let all: Vec<f64> = (0..train.len()).flat_map(|i| train.standardized(i)).collect();
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        let var = all.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / all.len() as f64;
        assert!(mean.abs() < 1e-10);
        assert!((var - 1.0).abs() < 1e-10);

        let test = build_dataset(
            &[source(5000, Some(1.2))],
            &cal(),
            5000,
            1,
            LabelSource::FieldOracle,
            SplitTag::Test,
            Some(train.normalization),
        )
        .unwrap();
        assert_eq!(test.normalization, train.normalization);
    }

    #[test]
    fn negative_label_rejected() {
        let err = build_dataset(
            &[source(5000, Some(-0.5))],
            &cal(),
            5000,
            1,
            LabelSource::FieldOracle,
            SplitTag::Train,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, RegressError::InvalidLabel { index: 0, .. }));
    }
}
