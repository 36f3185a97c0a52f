//! Moment inversion: from photocurrent moments to photon statistics and
//! g²(0).
//!
//! For a strong coherent LO the centered difference-photocurrent moments
//! relate to the signal-field moments as
//!
//! ```text
//! ⟨ΔI²⟩ = N_LO (2⟨a†a⟩ + 1)
//! ⟨ΔI⁴⟩ = N_LO² (6⟨a†a†aa⟩ + 12⟨a†a⟩ + 3)
//! ```
//!
//! which invert to [`mean_photon_number`] and [`normally_ordered_second`],
//! and combine into the ratio estimator of [`g2_from_moments`]. The ratio is
//! undefined at vacuum (0/0); inputs whose variance sits within a configurable
//! floor of the vacuum level are rejected as [`HomodyneError::SignalTooWeak`].
//!
//! Uncertainty comes from first-order propagation of the ratio through the
//! sampling covariance of (m₂, m₄), which involves sample central moments up
//! to order eight; [`g2_block_bootstrap`] is the reference alternative for
//! serially correlated records.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{accumulate_moments, HomodyneError, LoCalibration, MomentSet, QuadratureRecord};

/// Default signal floor: |m2 − N_LO| must exceed this fraction of N_LO.
pub const SIGNAL_FLOOR_FRACTION: f64 = 1e-3;

/// Minimum number of blocks accepted by [`g2_block_bootstrap`].
pub const MIN_BOOTSTRAP_BLOCKS: usize = 10;

/// How a g²(0) value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum G2Method {
    Moment,
    Pccnn,
    Rf,
    Svr,
}

impl G2Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            G2Method::Moment => "moment",
            G2Method::Pccnn => "pccnn",
            G2Method::Rf => "rf",
            G2Method::Svr => "svr",
        }
    }
}

impl std::fmt::Display for G2Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A g²(0) value with statistical uncertainty and provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub method: G2Method,
}

/// Inverted field moments: ⟨a†a⟩ and ⟨a†a†aa⟩, dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonStatistics {
    pub mean_photon: f64,
    pub second_order: f64,
}

impl PhotonStatistics {
    /// A physically valid source has ⟨a†a⟩ ≥ 0 up to sampling noise; values
    /// below −3 standard errors indicate a calibration or pipeline fault.
    pub fn flags_unphysical(&self, mean_photon_std_error: f64) -> bool {
        self.mean_photon < -3.0 * mean_photon_std_error
    }
}

/// Mean photon number ⟨a†a⟩ = ½(m₂/N_LO − 1).
///
/// May return small negative values from sampling noise; the caller decides
/// how to interpret them.
pub fn mean_photon_number(m: &MomentSet, cal: &LoCalibration) -> f64 {
    0.5 * (m.m2() / cal.n_lo - 1.0)
}

/// Normally ordered second moment ⟨a†a†aa⟩ = m₄/(6N_LO²) − m₂/N_LO + ½.
pub fn normally_ordered_second(m: &MomentSet, cal: &LoCalibration) -> f64 {
    m.m4() / (6.0 * cal.n_lo * cal.n_lo) - m.m2() / cal.n_lo + 0.5
}

/// Both inverted field moments at once.
pub fn photon_statistics(m: &MomentSet, cal: &LoCalibration) -> PhotonStatistics {
    PhotonStatistics {
        mean_photon: mean_photon_number(m, cal),
        second_order: normally_ordered_second(m, cal),
    }
}

/// Standard error of [`mean_photon_number`] under the i.i.d. approximation.
pub fn mean_photon_std_error(m: &MomentSet, cal: &LoCalibration) -> f64 {
    let n = m.count() as f64;
    if n < 2.0 {
        return f64::INFINITY;
    }
    let var_m2 = (m.m4() - m.m2() * m.m2()) / n;
    var_m2.max(0.0).sqrt() / (2.0 * cal.n_lo)
}

/// g²(0) from photocurrent moments with the default signal floor.
pub fn g2_from_moments(m: &MomentSet, cal: &LoCalibration) -> Result<G2Estimate, HomodyneError> {
    g2_from_moments_with_floor(m, cal, SIGNAL_FLOOR_FRACTION)
}

/// g²(0) = (⅔m₄ − 4N_LO·m₂ + 2N_LO²) / (m₂ − N_LO)².
///
/// `floor_fraction` sets the smallest accepted |m₂ − N_LO| relative to N_LO;
/// below it the denominator is vacuum-degenerate and there are no photons to
/// correlate.
pub fn g2_from_moments_with_floor(
    m: &MomentSet,
    cal: &LoCalibration,
    floor_fraction: f64,
) -> Result<G2Estimate, HomodyneError> {
    let n_lo = cal.n_lo;
    let m2 = m.m2();
    let m4 = m.m4();
    let excess = m2 - n_lo;
    if excess.abs() <= floor_fraction * n_lo {
        return Err(HomodyneError::SignalTooWeak);
    }
    let value = (2.0 / 3.0 * m4 - 4.0 * n_lo * m2 + 2.0 * n_lo * n_lo) / (excess * excess);
    Ok(G2Estimate {
        value,
        std_error: delta_method_std_error(m, n_lo, m2, m4),
        n_samples: m.count(),
        method: G2Method::Moment,
    })
}

/// First-order (delta-method) standard error of the moment ratio.
///
/// Uses the asymptotic sampling covariance of sample central moments
/// (mean-estimation terms included):
///
/// ```text
/// Var(m̂₂)      = (μ₄ − μ₂²) / n
/// Var(m̂₄)      = (μ₈ − μ₄² − 8μ₃μ₅ + 16μ₂μ₃²) / n
/// Cov(m̂₂, m̂₄) = (μ₆ − μ₂μ₄ − 4μ₃²) / n
/// ```
///
/// The i.i.d. assumption understates the error on band-limited records;
/// [`g2_block_bootstrap`] is the robust reference.
fn delta_method_std_error(m: &MomentSet, n_lo: f64, m2: f64, m4: f64) -> f64 {
    let n = m.count() as f64;
    if n < 2.0 {
        return f64::INFINITY;
    }
    let mu2 = m2;
    let mu3 = m.central_moment(3);
    let mu4 = m4;
    let mu5 = m.central_moment(5);
    let mu6 = m.central_moment(6);
    let mu8 = m.central_moment(8);

    let var_m2 = (mu4 - mu2 * mu2) / n;
    let var_m4 = (mu8 - mu4 * mu4 - 8.0 * mu3 * mu5 + 16.0 * mu2 * mu3 * mu3) / n;
    let cov = (mu6 - mu2 * mu4 - 4.0 * mu3 * mu3) / n;

    let excess = m2 - n_lo;
    let d_dm4 = (2.0 / 3.0) / (excess * excess);
    let d_dm2 = (4.0 * n_lo * m2 - 4.0 / 3.0 * m4) / (excess * excess * excess);

    let var = d_dm2 * d_dm2 * var_m2 + d_dm4 * d_dm4 * var_m4 + 2.0 * d_dm2 * d_dm4 * cov;
    var.max(0.0).sqrt()
}

/// Moment-based g²(0) with a block-bootstrap standard error.
///
/// The record is cut into `n_blocks` contiguous blocks (any remainder after
/// integer division contributes to the point estimate but not to the
/// resampling pool). Each of the `n_resamples` resamples merges `n_blocks`
/// blocks drawn with replacement and re-runs the inversion; the standard
/// deviation of those values is the reported error. Contiguous blocks keep
/// serial correlation inside blocks, which the plain delta method ignores.
///
/// Deterministic for a fixed `seed`.
pub fn g2_block_bootstrap(
    record: &QuadratureRecord,
    cal: &LoCalibration,
    n_blocks: usize,
    n_resamples: usize,
    seed: u64,
) -> Result<G2Estimate, HomodyneError> {
    if n_blocks < MIN_BOOTSTRAP_BLOCKS {
        return Err(HomodyneError::TooFewBlocks {
            n_blocks,
            min: MIN_BOOTSTRAP_BLOCKS,
        });
    }
    record.validate()?;
    if record.len() < n_blocks {
        return Err(HomodyneError::RecordTooShort {
            len: record.len(),
            min: n_blocks,
        });
    }
    let full = accumulate_moments(record)?;
    let point = g2_from_moments(&full, cal)?;

    let block_len = record.len() / n_blocks;
    let block_moments: Vec<MomentSet> = record
        .samples
        .chunks_exact(block_len)
        .take(n_blocks)
        .map(|chunk| {
            let mut m = MomentSet::new();
            for &x in chunk {
                m.push(x);
            }
            m
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        let mut merged = MomentSet::new();
        for _ in 0..n_blocks {
            let idx = rng.random_range(0..n_blocks);
            merged = merged.merge(&block_moments[idx]);
        }
        if let Ok(est) = g2_from_moments(&merged, cal) {
            values.push(est.value);
        }
    }
    if values.len() < 2 {
        return Err(HomodyneError::SignalTooWeak);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (values.len() - 1) as f64;
    Ok(G2Estimate {
        value: point.value,
        std_error: var.sqrt(),
        n_samples: record.len() as u64,
        method: G2Method::Moment,
    })
}
