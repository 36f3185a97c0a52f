//! Semiclassical source model for chaos-amplified quantum noise.
//!
//! The signal field is a constant coherent amplitude α = √(coherent photons)
//! plus a band-limited complex-Gaussian thermal component normalized to the
//! requested thermal photon number, optionally intensity-modulated by a slow
//! unit-mean gamma envelope (super-bunching). For this family the zero-delay
//! correlation has a closed form ([`analytic_g2`]); with the envelope on, the
//! empirical field moments ([`empirical_field_g2`]) are the ground truth.
//!
//! Detection maps the field to a difference photocurrent
//! ([`field_to_current`]):
//!
//! ```text
//! ΔI_t = 2·√N_LO·Re(e^{−iφ_t} v_t) + √N_LO·ξ_t
//! ```
//!
//! with a fresh uniform phase φ_t per sample and standard-normal shot noise
//! ξ_t. Averaging over uniform φ gives E[Re(e^{−iφ}v)²] = |v|²/2 and
//! E[Re(e^{−iφ}v)⁴] = (3/8)|v|⁴, hence
//!
//! ```text
//! ⟨ΔI²⟩ = N_LO (2·E[|v|²] + 1)
//! ⟨ΔI⁴⟩ = N_LO² (6·E[|v|⁴] + 12·E[|v|²] + 3)
//! ```
//!
//! so the moment-inversion chain recovers E[|v|²] and E[|v|⁴] exactly — the
//! semiclassical stand-ins for ⟨a†a⟩ and ⟨a†a†aa⟩. The per-sample phase
//! randomization is load-bearing: with a frozen phase the coherent component
//! becomes a DC offset that mean subtraction removes, and the estimator sees
//! only the thermal part (see the fixed-phase variant and its test).

mod filter;
mod psd;

pub use filter::Lowpass4;
pub use psd::{effective_bandwidth_80, estimate_psd};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

use crate::homodyne::QuadratureRecord;
use crate::seed::derive_seed;

/// RNG stream indices, derived from the owning operation's seed.
const FIELD_STREAM: u64 = 0;
const ENVELOPE_STREAM: u64 = 1;
const PHASE_STREAM: u64 = 2;
const SHOT_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("bandwidth_frac {0} outside (0, 0.5]")]
    InvalidBandwidth(f64),
    #[error("requested length must be at least 1")]
    InvalidLength,
    #[error("coherent and thermal photon numbers are both zero")]
    ZeroPhotonNumber,
    #[error("field has zero mean intensity")]
    ZeroIntensity,
    #[error("negative photon number or non-finite model parameter")]
    InvalidModel,
    #[error("segment length {segment_len} exceeds record length {record_len}")]
    SegmentTooLong {
        segment_len: usize,
        record_len: usize,
    },
    #[error("segment length {0} is not a power of two")]
    SegmentNotPowerOfTwo(usize),
}

/// Parameters of the semiclassical amplified-noise source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AqnModel {
    /// Mean coherent photon number |α|².
    pub coherent_photon: f64,
    /// Mean thermal photon number n̄.
    pub thermal_photon: f64,
    /// Low-pass −3 dB cutoff of the thermal component, as a fraction of the
    /// sample rate, in (0, 0.5].
    pub bandwidth_frac: f64,
    /// Gamma-envelope shape for super-bunching; `None` disables the envelope.
    #[serde(default)]
    pub superbunch_k: Option<f64>,
    /// LO photon-number scale used when converting to photocurrent.
    pub n_lo: f64,
    pub seed: u64,
}

impl AqnModel {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.bandwidth_frac > 0.0 && self.bandwidth_frac <= 0.5) {
            return Err(SimError::InvalidBandwidth(self.bandwidth_frac));
        }
        if !(self.coherent_photon >= 0.0
            && self.thermal_photon >= 0.0
            && self.coherent_photon.is_finite()
            && self.thermal_photon.is_finite()
            && self.n_lo > 0.0
            && self.n_lo.is_finite())
        {
            return Err(SimError::InvalidModel);
        }
        if let Some(k) = self.superbunch_k {
            if !(k > 0.0 && k.is_finite()) {
                return Err(SimError::InvalidModel);
            }
        }
        Ok(())
    }
}

/// Classical signal-field amplitude per sample, photon-number normalized:
/// the sample mean of |value|² tracks coherent + thermal photons.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSeries {
    pub values: Vec<Complex64>,
    pub seed_used: u64,
}

/// Generates `n` samples of the signal field. Deterministic for a fixed
/// model (including its seed).
pub fn simulate_field(model: &AqnModel, n: usize) -> Result<FieldSeries, SimError> {
    model.validate()?;
    if n < 1 {
        return Err(SimError::InvalidLength);
    }
    if model.coherent_photon + model.thermal_photon <= 0.0 {
        return Err(SimError::ZeroPhotonNumber);
    }
    let alpha = model.coherent_photon.sqrt();
    if model.thermal_photon <= 0.0 {
        return Ok(FieldSeries {
            values: vec![Complex64::new(alpha, 0.0); n],
            seed_used: model.seed,
        });
    }

    // Band-limited complex Gaussian, unit variance before scaling.
    let warmup = Lowpass4::warmup_len(model.bandwidth_frac);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(model.seed, FIELD_STREAM));
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut thermal: Vec<Complex64> = (0..n + warmup)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re * half, im * half)
        })
        .collect();
    Lowpass4::new(model.bandwidth_frac).filter_complex_in_place(&mut thermal);
    thermal.drain(..warmup);

    // Scale so the sample mean intensity of the thermal component is exactly
    // the requested photon number.
    let mean_intensity = thermal.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
    if mean_intensity <= 0.0 {
        return Err(SimError::ZeroIntensity);
    }
    let scale = (model.thermal_photon / mean_intensity).sqrt();
    for v in thermal.iter_mut() {
        *v *= scale;
    }

    if let Some(k) = model.superbunch_k {
        let envelope = gamma_envelope(model, k, n)?;
        for (v, e) in thermal.iter_mut().zip(envelope.iter()) {
            *v *= e.sqrt();
        }
    }

    let values: Vec<Complex64> = thermal
        .into_iter()
        .map(|t| Complex64::new(alpha + t.re, t.im))
        .collect();
    Ok(FieldSeries {
        values,
        seed_used: model.seed,
    })
}

/// Slow unit-mean intensity envelope: i.i.d. gamma(shape = k, mean 1) draws
/// low-passed at a tenth of the thermal bandwidth, clamped at zero and
/// renormalized to unit sample mean.
fn gamma_envelope(model: &AqnModel, k: f64, n: usize) -> Result<Vec<f64>, SimError> {
    let cutoff = model.bandwidth_frac / 10.0;
    let warmup = Lowpass4::warmup_len(cutoff);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(model.seed, ENVELOPE_STREAM));
    let gamma = Gamma::new(k, 1.0 / k).expect("validated shape");
    let mut env: Vec<f64> = (0..n + warmup).map(|_| gamma.sample(&mut rng)).collect();
    Lowpass4::new(cutoff).filter_in_place(&mut env);
    env.drain(..warmup);
    for e in env.iter_mut() {
        *e = e.max(0.0);
    }
    let mean = env.iter().sum::<f64>() / n as f64;
    if mean <= 0.0 {
        return Err(SimError::ZeroIntensity);
    }
    for e in env.iter_mut() {
        *e /= mean;
    }
    Ok(env)
}

/// Ground-truth g²(0) of the model when it has a closed form.
///
/// Without the envelope the field is a displaced thermal state and
///
/// ```text
/// g²(0) = 1 + (n̄² + 2|α|²n̄) / (|α|² + n̄)²
/// ```
///
/// which spans 1 (pure coherent) to 2 (pure thermal). With the envelope
/// present there is no closed form for the filtered modulation; `Ok(None)` is
/// returned and [`empirical_field_g2`] is the oracle.
pub fn analytic_g2(model: &AqnModel) -> Result<Option<f64>, SimError> {
    let c = model.coherent_photon;
    let t = model.thermal_photon;
    if c + t <= 0.0 {
        return Err(SimError::ZeroPhotonNumber);
    }
    if model.superbunch_k.is_some() {
        return Ok(None);
    }
    let total = c + t;
    Ok(Some(1.0 + (t * t + 2.0 * c * t) / (total * total)))
}

/// Empirical zero-delay correlation of a field: mean(|v|⁴) / mean(|v|²)².
pub fn empirical_field_g2(field: &FieldSeries) -> Result<f64, SimError> {
    if field.values.is_empty() {
        return Err(SimError::ZeroIntensity);
    }
    let n = field.values.len() as f64;
    let mut sum2 = 0.0;
    let mut sum4 = 0.0;
    for v in &field.values {
        let i = v.norm_sqr();
        sum2 += i;
        sum4 += i * i;
    }
    let mean2 = sum2 / n;
    if mean2 <= 0.0 {
        return Err(SimError::ZeroIntensity);
    }
    Ok((sum4 / n) / (mean2 * mean2))
}

/// Balanced-detector readout of a field with a free-running LO: a fresh
/// uniform phase per sample plus shot noise. Deterministic for a fixed seed.
///
/// The record's sample rate is set to 1.0 (frequencies in the simulation are
/// fractions of the sample rate); callers may overwrite the metadata.
pub fn field_to_current(field: &FieldSeries, n_lo: f64, seed: u64) -> QuadratureRecord {
    assert!(n_lo > 0.0, "n_lo must be positive");
    let mut phase_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, PHASE_STREAM));
    let mut shot_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SHOT_STREAM));
    let gain = 2.0 * n_lo.sqrt();
    let shot = n_lo.sqrt();
    let samples = field
        .values
        .iter()
        .map(|v| {
            let phi = phase_rng.random::<f64>() * TAU;
            let xi: f64 = StandardNormal.sample(&mut shot_rng);
            gain * (v.re * phi.cos() + v.im * phi.sin()) + shot * xi
        })
        .collect();
    QuadratureRecord::new(samples, 1.0)
}

/// [`field_to_current`] with the LO phase frozen at `phase`. Exists to
/// demonstrate that the moment relations rely on phase averaging: with a
/// constant phase and a nonzero coherent amplitude the inversion no longer
/// matches the field statistics.
pub fn field_to_current_fixed_phase(
    field: &FieldSeries,
    n_lo: f64,
    phase: f64,
    seed: u64,
) -> QuadratureRecord {
    assert!(n_lo > 0.0, "n_lo must be positive");
    let mut shot_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SHOT_STREAM));
    let gain = 2.0 * n_lo.sqrt();
    let shot = n_lo.sqrt();
    let (sin_p, cos_p) = phase.sin_cos();
    let samples = field
        .values
        .iter()
        .map(|v| {
            let xi: f64 = StandardNormal.sample(&mut shot_rng);
            gain * (v.re * cos_p + v.im * sin_p) + shot * xi
        })
        .collect();
    QuadratureRecord::new(samples, 1.0)
}

/// Pure shot-noise record √N_LO·ξ (signal port blocked). Equals the vacuum
/// limit of [`field_to_current`] for the same seed.
pub fn simulate_vacuum(n_lo: f64, n: usize, seed: u64) -> QuadratureRecord {
    assert!(n_lo > 0.0, "n_lo must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SHOT_STREAM));
    let shot = n_lo.sqrt();
    let samples = (0..n)
        .map(|_| {
            let xi: f64 = StandardNormal.sample(&mut rng);
            shot * xi
        })
        .collect();
    QuadratureRecord::new(samples, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homodyne::accumulate_moments;

    fn model(coherent: f64, thermal: f64) -> AqnModel {
        AqnModel {
            coherent_photon: coherent,
            thermal_photon: thermal,
            bandwidth_frac: 0.25,
            superbunch_k: None,
            n_lo: 1.0,
            seed: 99,
        }
    }

    #[test]
    fn coherent_only_field_is_constant() {
        let f = simulate_field(&model(2.25, 0.0), 100).unwrap();
        assert!(f.values.iter().all(|v| *v == Complex64::new(1.5, 0.0)));
    }

    #[test]
    fn zero_photons_rejected() {
        assert_eq!(
            simulate_field(&model(0.0, 0.0), 10),
            Err(SimError::ZeroPhotonNumber)
        );
        assert_eq!(analytic_g2(&model(0.0, 0.0)), Err(SimError::ZeroPhotonNumber));
    }

    #[test]
    fn invalid_bandwidth_rejected() {
        let mut m = model(1.0, 1.0);
        m.bandwidth_frac = 0.0;
        assert_eq!(simulate_field(&m, 10), Err(SimError::InvalidBandwidth(0.0)));
        m.bandwidth_frac = 0.7;
        assert_eq!(simulate_field(&m, 10), Err(SimError::InvalidBandwidth(0.7)));
    }

    #[test]
    fn field_mean_intensity_tracks_photon_number() {
        let f = simulate_field(&model(1.0, 2.0), 200_000).unwrap();
        let mean: f64 =
            f.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / f.values.len() as f64;
        // Thermal part is normalized exactly; the coherent cross term leaves
        // a small fluctuation.
        assert!((mean - 3.0).abs() < 0.05, "mean intensity {mean}");
    }

    #[test]
    fn thermal_field_moment_ratio() {
        let f = simulate_field(&model(0.0, 1.0), 1_000_000).unwrap();
        let g2 = empirical_field_g2(&f).unwrap();
        assert!((g2 - 2.0).abs() < 0.02, "g2 = {g2}");
    }

    #[test]
    fn displaced_thermal_moment_ratio() {
        let f = simulate_field(&model(1.0, 1.0), 1_000_000).unwrap();
        let g2 = empirical_field_g2(&f).unwrap();
        assert!((g2 - 1.75).abs() < 0.02, "g2 = {g2}");
    }

    #[test]
    fn analytic_limits() {
        assert_eq!(analytic_g2(&model(3.7, 0.0)).unwrap(), Some(1.0));
        assert_eq!(analytic_g2(&model(0.0, 0.42)).unwrap(), Some(2.0));
        assert_eq!(analytic_g2(&model(1.0, 1.0)).unwrap(), Some(1.75));
        // (1, 4): 1 + (16 + 8)/25.
        let g = analytic_g2(&model(1.0, 4.0)).unwrap().unwrap();
        assert!((g - 1.96).abs() < 1e-12);
    }

    #[test]
    fn analytic_verified_by_monte_carlo() {
        // Displaced complex Gaussian, no filtering: direct draws from the
        // model distribution, 1e7 samples.
        use rand_distr::StandardNormal;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let mut sum2 = 0.0;
        let mut sum4 = 0.0;
        let n = 10_000_000;
        for _ in 0..n {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let v = Complex64::new(1.0 + re * half, im * half);
            let i = v.norm_sqr();
            sum2 += i;
            sum4 += i * i;
        }
        let mean2 = sum2 / n as f64;
        let g2 = (sum4 / n as f64) / (mean2 * mean2);
        assert!((g2 - 1.75).abs() < 0.005, "g2 = {g2}");
    }

    #[test]
    fn analytic_unavailable_with_envelope() {
        let mut m = model(0.0, 1.0);
        m.superbunch_k = Some(1.0);
        assert_eq!(analytic_g2(&m).unwrap(), None);
    }

    #[test]
    fn empirical_constant_field() {
        let f = FieldSeries {
            values: vec![Complex64::new(0.3, -0.4); 64],
            seed_used: 0,
        };
        assert!((empirical_field_g2(&f).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_two_point_intensity() {
        // Intensities {0, 2} equiprobable: mean 1, second moment 2.
        let values: Vec<Complex64> = (0..1000)
            .map(|i| {
                if i % 2 == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(2.0f64.sqrt(), 0.0)
                }
            })
            .collect();
        let f = FieldSeries {
            values,
            seed_used: 0,
        };
        assert!((empirical_field_g2(&f).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_superbunches() {
        let mut m = model(0.0, 1.0);
        m.superbunch_k = Some(0.5);
        m.bandwidth_frac = 0.4;
        let f = simulate_field(&m, 400_000).unwrap();
        let g2 = empirical_field_g2(&f).unwrap();
        assert!(g2 > 2.05, "g2 = {g2}");
    }

    #[test]
    fn vacuum_record_statistics() {
        let rec = simulate_vacuum(1.0, 1_000_000, 3);
        let m = accumulate_moments(&rec).unwrap();
        assert!((m.m2() - 1.0).abs() < 0.005);
        let kurtosis = m.m4() / (m.m2() * m.m2());
        assert!((kurtosis - 3.0).abs() < 0.03, "kurtosis {kurtosis}");
    }

    #[test]
    fn vacuum_is_deterministic() {
        let a = simulate_vacuum(2.0, 10_000, 5);
        let b = simulate_vacuum(2.0, 10_000, 5);
        assert_eq!(a, b);
    }

    #[test]
    fn field_is_deterministic() {
        let a = simulate_field(&model(1.0, 1.0), 10_000).unwrap();
        let b = simulate_field(&model(1.0, 1.0), 10_000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_field_gives_pure_shot_noise() {
        let f = FieldSeries {
            values: vec![Complex64::new(0.0, 0.0); 1_000_000],
            seed_used: 0,
        };
        let rec = field_to_current(&f, 2.0, 17);
        let m = accumulate_moments(&rec).unwrap();
        assert!((m.m2() - 2.0).abs() < 0.01, "m2 = {}", m.m2());
    }

    #[test]
    fn thermal_current_second_moment() {
        // n̄ = 1, N_LO = 1: ⟨ΔI²⟩ = N(2n̄+1) = 3.
        let f = simulate_field(&model(0.0, 1.0), 1_000_000).unwrap();
        let rec = field_to_current(&f, 1.0, 21);
        let m = accumulate_moments(&rec).unwrap();
        assert!((m.m2() - 3.0).abs() < 0.05, "m2 = {}", m.m2());
    }

    #[test]
    fn coherent_current_fourth_moment() {
        // |α|² = 1, N_LO = 1: ⟨ΔI⁴⟩ = 6·1 + 12·1 + 3 = 21.
        let f = simulate_field(&model(1.0, 0.0), 1_000_000).unwrap();
        let rec = field_to_current(&f, 1.0, 23);
        let m = accumulate_moments(&rec).unwrap();
        assert!((m.m4() - 21.0).abs() < 0.3, "m4 = {}", m.m4());
    }
}
