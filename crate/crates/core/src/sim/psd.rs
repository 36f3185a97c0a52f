//! Welch power spectral density estimation.
//!
//! Half-overlapping Hann-windowed segments, averaged periodogram, one-sided
//! output normalized so the integrated spectrum equals the record variance
//! (window gain corrected).

use rustfft::{num_complex::Complex, FftPlanner};

use crate::homodyne::QuadratureRecord;

use super::SimError;

/// Estimates the one-sided PSD of a record.
///
/// `segment_len` must be a power of two no longer than the record. Returns
/// (frequency_hz, power density) pairs at frequencies 0..=fs/2 spaced by
/// fs/segment_len; power density is in (sample unit)² per Hz.
pub fn estimate_psd(
    record: &QuadratureRecord,
    segment_len: usize,
) -> Result<Vec<(f64, f64)>, SimError> {
    let n = record.samples.len();
    if segment_len > n {
        return Err(SimError::SegmentTooLong {
            segment_len,
            record_len: n,
        });
    }
    if segment_len < 2 || !segment_len.is_power_of_two() {
        return Err(SimError::SegmentNotPowerOfTwo(segment_len));
    }
    let fs = record.sample_rate_hz;
    let mean = record.samples.iter().sum::<f64>() / n as f64;

    let window: Vec<f64> = (0..segment_len)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / segment_len as f64).cos()))
        .collect();
    let window_power: f64 = window.iter().map(|w| w * w).sum();

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(segment_len);

    let hop = segment_len / 2;
    let n_bins = segment_len / 2 + 1;
    let mut acc = vec![0.0f64; n_bins];
    let mut n_segments = 0usize;
    let mut buf = vec![Complex::new(0.0, 0.0); segment_len];
    let mut offset = 0;
    while offset + segment_len <= n {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex::new((record.samples[offset + i] - mean) * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
        n_segments += 1;
        offset += hop;
    }

    let norm = 1.0 / (fs * window_power * n_segments as f64);
    let df = fs / segment_len as f64;
    Ok((0..n_bins)
        .map(|k| {
            let one_sided = if k == 0 || k == n_bins - 1 { 1.0 } else { 2.0 };
            (k as f64 * df, acc[k] * norm * one_sided)
        })
        .collect())
}

/// Frequency below which 80% of the spectral power lies (the effective
/// bandwidth under the 80%-power definition).
pub fn effective_bandwidth_80(psd: &[(f64, f64)]) -> f64 {
    if psd.len() < 2 {
        return 0.0;
    }
    let df = psd[1].0 - psd[0].0;
    let total: f64 = psd.iter().map(|(_, p)| p * df).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut cum = 0.0;
    for (f, p) in psd {
        cum += p * df;
        if cum >= 0.8 * total {
            return *f;
        }
    }
    psd.last().unwrap().0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homodyne::accumulate_moments;
    use crate::sim::{field_to_current_fixed_phase, simulate_field, simulate_vacuum, AqnModel};

    #[test]
    fn rejects_bad_segment_lengths() {
        let rec = simulate_vacuum(1.0, 1024, 1);
        assert!(matches!(
            estimate_psd(&rec, 2048),
            Err(SimError::SegmentTooLong { .. })
        ));
        assert_eq!(
            estimate_psd(&rec, 300),
            Err(SimError::SegmentNotPowerOfTwo(300))
        );
    }

    #[test]
    fn white_noise_is_flat_and_integrates_to_variance() {
        let rec = simulate_vacuum(1.0, 1 << 18, 2);
        let psd = estimate_psd(&rec, 1024).unwrap();
        let df = psd[1].0 - psd[0].0;
        let total: f64 = psd.iter().map(|(_, p)| p * df).sum();
        let var = accumulate_moments(&rec).unwrap().m2();
        assert!(
            (total / var - 1.0).abs() < 0.05,
            "integrated {total} vs variance {var}"
        );
        // Flat within ±1.5 dB across interior bins.
        let level = 2.0; // one-sided density of unit-variance white noise
        for (f, p) in &psd[1..psd.len() - 1] {
            let db = 10.0 * (p / level).log10();
            assert!(db.abs() < 1.5, "bin at {f}: {db} dB");
        }
    }

    #[test]
    fn band_limited_noise_rolls_off() {
        // A free-running per-sample LO phase whitens the photocurrent, so
        // spectra are taken with the phase held fixed; thermal fields are
        // phase-symmetric and their statistics are unaffected.
        let m = AqnModel {
            coherent_photon: 0.0,
            thermal_photon: 4.0,
            bandwidth_frac: 0.1,
            superbunch_k: None,
            n_lo: 1.0,
            seed: 5,
        };
        let field = simulate_field(&m, 1 << 17).unwrap();
        let rec = field_to_current_fixed_phase(&field, 1.0, 0.0, 6);
        let psd = estimate_psd(&rec, 1024).unwrap();
        let power_at = |target: f64| -> f64 {
            psd.iter()
                .min_by(|a, b| {
                    (a.0 - target).abs().partial_cmp(&(b.0 - target).abs()).unwrap()
                })
                .unwrap()
                .1
        };
        let low = power_at(0.05);
        let high = power_at(0.4);
        let ratio_db = 10.0 * (low / high).log10();
        assert!(ratio_db > 6.0, "in-band vs out-of-band: {ratio_db} dB");
    }

    #[test]
    fn sinusoid_dominates_its_bin() {
        let n = 1 << 14;
        let f0 = 0.125;
        let samples: Vec<f64> = (0..n)
            .map(|i| (std::f64::consts::TAU * f0 * i as f64).sin())
            .collect();
        let rec = QuadratureRecord::new(samples, 1.0);
        let psd = estimate_psd(&rec, 1024).unwrap();
        let peak = psd
            .iter()
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        assert!((peak.0 - f0).abs() < 2.0 / 1024.0, "peak at {}", peak.0);
        let total: f64 = psd.iter().map(|(_, p)| p).sum();
        assert!(peak.1 / total > 0.3);
    }

    #[test]
    fn effective_bandwidth_tracks_cutoff() {
        let m = AqnModel {
            coherent_photon: 0.0,
            thermal_photon: 1.0,
            bandwidth_frac: 0.1,
            superbunch_k: None,
            n_lo: 1.0,
            seed: 9,
        };
        let field = simulate_field(&m, 1 << 17).unwrap();
        let samples: Vec<f64> = field.values.iter().map(|v| v.re).collect();
        let rec = QuadratureRecord::new(samples, 1.0);
        let psd = estimate_psd(&rec, 2048).unwrap();
        let bw = effective_bandwidth_80(&psd);
        // 80% power of a 4th-order lowpass sits just below the −3 dB point.
        assert!(bw > 0.05 && bw < 0.12, "bw = {bw}");
    }
}
