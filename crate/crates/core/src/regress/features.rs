//! Summary features for the baseline regressors.
//!
//! The trees and the linear SVR consume an 8-dimensional compression of each
//! window instead of the raw 5000 samples: central moments 2–4, mean absolute
//! deviation, min, max, lag-1 autocorrelation, and spectral centroid.

use std::cell::RefCell;

use rustfft::{num_complex::Complex, FftPlanner};

pub const SUMMARY_FEATURE_COUNT: usize = 8;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Computes the 8 summary features of a raw or standardized window.
pub fn summary_features(window: &[f64]) -> [f64; SUMMARY_FEATURE_COUNT] {
    let n = window.len();
    assert!(n >= 2, "window too short for features");
    let nf = n as f64;
    let mean = window.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    let mut mad = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &x in window {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        mad += d.abs();
        min = min.min(x);
        max = max.max(x);
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    mad /= nf;

    let lag1 = if m2 > 0.0 {
        let mut acc = 0.0;
        for i in 0..n - 1 {
            acc += (window[i] - mean) * (window[i + 1] - mean);
        }
        acc / ((n - 1) as f64) / m2
    } else {
        0.0
    };

    let centroid = spectral_centroid(window, mean);

    [m2, m3, m4, mad, min, max, lag1, centroid]
}

/// Power-weighted mean frequency in units of the sample rate (0..0.5),
/// DC excluded.
fn spectral_centroid(window: &[f64], mean: f64) -> f64 {
    let n = window.len();
    let mut buf: Vec<Complex<f64>> = window
        .iter()
        .map(|&x| Complex::new(x - mean, 0.0))
        .collect();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(n);
        fft.process(&mut buf);
    });
    let mut power_sum = 0.0;
    let mut weighted = 0.0;
    for (k, v) in buf.iter().enumerate().take(n / 2 + 1).skip(1) {
        let p = v.norm_sqr();
        let f = k as f64 / n as f64;
        power_sum += p;
        weighted += p * f;
    }
    if power_sum > 0.0 {
        weighted / power_sum
    } else {
        0.0
    }
}

/// Per-feature z-score fitted on training features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl FeatureScaler {
    pub fn fit(features: &[Vec<f64>]) -> Self {
        assert!(!features.is_empty(), "no features to fit");
        let dim = features[0].len();
        let n = features.len() as f64;
        let mut means = vec![0.0; dim];
        for f in features {
            for (m, v) in means.iter_mut().zip(f.iter()) {
                *m += v;
            }
        }
        for m in means.iter_mut() {
            *m /= n;
        }
        let mut stds = vec![0.0; dim];
        for f in features {
            for ((s, v), m) in stds.iter_mut().zip(f.iter()).zip(means.iter()) {
                *s += (v - m) * (v - m);
            }
        }
        for s in stds.iter_mut() {
            *s = (*s / n).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Self { means, stds }
    }

    pub fn transform(&self, features: &[Vec<f64>]) -> Vec<Vec<f64>> {
        features
            .iter()
            .map(|f| {
                f.iter()
                    .zip(self.means.iter().zip(self.stds.iter()))
                    .map(|(v, (m, s))| (v - m) / s)
                    .collect()
            })
            .collect()
    }
}
