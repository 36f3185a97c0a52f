//! Fourth-order Butterworth low-pass as a cascade of two biquad sections.
//!
//! Coefficients follow the bilinear-transform cookbook recipe; the section Q
//! values 1/(2cos(π/8)) and 1/(2cos(3π/8)) place the poles on the Butterworth
//! circle, giving a maximally flat magnitude with the −3 dB point at the
//! requested cutoff. Cutoffs at or above Nyquist degenerate to a pass-through.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn lowpass(cutoff_frac: f64, q: f64) -> Self {
        let w0 = TAU * cutoff_frac;
        let alpha = w0.sin() / (2.0 * q);
        let cos_w0 = w0.cos();
        let a0 = 1.0 + alpha;
        Self {
            b0: (1.0 - cos_w0) / 2.0 / a0,
            b1: (1.0 - cos_w0) / a0,
            b2: (1.0 - cos_w0) / 2.0 / a0,
            a1: -2.0 * cos_w0 / a0,
            a2: (1.0 - alpha) / a0,
        }
    }
}

/// Direct-form-II-transposed state for one section.
#[derive(Debug, Clone, Copy, Default)]
struct BiquadState {
    s1: f64,
    s2: f64,
}

impl BiquadState {
    #[inline]
    fn step(&mut self, c: &Biquad, x: f64) -> f64 {
        let y = c.b0 * x + self.s1;
        self.s1 = c.b1 * x - c.a1 * y + self.s2;
        self.s2 = c.b2 * x - c.a2 * y;
        y
    }
}

/// A 4th-order Butterworth low-pass filter (stateless coefficient holder).
#[derive(Debug, Clone, Copy)]
pub struct Lowpass4 {
    sections: Option<[Biquad; 2]>,
}

impl Lowpass4 {
    /// `cutoff_frac` is the −3 dB frequency as a fraction of the sample rate.
    /// Values ≥ 0.5 select the pass-through (the band edge is Nyquist).
    /// Callers validate `cutoff_frac > 0`.
    pub fn new(cutoff_frac: f64) -> Self {
        if cutoff_frac >= 0.5 {
            return Self { sections: None };
        }
        let q1 = 1.0 / (2.0 * (PI / 8.0).cos());
        let q2 = 1.0 / (2.0 * (3.0 * PI / 8.0).cos());
        Self {
            sections: Some([
                Biquad::lowpass(cutoff_frac, q1),
                Biquad::lowpass(cutoff_frac, q2),
            ]),
        }
    }

    pub fn is_passthrough(&self) -> bool {
        self.sections.is_none()
    }

    /// Filters a real sequence in place, starting from zero state.
    pub fn filter_in_place(&self, data: &mut [f64]) {
        let Some(sections) = &self.sections else {
            return;
        };
        let mut st = [BiquadState::default(); 2];
        for x in data.iter_mut() {
            let mid = st[0].step(&sections[0], *x);
            *x = st[1].step(&sections[1], mid);
        }
    }

    /// Filters a complex sequence in place (real and imaginary parts run
    /// through independent states).
    pub fn filter_complex_in_place(&self, data: &mut [Complex64]) {
        let Some(sections) = &self.sections else {
            return;
        };
        let mut st_re = [BiquadState::default(); 2];
        let mut st_im = [BiquadState::default(); 2];
        for v in data.iter_mut() {
            let mid_re = st_re[0].step(&sections[0], v.re);
            let mid_im = st_im[0].step(&sections[0], v.im);
            v.re = st_re[1].step(&sections[1], mid_re);
            v.im = st_im[1].step(&sections[1], mid_im);
        }
    }

    /// Number of leading samples to discard so the zero-state transient has
    /// decayed well below the stationary level.
    pub fn warmup_len(cutoff_frac: f64) -> usize {
        if cutoff_frac >= 0.5 {
            0
        } else {
            (16.0 / cutoff_frac).ceil() as usize
        }
    }
}
