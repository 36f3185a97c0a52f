//! Simulation and estimation toolkit for balanced-homodyne photon-correlation
//! measurements.
//!
//! The crate is organized around three subsystems:
//!
//! * [`homodyne`] — the measurement data model: quadrature records, streaming
//!   central-moment accumulation, local-oscillator calibration, and the
//!   moment-inversion chain that turns difference-photocurrent statistics into
//!   a g²(0) estimate with an uncertainty.
//! * [`sim`] — a seed-deterministic semiclassical source model (coherent
//!   carrier plus band-limited thermal field, optional slow super-bunching
//!   envelope) with exact or empirical ground-truth g²(0), plus Welch spectral
//!   estimation.
//! * [`regress`] — a small from-scratch 1D convolutional regressor that
//!   predicts g²(0) from short quadrature windows, trained with Adam on MSE,
//!   together with random-forest and linear support-vector baselines and a
//!   binary checkpoint format.
//!
//! File formats (QWF1 waveforms, calibration JSON) live in [`io`].

pub mod homodyne;
pub mod io;
pub mod regress;
pub mod seed;
pub mod sim;

pub use homodyne::{
    accumulate_moments, calibrate_lo, g2_block_bootstrap, g2_from_moments, mean_photon_number,
    merge_moments, normally_ordered_second, G2Estimate, G2Method, HomodyneError, LoCalibration,
    MomentSet, PhotonStatistics, QuadratureRecord,
};
pub use sim::{
    analytic_g2, empirical_field_g2, estimate_psd, field_to_current,
    field_to_current_fixed_phase, simulate_field, simulate_vacuum, AqnModel, FieldSeries,
    SimError,
};
