//! Uplink SIMO channel estimation over a half-wavelength uniform linear array.
//!
//! Two estimators are compared on identical received blocks:
//!
//! * the conventional least-squares estimator, which needs every antenna
//!   coefficient to be resolved from pilots, and
//! * a two-stage estimator that first finds the path angles from the
//!   covariance of pilot *and* data snapshots (Bartlett for a single path,
//!   forward-backward spatial smoothing plus MUSIC for coherent multipath),
//!   then spends a few pilots on the path gains only, through beams steered
//!   at the estimated angles.
//!
//! [`sim`] runs paired Monte Carlo trials and sweeps and lines the results up
//! against the closed-form error and SNR predictions in [`estimators`].

pub mod array;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod sim;
pub mod subspace;

pub use error::{Error, Result};

/// Complex sample type used throughout.
pub type Cx = num_complex::Complex64;
/// Column vector of complex samples.
pub type CVector = nalgebra::DVector<Cx>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<Cx>;

/// Converts a power ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}
