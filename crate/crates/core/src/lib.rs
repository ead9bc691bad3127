//! Forecasting of locally stationary wavelet (LSW) processes.
//!
//! The pipeline estimates an evolutionary wavelet spectrum, turns it into a
//! local autocovariance, picks the number of past observations from the
//! local partial autocorrelation and solves generalised Yule-Walker
//! equations for the predictor and its error.

pub mod error;
pub mod evaluation;
pub mod forecast;
pub mod local;
pub mod simulation;
pub mod spectral;
pub mod wavelet;

mod linalg;

pub use error::{Error, Result};
