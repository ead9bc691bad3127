//! Forecasters: the lpacf-driven LSW forecaster, the grid-search LSW
//! forecaster and stationary baselines, all returning Gaussian prediction
//! intervals.

mod baseline;
mod forlap;
mod fvbvs;
mod gyw;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local::normal_quantile;

pub use baseline::{forecast_baseline_ar, forecast_baseline_es, forecast_baseline_tvar, ArFit};
pub use forlap::{forecast_forlap, ForlapOptions};
pub use fvbvs::{forecast_fvbvs, FvbvsConfig, Kernel};
pub use gyw::{build_gyw, solve_gyw, solve_step, GywSolution, GywSystem};

/// Forecasting method identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Forlap,
    Fvbvs,
    Ar,
    Es,
    Tvar,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Forlap, Method::Fvbvs, Method::Ar, Method::Es, Method::Tvar];

    pub fn name(self) -> &'static str {
        match self {
            Method::Forlap => "forlap",
            Method::Fvbvs => "fvbvs",
            Method::Ar => "ar",
            Method::Es => "es",
            Method::Tvar => "tvar",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown method '{s}' (expected forlap, fvbvs, ar, es or tvar)")))
    }
}

/// Point forecasts with Gaussian prediction intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub method: Method,
    pub points: Vec<f64>,
    pub mspe: Vec<f64>,
    pub intervals: Vec<[f64; 2]>,
    pub alpha: f64,
    pub p_used: usize,
    pub regularized: bool,
}

impl ForecastResult {
    /// Builds intervals `point +- Phi^{-1}(1 - alpha / 2) sqrt(mspe)`.
    pub fn new(method: Method, points: Vec<f64>, mspe: Vec<f64>, alpha: f64, p_used: usize, regularized: bool) -> Self {
        let intervals = points
            .iter()
            .zip(&mspe)
            .map(|(&x, &v)| gaussian_interval(x, v, 1.0 - alpha))
            .collect();
        Self {
            method,
            points,
            mspe,
            intervals,
            alpha,
            p_used,
            regularized,
        }
    }

    pub fn horizon(&self) -> usize {
        self.points.len()
    }

    /// Interval for `step` (0-based) at nominal coverage `level`, from the
    /// same prediction error.
    pub fn interval_at(&self, step: usize, level: f64) -> [f64; 2] {
        gaussian_interval(self.points[step], self.mspe[step], level)
    }
}

/// `[x - z sqrt(v), x + z sqrt(v)]` with `z = Phi^{-1}((1 + level) / 2)`.
pub fn gaussian_interval(point: f64, mspe: f64, level: f64) -> [f64; 2] {
    let half = normal_quantile(0.5 + level / 2.0) * mspe.max(0.0).sqrt();
    [point - half, point + half]
}

pub(crate) fn check_common(len: usize, min_len: usize, h: usize, alpha: f64) -> Result<()> {
    if len < min_len {
        return Err(Error::argument(format!("series has {len} observations, at least {min_len} required")));
    }
    if h == 0 {
        return Err(Error::argument("horizon must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::argument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Anything that turns a history into an `h`-step forecast.
pub trait Forecaster {
    fn method(&self) -> Method;
    fn forecast(&self, history: &[f64], h: usize, alpha: f64) -> Result<ForecastResult>;
}

/// A configured forecasting method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum MethodConfig {
    Forlap(ForlapOptions),
    Fvbvs(FvbvsConfig),
    Ar,
    Es,
    Tvar { order: usize, window: Option<usize> },
}

impl MethodConfig {
    /// Default configuration of `method`.
    pub fn default_for(method: Method) -> Self {
        match method {
            Method::Forlap => MethodConfig::Forlap(ForlapOptions::default()),
            Method::Fvbvs => MethodConfig::Fvbvs(FvbvsConfig::default()),
            Method::Ar => MethodConfig::Ar,
            Method::Es => MethodConfig::Es,
            Method::Tvar => MethodConfig::Tvar { order: 2, window: None },
        }
    }
}

impl Forecaster for MethodConfig {
    fn method(&self) -> Method {
        match self {
            MethodConfig::Forlap(_) => Method::Forlap,
            MethodConfig::Fvbvs(_) => Method::Fvbvs,
            MethodConfig::Ar => Method::Ar,
            MethodConfig::Es => Method::Es,
            MethodConfig::Tvar { .. } => Method::Tvar,
        }
    }

    fn forecast(&self, history: &[f64], h: usize, alpha: f64) -> Result<ForecastResult> {
        match self {
            MethodConfig::Forlap(o) => forecast_forlap(history, h, alpha, o),
            MethodConfig::Fvbvs(c) => forecast_fvbvs(history, c, h, alpha),
            MethodConfig::Ar => forecast_baseline_ar(history, h, alpha),
            MethodConfig::Es => forecast_baseline_es(history, h, alpha),
            MethodConfig::Tvar { order, window } => forecast_baseline_tvar(history, *order, *window, h, alpha),
        }
    }
}
