//! Forecasting with a window chosen from the local partial autocorrelation.

use serde::{Deserialize, Serialize};

use super::gyw::{build_gyw, solve_step};
use super::{check_common, ForecastResult, Method};
use crate::error::{Error, Result};
use crate::local::{local_acv, lpacf_windowed, select_p, WindowConfig};
use crate::spectral::{estimate_spectrum, SpectralOptions};

/// Shortest series the pipeline accepts.
pub const MIN_SERIES_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ForlapOptions {
    pub spectral: SpectralOptions,
    /// lpacf window; `None` uses [`WindowConfig::default_for`].
    pub window: Option<WindowConfig>,
    /// Rescale the predictor weights to unit norm.
    pub regularize: bool,
    /// Fixed number of past observations, bypassing the lpacf choice.
    pub p: Option<usize>,
}

/// Forecasts `h` steps past the end of `series`.
///
/// `p` is the largest significant lpacf lag at the last observation; the
/// predictor for each step solves its own generalised Yule-Walker system
/// over the last `p` observations.
pub fn forecast_forlap(series: &[f64], h: usize, alpha: f64, options: &ForlapOptions) -> Result<ForecastResult> {
    let n = series.len();
    check_common(n, MIN_SERIES_LEN, h, alpha)?;
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::argument("series contains non-finite values"));
    }

    let p_hat = match options.p {
        Some(0) => return Err(Error::argument("p must be at least 1")),
        Some(p) => p,
        None => {
            let window = options.window.unwrap_or_else(|| WindowConfig::default_for(n));
            let z = (n - 1) as f64 / n as f64;
            let est = lpacf_windowed(series, &window, z, &options.spectral).map_err(|e| e.in_stage("lpacf"))?;
            select_p(&est)
        }
    };

    let fit = estimate_spectrum(series, &options.spectral).map_err(|e| e.in_stage("spectral"))?;
    let bound = fit.basis.table().support_bound();
    let p = p_hat.min(n - 1).min(bound.saturating_sub(h - 1)).max(1);
    if p + h - 1 > bound {
        return Err(Error::argument(format!(
            "horizon {h} exceeds the autocorrelation-wavelet support bound {bound}"
        )));
    }
    let lacv = local_acv(&fit.ews, fit.basis.table(), p + h - 1)?;
    let system = build_gyw(&lacv, n, p, h)?;

    let mut points = Vec::with_capacity(h);
    let mut mspe = Vec::with_capacity(h);
    for step in 0..h {
        let sol = solve_step(&system, step, options.regularize).map_err(|e| e.in_stage("gyw"))?;
        points.push(sol.predict(series));
        mspe.push(sol.mspe);
    }
    Ok(ForecastResult::new(Method::Forlap, points, mspe, alpha, p, options.regularize))
}
