//! Local autocovariance from an evolutionary wavelet spectrum, the windowed
//! local partial autocorrelation, and the choice of forecasting window `p`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::linalg::factor_with_ridge;
use crate::spectral::{estimate_spectrum, EwsEstimate, SpectralOptions};
use crate::wavelet::AcWaveletTable;

/// `c(k / T, tau)` on time columns `k = 0..=t` and lags `0..=tau_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalAcv {
    // values[k][tau]
    values: Vec<Vec<f64>>,
    tau_max: usize,
}

impl LocalAcv {
    /// Builds from per-time lag vectors, all of length `tau_max + 1`.
    pub fn from_values(values: Vec<Vec<f64>>) -> Result<Self> {
        let width = values.first().map_or(0, Vec::len);
        if width == 0 || values.iter().any(|v| v.len() != width) {
            return Err(Error::argument("local autocovariance rows must be non-empty and equal length"));
        }
        Ok(Self {
            values,
            tau_max: width - 1,
        })
    }

    /// The same autocovariance `acv[0..=tau_max]` at every one of `columns`
    /// times.
    pub fn stationary(acv: &[f64], columns: usize) -> Result<Self> {
        Self::from_values(vec![acv.to_vec(); columns])
    }

    pub fn tau_max(&self) -> usize {
        self.tau_max
    }

    pub fn columns(&self) -> usize {
        self.values.len()
    }

    /// Value at integer time column `k` and lag `tau` (either sign).
    pub fn get(&self, k: usize, tau: i64) -> f64 {
        self.values[k][tau.unsigned_abs() as usize]
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    /// `c(time / T, tau)` where `time = twice_time / 2` may be a
    /// half-integer. Half-integer times average the two neighbouring
    /// columns; times past the last column reuse it and negative times use
    /// column 0. Lags beyond `tau_max` are zero.
    pub fn at_twice_time(&self, twice_time: i64, tau: i64) -> f64 {
        let lag = tau.unsigned_abs() as usize;
        if lag > self.tau_max {
            return 0.0;
        }
        let last = self.values.len() as i64 - 1;
        let col = |k: i64| self.values[k.clamp(0, last) as usize][lag];
        if twice_time.rem_euclid(2) == 0 {
            col(twice_time / 2)
        } else {
            let lo = twice_time.div_euclid(2);
            0.5 * (col(lo) + col(lo + 1))
        }
    }

    /// Entry `(m, n)` of the local covariance matrix: `c((m + n) / 2T, m - n)`.
    pub fn pair(&self, m: i64, n: i64) -> f64 {
        self.at_twice_time(m + n, m - n)
    }
}

/// `c(z, tau) = sum_j S_j(z) Psi_j(tau)` at every spectrum column.
pub fn local_acv(ews: &EwsEstimate, table: &AcWaveletTable, tau_max: usize) -> Result<LocalAcv> {
    if ews.levels() != table.levels() {
        return Err(Error::argument(format!(
            "spectrum has {} scales, autocorrelation table has {}",
            ews.levels(),
            table.levels()
        )));
    }
    if tau_max > table.support_bound() {
        return Err(Error::argument(format!(
            "tau_max = {tau_max} exceeds the autocorrelation-wavelet support bound {}",
            table.support_bound()
        )));
    }
    let values = (0..ews.columns())
        .map(|k| {
            (0..=tau_max)
                .map(|tau| {
                    (1..=ews.levels())
                        .map(|j| ews.get(j, k) * table.get(j, tau as i64))
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(LocalAcv { values, tau_max })
}

/// Window and significance settings for the windowed lpacf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    /// Odd window length `W`.
    pub window_length: usize,
    pub tau_max: usize,
    pub alpha: f64,
}

impl WindowConfig {
    /// `W` = largest odd integer `<= T / 3`,
    /// `tau_max = min(floor(10 log10 T), (W - 1) / 2)`, `alpha = 0.05`.
    pub fn default_for(len: usize) -> Self {
        let third = (len / 3).max(3);
        let window_length = if third % 2 == 1 { third } else { third - 1 };
        let by_len = (10.0 * (len.max(1) as f64).log10()).floor() as usize;
        let tau_max = by_len.min((window_length - 1) / 2).max(1);
        Self {
            window_length,
            tau_max,
            alpha: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau_max == 0 {
            return Err(Error::argument("tau_max must be at least 1"));
        }
        if self.window_length % 2 == 0 {
            return Err(Error::argument(format!("window length must be odd, got {}", self.window_length)));
        }
        if self.window_length < 2 * self.tau_max + 1 {
            return Err(Error::argument(format!(
                "window length {} is shorter than 2 * tau_max + 1 = {}",
                self.window_length,
                2 * self.tau_max + 1
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::argument(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Windowed local partial autocorrelation at one rescaled time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpacfEstimate {
    pub z: f64,
    /// `q(z, tau)` for `tau = 1..=tau_max` (index `tau - 1`).
    pub values: Vec<f64>,
    pub ci_halfwidth: Vec<f64>,
    pub window_length: usize,
    /// Observations actually inside the window.
    pub effective_window: usize,
    pub alpha: f64,
    /// Lags whose raw value fell outside `[-1, 1]` beyond `1e-8`.
    pub clipped: usize,
}

impl LpacfEstimate {
    /// Builds an estimate from given values; the half-width follows
    /// [`confidence_halfwidth`].
    pub fn new(z: f64, values: Vec<f64>, window_length: usize, effective_window: usize, alpha: f64) -> Self {
        let h = confidence_halfwidth(alpha, effective_window);
        let ci_halfwidth = vec![h; values.len()];
        Self {
            z,
            values,
            ci_halfwidth,
            window_length,
            effective_window,
            alpha,
            clipped: 0,
        }
    }

    pub fn tau_max(&self) -> usize {
        self.values.len()
    }
}

/// `Phi^{-1}(1 - alpha / 2) / sqrt(W_eff)`.
pub fn confidence_halfwidth(alpha: f64, effective_window: usize) -> f64 {
    normal_quantile(1.0 - alpha / 2.0) / (effective_window as f64).sqrt()
}

pub(crate) fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Per-lag `(lower, upper)` bounds around the lpacf values.
pub fn lpacf_confidence(estimate: &LpacfEstimate) -> Vec<(f64, f64)> {
    estimate
        .values
        .iter()
        .zip(&estimate.ci_halfwidth)
        .map(|(q, h)| (q - h, q + h))
        .collect()
}

/// Largest lag whose lpacf magnitude exceeds its half-width; 1 when no lag
/// is significant.
pub fn select_p(estimate: &LpacfEstimate) -> usize {
    estimate
        .values
        .iter()
        .zip(&estimate.ci_halfwidth)
        .enumerate()
        .filter(|(_, (q, h))| q.abs() > **h)
        .map(|(i, _)| i + 1)
        .max()
        .unwrap_or(1)
}

/// Which side of the anchor the lagged partner lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOrientation {
    /// Pairs `(anchor - tau, anchor)`.
    Backward,
    /// Pairs `(anchor, anchor + tau)`.
    Forward,
}

/// Solution and prediction error of predicting `X_target` linearly from
/// `X_s, s in predictors`, under the local covariance `lacv`.
fn local_prediction(lacv: &LocalAcv, predictors: &[i64], target: i64, ridge_scale: f64) -> Result<(Vec<f64>, f64)> {
    let var = lacv.pair(target, target);
    if predictors.is_empty() {
        return Ok((Vec::new(), var));
    }
    let p = predictors.len();
    let b = DMatrix::from_fn(p, p, |r, c| lacv.pair(predictors[r], predictors[c]));
    let rhs = DVector::from_fn(p, |r, _| lacv.pair(predictors[r], target));
    let (chol, _, _) = factor_with_ridge(&b, [1e-8 * ridge_scale])
        .ok_or_else(|| Error::numerical("lpacf", format!("singular local Yule-Walker system of order {p}")))?;
    let w = chol.solve(&rhs);
    let mspe = var - w.dot(&rhs);
    Ok((w.iter().copied().collect(), mspe))
}

/// Local partial autocorrelation at lags `1..=tau_max` from a local
/// autocovariance: the last local Yule-Walker coefficient times
/// `sqrt(backcast MSPE / forecast MSPE)`, clipped to `[-1, 1]`.
///
/// Returns the values and the number of lags that needed clipping.
pub fn lpacf_from_acv(
    lacv: &LocalAcv,
    anchor: usize,
    tau_max: usize,
    orientation: PairOrientation,
) -> Result<(Vec<f64>, usize)> {
    let anchor = anchor as i64;
    let scale = lacv.pair(anchor, anchor);
    let mut values = Vec::with_capacity(tau_max);
    let mut clipped = 0;
    if !(scale > 0.0) {
        // no local variance: nothing is correlated
        return Ok((vec![0.0; tau_max], 0));
    }
    for tau in 1..=tau_max as i64 {
        let (lo, hi) = match orientation {
            PairOrientation::Backward => (anchor - tau, anchor),
            PairOrientation::Forward => (anchor, anchor + tau),
        };
        let full: Vec<i64> = (lo..hi).collect();
        let (phi, _) = local_prediction(lacv, &full, hi, scale)?;
        let last = phi[0]; // weight on X_lo
        let inner: Vec<i64> = (lo + 1..hi).collect();
        let (_, forward_err) = local_prediction(lacv, &inner, hi, scale)?;
        let (_, backward_err) = local_prediction(lacv, &inner, lo, scale)?;
        let factor = if forward_err > 0.0 && backward_err > 0.0 {
            (backward_err / forward_err).sqrt()
        } else {
            1.0
        };
        let q = last * factor;
        if q.abs() > 1.0 + 1e-8 {
            clipped += 1;
        }
        values.push(q.clamp(-1.0, 1.0));
    }
    Ok((values, clipped))
}

/// Windowed lpacf at rescaled time `z`.
///
/// The window of `W` observations is centred on `[zT]` and shifted inwards
/// where it would leave the series. The spectrum is estimated on the window
/// segment alone, smoothed over the widest admissible bandwidth, and the
/// resulting local autocovariance at `[zT]` is taken as constant across the
/// window before [`lpacf_from_acv`] is applied.
pub fn lpacf_windowed(series: &[f64], config: &WindowConfig, z: f64, spectral: &SpectralOptions) -> Result<LpacfEstimate> {
    config.validate()?;
    let n = series.len();
    if !(z > 0.0 && z <= 1.0) {
        return Err(Error::argument(format!("rescaled time must lie in (0, 1], got {z}")));
    }
    let width = config.window_length.min(n);
    if width < 2 * config.tau_max + 1 {
        return Err(Error::argument(format!(
            "window holds {width} observations, fewer than 2 * tau_max + 1 = {}",
            2 * config.tau_max + 1
        )));
    }
    let centre = ((z * n as f64 + 1e-9).floor() as usize).min(n - 1);
    let half = (config.window_length - 1) / 2;
    let start = centre.saturating_sub(half).min(n - width);
    let segment = &series[start..start + width];
    let anchor = centre - start;

    let options = SpectralOptions {
        levels: None,
        bandwidth: Some((width / 4).max(1)),
        ..*spectral
    };
    let fit = estimate_spectrum(segment, &options).map_err(|e| e.in_stage("lpacf"))?;
    let tau_max = config.tau_max;
    if tau_max > fit.basis.table().support_bound() {
        return Err(Error::argument(format!(
            "tau_max = {tau_max} exceeds the wavelet support available on a {width}-point window"
        )));
    }
    let lacv = local_acv(&fit.ews, fit.basis.table(), tau_max)?;
    let frozen = LocalAcv::stationary(lacv.column(anchor), tau_max + 1)?;
    let (values, clipped) = lpacf_from_acv(&frozen, tau_max, tau_max, PairOrientation::Backward)?;
    let mut estimate = LpacfEstimate::new(z, values, config.window_length, width, config.alpha);
    estimate.clipped = clipped;
    Ok(estimate)
}
