//! Stationary comparators: AR with AIC order choice, simple exponential
//! smoothing and a trailing-window least-squares AR.

use nalgebra::{DMatrix, DVector};

use super::{check_common, ForecastResult, Method};
use crate::error::{Error, Result};

const MAX_AR_ORDER: usize = 10;

/// Yule-Walker AR fit selected by AIC.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub mean: f64,
    /// `phi_1, ..., phi_q` (most recent lag first).
    pub coefficients: Vec<f64>,
    pub innovation_variance: f64,
    pub aic: f64,
}

impl ArFit {
    /// Fits orders `0..=min(10, T/5)` and keeps the smallest AIC.
    pub fn select(series: &[f64]) -> Self {
        let n = series.len();
        let mean = series.iter().sum::<f64>() / n as f64;
        let max_q = MAX_AR_ORDER.min(n / 5);
        let acv: Vec<f64> = (0..=max_q)
            .map(|k| (k..n).map(|t| (series[t] - mean) * (series[t - k] - mean)).sum::<f64>() / n as f64)
            .collect();
        let aic = |var: f64, q: usize| n as f64 * var.max(f64::MIN_POSITIVE).ln() + 2.0 * q as f64;
        let mut best = ArFit {
            mean,
            coefficients: Vec::new(),
            innovation_variance: acv[0],
            aic: aic(acv[0], 0),
        };
        if acv[0] <= 0.0 {
            return best;
        }
        // Durbin-Levinson over increasing order
        let mut phi: Vec<f64> = Vec::new();
        let mut var = acv[0];
        for q in 1..=max_q {
            let k = (acv[q] - (1..q).map(|j| phi[j - 1] * acv[q - j]).sum::<f64>()) / var;
            let prev = phi.clone();
            phi.push(k);
            for j in 1..q {
                phi[j - 1] = prev[j - 1] - k * prev[q - j - 1];
            }
            var *= 1.0 - k * k;
            let score = aic(var, q);
            if score < best.aic {
                best = ArFit {
                    mean,
                    coefficients: phi.clone(),
                    innovation_variance: var,
                    aic: score,
                };
            }
        }
        best
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }
}

/// Recursive forecasts of a zero-mean AR recursion with intercept `c`
/// and prediction variances from the psi-weights.
fn ar_forecast(history: &[f64], intercept: f64, phi: &[f64], sigma2: f64, h: usize) -> (Vec<f64>, Vec<f64>) {
    let mut path = history.to_vec();
    let mut points = Vec::with_capacity(h);
    for _ in 0..h {
        let n = path.len();
        let x = intercept + phi.iter().enumerate().map(|(i, a)| a * path[n - 1 - i]).sum::<f64>();
        path.push(x);
        points.push(x);
    }
    let mut psi = vec![1.0];
    for s in 1..h {
        let v = (1..=s.min(phi.len())).map(|i| phi[i - 1] * psi[s - i]).sum::<f64>();
        psi.push(v);
    }
    let mut acc = 0.0;
    let mspe = psi
        .iter()
        .map(|w| {
            acc += w * w;
            sigma2.max(0.0) * acc
        })
        .collect();
    (points, mspe)
}

/// Demeaned Yule-Walker AR with AIC order selection.
pub fn forecast_baseline_ar(series: &[f64], h: usize, alpha: f64) -> Result<ForecastResult> {
    check_common(series.len(), 2, h, alpha)?;
    let fit = ArFit::select(series);
    let centred: Vec<f64> = series.iter().map(|x| x - fit.mean).collect();
    let (points, mspe) = ar_forecast(&centred, 0.0, &fit.coefficients, fit.innovation_variance, h);
    let points = points.into_iter().map(|x| x + fit.mean).collect();
    Ok(ForecastResult::new(Method::Ar, points, mspe, alpha, fit.order(), false))
}

fn es_sse(series: &[f64], weight: f64) -> (f64, f64) {
    let mut level = series[0];
    let mut sse = 0.0;
    for &x in &series[1..] {
        let e = x - level;
        sse += e * e;
        level += weight * e;
    }
    (sse, level)
}

/// Smoothing weight on the grid `0.01, 0.02, ..., 0.99` with the least
/// in-sample one-step squared error.
pub(crate) fn es_weight(series: &[f64]) -> f64 {
    let mut best = (f64::INFINITY, 0.01);
    for i in 1..=99 {
        let w = i as f64 / 100.0;
        let (sse, _) = es_sse(series, w);
        if sse < best.0 {
            best = (sse, w);
        }
    }
    best.1
}

/// Simple exponential smoothing.
pub fn forecast_baseline_es(series: &[f64], h: usize, alpha: f64) -> Result<ForecastResult> {
    check_common(series.len(), 1, h, alpha)?;
    let n = series.len();
    if n == 1 {
        return Ok(ForecastResult::new(Method::Es, vec![series[0]; h], vec![0.0; h], alpha, 0, false));
    }
    let weight = es_weight(series);
    let (sse, level) = es_sse(series, weight);
    let sigma2 = sse / (n - 1) as f64;
    let mspe = (0..h).map(|s| sigma2 * (1.0 + s as f64 * weight * weight)).collect();
    Ok(ForecastResult::new(Method::Es, vec![level; h], mspe, alpha, 0, false))
}

/// Least-squares AR(`order`) with intercept on the trailing `window`
/// observations (default `T / 3`).
pub fn forecast_baseline_tvar(
    series: &[f64],
    order: usize,
    window: Option<usize>,
    h: usize,
    alpha: f64,
) -> Result<ForecastResult> {
    let n = series.len();
    check_common(n, 1, h, alpha)?;
    if order == 0 {
        return Err(Error::argument("TVAR order must be at least 1"));
    }
    let window = window.unwrap_or(n / 3);
    if window > n {
        return Err(Error::argument(format!("window {window} exceeds the series length {n}")));
    }
    let rows = window.saturating_sub(order);
    if rows < order + 2 {
        return Err(Error::argument(format!(
            "window {window} is too short for a least-squares AR({order}) fit"
        )));
    }
    let seg = &series[n - window..];
    let design = DMatrix::from_fn(rows, order + 1, |r, c| if c == 0 { 1.0 } else { seg[order + r - c] });
    let target = DVector::from_fn(rows, |r, _| seg[order + r]);
    let beta = design
        .clone()
        .svd(true, true)
        .solve(&target, 1e-12)
        .map_err(|e| Error::numerical("tvar", e.to_string()))?;
    let resid = &target - &design * &beta;
    let sigma2 = resid.norm_squared() / (rows - order - 1) as f64;
    let phi: Vec<f64> = beta.iter().skip(1).copied().collect();
    let (points, mspe) = ar_forecast(series, beta[0], &phi, sigma2, h);
    Ok(ForecastResult::new(Method::Tvar, points, mspe, alpha, order, false))
}
