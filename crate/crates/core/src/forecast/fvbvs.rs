//! Grid-search LSW forecaster: the order `p` and a time-domain smoothing
//! bandwidth `g` for the local autocovariance are tuned on the most recent
//! observations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::gyw::{build_gyw, solve_step};
use super::{check_common, ForecastResult, Method};
use crate::error::{Error, Result};
use crate::local::LocalAcv;
use crate::spectral::{raw_wavelet_periodogram, Boundary};
use crate::wavelet::{max_levels, LswBasis, WaveletFamily};

/// Shortest prefix used to fit a candidate predictor.
const MIN_PREFIX: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Normal,
    #[default]
    Box,
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Normal => "normal",
            Kernel::Box => "box",
        })
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(Kernel::Normal),
            "box" => Ok(Kernel::Box),
            _ => Err(Error::Config(format!("unknown kernel '{s}' (expected normal or box)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FvbvsConfig {
    pub p0: usize,
    /// Initial bandwidth in rescaled time.
    pub g0: f64,
    /// Number of training forecasts before the final one.
    pub m: usize,
    /// Bandwidth step.
    pub delta: f64,
    pub kernel: Kernel,
    #[serde(default)]
    pub family: WaveletFamily,
}

impl Default for FvbvsConfig {
    fn default() -> Self {
        Self {
            p0: 3,
            g0: 0.1,
            m: 10,
            delta: 0.05,
            kernel: Kernel::Box,
            family: WaveletFamily::Haar,
        }
    }
}

impl FvbvsConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.p0 == 0 {
            problems.push("p0 must be at least 1".to_string());
        }
        if !(self.g0 > 0.0 && self.g0.is_finite()) {
            problems.push(format!("g0 must be positive, got {}", self.g0));
        }
        if self.m == 0 {
            problems.push("m must be at least 1".to_string());
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            problems.push(format!("delta must be positive, got {}", self.delta));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::argument(problems.join("; ")))
        }
    }
}

/// Unsmoothed local autocovariance `c~(k, tau)` of a series, from the
/// A-corrected raw periodogram (not clamped).
struct RawAcv {
    // cumulative[tau][k] = sum_{i < k} c~(i, tau)
    cumulative: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
}

impl RawAcv {
    fn new(series: &[f64], family: WaveletFamily, tau_max: usize) -> Result<Self> {
        let n = series.len();
        let levels = max_levels(n);
        let basis = LswBasis::new(family, levels)?;
        let raw = raw_wavelet_periodogram(series, family, levels, Boundary::Trailing)?;
        let inv = basis.inner_product().inverse();
        let table = basis.table();
        // weight of raw scale l in lag tau: sum_j inv[j, l] Psi_j(tau)
        let mix: Vec<Vec<f64>> = (0..=tau_max)
            .map(|tau| {
                (0..levels)
                    .map(|l| (0..levels).map(|j| inv[(j, l)] * table.get(j + 1, tau as i64)).sum())
                    .collect()
            })
            .collect();
        let values: Vec<Vec<f64>> = mix
            .iter()
            .map(|w| (0..n).map(|k| (0..levels).map(|l| w[l] * raw.row(l + 1)[k]).sum()).collect())
            .collect();
        let cumulative = values
            .iter()
            .map(|row| {
                let mut acc = Vec::with_capacity(n + 1);
                acc.push(0.0);
                for v in row {
                    acc.push(acc.last().unwrap() + v);
                }
                acc
            })
            .collect();
        Ok(Self { cumulative, values })
    }

    fn len(&self) -> usize {
        self.values[0].len()
    }

    /// Kernel-smoothed value at column `k` (possibly `k = len`) using only
    /// observed columns.
    fn smoothed(&self, k: usize, tau: usize, g: f64, kernel: Kernel) -> f64 {
        let n = self.len();
        let scale = g * n as f64;
        match kernel {
            Kernel::Box => {
                let half = (scale.round() as usize).max(1);
                let lo = k.saturating_sub(half);
                let hi = (k + half + 1).min(n);
                let row = &self.cumulative[tau];
                (row[hi] - row[lo]) / (hi - lo) as f64
            }
            Kernel::Normal => {
                let sd = scale.max(0.5);
                let reach = (4.0 * sd).ceil() as usize;
                let lo = k.saturating_sub(reach);
                let hi = (k + reach + 1).min(n);
                let (mut num, mut den) = (0.0, 0.0);
                for i in lo..hi {
                    let d = (k as f64 - i as f64) / sd;
                    let w = (-0.5 * d * d).exp();
                    num += w * self.values[tau][i];
                    den += w;
                }
                num / den
            }
        }
    }

    /// Smoothed local autocovariance covering the columns an order-`p`,
    /// horizon-`h` system at origin `len` reads.
    fn local(&self, p: usize, h: usize, g: f64, kernel: Kernel) -> Result<LocalAcv> {
        let n = self.len();
        let tau_max = p + h - 1;
        let first = n - p;
        let values = (0..=n)
            .map(|k| {
                if k < first {
                    vec![0.0; tau_max + 1]
                } else {
                    (0..=tau_max).map(|tau| self.smoothed(k, tau, g, kernel)).collect()
                }
            })
            .collect();
        LocalAcv::from_values(values)
    }
}

fn max_order(len: usize, family: WaveletFamily, h: usize) -> usize {
    let bound = family.support_len(max_levels(len)).saturating_sub(1);
    (len / 4).min(bound.saturating_sub(h - 1)).max(1)
}

/// One-step forecast of `series[u]` from `series[..u]` with a fixed pair.
fn training_error(acv: &RawAcv, prefix: &[f64], truth: f64, p: usize, g: f64, kernel: Kernel) -> f64 {
    let attempt = || -> Result<f64> {
        let lacv = acv.local(p, 1, g, kernel)?;
        let sys = build_gyw(&lacv, prefix.len(), p, 1)?;
        Ok(solve_step(&sys, 0, false)?.predict(prefix))
    };
    match attempt() {
        Ok(x) => (x - truth).abs() / truth.abs().max(1e-8),
        Err(_) => f64::INFINITY,
    }
}

/// Forecasts `h` steps past the end of `series` after `m` rounds of
/// neighbourhood search over `(p, g)` on the last `m` observations.
pub fn forecast_fvbvs(series: &[f64], config: &FvbvsConfig, h: usize, alpha: f64) -> Result<ForecastResult> {
    config.validate()?;
    let n = series.len();
    check_common(n, MIN_PREFIX + 1, h, alpha)?;
    if config.m >= n {
        return Err(Error::argument(format!("m = {} must be smaller than the series length {n}", config.m)));
    }
    if n - config.m < MIN_PREFIX {
        return Err(Error::argument(format!(
            "training starts at {} but needs at least {MIN_PREFIX} earlier observations",
            n - config.m
        )));
    }
    let kernel = config.kernel;
    let mut p = config.p0;
    let mut g = config.g0;
    for u in n - config.m..n {
        let prefix = &series[..u];
        let cap = max_order(u, config.family, 1);
        let acv = RawAcv::new(prefix, config.family, cap)?;
        let mut candidates = vec![(p.min(cap), g)];
        for (dp, dg) in [(1i64, 1.0), (1, -1.0), (-1, 1.0), (-1, -1.0)] {
            let cp = (p as i64 + dp).clamp(1, cap as i64) as usize;
            let cg = g + dg * config.delta;
            if cg > 0.0 {
                candidates.push((cp, cg));
            }
        }
        let mut best = (f64::INFINITY, candidates[0]);
        for &(cp, cg) in &candidates {
            let err = training_error(&acv, prefix, series[u], cp, cg, kernel);
            if err < best.0 {
                best = (err, (cp, cg));
            }
        }
        (p, g) = best.1;
    }

    let cap = max_order(n, config.family, h);
    let p = p.min(cap);
    let acv = RawAcv::new(series, config.family, p + h - 1)?;
    let lacv = acv.local(p, h, g, kernel)?;
    let system = build_gyw(&lacv, n, p, h)?;
    let mut points = Vec::with_capacity(h);
    let mut mspe = Vec::with_capacity(h);
    for step in 0..h {
        let sol = solve_step(&system, step, false).map_err(|e| e.in_stage("gyw"))?;
        points.push(sol.predict(series));
        mspe.push(sol.mspe);
    }
    Ok(ForecastResult::new(Method::Fvbvs, points, mspe, alpha, p, false))
}
