//! Raw wavelet periodogram, running-mean smoothing with automatic
//! bandwidth choice, and correction into an evolutionary wavelet spectrum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavelet::{circular_ndwt, max_levels, mirror_index, ndwt, InnerProductMatrix, LswBasis, WaveletFamily};

/// Series shorter than this skip bandwidth selection and use `s = 1`.
pub const MIN_BANDWIDTH_LEN: usize = 16;

/// How the transform treats the ends of the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Boundary {
    /// Square of [`ndwt`]: mirror-pad to a power of two, then wrap.
    Periodic,
    /// Transform the series followed by its time reversal, wrapping on the
    /// doubled length, and keep the first half. Coefficients near the end
    /// of the series see reflected data instead of the start of the series.
    Reflect,
    /// Each coefficient at `k` uses the wavelet whose support ends at `k`,
    /// on the series preceded by its time reversal. Coefficients near the
    /// end only see observed data; those near the start see reflected data.
    #[default]
    Trailing,
}

/// `I_{j,k} = d_{j,k}^2`; `values[j - 1][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPeriodogram {
    values: Vec<Vec<f64>>,
}

impl RawPeriodogram {
    pub fn from_values(values: Vec<Vec<f64>>) -> Result<Self> {
        let len = values.first().map_or(0, Vec::len);
        if values.is_empty() || values.iter().any(|r| r.len() != len) {
            return Err(Error::argument("periodogram rows must be non-empty and of equal length"));
        }
        if values.iter().flatten().any(|v| !(*v >= 0.0)) {
            return Err(Error::argument("periodogram ordinates must be finite and nonnegative"));
        }
        Ok(Self { values })
    }

    pub fn levels(&self) -> usize {
        self.values.len()
    }

    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, scale: usize) -> &[f64] {
        &self.values[scale - 1]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }
}

pub fn raw_wavelet_periodogram(
    series: &[f64],
    family: WaveletFamily,
    levels: usize,
    boundary: Boundary,
) -> Result<RawPeriodogram> {
    let coeffs = match boundary {
        Boundary::Periodic => ndwt(series, family, levels)?,
        Boundary::Reflect => reflected_coefficients(series, family, levels)?,
        Boundary::Trailing => trailing_coefficients(series, family, levels)?,
    };
    let values = coeffs
        .into_iter()
        .map(|row| row.into_iter().map(|d| d * d).collect())
        .collect();
    Ok(RawPeriodogram { values })
}

fn reflected_coefficients(series: &[f64], family: WaveletFamily, levels: usize) -> Result<Vec<Vec<f64>>> {
    let n = series.len();
    if levels == 0 || levels > max_levels(n) {
        return Err(Error::argument(format!(
            "J = {levels} must lie in 1..=floor(log2 T) = {} for T = {n}",
            max_levels(n)
        )));
    }
    let doubled: Vec<f64> = (0..2 * n).map(|i| series[mirror_index(i as i64, n)]).collect();
    let mut rows = circular_ndwt(&doubled, family, levels)?;
    for row in &mut rows {
        row.truncate(n);
    }
    Ok(rows)
}

fn trailing_coefficients(series: &[f64], family: WaveletFamily, levels: usize) -> Result<Vec<Vec<f64>>> {
    let n = series.len();
    if levels == 0 || levels > max_levels(n) {
        return Err(Error::argument(format!(
            "J = {levels} must lie in 1..=floor(log2 T) = {} for T = {n}",
            max_levels(n)
        )));
    }
    let doubled: Vec<f64> = (0..2 * n).map(|i| series[mirror_index(i as i64 - n as i64, n)]).collect();
    let rows = circular_ndwt(&doubled, family, levels)?;
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(j, row)| {
            let back = family.support_len(j + 1) - 1;
            (0..n).map(|k| row[(n + k + 2 * n - back % (2 * n)) % (2 * n)]).collect()
        })
        .collect())
}

/// How the running-mean bandwidth is picked when none is fixed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthRule {
    /// Largest grid value, `floor(T / 4)`.
    #[default]
    Widest,
    /// Even/odd cross-validation over the grid; see [`auto_bandwidth`].
    CrossValidation,
}

/// Outcome of automatic bandwidth selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthChoice {
    pub bandwidth: usize,
    /// Set when the series was too short to select and `s = 1` was used.
    pub fallback: bool,
    /// `(s, score)` for every candidate examined.
    pub scores: Vec<(usize, f64)>,
}

/// Candidate bandwidths `{1, 2, 4, ...}` capped by, and always including,
/// `floor(T / 4)`.
pub fn bandwidth_grid(len: usize) -> Vec<usize> {
    let cap = (len / 4).max(1);
    let mut grid: Vec<usize> = std::iter::successors(Some(1usize), |s| Some(s * 2))
        .take_while(|&s| s <= cap)
        .collect();
    if grid.last() != Some(&cap) {
        grid.push(cap);
    }
    grid
}

/// Even/odd cross-validation: for each candidate `s`, the even-indexed
/// ordinates inside `[k - s, k + s]` are averaged to predict each odd
/// ordinate `k`; squared errors are summed over all scales. The minimiser
/// wins, ties going to the larger `s`.
pub fn auto_bandwidth(raw: &RawPeriodogram) -> BandwidthChoice {
    let n = raw.len();
    if n < MIN_BANDWIDTH_LEN {
        return BandwidthChoice {
            bandwidth: 1,
            fallback: true,
            scores: Vec::new(),
        };
    }
    let grid = bandwidth_grid(n);
    // prefix sums of even-indexed ordinates per scale
    let prefix: Vec<(Vec<f64>, Vec<usize>)> = raw
        .values
        .iter()
        .map(|row| {
            let mut sums = Vec::with_capacity(n + 1);
            let mut counts = Vec::with_capacity(n + 1);
            let (mut s, mut c) = (0.0, 0usize);
            sums.push(0.0);
            counts.push(0);
            for (k, &v) in row.iter().enumerate() {
                if k % 2 == 0 {
                    s += v;
                    c += 1;
                }
                sums.push(s);
                counts.push(c);
            }
            (sums, counts)
        })
        .collect();

    let scores: Vec<(usize, f64)> = grid
        .iter()
        .map(|&s| {
            let mut score = 0.0;
            for (row, (sums, counts)) in raw.values.iter().zip(&prefix) {
                for k in (1..n).step_by(2) {
                    let lo = k.saturating_sub(s);
                    let hi = (k + s).min(n - 1);
                    let count = counts[hi + 1] - counts[lo];
                    let mean = (sums[hi + 1] - sums[lo]) / count as f64;
                    let e = mean - row[k];
                    score += e * e;
                }
            }
            (s, score)
        })
        .collect();

    let mut best = *scores.last().expect("grid is never empty");
    for &(s, score) in scores.iter().rev() {
        if score < best.1 {
            best = (s, score);
        }
    }
    BandwidthChoice {
        bandwidth: best.0,
        fallback: false,
        scores,
    }
}

/// Running-mean smoothed periodogram with one forward column.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedPeriodogram {
    values: Vec<Vec<f64>>,
    bandwidth: usize,
}

impl SmoothedPeriodogram {
    pub fn levels(&self) -> usize {
        self.values.len()
    }

    /// Number of time columns, `t + 1`.
    pub fn columns(&self) -> usize {
        self.values[0].len()
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn row(&self, scale: usize) -> &[f64] {
        &self.values[scale - 1]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// Smooths the first `horizon` ordinates of each scale with a centred
/// `(2s + 1)`-point mean, truncated at the ends, and appends column
/// `horizon` as the trailing mean of the last `min(2s + 1, horizon)`
/// ordinates.
pub fn running_mean_smooth(raw: &RawPeriodogram, bandwidth: usize, horizon: usize) -> Result<SmoothedPeriodogram> {
    let n = raw.len();
    let cap = (n / 4).max(1);
    if bandwidth == 0 || bandwidth > cap {
        return Err(Error::argument(format!(
            "bandwidth must lie in 1..={cap} for T = {n}, got {bandwidth}"
        )));
    }
    if horizon == 0 || horizon > n {
        return Err(Error::argument(format!("horizon must lie in 1..={n}, got {horizon}")));
    }
    let s = bandwidth;
    let values = raw
        .values
        .iter()
        .map(|row| {
            let row = &row[..horizon];
            let mut prefix = Vec::with_capacity(horizon + 1);
            prefix.push(0.0);
            let mut acc = 0.0;
            for &v in row {
                acc += v;
                prefix.push(acc);
            }
            let mean = |lo: usize, hi: usize| (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64;
            let mut out: Vec<f64> = (0..horizon)
                .map(|k| mean(k.saturating_sub(s), (k + s).min(horizon - 1)))
                .collect();
            out.push(mean(horizon.saturating_sub(2 * s + 1), horizon - 1));
            out
        })
        .collect();
    Ok(SmoothedPeriodogram { values, bandwidth })
}

/// Corrected, clamped evolutionary wavelet spectrum `S_j(k / T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EwsEstimate {
    values: Vec<Vec<f64>>,
    clamped: Vec<Vec<bool>>,
}

impl EwsEstimate {
    /// Wraps an externally supplied spectrum (e.g. a known theoretical one).
    pub fn from_values(values: Vec<Vec<f64>>) -> Result<Self> {
        let cols = values.first().map_or(0, Vec::len);
        if cols == 0 || values.iter().any(|r| r.len() != cols) {
            return Err(Error::argument("spectrum rows must be non-empty and of equal length"));
        }
        if values.iter().flatten().any(|v| !(*v >= 0.0)) {
            return Err(Error::argument("spectrum values must be finite and nonnegative"));
        }
        let clamped = values.iter().map(|r| vec![false; r.len()]).collect();
        Ok(Self { values, clamped })
    }

    pub fn levels(&self) -> usize {
        self.values.len()
    }

    pub fn columns(&self) -> usize {
        self.values[0].len()
    }

    /// `S_j` at time column `k`.
    pub fn get(&self, scale: usize, k: usize) -> f64 {
        self.values[scale - 1][k]
    }

    pub fn row(&self, scale: usize) -> &[f64] {
        &self.values[scale - 1]
    }

    pub fn is_clamped(&self, scale: usize, k: usize) -> bool {
        self.clamped[scale - 1][k]
    }

    pub fn clamped_count(&self) -> usize {
        self.clamped.iter().flatten().filter(|&&c| c).count()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// Multiplies every time column by `A^{-1}`; negative results are set to
/// zero and flagged.
pub fn correct_spectrum(smoothed: &SmoothedPeriodogram, a: &InnerProductMatrix) -> Result<EwsEstimate> {
    correct_columns(&smoothed.values, a)
}

pub(crate) fn correct_columns(rows: &[Vec<f64>], a: &InnerProductMatrix) -> Result<EwsEstimate> {
    let levels = rows.len();
    if a.levels() != levels {
        return Err(Error::argument(format!(
            "periodogram has {levels} scales but the inner-product matrix has {}",
            a.levels()
        )));
    }
    let cols = rows[0].len();
    let inv = a.inverse();
    let mut values = vec![vec![0.0; cols]; levels];
    let mut clamped = vec![vec![false; cols]; levels];
    for k in 0..cols {
        // round-off below this is not counted as a clamp
        let tol = 1e-12 * (0..levels).map(|l| rows[l][k].abs()).fold(0.0, f64::max);
        for j in 0..levels {
            let v: f64 = (0..levels).map(|l| inv[(j, l)] * rows[l][k]).sum();
            if v < 0.0 {
                clamped[j][k] = v < -tol;
            } else {
                values[j][k] = v;
            }
        }
    }
    Ok(EwsEstimate { values, clamped })
}

/// Spectral estimation settings for the forecasting pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub family: WaveletFamily,
    /// Number of scales; `None` means `floor(log2 T)`. Values above that
    /// are lowered to it.
    pub levels: Option<usize>,
    pub boundary: Boundary,
    /// Fixed running-mean bandwidth; `None` defers to `rule`.
    pub bandwidth: Option<usize>,
    #[serde(default)]
    pub rule: BandwidthRule,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            family: WaveletFamily::Haar,
            levels: None,
            boundary: Boundary::Trailing,
            bandwidth: None,
            rule: BandwidthRule::Widest,
        }
    }
}

impl SpectralOptions {
    pub fn levels_for(&self, len: usize) -> usize {
        let max = max_levels(len);
        self.levels.map_or(max, |l| l.min(max))
    }
}

/// Spectrum estimate together with the choices made on the way.
#[derive(Debug, Clone)]
pub struct SpectralFit {
    pub ews: EwsEstimate,
    pub bandwidth: BandwidthChoice,
    pub basis: LswBasis,
}

/// Periodogram, bandwidth choice, smoothing with a forward column at
/// `T`, and correction.
pub fn estimate_spectrum(series: &[f64], options: &SpectralOptions) -> Result<SpectralFit> {
    let n = series.len();
    let levels = options.levels_for(n);
    if levels == 0 {
        return Err(Error::argument(format!("series of length {n} is too short for spectral estimation")));
    }
    let basis = LswBasis::new(options.family, levels)?;
    let raw = raw_wavelet_periodogram(series, options.family, levels, options.boundary)?;
    let bandwidth = match options.bandwidth {
        Some(s) => BandwidthChoice {
            bandwidth: s.min((n / 4).max(1)),
            fallback: false,
            scores: Vec::new(),
        },
        None => match options.rule {
            BandwidthRule::Widest => BandwidthChoice {
                bandwidth: (n / 4).max(1),
                fallback: false,
                scores: Vec::new(),
            },
            BandwidthRule::CrossValidation => auto_bandwidth(&raw),
        },
    };
    let smoothed = running_mean_smooth(&raw, bandwidth.bandwidth, n)?;
    let ews = correct_spectrum(&smoothed, basis.inner_product())?;
    Ok(SpectralFit { ews, bandwidth, basis })
}
