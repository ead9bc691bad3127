//! Rolling-origin backtests, interval coverage, the interval score and
//! coverage/score ratios against a baseline method, plus a Monte-Carlo
//! driver over simulated replications.

use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::{gaussian_interval, Forecaster, Method, MethodConfig};
use crate::simulation::{simulate_replication, ModelSpec};

/// Nominal coverage levels reported in tables.
pub const LEVELS: [f64; 6] = [0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Minimum history kept before the first backtest origin.
pub const MIN_HISTORY: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestRecord {
    /// Number of observations the forecaster saw.
    pub origin: usize,
    /// Index of the forecast target.
    pub target: usize,
    pub truth: f64,
    pub point: f64,
    pub mspe: f64,
    /// One interval per entry of the run's `levels`.
    pub intervals: Vec<[f64; 2]>,
}

impl BacktestRecord {
    pub fn covered(&self, level_index: usize) -> bool {
        let [lo, hi] = self.intervals[level_index];
        lo <= self.truth && self.truth <= hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestRun {
    pub method: Method,
    pub horizon: usize,
    pub levels: Vec<f64>,
    pub records: Vec<BacktestRecord>,
}

impl BacktestRun {
    fn level_index(&self, level: f64) -> Result<usize> {
        self.levels
            .iter()
            .position(|&l| (l - level).abs() < 1e-9)
            .ok_or_else(|| Error::argument(format!("level {level} was not evaluated")))
    }

    /// Percentage of records whose interval at `level` holds the truth.
    pub fn coverage(&self, level: f64) -> Result<f64> {
        let i = self.level_index(level)?;
        let hits = self.records.iter().filter(|r| r.covered(i)).count();
        Ok(100.0 * hits as f64 / self.records.len() as f64)
    }

    /// Mean interval score at `level`.
    pub fn mean_interval_score(&self, level: f64) -> Result<f64> {
        let i = self.level_index(level)?;
        let mut total = 0.0;
        for r in &self.records {
            let [lo, hi] = r.intervals[i];
            total += interval_score(lo, hi, r.truth, 1.0 - level)?;
        }
        Ok(total / self.records.len() as f64)
    }

    pub fn origins(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.origin).collect()
    }
}

/// Forecasts each of the last `last_n` observations `h` steps ahead from
/// the data strictly before it, refitting at every origin.
pub fn rolling_backtest(
    series: &[f64],
    forecaster: &dyn Forecaster,
    last_n: usize,
    h: usize,
    levels: &[f64],
) -> Result<BacktestRun> {
    let n = series.len();
    if last_n == 0 || h == 0 {
        return Err(Error::argument("last_n and horizon must be at least 1"));
    }
    if last_n + h - 1 + MIN_HISTORY > n {
        return Err(Error::argument(format!(
            "{last_n} targets at horizon {h} leave fewer than {MIN_HISTORY} observations of history in a series of {n}"
        )));
    }
    if levels.is_empty() || levels.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
        return Err(Error::argument("levels must lie in (0, 1)"));
    }
    let alpha = 1.0 - levels.iter().cloned().fold(0.0, f64::max);
    let mut records = Vec::with_capacity(last_n);
    for target in n - last_n..n {
        let origin = target + 1 - h;
        let fc = forecaster.forecast(&series[..origin], h, alpha)?;
        let point = fc.points[h - 1];
        let mspe = fc.mspe[h - 1];
        records.push(BacktestRecord {
            origin,
            target,
            truth: series[target],
            point,
            mspe,
            intervals: levels.iter().map(|&l| gaussian_interval(point, mspe, l)).collect(),
        });
    }
    Ok(BacktestRun {
        method: forecaster.method(),
        horizon: h,
        levels: levels.to_vec(),
        records,
    })
}

/// `(u - l) + (2/alpha)(l - x) 1{x < l} + (2/alpha)(x - u) 1{x > u}`.
pub fn interval_score(lower: f64, upper: f64, truth: f64, alpha: f64) -> Result<f64> {
    if lower > upper {
        return Err(Error::argument(format!("interval lower bound {lower} exceeds upper bound {upper}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::argument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let mut score = upper - lower;
    if truth < lower {
        score += 2.0 / alpha * (lower - truth);
    }
    if truth > upper {
        score += 2.0 / alpha * (truth - upper);
    }
    Ok(score)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub levels: Vec<f64>,
    /// Percentage per level, averaged over replications.
    pub coverage: Vec<f64>,
    pub n_origins: usize,
    pub n_replications: usize,
}

/// Coverage per replication, then averaged.
pub fn coverage_report(runs: &[BacktestRun]) -> Result<CoverageReport> {
    let first = runs.first().ok_or_else(|| Error::argument("no backtest runs to summarise"))?;
    let levels = first.levels.clone();
    let mut coverage = vec![0.0; levels.len()];
    for run in runs {
        for (i, &l) in levels.iter().enumerate() {
            coverage[i] += run.coverage(l)? / runs.len() as f64;
        }
    }
    Ok(CoverageReport {
        levels,
        coverage,
        n_origins: first.records.len(),
        n_replications: runs.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeMetrics {
    /// Mean over replications of coverage / baseline coverage at 90%.
    pub mcr: f64,
    /// Mean over replications of mean score / baseline mean score at 90%.
    pub mis: f64,
    /// Replications left out because the baseline ratio was undefined.
    pub excluded: usize,
}

/// Level at which the ratios are computed.
pub const RELATIVE_LEVEL: f64 = 0.9;

/// MCR and MIS of every method against `baseline`. `runs[method][r]` is
/// replication `r`; all methods must cover the same replications and
/// origins.
pub fn aggregate_relative(
    runs: &BTreeMap<Method, Vec<BacktestRun>>,
    baseline: Method,
) -> Result<BTreeMap<Method, RelativeMetrics>> {
    let base = runs
        .get(&baseline)
        .ok_or_else(|| Error::argument(format!("baseline method {baseline} has no runs")))?;
    for (method, list) in runs {
        if list.len() != base.len() || list.iter().zip(base).any(|(a, b)| a.origins() != b.origins()) {
            return Err(Error::argument(format!(
                "method {method} does not cover the same replications and origins as the baseline"
            )));
        }
    }
    let mut out = BTreeMap::new();
    for (&method, list) in runs {
        let (mut cov_sum, mut cov_n, mut is_sum, mut is_n) = (0.0, 0usize, 0.0, 0usize);
        for (run, b) in list.iter().zip(base) {
            let bc = b.coverage(RELATIVE_LEVEL)?;
            if bc > 0.0 {
                cov_sum += run.coverage(RELATIVE_LEVEL)? / bc;
                cov_n += 1;
            }
            let bs = b.mean_interval_score(RELATIVE_LEVEL)?;
            if bs > 0.0 {
                is_sum += run.mean_interval_score(RELATIVE_LEVEL)? / bs;
                is_n += 1;
            }
        }
        let excluded = list.len() - cov_n.min(is_n);
        out.insert(
            method,
            RelativeMetrics {
                mcr: if cov_n > 0 { cov_sum / cov_n as f64 } else { f64::NAN },
                mis: if is_n > 0 { is_sum / is_n as f64 } else { f64::NAN },
                excluded,
            },
        );
    }
    Ok(out)
}

/// Monte-Carlo experiment over simulated replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub model: ModelSpec,
    pub methods: Vec<MethodConfig>,
    pub replications: usize,
    pub seed: u64,
    pub last_n: usize,
    pub horizon: usize,
    pub baseline: Method,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub replication: usize,
    pub method: Method,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub runs: BTreeMap<Method, Vec<BacktestRun>>,
    /// Replications dropped for every method because one method failed.
    pub failures: Vec<FailureRecord>,
    pub coverage: BTreeMap<Method, CoverageReport>,
    pub relative: BTreeMap<Method, RelativeMetrics>,
}

type ReplicationOutcome = std::result::Result<Vec<BacktestRun>, FailureRecord>;

fn run_replication(config: &MonteCarloConfig, r: usize) -> Result<ReplicationOutcome> {
    let series = simulate_replication(&config.model, config.seed, r as u64)?;
    let mut runs = Vec::with_capacity(config.methods.len());
    for m in &config.methods {
        match rolling_backtest(&series, m, config.last_n, config.horizon, &LEVELS) {
            Ok(run) => runs.push(run),
            Err(e) if e.is_numerical() => {
                return Ok(Err(FailureRecord {
                    replication: r,
                    method: m.method(),
                    error: e.to_string(),
                }))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Ok(runs))
}

/// Simulates `replications` series, backtests every method on each and
/// summarises coverage and ratios to the baseline. Replications run on
/// `workers` threads; results do not depend on the worker count.
pub fn run_monte_carlo(config: &MonteCarloConfig) -> Result<MonteCarloResult> {
    if config.replications == 0 {
        return Err(Error::argument("at least one replication is required"));
    }
    if !config.methods.iter().any(|m| m.method() == config.baseline) {
        return Err(Error::argument(format!("baseline {} is not among the methods", config.baseline)));
    }
    let slots: Vec<Mutex<Option<Result<ReplicationOutcome>>>> =
        (0..config.replications).map(|_| Mutex::new(None)).collect();
    let next = Mutex::new(0usize);
    let workers = config.workers.clamp(1, config.replications);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let r = {
                    let mut guard = next.lock().expect("counter lock");
                    let r = *guard;
                    *guard += 1;
                    r
                };
                if r >= config.replications {
                    break;
                }
                let outcome = run_replication(config, r);
                *slots[r].lock().expect("slot lock") = Some(outcome);
            });
        }
    });

    let mut runs: BTreeMap<Method, Vec<BacktestRun>> = config.methods.iter().map(|m| (m.method(), Vec::new())).collect();
    let mut failures = Vec::new();
    for slot in slots {
        match slot.into_inner().expect("slot lock").expect("every replication ran")? {
            Ok(list) => {
                for run in list {
                    runs.get_mut(&run.method).expect("method registered").push(run);
                }
            }
            Err(f) => failures.push(f),
        }
    }
    if runs.values().all(Vec::is_empty) {
        return Err(Error::numerical("evaluation", format!("all {} replications failed", config.replications)));
    }
    let coverage = runs
        .iter()
        .map(|(&m, list)| coverage_report(list).map(|c| (m, c)))
        .collect::<Result<_>>()?;
    let relative = aggregate_relative(&runs, config.baseline)?;
    Ok(MonteCarloResult {
        runs,
        failures,
        coverage,
        relative,
    })
}
