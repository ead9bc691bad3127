//! Command runners. Each writes its reports plus `manifest.json` into the
//! output directory; nothing written depends on wall-clock time.

use std::fs;
use std::path::{Path, PathBuf};

use forlap::evaluation::{rolling_backtest, run_monte_carlo, BacktestRun, MonteCarloConfig, LEVELS};
use forlap::forecast::{ForecastResult, Forecaster, Method};
use forlap::local::{lpacf_windowed, select_p};
use forlap::simulation::{simulate_replication, ModelId, ModelSpec};
use forlap::spectral::SpectralOptions;
use serde::Serialize;

use crate::config::{BacktestArgs, Command, ForecastArgs, LpacfArgs, RunConfig, SeriesInput, SimulateArgs, TableArgs};
use crate::ingest::ingest_csv;
use crate::preprocess::{demean, difference, Differenced};
use crate::report::{plot_tsv, table_csv, write_json, write_text, Manifest, TableRow};
use crate::{CliError, Result, EXIT_NUMERICAL, EXIT_OK};

/// Files written by a run and whether any method failed numerically.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub failures: usize,
    /// Set when a forecast or backtest lost a method to a numerical failure.
    pub partial: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.partial {
            EXIT_NUMERICAL
        } else {
            EXIT_OK
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct MethodFailure {
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<ModelId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    replication: Option<usize>,
    method: Method,
    error: String,
}

/// Validates `config`, then runs it.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    config.validate()?;
    let dir = config.output_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let manifest = write_json(&dir.join("manifest.json"), &Manifest::new(config))?;
    let mut outcome = match &config.command {
        Command::Forecast(a) => run_forecast(a, dir)?,
        Command::Backtest(a) => run_backtest(a, dir)?,
        Command::Simulate(a) => run_simulate(a, dir)?,
        Command::Table(a) => run_table(a, config.workers, dir)?,
        Command::Lpacf(a) => run_lpacf(a, dir)?,
    };
    outcome.files.insert(0, manifest);
    Ok(outcome)
}

/// Reruns the configuration stored in a manifest, writing to `output_dir`.
pub fn replay(manifest: &Path, output_dir: &Path) -> Result<Outcome> {
    let text = fs::read_to_string(manifest).map_err(|e| CliError::io(format!("reading {}", manifest.display()), e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: manifest.to_path_buf(),
        detail: e.to_string(),
    })?;
    let config = value.get("config").cloned().ok_or_else(|| CliError::Input {
        path: manifest.to_path_buf(),
        detail: "manifest has no config".into(),
    })?;
    let mut config: RunConfig = serde_json::from_value(config).map_err(|e| CliError::Input {
        path: manifest.to_path_buf(),
        detail: e.to_string(),
    })?;
    config.output_dir = output_dir.to_path_buf();
    run(&config)
}

struct Prepared {
    differenced: Differenced,
    mean: f64,
    values: Vec<f64>,
}

fn prepare(input: &SeriesInput) -> Result<Prepared> {
    let raw = ingest_csv(&input.path, input.column.as_ref())?;
    let differenced = difference(&raw, input.difference)?;
    let mut values = differenced.values.clone();
    let mean = demean(&mut values, input.demean);
    Ok(Prepared {
        differenced,
        mean,
        values,
    })
}

fn failure(method: Method, e: &forlap::Error) -> MethodFailure {
    MethodFailure {
        model: None,
        replication: None,
        method,
        error: e.to_string(),
    }
}

#[derive(Serialize)]
struct ForecastEntry {
    #[serde(flatten)]
    result: ForecastResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    integrated: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct ForecastReport {
    series_length: usize,
    difference: usize,
    mean_removed: f64,
    alpha: f64,
    horizon: usize,
    forecasts: Vec<ForecastEntry>,
}

fn run_forecast(a: &ForecastArgs, dir: &Path) -> Result<Outcome> {
    let prep = prepare(&a.input)?;
    let mut forecasts = Vec::new();
    let mut failures = Vec::new();
    for &method in &a.methods {
        let config = a.settings.method_config(method);
        match config.forecast(&prep.values, a.horizon, a.alpha) {
            Ok(mut result) => {
                for p in &mut result.points {
                    *p += prep.mean;
                }
                for iv in &mut result.intervals {
                    iv[0] += prep.mean;
                    iv[1] += prep.mean;
                }
                let integrated = a.integrate.then(|| prep.differenced.integrate_forecast(&result.points));
                forecasts.push(ForecastEntry { result, integrated });
            }
            Err(e) if e.is_numerical() => failures.push(failure(method, &e)),
            Err(e) => return Err(e.into()),
        }
    }
    let report = ForecastReport {
        series_length: prep.values.len(),
        difference: a.input.difference,
        mean_removed: prep.mean,
        alpha: a.alpha,
        horizon: a.horizon,
        forecasts,
    };
    let mut files = vec![write_json(&dir.join("forecast.json"), &report)?];
    if !failures.is_empty() {
        files.push(write_json(&dir.join("failures.json"), &failures)?);
    }
    Ok(Outcome {
        files,
        failures: failures.len(),
        partial: !failures.is_empty(),
    })
}

#[derive(Debug, Clone, Serialize)]
struct LevelSummary {
    level: f64,
    /// Share of targets inside the interval, in percent.
    success_percentage: f64,
    mean_interval_score: f64,
}

#[derive(Debug, Clone, Serialize)]
struct BacktestSummary {
    method: Method,
    levels: Vec<LevelSummary>,
}

#[derive(Serialize)]
struct BacktestReport {
    series_length: usize,
    difference: usize,
    mean_removed: f64,
    last_n: usize,
    horizon: usize,
    results: Vec<BacktestSummary>,
}

fn summarise(run: &BacktestRun) -> Result<BacktestSummary> {
    let levels = run
        .levels
        .iter()
        .map(|&level| {
            Ok(LevelSummary {
                level,
                success_percentage: run.coverage(level)?,
                mean_interval_score: run.mean_interval_score(level)?,
            })
        })
        .collect::<forlap::Result<Vec<_>>>()?;
    Ok(BacktestSummary {
        method: run.method,
        levels,
    })
}

fn shift_run(run: &mut BacktestRun, by: f64) {
    for r in &mut run.records {
        r.truth += by;
        r.point += by;
        for iv in &mut r.intervals {
            iv[0] += by;
            iv[1] += by;
        }
    }
}

fn run_backtest(a: &BacktestArgs, dir: &Path) -> Result<Outcome> {
    let prep = prepare(&a.input)?;
    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut files = Vec::new();
    for &method in &a.methods {
        let config = a.settings.method_config(method);
        match rolling_backtest(&prep.values, &config, a.last_n, a.horizon, &a.levels) {
            Ok(mut run) => {
                shift_run(&mut run, prep.mean);
                results.push(summarise(&run)?);
                files.push(write_text(&dir.join(format!("plot_{method}.tsv")), &plot_tsv(&run))?);
            }
            Err(e) if e.is_numerical() => failures.push(failure(method, &e)),
            Err(e) => return Err(e.into()),
        }
    }
    let report = BacktestReport {
        series_length: prep.values.len(),
        difference: a.input.difference,
        mean_removed: prep.mean,
        last_n: a.last_n,
        horizon: a.horizon,
        results,
    };
    files.insert(0, write_json(&dir.join("backtest.json"), &report)?);
    if !failures.is_empty() {
        files.push(write_json(&dir.join("failures.json"), &failures)?);
    }
    Ok(Outcome {
        files,
        failures: failures.len(),
        partial: !failures.is_empty(),
    })
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    spec: &'a ModelSpec,
    description: &'static str,
    length: usize,
    seed: u64,
    files: Vec<String>,
}

fn run_simulate(a: &SimulateArgs, dir: &Path) -> Result<Outcome> {
    let spec = ModelSpec {
        id: a.model,
        length_override: a.length,
        innovation: a.innovation,
    };
    let width = a.replications.saturating_sub(1).to_string().len().max(3);
    let mut files = Vec::new();
    for rep in 0..a.replications {
        let series = simulate_replication(&spec, a.seed, rep as u64)?;
        let mut text = String::from("x\n");
        for v in &series {
            text.push_str(&v.to_string());
            text.push('\n');
        }
        let name = format!("series_{}_{rep:0width$}.csv", a.model);
        files.push(write_text(&dir.join(name), &text)?);
    }
    let report = SimulateReport {
        spec: &spec,
        description: a.model.describe(),
        length: spec.len(),
        seed: a.seed,
        files: files
            .iter()
            .map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
            .collect(),
    };
    files.insert(0, write_json(&dir.join("simulate.json"), &report)?);
    Ok(Outcome {
        files,
        failures: 0,
        partial: false,
    })
}

#[derive(Serialize)]
struct TableReport<'a> {
    levels: &'a [f64],
    baseline: Method,
    replications: usize,
    rows: &'a [TableRow],
}

fn run_table(a: &TableArgs, workers: usize, dir: &Path) -> Result<Outcome> {
    let methods: Vec<_> = a.methods.iter().map(|&m| a.settings.method_config(m)).collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &model in &a.models {
        let config = MonteCarloConfig {
            model: ModelSpec::new(model).with_innovation(a.innovation),
            methods: methods.clone(),
            replications: a.replications,
            seed: a.seed,
            last_n: a.last_n,
            horizon: a.horizon,
            baseline: a.baseline,
            workers,
        };
        let result = run_monte_carlo(&config)?;
        for f in result.failures {
            failures.push(MethodFailure {
                model: Some(model),
                replication: Some(f.replication),
                method: f.method,
                error: f.error,
            });
        }
        for &method in &a.methods {
            let coverage = result.coverage.get(&method).ok_or_else(|| {
                CliError::Core(forlap::Error::Numerical {
                    stage: "table",
                    detail: format!("every replication of model {model} failed"),
                })
            })?;
            let relative = (method != a.baseline)
                .then(|| result.relative.get(&method).cloned())
                .flatten();
            rows.push(TableRow::new(model, method, coverage, relative));
        }
    }
    let mut files = vec![
        write_text(&dir.join("table.csv"), &table_csv(&LEVELS, &rows)?)?,
        write_json(
            &dir.join("table.json"),
            &TableReport {
                levels: &LEVELS,
                baseline: a.baseline,
                replications: a.replications,
                rows: &rows,
            },
        )?,
    ];
    if !failures.is_empty() {
        files.push(write_json(&dir.join("failures.json"), &failures)?);
    }
    Ok(Outcome {
        files,
        failures: failures.len(),
        partial: false,
    })
}

#[derive(Serialize)]
struct LpacfReport {
    series_length: usize,
    p_hat: usize,
    #[serde(flatten)]
    estimate: forlap::local::LpacfEstimate,
}

fn run_lpacf(a: &LpacfArgs, dir: &Path) -> Result<Outcome> {
    let prep = prepare(&a.input)?;
    let n = prep.values.len();
    let z = a.z.unwrap_or((n as f64 - 1.0) / n as f64);
    let spectral = SpectralOptions {
        family: a.family,
        ..SpectralOptions::default()
    };
    let estimate = lpacf_windowed(&prep.values, &a.window_config(n), z, &spectral)?;
    let p_hat = select_p(&estimate);
    let mut tsv = String::from("lag\tlpacf\thalfwidth\tsignificant\n");
    for (i, (q, h)) in estimate.values.iter().zip(&estimate.ci_halfwidth).enumerate() {
        tsv.push_str(&format!("{}\t{q}\t{h}\t{}\n", i + 1, u8::from(q.abs() > *h)));
    }
    let files = vec![
        write_json(
            &dir.join("lpacf.json"),
            &LpacfReport {
                series_length: n,
                p_hat,
                estimate,
            },
        )?,
        write_text(&dir.join("lpacf.tsv"), &tsv)?,
    ];
    Ok(Outcome {
        files,
        failures: 0,
        partial: false,
    })
}
