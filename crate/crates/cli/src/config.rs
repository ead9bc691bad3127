//! Run configuration shared by every command, and its validation.

use std::collections::BTreeSet;
use std::path::PathBuf;

use forlap::forecast::{FvbvsConfig, Kernel, Method, MethodConfig, ForlapOptions};
use forlap::local::WindowConfig;
use forlap::simulation::{Innovation, ModelId};
use forlap::spectral::SpectralOptions;
use forlap::wavelet::WaveletFamily;
use serde::{Deserialize, Serialize};

use crate::ingest::ColumnSelector;
use crate::{CliError, Result};

/// One fully specified invocation. Serialised verbatim into the run
/// manifest; the output directory is deliberately left out so a replay
/// elsewhere produces identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(skip)]
    pub output_dir: PathBuf,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    Forecast(ForecastArgs),
    Backtest(BacktestArgs),
    Simulate(SimulateArgs),
    Table(TableArgs),
    Lpacf(LpacfArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Forecast(_) => "forecast",
            Command::Backtest(_) => "backtest",
            Command::Simulate(_) => "simulate",
            Command::Table(_) => "table",
            Command::Lpacf(_) => "lpacf",
        }
    }
}

/// Where a series comes from and how it is prepared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesInput {
    pub path: PathBuf,
    pub column: Option<ColumnSelector>,
    /// Differencing order, 0 to 2.
    pub difference: usize,
    pub demean: bool,
}

/// Settings feeding the per-method configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSettings {
    pub family: WaveletFamily,
    pub levels: Option<usize>,
    pub regularize: bool,
    pub fvbvs_p0: usize,
    pub fvbvs_g0: f64,
    /// Training length; has no default and must be given for FVBvS runs.
    pub fvbvs_m: Option<usize>,
    pub fvbvs_delta: f64,
    pub fvbvs_kernel: Kernel,
    pub tvar_order: usize,
    pub tvar_window: Option<usize>,
}

impl Default for MethodSettings {
    fn default() -> Self {
        let fv = FvbvsConfig::default();
        Self {
            family: WaveletFamily::Haar,
            levels: None,
            regularize: false,
            fvbvs_p0: fv.p0,
            fvbvs_g0: fv.g0,
            fvbvs_m: None,
            fvbvs_delta: fv.delta,
            fvbvs_kernel: fv.kernel,
            tvar_order: 2,
            tvar_window: None,
        }
    }
}

impl MethodSettings {
    /// Concrete configuration for `method`. Call only after validation.
    pub fn method_config(&self, method: Method) -> MethodConfig {
        match method {
            Method::Forlap => MethodConfig::Forlap(ForlapOptions {
                spectral: SpectralOptions {
                    family: self.family,
                    levels: self.levels,
                    ..SpectralOptions::default()
                },
                regularize: self.regularize,
                ..ForlapOptions::default()
            }),
            Method::Fvbvs => MethodConfig::Fvbvs(FvbvsConfig {
                p0: self.fvbvs_p0,
                g0: self.fvbvs_g0,
                m: self.fvbvs_m.unwrap_or(0),
                delta: self.fvbvs_delta,
                kernel: self.fvbvs_kernel,
                family: self.family,
            }),
            Method::Ar => MethodConfig::Ar,
            Method::Es => MethodConfig::Es,
            Method::Tvar => MethodConfig::Tvar {
                order: self.tvar_order,
                window: self.tvar_window,
            },
        }
    }

    fn check(&self, methods: &[Method], problems: &mut Vec<String>) {
        if methods.is_empty() {
            problems.push("at least one method is required".into());
        }
        let distinct: BTreeSet<_> = methods.iter().collect();
        if distinct.len() != methods.len() {
            problems.push("methods must not repeat".into());
        }
        if self.levels == Some(0) {
            problems.push("levels must be at least 1".into());
        }
        if methods.contains(&Method::Fvbvs) {
            match self.fvbvs_m {
                None => problems.push("fvbvs needs an explicit training length (--fvbvs-m)".into()),
                Some(0) => problems.push("fvbvs training length must be at least 1".into()),
                Some(_) => {}
            }
            if self.fvbvs_p0 == 0 {
                problems.push("fvbvs p0 must be at least 1".into());
            }
            if !(self.fvbvs_g0 > 0.0 && self.fvbvs_g0.is_finite()) {
                problems.push(format!("fvbvs g0 must be positive, got {}", self.fvbvs_g0));
            }
            if !(self.fvbvs_delta > 0.0 && self.fvbvs_delta.is_finite()) {
                problems.push(format!("fvbvs delta must be positive, got {}", self.fvbvs_delta));
            }
        }
        if methods.contains(&Method::Tvar) && self.tvar_order == 0 {
            problems.push("tvar order must be at least 1".into());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastArgs {
    pub input: SeriesInput,
    pub methods: Vec<Method>,
    pub settings: MethodSettings,
    pub alpha: f64,
    pub horizon: usize,
    /// Also report point forecasts integrated back to levels.
    pub integrate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestArgs {
    pub input: SeriesInput,
    pub methods: Vec<Method>,
    pub settings: MethodSettings,
    pub last_n: usize,
    /// Nominal coverage levels as fractions.
    pub levels: Vec<f64>,
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateArgs {
    pub model: ModelId,
    pub innovation: Innovation,
    pub length: Option<usize>,
    pub seed: u64,
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableArgs {
    pub models: Vec<ModelId>,
    pub innovation: Innovation,
    pub methods: Vec<Method>,
    pub settings: MethodSettings,
    pub baseline: Method,
    pub replications: usize,
    pub seed: u64,
    pub last_n: usize,
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpacfArgs {
    pub input: SeriesInput,
    pub family: WaveletFamily,
    pub window: Option<usize>,
    pub tau_max: Option<usize>,
    pub alpha: f64,
    /// Rescaled time; defaults to the last observation.
    pub z: Option<f64>,
}

impl LpacfArgs {
    /// Window settings for a series of `len` points.
    pub fn window_config(&self, len: usize) -> WindowConfig {
        let mut config = WindowConfig::default_for(len);
        if let Some(w) = self.window {
            config.window_length = w;
            config.tau_max = config.tau_max.min((w.saturating_sub(1) / 2).max(1));
        }
        if let Some(t) = self.tau_max {
            config.tau_max = t;
        }
        config.alpha = self.alpha;
        config
    }
}

fn check_input(input: &SeriesInput, problems: &mut Vec<String>) {
    if !input.path.is_file() {
        problems.push(format!("input file {} does not exist", input.path.display()));
    }
    if input.difference > 2 {
        problems.push(format!("difference order must be 0, 1 or 2, got {}", input.difference));
    }
}

fn check_alpha(alpha: f64, problems: &mut Vec<String>) {
    if !(alpha > 0.0 && alpha < 1.0) {
        problems.push(format!("alpha must lie in (0, 1), got {alpha}"));
    }
}

impl RunConfig {
    /// Checks every parameter and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.workers == 0 {
            problems.push("workers must be at least 1".into());
        }
        match &self.command {
            Command::Forecast(a) => {
                check_input(&a.input, &mut problems);
                a.settings.check(&a.methods, &mut problems);
                check_alpha(a.alpha, &mut problems);
                if a.horizon == 0 {
                    problems.push("horizon must be at least 1".into());
                }
                if a.integrate && a.input.difference == 0 {
                    problems.push("--integrate needs a differenced series (--difference 1 or 2)".into());
                }
            }
            Command::Backtest(a) => {
                check_input(&a.input, &mut problems);
                a.settings.check(&a.methods, &mut problems);
                if a.last_n == 0 {
                    problems.push("last-n must be at least 1".into());
                }
                if a.horizon == 0 {
                    problems.push("horizon must be at least 1".into());
                }
                if a.levels.is_empty() {
                    problems.push("at least one coverage level is required".into());
                }
                for &l in &a.levels {
                    if !(l > 0.0 && l < 1.0) {
                        problems.push(format!("coverage level {}% is outside (0, 100)", l * 100.0));
                    }
                }
            }
            Command::Simulate(a) => {
                if a.replications == 0 {
                    problems.push("replications must be at least 1".into());
                }
                if a.length == Some(0) {
                    problems.push("length must be positive".into());
                }
            }
            Command::Table(a) => {
                if a.models.is_empty() {
                    problems.push("at least one model is required".into());
                }
                a.settings.check(&a.methods, &mut problems);
                if !a.methods.contains(&a.baseline) {
                    problems.push(format!("baseline {} must be one of the methods", a.baseline));
                }
                if a.replications == 0 {
                    problems.push("replications must be at least 1".into());
                }
                if a.last_n == 0 {
                    problems.push("last-n must be at least 1".into());
                }
                if a.horizon == 0 {
                    problems.push("horizon must be at least 1".into());
                }
            }
            Command::Lpacf(a) => {
                check_input(&a.input, &mut problems);
                check_alpha(a.alpha, &mut problems);
                if let Some(w) = a.window {
                    if w < 3 || w % 2 == 0 {
                        problems.push(format!("window must be odd and at least 3, got {w}"));
                    }
                }
                if a.tau_max == Some(0) {
                    problems.push("tau-max must be at least 1".into());
                }
                if let Some(z) = a.z {
                    if !(z > 0.0 && z <= 1.0) {
                        problems.push(format!("z must lie in (0, 1], got {z}"));
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(problems))
        }
    }
}
