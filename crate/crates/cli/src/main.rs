use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
#[cfg(test)]
use clap::CommandFactory;
use forlap::forecast::{Kernel, Method};
use forlap::simulation::{Innovation, ModelId};
use forlap::wavelet::WaveletFamily;
use forlap_cli::config::{
    BacktestArgs, ForecastArgs, LpacfArgs, MethodSettings, SeriesInput, SimulateArgs, TableArgs,
};
use forlap_cli::{replay, run, Command, Outcome, RunConfig, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "forlap", version, about = "Forecasting for locally stationary time series")]
struct Cli {
    /// Directory receiving reports and the run manifest.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV, default_value = "forlap-output")]
    output_dir: PathBuf,

    /// Worker threads for Monte-Carlo tables.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Forecast the next values of a series.
    Forecast {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        methods: MethodOpts,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        horizon: usize,
        /// Also integrate point forecasts back to the undifferenced scale.
        #[arg(long)]
        integrate: bool,
    },
    /// Rolling forecasts of the last observations of a series.
    Backtest {
        #[command(flatten)]
        input: InputOpts,
        #[command(flatten)]
        methods: MethodOpts,
        #[arg(long, default_value_t = 20)]
        last_n: usize,
        /// Nominal coverage in percent; repeatable.
        #[arg(long = "level", value_delimiter = ',', default_value = "90")]
        coverage: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        horizon: usize,
    },
    /// Write simulated replications of a model as CSV files.
    Simulate {
        #[arg(long)]
        model: ModelId,
        #[arg(long, default_value = "gaussian")]
        innovation: Innovation,
        #[arg(long)]
        length: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        replications: usize,
    },
    /// Monte-Carlo coverage table over simulated models.
    Table {
        #[arg(long = "model", value_delimiter = ',', required = true)]
        models: Vec<ModelId>,
        #[arg(long, default_value = "gaussian")]
        innovation: Innovation,
        #[command(flatten)]
        methods: MethodOpts,
        #[arg(long, default_value = "ar")]
        baseline: Method,
        #[arg(long, default_value_t = 100)]
        replications: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        last_n: usize,
        #[arg(long, default_value_t = 1)]
        horizon: usize,
    },
    /// Windowed local partial autocorrelation with confidence bounds.
    Lpacf {
        #[command(flatten)]
        input: InputOpts,
        #[arg(long, default_value = "haar")]
        family: WaveletFamily,
        /// Odd window length; defaults to about a third of the series.
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        tau_max: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Rescaled time in (0, 1]; defaults to the last observation.
        #[arg(long)]
        z: Option<f64>,
    },
    /// Rerun the configuration recorded in a manifest.
    Replay { manifest: PathBuf },
}

#[derive(Args)]
struct InputOpts {
    /// CSV file holding the series.
    input: PathBuf,
    /// Column name or 1-based position when the file has several.
    #[arg(long)]
    column: Option<String>,
    /// Differencing order (0, 1 or 2) applied before analysis.
    #[arg(long, default_value_t = 0)]
    difference: usize,
    /// Remove the sample mean before forecasting.
    #[arg(long)]
    demean: bool,
}

impl InputOpts {
    fn into_input(self) -> SeriesInput {
        SeriesInput {
            path: self.input,
            column: self.column.map(Into::into),
            difference: self.difference,
            demean: self.demean,
        }
    }
}

#[derive(Args)]
struct MethodOpts {
    #[arg(long = "method", value_delimiter = ',', default_value = "forlap,ar")]
    methods: Vec<Method>,
    #[arg(long, default_value = "haar")]
    family: WaveletFamily,
    /// Number of wavelet scales; defaults to floor(log2 T).
    #[arg(long)]
    levels: Option<usize>,
    /// Rescale GYW weights to unit norm.
    #[arg(long)]
    regularize: bool,
    #[arg(long, default_value_t = 3)]
    fvbvs_p0: usize,
    #[arg(long, default_value_t = 0.1)]
    fvbvs_g0: f64,
    /// Training length for FVBvS (required when it is selected).
    #[arg(long)]
    fvbvs_m: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    fvbvs_delta: f64,
    #[arg(long, default_value = "box")]
    fvbvs_kernel: Kernel,
    #[arg(long, default_value_t = 2)]
    tvar_order: usize,
    #[arg(long)]
    tvar_window: Option<usize>,
}

impl MethodOpts {
    fn split(self) -> (Vec<Method>, MethodSettings) {
        let settings = MethodSettings {
            family: self.family,
            levels: self.levels,
            regularize: self.regularize,
            fvbvs_p0: self.fvbvs_p0,
            fvbvs_g0: self.fvbvs_g0,
            fvbvs_m: self.fvbvs_m,
            fvbvs_delta: self.fvbvs_delta,
            fvbvs_kernel: self.fvbvs_kernel,
            tvar_order: self.tvar_order,
            tvar_window: self.tvar_window,
        };
        (self.methods, settings)
    }
}

fn command(cmd: Cmd) -> Command {
    match cmd {
        Cmd::Forecast {
            input,
            methods,
            alpha,
            horizon,
            integrate,
        } => {
            let (methods, settings) = methods.split();
            Command::Forecast(ForecastArgs {
                input: input.into_input(),
                methods,
                settings,
                alpha,
                horizon,
                integrate,
            })
        }
        Cmd::Backtest {
            input,
            methods,
            last_n,
            coverage,
            horizon,
        } => {
            let (methods, settings) = methods.split();
            Command::Backtest(BacktestArgs {
                input: input.into_input(),
                methods,
                settings,
                last_n,
                levels: coverage.into_iter().map(|l| l / 100.0).collect(),
                horizon,
            })
        }
        Cmd::Simulate {
            model,
            innovation,
            length,
            seed,
            replications,
        } => Command::Simulate(SimulateArgs {
            model,
            innovation,
            length,
            seed,
            replications,
        }),
        Cmd::Table {
            models,
            innovation,
            methods,
            baseline,
            replications,
            seed,
            last_n,
            horizon,
        } => {
            let (methods, settings) = methods.split();
            Command::Table(TableArgs {
                models,
                innovation,
                methods,
                settings,
                baseline,
                replications,
                seed,
                last_n,
                horizon,
            })
        }
        Cmd::Lpacf {
            input,
            family,
            window,
            tau_max,
            alpha,
            z,
        } => Command::Lpacf(LpacfArgs {
            input: input.into_input(),
            family,
            window,
            tau_max,
            alpha,
            z,
        }),
        Cmd::Replay { .. } => unreachable!("replay is handled before conversion"),
    }
}

fn report(result: forlap_cli::Result<Outcome>) -> ExitCode {
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.failures > 0 {
                eprintln!("{} failure(s) recorded in failures.json", outcome.failures);
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Cmd::Replay { manifest } = &cli.command {
        return report(replay(manifest, &cli.output_dir));
    }
    let config = RunConfig {
        command: command(cli.command),
        output_dir: cli.output_dir,
        workers: cli.workers,
    };
    report(run(&config))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_definitions_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn backtest_levels_are_percentages() {
        let cli = Cli::try_parse_from(["forlap", "backtest", "x.csv", "--last-n", "50", "--level", "95"]).unwrap();
        match command(cli.command) {
            Command::Backtest(a) => {
                assert_eq!(a.levels, vec![0.95]);
                assert_eq!(a.last_n, 50);
                assert_eq!(a.methods, vec![Method::Forlap, Method::Ar]);
            }
            _ => panic!("wrong command"),
        }
    }
}
