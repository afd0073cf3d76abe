use clap::{Args, Parser, Subcommand};
use rainbound_cli::config::RunConfig;
use rainbound_cli::ingest::ingest_series;
use rainbound_cli::run::{
    run_alloc, run_bounds, run_detect, run_estimate, run_geometry, run_mc, RunContext,
};
use rainbound_cli::{CliError, CliResult};
use std::path::PathBuf;
use std::process::ExitCode;

/// Rain-rate sensing on Ku-band satellite OFDM downlinks: attenuation
/// bounds, sensing-optimal geometry, weather-adaptive pilot allocation,
/// CUSUM onset detection and MLE/MAP estimation, emitted as CSV/JSON.
#[derive(Parser)]
#[command(name = "rainbound", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Override the Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Force band-averaged P.838 coefficients.
    #[arg(long, conflicts_with = "full_p838")]
    band_average: bool,
    /// Force per-subcarrier P.838 coefficients.
    #[arg(long)]
    full_p838: bool,
    /// Observation noise generator: `db` or `chi2`.
    #[arg(long, value_parser = ["db", "chi2"])]
    noise_mode: Option<String>,
}

#[derive(Args)]
struct SeriesArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Attenuation time series (`timestamp_iso8601,attenuation_db` rows).
    #[arg(long)]
    series: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// CRB/BCRB sweeps, minimum detectable rain rate, identifiability and
    /// the Pareto frontier.
    Bounds(CommonArgs),
    /// Elevation profiles and the sensing-optimal elevation.
    Geometry(CommonArgs),
    /// Weather-adaptive pilot allocation against fixed baselines.
    Alloc(CommonArgs),
    /// CUSUM onset detection: delay theory vs simulation, optionally on an
    /// ingested series.
    Detect(SeriesArgs),
    /// Estimator efficiency tables, optionally estimates over an ingested
    /// series.
    Estimate(SeriesArgs),
    /// Monte Carlo harness: multi-link scaling, generator calibration,
    /// prior-information check and fusion.
    Mc(CommonArgs),
}

fn load_context(args: &CommonArgs) -> CliResult<RunContext> {
    let (mut config, source) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Lib(rainbound::Error::Config(format!("cannot read {}: {e}", path.display())))
            })?;
            (RunConfig::from_toml(&text)?, path.display().to_string())
        }
        None => (RunConfig::default(), "defaults".to_string()),
    };
    if let Some(seed) = args.seed {
        config.mc.seed = seed;
    }
    if args.band_average {
        config.band.p838_mode = "band-average".into();
    }
    if args.full_p838 {
        config.band.p838_mode = "per-subcarrier".into();
    }
    if let Some(mode) = &args.noise_mode {
        config.mc.noise_mode = mode.clone();
    }
    config.validate()?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", args.out.display())))?;
    Ok(RunContext { config, config_source: source, out_dir: args.out.clone() })
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Bounds(args) => run_bounds(&load_context(&args)?),
        Command::Geometry(args) => run_geometry(&load_context(&args)?),
        Command::Alloc(args) => run_alloc(&load_context(&args)?),
        Command::Detect(args) => {
            let ctx = load_context(&args.common)?;
            let series = args.series.as_deref().map(ingest_series).transpose()?;
            run_detect(&ctx, series.as_ref())
        }
        Command::Estimate(args) => {
            let ctx = load_context(&args.common)?;
            let series = args.series.as_deref().map(ingest_series).transpose()?;
            run_estimate(&ctx, series.as_ref())
        }
        Command::Mc(args) => run_mc(&load_context(&args)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rainbound: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
