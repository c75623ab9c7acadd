//! Command-line front end: simulation, single tests, operator
//! estimation, and Monte Carlo size/power studies.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use arhgof::estimate::{estimate_autocorrelation, BasisChoice};
use arhgof::func::KernelMatrix;
use arhgof::io;
use arhgof::mc::{
    emit_table, run_power_study, run_size_study, Hypothesis, Preset, StudyConfig, TableFormat,
};
use arhgof::meptest::{run_gof_test, TestConfig, TestMode};
use arhgof::rng::{Purpose, RngStream};
use arhgof::simulate::{config_cov_kernel, simulate_arh1, GammaKind, GaussianSpec, SimConfig};
use arhgof::Error;

#[derive(Parser)]
#[command(
    name = "arhgof",
    version,
    about = "Goodness-of-fit testing for ARH(1) functional time series",
    after_help = "Exit codes: 0 success, 2 configuration/input error, 3 numerical failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an ARH(1) series and emit it as CSV.
    Simulate(SimulateArgs),
    /// Run the goodness-of-fit test on a series CSV.
    Test(TestArgs),
    /// Estimate the autocorrelation operator from a series CSV.
    Estimate(EstimateArgs),
    /// Monte Carlo study of empirical test size.
    McSize(StudyArgs),
    /// Monte Carlo study of empirical test power.
    McPower(StudyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Simulation config file (`key = value` lines); defaults otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's sample size.
    #[arg(long)]
    n: Option<usize>,
    /// Output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    /// Series CSV to test.
    series: PathBuf,
    /// Hypothesized autocorrelation kernel CSV (zero operator if omitted).
    #[arg(long)]
    gamma0: Option<PathBuf>,
    /// Simulation config supplying the projection-direction laws.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for projection directions and bootstrap multipliers.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of random projections.
    #[arg(long, default_value_t = 5)]
    np: usize,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 2000)]
    boot: usize,
    /// Use the standardized supremum statistic.
    #[arg(long)]
    standardized: bool,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Estimate the operator from the sample and test residuals
    /// against the estimate instead of against Γ₀.
    #[arg(long)]
    misspecified: bool,
    /// Output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Series CSV to fit.
    series: PathBuf,
    /// Truncation level (data-driven schedule if omitted).
    #[arg(long)]
    k: Option<usize>,
    /// Output path for the estimated kernel CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    Desk,
    Paper,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
}

#[derive(Args)]
struct StudyArgs {
    /// Simulation config file for the data-generating process.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed for all repetitions.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = default pool).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Scale preset: desk (R=200, B=500) or paper (R=500, B=2000).
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Repetitions (overrides the preset).
    #[arg(long)]
    reps: Option<usize>,
    /// Bootstrap replicates (overrides the preset).
    #[arg(long)]
    boot: Option<usize>,
    /// Comma-separated projection counts, e.g. `1,2,5,15`.
    #[arg(long)]
    np: Option<String>,
    /// Comma-separated sample sizes, e.g. `50,100,200`.
    #[arg(long)]
    n: Option<String>,
    /// Use the standardized supremum statistic.
    #[arg(long)]
    standardized: bool,
    /// Table format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Append binomial standard-error columns.
    #[arg(long)]
    with_stderr: bool,
    /// Output path (stdout if omitted). Also enables checkpointing to
    /// `<out>.state.json` every 25 repetitions.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Test(args) => cmd_test(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::McSize(args) => cmd_study(args, Hypothesis::Null),
        Command::McPower(args) => cmd_study(args, Hypothesis::Alternative),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Numerical(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn load_sim_config(path: &Option<PathBuf>) -> Result<SimConfig, Error> {
    match path {
        Some(p) => SimConfig::parse(&fs::read_to_string(p)?),
        None => Ok(SimConfig::default()),
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn parse_usize_list(text: &str, what: &str) -> Result<Vec<usize>, Error> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad {what} entry {part:?} in {text:?}")))
        })
        .collect()
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let mut cfg = load_sim_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    let spec = cfg.build()?;
    if !spec.is_contractive() {
        eprintln!(
            "warning: autocorrelation operator norm {:.3} ≥ 1; the recursion is not \
             contractive and the simulated series may be nonstationary",
            spec.spectral_proxy()
        );
    }
    let series = simulate_arh1(&spec, RngStream::new(cfg.seed, 0, Purpose::Series))?;
    let mut buf = Vec::new();
    io::write_series_to(&mut buf, &series)?;
    write_output(&args.out, &String::from_utf8(buf).expect("csv is utf-8"))
}

fn cmd_test(args: TestArgs) -> Result<(), Error> {
    let series = io::read_series(&args.series)?;
    let grid = series.grid().clone();
    let gamma0 = match &args.gamma0 {
        Some(path) => io::read_kernel(path, Some(grid.clone()))?,
        None => KernelMatrix::zero(grid.clone()),
    };
    let cfg = load_sim_config(&args.config)?;
    let eps_dir =
        GaussianSpec::centered(config_cov_kernel(&grid, cfg.sigma_eps, cfg.theta_eps)?)?;
    let y_dir = GaussianSpec::centered(config_cov_kernel(&grid, cfg.sigma_y0, cfg.theta_y0)?)?;
    let test_cfg = TestConfig {
        n_projections: args.np,
        n_bootstrap: args.boot,
        standardized: args.standardized,
        alpha: args.alpha,
        ..TestConfig::default()
    };
    let mode = if args.misspecified {
        TestMode::Misspecified
    } else {
        TestMode::Specified
    };
    let outcome = run_gof_test(
        &series,
        &gamma0,
        &test_cfg,
        &eps_dir,
        &y_dir,
        RngStream::new(args.seed, 0, Purpose::Series),
        mode,
    )?;
    let mut buf = Vec::new();
    outcome.write_csv(&mut buf)?;
    write_output(&args.out, &String::from_utf8(buf).expect("csv is utf-8"))
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), Error> {
    let series = io::read_series(&args.series)?;
    let estimate = estimate_autocorrelation(&series, args.k, BasisChoice::Empirical)?;
    eprintln!(
        "k_n = {}, operator norm = {:.6}, norm bound = {:.6}",
        estimate.k_n(),
        estimate.operator_norm(),
        estimate.norm_bound()
    );
    let mut buf = Vec::new();
    io::write_kernel_to(&mut buf, estimate.operator())?;
    write_output(&args.out, &String::from_utf8(buf).expect("csv is utf-8"))
}

fn cmd_study(args: StudyArgs, hypothesis: Hypothesis) -> Result<(), Error> {
    let mut dgp = load_sim_config(&args.config)?;
    if hypothesis == Hypothesis::Alternative && dgp.gamma_kind == GammaKind::Zero {
        // A power study against the zero kernel is a size study; promote
        // to the configured exponential alternative.
        dgp.gamma_kind = GammaKind::ExpScaled;
    }
    let mut study = StudyConfig::new(dgp, hypothesis);
    if let Some(preset) = args.preset {
        match preset {
            PresetArg::Desk => Preset::Desk.apply(&mut study),
            PresetArg::Paper => Preset::Paper.apply(&mut study),
        }
    }
    if let Some(seed) = args.seed {
        study.base_seed = seed;
    }
    study.workers = args.workers;
    if let Some(reps) = args.reps {
        study.reps = reps;
    }
    if let Some(boot) = args.boot {
        study.test.n_bootstrap = boot;
    }
    if let Some(np) = &args.np {
        study.np_list = parse_usize_list(np, "projection count")?;
    }
    if let Some(n) = &args.n {
        study.sample_sizes = parse_usize_list(n, "sample size")?;
    }
    study.test.standardized = args.standardized;
    if let Some(out) = &args.out {
        let mut state = out.as_os_str().to_owned();
        state.push(".state.json");
        study.checkpoint = Some(PathBuf::from(state));
    }
    let result = match hypothesis {
        Hypothesis::Null => run_size_study(&study)?,
        Hypothesis::Alternative => run_power_study(&study)?,
    };
    eprintln!(
        "{} repetitions × {} sample sizes finished in {:.1}s",
        result.reps,
        result.sample_sizes.len(),
        result.wall_time_secs
    );
    let format = match args.format {
        FormatArg::Csv => TableFormat::Csv,
        FormatArg::Markdown => TableFormat::Markdown,
    };
    write_output(&args.out, &emit_table(&result, format, args.with_stderr))
}
