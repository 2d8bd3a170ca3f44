use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lifi_cli::commands::{self, BerMode, Context, Format, McArgs, Outcome, SweepAngle};
use lifi_cli::config::ScenarioFile;
use lifi_cli::CliError;

/// LOS link analysis for randomly oriented optical-wireless receivers.
#[derive(Parser)]
#[command(name = "lifi-link", version)]
struct Cli {
    /// Scenario file (TOML, or JSON with a `.json` extension). Defaults to
    /// the built-in reference scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for Monte-Carlo runs.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum AngleArg {
    Theta,
    Omega,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Vertical,
    FixedTheta,
    Optimum,
    Random,
    Approx,
    Exact,
    Mc,
}

#[derive(Args, Clone, Copy)]
struct McFlags {
    /// Monte-Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Sampling threads (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Histogram bins.
    #[arg(long, default_value_t = 100)]
    bins: usize,
}

impl From<McFlags> for McArgs {
    fn from(f: McFlags) -> Self {
        McArgs {
            samples: f.samples,
            workers: f.workers,
            bins: f.bins,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// LOS gain along a θ or Ω sweep.
    GainSweep {
        #[arg(long, value_enum)]
        variable: Option<AngleArg>,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Fixed elevation for an Ω sweep.
        #[arg(long)]
        theta: Option<f64>,
        /// Fixed facing direction for a θ sweep.
        #[arg(long)]
        omega: Option<f64>,
    },
    /// Facing directions that keep the AP in view at a given elevation.
    OmegaRange {
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        fov: Option<f64>,
    },
    /// Pr{H = 0} against horizontal distance for several FOVs.
    OutageProfile {
        #[arg(long, default_value_t = 41.0)]
        theta: f64,
        #[arg(long, value_delimiter = ',', default_value = "30,60,90")]
        fov: Vec<f64>,
        #[arg(long)]
        r_start: Option<f64>,
        #[arg(long)]
        r_stop: Option<f64>,
        #[arg(long)]
        r_step: Option<f64>,
    },
    /// Analytic SNR PDF/CDF with a Monte-Carlo cross-check.
    SnrDist {
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[command(flatten)]
        mc: McFlags,
    },
    /// Average BER against transmitted optical power.
    BerCurve {
        #[arg(long, value_delimiter = ',', default_value = "4,16")]
        orders: Vec<u32>,
        #[arg(long, value_enum, value_delimiter = ',',
              default_value = "vertical,fixed-theta,optimum,random,approx,exact")]
        modes: Vec<ModeArg>,
        #[arg(long)]
        p_start: Option<f64>,
        #[arg(long)]
        p_stop: Option<f64>,
        #[arg(long)]
        p_step: Option<f64>,
        /// Elevation for the fixed-theta mode (default: the file's θ or μ_θ).
        #[arg(long)]
        theta: Option<f64>,
        #[command(flatten)]
        mc: McFlags,
    },
    /// Runs the Monte-Carlo consistency checks and reports them as JSON.
    McValidate {
        #[command(flatten)]
        mc: McFlags,
        /// KS threshold for the conditional gain distribution.
        #[arg(long, default_value_t = 0.05)]
        ks_tol: f64,
        /// Shift applied to μ_θ on the analytic side only.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        perturb_mu: f64,
    },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let file = ScenarioFile::load(cli.config.as_deref())?;
    let ctx = Context {
        file,
        seed: cli.seed,
        format: cli.format.map(|f| match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }),
    };
    match cli.command {
        Command::GainSweep {
            variable,
            start,
            stop,
            step,
            theta,
            omega,
        } => commands::gain_sweep(
            &ctx,
            &commands::GainSweepArgs {
                variable: variable.map(|v| match v {
                    AngleArg::Theta => SweepAngle::Theta,
                    AngleArg::Omega => SweepAngle::Omega,
                }),
                start,
                stop,
                step,
                theta,
                omega,
            },
        ),
        Command::OmegaRange { theta, fov } => commands::omega_range_cmd(&ctx, theta, fov),
        Command::OutageProfile {
            theta,
            fov,
            r_start,
            r_stop,
            r_step,
        } => commands::outage_profile(
            &ctx,
            &commands::OutageArgs {
                theta,
                fovs: fov,
                r_start,
                r_stop,
                r_step,
            },
        ),
        Command::SnrDist { points, mc } => commands::snr_dist(&ctx, points, &mc.into()),
        Command::BerCurve {
            orders,
            modes,
            p_start,
            p_stop,
            p_step,
            theta,
            mc,
        } => commands::ber_curve(
            &ctx,
            &commands::BerArgs {
                orders,
                modes: modes
                    .into_iter()
                    .map(|m| match m {
                        ModeArg::Vertical => BerMode::Vertical,
                        ModeArg::FixedTheta => BerMode::FixedTheta,
                        ModeArg::Optimum => BerMode::Optimum,
                        ModeArg::Random => BerMode::Random,
                        ModeArg::Approx => BerMode::Approx,
                        ModeArg::Exact => BerMode::Exact,
                        ModeArg::Mc => BerMode::Mc,
                    })
                    .collect(),
                p_start,
                p_stop,
                p_step,
                theta,
                mc: mc.into(),
            },
        ),
        Command::McValidate {
            mc,
            ks_tol,
            perturb_mu,
        } => commands::mc_validate(
            &ctx,
            &commands::ValidateArgs {
                mc: mc.into(),
                ks_tol,
                perturb_mu,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    let outcome = match run(cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("lifi-link: {e}");
            return ExitCode::from(CliError::EXIT_CONFIG);
        }
    };
    let written = match &out {
        Some(path) => std::fs::write(path, &outcome.body),
        None => std::io::stdout().lock().write_all(outcome.body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("lifi-link: cannot write output: {e}");
        return ExitCode::from(CliError::EXIT_CONFIG);
    }
    if let Some(notes) = &outcome.notes {
        eprint!("{notes}");
    }
    match outcome.failure {
        Some(what) => {
            eprintln!("lifi-link: validation failed: {what}");
            ExitCode::from(CliError::EXIT_VALIDATION)
        }
        None => ExitCode::SUCCESS,
    }
}
