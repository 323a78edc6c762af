use anyhow::Result;
use clap::{Parser, Subcommand};
use nlslab_cli::commands::{self, Ctx};
use nlslab_cli::config::LabConfig;
use nlslab_cli::report;
use nlslab::LabError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nlslab",
    about = "Numerical laboratory for radial cubic wave fields over a two-level well",
    version
)]
struct Cli {
    /// Experiment configuration (TOML-style key = value sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV artifacts and the report.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for any stochastic initial data.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Find a well depth meeting the configured beat margin.
    DesignPotential,
    /// Discrete levels and mode profiles of the configured well.
    Spectrum,
    /// Continue both stationary branches and fit their energy curves.
    Families,
    /// Estimate the resonant transfer rate on the probe grid.
    Gamma0,
    /// Run the configured experiment and classify the outcome.
    Evolve,
    /// Re-classify a stored trajectory table.
    Classify {
        /// Path to a trajectory.csv produced by `evolve`.
        input: PathBuf,
    },
    /// Repeat the experiment across the configured axis values.
    Sweep,
    /// Monte Carlo check of the fixed-constant bounds used by the fits.
    VerifyInequalities,
    /// Decay fit of the freely propagated continuum packet.
    FreeDecay,
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        // a second invocation in-process would fail; the setting still holds
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = LabConfig::load(cli.config.as_deref())?;
    commands::ensure_out_dir(&cli.out)?;
    let ctx = Ctx {
        cfg,
        out: cli.out,
        seed: cli.seed,
    };
    let blocks = match &cli.verb {
        Verb::DesignPotential => commands::cmd_design_potential(&ctx)?,
        Verb::Spectrum => commands::cmd_spectrum(&ctx)?,
        Verb::Families => commands::cmd_families(&ctx)?,
        Verb::Gamma0 => commands::cmd_gamma0(&ctx)?,
        Verb::Evolve => commands::cmd_evolve(&ctx)?,
        Verb::Classify { input } => commands::cmd_classify(&ctx, input)?,
        Verb::Sweep => commands::cmd_sweep(&ctx)?,
        Verb::VerifyInequalities => commands::cmd_verify_inequalities(&ctx)?,
        Verb::FreeDecay => commands::cmd_free_decay(&ctx)?,
    };
    let text = report::render_blocks(&blocks);
    print!("{text}");
    std::fs::write(ctx.out.join("report.txt"), text)?;
    Ok(())
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<LabError>() {
        Some(LabError::DesignFailed(_)) => 2,
        Some(LabError::BlowUp { .. }) => 3,
        Some(LabError::ResolutionInsufficient { .. }) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
