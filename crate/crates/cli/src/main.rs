//! `qce`: runs the precoding experiments and the built-in self test.

mod config;
mod plot;
mod presets;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{Layer, Params};
use presets::Preset;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "qce", version, about = "Quantized constant-envelope precoding experiments")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a configured sweep and write CSV plus a plot script.
    Run(RunArgs),
    /// Run the built-in property checks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Inject a sign flip into the PSK LP build; the margin check must fail.
        #[arg(long)]
        mutate: bool,
    },
    /// List the presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// Preset name (fig5 … fig8, table1 … table4).
    #[arg(value_name = "PRESET")]
    name: Option<Preset>,
    #[arg(long, conflicts_with = "name")]
    preset: Option<Preset>,
    /// TOML file with any of the flag settings (snake_case keys).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Channel realizations.
    #[arg(long)]
    channels: Option<usize>,
    /// Symbol vectors per channel realization.
    #[arg(long)]
    vectors: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, env = "QCE_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    ptx_min_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    ptx_max_db: Option<f64>,
    #[arg(long)]
    ptx_step_db: Option<f64>,
    /// CSI error variance fraction.
    #[arg(long)]
    nu: Option<f64>,
    /// DAC phase count.
    #[arg(long)]
    q: Option<usize>,
    /// Modulation, e.g. QPSK, 8PSK, 16QAM.
    #[arg(long = "mod")]
    modulation: Option<String>,
    /// msm, qwf, wf-ce or wf.
    #[arg(long)]
    precoder: Option<String>,
    /// Base-station antennas.
    #[arg(long)]
    n: Option<usize>,
    /// Users.
    #[arg(long)]
    m: Option<usize>,
    /// Blind gain estimation block length.
    #[arg(long)]
    block_len: Option<usize>,
    #[arg(long, hide = true)]
    lp_max_iterations: Option<usize>,
}

impl RunArgs {
    fn layer(&self) -> Layer {
        Layer {
            preset: self.name.or(self.preset).map(|p| p.name().to_string()),
            n: self.n,
            m: self.m,
            q: self.q,
            modulation: self.modulation.clone(),
            precoder: self.precoder.clone(),
            ptx_min_db: self.ptx_min_db,
            ptx_max_db: self.ptx_max_db,
            ptx_step_db: self.ptx_step_db,
            nu: self.nu,
            channels: self.channels,
            vectors: self.vectors,
            block_len: self.block_len,
            seed: self.seed,
            lp_max_iterations: self.lp_max_iterations,
        }
    }
}

fn run(args: &RunArgs) -> Result<ExitCode, CliError> {
    let file = match &args.config {
        Some(path) => Layer::from_file(path)?,
        None => Layer::default(),
    };
    let flags = args.layer();
    let preset = flags
        .preset
        .as_ref()
        .or(file.preset.as_ref())
        .map(|s| s.parse::<Preset>())
        .transpose()
        .map_err(CliError::Config)?;
    let base = preset.map(Preset::defaults).unwrap_or_default();
    let params = Params::resolve(&base.overlay(&file).overlay(&flags))?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| CliError::Config(e.to_string()))?;
    let report = pool.install(|| presets::run(preset, &params, &args.out_dir))?;

    print!("{}", report.summary);
    println!("wrote {}", report.csv.display());
    println!("wrote {}", report.plot.display());
    if report.failures.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    for f in &report.failures {
        eprintln!("skipped: {f}");
    }
    eprintln!("{} realization(s) failed to precode", report.failures.len());
    Ok(ExitCode::from(3))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match cli.command {
        Command::Run(args) => run(&args).unwrap_or_else(|e| {
            eprintln!("qce: {e}");
            ExitCode::from(e.exit_code())
        }),
        Command::Selftest { seed, mutate } => {
            let checks = selftest::run(seed, mutate);
            let mut failed = 0;
            for c in &checks {
                match &c.result {
                    Ok(msg) => println!("PASS {}: {msg}", c.name),
                    Err(msg) => {
                        failed += 1;
                        println!("FAIL {}: {msg}", c.name);
                    }
                }
            }
            println!("{}/{} checks passed", checks.len() - failed, checks.len());
            if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
        }
        Command::Presets => {
            for p in Preset::ALL {
                println!("{:<7} {}", p.name(), p.describe());
            }
            ExitCode::SUCCESS
        }
    }
}
