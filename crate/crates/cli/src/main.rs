use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cofrag_cli::{commands, CliError, Outcome};

#[derive(Parser)]
#[command(name = "cofrag", version, about = "Coagulation with collision-induced fragmentation: runs and checks")]
struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write trajectory, snapshots and manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the declared kernel constants against the assumptions.
    CheckKernels {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also check the uniqueness weights from the analysis block.
        #[arg(long)]
        uniqueness: bool,
    },
    /// Run two configurations and compare them with the uniqueness distance.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        against: PathBuf,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Distances between runs at successive truncation indices.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated increasing truncation indices.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print moment envelopes and pointwise bounds at the sample times.
    Envelopes {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(command: Command) -> Result<Outcome, CliError> {
    let mut stdout = io::stdout().lock();
    match command {
        Command::Run { config, out } => commands::cmd_run(&config, &out, &mut stdout),
        Command::CheckKernels { config, out, uniqueness } => {
            commands::cmd_check_kernels(&config, out.as_deref(), uniqueness, &mut stdout)
        }
        Command::Compare { config, against, theta, out } => {
            commands::cmd_compare(&config, &against, theta, &out, &mut stdout)
        }
        Command::Convergence { config, n, theta, out } => commands::cmd_convergence(&config, &n, theta, &out, &mut stdout),
        Command::Envelopes { config, out } => commands::cmd_envelopes(&config, out.as_deref(), &mut stdout),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(CliError::Runtime(format!("cannot start thread pool: {e}"))),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
