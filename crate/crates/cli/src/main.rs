use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use noregret_cli::{catalog, report, run, validate, Overrides};

#[derive(Parser)]
#[command(
    name = "noregret",
    version,
    about = "Run no-regret learning experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of trials (overrides `trials` and `seeds`).
        #[arg(long)]
        trials: Option<usize>,
        /// Base seed (overrides `base_seed` and `seeds`).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List learners, wrappers and environments.
    ListAlgos,
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ListAlgos => {
            print!("{}", catalog::render());
            Ok(())
        }
        Command::Validate { config } => validate(&config).map(|msg| println!("{msg}")),
        Command::Run {
            config,
            out,
            trials,
            seed,
        } => run(&config, &Overrides { out, trials, seed }).map(|s| {
            let num = |v: Option<&serde_json::Value>| v.and_then(|v| v.as_f64());
            let show = |x: Option<f64>| x.map(report::fmt_f64).unwrap_or_else(|| "n/a".into());
            println!(
                "static regret {} (mean over trials), mean regret {}, bound {}, ratio {}",
                show(num(s.pointer("/static_regret/mean"))),
                show(num(s.get("mean_regret"))),
                show(num(s.get("bound"))),
                show(num(s.get("ratio")))
            );
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
