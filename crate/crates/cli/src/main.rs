use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use crosscheck_cli::service::serve;
use crosscheck_cli::{explain_command, run_command, ExplainArgs, InputError, RunArgs, Store};
use crosscheck_core::Strictness;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "crosscheck", version, about = "Schedule activity plans and explain the failures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct PlanInput {
    /// Plan file (`.plan.json`).
    plan: PathBuf,
    /// Override a config field, e.g. `--set initial_soc=650`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Warn about unknown fields instead of rejecting the plan.
    #[arg(long)]
    lenient: bool,
}

impl PlanInput {
    fn strictness(&self) -> Strictness {
        if self.lenient {
            Strictness::Lenient
        } else {
            Strictness::Strict
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Schedule a plan and write `.sched.json` and `.explain.json`.
    Run {
        #[command(flatten)]
        input: PlanInput,
        /// Output directory (defaults to the plan's directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Explain only this activity.
        #[arg(long)]
        activity: Option<String>,
        /// Print the partial schedule after step K to stdout.
        #[arg(long, value_name = "K")]
        step: Option<usize>,
    },
    /// Print the explanation report for failed activities.
    Explain {
        #[command(flatten)]
        input: PlanInput,
        #[arg(long)]
        activity: Option<String>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        /// Save plan revisions under this directory and reload them at start.
        #[arg(long)]
        persist: Option<PathBuf>,
    },
}

fn report(err: &InputError) {
    eprintln!("error: {err}");
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("CROSSCHECK_LOG").unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            input,
            out,
            activity,
            step,
        } => {
            let args = RunArgs {
                strictness: input.strictness(),
                plan: input.plan,
                out,
                activity,
                step,
                overrides: input.overrides,
            };
            match run_command(&args) {
                Ok(outcome) => {
                    for w in &outcome.warnings {
                        eprintln!("warning: {w}");
                    }
                    if let Some(dump) = &outcome.step_dump {
                        print!("{dump}");
                    }
                    eprintln!("wrote {}", outcome.schedule_path.display());
                    eprintln!("wrote {}", outcome.explanation_path.display());
                    ExitCode::from(outcome.exit_code() as u8)
                }
                Err(e) => {
                    report(&e);
                    ExitCode::from(1)
                }
            }
        }
        Command::Explain { input, activity } => {
            let args = ExplainArgs {
                strictness: input.strictness(),
                plan: input.plan,
                activity,
                overrides: input.overrides,
            };
            match explain_command(&args) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    report(&e);
                    ExitCode::from(1)
                }
            }
        }
        Command::Serve { port, bind, persist } => {
            let store = match persist {
                Some(dir) => match Store::persistent(&dir) {
                    Ok(s) => s,
                    Err(e) => {
                        eprintln!("error: {}: {e}", dir.display());
                        return ExitCode::from(1);
                    }
                },
                None => Store::new(),
            };
            let runtime = tokio::runtime::Runtime::new().expect("tokio runtime starts");
            match runtime.block_on(serve(SocketAddr::new(bind, port), Arc::new(store))) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
