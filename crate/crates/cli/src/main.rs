use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edss_cli::figures::{run_figure, FigureName};
use edss_cli::{check, load_config, run, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "edss", version, about = "Entanglement distribution through a separable carrier qubit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the protocol once and report every extraction.
    Run(Common),
    /// Sweep the parameters behind one figure and write its panels.
    Figure {
        #[arg(value_enum)]
        name: FigureName,
        #[command(flatten)]
        common: Common,
    },
    /// Run the fast invariant suite.
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// File of key=value lines applied over the defaults.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Overrides applied after the config file, in order.
    #[arg(long = "set", value_name = "KEY=VALUE", num_args = 1..)]
    set: Vec<String>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, CliError> {
        Ok(load_config(self.config.as_deref(), &self.set)?)
    }
}

fn dispatch(command: Command) -> Result<u8, CliError> {
    let mut stdout = io::stdout().lock();
    match command {
        Command::Run(common) => {
            let cfg = common.load()?;
            run::cmd_run(&cfg, &mut stdout)?;
            Ok(0)
        }
        Command::Figure { name, common } => {
            let cfg = common.load()?;
            let report = run_figure(name, &cfg)?;
            for h in &report.headlines {
                match h.at {
                    Some((x, y)) => println!("{:<28} {:.6}  at ({x}, {y})", h.key, h.value),
                    None => println!("{:<28} {:.6}", h.key, h.value),
                }
            }
            println!("wrote {} files to {}", report.files.len(), cfg.out_dir.display());
            Ok(0)
        }
        Command::Check(common) => {
            let cfg = common.load()?;
            Ok(if check::cmd_check(&cfg, &mut stdout)? { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("edss: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
