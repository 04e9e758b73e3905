use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use specwa::scenario::{builtins, parse_sections, run_scenario, write_plot, PlotKind, RunOptions};
use specwa::Error;

#[derive(Parser)]
#[command(name = "specwa", version, about = "Spectra of weighted composition operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or builtin scenario and write its report.
    Run {
        /// Path to a TOML scenario or a builtin name (see `specwa scenarios`).
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated sections; an empty list writes provenance only.
        #[arg(long)]
        sections: Option<String>,
        /// Replace the scenario's weight expression.
        #[arg(long)]
        weight: Option<String>,
    },
    /// Render one section of a report as SVG plus a CSV table.
    Plot {
        report: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the builtin scenarios.
    Scenarios,
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run { config, out, seed, sections, weight } => {
            let opts = RunOptions {
                out_dir: out,
                seed,
                sections: sections.as_deref().map(parse_sections).transpose()?,
                weight,
            };
            let outcome = run_scenario(&config, &opts)?;
            if let Some(r) = &outcome.file.report {
                for c in &r.claims {
                    println!("{}: {:?}", c.theorem, c.kind);
                }
                for f in &r.failures {
                    eprintln!("section {} failed: {}", f.section, f.error);
                }
            }
            println!("wrote {}", outcome.path.display());
            Ok(outcome.exit_code as u8)
        }
        Command::Plot { report, kind, out } => {
            let kind: PlotKind = kind.parse()?;
            let (svg, csv) = write_plot(&report, kind, out.as_deref())?;
            println!("wrote {} and {}", svg.display(), csv.display());
            Ok(0)
        }
        Command::Scenarios => {
            for (name, about) in builtins() {
                println!("{name:<20} {about}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("specwa: {e}");
            ExitCode::from(2)
        }
    }
}
