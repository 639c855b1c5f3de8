use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use twistorlab_core::scenario::{self, Format, ScenarioConfig};

#[derive(Parser)]
#[command(name = "twistorlab", version, about = "Run twistor-space check suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or the name of a bundled scenario).
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "json")]
        format: String,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        jobs: Option<usize>,
        /// Include wall-clock timings in the report.
        #[arg(long)]
        timing: bool,
    },
    /// List every check a scenario can request.
    ListChecks,
    /// List the bundled scenarios.
    ListScenarios,
}

fn load(path: &Path) -> anyhow::Result<ScenarioConfig> {
    if path.exists() {
        return ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()));
    }
    let name = path.to_string_lossy();
    match scenario::bundled(&name) {
        Some(text) => Ok(ScenarioConfig::from_json(text)?),
        None => bail!("no such file or bundled scenario: {name}"),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Run {
            config,
            format,
            seed,
            jobs,
            timing,
        } => {
            let format: Format = format.parse()?;
            if let Some(j) = jobs {
                if j == 0 {
                    bail!("--jobs must be positive");
                }
                rayon::ThreadPoolBuilder::new().num_threads(j).build_global()?;
            }
            let mut config = load(&config)?;
            if let Some(s) = seed {
                config.seed = s;
            }
            let mut report = scenario::run(&config)?;
            if !timing {
                report = report.without_timing();
            }
            out.write_all(&scenario::emit(&report, format)?)?;
            Ok(report.all_passed())
        }
        Command::ListChecks => {
            for c in scenario::registry() {
                writeln!(out, "{:24} {}", c.id, c.description)?;
            }
            Ok(true)
        }
        Command::ListScenarios => {
            for (name, text) in scenario::BUNDLED {
                let file = ScenarioConfig::parse_file(text)?;
                writeln!(out, "{:22} {}", name, file.description.unwrap_or_default())?;
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
