//! Command-line driver: one subcommand per experiment kind plus the
//! reproduction suite.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nls_core::harness::{self, acceptance, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(
    name = "nls",
    version,
    about = "Normalized solutions of coupled nonlinear Schrödinger systems on R³"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the configuration's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the configuration's `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the scalar ground-state profile by shooting.
    Soliton(RunArgs),
    /// Constrained ground-state search for the coupled system.
    Ground(RunArgs),
    /// Multi-start search for several distinct critical orbits.
    Multi(RunArgs),
    /// Ground-level sweep over increasing couplings.
    Sweep(RunArgs),
    /// Repulsive-coupling test sequence (unattained infimum).
    Nonexist(RunArgs),
    /// Ground state plus Morse-index and CLR diagnostics.
    Spectrum(RunArgs),
    /// Closed-form existence-condition arithmetic.
    Check(RunArgs),
    /// Run the reproduction suite and print a pass/fail table.
    Reproduce {
        #[arg(long, value_enum, default_value = "quick")]
        suite: SuiteArg,
        /// Optional directory for the summary table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Soliton(a) => (ExperimentKind::Soliton, a),
        Command::Ground(a) => (ExperimentKind::Ground, a),
        Command::Multi(a) => (ExperimentKind::Multi, a),
        Command::Sweep(a) => (ExperimentKind::Sweep, a),
        Command::Nonexist(a) => (ExperimentKind::Nonexist, a),
        Command::Spectrum(a) => (ExperimentKind::Spectrum, a),
        Command::Check(a) => (ExperimentKind::Check, a),
        Command::Reproduce { suite, out } => return reproduce(suite, out),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(kind: ExperimentKind, args: RunArgs) -> nls_core::Result<()> {
    let mut config = ExperimentConfig::from_file(&args.config)?;
    if config.kind != kind {
        return Err(nls_core::Error::ConfigParse(format!(
            "configuration declares kind \"{}\" but the subcommand is \"{kind}\"",
            config.kind
        )));
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out_dir = args
        .out
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from(format!("out-{kind}")));
    let artifacts = harness::run(&config, &out_dir)?;
    for line in &artifacts.summary {
        println!("{line}");
    }
    println!(
        "wrote {} artifacts to {}",
        artifacts.files.len(),
        artifacts.dir.display()
    );
    Ok(())
}

fn reproduce(suite: SuiteArg, out: Option<PathBuf>) -> ExitCode {
    let suite = match suite {
        SuiteArg::Quick => acceptance::Suite::Quick,
        SuiteArg::Full => acceptance::Suite::Full,
    };
    let results = acceptance::reproduce_all(suite);
    for r in &results {
        println!("{}", r.line());
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    if let Some(dir) = out {
        if let Err(e) = write_summary(&dir, &results) {
            eprintln!("error writing summary: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    }
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn write_summary(
    dir: &PathBuf,
    results: &[acceptance::CriterionResult],
) -> nls_core::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut csv = String::from("id,passed,seconds,detail\n");
    for r in results {
        csv.push_str(&format!(
            "{},{},{:.3},\"{}\"\n",
            r.id,
            r.passed,
            r.seconds,
            r.detail.replace('"', "'")
        ));
    }
    std::fs::write(dir.join("reproduce.csv"), csv)?;
    let json = serde_json::to_string_pretty(results)
        .map_err(|e| nls_core::Error::ConfigParse(e.to_string()))?;
    std::fs::write(dir.join("reproduce.json"), json)?;
    Ok(())
}
