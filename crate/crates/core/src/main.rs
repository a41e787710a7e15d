use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use geofluid::error::Error;
use geofluid::scenario::{Command, RunOptions, Scenario};

#[derive(Parser)]
#[command(name = "geofluid", version, about = "Conservation-law checks for compressible flow on curved charts")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run the solver with transported markers and check integral balances
    Simulate(Common),
    /// Euler-operator residuals of the scenario densities over seeded jets
    VerifyDensities(Common),
    /// Circulation one-form residual and material-curve circulation
    VerifyCirculation(Common),
    /// Split determining equations and flux identities over seeded jets
    VerifyDetermining(Common),
    /// Hamiltonian flow, Casimirs and symmetry determining residuals
    VerifyHamiltonian(Common),
    /// Curvature identities and Killing fields of the scenario chart
    GeometryReport(Common),
}

#[derive(clap::Args)]
struct Common {
    /// scenario file, or the name of a bundled scenario
    #[arg(long)]
    scenario: String,
    /// overrides the scenario's jet seed
    #[arg(long)]
    seed: Option<u64>,
    /// output root; results go to <out>/<scenario>/<command>
    #[arg(long, env = "GEOFLUID_OUT", default_value = "runs")]
    out: PathBuf,
    /// worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// run densities whose pressure law or field the classification forbids
    #[arg(long)]
    allow_incompatible: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::VerifyDensities(a) => (Command::VerifyDensities, a),
        Sub::VerifyCirculation(a) => (Command::VerifyCirculation, a),
        Sub::VerifyDetermining(a) => (Command::VerifyDetermining, a),
        Sub::VerifyHamiltonian(a) => (Command::VerifyHamiltonian, a),
        Sub::GeometryReport(a) => (Command::GeometryReport, a),
    };
    if let Some(k) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    let opts = RunOptions { out_dir: args.out.clone(), seed: args.seed, allow_incompatible: args.allow_incompatible };
    let result = Scenario::load(&args.scenario).and_then(|sc| sc.build()).and_then(|b| cmd.run(&b, &opts));
    match result {
        Ok(report) => {
            // a closed pipe (e.g. `| head`) must not turn a finished run into a panic
            let mut out = std::io::stdout().lock();
            let _ = write!(out, "{}", report.render());
            let _ = writeln!(out, "summary: {}", report.dir().join("summary.json").display());
            ExitCode::from(report.outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
        }
    }
}

/// Problems with the inputs rather than with the numbers.
fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::Config { .. } | Error::Classification(_) | Error::Io(_) | Error::Dimension { .. })
}
