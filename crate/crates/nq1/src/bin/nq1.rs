//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a mathematical check fails
//! (the report carries witnesses), 2 on input or usage errors.

use clap::{Args, Parser, Subcommand};
use nq1::cli::{run_command, RunOptions};
use nq1::dsl::parse_document;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nq1",
    about = "Exact symbolic checks and reductions for degree-1 NQ-manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Input document.
    file: PathBuf,
    /// Write the canonical JSON report here ("-" for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Number of pseudo-random certification sample points.
    #[arg(long, default_value_t = 8)]
    samples: usize,
    /// Seed of the sample stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// xi-degree cutoff for invariant bases.
    #[arg(long)]
    max_xi_degree: Option<usize>,
    /// Base-degree cutoff for invariant bases.
    #[arg(long)]
    max_base_degree: Option<usize>,
    /// Select a named block when several are present.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check [Q,Q] = 0 (and, with an algebroid block, the axiom oracle).
    CheckQ(Common),
    /// Build the homological field of an algebroid block.
    BuildQ(Common),
    /// Read structure functions and anchor off a homological field.
    ExtractAlgebroid(Common),
    /// Certification, involutivity, Q-invariance and classical data.
    AnalyzeDistribution(Common),
    /// The four IM-foliation axioms.
    CheckImfoliation(Common),
    /// L-infinity constraints and the closure condition of an action.
    CheckAction(Common),
    /// Quotient by a distribution or action.
    Reduce(Common),
}

impl Cmd {
    fn split(&self) -> (&'static str, &Common) {
        match self {
            Cmd::CheckQ(c) => ("check-q", c),
            Cmd::BuildQ(c) => ("build-q", c),
            Cmd::ExtractAlgebroid(c) => ("extract-algebroid", c),
            Cmd::AnalyzeDistribution(c) => ("analyze-distribution", c),
            Cmd::CheckImfoliation(c) => ("check-imfoliation", c),
            Cmd::CheckAction(c) => ("check-action", c),
            Cmd::Reduce(c) => ("reduce", c),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = cli.command.split();

    let text = match std::fs::read_to_string(&common.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {}", common.file.display(), e);
            return ExitCode::from(2);
        }
    };
    let doc = match parse_document(&text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions {
        samples: common.samples,
        seed: common.seed,
        max_xi_degree: common.max_xi_degree,
        max_base_degree: common.max_base_degree,
        name: common.name.clone(),
    };
    let report = match run_command(command, &doc, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::from(2);
        }
    };

    print!("{}", report.render_human());
    if let Some(path) = &common.json {
        let body = report.to_json_string();
        if path.as_os_str() == "-" {
            print!("{}", body);
        } else if let Err(e) = std::fs::write(path, body) {
            eprintln!("error: cannot write {}: {}", path.display(), e);
            return ExitCode::from(2);
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
