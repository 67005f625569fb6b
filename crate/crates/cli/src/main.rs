//! walklab: exact-arithmetic experiments on symmetric random walks.
//!
//! Subcommands execute an experiment spec file against an output
//! directory; see the grammar reference shipped in docs/grammar.md.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use walklab_cli::run::{self, RunConfig};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "walklab",
    version,
    about = "Exact ratio-limit experiments for random walks on groups",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment spec file (see docs/grammar.md).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory for report files; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Support-size cap for convolution states and ball enumeration.
    #[arg(long, default_value_t = walklab_core::DEFAULT_SUPPORT_CAP)]
    cap: usize,
    /// Run walk engines in f64 arithmetic; outputs are marked non-exact.
    #[arg(long)]
    float: bool,
    /// Seed recorded in the manifest for sampled companion suites.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Negative control: corrupt the measure before running the suite.
    #[arg(long)]
    inject_fault: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Report the group, measure table, and validation findings.
    Describe(CommonArgs),
    /// Compute ratio series for the spec's targets.
    Walk(CommonArgs),
    /// Compute ratio series and classify each target.
    Classify(CommonArgs),
    /// Run the exact-identity verification suite.
    Verify(VerifyArgs),
    /// Classify a sweep of conjugates of one base element.
    Probe(CommonArgs),
    /// Build and analyze the finite-factor chain.
    Chain(CommonArgs),
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = e.print();
            return code;
        }
    };
    let (name, common, inject_fault) = match &cli.command {
        Command::Describe(c) => ("describe", c, false),
        Command::Walk(c) => ("walk", c, false),
        Command::Classify(c) => ("classify", c, false),
        Command::Verify(v) => ("verify", &v.common, v.inject_fault),
        Command::Probe(c) => ("probe", c, false),
        Command::Chain(c) => ("chain", c, false),
    };
    let cfg = RunConfig {
        spec_path: common.spec.clone(),
        out: common.out.clone(),
        cap: common.cap,
        float: common.float,
        seed: common.seed,
        inject_fault,
    };
    let started = Instant::now();
    let result = run::execute(name, &cfg);
    // Timings stay on stderr so report files are byte-reproducible.
    eprintln!("{name} finished in {:.3?}", started.elapsed());
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
