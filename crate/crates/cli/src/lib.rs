//! `chips` command line: check, compile, simulate and report.
//!
//! Exit codes: 0 ok, 1 diagnostics, 2 usage or I/O error, 3 transformation
//! error, 4 deadlock.

mod config;
mod load;
mod report;
mod simulate;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::FileConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAG: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_XFORM: i32 = 3;
pub const EXIT_DEADLOCK: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "chips", version, about = "Chips component-description toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and analyze sources; print diagnostics.
    Check(CheckArgs),
    /// Lower sources to the automaton network IR (JSON).
    Compile(CompileArgs),
    /// Run a model and write its trace.
    Simulate(SimulateArgs),
    /// Summarize a trace.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Source files, or a built-in model name (`teastore`, `teastore-multi`).
    #[arg(required = true)]
    paths: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct CompileArgs {
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Automaton started past its input phase.
    #[arg(long)]
    kickstarter: Option<String>,
}

#[derive(Args, Debug)]
pub(crate) struct SimulateArgs {
    /// Source files or a built-in model name; defaults to `teastore`.
    pub(crate) paths: Vec<PathBuf>,
    #[arg(long)]
    pub(crate) seed: Option<u64>,
    /// Number of rounds to run (at least 1).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub(crate) rounds: Option<u64>,
    /// JSON map of model parameters.
    #[arg(long)]
    pub(crate) params: Option<PathBuf>,
    /// JSON scenario file.
    #[arg(long)]
    pub(crate) scenario: Option<PathBuf>,
    /// Single parameter override, `name=value`; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub(crate) param: Vec<String>,
    /// JSON file with any of the simulate options.
    #[arg(long)]
    pub(crate) config: Option<PathBuf>,
    #[arg(long)]
    pub(crate) kickstarter: Option<String>,
    /// Trace output file.
    #[arg(long)]
    pub(crate) trace: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "jsonl"])]
    pub(crate) trace_format: Option<String>,
    /// Number of image providers of the built-in TeaStore model.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub(crate) providers: Option<u64>,
    /// Write per-round provider cache contents as JSON lines.
    #[arg(long)]
    pub(crate) cache_dump: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub(crate) struct ReportArgs {
    /// Trace file (CSV or JSON lines).
    pub(crate) trace: PathBuf,
    /// Add cache-size and miss statistics to every phase block.
    #[arg(long)]
    pub(crate) phase_stats: bool,
    /// Directory receiving `response_time.dat` and `cache_size.dat`.
    #[arg(long)]
    pub(crate) plot_data: Option<PathBuf>,
    /// Cache dump to check for images cached by two providers.
    #[arg(long)]
    pub(crate) verify_shard: Option<PathBuf>,
    /// Trailing window (rounds) of the steady-state cache band.
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub(crate) window: u64,
}

/// Runs the command line `args` (program name first).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match cli.command {
        Command::Check(a) => cmd_check(&a, err),
        Command::Compile(a) => cmd_compile(&a, out, err),
        Command::Simulate(a) => simulate::cmd_simulate(&a, out, err),
        Command::Report(a) => report::cmd_report(&a, out, err),
    }
}

fn cmd_check(a: &CheckArgs, err: &mut dyn Write) -> i32 {
    match load::load_model(&a.paths, err) {
        Ok(_) => EXIT_OK,
        Err(code) => code,
    }
}

fn cmd_compile(a: &CompileArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let loaded = match load::load_model(&a.paths, err) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let network = match load::lower(&loaded.model, a.kickstarter.as_deref()) {
        Ok(n) => n,
        Err(d) => {
            let _ = writeln!(err, "{}", loaded.map.render(&d));
            return EXIT_XFORM;
        }
    };
    let json = network.to_json();
    match &a.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json) {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => {
            let _ = out.write_all(json.as_bytes());
        }
    }
    EXIT_OK
}
