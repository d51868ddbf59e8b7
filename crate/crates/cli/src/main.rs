use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};
use nbekcf::kernel::KernelKind;
use nbekcf::BoundingBox;

mod bench;
mod selftest;
mod track;

#[derive(Parser, Debug)]
#[command(name = "nbekcf", version, about = "Boundary-effect-free kernelized correlation filter tracker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Track a target through a directory of frames.
    Track(TrackArgs),
    /// Time CCIM, ACSII and the brute-force oracle on random inputs.
    Bench(BenchArgs),
    /// Check the fast paths against the oracles on random small instances.
    Selftest(SelftestArgs),
}

#[derive(clap::Args, Debug)]
pub struct TrackArgs {
    /// Directory of frames, read in lexicographic order.
    #[arg(long)]
    seq: PathBuf,
    /// Initial box `x,y,w,h`, 0-indexed pixels.
    #[arg(long, value_parser = parse_box)]
    init: BoundingBox,
    /// OTB ground truth (1-indexed); enables the metrics output.
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Per-frame boxes as CSV.
    #[arg(long)]
    out: PathBuf,
    /// Metrics JSON; needs --gt.
    #[arg(long, requires = "gt")]
    metrics: Option<PathBuf>,
    #[arg(long, default_value_t = 4.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1e-4)]
    lambda: f64,
    #[arg(long, default_value_t = 0.01)]
    gamma: f64,
    /// Cell size in pixels.
    #[arg(long, default_value_t = 4)]
    cell: usize,
    #[arg(long, default_value_t = 3.0)]
    search_factor: f64,
    #[arg(long, default_value_t = 1)]
    scale_steps: usize,
    #[arg(long, default_value = "gaussian", value_parser = parse_kernel)]
    kernel: KernelKind,
}

#[derive(clap::Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 15)]
    m: usize,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long = "M", default_value_t = 60)]
    big_m: usize,
    #[arg(long = "N", default_value_t = 60)]
    big_n: usize,
    #[arg(long = "D", default_value_t = 41)]
    d: usize,
    #[arg(long, default_value_t = 10)]
    iters: usize,
    #[arg(long, value_enum, default_value_t = bench::Method::All)]
    method: bench::Method,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(clap::Args, Debug)]
pub struct SelftestArgs {
    /// Random instances per suite.
    #[arg(long, default_value_t = 100)]
    cases: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Run CCIM with a deliberately broken realignment.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

fn parse_box(s: &str) -> Result<BoundingBox, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
        .collect::<Result<_, _>>()?;
    let [x, y, w, h] = parts[..] else {
        return Err(format!("expected x,y,w,h, got {} fields", parts.len()));
    };
    BoundingBox::new(x, y, w, h).map_err(|e| e.to_string())
}

fn parse_kernel(s: &str) -> Result<KernelKind, String> {
    s.parse::<KernelKind>().map_err(|e| e.to_string())
}

/// Usage line of the subcommand named on the command line, else the root's.
fn usage() -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let sub = std::env::args().nth(1);
    match sub.as_deref().and_then(|s| cmd.find_subcommand_mut(s)) {
        Some(sub) => sub.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

/// Prints the error with usage and exits with status 2.
fn usage_error(msg: impl std::fmt::Display) -> ! {
    exit_with(Cli::command().error(ErrorKind::ValueValidation, msg))
}

fn exit_with(e: clap::Error) -> ! {
    let _ = e.print();
    if e.use_stderr() && !e.to_string().contains("Usage:") {
        eprintln!("\n{}", usage());
    }
    std::process::exit(e.exit_code())
}

/// Caps the rayon pool from `NBEKCF_THREADS` (0 or unset: automatic).
fn configure_threads() {
    let Ok(raw) = std::env::var("NBEKCF_THREADS") else {
        return;
    };
    let threads: usize = raw
        .trim()
        .parse()
        .unwrap_or_else(|_| usage_error(format!("NBEKCF_THREADS must be a non-negative integer, got `{raw}`")));
    if threads > 0 {
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| exit_with(e));
    configure_threads();
    let result = match cli.command {
        Command::Track(args) => track::run(args),
        Command::Bench(args) => bench::run(args),
        Command::Selftest(args) => selftest::run(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
