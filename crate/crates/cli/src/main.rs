//! `cohlab`: seeded experiments with JSON and CSV output.
//!
//! Exit codes: 0 when every check passes, 2 when a checked claim fails
//! (a finding), 1 on errors and failed consistency checks.

mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cohlab::bases::BinomialReading;
use cohlab::experiment::{self, Config, Experiment, Timing};

#[derive(Parser)]
#[command(
    name = "cohlab",
    version,
    about = "Verification laboratory for SU(p,q) coherent states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form coherent-state overlap vs the truncated Bargmann series
    Overlap(Flags),
    /// Pure-state identities of the covariance matrix Γ(Λ)
    Covariance(Flags),
    /// Homomorphism, symplecticity and covariance transport of s(g)
    SymplecticCheck(Flags),
    /// Dimension of the invariant polynomials of degree ≤ d
    DimScan(Flags),
    /// Joint kernel of the Laplacians on invariant polynomials
    KernelScan(Flags),
    /// SU(1,1) commutators and Casimir on the truncated basis
    Su11Verify(Flags),
    /// Exact Gram matrix and coherent expansion of the SU(2,2) basis
    Su22Verify(Flags),
    /// Resolution of the identity by quadrature or Monte Carlo
    IdentityCheck(Flags),
    /// Trace distance of reduced states to the coherent-state mixture
    DefinettiGap(Flags),
    /// Total variation of truncated Haar blocks against Gaussian matrices
    HaarTv(Flags),
    /// Fidelity of negative binomial and Poisson count laws
    CountFidelity(Flags),
    /// Summarize result.json files found under the given directories
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Reading {
    Basis,
    Expansion,
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    /// Replica count (modes for count-fidelity)
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Truncation degree
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Monte Carlo samples per law or per estimate
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory [default: out/<experiment>]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs single-threaded [default: logical cores]
    #[arg(long, env = "COHLAB_THREADS")]
    threads: Option<usize>,
    /// Exact rational arithmetic (the default where available)
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    /// Double-precision arithmetic
    #[arg(long)]
    float: bool,
    #[arg(long)]
    tol: Option<f64>,
    /// Largest ℓ+m+r+s for su22-verify
    #[arg(long)]
    max_weight: Option<usize>,
    /// Binomial reading of the SU(2,2) basis
    #[arg(long, value_enum)]
    reading: Option<Reading>,
    /// Poisson mean α² for count-fidelity
    #[arg(long)]
    alpha2: Option<f64>,
    /// Random pairs, points or validation samples
    #[arg(long)]
    samples: Option<usize>,
    /// Histogram bins for haar-tv
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directories searched recursively for result.json
    #[arg(default_value = "out")]
    dirs: Vec<PathBuf>,
    /// Where summary.csv is written
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Flags {
    fn config(&self) -> Config {
        Config {
            p: self.p,
            q: self.q,
            n: self.n,
            k: self.k,
            d: self.d,
            m: self.m,
            budget: self.budget,
            seed: self.seed,
            tol: self.tol,
            exact: self.exact,
            float: self.float,
            max_weight: self.max_weight,
            reading: self.reading.map(|r| match r {
                Reading::Basis => BinomialReading::Basis,
                Reading::Expansion => BinomialReading::Expansion,
            }),
            alpha2: self.alpha2,
            samples: self.samples,
            bins: self.bins,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (experiment, flags) = match cli.command {
        Command::Report(args) => return exit(report::run(&args.dirs, &args.out)),
        Command::Overlap(f) => (Experiment::Overlap, f),
        Command::Covariance(f) => (Experiment::Covariance, f),
        Command::SymplecticCheck(f) => (Experiment::SymplecticCheck, f),
        Command::DimScan(f) => (Experiment::DimScan, f),
        Command::KernelScan(f) => (Experiment::KernelScan, f),
        Command::Su11Verify(f) => (Experiment::Su11Verify, f),
        Command::Su22Verify(f) => (Experiment::Su22Verify, f),
        Command::IdentityCheck(f) => (Experiment::IdentityCheck, f),
        Command::DefinettiGap(f) => (Experiment::DefinettiGap, f),
        Command::HaarTv(f) => (Experiment::HaarTv, f),
        Command::CountFidelity(f) => (Experiment::CountFidelity, f),
    };
    exit(run_experiment(experiment, &flags))
}

fn exit(r: Result<i32, String>) -> ExitCode {
    match r {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run_experiment(experiment: Experiment, flags: &Flags) -> Result<i32, String> {
    if let Some(t) = flags.threads {
        if t == 0 {
            return Err("--threads must be positive".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| format!("thread pool: {e}"))?;
    }
    let started_unix_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let clock = Instant::now();
    let mut out = experiment::run(experiment, &flags.config()).map_err(describe)?;
    out.result.timing = Some(Timing {
        started_unix_ms,
        elapsed_ms: clock.elapsed().as_millis(),
    });
    let dir = flags
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(experiment.name()));
    output::write_all(&dir, &out).map_err(|e| format!("writing {}: {e}", dir.display()))?;
    output::print_summary(&out, &dir);
    Ok(out.result.verdict.exit_code())
}

fn describe(e: cohlab::Error) -> String {
    use cohlab::Error;
    match e {
        Error::Capacity { needed, cap } => {
            format!("capacity: the computation needs {needed} terms but the cap is {cap}; lower --d or --n")
        }
        Error::Budget(msg) => format!("budget: {msg}; raise --budget"),
        Error::Parameter(msg) => format!("invalid flags: {msg}"),
        other => other.to_string(),
    }
}
