//! `modsig`: generate sequences, scan for signals, draw histograms and run
//! the reproduction report.

mod commands;
mod parse;
mod report;
mod seq;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "modsig", version, about = "Hidden signals in integer sequences")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for output files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SeqArgs {
    /// Sequence: hofstadter, narayana, narayana_d, fibonacci, sqrt13, sqrt6,
    /// ulam, factorial_sums, identity or map:<registry map>.
    #[arg(long, default_value = "hofstadter")]
    pub seq: String,

    /// Nesting depth for hofstadter, order for narayana_d.
    #[arg(long, default_value_t = 3)]
    pub d: usize,

    /// Number of terms (accepts 1e7, 2^20).
    #[arg(long, visible_alias = "count", default_value = "100000")]
    pub n: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Materialize a prefix: cache it and write it as CSV.
    Generate {
        #[command(flatten)]
        seq: SeqArgs,
        /// CSV path (default: <out-dir>/<sequence>.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// FFT scan of |Σ e(x aₙ)|/T over a grid; reports the top non-DC peaks.
    Scan {
        #[command(flatten)]
        seq: SeqArgs,
        /// Grid size (default: next power of two above the largest value).
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 5)]
        top: usize,
        /// DC exclusion, in units of 1/max value.
        #[arg(long, default_value_t = 32.0)]
        guard: f64,
    },
    /// Histogram of {β aₙ} on the circle.
    Histogram {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        beta: String,
        #[arg(long, default_value_t = 512)]
        bins: usize,
        /// Check aₙ ≤ B·n and multiplicity ≤ C, then the bound 4BC: "B,C".
        #[arg(long)]
        density_bound: Option<String>,
        /// Also locate the valley and hill and draw the overlay.
        #[arg(long)]
        valley_hill: bool,
    },
    /// Weyl sums x_N at checkpoints; Hofstadter sums run over H(0..N).
    Weyl {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        beta: String,
        /// direct (geometric checkpoints) or recurrence (checkpoints at the base terms).
        #[arg(long, default_value = "direct")]
        method: String,
        /// Also write |μ̂(d)| for d = 1..=coefficients.
        #[arg(long, default_value_t = 0)]
        coefficients: usize,
    },
    /// Classify ‖β aₖ‖ over an index window.
    Decay {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        beta: String,
        #[arg(long, default_value_t = 10)]
        from: usize,
        #[arg(long, default_value_t = 120)]
        to: usize,
    },
    /// Certified root enclosures and unit-circle counts.
    Roots {
        /// trinomial:<d>, alpha:<d> or coeffs:c0,c1,...
        #[arg(long)]
        poly: String,
        #[arg(long, default_value_t = 53)]
        precision: u32,
    },
    /// Run every figure config and the numbered checks; write one JSON report.
    Report {
        #[arg(long, default_value = "configs")]
        configs: PathBuf,
        /// Only these checks (comma separated); "none" skips them.
        #[arg(long)]
        checks: Option<String>,
    },
}

/// Exit status 2 marks a failed hypothesis or certification, 1 anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    use modsig::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<modsig::Error>() {
            return match e {
                E::Hypothesis(_) | E::Certification(_) | E::Signature { .. } | E::Undecided(_) | E::Indeterminate(_) => 2,
                _ => 1,
            };
        }
        if cause.downcast_ref::<commands::Failed>().is_some() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let out = cli.out_dir.as_path();
    let result = match cli.command {
        Command::Generate { seq, out: path } => commands::generate(&seq, out, path),
        Command::Scan { seq, grid, top, guard } => commands::scan(&seq, out, grid, top, guard),
        Command::Histogram {
            seq,
            beta,
            bins,
            density_bound,
            valley_hill,
        } => commands::histogram(&seq, out, &beta, bins, density_bound.as_deref(), valley_hill),
        Command::Weyl {
            seq,
            beta,
            method,
            coefficients,
        } => commands::weyl(&seq, out, &beta, &method, coefficients),
        Command::Decay { seq, beta, from, to } => commands::decay(&seq, out, &beta, from, to),
        Command::Roots { poly, precision } => commands::roots(out, &poly, precision),
        Command::Report { configs, checks } => report::run(&configs, out, checks.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
