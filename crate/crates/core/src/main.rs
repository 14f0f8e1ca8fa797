use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kt_decay::cli::{defaults_text, parse_spec_for, run, CliError, Task, EXIT_ERROR};

/// Environment variable holding the worker-thread count.
const THREADS_ENV: &str = "KTDECAY_THREADS";

#[derive(Parser)]
#[command(name = "kt-decay", version, about = "Decay rates of quasi-multiplication operators")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Decay norms ‖Tⁿ(I−T)‖ over an n grid.
    Rates(Common),
    /// Resolvent norms on the unit circle.
    Resolvent(Common),
    /// Windowed resolvent envelope.
    Envelope(Common),
    /// Check a decay claim and write a report.
    Verify(Common),
    /// Tabulate m⁻¹, m_log⁻¹ and m_max⁻¹.
    Compare(Common),
    /// Fit C·n^(−a)·log(n)^b to a decay profile.
    Fit(Common),
}

#[derive(Args)]
struct Common {
    /// Job file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Override the top of the n range.
    #[arg(long)]
    n_max: Option<u64>,
    /// Override the spectral grid density.
    #[arg(long)]
    grid_per_decade: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    show_config: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, common) = match cli.verb {
        Verb::Rates(c) => (Task::Rates, c),
        Verb::Resolvent(c) => (Task::Resolvent, c),
        Verb::Envelope(c) => (Task::Envelope, c),
        Verb::Verify(c) => (Task::Verify, c),
        Verb::Compare(c) => (Task::Compare, c),
        Verb::Fit(c) => (Task::Fit, c),
    };
    match execute(task, common) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}

fn execute(task: Task, common: Common) -> Result<i32, CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Invalid(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        // fails only if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let Some(path) = common.spec else {
        if common.show_config {
            print!("{}", defaults_text());
            return Ok(0);
        }
        return Err(CliError::Invalid("--spec <file> is required".into()));
    };
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path, source })?;
    let mut job = parse_spec_for(&text, Some(task))?;
    if let Some(n) = common.n_max {
        job.override_n_max(n)?;
    }
    if let Some(p) = common.grid_per_decade {
        job.resolution.points_per_decade = p;
    }
    if let Some(out) = common.out {
        job.output.dir = out;
    }
    job.validate()?;
    if common.show_config {
        print!("{}", job.to_text());
        return Ok(0);
    }
    let outcome = run(&job)?;
    println!("{}", outcome.summary.trim_end());
    for a in &outcome.artifacts {
        println!("wrote {}", a.display());
    }
    Ok(outcome.exit_code)
}
