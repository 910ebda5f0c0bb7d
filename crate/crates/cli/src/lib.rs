//! Argument parsing and report plumbing for the `chi2` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chi2_core::report::SuiteReport;
use chi2_core::trotter::Axis;

pub mod suites;

/// Default seed for randomized procedures when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "chi2", version, about = "Verification suites for χ(2) qudit constructions")]
pub struct Cli {
    /// Seed for every randomized procedure (synthesis restarts, random targets).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Directory for JSON reports and data files.
    #[arg(long, global = true, env = "CHI2_REPORT_DIR", default_value = "reports")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lie-algebra closure of {G1, G2, Ns, Ni, Np} on H_n.
    Closure {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = chi2_core::liealg::DEFAULT_TOL)]
        tol: f64,
    },
    /// Exact-math checks of a named construction.
    Verify(VerifyArgs),
    /// First-order Trotter convergence curve on H_{n+1}.
    Trotter {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 0.7)]
        theta: f64,
        #[arg(long, default_value_t = 64)]
        m_max: usize,
        #[arg(long, value_enum, default_value_t = AxisArg::Y)]
        axis: AxisArg,
    },
    /// Compile a problem file into a pulse sequence.
    Synthesize {
        #[arg(long)]
        problem: PathBuf,
    },
    /// Re-evaluate a saved pulse sequence against its problem file.
    Replay {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        sequence: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub target: VerifyTarget,
    /// SHG → SPDC round-trip phase, +1 or −1 (lambda3z only).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_berry, default_value = "-1")]
    pub berry: f64,
    /// Also write the total circuit unitary on the joint basis.
    #[arg(long)]
    pub dump_unitary: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyTarget {
    H2Matrices,
    #[value(name = "lambda2z")]
    Lambda2Z,
    #[value(name = "lambda3z")]
    Lambda3Z,
    Injection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Y,
    X,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Y => Axis::Y,
            AxisArg::X => Axis::X,
        }
    }
}

fn parse_berry(s: &str) -> Result<f64, String> {
    match s.trim_start_matches('+').parse::<f64>() {
        Ok(v) if v == 1.0 || v == -1.0 => Ok(v),
        _ => Err(format!("`{s}` is not +1 or -1")),
    }
}

/// Why a run did not pass.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or input files.
    Usage(anyhow::Error),
    /// A computation error while running the suite.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

/// Extra output written next to the report.
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

pub struct SuiteRun {
    pub report: SuiteReport,
    pub artifacts: Vec<Artifact>,
}

/// Runs the selected suite and writes its files into `cli.out`.
pub fn run(cli: &Cli) -> Result<(SuiteReport, PathBuf), Failure> {
    let start = Instant::now();
    let seed = cli.seed;
    let SuiteRun { report, artifacts } = match &cli.command {
        Command::Closure { n, tol } => suites::closure(*n, *tol)?,
        Command::Verify(v) => match v.target {
            VerifyTarget::H2Matrices => suites::h2_matrices()?,
            VerifyTarget::Lambda2Z => suites::lambda2z(v.dump_unitary)?,
            VerifyTarget::Lambda3Z => suites::lambda3z(v.berry, v.dump_unitary)?,
            VerifyTarget::Injection => suites::injection(seed.unwrap_or(DEFAULT_SEED))?,
        },
        Command::Trotter { n, theta, m_max, axis } => suites::trotter(*n, *theta, *m_max, (*axis).into())?,
        Command::Synthesize { problem } => suites::synthesize(problem, seed)?,
        Command::Replay { problem, sequence } => suites::replay(problem, sequence)?,
    };
    let wall = start.elapsed().as_secs_f64();
    let path = write_outputs(&cli.out, &report, &artifacts, wall).map_err(|e| Failure::Runtime(e.into()))?;
    Ok((report, path))
}

fn write_outputs(dir: &Path, report: &SuiteReport, artifacts: &[Artifact], wall: f64) -> std::io::Result<PathBuf> {
    let path = report.write(dir, wall)?;
    for a in artifacts {
        fs::write(dir.join(&a.file_name), &a.contents)?;
    }
    Ok(path)
}

/// One line per check, then the overall verdict.
pub fn summary(report: &SuiteReport) -> String {
    let mut out = String::new();
    for c in &report.checks {
        out.push_str(&format!(
            "{} {:<28} measured {:.3e} (tol {:.1e})\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.measured,
            c.tolerance
        ));
    }
    out.push_str(&format!("{}: {}\n", report.suite, if report.pass { "pass" } else { "FAIL" }));
    out
}
