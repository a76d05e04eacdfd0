//! Command-line front end: scaling runs, decompositions, Haar sampling,
//! ensemble experiments and gradient checks.
//!
//! Artifacts (trace CSV, decomposition JSON, matrix JSON, experiment CSV)
//! go to stdout or, with `--output`, atomically to a file; human-readable
//! summaries go to stderr. Exit codes: 0 success, 1 validation or I/O
//! failure, 2 scaling stalled (or did not converge for `decompose`),
//! 3 iteration cap reached.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use uniscale_core::error::Error;
use uniscale_core::experiment::{
    correlation_pairs, correlation_to_csv, histogram_to_csv, psi_at_checkpoints, table_stats,
    table_to_csv, CORRELATION_CHECKPOINTS, TABLE1_CHECKPOINTS,
};
use uniscale_core::haar::RngStream;
use uniscale_core::io::{matrix_to_json, read_matrix, trace_to_csv, write_atomic, xzxzxz_to_json, zxz_to_json};
use uniscale_core::landscape::{gradcheck, GRADCHECK_H, GRADCHECK_REL_TOL};
use uniscale_core::scale::{scale, ScaleConfig, ScaleStatus};
use uniscale_core::u2::{analytic_zxz, U2Branch};
use uniscale_core::zxz::{xzxzxz_from_zxz, zxz_decompose};
use uniscale_core::{sample_unitary, UnitaryMatrix};

#[derive(Parser)]
#[command(
    name = "uniscale",
    version,
    about = "Scale unitary matrices to unit line sums and factor them"
)]
struct Cli {
    /// Seed for randomized pieces (Haar sampling, escape orientation).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Convergence tolerance on the line-sum residual.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    /// Iteration cap for the scaling loop.
    #[arg(long, global = true, default_value_t = 100_000)]
    max_iter: usize,

    /// Disable saddle-escape perturbations (stalls end the run instead).
    #[arg(long, global = true)]
    no_escape: bool,

    /// Write the artifact to this path (atomically) instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

impl Cli {
    fn config(&self) -> ScaleConfig {
        ScaleConfig {
            tol_residual: self.tol,
            max_iter: self.max_iter,
            escape_enabled: !self.no_escape,
            rng_seed: self.seed,
            ..ScaleConfig::default()
        }
    }

    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.output {
            Some(path) => write_atomic(path, text)
                .with_context(|| format!("writing {}", path.display()))?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the scaling iteration on a matrix; emit the trace as CSV.
    Scale(ScaleArgs),
    /// Factor a matrix as e^(i alpha) Z1 X Z2 (or the six-factor form).
    Decompose(DecomposeArgs),
    /// Sample Haar-random unitary matrices as JSON (one per line).
    Random(RandomArgs),
    /// Run ensemble campaigns of the bare iteration; emit CSV.
    Experiment(ExperimentArgs),
    /// Compare the analytic potential gradient with finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
struct ScaleArgs {
    /// Matrix JSON file.
    input: PathBuf,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Matrix JSON file.
    input: PathBuf,

    /// Which factorization to emit.
    #[arg(long, value_enum, default_value_t = Form::Zxz)]
    form: Form,

    /// Analytic branch for 2x2 inputs (rejected for larger matrices).
    #[arg(long, value_enum)]
    branch: Option<Branch>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Form {
    Zxz,
    Xzxzxz,
}

#[derive(Clone, Copy, ValueEnum)]
enum Branch {
    First,
    Second,
}

#[derive(Args)]
struct RandomArgs {
    /// Matrix dimension.
    #[arg(long)]
    n: usize,

    /// How many matrices to sample.
    #[arg(long, default_value_t = 1)]
    count: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Which campaign to run.
    #[arg(long, value_enum)]
    kind: ExperimentKind,

    /// Matrix dimension.
    #[arg(long)]
    n: usize,

    /// Ensemble size.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    /// Per-checkpoint min/average/max of the potential.
    Table,
    /// Raw potential values per sample and checkpoint.
    Hist,
    /// Consecutive-step potential pairs for the first few steps.
    Corr,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Matrix dimension.
    #[arg(long, default_value_t = 4)]
    n: usize,

    /// Number of random matrices to check.
    #[arg(long, default_value_t = 100)]
    count: usize,
}

fn main() -> ExitCode {
    // Exit code 2 is reserved for a stalled run, so argument mistakes must
    // not fall through to clap's default code 2: they report as invalid
    // input. Help and version requests are not errors.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Scale(args) => run_scale(cli, args),
        Command::Decompose(args) => run_decompose(cli, args),
        Command::Random(args) => run_random(cli, args),
        Command::Experiment(args) => run_experiment(cli, args),
        Command::Gradcheck(args) => run_gradcheck(cli, args),
    }
}

fn load(path: &PathBuf) -> anyhow::Result<UnitaryMatrix> {
    read_matrix(path).with_context(|| format!("reading {}", path.display()))
}

fn run_scale(cli: &Cli, args: &ScaleArgs) -> anyhow::Result<u8> {
    let m = load(&args.input)?;
    let res = scale(&m, &cli.config())?;
    cli.emit(&trace_to_csv(&res.trace))?;
    let last = res.trace.final_record();
    eprintln!(
        "scale: {} after {} iterations, residual {:.3e}, potential {:.3e}",
        res.status, last.k, last.residual, last.psi
    );
    Ok(match res.status {
        ScaleStatus::Converged => 0,
        ScaleStatus::StalledAtSaddle => 2,
        ScaleStatus::MaxIterReached => 3,
    })
}

fn run_decompose(cli: &Cli, args: &DecomposeArgs) -> anyhow::Result<u8> {
    let m = load(&args.input)?;
    if args.branch.is_some() && m.n() != 2 {
        bail!("--branch only applies to 2x2 inputs, got a {0}x{0} matrix", m.n());
    }
    if args.form == Form::Xzxzxz && m.n() % 2 != 0 {
        bail!("{}", Error::OddDimension { n: m.n() });
    }
    let zxz = if m.n() == 2 {
        let branch = match args.branch.unwrap_or(Branch::First) {
            Branch::First => U2Branch::First,
            Branch::Second => U2Branch::Second,
        };
        analytic_zxz(&m, branch)?
    } else {
        match zxz_decompose(&m, &cli.config()) {
            Ok(d) => d,
            Err(e @ Error::ScalingDidNotConverge { .. }) => {
                eprintln!("error: {e}");
                return Ok(2);
            }
            Err(e) => return Err(e.into()),
        }
    };
    let text = match args.form {
        Form::Zxz => zxz_to_json(&zxz, &m),
        Form::Xzxzxz => {
            let six = xzxzxz_from_zxz(&zxz)?;
            xzxzxz_to_json(&six, zxz.alpha, &m)
        }
    };
    cli.emit(&(text + "\n"))?;
    Ok(0)
}

fn run_random(cli: &Cli, args: &RandomArgs) -> anyhow::Result<u8> {
    if args.n == 0 {
        bail!("--n must be at least 1");
    }
    let mut lines = String::new();
    for i in 0..args.count {
        let u = sample_unitary(args.n, &mut RngStream::new(cli.seed, i as u64));
        lines.push_str(&matrix_to_json(&u));
        lines.push('\n');
    }
    cli.emit(&lines)?;
    Ok(0)
}

fn run_experiment(cli: &Cli, args: &ExperimentArgs) -> anyhow::Result<u8> {
    if args.n == 0 {
        bail!("--n must be at least 1");
    }
    if args.samples == 0 {
        bail!("--samples must be at least 1");
    }
    let text = match args.kind {
        ExperimentKind::Table => {
            let data = psi_at_checkpoints(args.n, args.samples, &TABLE1_CHECKPOINTS, cli.seed);
            table_to_csv(&table_stats(&data))
        }
        ExperimentKind::Hist => {
            let data = psi_at_checkpoints(args.n, args.samples, &TABLE1_CHECKPOINTS, cli.seed);
            histogram_to_csv(&data)
        }
        ExperimentKind::Corr => {
            let data =
                psi_at_checkpoints(args.n, args.samples, &CORRELATION_CHECKPOINTS, cli.seed);
            correlation_to_csv(&correlation_pairs(&data))
        }
    };
    cli.emit(&text)?;
    Ok(0)
}

fn run_gradcheck(cli: &Cli, args: &GradcheckArgs) -> anyhow::Result<u8> {
    if args.n == 0 {
        bail!("--n must be at least 1");
    }
    let mut csv = String::from("sample,max_abs_deviation,max_scaled_deviation,pass\n");
    let mut worst = 0.0f64;
    let mut passes = 0usize;
    for i in 0..args.count {
        let u = sample_unitary(args.n, &mut RngStream::new(cli.seed, i as u64));
        let report = gradcheck(&u, GRADCHECK_H);
        worst = worst.max(report.max_scaled_deviation);
        passes += report.pass as usize;
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{}\n",
            i, report.max_abs_deviation, report.max_scaled_deviation, report.pass
        ));
    }
    cli.emit(&csv)?;
    eprintln!(
        "gradcheck: {passes}/{} passed, worst scaled deviation {worst:.3e}",
        args.count
    );
    Ok(if worst < GRADCHECK_REL_TOL { 0 } else { 1 })
}
