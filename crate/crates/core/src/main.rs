//! Command-line interface: solve problem files, run the experiment
//! suites, time the swap procedure, and check solvability conditions.

use std::io::Write;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use tnare::analysis;
use tnare::bench::{self, ProblemSpec};
use tnare::error::{Error, Result};
use tnare::iterative;
use tnare::pencil::{Method, SolveReport, TNareProblem};
use tnare::{contour, default_eps, DEFAULT_MAXIT};

#[derive(Parser)]
#[command(name = "tnare", about = "Solvers for algebraic T-Riccati equations via T-palindromic pencils", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem file with a chosen method; the report goes to
    /// stdout (or --output) as JSON.
    Solve(SolveArgs),
    /// Run an experiment suite over all table methods and emit CSV plus an
    /// aligned table.
    Bench(BenchArgs),
    /// Time the antitriangular reordering on random pencils.
    Swapbench(SwapbenchArgs),
    /// Print the solvability/criticality condition reports for a problem.
    Check(CheckArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file: JSON {"n", "A", "B", "C", "D"}.
    #[arg(long)]
    input: String,
    /// qz | palqz | da | pda | cr1 | cr2 | int | newton
    #[arg(long)]
    method: String,
    /// Stopping tolerance for the iterative methods (default 2n·u).
    #[arg(long)]
    eps: Option<f64>,
    /// Iteration budget (default 64).
    #[arg(long)]
    maxit: Option<usize>,
    /// Node exponent for the contour method (default: tied to DA's count).
    #[arg(long)]
    nodes_log2: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
struct BenchArgs {
    /// paper | synthetic
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Conditioning parameter for the synthetic suite.
    #[arg(long, default_value_t = 1e-5)]
    sigma: f64,
    /// Include the larger stencil problem (minutes of runtime).
    #[arg(long, default_value_t = false)]
    include_large: bool,
    /// Write CSV here.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct SwapbenchArgs {
    /// Comma-separated even pencil sizes, e.g. 32,64,128.
    #[arg(long)]
    sizes: String,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Write CSV here.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    input: String,
    /// Unit-circle / annulus sample count.
    #[arg(long, default_value_t = 64)]
    grid: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Swapbench(args) => cmd_swapbench(args),
        Command::Check(args) => cmd_check(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input)?;
    let problem = TNareProblem::from_json(&text)?;
    let method = Method::from_str(&args.method)?;
    let eps = args.eps.unwrap_or_else(|| default_eps(problem.n()));
    let maxit = args.maxit.unwrap_or(DEFAULT_MAXIT);
    let report = match method {
        Method::Int => {
            let k = match args.nodes_log2 {
                Some(k) => k,
                None => iterative::da_solve(&problem, eps, maxit).map(|r| r.iterations.max(4)).unwrap_or(10),
            };
            contour::int_solve(&problem, k)?
        }
        Method::Da => iterative::da_solve(&problem, eps, maxit)?,
        Method::Pda => iterative::pda_solve(&problem, eps, maxit)?,
        Method::Cr1 => iterative::cr1_solve(&problem, eps, maxit)?,
        Method::Cr2 => iterative::cr2_solve(&problem, eps, maxit)?,
        Method::Newton => {
            let zero = tnare::DenseMatrix::zeros(problem.n(), problem.n());
            iterative::newton_solve(&problem, &zero, eps, maxit)?
        }
        Method::Qz | Method::Palqz => iterative::solve_with_defaults(&problem, method)?,
    };
    let json = report_json(&report);
    match args.output {
        Some(path) => std::fs::write(path, json)?,
        None => println!("{json}"),
    }
    Ok(())
}

/// Serialize a report as `{X, residual, iterations, stabilizing,
/// alpha_spectrum}`; `X` is a real row-major array when the solution is
/// real, else split into `re`/`im` parts.
fn report_json(report: &SolveReport) -> String {
    use serde_json::{json, Value};
    let n = report.x.nrows();
    let x: Value = if report.x_is_real {
        json!((0..n)
            .map(|i| (0..n).map(|j| report.x[(i, j)].re).collect::<Vec<_>>())
            .collect::<Vec<_>>())
    } else {
        json!({
            "re": (0..n).map(|i| (0..n).map(|j| report.x[(i, j)].re).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "im": (0..n).map(|i| (0..n).map(|j| report.x[(i, j)].im).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    };
    let spectrum: Vec<Value> = report
        .alpha_spectrum
        .iter()
        .map(|e| {
            if e.is_finite() {
                let v = e.value();
                json!({"finite": true, "re": v.re, "im": v.im})
            } else {
                json!({"finite": false})
            }
        })
        .collect();
    serde_json::to_string_pretty(&json!({
        "X": x,
        "residual": report.residual,
        "iterations": report.iterations,
        "stabilizing": report.stabilizing,
        "alpha_spectrum": spectrum,
    }))
    .expect("report serialization cannot fail")
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let specs: Vec<ProblemSpec> = match args.suite.as_str() {
        "paper" => bench::paper_suite(args.seed, args.include_large),
        "synthetic" => bench::synthetic_suite(args.seed, args.sigma),
        other => return Err(Error::BadInput(format!("unknown suite `{other}` (expected paper|synthetic)"))),
    };
    let table = bench::run_suite(&specs, &bench::TABLE_METHODS, None)?;
    print!("{}", table.to_markdown());
    if let Some(path) = args.out {
        std::fs::write(&path, table.to_csv())?;
        eprintln!("wrote {path}");
    }
    Ok(())
}

fn cmd_swapbench(args: SwapbenchArgs) -> Result<()> {
    let sizes: Vec<usize> = args
        .sizes
        .split(',')
        .map(|tok| {
            let n: usize = tok
                .trim()
                .parse()
                .map_err(|_| Error::BadInput(format!("bad size `{tok}`")))?;
            if n < 2 || n % 2 != 0 {
                return Err(Error::BadInput(format!("size {n} must be even and at least 2")));
            }
            Ok(n)
        })
        .collect::<Result<_>>()?;
    let rows = bench::swap_benchmark(&sizes, args.reps, args.seed)?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{:>8}  {:>12}  {:>12}", "n", "mean_time_s", "mean_swaps")?;
    for r in &rows {
        writeln!(stdout, "{:>8}  {:>12.4}  {:>12.1}", r.n, r.mean_time_s, r.mean_swaps)?;
    }
    if let Some(path) = args.out {
        std::fs::write(&path, bench::swap_bench_csv(&rows))?;
        eprintln!("wrote {path}");
    }
    Ok(())
}

fn cmd_check(args: CheckArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input)?;
    let problem = TNareProblem::from_json(&text)?;
    let tol = 1e-8;
    let reports = analysis::check_all(&problem, args.grid.max(16), tol)?;
    println!("{:<18} {:<22} {:>8} {:>12}  witness", "condition", "verdict", "grid", "margin");
    for r in &reports {
        let witness = match &r.witness {
            None => String::from("-"),
            Some(w) => {
                let mut parts = vec![w.what.to_string(), format!("value {:.3e}", w.value)];
                if let Some(z) = w.point {
                    parts.push(format!("at z = {:.6} + {:.6}i", z.re, z.im));
                }
                parts.join(", ")
            }
        };
        println!(
            "{:<18} {:<22} {:>8} {:>12.3e}  {}",
            r.condition.tag(),
            r.verdict.tag(),
            r.grid,
            r.margin,
            witness
        );
    }
    Ok(())
}
