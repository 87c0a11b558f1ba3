//! Problem generators, the experiment suites behind the CLI, and the swap
//! timing benchmark.

use std::time::Instant;

use num_complex::Complex64;

use crate::antitri::{reorder_antitriangular, AntitriangularForm};
use crate::error::{Error, Result};
use crate::iterative::solve_with_eps;
use crate::kernels::{matmul, qr, singular_values, DenseMatrix};
use crate::pencil::{forward_error, Method, SolveReport, TNareProblem};

/// SplitMix64: the crate's seedable 64-bit generator.
///
/// State advances by the golden-ratio increment and is finalized by two
/// xor-shift-multiply rounds; substreams are derived by reseeding through
/// [`SplitMix64::stream`], so the matrices of one problem never share a
/// stream. Uniform doubles take the top 53 bits; normal variates come from
/// the Box-Muller transform on two uniforms.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Substream `tag` of a master seed: mixes the tag through one
    /// finalizer round so sibling streams are decorrelated.
    pub fn stream(seed: u64, tag: u64) -> Self {
        let mut base = SplitMix64::new(seed ^ tag.wrapping_mul(0xA076_1D64_78BD_642F));
        let s = base.next_u64();
        SplitMix64::new(s)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.unit().max(1e-300);
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Bidiagonal well-conditioned test problem: `A` and `E` carry -1 on the
/// diagonal and superdiagonal (`E` ends in -0.9), `D` carries 4 and -1;
/// `B = -A/||A||_F` and `C = E/||E||_F`.
pub fn gen_example1(n: usize) -> TNareProblem {
    assert!(n >= 2, "the bidiagonal example needs n >= 2");
    let bidiag = |diag: f64, last: f64, sup: f64| {
        DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(if i == n - 1 { last } else { diag }, 0.0)
            } else if j == i + 1 {
                Complex64::new(sup, 0.0)
            } else {
                Complex64::ZERO
            }
        })
    };
    let a = bidiag(-1.0, -1.0, -1.0);
    let d = bidiag(4.0, 4.0, -1.0);
    let e = bidiag(-1.0, -0.9, -1.0);
    let b = a.scale_re(-1.0 / a.norm_fro());
    let c = e.scale_re(1.0 / e.norm_fro());
    TNareProblem::new(a, b, c, d).expect("generator output is valid by construction")
}

/// Five-point Laplacian stencil on a `side x side` grid for `A` and `D`,
/// with `B`, `C` uniform in `[0, 1)` from the seeded generator.
pub fn gen_example2(side: usize, seed: u64) -> TNareProblem {
    assert!(side >= 2, "the stencil example needs side >= 2");
    let n = side * side;
    let stencil = DenseMatrix::from_fn(n, n, |p, q| {
        if p == q {
            return Complex64::new(4.0, 0.0);
        }
        let (pr, pc) = (p / side, p % side);
        let (qr, qc) = (q / side, q % side);
        let neighbor = (pr == qr && pc.abs_diff(qc) == 1) || (pc == qc && pr.abs_diff(qr) == 1);
        if neighbor {
            Complex64::new(-1.0, 0.0)
        } else {
            Complex64::ZERO
        }
    });
    let mut rng_b = SplitMix64::stream(seed, 1);
    let mut rng_c = SplitMix64::stream(seed, 2);
    let b = DenseMatrix::from_fn(n, n, |_, _| Complex64::new(rng_b.unit(), 0.0));
    let c = DenseMatrix::from_fn(n, n, |_, _| Complex64::new(rng_c.unit(), 0.0));
    TNareProblem::new(stencil.clone(), b, c, stencil).expect("generator output is valid by construction")
}

/// Assemble a problem with planted exact solution `X` and quotient matrix
/// `W`: `A = B X + (D^T - B^T X) W` and `C = -(D X + X^T A - X^T B X)`
/// make `R(X) = 0` hold identically, and the alpha pencil becomes
/// `(D^T - B^T X)(W + zI)`, so the alpha spectrum is `-spec(W)`.
pub fn synthetic_from_parts(
    x: &DenseMatrix,
    b: &DenseMatrix,
    d: &DenseMatrix,
    w: &DenseMatrix,
) -> Result<(TNareProblem, DenseMatrix)> {
    let trail = &d.transpose() - &matmul(&b.transpose(), x);
    let a = &matmul(b, x) + &matmul(&trail, w);
    let xt = x.transpose();
    let c = (&(&matmul(d, x) + &matmul(&xt, &a)) - &matmul(&xt, &matmul(b, x))).map(|v| -v);
    let p = TNareProblem::new(a, b.clone(), c, d.clone())?;
    Ok((p, x.clone()))
}

/// Random solvable problem with a planted stabilizing solution and one
/// alpha eigenvalue of modulus `1/(1+sigma)` controlling the conditioning.
///
/// Draws `X`, `B`, `D` with unit-scale uniform entries and `W` as an
/// orthogonal similarity of `diag(1/(1+sigma), r_2, ..., r_n)` with the
/// rest of the spectrum in `[0.2, 0.7]`; redraws when `D^T - B^T X` is
/// ill-conditioned.
pub fn gen_synthetic(n: usize, sigma: f64, seed: u64) -> Result<(TNareProblem, DenseMatrix)> {
    assert!(n >= 1 && sigma > 0.0);
    let attempts = 10;
    for attempt in 0..attempts {
        let mut rng = SplitMix64::stream(seed, 100 + attempt);
        let draw = |rng: &mut SplitMix64| {
            DenseMatrix::from_fn(n, n, |_, _| Complex64::new(rng.uniform(-1.0, 1.0), 0.0))
        };
        let x = draw(&mut rng);
        let b = draw(&mut rng);
        let d = draw(&mut rng);
        // W = Q^T diag Q with orthogonal Q keeps the planted spectrum exact.
        let lambda = DenseMatrix::from_fn(n, n, |i, j| {
            if i != j {
                Complex64::ZERO
            } else if i == 0 {
                Complex64::new(1.0 / (1.0 + sigma), 0.0)
            } else {
                Complex64::new(rng.uniform(0.2, 0.7), 0.0)
            }
        });
        let (q, _) = qr(&draw(&mut rng));
        let q = q.re();
        let w = matmul(&matmul(&q.transpose(), &lambda), &q);

        let trail = &d.transpose() - &matmul(&b.transpose(), &x);
        let sv = singular_values(&trail);
        let smin = *sv.last().unwrap_or(&0.0);
        let smax = sv.first().copied().unwrap_or(0.0);
        if smin <= 0.0 || smax / smin > 1e6 {
            continue;
        }
        return synthetic_from_parts(&x, &b, &d, &w);
    }
    Err(Error::GenerationFailed { attempts: attempts as usize })
}

/// Random antitriangular pencil factor: standard-normal entries on and
/// below the antidiagonal, zero elsewhere, with `U = I`.
pub fn gen_random_antitriangular(n2: usize, seed: u64) -> AntitriangularForm {
    assert!(n2 >= 2 && n2 % 2 == 0, "pencil size must be even");
    let mut rng = SplitMix64::stream(seed, 7);
    let r = DenseMatrix::from_fn(n2, n2, |i, j| {
        if i + j + 2 > n2 {
            Complex64::new(rng.normal(), 0.0)
        } else {
            Complex64::ZERO
        }
    });
    AntitriangularForm::new(DenseMatrix::identity(n2), r).expect("pattern correct by construction")
}

/// A named problem instance for the suites; identical parameters always
/// rebuild bit-identical problems.
#[derive(Clone, Debug)]
pub enum ProblemSpec {
    Example1 { n: usize },
    Example2 { side: usize, seed: u64 },
    Synthetic { n: usize, sigma: f64, seed: u64 },
    File { path: String },
}

impl ProblemSpec {
    pub fn name(&self) -> String {
        match self {
            ProblemSpec::Example1 { n } => format!("example1-n{n}"),
            ProblemSpec::Example2 { side, .. } => format!("example2-n{}", side * side),
            ProblemSpec::Synthetic { n, sigma, .. } => format!("synthetic-n{n}-sigma{sigma:.0e}"),
            ProblemSpec::File { path } => format!("file-{path}"),
        }
    }

    /// Build the problem and, when the generator plants one, the exact
    /// solution for forward errors.
    pub fn build(&self) -> Result<(TNareProblem, Option<DenseMatrix>)> {
        match self {
            ProblemSpec::Example1 { n } => Ok((gen_example1(*n), None)),
            ProblemSpec::Example2 { side, seed } => Ok((gen_example2(*side, *seed), None)),
            ProblemSpec::Synthetic { n, sigma, seed } => {
                let (p, x) = gen_synthetic(*n, *sigma, *seed)?;
                Ok((p, Some(x)))
            }
            ProblemSpec::File { path } => {
                let text = std::fs::read_to_string(path)?;
                Ok((TNareProblem::from_json(&text)?, None))
            }
        }
    }
}

/// One (problem, method) outcome of a suite run.
#[derive(Clone, Debug)]
pub struct ResultRow {
    pub problem: String,
    pub method: Method,
    pub res: Option<f64>,
    pub err: Option<f64>,
    pub iterations: usize,
    pub wall_ms: f64,
    pub status: String,
}

#[derive(Clone, Debug, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("problem,method,res,err,iterations,wall_ms,status\n");
        for r in &self.rows {
            let res = r.res.map(|v| format!("{v:.6e}")).unwrap_or_default();
            let err = r.err.map(|v| format!("{v:.6e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{:.3},{}\n",
                r.problem, r.method, res, err, r.iterations, r.wall_ms, r.status
            ));
        }
        out
    }

    /// Aligned markdown table for terminal output.
    pub fn to_markdown(&self) -> String {
        let header = ["problem", "method", "res", "err", "iter", "wall_ms", "status"];
        let mut cells: Vec<[String; 7]> = Vec::new();
        for r in &self.rows {
            cells.push([
                r.problem.clone(),
                r.method.to_string(),
                r.res.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "---".into()),
                r.err.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "---".into()),
                r.iterations.to_string(),
                format!("{:.2}", r.wall_ms),
                r.status.clone(),
            ]);
        }
        let mut width = header.map(str::len);
        for row in &cells {
            for (w, c) in width.iter_mut().zip(row.iter()) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let fmt_row = |cols: &[String; 7], width: &[usize; 7]| {
            let body: Vec<String> = cols.iter().zip(width).map(|(c, w)| format!("{c:<w$}")).collect();
            format!("| {} |\n", body.join(" | "))
        };
        out.push_str(&fmt_row(&header.map(String::from), &width));
        let dashes: [String; 7] = width.map(|w| "-".repeat(w));
        out.push_str(&fmt_row(&dashes, &width));
        for row in &cells {
            out.push_str(&fmt_row(row, &width));
        }
        out
    }
}

/// Short machine-readable tag for an error in a result row.
fn status_tag(e: &Error) -> String {
    match e {
        Error::SingularPencil => "singular-pencil".into(),
        Error::NumericallySingular { .. } => "numerically-singular".into(),
        Error::NotAGraphSubspace => "not-a-graph-subspace".into(),
        Error::ReciprocalSpectrum => "reciprocal-spectrum".into(),
        Error::SharedSpectrum => "shared-spectrum".into(),
        Error::CriticalEigenvalue => "critical-eigenvalue".into(),
        Error::SelectionNotReciprocalFree { .. } => "selection-not-reciprocal-free".into(),
        Error::Breakdown { .. } => "breakdown".into(),
        Error::InitBreakdown => "init-breakdown".into(),
        Error::NoConvergence { .. } => "no-convergence".into(),
        Error::KernelDimensionMismatch { .. } => "kernel-dimension-mismatch".into(),
        Error::NodeSingular { .. } => "node-singular".into(),
        Error::RankAmbiguous { .. } => "rank-ambiguous".into(),
        Error::ZeroReference => "zero-reference".into(),
        Error::GenerationFailed { .. } => "generation-failed".into(),
        Error::BadInput(_) | Error::Io(_) | Error::Json(_) => "bad-input".into(),
    }
}

/// Run every method on every problem; failures become rows, never aborts.
///
/// Forward errors are reported against the planted solution when the
/// generator supplies one, and against the palindromic QZ solution for
/// small problems (the most accurate method of the family); large
/// problems report residuals only.
pub fn run_suite(specs: &[ProblemSpec], methods: &[Method], eps: Option<f64>) -> Result<ResultTable> {
    let mut table = ResultTable::default();
    for spec in specs {
        let (p, planted) = spec.build()?;
        let reference: Option<DenseMatrix> = match planted {
            Some(x) => Some(x),
            None if p.n() <= 64 => crate::antitri::palqz_solve(&p).ok().map(|rep| rep.x),
            None => None,
        };
        for &method in methods {
            let t0 = Instant::now();
            let outcome = solve_with_eps(&p, method, eps);
            let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
            let row = match outcome {
                Ok(rep) => ResultRow {
                    problem: spec.name(),
                    method,
                    res: Some(rep.residual),
                    err: reference.as_ref().and_then(|xr| forward_error(&rep.x, xr).ok()),
                    iterations: rep.iterations,
                    wall_ms,
                    status: "ok".into(),
                },
                Err(e) => ResultRow {
                    problem: spec.name(),
                    method,
                    res: None,
                    err: None,
                    iterations: 0,
                    wall_ms,
                    status: status_tag(&e),
                },
            };
            table.rows.push(row);
        }
    }
    Ok(table)
}

/// One row of the swap-timing benchmark.
#[derive(Clone, Copy, Debug)]
pub struct SwapBenchRow {
    pub n: usize,
    pub mean_time_s: f64,
    pub mean_swaps: f64,
}

/// Time the reordering on random antitriangular pencils, `reps` runs per
/// size, reporting mean wall time and mean swap count. Runs are pinned
/// sequential so timings do not contend.
pub fn swap_benchmark(sizes: &[usize], reps: usize, seed: u64) -> Result<Vec<SwapBenchRow>> {
    let mut out = Vec::new();
    if reps == 0 {
        return Ok(out);
    }
    for &n in sizes {
        let mut time_total = 0.0;
        let mut swaps_total = 0usize;
        for rep in 0..reps {
            let f = gen_random_antitriangular(n, seed.wrapping_add(rep as u64));
            let t0 = Instant::now();
            let (_, stats) = reorder_antitriangular(&f)?;
            time_total += t0.elapsed().as_secs_f64();
            swaps_total += stats.total();
        }
        out.push(SwapBenchRow {
            n,
            mean_time_s: time_total / reps as f64,
            mean_swaps: swaps_total as f64 / reps as f64,
        });
    }
    Ok(out)
}

/// CSV for the swap benchmark: `n,mean_time_s,mean_swaps`.
pub fn swap_bench_csv(rows: &[SwapBenchRow]) -> String {
    let mut out = String::from("n,mean_time_s,mean_swaps\n");
    for r in rows {
        out.push_str(&format!("{},{:.6},{:.1}\n", r.n, r.mean_time_s, r.mean_swaps));
    }
    out
}

/// The paper-scale suite: the bidiagonal example and the stencil example
/// (the larger stencil only on request; it costs minutes, not seconds).
pub fn paper_suite(seed: u64, include_large: bool) -> Vec<ProblemSpec> {
    let mut specs = vec![
        ProblemSpec::Example1 { n: 10 },
        ProblemSpec::Example2 { side: 18, seed },
    ];
    if include_large {
        specs.push(ProblemSpec::Example2 { side: 28, seed });
    }
    specs
}

/// The synthetic conditioning suite at the requested `sigma`.
pub fn synthetic_suite(seed: u64, sigma: f64) -> Vec<ProblemSpec> {
    vec![ProblemSpec::Synthetic { n: 3, sigma, seed }]
}

/// The seven pencil-based methods the experiment tables compare.
pub const TABLE_METHODS: [Method; 7] = [
    Method::Qz,
    Method::Palqz,
    Method::Da,
    Method::Cr1,
    Method::Cr2,
    Method::Pda,
    Method::Int,
];

/// Convenience wrapper for reports used by tests.
pub fn solve_report(p: &TNareProblem, method: Method) -> Result<SolveReport> {
    crate::iterative::solve_with_defaults(p, method)
}
