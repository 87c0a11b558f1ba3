//! Problem and pencil data model: T-NARE coefficients, the associated
//! T-palindromic pencil, residual metrics and solution extraction from
//! deflating-subspace bases.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    self, linear_pencil_eigenvalues, matmul, singular_values, solve_linear, DenseMatrix, PencilEig, UNIT_ROUNDOFF,
};

/// Relative threshold below which the imaginary part of an extracted
/// solution is dropped and the solution flagged real.
pub const REALNESS_RTOL: f64 = 1e-8;

/// A nonsymmetric algebraic T-Riccati equation
/// `D X + X^T A - X^T B X + C = 0` with real coefficients.
#[derive(Clone, Debug)]
pub struct TNareProblem {
    n: usize,
    a: DenseMatrix,
    b: DenseMatrix,
    c: DenseMatrix,
    d: DenseMatrix,
}

impl TNareProblem {
    pub fn new(a: DenseMatrix, b: DenseMatrix, c: DenseMatrix, d: DenseMatrix) -> Result<Self> {
        let n = a.nrows();
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if !m.is_square() || m.nrows() != n {
                return Err(Error::BadInput(format!("coefficient {name} is not {n}x{n}")));
            }
            if !m.is_real() {
                return Err(Error::BadInput(format!("coefficient {name} has nonzero imaginary parts")));
            }
            if !m.is_all_finite() {
                return Err(Error::BadInput(format!("coefficient {name} has non-finite entries")));
            }
        }
        if n == 0 {
            return Err(Error::BadInput("problem dimension must be at least 1".into()));
        }
        Ok(Self { n, a, b, c, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseMatrix {
        &self.b
    }

    pub fn c(&self) -> &DenseMatrix {
        &self.c
    }

    pub fn d(&self) -> &DenseMatrix {
        &self.d
    }

    /// The residual map `R(X) = D X + X^T A - X^T B X + C`.
    pub fn residual_map(&self, x: &DenseMatrix) -> DenseMatrix {
        let xt = x.transpose();
        let dx = matmul(&self.d, x);
        let xta = matmul(&xt, &self.a);
        let xtbx = matmul(&xt, &matmul(&self.b, x));
        &(&(&dx + &xta) - &xtbx) + &self.c
    }

    /// The dual problem, whose residual map is `A Y + Y^T D + Y^T C Y - B`.
    ///
    /// Coefficients map as `(A', B', C', D') = (D, -C, -B, A)`; the dual
    /// pencil matrix is the block-swap conjugate `Pi M Pi`.
    pub fn dual(&self) -> TNareProblem {
        TNareProblem {
            n: self.n,
            a: self.d.clone(),
            b: -&self.c,
            c: -&self.b,
            d: self.a.clone(),
        }
    }

    /// Parse the CLI problem file format: a JSON object
    /// `{"n": int, "A": [[...]], "B": [[...]], "C": [[...]], "D": [[...]]}`
    /// with row-major binary64 entries.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemJson = serde_json::from_str(text)?;
        let grab = |name: &str, rows: &[Vec<f64>]| -> Result<DenseMatrix> {
            if rows.len() != file.n || rows.iter().any(|r| r.len() != file.n) {
                return Err(Error::BadInput(format!("matrix {name} is not {0}x{0}", file.n)));
            }
            Ok(DenseMatrix::from_fn(file.n, file.n, |i, j| Complex64::new(rows[i][j], 0.0)))
        };
        TNareProblem::new(
            grab("A", &file.a)?,
            grab("B", &file.b)?,
            grab("C", &file.c)?,
            grab("D", &file.d)?,
        )
    }

    pub fn to_json(&self) -> String {
        let dump = |m: &DenseMatrix| -> Vec<Vec<f64>> {
            (0..self.n).map(|i| (0..self.n).map(|j| m[(i, j)].re).collect()).collect()
        };
        let file = ProblemJson {
            n: self.n,
            a: dump(&self.a),
            b: dump(&self.b),
            c: dump(&self.c),
            d: dump(&self.d),
        };
        serde_json::to_string_pretty(&file).expect("problem serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct ProblemJson {
    n: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    d: Vec<Vec<f64>>,
}

/// The 2n x 2n matrix `M = [[C, D], [A, -B]]`; the T-palindromic pencil
/// `phi(z) = M + z M^T` is implicit.
#[derive(Clone, Debug)]
pub struct PalindromicPencil {
    m: DenseMatrix,
}

impl PalindromicPencil {
    /// Wrap an arbitrary square even-sized matrix as a palindromic pencil.
    pub fn from_matrix(m: DenseMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() % 2 != 0 {
            return Err(Error::BadInput("pencil matrix must be square of even size".into()));
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn half(&self) -> usize {
        self.m.nrows() / 2
    }

    /// Evaluate `phi(z) = M + z M^T`.
    pub fn phi_eval(&self, z: Complex64) -> DenseMatrix {
        &self.m + &self.m.transpose().scale(z)
    }

    /// The 2n eigenvalues of `phi`, computed from the generalized Schur form
    /// of `(-M, M^T)`; the multiset is closed under `λ -> 1/λ` with the
    /// convention `1/0 = ∞`.
    pub fn spectrum(&self) -> Result<Vec<PencilEig>> {
        linear_pencil_eigenvalues(&self.m, &self.m.transpose())
    }

    /// Grid-based criticality probe; see [`NoncriticalReport`].
    pub fn is_noncritical(&self, grid: usize, tol: f64) -> Result<NoncriticalReport> {
        assert!(grid >= 8, "criticality probe needs at least 8 circle samples");
        let eigs = self.spectrum()?;
        let min_gap = eigs
            .iter()
            .map(|e| {
                let m = e.modulus();
                if m.is_finite() {
                    (m - 1.0).abs()
                } else {
                    f64::INFINITY
                }
            })
            .fold(f64::INFINITY, f64::min);
        let scale = self.m.norm2();
        let mut min_sv = f64::INFINITY;
        for l in 0..grid {
            let theta = 2.0 * std::f64::consts::PI * l as f64 / grid as f64;
            let z = Complex64::from_polar(1.0, theta);
            let sv = singular_values(&self.phi_eval(z));
            min_sv = min_sv.min(*sv.last().expect("nonempty singular values"));
        }
        Ok(NoncriticalReport {
            min_gap,
            min_sv_on_circle: min_sv,
            verdict: min_gap > tol && min_sv > tol * scale,
        })
    }
}

/// Report of the non-criticality probe: the smallest distance of an
/// eigenvalue modulus from 1 and the smallest singular value of `phi(z)`
/// seen on the unit-circle grid.
#[derive(Clone, Copy, Debug)]
pub struct NoncriticalReport {
    pub min_gap: f64,
    pub min_sv_on_circle: f64,
    pub verdict: bool,
}

/// Build `M = [[C, D], [A, -B]]` from the problem coefficients.
pub fn build_m(p: &TNareProblem) -> PalindromicPencil {
    PalindromicPencil {
        m: DenseMatrix::block2x2(p.c(), p.d(), p.a(), &-p.b()),
    }
}

/// Solver identity tags for reports and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Qz,
    Palqz,
    Da,
    Pda,
    Cr1,
    Cr2,
    Int,
    Newton,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Qz,
        Method::Palqz,
        Method::Da,
        Method::Pda,
        Method::Cr1,
        Method::Cr2,
        Method::Int,
        Method::Newton,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Qz => "qz",
            Method::Palqz => "palqz",
            Method::Da => "da",
            Method::Pda => "pda",
            Method::Cr1 => "cr1",
            Method::Cr2 => "cr2",
            Method::Int => "int",
            Method::Newton => "newton",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::BadInput(format!("unknown method `{s}`")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one solver run.
#[derive(Clone, Debug)]
pub struct SolveReport {
    /// The computed solution; imaginary parts below [`REALNESS_RTOL`] are
    /// dropped and `x_is_real` set.
    pub x: DenseMatrix,
    pub method: Method,
    pub iterations: usize,
    /// Relative residual of the T-NARE in the spectral norm.
    pub residual: f64,
    /// Spectrum of the pencil `alpha(z) = A - BX + z (D^T - B^T X)`.
    pub alpha_spectrum: Vec<PencilEig>,
    /// True iff every alpha eigenvalue has modulus < 1.
    pub stabilizing: bool,
    pub x_is_real: bool,
    /// Per-step residuals (Newton only; empty for the other methods).
    pub step_residuals: Vec<f64>,
}

impl SolveReport {
    /// Assemble a report from a raw solution matrix: strips negligible
    /// imaginary parts, computes the relative residual and classifies the
    /// alpha spectrum.
    pub fn from_solution(p: &TNareProblem, x: DenseMatrix, method: Method, iterations: usize) -> Result<SolveReport> {
        let (x, x_is_real) = strip_imaginary(x);
        let alpha_spectrum = alpha_spectrum(p, &x)?;
        let stabilizing = alpha_spectrum.iter().all(|e| e.modulus() < 1.0);
        let residual = residual(p, &x);
        Ok(SolveReport {
            x,
            method,
            iterations,
            residual,
            alpha_spectrum,
            stabilizing,
            x_is_real,
            step_residuals: Vec::new(),
        })
    }
}

fn strip_imaginary(x: DenseMatrix) -> (DenseMatrix, bool) {
    let im_norm = DenseMatrix::from_fn(x.nrows(), x.ncols(), |i, j| Complex64::new(x[(i, j)].im, 0.0)).norm_fro();
    let norm = x.norm_fro();
    if im_norm <= REALNESS_RTOL * norm {
        (x.re(), true)
    } else {
        (x, false)
    }
}

/// Relative residual of the T-NARE in the spectral norm:
/// `||R(X)|| / (||D|| ||X|| + ||X|| ||A|| + ||X|| ||B|| ||X|| + ||C||)`.
pub fn residual(p: &TNareProblem, x: &DenseMatrix) -> f64 {
    let num = p.residual_map(x).norm2();
    let nx = x.norm2();
    let den = p.d().norm2() * nx + nx * p.a().norm2() + nx * p.b().norm2() * nx + p.c().norm2();
    if den == 0.0 {
        // All-zero problem: any X with R(X) = 0 is exact.
        return if num == 0.0 { 0.0 } else { f64::INFINITY };
    }
    num / den
}

/// Forward relative error `||X - Xref|| / ||Xref||` in the spectral norm.
pub fn forward_error(x: &DenseMatrix, xref: &DenseMatrix) -> Result<f64> {
    let denom = xref.norm2();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((x - xref).norm2() / denom)
}

/// Spectrum of `alpha(z) = (A - B X) + z (D^T - B^T X)`.
pub fn alpha_spectrum(p: &TNareProblem, x: &DenseMatrix) -> Result<Vec<PencilEig>> {
    assert_eq!(x.nrows(), p.n());
    assert_eq!(x.ncols(), p.n());
    let lead = &p.a().clone() - &matmul(p.b(), x);
    let trail = &p.d().transpose() - &matmul(&p.b().transpose(), x);
    linear_pencil_eigenvalues(&lead, &trail)
}

/// Extract the solution carried by a deflating-subspace basis `[U1; U2]`:
/// `X = U2 U1^{-1}`, solved through `U1^T X^T = U2^T` without forming an
/// inverse. Fails with [`Error::NotAGraphSubspace`] when `U1` is
/// numerically singular.
pub fn solution_from_basis(p: &TNareProblem, basis: &DenseMatrix, method: Method, iterations: usize) -> Result<SolveReport> {
    let n = p.n();
    assert_eq!(basis.nrows(), 2 * n, "basis must have 2n rows");
    assert_eq!(basis.ncols(), n, "basis must have n columns");
    let u1 = basis.block(0, 0, n, n);
    let u2 = basis.block(n, 0, n, n);
    let xt = solve_linear(&u1.transpose(), &u2.transpose()).map_err(|e| match e {
        Error::NumericallySingular { .. } => Error::NotAGraphSubspace,
        other => other,
    })?;
    SolveReport::from_solution(p, xt.transpose(), method, iterations)
}

/// Default regularity/rank tolerance `n · u · scale` used across the crate.
pub fn default_tol(n: usize, scale: f64) -> f64 {
    n as f64 * UNIT_ROUNDOFF * scale
}

/// Worst pairing defect of an eigenvalue multiset under the reciprocal map,
/// measured in log-modulus (0 means perfectly closed under `λ -> 1/λ`).
pub fn reciprocal_pairing_gap(eigs: &[PencilEig]) -> f64 {
    // Sorting log-moduli ascending must match sorting negated log-moduli
    // ascending; the largest difference is the pairing gap.
    let mut logs: Vec<f64> = eigs.iter().map(|e| e.log_modulus()).collect();
    let mut neg: Vec<f64> = logs.iter().map(|l| -l).collect();
    logs.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    logs.iter()
        .zip(&neg)
        .map(|(a, b)| {
            if a.is_infinite() && b.is_infinite() && a == b {
                0.0
            } else {
                (a - b).abs()
            }
        })
        .fold(0.0, f64::max)
}

pub use kernels::OrderedGeneralizedSchur;
