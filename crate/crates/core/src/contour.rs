//! Contour-integral solver: trapezoidal approximation of the spectral
//! projector onto the stable deflating subspace, with two independent
//! algebraic routes to the same matrix (closed form by repeated squaring,
//! top DFT interpolation coefficient) serving as oracles.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{matmul, rrqr, solve_linear, solve_linear_scaled, DenseMatrix, UNIT_ROUNDOFF};
use crate::pencil::{build_m, solution_from_basis, Method, PalindromicPencil, SolveReport, TNareProblem};

/// Trapezoidal approximation of the spectral projector.
#[derive(Clone, Debug)]
pub struct ProjectorApprox {
    /// Node exponent: the rule used `2^k` unit-circle nodes.
    pub k: usize,
    /// The accumulated node sum `sum_j zeta^{j/2} (zeta^{-j/2} M + zeta^{j/2} M^T)^{-1}`.
    pub s: DenseMatrix,
    /// `Pi = S M^T / 2^k`, approximating the orthogonal projector onto the
    /// stable deflating subspace.
    pub pi: DenseMatrix,
}

impl ProjectorApprox {
    /// Relative idempotence defect `||Pi^2 - Pi|| / ||Pi||`; decreases with
    /// `k` on non-critical pencils and is the practical quality signal for
    /// choosing the node count.
    pub fn idempotence_gap(&self) -> f64 {
        let pi2 = matmul(&self.pi, &self.pi);
        (&pi2 - &self.pi).norm2() / self.pi.norm2().max(1e-300)
    }
}

/// Evaluate one node term `zeta^{j/2} (zeta^{-j/2} M + zeta^{j/2} M^T)^{-1}`.
///
/// Singularity is judged against the scale of `M`, not of the node matrix
/// itself: at a critical point the node matrix collapses to roundoff dust
/// that still looks well conditioned relative to its own entries.
fn node_term(m: &DenseMatrix, mt: &DenseMatrix, m_scale: f64, k: usize, j: u64) -> Result<DenseMatrix> {
    let dim = m.nrows();
    let theta = std::f64::consts::PI * j as f64 / (1u64 << k) as f64;
    let half = Complex64::from_polar(1.0, theta);
    let h = &m.scale(half.conj()) + &mt.scale(half);
    if h.norm_max() <= 32.0 * dim as f64 * UNIT_ROUNDOFF * m_scale {
        return Err(Error::NodeSingular { node: j as usize });
    }
    let inv = solve_linear_scaled(&h, &DenseMatrix::identity(dim), 4.0 * m_scale)
        .map_err(|_| Error::NodeSingular { node: j as usize })?;
    Ok(inv.scale(half))
}

/// Trapezoidal rule on `2^k` roots of unity.
///
/// For real `M` the terms at nodes `j` and `2^k - j` are complex
/// conjugates, so only half the circle is solved and doubled through the
/// real part; the result is identical to the full sum up to roundoff.
/// Node solves run in parallel; partial sums are combined in a fixed
/// chunk order so the result is deterministic.
pub fn trapezoid_projector(pencil: &PalindromicPencil, k: usize) -> Result<ProjectorApprox> {
    assert!(k >= 1, "the trapezoid rule needs at least two nodes");
    assert!(k < 40, "node count 2^k overflows the budget");
    let m = pencil.m();
    let mt = m.transpose();
    let m_scale = m.norm_max();
    let total: u64 = 1 << k;

    let s = if m.is_real() {
        // Boundary nodes z = -1 (j = 2^{k-1}) and z = 1 (j = 2^k) are real.
        let at_minus_one = node_term(m, &mt, m_scale, k, total / 2)?;
        let at_one = node_term(m, &mt, m_scale, k, total)?;
        let half_range = total / 2 - 1;
        let folded = sum_nodes(m, &mt, m_scale, k, 1, half_range, true)?;
        Ok::<DenseMatrix, Error>(&(&at_minus_one + &at_one) + &folded)
    } else {
        sum_nodes(m, &mt, m_scale, k, 1, total, false)
    }?;
    let pi = matmul(&s, &mt).scale_re(1.0 / total as f64);
    Ok(ProjectorApprox { k, s, pi })
}

/// Deterministic parallel sum of node terms `j0 .. j0 + count - 1`;
/// `folded` doubles the real part of each term (conjugate-pair symmetry).
fn sum_nodes(
    m: &DenseMatrix,
    mt: &DenseMatrix,
    m_scale: f64,
    k: usize,
    j0: u64,
    count: u64,
    folded: bool,
) -> Result<DenseMatrix> {
    let dim = m.nrows();
    let zero = DenseMatrix::zeros(dim, dim);
    if count == 0 {
        return Ok(zero);
    }
    let chunk: u64 = 1024;
    let chunks: Vec<u64> = (0..count.div_ceil(chunk)).collect();
    let partials: Vec<Result<DenseMatrix>> = chunks
        .par_iter()
        .map(|&c| {
            let lo = j0 + c * chunk;
            let hi = (lo + chunk).min(j0 + count);
            let mut acc = DenseMatrix::zeros(dim, dim);
            for j in lo..hi {
                let term = node_term(m, mt, m_scale, k, j)?;
                if folded {
                    acc = &acc + &term.map(|x| Complex64::new(2.0 * x.re, 0.0));
                } else {
                    acc = &acc + &term;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut s = zero;
    for p in partials {
        s = &s + &p?;
    }
    Ok(s)
}

/// Closed-form route to the same approximation: for invertible `M`,
/// `Pi = (I - (-M^{-T} M)^{2^k})^{-1}`, evaluated by `k` squarings.
pub fn closed_form_oracle(pencil: &PalindromicPencil, k: usize) -> Result<DenseMatrix> {
    let m = pencil.m();
    let mt = m.transpose();
    let dim = m.nrows();
    let mut t = -&solve_linear(&mt, m)?;
    for _ in 0..k {
        t = matmul(&t, &t);
    }
    // The repeated squaring drives the dynamic range of I - T^(2^k) to
    // sigma^(2^k); only an exactly zero pivot disqualifies the solve here.
    solve_linear_scaled(&(&DenseMatrix::identity(dim) - &t), &DenseMatrix::identity(dim), 0.0)
}

/// DFT route: evaluate `phi(z)^{-1}` at all `2^k`-th roots of unity and
/// return the top coefficient of the degree `2^k - 1` interpolating
/// polynomial, `c_{N-1} = (1/N) sum_j w^{-j(N-1)} phi(w^j)^{-1}`.
///
/// Algebraically this equals the trapezoid sum `S / 2^k`; the code path is
/// independent (plain solves of `phi`, literal DFT twiddles), which is what
/// makes it an oracle for the rotated-Hermitian accumulation.
pub fn dft_coefficient_oracle(pencil: &PalindromicPencil, k: usize) -> Result<DenseMatrix> {
    assert!(k >= 1 && k < 28, "node exponent out of range");
    let n_nodes: u64 = 1 << k;
    let dim = pencil.m().nrows();
    let eye = DenseMatrix::identity(dim);
    let mut acc = DenseMatrix::zeros(dim, dim);
    for j in 0..n_nodes {
        let omega_j = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n_nodes as f64);
        let inv = solve_linear(&pencil.phi_eval(omega_j), &eye).map_err(|_| Error::NodeSingular { node: j as usize })?;
        let twiddle = Complex64::from_polar(
            1.0,
            -2.0 * std::f64::consts::PI * (j as f64) * ((n_nodes - 1) as f64) / n_nodes as f64,
        );
        acc = &acc + &inv.scale(twiddle);
    }
    Ok(acc.scale_re(1.0 / n_nodes as f64))
}

/// Largest supported node exponent: `2^26` solves is already minutes of
/// work, and slow-converging problems would ask for astronomically more.
pub const MAX_NODES_LOG2: usize = 26;

/// Contour-integral solver: rank-revealing QR of the approximate projector
/// gives an orthonormal basis of its range, which is the stable deflating
/// subspace; refuse the solve when the rank decision is ambiguous.
pub fn int_solve(p: &TNareProblem, k: usize) -> Result<SolveReport> {
    if k > MAX_NODES_LOG2 {
        return Err(Error::BadInput(format!(
            "node exponent {k} exceeds the supported budget of {MAX_NODES_LOG2}"
        )));
    }
    let n = p.n();
    let pencil = build_m(p);
    let approx = trapezoid_projector(&pencil, k)?;
    let f = rrqr(&approx.pi, 2.0 * n as f64 * UNIT_ROUNDOFF);
    let lead = f.r[(n - 1, n - 1)].norm();
    let trail = f.r[(n, n)].norm();
    if lead == 0.0 {
        return Err(Error::RankAmbiguous { ratio: 0.0 });
    }
    let ratio = if trail == 0.0 { f64::INFINITY } else { lead / trail };
    if ratio < 10.0 {
        return Err(Error::RankAmbiguous { ratio });
    }
    let basis = f.q.block(0, 0, 2 * n, n);
    solution_from_basis(p, &basis, Method::Int, k)
}
