//! Dense kernels backed by `faer`, behind plain `DenseMatrix` signatures.
//!
//! All faer access goes through the explicit `linalg` entry points; the
//! `Mat` arithmetic operators are avoided on purpose (their dispatch path
//! miscomputed complex products at some sizes on the target machine, while
//! the direct `matmul`/solver calls check out against naive oracles).

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::solvers::Solve;
use faer::linalg::{self, gevd};
use faer::{c64, Mat, MatRef, Par};
use num_complex::Complex64;

use super::matrix::{DenseMatrix, UNIT_ROUNDOFF};
use crate::error::{Error, Result};

/// Below this dimension plain loops beat the faer call overhead.
const SMALL_DIM: usize = 24;

fn to_faer(a: &DenseMatrix) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: MatRef<'_, c64>) -> DenseMatrix {
    DenseMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// `a * b`, dispatching between naive loops and faer.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul dimension mismatch");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    if m.min(k).min(n) == 0 {
        return DenseMatrix::zeros(m, n);
    }
    if m <= SMALL_DIM && k <= SMALL_DIM && n <= SMALL_DIM {
        let mut out = DenseMatrix::zeros(m, n);
        for i in 0..m {
            for l in 0..k {
                let ail = a[(i, l)];
                for j in 0..n {
                    out[(i, j)] += ail * b[(l, j)];
                }
            }
        }
        return out;
    }
    let par = if m.min(k).min(n) >= 192 { Par::rayon(0) } else { Par::Seq };
    let fa = to_faer(a);
    let fb = to_faer(b);
    let mut out = Mat::<c64>::zeros(m, n);
    linalg::matmul::matmul(out.as_mut(), faer::Accum::Replace, fa.as_ref(), fb.as_ref(), c64::ONE, par);
    from_faer(out.as_ref())
}

/// Solve `A X = B` by LU with partial pivoting.
///
/// Rejects the system when the smallest pivot is below `n·u` relative to the
/// largest one, which is the conditioning checkpoint every formula with an
/// inverse in it routes through.
pub fn solve_linear(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    solve_linear_pivot(a, b, PivotFloor::RelativeToPivots)
}

/// Like [`solve_linear`], but the smallest acceptable pivot is measured
/// against a caller-provided scale instead of the largest pivot. A scale of
/// zero accepts everything except an exactly zero pivot, which is what the
/// algebraic oracles with legitimately extreme dynamic range need.
pub fn solve_linear_scaled(a: &DenseMatrix, b: &DenseMatrix, scale: f64) -> Result<DenseMatrix> {
    solve_linear_pivot(a, b, PivotFloor::Absolute(scale))
}

#[derive(Clone, Copy)]
enum PivotFloor {
    /// Smallest pivot must exceed `n·u` times the largest pivot.
    RelativeToPivots,
    /// Smallest pivot must exceed `n·u` times this scale.
    Absolute(f64),
}

impl PivotFloor {
    fn check(self, n: usize, pmin: f64, pmax: f64) -> Result<()> {
        let floor = match self {
            PivotFloor::RelativeToPivots => n as f64 * UNIT_ROUNDOFF * pmax,
            PivotFloor::Absolute(scale) => n as f64 * UNIT_ROUNDOFF * scale,
        };
        if pmin > floor && pmin > 0.0 {
            Ok(())
        } else {
            Err(Error::NumericallySingular {
                rel_pivot: if pmax > 0.0 { pmin / pmax } else { 0.0 },
            })
        }
    }
}

fn solve_linear_pivot(a: &DenseMatrix, b: &DenseMatrix, floor: PivotFloor) -> Result<DenseMatrix> {
    assert!(a.is_square(), "solve_linear needs a square matrix");
    assert_eq!(a.nrows(), b.nrows(), "solve_linear dimension mismatch");
    let n = a.nrows();
    if n == 0 {
        return Ok(DenseMatrix::zeros(0, b.ncols()));
    }
    if !a.is_all_finite() || !b.is_all_finite() {
        return Err(Error::NumericallySingular { rel_pivot: f64::NAN });
    }
    if n <= SMALL_DIM {
        return small_lu_solve(a, b, floor);
    }
    let fa = to_faer(a);
    let lu = fa.partial_piv_lu();
    let u = lu.U();
    let mut pmin = f64::INFINITY;
    let mut pmax = 0.0f64;
    for i in 0..n {
        let d = u[(i, i)].norm();
        pmin = pmin.min(d);
        pmax = pmax.max(d);
    }
    floor.check(n, pmin, pmax)?;
    let x = lu.solve(to_faer(b));
    Ok(from_faer(x.as_ref()))
}

/// In-place Gaussian elimination with partial pivoting for small systems.
fn small_lu_solve(a: &DenseMatrix, b: &DenseMatrix, floor: PivotFloor) -> Result<DenseMatrix> {
    let n = a.nrows();
    let m = b.ncols();
    let mut lu = a.clone();
    let mut x = b.clone();
    let mut pmin = f64::INFINITY;
    let mut pmax = 0.0f64;
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[(k, k)].norm();
        for i in (k + 1)..n {
            let v = lu[(i, k)].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        pmin = pmin.min(best);
        pmax = pmax.max(best);
        if best == 0.0 {
            return Err(Error::NumericallySingular { rel_pivot: 0.0 });
        }
        if piv != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
            }
            for j in 0..m {
                let t = x[(k, j)];
                x[(k, j)] = x[(piv, j)];
                x[(piv, j)] = t;
            }
        }
        let d = lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] / d;
            if f != Complex64::ZERO {
                for j in (k + 1)..n {
                    let t = lu[(k, j)];
                    lu[(i, j)] -= f * t;
                }
                for j in 0..m {
                    let t = x[(k, j)];
                    x[(i, j)] -= f * t;
                }
            }
            lu[(i, k)] = f;
        }
    }
    floor.check(n, pmin, pmax)?;
    for k in (0..n).rev() {
        for j in 0..m {
            let mut acc = x[(k, j)];
            for i in (k + 1)..n {
                acc -= lu[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = acc / lu[(k, k)];
        }
    }
    Ok(x)
}

/// Determinant by Gaussian elimination (independent of the Schur kernels,
/// so it can serve as an oracle for them).
pub fn det(a: &DenseMatrix) -> Complex64 {
    assert!(a.is_square());
    let n = a.nrows();
    let mut lu = a.clone();
    let mut d = Complex64::ONE;
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[(k, k)].norm();
        for i in (k + 1)..n {
            let v = lu[(i, k)].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return Complex64::ZERO;
        }
        if piv != k {
            d = -d;
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
            }
        }
        let p = lu[(k, k)];
        d *= p;
        for i in (k + 1)..n {
            let f = lu[(i, k)] / p;
            for j in (k + 1)..n {
                let t = lu[(k, j)];
                lu[(i, j)] -= f * t;
            }
        }
    }
    d
}

/// Householder QR with the full square `Q` factor.
pub fn qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let (m, n) = (a.nrows(), a.ncols());
    if m == 0 || n == 0 {
        return (DenseMatrix::identity(m), DenseMatrix::zeros(m, n));
    }
    let par = Par::Seq;
    let mut fa = to_faer(a);
    let block_size = linalg::qr::no_pivoting::factor::recommended_block_size::<c64>(m, n);
    let mut householder = Mat::<c64>::zeros(block_size, Ord::min(m, n));
    {
        let mut mem = MemBuffer::new(linalg::qr::no_pivoting::factor::qr_in_place_scratch::<c64>(
            m,
            n,
            block_size,
            par,
            Default::default(),
        ));
        let stack = MemStack::new(&mut mem);
        linalg::qr::no_pivoting::factor::qr_in_place(fa.as_mut(), householder.as_mut(), par, stack, Default::default());
    }
    let mut q = Mat::<c64>::identity(m, m);
    {
        let mut mem = MemBuffer::new(
            linalg::householder::apply_block_householder_sequence_on_the_left_in_place_scratch::<c64>(m, block_size, m),
        );
        let stack = MemStack::new(&mut mem);
        linalg::householder::apply_block_householder_sequence_on_the_left_in_place_with_conj(
            fa.as_ref().get(.., ..Ord::min(m, n)),
            householder.as_ref(),
            faer::Conj::No,
            q.as_mut(),
            par,
            stack,
        );
    }
    let r = DenseMatrix::from_fn(m, n, |i, j| if i <= j { fa[(i, j)] } else { Complex64::ZERO });
    (from_faer(q.as_ref()), r)
}

/// Rank-revealing (column-pivoted Householder) QR.
pub struct RankRevealingQr {
    /// Full square unitary factor.
    pub q: DenseMatrix,
    /// Upper-triangular factor with nonincreasing `|r[i][i]|`.
    pub r: DenseMatrix,
    /// Column permutation: column `j` of `Q R` is column `perm[j]` of the input.
    pub perm: Vec<usize>,
    /// Numerical rank under the tolerance passed to [`rrqr`].
    pub rank: usize,
}

/// Column-pivoted QR; `rank` counts diagonal entries above `tol * |r[0][0]|`.
pub fn rrqr(a: &DenseMatrix, tol: f64) -> RankRevealingQr {
    assert!(tol > 0.0, "rrqr needs a positive tolerance");
    let (m, n) = (a.nrows(), a.ncols());
    let fa = to_faer(a);
    let qr = fa.col_piv_qr();
    let q = {
        // compute_Q returns the thin factor; rebuild the full square Q from
        // the Householder sequence so kernel bases are available.
        let par = Par::Seq;
        let basis = qr.Q_basis();
        let coeff = qr.Q_coeff();
        let block_size = coeff.nrows();
        let mut q = Mat::<c64>::identity(m, m);
        let mut mem = MemBuffer::new(
            linalg::householder::apply_block_householder_sequence_on_the_left_in_place_scratch::<c64>(m, block_size, m),
        );
        let stack = MemStack::new(&mut mem);
        linalg::householder::apply_block_householder_sequence_on_the_left_in_place_with_conj(
            basis,
            coeff,
            faer::Conj::No,
            q.as_mut(),
            par,
            stack,
        );
        from_faer(q.as_ref())
    };
    let rf = qr.R();
    let r = DenseMatrix::from_fn(m, n, |i, j| {
        if i <= j && i < rf.nrows() {
            rf[(i, j)]
        } else {
            Complex64::ZERO
        }
    });
    let perm = qr.P().arrays().0.to_vec();
    let k = Ord::min(m, n);
    let lead = if k > 0 { r[(0, 0)].norm() } else { 0.0 };
    let mut rank = 0;
    for i in 0..k {
        if r[(i, i)].norm() > tol * lead {
            rank += 1;
        }
    }
    RankRevealingQr { q, r, perm, rank }
}

/// Unordered generalized Schur decomposition: `A = Q S Z^H`, `B = Q T Z^H`
/// with `S`, `T` upper triangular and `Q`, `Z` unitary.
///
/// The blocked reduction runs first; since it reports no convergence
/// failures, the output is validated structurally and finished by the
/// in-crate single-shift iteration (a no-op when already converged), then
/// spot-checked against the input by a reconstruction matvec.
pub fn gen_schur(a: &DenseMatrix, b: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix, DenseMatrix, DenseMatrix)> {
    assert!(a.is_square() && b.is_square());
    assert_eq!(a.nrows(), b.nrows());
    let n = a.nrows();
    if !a.is_all_finite() || !b.is_all_finite() {
        return Err(Error::SingularPencil);
    }
    if n <= 1 {
        return Ok((a.clone(), b.clone(), DenseMatrix::identity(n), DenseMatrix::identity(n)));
    }

    let (mut s, mut t, mut q, mut z) = faer_reduce(a, b, true);
    if !hessenberg_triangular_dust(&mut s, &mut t) {
        // The blocked path went structurally wrong; redo the direct
        // reduction only and let the iteration below do all the sweeps.
        let redo = faer_reduce(a, b, false);
        s = redo.0;
        t = redo.1;
        q = redo.2;
        z = redo.3;
        if !hessenberg_triangular_dust(&mut s, &mut t) {
            return Err(Error::Breakdown { step: 0, what: "generalized Hessenberg reduction failed validation" });
        }
    }
    super::qz_iter::qz_iterate(&mut s, &mut t, &mut q, &mut z)?;
    for j in 0..n {
        for i in (j + 1)..n {
            s[(i, j)] = Complex64::ZERO;
            t[(i, j)] = Complex64::ZERO;
        }
    }
    if !s.is_all_finite() || !t.is_all_finite() {
        return Err(Error::SingularPencil);
    }
    verify_schur(a, b, &s, &t, &q, &z)?;
    Ok((s, t, q, z))
}

/// Zero sub-Hessenberg / sub-triangular dust below the deflation
/// threshold; false when entries out of pattern are too large to be dust.
fn hessenberg_triangular_dust(h: &mut DenseMatrix, t: &mut DenseMatrix) -> bool {
    let n = h.nrows();
    let atol = n as f64 * UNIT_ROUNDOFF * h.norm_max().max(f64::MIN_POSITIVE);
    let btol = n as f64 * UNIT_ROUNDOFF * t.norm_max().max(f64::MIN_POSITIVE);
    let mut ok = true;
    for j in 0..n {
        for i in (j + 1)..n {
            if i > j + 1 {
                if h[(i, j)].norm() > atol {
                    ok = false;
                } else {
                    h[(i, j)] = Complex64::ZERO;
                }
            }
            if t[(i, j)].norm() > btol {
                ok = false;
            } else {
                t[(i, j)] = Complex64::ZERO;
            }
        }
    }
    ok
}

/// One-vector reconstruction test of `A ~ Q S Z^H` and `B ~ Q T Z^H`.
fn verify_schur(
    a: &DenseMatrix,
    b: &DenseMatrix,
    s: &DenseMatrix,
    t: &DenseMatrix,
    q: &DenseMatrix,
    z: &DenseMatrix,
) -> Result<()> {
    let n = a.nrows();
    let v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 / (1.0 + i as f64), 0.37 - 0.11 * ((i % 7) as f64)))
        .collect();
    let vnorm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let mut zh_v = vec![Complex64::ZERO; n];
    z.matvec_adjoint_into(&v, &mut zh_v);
    let mut mid = vec![Complex64::ZERO; n];
    let mut rec = vec![Complex64::ZERO; n];
    let mut direct = vec![Complex64::ZERO; n];
    for (factor, input, scale) in [(s, a, a.norm_max()), (t, b, b.norm_max())] {
        factor.matvec_into(&zh_v, &mut mid);
        q.matvec_into(&mid, &mut rec);
        input.matvec_into(&v, &mut direct);
        let err: f64 = rec
            .iter()
            .zip(&direct)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if err > 1e-8 * scale.max(f64::MIN_POSITIVE) * vnorm {
            return Err(Error::Breakdown { step: 0, what: "generalized Schur reconstruction failed validation" });
        }
    }
    Ok(())
}

/// Blocked reduction: QR of `B`, generalized Hessenberg, and (optionally)
/// the blocked QZ iteration. Factors are returned in full, unvalidated.
fn faer_reduce(a: &DenseMatrix, b: &DenseMatrix, run_qz: bool) -> (DenseMatrix, DenseMatrix, DenseMatrix, DenseMatrix) {
    let n = a.nrows();
    let par = Par::Seq;
    let mut fa = to_faer(a);
    let mut fb = to_faer(b);
    let mut q = Mat::<c64>::identity(n, n);
    let mut z = Mat::<c64>::identity(n, n);

    // Step 1: QR of B; apply Q^H to A; accumulate into Q.
    {
        let block_size = linalg::qr::no_pivoting::factor::recommended_block_size::<c64>(n, n);
        let mut householder = Mat::<c64>::zeros(block_size, n);
        {
            let mut mem = MemBuffer::new(linalg::qr::no_pivoting::factor::qr_in_place_scratch::<c64>(
                n,
                n,
                block_size,
                par,
                Default::default(),
            ));
            let stack = MemStack::new(&mut mem);
            linalg::qr::no_pivoting::factor::qr_in_place(fb.as_mut(), householder.as_mut(), par, stack, Default::default());
        }
        {
            let mut mem = MemBuffer::new(
                linalg::householder::apply_block_householder_sequence_transpose_on_the_left_in_place_scratch::<c64>(
                    n, block_size, n,
                ),
            );
            let stack = MemStack::new(&mut mem);
            linalg::householder::apply_block_householder_sequence_transpose_on_the_left_in_place_with_conj(
                fb.as_ref(),
                householder.as_ref(),
                faer::Conj::Yes,
                fa.as_mut(),
                par,
                stack,
            );
        }
        {
            let mut mem = MemBuffer::new(
                linalg::householder::apply_block_householder_sequence_on_the_left_in_place_scratch::<c64>(n, block_size, n),
            );
            let stack = MemStack::new(&mut mem);
            linalg::householder::apply_block_householder_sequence_on_the_left_in_place_with_conj(
                fb.as_ref(),
                householder.as_ref(),
                faer::Conj::No,
                q.as_mut(),
                par,
                stack,
            );
        }
        for j in 0..n {
            for i in (j + 1)..n {
                fb[(i, j)] = c64::ZERO;
            }
        }
    }

    // Step 2: Hessenberg-triangular reduction.
    {
        let params: faer::Spec<gevd::gen_hessenberg::GeneralizedHessenbergParams, c64> = Default::default();
        let mut mem = MemBuffer::new(gevd::gen_hessenberg::generalized_hessenberg_scratch::<c64>(n, params.config));
        let stack = MemStack::new(&mut mem);
        gevd::gen_hessenberg::generalized_hessenberg(
            fa.as_mut(),
            fb.as_mut(),
            Some(q.as_mut()),
            Some(z.as_mut()),
            par,
            stack,
            params.config,
        );
    }

    // Step 3: blocked QZ iteration toward triangular form.
    if run_qz {
        let mut alpha = faer::diag::Diag::<c64>::zeros(n);
        let mut beta = faer::diag::Diag::<c64>::zeros(n);
        let params: faer::Spec<gevd::GeneralizedSchurParams, c64> = Default::default();
        let mut mem = MemBuffer::new(gevd::qz_cplx::hessenberg_to_qz_scratch::<c64>(n, par, params.config));
        let stack = MemStack::new(&mut mem);
        gevd::qz_cplx::hessenberg_to_qz::<c64>(
            fa.as_mut(),
            fb.as_mut(),
            Some(q.as_mut()),
            Some(z.as_mut()),
            alpha.as_mut().column_vector_mut(),
            beta.as_mut().column_vector_mut(),
            gevd::ComputeEigenvectors::Yes,
            par,
            params.config,
            stack,
        );
    }

    (from_faer(fa.as_ref()), from_faer(fb.as_ref()), from_faer(q.as_ref()), from_faer(z.as_ref()))
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let fa = to_faer(a);
    let svd = fa.svd().expect("svd did not converge");
    let s = svd.S();
    (0..Ord::min(a.nrows(), a.ncols())).map(|i| s[i].norm()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::test_support::Rng;

    fn random(rng: &mut Rng, m: usize, n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(m, n, |_, _| Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
    }

    #[test]
    fn matmul_matches_naive_across_dispatch_boundary() {
        let mut rng = Rng::seed(42);
        for n in [3usize, 23, 24, 25, 40] {
            let a = random(&mut rng, n, n + 1);
            let b = random(&mut rng, n + 1, n);
            let c = matmul(&a, &b);
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Complex64::ZERO;
                    for k in 0..n + 1 {
                        acc += a[(i, k)] * b[(k, j)];
                    }
                    assert!((acc - c[(i, j)]).norm() <= 1e-12, "mismatch at n={n}");
                }
            }
        }
    }

    #[test]
    fn solve_linear_residual_small_and_large() {
        let mut rng = Rng::seed(7);
        for n in [5usize, 64] {
            let a = random(&mut rng, n, n);
            let b = random(&mut rng, n, 3);
            let x = solve_linear(&a, &b).unwrap();
            let r = &matmul(&a, &x) - &b;
            assert!(r.norm_max() <= 1e-10 * b.norm_max().max(1.0), "residual too big at n={n}");
        }
    }

    #[test]
    fn solve_linear_rejects_singular() {
        let a = DenseMatrix::real(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let b = DenseMatrix::identity(2);
        assert!(matches!(solve_linear(&a, &b), Err(Error::NumericallySingular { .. })));
    }

    #[test]
    fn det_of_triangular_product() {
        let a = DenseMatrix::real(&[&[2.0, 1.0], &[0.0, 3.0]]);
        assert!((det(&a) - Complex64::new(6.0, 0.0)).norm() < 1e-14);
        let b = DenseMatrix::real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!((det(&b) - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn qr_reconstructs() {
        let mut rng = Rng::seed(3);
        for (m, n) in [(6, 6), (10, 4), (40, 40)] {
            let a = random(&mut rng, m, n);
            let (q, r) = qr(&a);
            let rec = &matmul(&q, &r) - &a;
            assert!(rec.norm_max() <= 1e-12 * a.norm_max());
            let qh_q = matmul(&q.adjoint(), &q);
            let err = (&qh_q - &DenseMatrix::identity(m)).norm_max();
            assert!(err <= 1e-12);
        }
    }

    #[test]
    fn rrqr_rank_and_reconstruction() {
        let mut rng = Rng::seed(11);
        // Rank-1 outer product, n = 5 (compared against its singular values).
        let u: Vec<f64> = (0..5).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let v: Vec<f64> = (0..5).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let a = DenseMatrix::from_fn(5, 5, |i, j| Complex64::new(u[i] * v[j], 0.0));
        let f = rrqr(&a, 1e-10);
        assert_eq!(f.rank, 1);
        let sv = singular_values(&a);
        assert!(sv[1] <= 1e-12 * sv[0]);
        // Reconstruction: column j of Q R equals column perm[j] of A.
        let qr_prod = matmul(&f.q, &f.r);
        for j in 0..5 {
            for i in 0..5 {
                assert!((qr_prod[(i, j)] - a[(i, f.perm[j])]).norm() <= 1e-12);
            }
        }
        // Nonincreasing diagonal.
        for i in 1..5 {
            assert!(f.r[(i, i)].norm() <= f.r[(i - 1, i - 1)].norm() + 1e-14);
        }
        // Zero matrix has rank 0; forced threshold case.
        let z = DenseMatrix::zeros(2, 2);
        assert_eq!(rrqr(&z, 1e-12).rank, 0);
        let d = DenseMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                Complex64::new(if i == 0 { 1.0 } else { 1e-20 }, 0.0)
            } else {
                Complex64::ZERO
            }
        });
        assert_eq!(rrqr(&d, 1e-12).rank, 1);
    }

    #[test]
    fn gen_schur_reconstructs_and_triangularizes() {
        let mut rng = Rng::seed(19);
        for n in [1usize, 2, 6, 50] {
            let a = random(&mut rng, n, n);
            let b = random(&mut rng, n, n);
            let (s, t, q, z) = gen_schur(&a, &b).unwrap();
            let zh = z.adjoint();
            let ra = &matmul(&matmul(&q, &s), &zh) - &a;
            let rb = &matmul(&matmul(&q, &t), &zh) - &b;
            let scale = a.norm_max().max(b.norm_max());
            assert!(ra.norm_max() <= 1e-11 * scale, "A reconstruction failed at n={n}");
            assert!(rb.norm_max() <= 1e-11 * scale, "B reconstruction failed at n={n}");
            let qe = (&matmul(&q.adjoint(), &q) - &DenseMatrix::identity(n)).norm_max();
            let ze = (&matmul(&z.adjoint(), &z) - &DenseMatrix::identity(n)).norm_max();
            assert!(qe <= 1e-12 && ze <= 1e-12);
        }
    }

    #[test]
    fn singular_values_of_diag() {
        let a = DenseMatrix::real(&[&[3.0, 0.0], &[0.0, -4.0]]);
        let sv = singular_values(&a);
        assert!((sv[0] - 4.0).abs() < 1e-12 && (sv[1] - 3.0).abs() < 1e-12);
    }
}
