//! Complex Givens rotations and eigenvalue reordering of a generalized
//! Schur form by adjacent swaps.

use num_complex::Complex64;

use super::matrix::DenseMatrix;

/// Complex plane rotation `[[c, s], [-conj(s), c]]` with real `c` such that
/// it maps `(f, g)` to `(r, 0)`.
pub fn rotg(f: Complex64, g: Complex64) -> (f64, Complex64, Complex64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, Complex64::ZERO, f);
    }
    let fn_ = f.norm();
    if fn_ == 0.0 {
        // r = |g|, s = conj(g)/|g|
        let s = g.conj() / gn;
        return (0.0, s, Complex64::new(gn, 0.0));
    }
    // Scale to avoid overflow in the hypot.
    let scale = fn_.max(gn);
    let fs = f / scale;
    let gs = g / scale;
    let h = (fs.norm_sqr() + gs.norm_sqr()).sqrt();
    let c = fs.norm() / h;
    let phase = f / fn_;
    let s = phase * gs.conj() / h;
    let r = phase * (h * scale);
    (c, s, r)
}

/// Apply `[[c, s], [-conj(s), c]]` to rows `i1`, `i2` over columns `j0..j1`.
pub fn rot_rows(m: &mut DenseMatrix, i1: usize, i2: usize, c: f64, s: Complex64, j0: usize, j1: usize) {
    for j in j0..j1 {
        let x = m[(i1, j)];
        let y = m[(i2, j)];
        m[(i1, j)] = c * x + s * y;
        m[(i2, j)] = -s.conj() * x + c * y;
    }
}

/// Apply the rotation from the right to columns `j1`, `j2` over rows `i0..i1`:
/// `[x', y'] = [x, y] * [[c, s], [-conj(s), c]]^H`… concretely
/// `x' = c·x + conj(s)·y`, `y' = -s·x + c·y`.
pub fn rot_cols(m: &mut DenseMatrix, j1: usize, j2: usize, c: f64, s: Complex64, i0: usize, i1: usize) {
    for i in i0..i1 {
        let x = m[(i, j1)];
        let y = m[(i, j2)];
        m[(i, j1)] = c * x + s.conj() * y;
        m[(i, j2)] = -s * x + c * y;
    }
}

/// Swap the adjacent diagonal eigenvalues `j`, `j+1` of the triangular pair
/// `(s, t)`, updating `q` and `z` accordingly (`A = Q S Z^H`, `B = Q T Z^H`).
pub fn swap_adjacent_schur(
    s: &mut DenseMatrix,
    t: &mut DenseMatrix,
    q: &mut DenseMatrix,
    z: &mut DenseMatrix,
    j: usize,
) {
    let n = s.nrows();
    debug_assert!(j + 1 < n);
    let s11 = s[(j, j)];
    let s12 = s[(j, j + 1)];
    let s22 = s[(j + 1, j + 1)];
    let t11 = t[(j, j)];
    let t12 = t[(j, j + 1)];
    let t22 = t[(j + 1, j + 1)];

    // Rotation from the right annihilating the top of the (j+1)-st
    // generalized eigenvector of the 2x2 trailing pair.
    let f = s22 * t11 - t22 * s11;
    let g = s22 * t12 - t22 * s12;
    let sa = s22.norm() * t11.norm();
    let sb = t22.norm() * s11.norm();
    let (cz, sz_raw, _) = rotg(g, f);
    let sz = -sz_raw;
    rot_cols(s, j, j + 1, cz, sz, 0, j + 2);
    rot_cols(t, j, j + 1, cz, sz, 0, j + 2);
    rot_cols(z, j, j + 1, cz, sz, 0, z.nrows());

    // Rotation from the left restoring triangularity.
    let (cq, sq, _) = if sa >= sb {
        rotg(s[(j, j)], s[(j + 1, j)])
    } else {
        rotg(t[(j, j)], t[(j + 1, j)])
    };
    rot_rows(s, j, j + 1, cq, sq, j, s.ncols());
    rot_rows(t, j, j + 1, cq, sq, j, t.ncols());
    rot_cols(q, j, j + 1, cq, sq, 0, q.nrows());

    s[(j + 1, j)] = Complex64::ZERO;
    t[(j + 1, j)] = Complex64::ZERO;
}

/// Reorder a generalized Schur form so the positions flagged in `select`
/// move (order-preserving) to the leading block. Returns the selected count.
pub fn reorder_schur(
    s: &mut DenseMatrix,
    t: &mut DenseMatrix,
    q: &mut DenseMatrix,
    z: &mut DenseMatrix,
    select: &[bool],
) -> usize {
    let n = s.nrows();
    debug_assert_eq!(select.len(), n);
    let mut mask = select.to_vec();
    let mut target = 0usize;
    for pos in 0..n {
        if mask[pos] {
            let mut j = pos;
            while j > target {
                swap_adjacent_schur(s, t, q, z, j - 1);
                mask.swap(j - 1, j);
                j -= 1;
            }
            target += 1;
        }
    }
    target
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::backend::matmul;
    use crate::kernels::test_support::Rng;

    #[test]
    fn rotg_annihilates() {
        let cases = [
            (Complex64::new(1.0, 2.0), Complex64::new(-0.3, 0.7)),
            (Complex64::ZERO, Complex64::new(2.0, -1.0)),
            (Complex64::new(-4.0, 0.0), Complex64::ZERO),
            (Complex64::new(1e-200, 0.0), Complex64::new(0.0, 1e200)),
        ];
        for (f, g) in cases {
            let (c, s, r) = rotg(f, g);
            let lo = -s.conj() * f + c * g;
            let hi = c * f + s * g;
            let scale = f.norm().max(g.norm());
            assert!(lo.norm() <= 1e-14 * scale, "second entry not annihilated");
            assert!((hi - r).norm() <= 1e-13 * scale);
            assert!((c * c + s.norm_sqr() - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn swap_preserves_pair_and_exchanges_eigenvalues() {
        let mut rng = Rng::seed(23);
        for _ in 0..50 {
            let n = 4;
            let tri = |rng: &mut Rng| {
                DenseMatrix::from_fn(n, n, |i, j| {
                    if i <= j {
                        Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
                    } else {
                        Complex64::ZERO
                    }
                })
            };
            let s0 = tri(&mut rng);
            let t0 = tri(&mut rng);
            let a = s0.clone();
            let b = t0.clone();
            let mut s = s0.clone();
            let mut t = t0.clone();
            let mut q = DenseMatrix::identity(n);
            let mut z = DenseMatrix::identity(n);
            let j = 1;
            let e1 = s0[(j, j)] / t0[(j, j)];
            let e2 = s0[(j + 1, j + 1)] / t0[(j + 1, j + 1)];
            swap_adjacent_schur(&mut s, &mut t, &mut q, &mut z, j);
            // Eigenvalues exchanged on the diagonal.
            let f1 = s[(j, j)] / t[(j, j)];
            let f2 = s[(j + 1, j + 1)] / t[(j + 1, j + 1)];
            assert!((f1 - e2).norm() <= 1e-10 * (1.0 + e2.norm()));
            assert!((f2 - e1).norm() <= 1e-10 * (1.0 + e1.norm()));
            // Pair reconstructed: Q S Z^H = A.
            let ra = &matmul(&matmul(&q, &s), &z.adjoint()) - &a;
            let rb = &matmul(&matmul(&q, &t), &z.adjoint()) - &b;
            assert!(ra.norm_max() <= 1e-13 * (1.0 + a.norm_max()));
            assert!(rb.norm_max() <= 1e-13 * (1.0 + b.norm_max()));
        }
    }

    #[test]
    fn reorder_moves_selection_to_front() {
        let mut rng = Rng::seed(5);
        let n = 6;
        let tri = |rng: &mut Rng| {
            DenseMatrix::from_fn(n, n, |i, j| {
                if i <= j {
                    Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
                } else {
                    Complex64::ZERO
                }
            })
        };
        let mut s = tri(&mut rng);
        let mut t = tri(&mut rng);
        let select: Vec<bool> = (0..n).map(|i| i % 2 == 1).collect();
        let wanted: Vec<Complex64> = (0..n).filter(|&i| select[i]).map(|i| s[(i, i)] / t[(i, i)]).collect();
        let mut q = DenseMatrix::identity(n);
        let mut z = DenseMatrix::identity(n);
        let count = reorder_schur(&mut s, &mut t, &mut q, &mut z, &select);
        assert_eq!(count, 3);
        for (k, w) in wanted.iter().enumerate() {
            let got = s[(k, k)] / t[(k, k)];
            assert!((got - w).norm() <= 1e-9 * (1.0 + w.norm()), "order not preserved");
        }
    }
}
