//! Single-shift implicit QZ iteration on a Hessenberg-triangular pair,
//! with infinite-eigenvalue deflation.
//!
//! This is the convergence authority behind [`super::gen_schur`]: the fast
//! blocked reduction occasionally returns with unconverged subdiagonals
//! (silently), and everything downstream would read garbage eigenvalues
//! off the diagonals. This routine finishes any leftover windows; when the
//! pair is already triangular it costs one deflation scan.

use num_complex::Complex64;

use super::givens::{rot_cols, rot_rows, rotg};
use super::matrix::{DenseMatrix, UNIT_ROUNDOFF};
use crate::error::{Error, Result};

/// Drive `(H, T)` (upper Hessenberg, upper triangular) to triangular form
/// by unitary equivalences accumulated into `Q`, `Z`:
/// `A = Q H Z^H` and `B = Q T Z^H` stay invariant.
pub fn qz_iterate(
    h: &mut DenseMatrix,
    t: &mut DenseMatrix,
    q: &mut DenseMatrix,
    z: &mut DenseMatrix,
) -> Result<()> {
    let n = h.nrows();
    if n <= 1 {
        return Ok(());
    }
    let hnorm = h.norm_max().max(f64::MIN_POSITIVE);
    let tnorm = t.norm_max().max(f64::MIN_POSITIVE);
    let atol = n as f64 * UNIT_ROUNDOFF * hnorm;
    let btol = n as f64 * UNIT_ROUNDOFF * tnorm;

    let mut ilast = n - 1;
    let mut sweeps_here = 0usize;
    let mut total = 0usize;
    let budget = 64 * n + 256;

    'outer: loop {
        // Set negligible subdiagonals of H to zero (global-norm test).
        for j in 1..=ilast {
            let sub = h[(j, j - 1)].norm();
            if sub > 0.0 && sub <= atol {
                h[(j, j - 1)] = Complex64::ZERO;
            }
        }
        // Deflate converged 1x1 blocks off the bottom.
        loop {
            if ilast == 0 {
                break 'outer;
            }
            if h[(ilast, ilast - 1)] == Complex64::ZERO {
                ilast -= 1;
                sweeps_here = 0;
            } else {
                break;
            }
        }
        // Top of the irreducible window.
        let mut ifirst = ilast;
        while ifirst > 0 && h[(ifirst, ifirst - 1)] != Complex64::ZERO {
            ifirst -= 1;
        }

        // Infinite eigenvalues: a negligible diagonal of T inside the window.
        if t[(ilast, ilast)].norm() <= btol {
            deflate_infinite_bottom(h, t, z, ifirst, ilast);
            continue 'outer;
        }
        if let Some(jz) = (ifirst..ilast).find(|&j| t[(j, j)].norm() <= btol) {
            push_t_zero_down(h, t, q, z, ifirst, ilast, jz);
            continue 'outer;
        }

        total += 1;
        sweeps_here += 1;
        if total > budget {
            return Err(Error::NoConvergence { iterations: total });
        }
        let shift = if sweeps_here % 16 == 0 {
            // Exceptional shift to break symmetry-induced stagnation.
            (h[(ilast, ilast)] + h[(ilast, ilast - 1)] * Complex64::new(0.736, 0.219)) / t[(ilast, ilast)]
        } else {
            wilkinson_shift(h, t, ilast)
        };
        sweep(h, t, q, z, ifirst, ilast, shift);
    }
    Ok(())
}

/// Generalized eigenvalue of the trailing 2x2 of the window pencil closest
/// to the bottom quotient.
fn wilkinson_shift(h: &DenseMatrix, t: &DenseMatrix, ilast: usize) -> Complex64 {
    let m = ilast;
    let h11 = h[(m - 1, m - 1)];
    let h12 = h[(m - 1, m)];
    let h21 = h[(m, m - 1)];
    let h22 = h[(m, m)];
    let t11 = t[(m - 1, m - 1)];
    let t12 = t[(m - 1, m)];
    let t22 = t[(m, m)];
    // det(H2 - lambda T2) = a lambda^2 + b lambda + c.
    let a = t11 * t22;
    let b = -(h11 * t22 + h22 * t11 - h21 * t12);
    let c = h11 * h22 - h12 * h21;
    let target = h22 / t22;
    if a.norm() == 0.0 {
        if b.norm() == 0.0 {
            return target;
        }
        return -c / b;
    }
    let disc = (b * b - 4.0 * a * c).sqrt();
    // Pick the branch that avoids cancellation in -b -+ disc.
    let qn = if (b + disc).norm() >= (b - disc).norm() { -(b + disc) * 0.5 } else { -(b - disc) * 0.5 };
    if qn.norm() == 0.0 {
        return target;
    }
    let r1 = qn / a;
    let r2 = c / qn;
    if (r1 - target).norm() <= (r2 - target).norm() {
        r1
    } else {
        r2
    }
}

/// One implicit single-shift bulge chase over the window `[ifirst, ilast]`.
fn sweep(
    h: &mut DenseMatrix,
    t: &mut DenseMatrix,
    q: &mut DenseMatrix,
    z: &mut DenseMatrix,
    ifirst: usize,
    ilast: usize,
    shift: Complex64,
) {
    let n = h.nrows();
    for j in ifirst..ilast {
        let (c, s) = if j == ifirst {
            let f = h[(j, j)] - shift * t[(j, j)];
            let g = h[(j + 1, j)];
            let (c, s, _) = rotg(f, g);
            (c, s)
        } else {
            let f = h[(j, j - 1)];
            let g = h[(j + 1, j - 1)];
            let (c, s, r) = rotg(f, g);
            h[(j, j - 1)] = r;
            h[(j + 1, j - 1)] = Complex64::ZERO;
            (c, s)
        };
        rot_rows(h, j, j + 1, c, s, j, n);
        rot_rows(t, j, j + 1, c, s, j, n);
        rot_cols(q, j, j + 1, c, s, 0, n);

        // Restore the triangularity of T: zero the fill at (j+1, j).
        let f = t[(j + 1, j + 1)];
        let g = t[(j + 1, j)];
        let (c2, s2, r2) = rotg(f, g);
        t[(j + 1, j + 1)] = r2;
        t[(j + 1, j)] = Complex64::ZERO;
        rot_cols(t, j + 1, j, c2, s2.conj(), 0, j + 1);
        rot_cols(h, j + 1, j, c2, s2.conj(), 0, (j + 3).min(n));
        rot_cols(z, j + 1, j, c2, s2.conj(), 0, n);
    }
}

/// `T[ilast, ilast] ~ 0`: expose the infinite eigenvalue by zeroing
/// `H[ilast, ilast-1]` with a column rotation (which also refills the
/// diagonal of T above), then let the bottom 1x1 deflate.
fn deflate_infinite_bottom(h: &mut DenseMatrix, t: &mut DenseMatrix, z: &mut DenseMatrix, ifirst: usize, ilast: usize) {
    let n = h.nrows();
    t[(ilast, ilast)] = Complex64::ZERO;
    if ilast > ifirst {
        let f = h[(ilast, ilast)];
        let g = h[(ilast, ilast - 1)];
        let (c, s, r) = rotg(f, g);
        h[(ilast, ilast)] = r;
        h[(ilast, ilast - 1)] = Complex64::ZERO;
        rot_cols(h, ilast, ilast - 1, c, s.conj(), 0, ilast);
        rot_cols(t, ilast, ilast - 1, c, s.conj(), 0, ilast);
        rot_cols(z, ilast, ilast - 1, c, s.conj(), 0, n);
    }
}

/// Chase a zero diagonal of T from position `jz` down to the bottom of the
/// window, where the infinite eigenvalue deflates.
fn push_t_zero_down(
    h: &mut DenseMatrix,
    t: &mut DenseMatrix,
    q: &mut DenseMatrix,
    z: &mut DenseMatrix,
    ifirst: usize,
    ilast: usize,
    jz: usize,
) {
    let n = h.nrows();
    t[(jz, jz)] = Complex64::ZERO;
    for l in jz..ilast {
        // Row rotation moving the zero one position down the diagonal.
        let f = t[(l, l + 1)];
        let g = t[(l + 1, l + 1)];
        let (c, s, r) = rotg(f, g);
        t[(l, l + 1)] = r;
        t[(l + 1, l + 1)] = Complex64::ZERO;
        rot_rows(t, l, l + 1, c, s, l + 2, n);
        let from = if l > ifirst { l - 1 } else { l };
        rot_rows(h, l, l + 1, c, s, from, n);
        rot_cols(q, l, l + 1, c, s, 0, n);
        if l > ifirst {
            // Kill the Hessenberg bulge the row rotation created.
            let f2 = h[(l + 1, l)];
            let g2 = h[(l + 1, l - 1)];
            let (c2, s2, r2) = rotg(f2, g2);
            h[(l + 1, l)] = r2;
            h[(l + 1, l - 1)] = Complex64::ZERO;
            rot_cols(h, l, l - 1, c2, s2.conj(), 0, l + 1);
            rot_cols(t, l, l - 1, c2, s2.conj(), 0, l);
            rot_cols(z, l, l - 1, c2, s2.conj(), 0, n);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::backend::matmul;
    use super::super::test_support::Rng;
    use super::*;

    fn random_hess_tri(rng: &mut Rng, n: usize, zero_t_diags: &[usize]) -> (DenseMatrix, DenseMatrix) {
        let h = DenseMatrix::from_fn(n, n, |i, j| {
            if i <= j + 1 {
                Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
            } else {
                Complex64::ZERO
            }
        });
        let t = DenseMatrix::from_fn(n, n, |i, j| {
            if i > j || zero_t_diags.contains(&i) && i == j {
                Complex64::ZERO
            } else {
                Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
            }
        });
        (h, t)
    }

    fn check_invariants(h0: &DenseMatrix, t0: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
        let n = h0.nrows();
        let mut h = h0.clone();
        let mut t = t0.clone();
        let mut q = DenseMatrix::identity(n);
        let mut z = DenseMatrix::identity(n);
        qz_iterate(&mut h, &mut t, &mut q, &mut z).unwrap();
        let scale = h0.norm_max().max(t0.norm_max());
        // Triangular to roundoff.
        for i in 0..n {
            for j in 0..i {
                assert!(h[(i, j)].norm() <= 1e-10 * scale, "H not triangular at ({i},{j})");
                assert!(t[(i, j)].norm() <= 1e-10 * scale, "T not triangular at ({i},{j})");
            }
        }
        // Reconstruction.
        let ra = (&matmul(&matmul(&q, &h), &z.adjoint()) - h0).norm_max();
        let rb = (&matmul(&matmul(&q, &t), &z.adjoint()) - t0).norm_max();
        assert!(ra <= 1e-11 * scale.max(1.0), "H reconstruction {ra:.3e}");
        assert!(rb <= 1e-11 * scale.max(1.0), "T reconstruction {rb:.3e}");
        let qe = (&matmul(&q.adjoint(), &q) - &DenseMatrix::identity(n)).norm_max();
        let ze = (&matmul(&z.adjoint(), &z) - &DenseMatrix::identity(n)).norm_max();
        assert!(qe <= 1e-12 && ze <= 1e-12, "factors lost unitarity");
        (h, t)
    }

    #[test]
    fn converges_on_random_pairs() {
        let mut rng = Rng::seed(99);
        for n in [2usize, 3, 6, 12, 30] {
            let (h0, t0) = random_hess_tri(&mut rng, n, &[]);
            let (h, t) = check_invariants(&h0, &t0);
            // Eigenvalues are determinant roots of the original pencil.
            let detf = |zv: Complex64| super::super::backend::det(&(&h0 - &t0.scale(zv)));
            let lead = super::super::backend::det(&-&t0);
            let finite: Vec<Complex64> = (0..n)
                .filter(|&i| t[(i, i)].norm() > 1e-10)
                .map(|i| h[(i, i)] / t[(i, i)])
                .collect();
            for probe in [Complex64::new(0.43, 0.17), Complex64::new(-1.31, 0.7)] {
                let mut prod = lead;
                for l in &finite {
                    prod *= probe - l;
                }
                let d = detf(probe);
                assert!(
                    (d - prod).norm() <= 1e-7 * d.norm().max(prod.norm()),
                    "characteristic polynomial mismatch at n={n}"
                );
            }
        }
    }

    #[test]
    fn handles_singular_t() {
        let mut rng = Rng::seed(123);
        for zeros in [&[0usize][..], &[3], &[0, 3], &[5]] {
            let n = 6;
            let (h0, t0) = random_hess_tri(&mut rng, n, zeros);
            let (_h, t) = check_invariants(&h0, &t0);
            // As many (near-)zero T diagonals survive as were planted:
            // unitary equivalences keep the rank of T.
            let tiny = (0..n).filter(|&i| t[(i, i)].norm() <= 1e-8 * t0.norm_max()).count();
            assert_eq!(tiny, zeros.len(), "infinite eigenvalue count changed");
        }
    }

    #[test]
    fn already_triangular_is_a_noop_scan() {
        let mut rng = Rng::seed(5);
        let n = 8;
        let h0 = DenseMatrix::from_fn(n, n, |i, j| {
            if i <= j {
                Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
            } else {
                Complex64::ZERO
            }
        });
        let t0 = DenseMatrix::from_fn(n, n, |i, j| {
            if i <= j {
                Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
            } else {
                Complex64::ZERO
            }
        });
        let mut h = h0.clone();
        let mut t = t0.clone();
        let mut q = DenseMatrix::identity(n);
        let mut z = DenseMatrix::identity(n);
        qz_iterate(&mut h, &mut t, &mut q, &mut z).unwrap();
        assert_eq!(h, h0);
        assert_eq!(t, t0);
        assert_eq!(q, DenseMatrix::identity(n));
    }
}
