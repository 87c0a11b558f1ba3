//! Minimal dense linear-algebra contract the rest of the crate builds on.
//!
//! Everything here is a pure function of immutable inputs: factorizations,
//! linear solves and the ordered generalized Schur decomposition. No other
//! module touches a decomposition directly.

mod backend;
mod givens;
mod qz_iter;
mod matrix;

pub use backend::{det, matmul, qr, rrqr, singular_values, solve_linear, solve_linear_scaled, RankRevealingQr};
pub use givens::{rot_cols, rot_rows, rotg};
pub use matrix::{DenseMatrix, UNIT_ROUNDOFF};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Generalized eigenvalue stored as the pair `(alpha, beta)` with value
/// `alpha / beta`; `beta = 0` encodes the eigenvalue at infinity, which
/// pairs with 0 under the reciprocal map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PencilEig {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl PencilEig {
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        Self { alpha, beta }
    }

    /// `|alpha| / |beta|`, infinite when `beta = 0`.
    pub fn modulus(&self) -> f64 {
        let b = self.beta.norm();
        if b == 0.0 {
            f64::INFINITY
        } else {
            self.alpha.norm() / b
        }
    }

    /// Natural log of the modulus; `-inf` for 0 and `+inf` for infinity.
    /// The reciprocal map negates it, which makes pairing checks linear.
    pub fn log_modulus(&self) -> f64 {
        self.modulus().ln()
    }

    pub fn is_finite(&self) -> bool {
        self.modulus().is_finite()
    }

    /// The complex value `alpha / beta`; infinite components for `beta = 0`.
    pub fn value(&self) -> Complex64 {
        self.alpha / self.beta
    }

    /// The eigenvalue `1/λ`, exact in the `(alpha, beta)` representation.
    pub fn reciprocal(&self) -> Self {
        Self { alpha: self.beta, beta: self.alpha }
    }

    /// True when `self * other ≈ 1` in the homogeneous representation.
    pub fn is_reciprocal_of(&self, other: &PencilEig, rtol: f64) -> bool {
        let p = self.alpha * other.alpha;
        let q = self.beta * other.beta;
        (p - q).norm() <= rtol * (p.norm() + q.norm())
    }
}

/// Ordered generalized Schur decomposition of a pair `(A, B)`:
/// `A = Q S Z^H`, `B = Q T Z^H`, with the selected eigenvalues occupying the
/// leading `selected` diagonal positions.
pub struct OrderedGeneralizedSchur {
    pub q: DenseMatrix,
    pub z: DenseMatrix,
    pub s: DenseMatrix,
    pub t: DenseMatrix,
    pub selected: usize,
}

impl OrderedGeneralizedSchur {
    /// Generalized eigenvalues read off the diagonals of `(S, T)`.
    pub fn eigenvalues(&self) -> Vec<PencilEig> {
        (0..self.s.nrows()).map(|i| PencilEig::new(self.s[(i, i)], self.t[(i, i)])).collect()
    }
}

/// Generalized Schur form of `A - λB` with the eigenvalues satisfying
/// `select` moved to the leading block of the diagonal.
pub fn ordered_gen_schur(
    a: &DenseMatrix,
    b: &DenseMatrix,
    select: impl Fn(&PencilEig) -> bool,
) -> Result<OrderedGeneralizedSchur> {
    let (s, t, q, z) = backend::gen_schur(a, b)?;
    check_regular(&s, &t)?;
    let mask: Vec<bool> = (0..s.nrows())
        .map(|i| select(&PencilEig::new(s[(i, i)], t[(i, i)])))
        .collect();
    reorder_by_mask(s, t, q, z, &mask)
}

/// Like [`ordered_gen_schur`] but with the selection given per Schur
/// position instead of as a predicate.
pub fn ordered_gen_schur_mask(a: &DenseMatrix, b: &DenseMatrix, mask: &[bool]) -> Result<OrderedGeneralizedSchur> {
    let (s, t, q, z) = backend::gen_schur(a, b)?;
    check_regular(&s, &t)?;
    reorder_by_mask(s, t, q, z, mask)
}

/// Like [`ordered_gen_schur`] but with the selection chosen from the whole
/// eigenvalue list at once, for set-level rules (rank by modulus, pairing)
/// a pointwise predicate cannot express.
pub fn ordered_gen_schur_by(
    a: &DenseMatrix,
    b: &DenseMatrix,
    choose: impl FnOnce(&[PencilEig]) -> Vec<bool>,
) -> Result<OrderedGeneralizedSchur> {
    let (s, t, q, z) = backend::gen_schur(a, b)?;
    check_regular(&s, &t)?;
    let eigs: Vec<PencilEig> = (0..s.nrows()).map(|i| PencilEig::new(s[(i, i)], t[(i, i)])).collect();
    let mask = choose(&eigs);
    reorder_by_mask(s, t, q, z, &mask)
}

/// Eigenvalues of the unordered generalized Schur form of `(A, B)`, in the
/// order the QZ iteration produced them.
pub fn gen_eigenvalues(a: &DenseMatrix, b: &DenseMatrix) -> Result<Vec<PencilEig>> {
    let (s, t, _, _) = backend::gen_schur(a, b)?;
    check_regular(&s, &t)?;
    Ok((0..s.nrows()).map(|i| PencilEig::new(s[(i, i)], t[(i, i)])).collect())
}

/// Eigenvalues of the linear pencil `P + z Q`, i.e. the roots of
/// `det(P + z Q)` with infinity accounting for the rank deficiency of `Q`.
pub fn linear_pencil_eigenvalues(p: &DenseMatrix, q: &DenseMatrix) -> Result<Vec<PencilEig>> {
    gen_eigenvalues(&-p, q)
}

fn reorder_by_mask(
    mut s: DenseMatrix,
    mut t: DenseMatrix,
    mut q: DenseMatrix,
    mut z: DenseMatrix,
    mask: &[bool],
) -> Result<OrderedGeneralizedSchur> {
    assert_eq!(mask.len(), s.nrows());
    let selected = givens::reorder_schur(&mut s, &mut t, &mut q, &mut z, mask);
    Ok(OrderedGeneralizedSchur { q, z, s, t, selected })
}

fn check_regular(s: &DenseMatrix, t: &DenseMatrix) -> Result<()> {
    let n = s.nrows();
    let tol_s = n as f64 * UNIT_ROUNDOFF * s.norm_max();
    let tol_t = n as f64 * UNIT_ROUNDOFF * t.norm_max();
    for i in 0..n {
        if s[(i, i)].norm() <= tol_s && t[(i, i)].norm() <= tol_t {
            return Err(Error::SingularPencil);
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod test_support {
    /// SplitMix64 for deterministic test data.
    pub struct Rng(u64);

    impl Rng {
        pub fn seed(s: u64) -> Self {
            Rng(s)
        }

        pub fn next_u64(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        }

        pub fn unit(&mut self) -> f64 {
            (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
        }

        pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
            lo + (hi - lo) * self.unit()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::Rng;
    use super::*;

    fn random_real(rng: &mut Rng, n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, n, |_, _| Complex64::new(rng.uniform(-1.0, 1.0), 0.0))
    }

    #[test]
    fn ordered_schur_diagonal_pair() {
        // (A, B) = (diag(2, 1/2), I), select |λ| < 1: one eigenvalue kept,
        // leading column of Z aligned with e2.
        let a = DenseMatrix::real(&[&[2.0, 0.0], &[0.0, 0.5]]);
        let b = DenseMatrix::identity(2);
        let f = ordered_gen_schur(&a, &b, |e| e.modulus() < 1.0).unwrap();
        assert_eq!(f.selected, 1);
        let z0 = (f.z[(1, 0)].norm(), f.z[(0, 0)].norm());
        assert!(z0.0 > 0.999 && z0.1 < 1e-12, "leading Z column not aligned with e2: {z0:?}");
        let eig = f.eigenvalues();
        assert!((eig[0].value().re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ordered_schur_all_unit_eigenvalues() {
        let a = DenseMatrix::identity(3);
        let b = DenseMatrix::identity(3);
        let f = ordered_gen_schur(&a, &b, |e| e.modulus() < 1.0).unwrap();
        assert_eq!(f.selected, 0);
    }

    #[test]
    fn ordered_schur_selected_span_deflating_subspace() {
        let mut rng = Rng::seed(77);
        for _ in 0..10 {
            let n = 6;
            let a = random_real(&mut rng, n);
            let b = random_real(&mut rng, n);
            let f = ordered_gen_schur(&a, &b, |e| e.modulus() < 1.0).unwrap();
            let k = f.selected;
            if k == 0 {
                continue;
            }
            // A Z_k and B Z_k must lie in the span of Q_k.
            let zk = f.z.block(0, 0, n, k);
            let qk = f.q.block(0, 0, n, k);
            let proj = |m: &DenseMatrix| m - &matmul(&qk, &matmul(&qk.adjoint(), m));
            let ra = proj(&matmul(&a, &zk));
            let rb = proj(&matmul(&b, &zk));
            let scale = a.norm_max().max(b.norm_max());
            assert!(ra.norm_max() <= 1e-11 * scale);
            assert!(rb.norm_max() <= 1e-11 * scale);
            // Selected block satisfies the predicate.
            for (i, e) in f.eigenvalues().iter().enumerate() {
                if i < k {
                    assert!(e.modulus() < 1.0);
                } else {
                    assert!(e.modulus() >= 1.0);
                }
            }
        }
    }

    #[test]
    fn eigenvalues_are_determinant_roots() {
        // Determinant-sampling oracle: every computed eigenvalue λ must make
        // det(A - λB) collapse relative to nearby sample points, and the
        // characteristic polynomial reconstructed from the eigenvalues must
        // interpolate det(A - zB) at fresh sample points.
        let mut rng = Rng::seed(123);
        let n = 6;
        let a = random_real(&mut rng, n);
        let b = random_real(&mut rng, n);
        let eigs = gen_eigenvalues(&a, &b).unwrap();
        let detf = |z: Complex64| det(&(&a - &b.scale(z)));

        let finite: Vec<Complex64> = eigs.iter().filter(|e| e.is_finite()).map(|e| e.value()).collect();
        // Leading coefficient of det(A - zB) for full-rank B is det(-B).
        let lead = det(&-&b);
        for z in [Complex64::new(0.37, 0.29), Complex64::new(-1.9, 0.4), Complex64::new(2.2, -1.3)] {
            let mut prod = lead;
            for l in &finite {
                prod *= z - l;
            }
            let d = detf(z);
            assert!((d - prod).norm() <= 1e-8 * d.norm().max(prod.norm()), "characteristic polynomial mismatch");
        }
    }

    #[test]
    fn singular_pencil_detected() {
        let a = DenseMatrix::zeros(2, 2);
        let b = DenseMatrix::zeros(2, 2);
        assert!(matches!(
            ordered_gen_schur(&a, &b, |_| true),
            Err(Error::SingularPencil)
        ));
    }

    #[test]
    fn reciprocal_representation() {
        let e = PencilEig::new(Complex64::new(2.0, 0.0), Complex64::ONE);
        assert!((e.reciprocal().modulus() - 0.5).abs() < 1e-15);
        let inf = PencilEig::new(Complex64::ONE, Complex64::ZERO);
        assert!(!inf.is_finite());
        assert_eq!(inf.reciprocal().modulus(), 0.0);
        assert!(inf.is_reciprocal_of(&inf.reciprocal(), 1e-12));
    }
}
