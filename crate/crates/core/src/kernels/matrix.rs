//! Dense complex matrices in row-major order.
//!
//! Complex arithmetic is the default scalar field of the whole crate; real
//! matrices are the special case where every imaginary part is exactly zero.

use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Unit roundoff of binary64 (half the machine epsilon).
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Dense matrix with `Complex64` entries stored row-major.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![Complex64::ZERO; nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Self { nrows, ncols, data }
    }

    /// Build a real matrix from rows of `f64` literals.
    pub fn real(rows: &[&[f64]]) -> Self {
        let nrows = rows.len();
        let ncols = if nrows == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        Self::from_fn(nrows, ncols, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    /// Build a real matrix from a row-major slice.
    pub fn from_real_slice(nrows: usize, ncols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), nrows * ncols);
        Self::from_fn(nrows, ncols, |i, j| Complex64::new(entries[i * ncols + j], 0.0))
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.nrows, self.ncols, |i, j| self[(i, j)].conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)].conj())
    }

    pub fn map(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        Self::from_fn(self.nrows, self.ncols, |i, j| f(self[(i, j)]))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|x| x * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.map(|x| x * s)
    }

    /// Copy of the `nr x nc` block with top-left corner `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        assert!(r0 + nr <= self.nrows && c0 + nc <= self.ncols, "block out of range");
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, m: &DenseMatrix) {
        assert!(r0 + m.nrows <= self.nrows && c0 + m.ncols <= self.ncols, "block out of range");
        for i in 0..m.nrows {
            for j in 0..m.ncols {
                self[(r0 + i, c0 + j)] = m[(i, j)];
            }
        }
    }

    /// Assemble `[[a, b], [c, d]]`.
    pub fn block2x2(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix, d: &DenseMatrix) -> Self {
        assert_eq!(a.nrows, b.nrows);
        assert_eq!(c.nrows, d.nrows);
        assert_eq!(a.ncols, c.ncols);
        assert_eq!(b.ncols, d.ncols);
        let mut m = Self::zeros(a.nrows + c.nrows, a.ncols + b.ncols);
        m.set_block(0, 0, a);
        m.set_block(0, a.ncols, b);
        m.set_block(a.nrows, 0, c);
        m.set_block(a.nrows, a.ncols, d);
        m
    }

    /// Assemble `[top; bottom]`.
    pub fn vstack(top: &DenseMatrix, bottom: &DenseMatrix) -> Self {
        assert_eq!(top.ncols, bottom.ncols);
        let mut m = Self::zeros(top.nrows + bottom.nrows, top.ncols);
        m.set_block(0, 0, top);
        m.set_block(top.nrows, 0, bottom);
        m
    }

    /// Assemble `[left, right]`.
    pub fn hstack(left: &DenseMatrix, right: &DenseMatrix) -> Self {
        assert_eq!(left.nrows, right.nrows);
        let mut m = Self::zeros(left.nrows, left.ncols + right.ncols);
        m.set_block(0, 0, left);
        m.set_block(0, left.ncols, right);
        m
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|x| x.im == 0.0)
    }

    /// Real part, with imaginary parts dropped.
    pub fn re(&self) -> Self {
        self.map(|x| Complex64::new(x.re, 0.0))
    }

    pub fn max_im_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.im.abs()))
    }

    pub fn is_all_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    /// Induced infinity norm (largest absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| (0..self.ncols).map(|j| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm, estimated by power iteration on `A^H A`.
    ///
    /// Converges to a relative accuracy far tighter than any tolerance used
    /// in this crate; returns 0 for the zero matrix.
    pub fn norm2(&self) -> f64 {
        if self.nrows == 0 || self.ncols == 0 {
            return 0.0;
        }
        let fro = self.norm_fro();
        if fro == 0.0 {
            return 0.0;
        }
        // Deterministic start with nonzero projection on (almost) any direction.
        let mut v: Vec<Complex64> = (0..self.ncols)
            .map(|j| Complex64::new(1.0 + (j as f64) * 0.618_033, 0.382 / (1.0 + j as f64)))
            .collect();
        normalize(&mut v);
        let mut sigma = 0.0f64;
        let mut w = vec![Complex64::ZERO; self.nrows];
        for _ in 0..200 {
            self.matvec_into(&v, &mut w);
            let s = vec_norm(&w);
            if s == 0.0 {
                return 0.0;
            }
            self.matvec_adjoint_into(&w, &mut v);
            let t = normalize(&mut v);
            let new_sigma = if s > 0.0 { t / s } else { 0.0 };
            if (new_sigma - sigma).abs() <= 1e-12 * new_sigma.max(fro * 1e-300) {
                return new_sigma;
            }
            sigma = new_sigma;
        }
        sigma
    }

    pub fn matvec_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(v.len(), self.ncols);
        assert_eq!(out.len(), self.nrows);
        for i in 0..self.nrows {
            let row = &self.data[i * self.ncols..(i + 1) * self.ncols];
            let mut acc = Complex64::ZERO;
            for (a, x) in row.iter().zip(v) {
                acc += a * x;
            }
            out[i] = acc;
        }
    }

    pub fn matvec_adjoint_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(v.len(), self.nrows);
        assert_eq!(out.len(), self.ncols);
        out.fill(Complex64::ZERO);
        for i in 0..self.nrows {
            let row = &self.data[i * self.ncols..(i + 1) * self.ncols];
            let vi = v[i];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * vi;
            }
        }
    }

    /// Swap two columns in place.
    pub fn swap_cols(&mut self, j1: usize, j2: usize) {
        if j1 == j2 {
            return;
        }
        for i in 0..self.nrows {
            self.data.swap(i * self.ncols + j1, i * self.ncols + j2);
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        &self.data[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.nrows && j < self.ncols);
        &mut self.data[i * self.ncols + j]
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        DenseMatrix::from_fn(self.nrows, self.ncols, |i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        DenseMatrix::from_fn(self.nrows, self.ncols, |i, j| self[(i, j)] - rhs[(i, j)])
    }
}

impl Neg for &DenseMatrix {
    type Output = DenseMatrix;
    fn neg(self) -> DenseMatrix {
        self.map(|x| -x)
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        super::backend::matmul(self, rhs)
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.nrows, self.ncols)?;
        for i in 0..self.nrows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.ncols.min(8) {
                let x = self[(i, j)];
                if x.im == 0.0 {
                    write!(f, "{:>12.4e} ", x.re)?;
                } else {
                    write!(f, "{:>9.2e}{:+.2e}i ", x.re, x.im)?;
                }
            }
            writeln!(f, "{}", if self.ncols > 8 { "..." } else { "" })?;
        }
        if self.nrows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let n = vec_norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_assembly_round_trips() {
        let a = DenseMatrix::real(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = DenseMatrix::real(&[&[5.0], &[6.0]]);
        let c = DenseMatrix::real(&[&[7.0, 8.0]]);
        let d = DenseMatrix::real(&[&[9.0]]);
        let m = DenseMatrix::block2x2(&a, &b, &c, &d);
        assert_eq!(m.block(0, 0, 2, 2), a);
        assert_eq!(m.block(0, 2, 2, 1), b);
        assert_eq!(m.block(2, 0, 1, 2), c);
        assert_eq!(m[(2, 2)].re, 9.0);
    }

    #[test]
    fn norms_on_known_matrix() {
        // [[3, 4], [0, 0]] has spectral norm 5 (single nonzero singular value).
        let m = DenseMatrix::real(&[&[3.0, 4.0], &[0.0, 0.0]]);
        assert!((m.norm2() - 5.0).abs() < 1e-10);
        assert!((m.norm_inf() - 7.0).abs() < 1e-14);
        assert!((m.norm_fro() - 5.0).abs() < 1e-14);
        assert_eq!(m.norm_max(), 4.0);
    }

    #[test]
    fn norm2_matches_fro_on_rank_one() {
        // For rank-one matrices the spectral and Frobenius norms agree.
        let u = [1.0, -2.0, 0.5, 3.0];
        let v = [0.3, 1.7, -0.9];
        let m = DenseMatrix::from_fn(4, 3, |i, j| Complex64::new(u[i] * v[j], 0.0));
        assert!((m.norm2() - m.norm_fro()).abs() < 1e-9 * m.norm_fro());
    }

    #[test]
    fn realness_flags() {
        let mut m = DenseMatrix::identity(3);
        assert!(m.is_real());
        m[(0, 1)] = Complex64::new(0.0, 1e-300);
        assert!(!m.is_real());
        assert!(m.re().is_real());
    }
}
