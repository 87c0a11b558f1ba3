//! Checkers for the theoretical conditions: absence of unit-circle
//! eigenvalues (three saddle-point style criteria) and existence of
//! solutions (definiteness of the quadratic coefficient, rank of the
//! necessary-condition matrix over an annulus grid).
//!
//! Grid-based verdicts are never reported as proved: a finite sample of the
//! circle cannot certify an all-of-T condition, so positive outcomes are
//! labelled `inconclusive-positive` and only failures carry certainty (a
//! witness reproducing the failure is always attached).

use num_complex::Complex64;

use crate::error::Result;
use crate::kernels::{gen_eigenvalues, matmul, singular_values, solve_linear, DenseMatrix, PencilEig};
use crate::pencil::{build_m, TNareProblem};

/// Which condition a report speaks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    Crit1,
    Crit2,
    Crit3,
    ExistSufficient,
    ExistNecessary,
}

impl Condition {
    pub fn tag(self) -> &'static str {
        match self {
            Condition::Crit1 => "crit-1",
            Condition::Crit2 => "crit-2",
            Condition::Crit3 => "crit-3",
            Condition::ExistSufficient => "exist-sufficient",
            Condition::ExistNecessary => "exist-necessary",
        }
    }
}

/// Outcome of a condition check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Established by a finite computation (no circle quantifier left).
    Holds,
    /// No violation found on the sample grid; not a proof.
    InconclusivePositive,
    /// Violated, with a witness attached.
    Fails,
    /// The check does not apply or cannot decide.
    Inconclusive,
}

impl Verdict {
    pub fn tag(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::InconclusivePositive => "inconclusive-positive",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Evidence attached to a verdict: a circle/annulus point, a direction
/// vector, and the scalar the check measured there.
#[derive(Clone, Debug)]
pub struct Witness {
    pub point: Option<Complex64>,
    pub vector: Option<Vec<Complex64>>,
    pub value: f64,
    pub what: &'static str,
}

#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub condition: Condition,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Sample count used (0 for gridless checks).
    pub grid: usize,
    /// Smallest margin observed (minimum eigenvalue or singular value,
    /// scaled as the condition defines).
    pub margin: f64,
}

/// Minimum eigenvalue of the symmetric part of a real matrix.
fn min_sym_eig(m: &DenseMatrix) -> f64 {
    let sym = (&m.clone() + &m.transpose()).scale_re(0.5);
    let eye = DenseMatrix::identity(m.nrows());
    match gen_eigenvalues(&sym, &eye) {
        Ok(eigs) => eigs.iter().map(|e| e.value().re).fold(f64::INFINITY, f64::min),
        Err(_) => f64::NAN,
    }
}

/// Approximate null direction of `A` (unit vector nearly annihilated by
/// `A`), found by inverse iteration on the shifted Gram matrix.
fn near_null_vector(a: &DenseMatrix) -> Vec<Complex64> {
    let n = a.ncols();
    let gram = matmul(&a.adjoint(), a);
    let shift = 1e-14 * gram.norm_inf().max(1e-300);
    let mut shifted = gram;
    for i in 0..n {
        shifted[(i, i)] += Complex64::new(shift, 0.0);
    }
    let mut v = DenseMatrix::from_fn(n, 1, |i, _| Complex64::new(1.0 / (1.0 + i as f64), 0.25 / (2.0 + i as f64)));
    for _ in 0..30 {
        let w = match solve_linear(&shifted, &v) {
            Ok(w) => w,
            Err(_) => break,
        };
        let norm = w.norm_fro();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        v = w.scale_re(1.0 / norm);
    }
    (0..n).map(|i| v[(i, 0)]).collect()
}

fn symmetry_gap(m: &DenseMatrix) -> f64 {
    (&m.clone() - &m.transpose()).norm_max()
}

/// Case 1 of the no-critical-eigenvalue conditions: `C = C^T > 0`,
/// `B = B^T > 0` and `D - A^T` of full rank. Fully decidable, no grid.
pub fn check_critical_cond1(p: &TNareProblem, tol: f64) -> Result<ConditionReport> {
    let fail = |what: &'static str, value: f64, vector: Option<Vec<Complex64>>| ConditionReport {
        condition: Condition::Crit1,
        verdict: Verdict::Fails,
        witness: Some(Witness { point: None, vector, value, what }),
        grid: 0,
        margin: value,
    };
    if symmetry_gap(p.c()) > tol {
        return Ok(fail("C is not symmetric", symmetry_gap(p.c()), None));
    }
    if symmetry_gap(p.b()) > tol {
        return Ok(fail("B is not symmetric", symmetry_gap(p.b()), None));
    }
    let min_c = min_sym_eig(p.c());
    if !(min_c > tol) {
        let lam = shift_diag(p.c(), -min_c);
        return Ok(fail("C is not positive definite", min_c, Some(near_null_vector(&lam))));
    }
    let min_b = min_sym_eig(p.b());
    if !(min_b > tol) {
        let lam = shift_diag(p.b(), -min_b);
        return Ok(fail("B is not positive definite", min_b, Some(near_null_vector(&lam))));
    }
    let gap = &p.d().clone() - &p.a().transpose();
    let sv = singular_values(&gap);
    let smin = *sv.last().unwrap_or(&0.0);
    let smax = sv.first().copied().unwrap_or(0.0);
    if !(smin > tol * smax) {
        return Ok(fail("D - A^T is rank deficient", smin, Some(near_null_vector(&gap))));
    }
    let margin = min_c.min(min_b).min(smin);
    // The theorem then excludes unit-circle eigenvalues entirely.
    debug_assert!(
        build_m(p).is_noncritical(32, 1e-10).map(|r| r.verdict).unwrap_or(false),
        "cond-1 held but the pencil probe found a near-critical eigenvalue"
    );
    Ok(ConditionReport {
        condition: Condition::Crit1,
        verdict: Verdict::Holds,
        witness: None,
        grid: 0,
        margin,
    })
}

fn shift_diag(m: &DenseMatrix, shift: f64) -> DenseMatrix {
    let mut out = m.clone();
    for i in 0..m.nrows() {
        out[(i, i)] += Complex64::new(shift, 0.0);
    }
    out
}

/// Cases 2 and 3 of the no-critical-eigenvalue conditions: semidefinite
/// `C`, `B` plus a full-rank requirement for every `y` on the circle,
/// sampled on `grid` points.
pub fn check_critical_grid(p: &TNareProblem, variant: u8, grid: usize, tol: f64) -> Result<ConditionReport> {
    assert!(variant == 2 || variant == 3, "variant must be 2 or 3");
    assert!(grid >= 16, "grid checks need at least 16 samples");
    let condition = if variant == 2 { Condition::Crit2 } else { Condition::Crit3 };
    let fail = |what: &'static str, value: f64, point: Option<Complex64>, vector: Option<Vec<Complex64>>| {
        ConditionReport {
            condition,
            verdict: Verdict::Fails,
            witness: Some(Witness { point, vector, value, what }),
            grid,
            margin: value,
        }
    };
    if symmetry_gap(p.c()) > tol {
        return Ok(fail("C is not symmetric", symmetry_gap(p.c()), None, None));
    }
    if symmetry_gap(p.b()) > tol {
        return Ok(fail("B is not symmetric", symmetry_gap(p.b()), None, None));
    }
    let min_c = min_sym_eig(p.c());
    if min_c < -tol {
        return Ok(fail("C is not positive semidefinite", min_c, None, None));
    }
    let min_b = min_sym_eig(p.b());
    if min_b < -tol {
        return Ok(fail("B is not positive semidefinite", min_b, None, None));
    }
    // Scale from the coefficient family, not the sampled matrix: at an
    // unlucky y the whole sample can collapse and would then look
    // perfectly conditioned relative to itself.
    let scale = if variant == 2 {
        2.0 * p.c().norm2() + p.d().norm2() + p.a().norm2()
    } else {
        p.a().norm2() + p.d().norm2() + 2.0 * p.b().norm2()
    }
    .max(1e-300);
    let mut min_margin = f64::INFINITY;
    for l in 0..grid {
        let y = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * l as f64 / grid as f64);
        let mat = critical_grid_matrix(p, variant, y);
        let sv = singular_values(&mat);
        let smin = *sv.last().unwrap_or(&0.0);
        let rel = smin / scale;
        min_margin = min_margin.min(rel);
        if rel <= tol {
            let u = near_null_vector(&mat.transpose());
            return Ok(fail("grid matrix lost full rank", smin, Some(y), Some(u)));
        }
    }
    Ok(ConditionReport {
        condition,
        verdict: Verdict::InconclusivePositive,
        witness: None,
        grid,
        margin: min_margin,
    })
}

/// The `n x 2n` matrix whose full rank case 2 (resp. 3) requires at `y`.
fn critical_grid_matrix(p: &TNareProblem, variant: u8, y: Complex64) -> DenseMatrix {
    let yi = y.conj(); // y^{-1} on the unit circle
    if variant == 2 {
        let left = &p.c().scale(yi) + &p.c().transpose().scale(y);
        let right = &p.d().scale(yi) + &p.a().transpose().scale(y);
        DenseMatrix::hstack(&left, &right)
    } else {
        let left = &p.a().scale(yi) + &p.d().transpose().scale(y);
        let right = &(&p.b().scale(yi) + &p.b().transpose().scale(y)).map(|x| -x);
        DenseMatrix::hstack(&left, &right)
    }
}

/// Sufficient existence condition in its decidable instantiation: a
/// positive definite symmetric part of `B` guarantees a solution for every
/// reciprocal-free selection. Anything else is inconclusive (the general
/// quantifier over complex test vectors is not decided numerically).
pub fn check_existence_sufficient(p: &TNareProblem, tol: f64) -> Result<ConditionReport> {
    let min_b = min_sym_eig(p.b());
    if min_b > tol {
        Ok(ConditionReport {
            condition: Condition::ExistSufficient,
            verdict: Verdict::Holds,
            witness: None,
            grid: 0,
            margin: min_b,
        })
    } else {
        Ok(ConditionReport {
            condition: Condition::ExistSufficient,
            verdict: Verdict::Inconclusive,
            witness: Some(Witness {
                point: None,
                vector: None,
                value: min_b,
                what: "symmetric part of B has a nonpositive eigenvalue",
            }),
            grid: 0,
            margin: min_b,
        })
    }
}

/// Necessary existence condition: `[A + z D^T, -B - z B^T]` must have rank
/// `n` away from the selected eigenvalue set; sampled on an annulus grid
/// that skips a 1e-3 neighbourhood of the given eigenvalues.
pub fn check_existence_necessary(
    p: &TNareProblem,
    selected: &[PencilEig],
    grid: usize,
    tol: f64,
) -> Result<ConditionReport> {
    assert!(grid >= 16, "grid checks need at least 16 samples");
    let exclusion = 1e-3;
    let radii = [1.0, 0.8, 1.25, 0.5, 2.0];
    let per_circle = grid.div_ceil(radii.len());
    let per_circle = per_circle + per_circle % 2; // even counts place z = -1 on the grid
    let na = p.a().norm2();
    let nb = p.b().norm2();
    let nd = p.d().norm2();
    let mut min_margin = f64::INFINITY;
    let mut sampled = 0usize;
    for &r in &radii {
        for l in 0..per_circle {
            let z = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * l as f64 / per_circle as f64);
            let near_selected = selected.iter().any(|e| {
                e.is_finite() && (e.value() - z).norm() < exclusion
            });
            if near_selected {
                continue;
            }
            sampled += 1;
            let left = &p.a().clone() + &p.d().transpose().scale(z);
            let right = &(&p.b().clone() + &p.b().transpose().scale(z)).map(|x| -x);
            let mat = DenseMatrix::hstack(&left, &right);
            let sv = singular_values(&mat);
            let smin = *sv.last().unwrap_or(&0.0);
            // Coefficient-family scale; the sampled matrix itself can
            // degenerate entirely at a root.
            let scale = (na + z.norm() * nd + (1.0 + z.norm()) * nb).max(1e-300);
            let rel = smin / scale;
            min_margin = min_margin.min(rel);
            if rel <= tol {
                let u = near_null_vector(&mat.transpose());
                return Ok(ConditionReport {
                    condition: Condition::ExistNecessary,
                    verdict: Verdict::Fails,
                    witness: Some(Witness {
                        point: Some(z),
                        vector: Some(u),
                        value: smin,
                        what: "necessary-condition matrix lost rank n",
                    }),
                    grid: sampled,
                    margin: rel,
                });
            }
        }
    }
    Ok(ConditionReport {
        condition: Condition::ExistNecessary,
        verdict: Verdict::InconclusivePositive,
        witness: None,
        grid: sampled,
        margin: min_margin,
    })
}

/// All five condition reports for a problem, for the CLI `check` command.
pub fn check_all(p: &TNareProblem, grid: usize, tol: f64) -> Result<Vec<ConditionReport>> {
    let selected = build_m(p)
        .spectrum()
        .map(|eigs| eigs.into_iter().filter(|e| e.modulus() < 1.0).collect::<Vec<_>>())
        .unwrap_or_default();
    Ok(vec![
        check_critical_cond1(p, tol)?,
        check_critical_grid(p, 2, grid, tol)?,
        check_critical_grid(p, 3, grid, tol)?,
        check_existence_sufficient(p, tol)?,
        check_existence_necessary(p, &selected, grid, tol)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::test_support::Rng;

    fn problem(a: DenseMatrix, b: DenseMatrix, c: DenseMatrix, d: DenseMatrix) -> TNareProblem {
        TNareProblem::new(a, b, c, d).unwrap()
    }

    #[test]
    fn cond1_explicit_cases() {
        let n = 3;
        let eye = DenseMatrix::identity(n);
        let zero = DenseMatrix::zeros(n, n);
        // B = C = I, D = 2I, A = 0: all three clauses hold.
        let p = problem(zero.clone(), eye.clone(), eye.clone(), eye.scale_re(2.0));
        let rep = check_critical_cond1(&p, 1e-10).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert!(crate::pencil::build_m(&p).is_noncritical(32, 1e-8).unwrap().verdict);

        // D = A^T forces rank deficiency; the witness is a null vector.
        let mut rng = Rng::seed(12);
        let a = DenseMatrix::from_fn(n, n, |_, _| Complex64::new(rng.uniform(-1.0, 1.0), 0.0));
        let p = problem(a.clone(), eye.clone(), eye.clone(), a.transpose());
        let rep = check_critical_cond1(&p, 1e-10).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
        let w = rep.witness.unwrap();
        let v = w.vector.unwrap();
        let gap = &p.d().clone() - &p.a().transpose();
        let mut img = vec![Complex64::ZERO; n];
        let vm = DenseMatrix::from_fn(n, 1, |i, _| v[i]);
        gap.matvec_into(vm.entries(), &mut img);
        let img_norm: f64 = img.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        assert!(img_norm <= 1e-8 * gap.norm2(), "witness does not annihilate D - A^T");

        // C = diag(1, 0, 1): semidefinite only.
        let mut c = DenseMatrix::identity(n);
        c[(1, 1)] = Complex64::ZERO;
        let p = problem(zero.clone(), eye.clone(), c, eye.scale_re(2.0));
        let rep = check_critical_cond1(&p, 1e-10).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
    }

    #[test]
    fn grid_checks_trivial_cases() {
        let n = 2;
        let eye = DenseMatrix::identity(n);
        let zero = DenseMatrix::zeros(n, n);
        // C = 0, B = 0, D = I, A = 0: case-2 matrix [0, y^{-1} I] keeps rank.
        let p = problem(zero.clone(), zero.clone(), zero.clone(), eye.clone());
        let rep = check_critical_grid(&p, 2, 32, 1e-10).unwrap();
        assert_eq!(rep.verdict, Verdict::InconclusivePositive);

        // All-zero data: fails immediately with a circle witness.
        let p = problem(zero.clone(), zero.clone(), zero.clone(), zero.clone());
        let rep = check_critical_grid(&p, 2, 32, 1e-10).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
        assert!(rep.witness.unwrap().point.is_some());
    }

    #[test]
    fn sufficient_condition_cases() {
        let eye = DenseMatrix::identity(2);
        let p = problem(eye.clone(), eye.clone(), eye.clone(), eye.clone());
        assert_eq!(check_existence_sufficient(&p, 1e-12).unwrap().verdict, Verdict::Holds);

        // Skew B: symmetric part zero.
        let skew = DenseMatrix::real(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let p = problem(eye.clone(), skew, eye.clone(), eye.clone());
        let rep = check_existence_sufficient(&p, 1e-12).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);

        // Indefinite B: inconclusive with the negative eigenvalue as witness.
        let ind = DenseMatrix::real(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let p = problem(eye.clone(), ind, eye.clone(), eye.clone());
        let rep = check_existence_sufficient(&p, 1e-12).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        assert!((rep.witness.unwrap().value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn necessary_condition_cases() {
        let n = 2;
        let eye = DenseMatrix::identity(n);
        let zero = DenseMatrix::zeros(n, n);
        // A = D = I, B = 0: [ (1+z) I, 0 ] collapses at z = -1.
        let p = problem(eye.clone(), zero.clone(), eye.clone(), eye.clone());
        let rep = check_existence_necessary(&p, &[], 64, 1e-8).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
        let w = rep.witness.unwrap();
        let z = w.point.unwrap();
        assert!((z - Complex64::new(-1.0, 0.0)).norm() < 1e-12, "witness should be z = -1, got {z}");

        // B = I: -(1+z) I is full rank away from -1; excluding -1 from the
        // sample set leaves only positive evidence.
        let minus_one = PencilEig::new(Complex64::new(-1.0, 0.0), Complex64::ONE);
        let p = problem(eye.clone(), eye.clone(), eye.clone(), eye.clone());
        let rep = check_existence_necessary(&p, &[minus_one], 64, 1e-8).unwrap();
        assert_eq!(rep.verdict, Verdict::InconclusivePositive);
    }

    #[test]
    fn witness_reproduces_failure() {
        // Every fails-verdict witness must reproduce a small singular value
        // when substituted into the defining matrix.
        let n = 2;
        let eye = DenseMatrix::identity(n);
        let zero = DenseMatrix::zeros(n, n);
        let p = problem(eye.clone(), zero.clone(), eye.clone(), eye.clone());
        let rep = check_existence_necessary(&p, &[], 64, 1e-8).unwrap();
        let w = rep.witness.unwrap();
        let z = w.point.unwrap();
        let u = w.vector.unwrap();
        let left = &p.a().clone() + &p.d().transpose().scale(z);
        let right = &(&p.b().clone() + &p.b().transpose().scale(z)).map(|x| -x);
        let mat = DenseMatrix::hstack(&left, &right);
        // u^T mat should vanish relative to the coefficient scale (the
        // sampled matrix itself may collapse entirely at the witness).
        let scale = p.a().norm2() + z.norm() * p.d().norm2() + (1.0 + z.norm()) * p.b().norm2();
        let um = DenseMatrix::from_fn(1, n, |_, j| u[j]);
        let prod = crate::kernels::matmul(&um, &mat);
        assert!(prod.norm_max() <= 2.0 * 1e-8 * scale);
    }
}
