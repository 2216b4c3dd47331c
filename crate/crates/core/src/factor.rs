//! Factorizations `P = A*A` with `A` supported on a pattern.
//!
//! [`structured_cholesky`] is exact for block upper triangular patterns.
//! [`factor_attempt`] is a multistart projected-gradient oracle for
//! arbitrary patterns; its best residual is what [`refute_logmodular`]
//! reports as a floor when no factor exists.

use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{cholesky, default_pivot_tol, herm_eig, ComplexMatrix, LinalgError, C64, ONE, ZERO};
use crate::pattern::{BlockStructure, Pattern, PatternError};
use crate::sampling::{complex_gaussian, substream};

pub const ARMIJO: f64 = 1e-4;
pub const SHRINK: f64 = 0.5;
pub const REFUTE_STARTS: usize = 20;
pub const REFUTE_ITERS: usize = 3000;
pub const REFUTE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorError {
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("pair ({i},{j}) is not an incomparable pair of the pattern")]
    WitnessInvalid { i: usize, j: usize },
    #[error("refutation inconclusive: best residual {floor:.3e} does not exceed {threshold}")]
    RefutationInconclusive { floor: f64, threshold: f64 },
    #[error("at least one start is required")]
    NoStarts,
    #[error(transparent)]
    Linalg(LinalgError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

impl From<LinalgError> for FactorError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::NotPsd { eigenvalue } => FactorError::NotPsd { eigenvalue },
            other => FactorError::Linalg(other),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FactorResult {
    pub factor: ComplexMatrix,
    /// `‖A*A − P‖_F`
    pub residual: f64,
    pub converged: bool,
    /// Index of the start that produced this result.
    pub start: usize,
    pub iterations: usize,
}

pub fn residual(a: &ComplexMatrix, p: &ComplexMatrix) -> f64 {
    (&a.gram() - p).frobenius_norm()
}

fn check_psd(p: &ComplexMatrix, tol: f64) -> Result<(), FactorError> {
    let eig = herm_eig(p)?;
    if eig.min() < -tol {
        return Err(FactorError::NotPsd { eigenvalue: eig.min() });
    }
    Ok(())
}

/// `A` on the certified block pattern with `A*A = P`: permute, Cholesky,
/// permute back.
pub fn structured_cholesky(p: &ComplexMatrix, cert: &BlockStructure) -> Result<ComplexMatrix, FactorError> {
    if !p.is_square() || p.rows() != cert.n() {
        return Err(FactorError::DimensionMismatch(format!(
            "matrix is {}x{}, certificate has n = {}",
            p.rows(),
            p.cols(),
            cert.n()
        )));
    }
    check_psd(p, 1e-10)?;
    let permuted = p.permute_symmetric(cert.permutation());
    let u = cholesky(&permuted, default_pivot_tol(&permuted).max(1e-14))?;
    Ok(u.unpermute_symmetric(cert.permutation()))
}

fn project(a: &mut ComplexMatrix, pattern: &Pattern) {
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if !pattern.contains(i, j) {
                a[(i, j)] = ZERO;
            }
        }
    }
}

fn objective(a: &ComplexMatrix, p: &ComplexMatrix) -> (f64, ComplexMatrix) {
    let r = &a.gram() - p;
    let f = r.frobenius_norm().powi(2);
    (f, r)
}

/// Per-iteration trace of one descent run.
#[derive(Clone, Debug)]
pub struct DescentTrace {
    pub result: FactorResult,
    /// Residual after each accepted step, starting with the initial point.
    pub history: Vec<f64>,
}

/// Projected gradient descent on `‖A*A − P‖_F²` from `a0`, with Armijo
/// backtracking. The objective never increases.
pub fn descend(p: &ComplexMatrix, pattern: &Pattern, a0: ComplexMatrix, iters: usize, keep_history: bool) -> DescentTrace {
    let target = 1e-13 * (1.0 + p.frobenius_norm());
    let mut a = a0;
    project(&mut a, pattern);
    let (mut f, mut r) = objective(&a, p);
    let mut history = Vec::new();
    if keep_history {
        history.push(f.sqrt());
    }
    let mut step = 1.0 / (1.0 + p.frobenius_norm());
    let mut prev: Option<(ComplexMatrix, ComplexMatrix)> = None;
    let mut iterations = 0;
    let mut converged = f.sqrt() <= target;
    while iterations < iters && !converged {
        iterations += 1;
        let mut g = a.matmul(&r).scale_real(4.0);
        project(&mut g, pattern);
        let g2 = g.frobenius_norm().powi(2);
        if g2 == 0.0 {
            break;
        }
        // Barzilai–Borwein trial step, safeguarded by backtracking.
        if let Some((a_prev, g_prev)) = &prev {
            let s = &a - a_prev;
            let y = &g - g_prev;
            let sy = s.real_inner(&y);
            if sy > 0.0 {
                step = s.frobenius_norm().powi(2) / sy;
            } else {
                step *= 2.0;
            }
        }
        let mut accepted = false;
        let mut trial = step;
        for _ in 0..80 {
            let mut cand = a.clone();
            cand.axpy(C64::new(-trial, 0.0), &g);
            let (fc, rc) = objective(&cand, p);
            if fc <= f - ARMIJO * trial * g2 {
                prev = Some((std::mem::replace(&mut a, cand), g));
                f = fc;
                r = rc;
                step = trial;
                accepted = true;
                break;
            }
            trial *= SHRINK;
        }
        if !accepted {
            break;
        }
        if keep_history {
            history.push(f.sqrt());
        }
        converged = f.sqrt() <= target;
    }
    let res = residual(&a, p);
    DescentTrace {
        result: FactorResult { factor: a, residual: res, converged: converged || res <= target, start: 0, iterations },
        history,
    }
}

/// Random start on the pattern, scaled so `‖A₀*A₀‖_F = ‖P‖_F`.
pub fn random_start(p: &ComplexMatrix, pattern: &Pattern, seed: u64, start: usize) -> ComplexMatrix {
    let n = p.rows();
    let mut rng = substream(seed, start as u64);
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| if pattern.contains(i, j) { complex_gaussian(&mut rng) } else { ZERO });
    let g = a.gram().frobenius_norm();
    let target = p.frobenius_norm();
    if g > 0.0 && target > 0.0 {
        a = a.scale_real((target / g).sqrt());
    }
    a
}

/// Best of `starts` projected-gradient runs; deterministic for a given seed.
pub fn factor_attempt(
    p: &ComplexMatrix,
    pattern: &Pattern,
    starts: usize,
    iters: usize,
    seed: u64,
) -> Result<FactorResult, FactorError> {
    if starts == 0 {
        return Err(FactorError::NoStarts);
    }
    if !p.is_square() || p.rows() != pattern.n() {
        return Err(FactorError::DimensionMismatch(format!(
            "matrix is {}x{}, pattern has n = {}",
            p.rows(),
            p.cols(),
            pattern.n()
        )));
    }
    check_psd(p, default_pivot_tol(p).max(1e-10))?;
    let results: Vec<FactorResult> = (0..starts)
        .into_par_iter()
        .map(|s| {
            let a0 = random_start(p, pattern, seed, s);
            let mut r = descend(p, pattern, a0, iters, false).result;
            r.start = s;
            r
        })
        .collect();
    let best = results
        .into_iter()
        .min_by(|a, b| a.residual.total_cmp(&b.residual).then(a.start.cmp(&b.start)))
        .expect("starts >= 1");
    Ok(best)
}

#[derive(Clone, Debug)]
pub struct Refutation {
    /// `I + E_ii + E_ij + E_ji + E_jj`
    pub matrix: ComplexMatrix,
    /// Best residual over the multistart run.
    pub floor: f64,
    pub best: FactorResult,
}

/// The test matrix used against an incomparable pair.
pub fn refutation_matrix(n: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::identity(n);
    for &(a, b) in &[(i, i), (i, j), (j, i), (j, j)] {
        p[(a, b)] += ONE;
    }
    p
}

/// Run the oracle on the test matrix for `witness`; succeeds only when the
/// residual floor exceeds [`REFUTE_THRESHOLD`].
pub fn refute_logmodular(pattern: &Pattern, witness: (usize, usize), seed: u64) -> Result<Refutation, FactorError> {
    let (i, j) = witness;
    let n = pattern.n();
    if i >= n || j >= n || i == j || pattern.contains(i, j) || pattern.contains(j, i) {
        return Err(FactorError::WitnessInvalid { i, j });
    }
    let matrix = refutation_matrix(n, i, j);
    let best = factor_attempt(&matrix, pattern, REFUTE_STARTS, REFUTE_ITERS, seed)?;
    let floor = best.residual;
    if floor <= REFUTE_THRESHOLD {
        return Err(FactorError::RefutationInconclusive { floor, threshold: REFUTE_THRESHOLD });
    }
    Ok(Refutation { matrix, floor, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::decide_logmodular;

    #[test]
    fn identity_any_certificate() {
        let cert = BlockStructure::new(vec![1, 2, 0], vec![2, 1]).unwrap();
        let a = structured_cholesky(&ComplexMatrix::identity(3), &cert).unwrap();
        assert_eq!(a, ComplexMatrix::identity(3));
    }

    #[test]
    fn hand_cholesky_through_certificate() {
        let p = ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let cert = BlockStructure::identity(&[1, 1]).unwrap();
        let a = structured_cholesky(&p, &cert).unwrap();
        let r2 = 2f64.sqrt();
        let expected = ComplexMatrix::from_real(2, 2, &[r2, 1.0 / r2, 0.0, 1.0 / r2]);
        assert!((&a - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn lower_triangular_support() {
        let p = ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let lt = Pattern::lower_triangular(2).unwrap();
        let verdict = decide_logmodular(&lt).unwrap();
        let a = structured_cholesky(&p, verdict.certificate().unwrap()).unwrap();
        assert_eq!(a[(0, 1)], ZERO);
        assert!(a[(1, 0)].norm() > 0.1);
        assert!(residual(&a, &p) < 1e-14);
    }

    #[test]
    fn not_psd_rejected() {
        let p = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let cert = BlockStructure::identity(&[2]).unwrap();
        assert!(matches!(structured_cholesky(&p, &cert), Err(FactorError::NotPsd { .. })));
    }

    #[test]
    fn identity_factors_diagonally() {
        let d = Pattern::diagonal(3).unwrap();
        let r = factor_attempt(&ComplexMatrix::identity(3), &d, 4, 500, 0).unwrap();
        assert!(r.residual <= 1e-10);
        for i in 0..3 {
            assert!((r.factor[(i, i)].norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn all_ones_plus_ridge_factors_upper_triangular() {
        let mut p = ComplexMatrix::from_real(2, 2, &[1.0; 4]);
        p[(0, 0)] += 0.01;
        p[(1, 1)] += 0.01;
        let ut = Pattern::upper_triangular(2).unwrap();
        let r = factor_attempt(&p, &ut, 4, 5000, 1).unwrap();
        assert!(r.residual <= 1e-8, "residual {}", r.residual);
        assert_eq!(r.factor[(1, 0)], ZERO);
    }

    #[test]
    fn diagonal_pattern_floor() {
        let d = Pattern::diagonal(2).unwrap();
        let refutation = refute_logmodular(&d, (0, 1), 0).unwrap();
        assert_eq!(refutation.matrix, ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]));
        // Over diagonal factors the off-diagonal mass √2 can never be matched.
        assert!(refutation.floor >= 2f64.sqrt() - 1e-9);
    }

    #[test]
    fn partial_chain_floor() {
        let p = Pattern::new(3, &[(0, 1)]).unwrap();
        let refutation = refute_logmodular(&p, (1, 2), 0).unwrap();
        assert!(refutation.floor >= 0.1);
    }

    #[test]
    fn comparable_witness_rejected() {
        let ut = Pattern::upper_triangular(2).unwrap();
        assert_eq!(refute_logmodular(&ut, (0, 1), 0).unwrap_err(), FactorError::WitnessInvalid { i: 0, j: 1 });
    }

    #[test]
    fn descent_is_monotone_and_projected() {
        let mut rng = crate::sampling::rng_from_seed(12);
        let p = crate::sampling::random_pd(&mut rng, 4, 0.1);
        let pattern = Pattern::new(4, &[(0, 1), (2, 3)]).unwrap();
        let a0 = random_start(&p, &pattern, 3, 0);
        let trace = descend(&p, &pattern, a0, 400, true);
        assert!(trace.history.windows(2).all(|w| w[1] <= w[0]));
        for i in 0..4 {
            for j in 0..4 {
                if !pattern.contains(i, j) {
                    assert_eq!(trace.result.factor[(i, j)], ZERO);
                }
            }
        }
    }
}
