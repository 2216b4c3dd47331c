use super::{herm_eig, ComplexMatrix, LinalgError, C64, ZERO};

/// Default pivot threshold: `1e-10 · max diagonal entry`.
pub fn default_pivot_tol(p: &ComplexMatrix) -> f64 {
    let max_diag = p.diag().iter().map(|z| z.re).fold(0.0, f64::max);
    1e-10 * max_diag.max(f64::MIN_POSITIVE)
}

/// Upper triangular `U` with `U* U = P`.
///
/// Positive semidefinite input is accepted: a pivot below `tol` zeroes the
/// whole row of `U`. This is what lets the all-ones matrix `J` factor as a
/// single nonzero row.
pub fn cholesky(p: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix, LinalgError> {
    let eig = herm_eig(p)?;
    if eig.min() < -tol {
        return Err(LinalgError::NotPsd { eigenvalue: eig.min() });
    }
    let n = p.rows();
    let mut u = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let mut d = p[(k, k)].re;
        for j in 0..k {
            d -= u[(j, k)].norm_sqr();
        }
        if d < -tol {
            return Err(LinalgError::NotPsd { eigenvalue: d });
        }
        if d <= tol {
            continue;
        }
        let pivot = d.sqrt();
        u[(k, k)] = C64::new(pivot, 0.0);
        for l in (k + 1)..n {
            let mut s = p[(k, l)];
            for j in 0..k {
                s -= u[(j, k)].conj() * u[(j, l)];
            }
            u[(k, l)] = if s == ZERO { ZERO } else { s / pivot };
        }
    }
    Ok(u)
}

pub fn cholesky_default(p: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    cholesky(p, default_pivot_tol(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_pd, rng_from_seed};

    fn residual(u: &ComplexMatrix, p: &ComplexMatrix) -> f64 {
        (&u.gram() - p).frobenius_norm()
    }

    #[test]
    fn identity_is_its_own_factor() {
        let i3 = ComplexMatrix::identity(3);
        assert_eq!(cholesky_default(&i3).unwrap(), i3);
    }

    #[test]
    fn two_by_two_hand_factor() {
        let p = ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let u = cholesky_default(&p).unwrap();
        let r2 = 2f64.sqrt();
        let expected = ComplexMatrix::from_real(2, 2, &[r2, 1.0 / r2, 0.0, 1.0 / r2]);
        assert!((&u - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn all_ones_is_rank_one_row() {
        let j2 = ComplexMatrix::from_real(2, 2, &[1.0; 4]);
        let u = cholesky_default(&j2).unwrap();
        assert_eq!(u, ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn indefinite_is_rejected() {
        let p = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(cholesky_default(&p), Err(LinalgError::NotPsd { .. })));
    }

    #[test]
    fn complex_semidefinite_rank_deficient() {
        let mut rng = rng_from_seed(5);
        let b = crate::sampling::random_matrix(&mut rng, 2, 5);
        let p = b.gram();
        let u = cholesky_default(&p).unwrap();
        assert!(residual(&u, &p) <= 1e-8 * (1.0 + p.frobenius_norm()));
        for i in 0..5 {
            for j in 0..i {
                assert_eq!(u[(i, j)], ZERO);
            }
        }
    }

    #[test]
    fn random_pd_residual() {
        let mut rng = rng_from_seed(1);
        for n in 1..12 {
            let p = random_pd(&mut rng, n, 1e-3);
            let u = cholesky_default(&p).unwrap();
            assert!(residual(&u, &p) <= 1e-8 * (1.0 + p.frobenius_norm()));
        }
    }
}
