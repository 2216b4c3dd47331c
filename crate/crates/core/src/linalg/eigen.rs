use super::{ComplexMatrix, LinalgError, C64, ZERO};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_REL: f64 = 1e-13;

/// Spectral decomposition `H = V diag(values) V*` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, ordered like `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V f(D) V*`
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vi * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply(|x| x)
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Fails with `NotHermitian` when `‖H − H*‖_F > 1e-12·(1+‖H‖_F)` and with
/// `NoConvergence` after 100 sweeps.
pub fn herm_eig(h: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    if !h.is_square() {
        return Err(LinalgError::NotSquare { rows: h.rows(), cols: h.cols() });
    }
    let norm = h.frobenius_norm();
    let asymmetry = h.hermitian_defect();
    if asymmetry > 1e-12 * (1.0 + norm) {
        return Err(LinalgError::NotHermitian { asymmetry });
    }
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let threshold = OFF_DIAGONAL_REL * norm;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
///
/// With `a_pq = r e^{iφ}` the plane rotation is
/// `U = [[c, s e^{iφ}], [−s e^{−iφ}, c]]`, applied as `A ← U* A U`, `V ← V U`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip rotations that cannot change the diagonal in floating point.
    if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = apq / r;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let u01 = phase * s;
    let u10 = -phase.conj() * s;
    let n = a.rows();

    // A ← A U (columns p, q)
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * u10;
        a[(k, q)] = akp * u01 + akq * c;
    }
    // A ← U* A (rows p, q)
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * u10.conj();
        a[(q, k)] = apk * u01.conj() + aqk * c;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * u10;
        v[(k, q)] = vkp * u01 + vkq * c;
    }
}

/// Principal square root of a positive semidefinite matrix; negative
/// eigenvalues above `-tol` are clamped to zero.
pub fn psd_sqrt(h: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix, LinalgError> {
    let eig = herm_eig(h)?;
    if eig.min() < -tol {
        return Err(LinalgError::NotPsd { eigenvalue: eig.min() });
    }
    Ok(eig.apply(|x| x.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::sampling::{random_hermitian, rng_from_seed};

    fn unit_check(v: &ComplexMatrix) -> f64 {
        (&v.gram() - &ComplexMatrix::identity(v.cols())).frobenius_norm()
    }

    fn assert_decomposition(h: &ComplexMatrix, eig: &HermitianEigen) {
        let recon = (&eig.reconstruct() - h).frobenius_norm();
        assert!(recon <= 1e-9 * (1.0 + h.frobenius_norm()), "reconstruction residual {recon}");
        assert!(unit_check(&eig.vectors) <= 1e-10);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn identity_two() {
        let eig = herm_eig(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(eig.values, vec![1.0, 1.0]);
        assert_eq!(eig.vectors, ComplexMatrix::identity(2));
    }

    #[test]
    fn swap_matrix_has_plus_minus_one() {
        let h = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let eig = herm_eig(&h).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        assert_decomposition(&h, &eig);
    }

    #[test]
    fn diagonal_sorted_with_permutation_vectors() {
        let h = ComplexMatrix::from_real(3, 3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let eig = herm_eig(&h).unwrap();
        assert_eq!(eig.values, vec![1.0, 2.0, 3.0]);
        // columns are e_2, e_3, e_1
        assert_eq!(eig.vectors[(1, 0)], ONE);
        assert_eq!(eig.vectors[(2, 1)], ONE);
        assert_eq!(eig.vectors[(0, 2)], ONE);
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(herm_eig(&h), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn random_complex_hermitian() {
        let mut rng = rng_from_seed(7);
        for n in [1, 2, 5, 12, 33] {
            let h = random_hermitian(&mut rng, n);
            let eig = herm_eig(&h).unwrap();
            assert_decomposition(&h, &eig);
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = rng_from_seed(3);
        let h = random_hermitian(&mut rng, 8);
        let a = herm_eig(&h).unwrap();
        let b = herm_eig(&h).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = rng_from_seed(11);
        let b = random_hermitian(&mut rng, 6);
        let p = b.gram();
        let r = psd_sqrt(&p, 1e-12).unwrap();
        assert!((&r.matmul(&r) - &p).frobenius_norm() < 1e-10 * (1.0 + p.frobenius_norm()));
    }
}
