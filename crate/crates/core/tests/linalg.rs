use logmod::linalg::{
    cholesky_default, col_block_norm, eigenvalues, herm_eig, inner, operator_norm, poly_roots, psd_sqrt,
    row_block_norm, vec_norm, VectorGrid,
};
use logmod::sampling::{random_hermitian, random_matrix, random_pd, random_vector, rng_from_seed};
use logmod::{ComplexMatrix, C64};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Largest singular value by power iteration on `A*A`.
fn power_iteration_norm(a: &ComplexMatrix, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let mut v = random_vector(&mut rng, a.cols());
    let ata = a.gram();
    let mut lambda = 0.0;
    for _ in 0..2000 {
        let w = ata.mul_vec(&v);
        let n = vec_norm(&w);
        if n == 0.0 {
            return 0.0;
        }
        lambda = n / vec_norm(&v);
        v = w.iter().map(|z| z / n).collect();
    }
    lambda.sqrt()
}

#[test]
fn eigenpairs_satisfy_the_defining_equation() {
    let mut rng = rng_from_seed(11);
    for n in 1..=8 {
        let h = random_hermitian(&mut rng, n);
        let eig = herm_eig(&h).unwrap();
        for k in 0..n {
            let v = eig.vector(k);
            let hv = h.mul_vec(&v);
            let lv: Vec<C64> = v.iter().map(|z| z * eig.values[k]).collect();
            let err: f64 = hv.iter().zip(&lv).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "n={n} k={k} err={err}");
            assert!((vec_norm(&v) - 1.0).abs() < 1e-12);
        }
        for k in 1..n {
            assert!(eig.values[k - 1] <= eig.values[k]);
        }
        let tr: f64 = eig.values.iter().sum();
        assert!(close(tr, h.trace().re, 1e-12));
    }
}

#[test]
fn cholesky_of_a_product() {
    let mut rng = rng_from_seed(3);
    let a = random_matrix(&mut rng, 5, 5);
    let p = a.adjoint().matmul(&a);
    let r = cholesky_default(&p).unwrap();
    assert!((&r.gram() - &p).max_abs() < 1e-10);
}

#[test]
fn operator_norm_against_power_iteration() {
    let mut rng = rng_from_seed(5);
    for (rows, cols) in [(1, 1), (3, 2), (2, 5), (6, 6)] {
        let a = random_matrix(&mut rng, rows, cols);
        assert!(close(operator_norm(&a), power_iteration_norm(&a, 1), 1e-8));
    }
}

#[test]
fn psd_square_root_squares_back() {
    let mut rng = rng_from_seed(8);
    let p = random_pd(&mut rng, 4, 0.1);
    let s = psd_sqrt(&p, 1e-12).unwrap();
    assert!((&s.matmul(&s) - &p).max_abs() < 1e-10);
    assert!(s.is_hermitian(1e-12));
}

#[test]
fn general_eigenvalues_of_a_triangular_matrix() {
    let vals = [C64::new(1.0, 2.0), C64::new(-3.0, 0.5), C64::new(0.25, 0.0)];
    let mut t = ComplexMatrix::from_diag(&vals);
    t[(0, 1)] = C64::new(4.0, -1.0);
    t[(1, 2)] = C64::new(2.0, 0.0);
    let mut got = eigenvalues(&t).unwrap();
    for v in vals {
        let (k, d) = got
            .iter()
            .enumerate()
            .map(|(k, g)| (k, (g - v).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!(d < 1e-10, "missing eigenvalue {v}");
        got.remove(k);
    }
}

#[test]
fn roots_of_a_product_of_linear_factors() {
    let roots = [C64::new(2.0, 0.0), C64::new(0.0, -1.5), C64::new(-0.5, 0.5)];
    // (z − r0)(z − r1)(z − r2), ascending coefficients
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![C64::new(0.0, 0.0); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * r;
        }
        coeffs = next;
    }
    let got = poly_roots(&coeffs).unwrap();
    assert_eq!(got.len(), 3);
    for r in roots {
        assert!(got.iter().any(|g| (g - r).norm() < 1e-10), "missing root {r}");
    }
}

#[test]
fn block_norms_of_a_single_cell() {
    let v = vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0)];
    let grid = VectorGrid::from_nested(&[vec![v]]).unwrap();
    assert!(close(row_block_norm(&grid), 5.0, 1e-14));
    assert!(close(col_block_norm(&grid), 5.0, 1e-14));
}

#[test]
fn orthonormal_pair_in_both_orientations() {
    // As a 1 x 2 grid the row norm sums the squares and the column norm does not;
    // as a 2 x 1 grid the roles swap.
    let e1 = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let e2 = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let row = VectorGrid::from_nested(&[vec![e1.clone(), e2.clone()]]).unwrap();
    assert!(close(row_block_norm(&row), 2f64.sqrt(), 1e-14));
    assert!(close(col_block_norm(&row), 1.0, 1e-14));
    let col = VectorGrid::from_nested(&[vec![e1], vec![e2]]).unwrap();
    assert!(close(row_block_norm(&col), 1.0, 1e-14));
    assert!(close(col_block_norm(&col), 2f64.sqrt(), 1e-14));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_reconstruction(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = rng_from_seed(seed);
        let h = random_hermitian(&mut rng, n);
        let eig = herm_eig(&h).unwrap();
        prop_assert!((&eig.reconstruct() - &h).max_abs() < 1e-10 * (1.0 + h.max_abs()));
    }

    #[test]
    fn operator_norm_is_submultiplicative(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let a = random_matrix(&mut rng, n, n);
        let b = random_matrix(&mut rng, n, n);
        prop_assert!(operator_norm(&a.matmul(&b)) <= operator_norm(&a) * operator_norm(&b) * (1.0 + 1e-10));
        prop_assert!(close(operator_norm(&a), operator_norm(&a.adjoint()), 1e-10));
    }

    #[test]
    fn cauchy_schwarz(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = rng_from_seed(seed);
        let x = random_vector(&mut rng, n);
        let y = random_vector(&mut rng, n);
        prop_assert!(inner(&x, &y).norm() <= vec_norm(&x) * vec_norm(&y) * (1.0 + 1e-12));
        prop_assert!((inner(&x, &y) - inner(&y, &x).conj()).norm() < 1e-12 * (1.0 + vec_norm(&x) * vec_norm(&y)));
    }
}
