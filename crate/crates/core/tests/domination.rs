use logmod::domination::{
    cb_level_table, dominating_state, domination_slack, level_ratio, solve_lmi, two_summing_norm, witness_family,
    DominationError, Generator, LmiProblem, Side, SubspaceMap, DEFAULT_TOL,
};
use logmod::sampling::{random_matrix, random_vector, rng_from_seed};
use logmod::{ComplexMatrix, C64};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn e(n: usize, k: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); n];
    v[k] = C64::new(1.0, 0.0);
    v
}

/// Point masses on `N` points sent to `c_x e_x`.
fn diagonal_map(c: &[f64]) -> SubspaceMap {
    let n = c.len();
    let basis = (0..n).map(|x| e(n, x)).collect();
    let images = (0..n).map(|x| e(n, x).into_iter().map(|z| z * c[x]).collect()).collect();
    SubspaceMap::functions(basis, images).unwrap()
}

fn random_function_map(seed: u64) -> SubspaceMap {
    let mut rng = rng_from_seed(seed);
    let d = 1 + (seed % 4) as usize;
    let points = d + (seed / 4 % 8) as usize;
    let k = 1 + (seed / 32 % 4) as usize;
    let basis = (0..d).map(|_| random_vector(&mut rng, points)).collect();
    let images = (0..d).map(|_| random_vector(&mut rng, k)).collect();
    SubspaceMap::functions(basis, images).unwrap()
}

fn random_matrix_map(seed: u64) -> SubspaceMap {
    let mut rng = rng_from_seed(seed);
    let m = 1 + (seed % 3) as usize;
    let d = 1 + (seed / 3 % (m * m) as u64) as usize;
    let k = 1 + (seed / 27 % 3) as usize;
    let basis = (0..d).map(|_| random_matrix(&mut rng, m, m)).collect();
    let images = (0..d).map(|_| random_vector(&mut rng, k)).collect();
    SubspaceMap::matrices(m, basis, images).unwrap()
}

#[test]
fn diagonal_operator_norm_is_euclidean() {
    let c = [3.0, 1.0, 0.5, 2.0];
    let cert = two_summing_norm(&diagonal_map(&c), TOL).unwrap();
    let expected = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((cert.value - expected).abs() < 1e-7, "{} vs {expected}", cert.value);
    // The measure is proportional to c_x².
    let total: f64 = c.iter().map(|x| x * x).sum();
    for (mu, cx) in cert.weights().unwrap().iter().zip(&c) {
        assert!((mu - cx * cx / total).abs() < 1e-6);
    }
}

#[test]
fn identity_on_n_points() {
    for n in 1..=6 {
        let cert = two_summing_norm(&diagonal_map(&vec![1.0; n]), TOL).unwrap();
        assert!((cert.value - (n as f64).sqrt()).abs() < 1e-7);
    }
}

#[test]
fn one_dimensional_range() {
    // ψ(αb) = αh has a₂ = |h| / max|b|.
    let b = vec![C64::new(0.5, 0.0), C64::new(0.0, -2.0), C64::new(1.0, 1.0)];
    let h = vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0)];
    let psi = SubspaceMap::functions(vec![b], vec![h]).unwrap();
    let cert = two_summing_norm(&psi, TOL).unwrap();
    assert!((cert.value - 5.0 / 2.0).abs() < 1e-7, "{}", cert.value);
    assert!((cert.weights().unwrap()[1] - 1.0).abs() < 1e-6);
}

#[test]
fn matrix_domain_is_rejected_by_the_summing_norm() {
    let psi = random_matrix_map(4);
    assert!(matches!(two_summing_norm(&psi, TOL), Err(DominationError::WrongDomain { .. })));
}

#[test]
fn hilbert_schmidt_identity_needs_the_trace() {
    // ‖X‖₂² ≤ tr(σXX*) for all X forces σ ⪰ I, so the value is √m.
    for m in 1..=3 {
        let basis: Vec<ComplexMatrix> =
            (0..m).flat_map(|i| (0..m).map(move |j| ComplexMatrix::unit(m, i, j))).collect();
        let images = (0..m * m).map(|k| e(m * m, k)).collect();
        let psi = SubspaceMap::matrices(m, basis, images).unwrap();
        for side in [Side::Row, Side::Column] {
            let cert = dominating_state(&psi, side, TOL).unwrap();
            assert!((cert.value - (m as f64).sqrt()).abs() < 1e-7, "m={m} {side:?}: {}", cert.value);
            let rho = cert.density().unwrap();
            assert!((rho - &ComplexMatrix::identity(m).scale_real(1.0 / m as f64)).max_abs() < 1e-6);
        }
    }
}

#[test]
fn lmi_with_a_dense_generator() {
    // ν·I ⪰ diag(1, 4) needs ν = 4.
    let g = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 4.0]);
    let sol = solve_lmi(&LmiProblem::new(g, vec![Generator::Dense(ComplexMatrix::identity(2))]), TOL).unwrap();
    assert!((sol.objective - 4.0).abs() < 1e-8);
    assert!(sol.slack >= -1e-9);
}

#[test]
fn witness_family_attains_the_norm() {
    for seed in 0..12 {
        let psi = random_function_map(seed);
        let cert = two_summing_norm(&psi, TOL).unwrap();
        let fam = witness_family(&psi, Side::Row, &cert.dual).unwrap();
        assert!((fam.ratio - cert.value).abs() <= 1e-6, "seed {seed}: {} vs {}", fam.ratio, cert.value);
        let d = psi.dim();
        let flat: Vec<C64> = fam.coefficients.iter().flatten().copied().collect();
        assert_eq!(flat.len(), d * d);
        assert!((level_ratio(&psi, Side::Row, 1, d, &flat) - fam.ratio).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn duality_gap_closes_and_measure_dominates(seed in any::<u64>()) {
        let psi = random_function_map(seed);
        let cert = two_summing_norm(&psi, TOL).unwrap();
        prop_assert!(cert.gap <= 1e-6 * (1.0 + cert.value * cert.value));
        let total: f64 = cert.weights().unwrap().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let mut rng = rng_from_seed(seed ^ 1);
        for _ in 0..50 {
            let alpha = random_vector(&mut rng, psi.dim());
            let f = psi.function(&alpha).unwrap();
            let sup = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let alpha: Vec<C64> = alpha.iter().map(|a| a / sup).collect();
            prop_assert!(domination_slack(&psi, &cert, &alpha).unwrap() >= -1e-8);
        }
    }

    #[test]
    fn homogeneous_in_the_images(seed in any::<u64>(), s in 0.1f64..10.0) {
        let psi = random_function_map(seed);
        let a = two_summing_norm(&psi, TOL).unwrap().value;
        let b = two_summing_norm(&psi.scaled(s), TOL).unwrap().value;
        prop_assert!((b - s * a).abs() <= 1e-6 * (1.0 + s * a));
    }

    #[test]
    fn sampled_levels_are_bounded_and_monotone(seed in any::<u64>()) {
        let psi = random_function_map(seed);
        let a2 = two_summing_norm(&psi, TOL).unwrap().value;
        for side in [Side::Row, Side::Column] {
            let table = cb_level_table(&psi, side, 2, 3, 5, seed);
            for i in 0..2 {
                for j in 0..3 {
                    prop_assert!(table[i][j] <= a2 + 1e-8);
                    if i > 0 { prop_assert!(table[i][j] >= table[i - 1][j]); }
                    if j > 0 { prop_assert!(table[i][j] >= table[i][j - 1]); }
                }
            }
        }
    }

    #[test]
    fn row_and_column_sides_swap_under_adjoints(seed in any::<u64>()) {
        let psi = random_matrix_map(seed);
        let row = dominating_state(&psi, Side::Row, DEFAULT_TOL).unwrap();
        let col = dominating_state(&psi.adjoint_data(), Side::Column, DEFAULT_TOL).unwrap();
        prop_assert!((row.value - col.value).abs() <= 1e-6 * (1.0 + row.value));
        prop_assert!(row.slack >= -1e-8 && col.slack >= -1e-8);
    }

    #[test]
    fn state_value_scales(seed in any::<u64>(), s in 0.5f64..4.0) {
        let psi = random_matrix_map(seed);
        let a = dominating_state(&psi, Side::Row, DEFAULT_TOL).unwrap().value;
        let b = dominating_state(&psi.scaled(s), Side::Row, DEFAULT_TOL).unwrap().value;
        prop_assert!((b - s * a).abs() <= 1e-6 * (1.0 + s * a));
    }
}
