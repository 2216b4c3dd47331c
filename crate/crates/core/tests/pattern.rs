use logmod::factor::{refute_logmodular, residual, structured_cholesky, FactorError};
use logmod::pattern::{decide_logmodular, enumerate_patterns, transitive_closure};
use logmod::sampling::{random_pd, rng_from_seed};
use logmod::{BlockStructure, Pattern, PatternError};
use proptest::prelude::*;

/// Brute force: some permutation and block partition gives exactly `p`.
fn is_block_ut_by_search(p: &Pattern) -> bool {
    let n = p.n();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        // Every composition of n, encoded by its cut points.
        for cuts in 0u32..(1 << (n - 1)) {
            let mut sizes = Vec::new();
            let mut len = 1;
            for b in 0..n - 1 {
                if cuts >> b & 1 == 1 {
                    sizes.push(len);
                    len = 1;
                } else {
                    len += 1;
                }
            }
            sizes.push(len);
            let mut block = Vec::new();
            for (b, &s) in sizes.iter().enumerate() {
                block.extend(std::iter::repeat_n(b, s));
            }
            let matches = (0..n).all(|a| (0..n).all(|c| p.contains(perm[a], perm[c]) == (block[a] <= block[c])));
            if matches {
                return true;
            }
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| v[j] > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

#[test]
fn preorder_counts() {
    // Number of preorders on n labeled points.
    let counts: Vec<usize> = (1..=4).map(|n| enumerate_patterns(n).unwrap().len()).collect();
    assert_eq!(counts, vec![1, 4, 29, 355]);
}

#[test]
fn verdicts_agree_with_exhaustive_search() {
    for n in 1..=4 {
        for p in enumerate_patterns(n).unwrap() {
            let verdict = decide_logmodular(&p).unwrap();
            assert_eq!(verdict.is_logmodular(), is_block_ut_by_search(&p), "{p:?}");
            match verdict.certificate() {
                Some(cert) => {
                    assert!(cert.certifies(&p));
                    assert_eq!(cert.original_pattern(), p);
                }
                None => {
                    let (i, j) = verdict.witness().unwrap();
                    assert!(!p.contains(i, j) && !p.contains(j, i));
                }
            }
        }
    }
}

#[test]
fn logmodular_counts_are_ordered_set_partitions() {
    // Total preorders on n points: 1, 3, 13, 75.
    let counts: Vec<usize> = (1..=4)
        .map(|n| enumerate_patterns(n).unwrap().iter().filter(|p| decide_logmodular(p).unwrap().is_logmodular()).count())
        .collect();
    assert_eq!(counts, vec![1, 3, 13, 75]);
}

#[test]
fn non_transitive_input_is_rejected() {
    let p = Pattern::new(3, &[(0, 1), (1, 2)]).unwrap();
    assert!(matches!(decide_logmodular(&p), Err(PatternError::NotTransitive { .. })));
    assert!(decide_logmodular(&transitive_closure(&p)).unwrap().is_logmodular());
}

#[test]
fn enumeration_is_capped() {
    assert_eq!(enumerate_patterns(5).unwrap_err(), PatternError::TooLarge(5));
}

#[test]
fn bad_block_structures() {
    assert!(BlockStructure::new(vec![0, 0, 1], vec![3]).is_err());
    assert!(BlockStructure::new(vec![0, 1, 2], vec![2, 2]).is_err());
    assert!(BlockStructure::new(vec![0, 1], vec![0, 2]).is_err());
}

#[test]
fn structured_factor_of_the_upper_triangular_algebra() {
    let p = Pattern::upper_triangular(4).unwrap();
    let cert = decide_logmodular(&p).unwrap().certificate().unwrap().clone();
    let mut rng = rng_from_seed(1);
    let mat = random_pd(&mut rng, 4, 0.1);
    let a = structured_cholesky(&mat, &cert).unwrap();
    assert!(residual(&a, &mat) < 1e-10);
    for i in 0..4 {
        for j in 0..i {
            assert_eq!(a[(i, j)], logmod::C64::new(0.0, 0.0));
        }
    }
}

#[test]
fn diagonal_pattern_is_refuted() {
    // With only the diagonal the factor A is diagonal, so A*A is diagonal
    // and cannot reach the off-diagonal 1 of the test matrix.
    let p = Pattern::diagonal(2).unwrap();
    let witness = decide_logmodular(&p).unwrap().witness().unwrap();
    let r = refute_logmodular(&p, witness, 0).unwrap();
    assert!(r.floor >= 0.1, "{}", r.floor);
    assert!(matches!(refute_logmodular(&p, (0, 0), 0), Err(FactorError::WitnessInvalid { .. })));
}

fn arbitrary_preorder() -> impl Strategy<Value = Pattern> {
    (1usize..=6, prop::collection::vec(any::<bool>(), 36)).prop_map(|(n, bits)| {
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| bits[i * 6 + j]).collect();
        transitive_closure(&Pattern::new(n, &pairs).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn relabeling_preserves_the_verdict(p in arbitrary_preorder(), seed in any::<u64>()) {
        let n = p.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = rng_from_seed(seed);
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
        let a = decide_logmodular(&p).unwrap().is_logmodular();
        let b = decide_logmodular(&p.permuted(&perm)).unwrap().is_logmodular();
        let c = decide_logmodular(&p.transpose()).unwrap().is_logmodular();
        prop_assert_eq!(a, b);
        prop_assert_eq!(a, c);
    }

    #[test]
    fn certificates_reproduce_the_pattern(p in arbitrary_preorder()) {
        if let Some(cert) = decide_logmodular(&p).unwrap().certificate() {
            prop_assert_eq!(cert.original_pattern(), p);
        }
    }

    #[test]
    fn factors_stay_in_the_pattern(sizes in prop::collection::vec(1usize..=3, 1..=3), seed in any::<u64>()) {
        let p = Pattern::block_upper_triangular(&sizes).unwrap();
        let n = p.n();
        let cert = BlockStructure::identity(&sizes).unwrap();
        let mut rng = rng_from_seed(seed);
        let mat = random_pd(&mut rng, n, 0.1);
        let a = structured_cholesky(&mat, &cert).unwrap();
        prop_assert!(residual(&a, &mat) <= 1e-8 * (1.0 + mat.frobenius_norm()));
        for i in 0..n {
            for j in 0..n {
                if !p.contains(i, j) {
                    prop_assert_eq!(a[(i, j)], logmod::C64::new(0.0, 0.0));
                }
            }
        }
    }
}
