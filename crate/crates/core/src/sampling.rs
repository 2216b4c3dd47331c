//! Seeded random generation of test data.
//!
//! All randomized routines in the crate take a `u64` seed and derive a
//! ChaCha8 stream from it, so results are reproducible across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{vec_norm, ComplexMatrix, C64, ZERO};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for sub-task `index` of a seeded computation.
pub fn substream(seed: u64, index: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Standard complex Gaussian (`E|z|² = 1`).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    loop {
        let v = random_vector(rng, n);
        let norm = vec_norm(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    random_matrix(rng, n, n).hermitian_part()
}

/// `B*B + eps·I` with `B` complex Gaussian.
pub fn random_pd<R: Rng + ?Sized>(rng: &mut R, n: usize, eps: f64) -> ComplexMatrix {
    let b = random_matrix(rng, n, n);
    let mut p = b.gram();
    for i in 0..n {
        p[(i, i)] += eps;
    }
    p.hermitian_part()
}

/// `n × k` matrix with orthonormal columns (`k ≤ n`), by modified Gram–Schmidt.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> ComplexMatrix {
    assert!(k <= n, "isometry needs k <= n");
    loop {
        let mut q = random_matrix(rng, n, k);
        let mut ok = true;
        for j in 0..k {
            let mut v = q.column(j);
            for prev in 0..j {
                let u = q.column(prev);
                let c: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(&u) {
                    *vi -= c * ui;
                }
            }
            let norm = vec_norm(&v);
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for z in v.iter_mut() {
                *z /= norm;
            }
            q.set_column(j, &v);
        }
        if ok {
            return q;
        }
    }
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    random_isometry(rng, n, n)
}

/// Random point of the probability simplex with `n` entries.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn zero_vector(n: usize) -> Vec<C64> {
    vec![ZERO; n]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isometry_columns_are_orthonormal() {
        let mut rng = rng_from_seed(2);
        let v = random_isometry(&mut rng, 7, 4);
        let defect = (&v.gram() - &ComplexMatrix::identity(4)).frobenius_norm();
        assert!(defect < 1e-12);
    }

    #[test]
    fn same_seed_same_stream() {
        let a = random_vector(&mut rng_from_seed(44), 5);
        let b = random_vector(&mut rng_from_seed(44), 5);
        assert_eq!(a, b);
        let c = random_vector(&mut substream(44, 0), 5);
        let d = random_vector(&mut substream(44, 1), 5);
        assert_ne!(c, d);
    }

    #[test]
    fn simplex_sums_to_one() {
        let mut rng = rng_from_seed(8);
        let w = random_simplex(&mut rng, 9);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(w.iter().all(|&x| x >= 0.0));
    }
}
