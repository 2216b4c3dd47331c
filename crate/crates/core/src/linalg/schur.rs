//! Eigenvalues of general complex matrices (Hessenberg reduction followed by
//! single-shift QR) and polynomial roots via the companion matrix.

use super::{ComplexMatrix, LinalgError, C64, ONE, ZERO};

const ITERATIONS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues of a square complex matrix, in deflation order.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    hessenberg_qr(&mut h)
}

/// Parlett–Reinsch balancing with powers of two.
fn balance(h: &mut ComplexMatrix) {
    let n = h.rows();
    let radix = 2.0f64;
    let mut done = false;
    let mut passes = 0;
    while !done && passes < 100 {
        done = true;
        passes += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += h[(j, i)].l1_norm();
                    r += h[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    h[(i, j)] /= f;
                }
                for j in 0..n {
                    h[(j, i)] *= f;
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(h: &mut ComplexMatrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let x: Vec<C64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let alpha = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let mut v = x.clone();
        v[0] += phase * alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // H ← (I − 2vv*/v*v) H (I − 2vv*/v*v)
        for j in 0..n {
            let s: C64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * h[(k + 1 + t, j)]).sum();
            let s = s * (2.0 / vnorm2);
            for (t, vt) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= vt * s;
            }
        }
        for i in 0..n {
            let s: C64 = v.iter().enumerate().map(|(t, vt)| h[(i, k + 1 + t)] * vt).sum();
            let s = s * (2.0 / vnorm2);
            for (t, vt) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= s * vt.conj();
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }
}

/// Complex Givens pair `(c, s)` with real `c` mapping `(x, y)` to `(r, 0)`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn hessenberg_qr(h: &mut ComplexMatrix) -> Result<Vec<C64>, LinalgError> {
    let n = h.rows();
    let mut values = vec![ZERO; n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let cap = ITERATIONS_PER_EIGENVALUE * n;
    loop {
        if hi == 0 {
            values[0] = h[(0, 0)];
            break;
        }
        // Locate the active unreduced block [lo, hi].
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let scale = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let scale = if scale == 0.0 { 1.0 } else { scale };
            if sub <= f64::EPSILON * scale {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            values[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        total += 1;
        iter += 1;
        if total > cap {
            return Err(LinalgError::NoConvergence { sweeps: total });
        }
        let mu = if iter % 11 == 10 {
            // exceptional shift
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.5 * h[(hi, hi - 1)].norm())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_step(h, lo, hi, mu);
    }
    Ok(values)
}

fn qr_step(h: &mut ComplexMatrix, lo: usize, hi: usize, mu: C64) {
    for i in lo..=hi {
        h[(i, i)] -= mu;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..=hi {
            let a = h[(k, j)];
            let b = h[(k + 1, j)];
            h[(k, j)] = a * c + s * b;
            h[(k + 1, j)] = -s.conj() * a + b * c;
        }
        rotations.push((c, s));
    }
    for (offset, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + offset;
        let last = (k + 2).min(hi);
        for i in lo..=last {
            let a = h[(i, k)];
            let b = h[(i, k + 1)];
            h[(i, k)] = a * c + b * s.conj();
            h[(i, k + 1)] = -a * s + b * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += mu;
    }
}

/// Horner evaluation of `Σ coeffs[k] z^k` and its derivative.
pub fn poly_eval(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Roots of `Σ coeffs[k] z^k` (ascending coefficients, nonzero leading term),
/// from companion-matrix eigenvalues followed by Newton polishing.
pub fn poly_roots(coeffs: &[C64]) -> Result<Vec<C64>, LinalgError> {
    let mut deg = coeffs.len().saturating_sub(1);
    while deg > 0 && coeffs[deg] == ZERO {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let mut companion = ComplexMatrix::zeros(deg, deg);
    for j in 0..deg {
        companion[(0, j)] = -coeffs[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        companion[(i, i - 1)] = ONE;
    }
    let mut roots = eigenvalues(&companion)?;
    let poly = &coeffs[..=deg];
    for r in roots.iter_mut() {
        *r = newton_polish(poly, *r);
    }
    Ok(roots)
}

fn newton_polish(poly: &[C64], mut z: C64) -> C64 {
    let (mut p, _) = poly_eval(poly, z);
    for _ in 0..8 {
        let (_, dp) = poly_eval(poly, z);
        if dp == ZERO {
            break;
        }
        let step = p / dp;
        let candidate = z - step;
        let (pc, _) = poly_eval(poly, candidate);
        if !(pc.norm() < p.norm()) {
            break;
        }
        z = candidate;
        p = pc;
        if step.norm() <= 4.0 * f64::EPSILON * z.norm() {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_matrix, rng_from_seed};

    fn sort_key(z: &C64) -> (i64, i64) {
        ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64)
    }

    #[test]
    fn triangular_eigenvalues_are_diagonal() {
        let a = ComplexMatrix::from_fn(4, 4, |i, j| if j >= i { C64::new((i + 1) as f64, j as f64) } else { ZERO });
        let mut ev = eigenvalues(&a).unwrap();
        ev.sort_by_key(sort_key);
        for (k, z) in ev.iter().enumerate() {
            assert!((z - C64::new((k + 1) as f64, k as f64)).norm() < 1e-12);
        }
    }

    #[test]
    fn trace_and_determinant_preserved() {
        let mut rng = rng_from_seed(9);
        for n in [2, 5, 16, 32] {
            let a = random_matrix(&mut rng, n, n);
            let ev = eigenvalues(&a).unwrap();
            let tr: C64 = ev.iter().sum();
            assert!((tr - a.trace()).norm() < 1e-9 * n as f64, "trace mismatch n={n}");
        }
    }

    #[test]
    fn roots_of_known_polynomial() {
        // (z − 1)(z + 2)(z − i) = z³ + (1 − i) z² + (−2 − i) z + 2i
        let coeffs = [C64::new(0.0, 2.0), C64::new(-2.0, -1.0), C64::new(1.0, -1.0), ONE];
        let mut roots = poly_roots(&coeffs).unwrap();
        roots.sort_by_key(sort_key);
        let mut expected = vec![ONE, C64::new(-2.0, 0.0), C64::new(0.0, 1.0)];
        expected.sort_by_key(sort_key);
        for (r, e) in roots.iter().zip(&expected) {
            assert!((r - e).norm() < 1e-13, "{r} vs {e}");
        }
    }

    #[test]
    fn roots_of_unity() {
        let mut coeffs = vec![ZERO; 33];
        coeffs[0] = -ONE;
        coeffs[32] = ONE;
        let roots = poly_roots(&coeffs).unwrap();
        assert_eq!(roots.len(), 32);
        for r in roots {
            assert!((r.norm() - 1.0).abs() < 1e-13);
            let (p, _) = poly_eval(&coeffs, r);
            assert!(p.norm() < 1e-12);
        }
    }
}
