use rayon::prelude::*;

use super::ExtensionError;
use crate::linalg::{herm_eig, inner, vec_norm, ComplexMatrix, C64, I, ONE, ZERO};
use crate::sampling::{random_unit_vector, random_vector, substream};

const FORM_CHECKS: usize = 100;
const FAMILY_CHECKS: usize = 20;
const FORM_TOL: f64 = 1e-9;
const FAMILY_TOL: f64 = 1e-8;
const CHECK_SEED: u64 = 0x5eed;

/// Vectors at which a quadratic form is evaluated: `e_p` for every `p`,
/// then `e_p + e_q`, `e_p − e_q`, `e_p + i e_q`, `e_p − i e_q` for `p < q`.
pub fn polarization_grid(d: usize) -> Vec<Vec<C64>> {
    let unit = |p: usize| {
        let mut v = vec![ZERO; d];
        v[p] = ONE;
        v
    };
    let mut out: Vec<Vec<C64>> = (0..d).map(unit).collect();
    for p in 0..d {
        for q in (p + 1)..d {
            for c in [ONE, -ONE, I, -I] {
                let mut v = unit(p);
                v[q] = c;
                out.push(v);
            }
        }
    }
    out
}

/// Position of `e_p + c e_q` (`p < q`, `c ∈ {1, −1, i, −i}` by `k`) in the grid.
fn pair_slot(d: usize, p: usize, q: usize, k: usize) -> usize {
    let before: usize = (0..p).map(|r| d - r - 1).sum();
    d + 4 * (before + (q - p - 1)) + k
}

/// `T` with `⟨T e_q, e_p⟩ = ¼ Σ_k i^k φ(e_q + i^k e_p)`, given `φ` on the grid.
fn polarize(d: usize, value: impl Fn(usize) -> C64) -> ComplexMatrix {
    let mut t = ComplexMatrix::zeros(d, d);
    for p in 0..d {
        t[(p, p)] = value(p);
        for q in (p + 1)..d {
            let plus = value(pair_slot(d, p, q, 0));
            let minus = value(pair_slot(d, p, q, 1));
            let plus_i = value(pair_slot(d, p, q, 2));
            let minus_i = value(pair_slot(d, p, q, 3));
            // e_q + i e_p = i(e_p − i e_q) and e_q − i e_p = −i(e_p + i e_q).
            t[(p, q)] = (plus - minus + I * minus_i - I * plus_i) * 0.25;
            t[(q, p)] = (plus - minus + I * plus_i - I * minus_i) * 0.25;
        }
    }
    t
}

/// `⟨Th, h⟩`
fn form(t: &ComplexMatrix, h: &[C64]) -> C64 {
    inner(&t.mul_vec(h), h)
}

/// The unique `T` with `φ(h) = ⟨Th, h⟩`, checked on random vectors.
pub fn polarization_reconstruct(d: usize, phi: impl Fn(&[C64]) -> C64) -> Result<ComplexMatrix, ExtensionError> {
    if d == 0 {
        return Err(ExtensionError::BadShape("dimension must be positive".into()));
    }
    let values: Vec<C64> = polarization_grid(d).iter().map(|h| phi(h)).collect();
    let t = polarize(d, |g| values[g]);
    let scale = 1.0 + t.frobenius_norm();
    let mut rng = substream(CHECK_SEED, d as u64);
    let mut residual: f64 = 0.0;
    for _ in 0..FORM_CHECKS {
        let h = random_vector(&mut rng, d);
        let n2 = vec_norm(&h).powi(2);
        residual = residual.max((phi(&h) - form(&t, &h)).norm() / (n2 * scale));
    }
    if residual > FORM_TOL {
        return Err(ExtensionError::NotQuadratic { residual });
    }
    Ok(t)
}

/// Linear map `Φ: M_m → M_d` stored through its block matrix
/// `Σ E_ij ⊗ Φ(E_ij)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PositiveMapOnMatrices {
    m: usize,
    d: usize,
    choi: ComplexMatrix,
}

impl PositiveMapOnMatrices {
    pub fn new(m: usize, d: usize, choi: ComplexMatrix) -> Result<Self, ExtensionError> {
        if m == 0 || d == 0 || choi.rows() != m * d || choi.cols() != m * d {
            return Err(ExtensionError::BadShape(format!("block matrix must be {0}x{0}", m * d)));
        }
        Ok(Self { m, d, choi })
    }

    /// The identity map on `M_m`.
    pub fn identity(m: usize) -> Self {
        let mut choi = ComplexMatrix::zeros(m * m, m * m);
        for i in 0..m {
            for j in 0..m {
                choi[(i * m + i, j * m + j)] = ONE;
            }
        }
        Self { m, d: m, choi }
    }

    /// `b ↦ V* b V`
    pub fn compression(v: &ComplexMatrix) -> Self {
        let (m, d) = (v.rows(), v.cols());
        let mut choi = ComplexMatrix::zeros(m * d, m * d);
        for i in 0..m {
            for j in 0..m {
                let block = v.adjoint().matmul(&ComplexMatrix::unit(m, i, j)).matmul(v);
                choi.set_block(i * d, j * d, &block);
            }
        }
        Self { m, d, choi }
    }

    pub fn input_dim(&self) -> usize {
        self.m
    }

    pub fn output_dim(&self) -> usize {
        self.d
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    /// `Φ(E_ij)`
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        self.choi.submatrix(i * self.d, j * self.d, self.d, self.d)
    }

    /// `Φ(b) = Σ b_ij Φ(E_ij)`
    pub fn apply(&self, b: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((b.rows(), b.cols()), (self.m, self.m), "input has the wrong size");
        let mut out = ComplexMatrix::zeros(self.d, self.d);
        for i in 0..self.m {
            for j in 0..self.m {
                if b[(i, j)] != ZERO {
                    out.axpy(b[(i, j)], &self.block(i, j));
                }
            }
        }
        out
    }

    /// `max |Φ(I) − I|`
    pub fn unital_defect(&self) -> f64 {
        (&self.apply(&ComplexMatrix::identity(self.m)) - &ComplexMatrix::identity(self.d)).max_abs()
    }

    /// `min λ_min(Φ(ξξ*))` over random unit `ξ`; nonnegative for a positive map.
    pub fn block_positivity(&self, samples: usize, seed: u64) -> Result<f64, ExtensionError> {
        let mut rng = substream(seed, 0);
        let mut min = f64::INFINITY;
        for _ in 0..samples {
            let xi = random_unit_vector(&mut rng, self.m);
            let img = self.apply(&ComplexMatrix::outer(&xi, &xi));
            min = min.min(herm_eig(&img.hermitian_part())?.min());
        }
        Ok(min)
    }

    /// `max |Φ − Ψ|` over block-matrix entries.
    pub fn distance(&self, other: &Self) -> f64 {
        if (self.m, self.d) != (other.m, other.d) {
            return f64::INFINITY;
        }
        (&self.choi - &other.choi).max_abs()
    }

    /// `Φ ⊕ Ψ: b ↦ Φ(b) ⊕ Ψ(b)`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self, ExtensionError> {
        if self.m != other.m {
            return Err(ExtensionError::BadShape("direct sum needs a common input size".into()));
        }
        let d = self.d + other.d;
        let mut choi = ComplexMatrix::zeros(self.m * d, self.m * d);
        for i in 0..self.m {
            for j in 0..self.m {
                choi.set_block(i * d, j * d, &self.block(i, j).direct_sum(&other.block(i, j)));
            }
        }
        Ok(Self { m: self.m, d, choi })
    }
}

/// `Φ` from densities `σ_h` on the polarization grid of `C^d`, with
/// `⟨Φ(E_ij)h, h⟩ = (σ_h)_ji`.
pub(crate) fn assemble_from_grid(m: usize, d: usize, sigmas: &[ComplexMatrix]) -> PositiveMapOnMatrices {
    let mut choi = ComplexMatrix::zeros(m * d, m * d);
    for i in 0..m {
        for j in 0..m {
            let block = polarize(d, |g| sigmas[g][(j, i)]);
            choi.set_block(i * d, j * d, &block);
        }
    }
    PositiveMapOnMatrices { m, d, choi }
}

/// `Φ: M_m → M_d` with `⟨Φ(b)h, h⟩ = tr(γ(h) b)`, where `γ(h)` is the
/// density of a functional on `M_m`. The family is evaluated on the
/// polarization grid in parallel and then checked on random vectors.
pub fn assemble_positive_map<F>(m: usize, d: usize, family: F) -> Result<PositiveMapOnMatrices, ExtensionError>
where
    F: Fn(&[C64]) -> Result<ComplexMatrix, ExtensionError> + Sync,
{
    if m == 0 || d == 0 {
        return Err(ExtensionError::BadShape("dimensions must be positive".into()));
    }
    let sigmas: Vec<ComplexMatrix> = polarization_grid(d).par_iter().map(|h| family(h)).collect::<Result<_, _>>()?;
    if sigmas.iter().any(|s| s.rows() != m || s.cols() != m) {
        return Err(ExtensionError::BadShape(format!("family values must be {m}x{m}")));
    }
    let map = assemble_from_grid(m, d, &sigmas);
    let mut rng = substream(CHECK_SEED, (m * 1000 + d) as u64);
    let mut residual: f64 = 0.0;
    for _ in 0..FAMILY_CHECKS {
        let h = random_unit_vector(&mut rng, d);
        let sigma = family(&h)?;
        let rebuilt = ComplexMatrix::from_fn(m, m, |j, i| form(&map.block(i, j), &h));
        residual = residual.max((&sigma - &rebuilt).max_abs() / (1.0 + sigma.max_abs()));
    }
    if residual > FAMILY_TOL {
        return Err(ExtensionError::NotQuadraticFamily { residual });
    }
    Ok(map)
}
