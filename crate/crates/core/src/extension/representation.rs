use rand::Rng;

use super::ExtensionError;
use crate::domination::Side;
use crate::linalg::{herm_eig, ComplexMatrix, ZERO};
use crate::pattern::Pattern;
use crate::sampling::{complex_gaussian, substream};

const STRUCTURE_TOL: f64 = 1e-10;

/// Unital homomorphism of the pattern algebra into `M_d`, given on the
/// matrix units it contains.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternRepresentation {
    pattern: Pattern,
    dim: usize,
    /// One image per pair, in the order of `pattern.pairs()`.
    images: Vec<ComplexMatrix>,
}

impl PatternRepresentation {
    /// Images for the pairs not listed default to zero.
    pub fn new(pattern: Pattern, dim: usize, images: Vec<((usize, usize), ComplexMatrix)>) -> Result<Self, ExtensionError> {
        let rep = Self::unchecked(pattern, dim, images)?;
        rep.check()?;
        Ok(rep)
    }

    /// As [`new`](Self::new) without the unital and multiplicative checks.
    pub fn unchecked(
        pattern: Pattern,
        dim: usize,
        images: Vec<((usize, usize), ComplexMatrix)>,
    ) -> Result<Self, ExtensionError> {
        if dim == 0 {
            return Err(ExtensionError::BadShape("dimension must be positive".into()));
        }
        let pairs = pattern.pairs();
        let mut slots = vec![ComplexMatrix::zeros(dim, dim); pairs.len()];
        for ((i, j), m) in images {
            let pos = pairs
                .iter()
                .position(|&p| p == (i, j))
                .ok_or_else(|| ExtensionError::BadShape(format!("pair ({i}, {j}) is not in the pattern")))?;
            if m.rows() != dim || m.cols() != dim {
                return Err(ExtensionError::BadShape(format!("image of ({i}, {j}) must be {dim}x{dim}")));
            }
            if !m.is_finite() {
                return Err(ExtensionError::BadShape(format!("image of ({i}, {j}) has a non-finite entry")));
            }
            slots[pos] = m;
        }
        Ok(Self { pattern, dim, images: slots })
    }

    /// The inclusion `A ⊂ M_n`.
    pub fn identity(pattern: Pattern) -> Self {
        let n = pattern.n();
        let images = pattern.pairs().into_iter().map(|(i, j)| ComplexMatrix::unit(n, i, j)).collect();
        Self { pattern, dim: n, images }
    }

    /// The character `a ↦ a_kk`; multiplicative only when no `j ≠ k` has
    /// both `(k, j)` and `(j, k)` in the pattern.
    pub fn corner(pattern: Pattern, k: usize) -> Result<Self, ExtensionError> {
        if k >= pattern.n() {
            return Err(ExtensionError::BadShape(format!("index {k} out of range")));
        }
        let images = vec![((k, k), ComplexMatrix::identity(1))];
        Self::new(pattern, 1, images)
    }

    /// `ρ ⊕ τ` on `C^{d₁} ⊕ C^{d₂}`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self, ExtensionError> {
        if self.pattern != other.pattern {
            return Err(ExtensionError::BadShape("direct sum needs a common pattern".into()));
        }
        let images = self.images.iter().zip(&other.images).map(|(a, b)| a.direct_sum(b)).collect();
        Ok(Self { pattern: self.pattern.clone(), dim: self.dim + other.dim, images })
    }

    /// Copy with the image of `E_ij` multiplied by `factor`, skipping all
    /// checks. Used to build representations that fail to be contractive.
    pub fn scaled_unit(&self, i: usize, j: usize, factor: f64) -> Result<Self, ExtensionError> {
        let pos = self.position(i, j).ok_or_else(|| ExtensionError::BadShape(format!("pair ({i}, {j}) is not in the pattern")))?;
        let mut out = self.clone();
        out.images[pos] = out.images[pos].scale_real(factor);
        Ok(out)
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        self.pattern.pairs().iter().position(|&p| p == (i, j))
    }

    /// `ρ(E_ij)`, or `None` when `(i, j)` is outside the pattern.
    pub fn image(&self, i: usize, j: usize) -> Option<&ComplexMatrix> {
        self.position(i, j).map(|p| &self.images[p])
    }

    /// `(pair, ρ(E_pair))` in pattern order.
    pub fn units(&self) -> impl Iterator<Item = ((usize, usize), &ComplexMatrix)> {
        self.pattern.pairs().into_iter().zip(self.images.iter())
    }

    /// `ρ(a) = Σ a_ij ρ(E_ij)` over the pattern; entries of `a` outside the
    /// pattern are ignored.
    pub fn apply(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for ((i, j), img) in self.units() {
            if a[(i, j)] != ZERO {
                out.axpy(a[(i, j)], img);
            }
        }
        out
    }

    /// Unital and multiplicative to `1e-10`.
    pub fn check(&self) -> Result<(), ExtensionError> {
        let n = self.pattern.n();
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for i in 0..n {
            sum = &sum + self.image(i, i).expect("patterns are reflexive");
        }
        let defect = (&sum - &ComplexMatrix::identity(self.dim)).max_abs();
        if defect > STRUCTURE_TOL {
            return Err(ExtensionError::NotUnital { defect });
        }
        let units: Vec<_> = self.units().collect();
        for &((i, j), a) in &units {
            for &((k, l), b) in &units {
                let prod = a.matmul(b);
                let defect = if j == k {
                    let target = self.image(i, l).expect("patterns are transitive");
                    (&prod - target).max_abs()
                } else {
                    prod.max_abs()
                };
                if defect > STRUCTURE_TOL {
                    return Err(ExtensionError::NotMultiplicative { i, j, k, l, defect });
                }
            }
        }
        Ok(())
    }
}

/// Gaussian entries on the pattern, zero elsewhere.
pub fn random_pattern_element<R: Rng + ?Sized>(rng: &mut R, pattern: &Pattern) -> ComplexMatrix {
    let n = pattern.n();
    let mut a = ComplexMatrix::zeros(n, n);
    for (i, j) in pattern.pairs() {
        a[(i, j)] = complex_gaussian(rng);
    }
    a
}

/// Norm of the `1 × n` row `(x_1, …, x_n)` or the `n × 1` column.
fn tuple_norm(xs: &[ComplexMatrix], side: Side) -> f64 {
    let size = xs[0].rows();
    let mut g = ComplexMatrix::zeros(size, size);
    for x in xs {
        let t = match side {
            Side::Row => x.matmul(&x.adjoint()),
            Side::Column => x.adjoint().matmul(x),
        };
        g = &g + &t;
    }
    herm_eig(&g.hermitian_part()).expect("Gram matrix eigendecomposition").max().max(0.0).sqrt()
}

/// `min (1 − ‖(ρ(a_1), …, ρ(a_n))‖)` over sampled tuples with
/// `‖(a_1, …, a_n)‖ = 1`, as a row (`Side::Row`) or a column. A negative
/// value is a witness that `ρ` is not `R_n` (resp. `C_n`) contractive.
pub fn rn_margin(rep: &PatternRepresentation, side: Side, n: usize, samples: usize, seed: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let tag = match side {
        Side::Row => 0,
        Side::Column => 1,
    };
    let mut rng = substream(seed, ((n as u64) << 1) | tag);
    let mut margin: f64 = 1.0;
    for _ in 0..samples {
        let tuple: Vec<ComplexMatrix> = (0..n).map(|_| random_pattern_element(&mut rng, rep.pattern())).collect();
        let norm = tuple_norm(&tuple, side);
        if norm <= 0.0 {
            continue;
        }
        let images: Vec<ComplexMatrix> = tuple.iter().map(|a| rep.apply(a)).collect();
        margin = margin.min(1.0 - tuple_norm(&images, side) / norm);
    }
    margin
}
