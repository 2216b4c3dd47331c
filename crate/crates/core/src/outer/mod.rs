//! Factorizations on the unit circle.
//!
//! [`fejer_riesz`] writes a nonnegative trigonometric polynomial as `|q|²`
//! with `q` analytic and zero-free in the open disk; [`outer_function`] does
//! the same for sampled positive functions through the conjugate function.

mod fejer;
mod hardy;

pub use fejer::{fejer_riesz, fejer_riesz_error, FEJER_GRID};
pub use hardy::{
    logmodular_witness, logmodular_witness_fn, outer_function, upsample, OuterFactor, MAX_WITNESS_LOG2, MIN_POSITIVE,
};

use std::f64::consts::TAU;

use thiserror::Error;

use crate::linalg::{poly_eval, LinalgError, C64, ZERO};

pub const MAX_GRID_LOG2: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OuterError {
    #[error("trigonometric polynomial takes the negative value {min:.3e} on the grid")]
    NotNonnegative { min: f64 },
    #[error("leading coefficient is zero")]
    DegenerateLeading,
    #[error("boundary function minimum {min:.3e} is below {floor:e}")]
    NotPositive { min: f64, floor: f64 },
    #[error("boundary value at index {index} is not real")]
    NotReal { index: usize },
    #[error("could not reach error {eps:e} (best {error:.3e} at grid 2^{grid_log2})")]
    PrecisionUnreachable { error: f64, eps: f64, grid_log2: u32 },
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("invalid coefficients: {0}")]
    BadCoefficients(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `p(θ) = Σ_{k=−m}^{m} c_k e^{ikθ}` with `c_{−k} = conj(c_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    /// `c_{−m}, …, c_m`
    coeffs: Vec<C64>,
}

impl TrigPoly {
    /// Validates odd length and Hermitian symmetry (to `1e-12` relative),
    /// then stores the exactly symmetrized coefficients.
    pub fn new(coeffs: Vec<C64>) -> Result<Self, OuterError> {
        if coeffs.len().is_multiple_of(2) {
            return Err(OuterError::BadCoefficients(format!("expected 2m+1 coefficients, got {}", coeffs.len())));
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(OuterError::BadCoefficients("non-finite coefficient".into()));
        }
        let m = coeffs.len() / 2;
        let scale = 1.0 + coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut sym = coeffs.clone();
        for k in 0..=m {
            let plus = coeffs[m + k];
            let minus = coeffs[m - k];
            if (plus - minus.conj()).norm() > 1e-12 * scale {
                return Err(OuterError::BadCoefficients(format!("c_-{k} is not the conjugate of c_{k}")));
            }
            let avg = (plus + minus.conj()) * 0.5;
            sym[m + k] = avg;
            sym[m - k] = avg.conj();
        }
        sym[m] = C64::new(sym[m].re, 0.0);
        Ok(Self { coeffs: sym })
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![C64::new(c, 0.0)] }
    }

    /// `|q(e^{iθ})|²`, i.e. `c_k = Σ_l q_{l+k} conj(q_l)`.
    pub fn modulus_squared(q: &AnalyticPoly) -> Self {
        let a = q.coeffs();
        let m = a.len().saturating_sub(1);
        let mut coeffs = vec![ZERO; 2 * m + 1];
        for k in 0..=m {
            let c: C64 = (0..=(m - k)).map(|l| a[l + k] * a[l].conj()).sum();
            coeffs[m + k] = c;
            coeffs[m - k] = c.conj();
        }
        coeffs[m] = C64::new(coeffs[m].re, 0.0);
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// `c_k` for `|k| ≤ m`, zero beyond.
    pub fn coeff(&self, k: i64) -> C64 {
        let m = self.degree() as i64;
        if k.abs() > m {
            ZERO
        } else {
            self.coeffs[(k + m) as usize]
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let m = self.degree() as i64;
        let mut acc = self.coeff(0).re;
        for k in 1..=m {
            acc += 2.0 * (self.coeff(k) * C64::from_polar(1.0, k as f64 * theta)).re;
        }
        acc
    }

    /// Values on `θ_j = 2πj/n`.
    pub fn grid_values(&self, n: usize) -> Vec<f64> {
        (0..n).map(|j| self.eval(TAU * j as f64 / n as f64)).collect()
    }

    pub fn add_constant(&self, delta: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        let m = self.degree();
        coeffs[m] += delta;
        Self { coeffs }
    }
}

/// `q(z) = Σ_k a_k z^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticPoly {
    coeffs: Vec<C64>,
}

impl AnalyticPoly {
    pub fn new(coeffs: Vec<C64>) -> Result<Self, OuterError> {
        if coeffs.is_empty() {
            return Err(OuterError::BadCoefficients("empty coefficient list".into()));
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(OuterError::BadCoefficients("non-finite coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    /// Monic-times-`scale` polynomial `scale · Π (z − r_j)`.
    pub fn from_roots(scale: C64, roots: &[C64]) -> Self {
        let mut coeffs = vec![scale];
        for &r in roots {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: C64) -> C64 {
        poly_eval(&self.coeffs, z).0
    }

    pub fn eval_circle(&self, theta: f64) -> C64 {
        self.eval(C64::from_polar(1.0, theta))
    }
}

/// Samples on the grid `θ_j = 2πj/N`, `N = 2^grid_log2`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFunction {
    grid_log2: u32,
    values: Vec<C64>,
}

impl BoundaryFunction {
    pub fn new(grid_log2: u32, values: Vec<C64>) -> Result<Self, OuterError> {
        if grid_log2 > MAX_GRID_LOG2 {
            return Err(OuterError::BadGrid(format!("grid_log2 {grid_log2} exceeds {MAX_GRID_LOG2}")));
        }
        if values.len() != 1usize << grid_log2 {
            return Err(OuterError::BadGrid(format!("2^{grid_log2} values expected, got {}", values.len())));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(OuterError::BadGrid("non-finite value".into()));
        }
        Ok(Self { grid_log2, values })
    }

    pub fn from_fn(grid_log2: u32, f: impl Fn(f64) -> f64) -> Result<Self, OuterError> {
        if grid_log2 > MAX_GRID_LOG2 {
            return Err(OuterError::BadGrid(format!("grid_log2 {grid_log2} exceeds {MAX_GRID_LOG2}")));
        }
        let n = 1usize << grid_log2;
        Self::new(grid_log2, (0..n).map(|j| C64::new(f(TAU * j as f64 / n as f64), 0.0)).collect())
    }

    pub fn grid_log2(&self) -> u32 {
        self.grid_log2
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.len() as f64
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Real parts, after checking imaginary parts vanish to `1e-12` relative.
    pub fn real_values(&self) -> Result<Vec<f64>, OuterError> {
        self.values
            .iter()
            .enumerate()
            .map(|(index, z)| {
                if z.im.abs() > 1e-12 * (1.0 + z.re.abs()) {
                    Err(OuterError::NotReal { index })
                } else {
                    Ok(z.re)
                }
            })
            .collect()
    }
}
