//! 2-summing norms, Pietsch measures and dominating states.
//!
//! Everything reduces to the canonical LMI
//! `minimize Σ cost_i ν_i  subject to  Σ ν_i V_i ⪰ G, ν ≥ 0`
//! (see [`lmi`]), or, for states, to a small SDP over density matrices
//! (see [`state`]). Both are solved by the interior-point core in [`ipm`].

pub mod ipm;
pub mod lmi;
pub mod state;
pub mod summing;

pub use lmi::{solve_lmi, Generator, LmiProblem, LmiSolution};
pub use state::{dominating_state, state_gram};
pub use summing::{
    cb_level_norm, cb_level_table, domination_slack, level_ratio, two_summing_norm, witness_family, WitnessFamily,
};

use thiserror::Error;

use crate::linalg::{herm_eig, inner, ComplexMatrix, LinalgError, C64, ZERO};
use ipm::IpmError;

pub const MAX_LMI_DIM: usize = 64;
pub const MAX_GENERATORS: usize = 4096;
/// Relative stopping tolerance of the interior-point solver. Degenerate
/// state problems stall near 1e-8 in double precision; 1e-7 still leaves
/// the certified gap well inside 1e-6·(1 + value²).
pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DominationError {
    /// `certificate` is a unit vector `v` with `v*V_i v = 0` for all `i`
    /// and `v*Gv > 0`, when such a vector exists.
    #[error("no feasible weights: the target is not dominated by the generators")]
    Infeasible { certificate: Option<Vec<C64>> },
    #[error("solver did not converge after {iterations} iterations (gap {rel_gap:.2e})")]
    NoConvergence { iterations: usize, rel_gap: f64 },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("operation needs a {expected} domain")]
    WrongDomain { expected: &'static str },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl From<IpmError> for DominationError {
    fn from(e: IpmError) -> Self {
        match e {
            IpmError::NoConvergence { iterations, rel_gap, .. } => DominationError::NoConvergence { iterations, rel_gap },
            IpmError::Infeasible { .. } => DominationError::Infeasible { certificate: None },
            IpmError::Malformed(s) => DominationError::InvalidProblem(s),
            IpmError::Linalg(l) => DominationError::Linalg(l),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `H_r`: domination by `s(xx*)`.
    Row,
    /// `H_c`: domination by `s(x*x)`.
    Column,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    /// Functions on `points` points; each basis element is a value vector.
    Functions { points: usize, basis: Vec<Vec<C64>> },
    /// Subspace of `M_m`.
    Matrices { m: usize, basis: Vec<ComplexMatrix> },
}

/// A linear map `ψ` given on a basis of its domain.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceMap {
    domain: Domain,
    images: Vec<Vec<C64>>,
    hilbert_dim: usize,
}

const INDEPENDENCE_TOL: f64 = 1e-10;

impl SubspaceMap {
    pub fn functions(basis: Vec<Vec<C64>>, images: Vec<Vec<C64>>) -> Result<Self, DominationError> {
        let points = basis.first().map_or(0, Vec::len);
        if points == 0 || basis.iter().any(|b| b.len() != points) {
            return Err(DominationError::InvalidMap("basis functions must share a nonzero number of points".into()));
        }
        let gram = ComplexMatrix::from_fn(basis.len(), basis.len(), |i, j| inner(&basis[j], &basis[i]));
        Self::finish(Domain::Functions { points, basis }, images, gram)
    }

    pub fn matrices(m: usize, basis: Vec<ComplexMatrix>, images: Vec<Vec<C64>>) -> Result<Self, DominationError> {
        if m == 0 || basis.iter().any(|b| b.rows() != m || b.cols() != m) {
            return Err(DominationError::InvalidMap(format!("basis elements must be {m}x{m}")));
        }
        let gram = ComplexMatrix::from_fn(basis.len(), basis.len(), |i, j| inner(basis[j].data(), basis[i].data()));
        Self::finish(Domain::Matrices { m, basis }, images, gram)
    }

    fn finish(domain: Domain, images: Vec<Vec<C64>>, gram: ComplexMatrix) -> Result<Self, DominationError> {
        let d = gram.rows();
        if d == 0 {
            return Err(DominationError::InvalidMap("empty basis".into()));
        }
        if images.len() != d {
            return Err(DominationError::InvalidMap(format!("{d} basis elements but {} images", images.len())));
        }
        let hilbert_dim = images[0].len();
        if images.iter().any(|h| h.len() != hilbert_dim) {
            return Err(DominationError::InvalidMap("images must share one dimension".into()));
        }
        let all = images.iter().flatten().chain(match &domain {
            Domain::Functions { basis, .. } => Box::new(basis.iter().flatten()) as Box<dyn Iterator<Item = &C64>>,
            Domain::Matrices { basis, .. } => Box::new(basis.iter().flat_map(|b| b.data().iter())),
        });
        if all.into_iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(DominationError::InvalidMap("non-finite entry".into()));
        }
        let min = herm_eig(&gram.hermitian_part())?.min();
        if min < INDEPENDENCE_TOL {
            return Err(DominationError::InvalidMap(format!(
                "basis is not linearly independent (Gram eigenvalue {min:.3e})"
            )));
        }
        Ok(Self { domain, images, hilbert_dim })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Number of basis elements `d`.
    pub fn dim(&self) -> usize {
        self.images.len()
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn images(&self) -> &[Vec<C64>] {
        &self.images
    }

    /// `G_ψ[i][j] = ⟨h_j, h_i⟩`, so that `α* G α = ‖ψ(Σ α_i b_i)‖²`.
    pub fn image_gram(&self) -> ComplexMatrix {
        let d = self.dim();
        ComplexMatrix::from_fn(d, d, |i, j| inner(&self.images[j], &self.images[i]))
    }

    /// `ψ(Σ α_i b_i)`
    pub fn apply(&self, alpha: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.hilbert_dim];
        for (a, h) in alpha.iter().zip(&self.images) {
            for (o, v) in out.iter_mut().zip(h) {
                *o += a * v;
            }
        }
        out
    }

    /// Values of `Σ α_i b_i` for a function domain.
    pub fn function(&self, alpha: &[C64]) -> Result<Vec<C64>, DominationError> {
        match &self.domain {
            Domain::Functions { points, basis } => {
                let mut out = vec![ZERO; *points];
                for (a, b) in alpha.iter().zip(basis) {
                    for (o, v) in out.iter_mut().zip(b) {
                        *o += a * v;
                    }
                }
                Ok(out)
            }
            Domain::Matrices { .. } => Err(DominationError::WrongDomain { expected: "function" }),
        }
    }

    /// `Σ α_i x_i` for a matrix domain.
    pub fn matrix(&self, alpha: &[C64]) -> Result<ComplexMatrix, DominationError> {
        match &self.domain {
            Domain::Matrices { m, basis } => {
                let mut out = ComplexMatrix::zeros(*m, *m);
                for (a, b) in alpha.iter().zip(basis) {
                    out.axpy(*a, b);
                }
                Ok(out)
            }
            Domain::Functions { .. } => Err(DominationError::WrongDomain { expected: "matrix" }),
        }
    }

    /// Map with the same images scaled by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for h in out.images.iter_mut() {
            for z in h.iter_mut() {
                *z *= s;
            }
        }
        out
    }

    /// The conjugate-transposed data `x_i ↦ x_i*`, `h_i ↦ conj(h_i)`: row-side
    /// quantities of `self` equal column-side quantities of the result.
    pub fn adjoint_data(&self) -> Self {
        let images = self.images.iter().map(|h| h.iter().map(|z| z.conj()).collect()).collect();
        let domain = match &self.domain {
            Domain::Functions { points, basis } => Domain::Functions {
                points: *points,
                basis: basis.iter().map(|b| b.iter().map(|z| z.conj()).collect()).collect(),
            },
            Domain::Matrices { m, basis } => Domain::Matrices { m: *m, basis: basis.iter().map(|b| b.adjoint()).collect() },
        };
        Self { domain, images, hilbert_dim: self.hilbert_dim }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    /// Probability weights on the points.
    Weights(Vec<f64>),
    /// Density matrix of a state on `M_m`.
    Density(ComplexMatrix),
}

#[derive(Clone, Debug)]
pub struct DominationCertificate {
    /// `a₂(ψ)` or the optimal state constant.
    pub value: f64,
    pub measure: Measure,
    /// Dual matrix `Z ⪰ 0` with `⟨V, Z⟩ ≤ 1` for every generator.
    pub dual: ComplexMatrix,
    /// `value²`
    pub primal_objective: f64,
    /// `⟨G_ψ, Z⟩`
    pub dual_objective: f64,
    pub gap: f64,
    /// `λ_min(value²·G_μ − G_ψ)`
    pub slack: f64,
}

impl DominationCertificate {
    pub fn weights(&self) -> Option<&[f64]> {
        match &self.measure {
            Measure::Weights(w) => Some(w),
            Measure::Density(_) => None,
        }
    }

    pub fn density(&self) -> Option<&ComplexMatrix> {
        match &self.measure {
            Measure::Density(d) => Some(d),
            Measure::Weights(_) => None,
        }
    }
}
