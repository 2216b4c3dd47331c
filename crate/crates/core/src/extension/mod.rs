//! Representations of pattern algebras and their positive extensions.
//!
//! A representation is given on matrix units. For each vector `h` its
//! dominating functional `φ_h` is a positive functional on `M_n`, stored as a
//! density `σ_h` with `φ_h(b) = tr(σ_h b)`. Solving for `φ_h` on a polarization
//! grid and polarizing entrywise yields the positive map `Φ` on `M_n`.

pub mod functional;
pub mod naimark;
pub mod polarization;
pub mod representation;

pub use functional::{dominating_functional, positive_extension, schwarz_gaps, DominatingFunctional, PositiveExtension};
pub use naimark::{naimark_dilate, random_povm, NaimarkDilation};
pub use polarization::{assemble_positive_map, polarization_grid, polarization_reconstruct, PositiveMapOnMatrices};
pub use representation::{random_pattern_element, rn_margin, PatternRepresentation};

use thiserror::Error;

use crate::domination::DominationError;
use crate::linalg::LinalgError;
use crate::pattern::PatternError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtensionError {
    #[error("representation has the wrong shape: {0}")]
    BadShape(String),
    #[error("representation is not unital (defect {defect:.3e})")]
    NotUnital { defect: f64 },
    #[error("representation is not multiplicative at E{i}{j}·E{k}{l} (defect {defect:.3e})")]
    NotMultiplicative { i: usize, j: usize, k: usize, l: usize, defect: f64 },
    #[error("oracle is not a quadratic form (residual {residual:.3e})")]
    NotQuadratic { residual: f64 },
    #[error("family is not quadratic in h (residual {residual:.3e})")]
    NotQuadraticFamily { residual: f64 },
    /// No dominating functional exists for this vector, so the
    /// representation is not row and column 2-contractive.
    #[error("no dominating functional (violation {violation:.3e})")]
    Infeasible { violation: f64 },
    #[error("dominating functional is not unique (spread {spread:.3e})")]
    NonUnique { spread: f64 },
    #[error("parallelogram identity fails on the grid (residual {residual:.3e})")]
    ParallelogramViolation { residual: f64 },
    #[error("not a POVM: {0}")]
    NotPovm(String),
    #[error(transparent)]
    Domination(#[from] DominationError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}
