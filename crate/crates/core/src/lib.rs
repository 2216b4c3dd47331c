//! Computational tools for logmodular pattern algebras.
//!
//! * [`pattern`] decides when a support pattern in `M_n` is block upper
//!   triangular after relabeling, and [`factor`] factors positive matrices
//!   inside a pattern (or fails to, with a measured residual floor).
//! * [`outer`] builds Fejér–Riesz and outer-function factorizations on the
//!   circle.
//! * [`domination`] computes 2-summing norms, Pietsch measures and
//!   dominating states with an interior-point LMI solver.
//! * [`extension`] handles representations of pattern algebras, their
//!   dominating functionals, the positive extension to all of `M_n`, and
//!   finite Naimark dilations.
//! * [`selftest`] runs the numerical acceptance checks end to end.

pub mod domination;
pub mod extension;
pub mod factor;
pub mod linalg;
pub mod outer;
pub mod pattern;
pub mod sampling;
pub mod selftest;

pub use linalg::{ComplexMatrix, LinalgError, C64};
pub use pattern::{BlockStructure, LogmodularVerdict, Pattern, PatternError};
