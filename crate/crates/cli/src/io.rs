//! JSON interchange formats.
//!
//! Complex numbers are `[re, im]`, matrices `{"rows", "cols", "data"}` in
//! row-major order, patterns `{"n", "pairs"}` with 1-based indices, and
//! boundary functions `{"grid_log2", "values"}`. Emission is canonical: a
//! parsed file re-emits byte for byte.

use std::fs;
use std::path::Path;

use logmod::domination::{Side, SubspaceMap};
use logmod::extension::{PatternRepresentation, PositiveMapOnMatrices};
use logmod::outer::{AnalyticPoly, BoundaryFunction, TrigPoly};
use logmod::{ComplexMatrix, Pattern, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("value cannot be written: {0}")]
    Emit(String),
}

pub type Complex = [f64; 2];

fn to_pair(z: &C64) -> Complex {
    [z.re, z.im]
}

fn from_pair(p: &Complex) -> C64 {
    C64::new(p[0], p[1])
}

/// A sample that may be written as a bare real number or as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex(Complex),
}

impl Scalar {
    fn value(&self) -> C64 {
        match self {
            Scalar::Real(x) => C64::new(*x, 0.0),
            Scalar::Complex(p) => from_pair(p),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self { rows: m.rows(), cols: m.cols(), data: m.data().iter().map(to_pair).collect() }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, String> {
        ComplexMatrix::new(self.rows, self.cols, self.data.iter().map(from_pair).collect()).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternFile {
    pub n: usize,
    pub pairs: Vec<[usize; 2]>,
}

impl PatternFile {
    pub fn from_pattern(p: &Pattern) -> Self {
        Self { n: p.n(), pairs: p.pairs().into_iter().map(|(i, j)| [i + 1, j + 1]).collect() }
    }

    pub fn to_pattern(&self) -> Result<Pattern, String> {
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for &[i, j] in &self.pairs {
            if i == 0 || j == 0 {
                return Err(format!("indices are 1-based, got ({i}, {j})"));
            }
            pairs.push((i - 1, j - 1));
        }
        Pattern::new(self.n, &pairs).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryFile {
    pub grid_log2: u32,
    pub values: Vec<Scalar>,
}

impl BoundaryFile {
    pub fn from_function(f: &BoundaryFunction) -> Self {
        Self { grid_log2: f.grid_log2(), values: f.values().iter().map(|z| Scalar::Complex(to_pair(z))).collect() }
    }

    pub fn to_function(&self) -> Result<BoundaryFunction, String> {
        BoundaryFunction::new(self.grid_log2, self.values.iter().map(Scalar::value).collect()).map_err(|e| e.to_string())
    }
}

/// Coefficients `c_{−m}, …, c_m` of a trigonometric polynomial, or
/// `q_0, …, q_m` of an analytic one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffsFile {
    pub coeffs: Vec<Complex>,
}

impl CoeffsFile {
    pub fn from_analytic(q: &AnalyticPoly) -> Self {
        Self { coeffs: q.coeffs().iter().map(to_pair).collect() }
    }

    pub fn from_trig(p: &TrigPoly) -> Self {
        Self { coeffs: p.coeffs().iter().map(to_pair).collect() }
    }

    pub fn to_trig(&self) -> Result<TrigPoly, String> {
        TrigPoly::new(self.coeffs.iter().map(from_pair).collect()).map_err(|e| e.to_string())
    }

    pub fn to_analytic(&self) -> Result<AnalyticPoly, String> {
        AnalyticPoly::new(self.coeffs.iter().map(from_pair).collect()).map_err(|e| e.to_string())
    }
}

fn vectors(v: &[Vec<Complex>]) -> Vec<Vec<C64>> {
    v.iter().map(|x| x.iter().map(from_pair).collect()).collect()
}

/// `ψ` on a space of functions: `basis[k]` lists values at the points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionMapFile {
    pub basis: Vec<Vec<Complex>>,
    pub images: Vec<Vec<Complex>>,
}

impl FunctionMapFile {
    pub fn to_map(&self) -> Result<SubspaceMap, String> {
        SubspaceMap::functions(vectors(&self.basis), vectors(&self.images)).map_err(|e| e.to_string())
    }
}

/// `ψ` on a subspace of `M_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixMapFile {
    pub m: usize,
    pub basis: Vec<MatrixFile>,
    pub images: Vec<Vec<Complex>>,
}

impl MatrixMapFile {
    pub fn to_map(&self) -> Result<SubspaceMap, String> {
        let basis = self.basis.iter().map(MatrixFile::to_matrix).collect::<Result<_, _>>()?;
        SubspaceMap::matrices(self.m, basis, vectors(&self.images)).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitImage {
    /// 1-based `(i, j)` of the matrix unit `E_ij`.
    pub pair: [usize; 2],
    pub matrix: MatrixFile,
}

/// Representation of a pattern algebra on its matrix units; units not listed
/// map to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationFile {
    pub pattern: PatternFile,
    pub dim: usize,
    pub images: Vec<UnitImage>,
}

impl RepresentationFile {
    pub fn from_representation(rep: &PatternRepresentation) -> Self {
        Self {
            pattern: PatternFile::from_pattern(rep.pattern()),
            dim: rep.dim(),
            images: rep
                .units()
                .map(|((i, j), m)| UnitImage { pair: [i + 1, j + 1], matrix: MatrixFile::from_matrix(m) })
                .collect(),
        }
    }

    pub fn to_representation(&self) -> Result<PatternRepresentation, String> {
        let pattern = self.pattern.to_pattern()?;
        let mut images = Vec::with_capacity(self.images.len());
        for u in &self.images {
            let [i, j] = u.pair;
            if i == 0 || j == 0 {
                return Err(format!("indices are 1-based, got ({i}, {j})"));
            }
            images.push(((i - 1, j - 1), u.matrix.to_matrix()?));
        }
        PatternRepresentation::new(pattern, self.dim, images).map_err(|e| e.to_string())
    }
}

/// `Φ: M_n → M_d` as the block matrix `Σ E_ij ⊗ Φ(E_ij)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositiveMapFile {
    pub input_dim: usize,
    pub output_dim: usize,
    pub blocks: MatrixFile,
}

impl PositiveMapFile {
    pub fn from_map(map: &PositiveMapOnMatrices) -> Self {
        Self { input_dim: map.input_dim(), output_dim: map.output_dim(), blocks: MatrixFile::from_matrix(map.choi()) }
    }

    pub fn to_map(&self) -> Result<PositiveMapOnMatrices, String> {
        PositiveMapOnMatrices::new(self.input_dim, self.output_dim, self.blocks.to_matrix()?).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideName {
    Row,
    Column,
}

impl From<SideName> for Side {
    fn from(s: SideName) -> Side {
        match s {
            SideName::Row => Side::Row,
            SideName::Column => Side::Column,
        }
    }
}

/// Pietsch certificate for `a₂`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureCertificateFile {
    pub value: f64,
    pub weights: Vec<f64>,
    pub dual: MatrixFile,
    pub gap: f64,
    pub slack: f64,
}

/// Dominating state certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateCertificateFile {
    pub side: SideName,
    pub value: f64,
    pub density: MatrixFile,
    pub dual: MatrixFile,
    pub gap: f64,
    pub slack: f64,
}

pub fn parse_str<T: DeserializeOwned>(text: &str, path: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Parse { path: path.to_string(), message: e.to_string() })
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| IoError::Read { path: name.clone(), source })?;
    parse_str(&text, &name)
}

/// Canonical text: two-space indentation, fields in declaration order,
/// shortest round-trip float formatting, trailing newline.
pub fn emit<T: Serialize>(value: &T) -> Result<String, IoError> {
    let v = serde_json::to_value(value).map_err(|e| IoError::Emit(e.to_string()))?;
    if has_null(&v) {
        return Err(IoError::Emit("non-finite number".into()));
    }
    let mut s = serde_json::to_string_pretty(value).map_err(|e| IoError::Emit(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn has_null(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Null => true,
        serde_json::Value::Array(a) => a.iter().any(has_null),
        serde_json::Value::Object(o) => o.values().any(has_null),
        _ => false,
    }
}

pub fn write<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = emit(value)?;
    fs::write(path, text).map_err(|source| IoError::Write { path: path.display().to_string(), source })
}
