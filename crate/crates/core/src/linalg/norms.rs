use super::{herm_eig, inner, ComplexMatrix, LinalgError, C64, ZERO};

/// Largest singular value, `sqrt(λ_max(A*A))`.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    let gram = if a.rows() >= a.cols() { a.gram() } else { a.matmul(&a.adjoint()) };
    // A Gram matrix is Hermitian by construction; Jacobi cannot reject it.
    let eig = herm_eig(&gram.hermitian_part()).expect("Gram matrix eigendecomposition");
    eig.max().max(0.0).sqrt()
}

/// An `m × k` grid of vectors in `C^d`, i.e. an element of `M_{m,k}(H)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorGrid {
    rows: usize,
    cols: usize,
    dim: usize,
    entries: Vec<C64>,
}

impl VectorGrid {
    pub fn new(rows: usize, cols: usize, dim: usize, entries: Vec<C64>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols * dim {
            return Err(LinalgError::DimensionMismatch(format!(
                "grid {rows}x{cols} of C^{dim} needs {} entries, got {}",
                rows * cols * dim,
                entries.len()
            )));
        }
        Ok(Self { rows, cols, dim, entries })
    }

    /// Build from nested rows of vectors; all vectors must share one length.
    pub fn from_nested(grid: &[Vec<Vec<C64>>]) -> Result<Self, LinalgError> {
        let rows = grid.len();
        let cols = grid.first().map_or(0, Vec::len);
        let dim = grid.first().and_then(|r| r.first()).map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows * cols * dim);
        for (i, row) in grid.iter().enumerate() {
            if row.len() != cols {
                return Err(LinalgError::DimensionMismatch(format!("row {i} has {} entries, expected {cols}", row.len())));
            }
            for (j, v) in row.iter().enumerate() {
                if v.len() != dim {
                    return Err(LinalgError::DimensionMismatch(format!(
                        "vector ({i},{j}) has dimension {}, expected {dim}",
                        v.len()
                    )));
                }
                entries.extend_from_slice(v);
            }
        }
        Ok(Self { rows, cols, dim, entries })
    }

    pub fn zeros(rows: usize, cols: usize, dim: usize) -> Self {
        Self { rows, cols, dim, entries: vec![ZERO; rows * cols * dim] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &[C64] {
        let start = (i * self.cols + j) * self.dim;
        &self.entries[start..start + self.dim]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut [C64] {
        let start = (i * self.cols + j) * self.dim;
        &mut self.entries[start..start + self.dim]
    }

    /// Gram matrix `G[i][j] = Σ_l ⟨h_{i,l}, h_{j,l}⟩`.
    pub fn row_gram(&self) -> ComplexMatrix {
        let mut g = ComplexMatrix::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let s: C64 = (0..self.cols).map(|l| inner(self.get(i, l), self.get(j, l))).sum();
                g[(i, j)] = s;
                g[(j, i)] = s.conj();
            }
        }
        g
    }

    /// The `(m·d) × k` matrix whose column `j` stacks `h_{0,j}, …, h_{m−1,j}`.
    pub fn stacked_columns(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows * self.dim, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                for (t, &z) in self.get(i, j).iter().enumerate() {
                    out[(i * self.dim + t, j)] = z;
                }
            }
        }
        out
    }
}

/// Norm in `M_{m,k}(H_r)`: `‖G‖^{1/2}` with `G` the row Gram matrix.
pub fn row_block_norm(grid: &VectorGrid) -> f64 {
    if grid.rows == 0 || grid.cols == 0 || grid.dim == 0 {
        return 0.0;
    }
    let g = grid.row_gram();
    let eig = herm_eig(&g).expect("row Gram matrix eigendecomposition");
    eig.max().max(0.0).sqrt()
}

/// Norm in `M_{m,k}(H_c)`: operator norm of the stacked-column matrix.
pub fn col_block_norm(grid: &VectorGrid) -> f64 {
    if grid.rows == 0 || grid.cols == 0 || grid.dim == 0 {
        return 0.0;
    }
    operator_norm(&grid.stacked_columns())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::sampling::{random_matrix, random_unitary, rng_from_seed};

    fn e(d: usize, i: usize) -> Vec<C64> {
        let mut v = vec![ZERO; d];
        v[i] = ONE;
        v
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&ComplexMatrix::identity(4)) - 1.0).abs() < 1e-15);
        let a = ComplexMatrix::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        assert!((operator_norm(&a) - 2.0).abs() < 1e-15);
        assert_eq!(operator_norm(&ComplexMatrix::zeros(3, 2)), 0.0);
    }

    #[test]
    fn operator_norm_unitary_invariant_and_submultiplicative() {
        let mut rng = rng_from_seed(21);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 4, 3);
            let b = random_matrix(&mut rng, 3, 5);
            let u = random_unitary(&mut rng, 4);
            let v = random_unitary(&mut rng, 3);
            let na = operator_norm(&a);
            assert!((operator_norm(&u.matmul(&a).matmul(&v)) - na).abs() <= 1e-9);
            assert!(operator_norm(&a.matmul(&b)) <= na * operator_norm(&b) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn block_norm_examples() {
        let single = VectorGrid::from_nested(&[vec![e(1, 0)]]).unwrap();
        assert!((row_block_norm(&single) - 1.0).abs() < 1e-15);
        assert!((col_block_norm(&single) - 1.0).abs() < 1e-15);

        let row = VectorGrid::from_nested(&[vec![e(2, 0), e(2, 1)]]).unwrap();
        let col = VectorGrid::from_nested(&[vec![e(2, 0)], vec![e(2, 1)]]).unwrap();
        assert!((row_block_norm(&row) - 2f64.sqrt()).abs() < 1e-15);
        assert!((row_block_norm(&col) - 1.0).abs() < 1e-15);
        assert!((col_block_norm(&col) - 2f64.sqrt()).abs() < 1e-15);
        assert!((col_block_norm(&row) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_by_one_grid_reduces_to_euclidean_norm() {
        let v = vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0)];
        let g = VectorGrid::from_nested(&[vec![v]]).unwrap();
        assert!((row_block_norm(&g) - 5.0).abs() < 1e-14);
        assert!((col_block_norm(&g) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let bad = VectorGrid::from_nested(&[vec![e(2, 0), e(3, 0)]]);
        assert!(matches!(bad, Err(LinalgError::DimensionMismatch(_))));
    }
}
