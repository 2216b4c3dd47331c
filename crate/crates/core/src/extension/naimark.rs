use rand::Rng;

use super::ExtensionError;
use crate::linalg::{herm_eig, ComplexMatrix, C64, ONE};
use crate::sampling::random_matrix;

/// Eigenvalues at or below this count as zero when computing ranks.
pub const RANK_THRESHOLD: f64 = 1e-9;
const PSD_TOL: f64 = 1e-10;
const SUM_TOL: f64 = 1e-9;

/// `F_x = V* E_x V` with `V: C^d → C^D` an isometry and `E_x` orthogonal
/// coordinate projections summing to the identity.
#[derive(Clone, Debug)]
pub struct NaimarkDilation {
    /// `D × d`
    pub isometry: ComplexMatrix,
    pub projections: Vec<ComplexMatrix>,
    /// `rank F_x`; `E_x` projects onto the `x`-th run of that many coordinates.
    pub ranks: Vec<usize>,
}

impl NaimarkDilation {
    pub fn dilation_dim(&self) -> usize {
        self.isometry.rows()
    }

    /// `max |V*V − I|`
    pub fn isometry_defect(&self) -> f64 {
        let d = self.isometry.cols();
        (&self.isometry.gram() - &ComplexMatrix::identity(d)).max_abs()
    }

    /// `max_x max |V* E_x V − F_x|`
    pub fn compression_defect(&self, povm: &[ComplexMatrix]) -> f64 {
        let v = &self.isometry;
        self.projections
            .iter()
            .zip(povm)
            .map(|(e, f)| (&v.adjoint().matmul(e).matmul(v) - f).max_abs())
            .fold(0.0, f64::max)
    }
}

/// Naimark dilation of a finite POVM. Row block `x` of `V` is
/// `diag(√λ) U*` from the eigenvectors of `F_x` with eigenvalue above
/// [`RANK_THRESHOLD`].
pub fn naimark_dilate(povm: &[ComplexMatrix]) -> Result<NaimarkDilation, ExtensionError> {
    let d = povm.first().map_or(0, ComplexMatrix::rows);
    if d == 0 || povm.iter().any(|f| f.rows() != d || f.cols() != d) {
        return Err(ExtensionError::NotPovm("effects must be nonempty square matrices of one size".into()));
    }
    let mut sum = ComplexMatrix::zeros(d, d);
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut ranks = Vec::with_capacity(povm.len());
    for (x, f) in povm.iter().enumerate() {
        if !f.is_hermitian(PSD_TOL * (1.0 + f.frobenius_norm())) {
            return Err(ExtensionError::NotPovm(format!("effect {x} is not Hermitian")));
        }
        let eig = herm_eig(&f.hermitian_part())?;
        if eig.min() < -PSD_TOL {
            return Err(ExtensionError::NotPovm(format!("effect {x} has eigenvalue {:.3e}", eig.min())));
        }
        sum = &sum + f;
        let mut rank = 0;
        for k in (0..d).rev() {
            let lambda = eig.values[k];
            if lambda > RANK_THRESHOLD {
                let s = lambda.sqrt();
                rows.push(eig.vector(k).iter().map(|z| z.conj() * s).collect());
                rank += 1;
            }
        }
        ranks.push(rank);
    }
    let defect = (&sum - &ComplexMatrix::identity(d)).max_abs();
    if defect > SUM_TOL {
        return Err(ExtensionError::NotPovm(format!("effects sum to the identity only within {defect:.3e}")));
    }
    let big = rows.len();
    let isometry = ComplexMatrix::from_fn(big, d, |r, c| rows[r][c]);
    let mut projections = Vec::with_capacity(povm.len());
    let mut start = 0;
    for &r in &ranks {
        let mut e = ComplexMatrix::zeros(big, big);
        for k in start..start + r {
            e[(k, k)] = ONE;
        }
        projections.push(e);
        start += r;
    }
    Ok(NaimarkDilation { isometry, projections, ranks })
}

/// `F_x = S^{-1/2} G_x S^{-1/2}` with `S = Σ G_x` for random positive `G_x`
/// of random rank, with total rank at least `d`.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, d: usize, outcomes: usize) -> Result<Vec<ComplexMatrix>, ExtensionError> {
    if d == 0 || outcomes == 0 {
        return Err(ExtensionError::NotPovm("need a positive dimension and at least one outcome".into()));
    }
    let mut ranks: Vec<usize> = (0..outcomes).map(|_| rng.random_range(1..=d)).collect();
    // Total rank at least d, so that the effects span almost surely.
    while ranks.iter().sum::<usize>() < d {
        let x = rng.random_range(0..outcomes);
        ranks[x] = (ranks[x] + 1).min(d);
    }
    let raw: Vec<ComplexMatrix> = ranks
        .iter()
        .map(|&rank| {
            let b = random_matrix(rng, d, rank);
            b.matmul(&b.adjoint())
        })
        .collect();
    let mut sum = ComplexMatrix::zeros(d, d);
    for g in &raw {
        sum = &sum + g;
    }
    let eig = herm_eig(&sum.hermitian_part())?;
    if eig.min() <= 1e-8 {
        return Err(ExtensionError::NotPovm("random effects do not span".into()));
    }
    let inv_sqrt = eig.apply(|l| 1.0 / l.sqrt());
    Ok(raw.iter().map(|g| inv_sqrt.matmul(g).matmul(&inv_sqrt).hermitian_part()).collect())
}
