use super::ipm::{solve_sdp_with_gap, BlockSpec, BlockValue, Coef, Constraint, Sdp, STALL_GAP};
use super::{DominationError, MAX_GENERATORS, MAX_LMI_DIM};
use crate::linalg::{herm_eig, ComplexMatrix, C64};

/// A Hermitian positive semidefinite generator `V_i`.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Dense(ComplexMatrix),
    /// `v v*`
    RankOne(Vec<C64>),
}

impl Generator {
    pub fn to_matrix(&self) -> ComplexMatrix {
        match self {
            Generator::Dense(m) => m.clone(),
            Generator::RankOne(v) => ComplexMatrix::outer(v, v),
        }
    }

    /// `⟨V, Z⟩ = tr(V Z)` for Hermitian `Z`.
    pub fn pair(&self, z: &ComplexMatrix) -> f64 {
        match self {
            Generator::Dense(m) => m.real_inner(z),
            Generator::RankOne(v) => {
                let zv = z.mul_vec(v);
                v.iter().zip(&zv).map(|(a, b)| a.conj() * b).sum::<C64>().re
            }
        }
    }

    fn compress(&self, q: &ComplexMatrix) -> Generator {
        match self {
            Generator::Dense(m) => Generator::Dense(q.adjoint().matmul(m).matmul(q).hermitian_part()),
            Generator::RankOne(v) => Generator::RankOne(q.adjoint_mul_vec(v)),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Generator::Dense(m) => m.rows(),
            Generator::RankOne(v) => v.len(),
        }
    }
}

/// `minimize Σ cost_i ν_i  subject to  Σ ν_i V_i ⪰ G, ν ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LmiProblem {
    pub target: ComplexMatrix,
    pub generators: Vec<Generator>,
    pub costs: Vec<f64>,
}

impl LmiProblem {
    /// Unit costs.
    pub fn new(target: ComplexMatrix, generators: Vec<Generator>) -> Self {
        let costs = vec![1.0; generators.len()];
        Self { target, generators, costs }
    }

    fn validate(&self) -> Result<usize, DominationError> {
        let d = self.target.rows();
        if !self.target.is_square() || d == 0 {
            return Err(DominationError::InvalidProblem("target must be square and nonempty".into()));
        }
        if d > MAX_LMI_DIM || self.generators.len() > MAX_GENERATORS {
            return Err(DominationError::InvalidProblem(format!(
                "size limits are d <= {MAX_LMI_DIM} and M <= {MAX_GENERATORS}"
            )));
        }
        if !self.target.is_hermitian(1e-10 * (1.0 + self.target.frobenius_norm())) {
            return Err(DominationError::InvalidProblem("target is not Hermitian".into()));
        }
        if self.costs.len() != self.generators.len() || self.costs.iter().any(|c| !(*c >= 0.0)) {
            return Err(DominationError::InvalidProblem("costs must be nonnegative, one per generator".into()));
        }
        for (i, g) in self.generators.iter().enumerate() {
            if g.dim() != d {
                return Err(DominationError::InvalidProblem(format!("generator {i} has the wrong size")));
            }
            if let Generator::Dense(m) = g {
                let eig = herm_eig(m)?;
                if eig.min() < -1e-10 * (1.0 + eig.max().abs()) {
                    return Err(DominationError::InvalidProblem(format!("generator {i} is not positive semidefinite")));
                }
            }
        }
        Ok(d)
    }

    /// `Σ ν_i V_i − G`
    pub fn slack_matrix(&self, nu: &[f64]) -> ComplexMatrix {
        let mut s = self.target.scale_real(-1.0);
        for (g, &w) in self.generators.iter().zip(nu) {
            s.axpy(C64::new(w, 0.0), &g.to_matrix());
        }
        s.hermitian_part()
    }
}

#[derive(Clone, Debug)]
pub struct LmiSolution {
    pub weights: Vec<f64>,
    /// Dual `Z ⪰ 0` with `⟨V_i, Z⟩ ≤ cost_i`.
    pub dual: ComplexMatrix,
    /// `Σ cost_i ν_i`
    pub objective: f64,
    /// `⟨G, Z⟩`
    pub dual_objective: f64,
    pub gap: f64,
    /// `λ_min(Σ ν_i V_i − G)`
    pub slack: f64,
    pub iterations: usize,
}

/// Solve the canonical LMI.
///
/// Directions annihilated by every generator are screened first: if `G` is
/// positive on one of them the problem is infeasible with that vector as
/// certificate; otherwise the problem is compressed to the joint range.
pub fn solve_lmi(prob: &LmiProblem, tol: f64) -> Result<LmiSolution, DominationError> {
    let d = prob.validate()?;
    let m = prob.generators.len();
    let mut total = ComplexMatrix::zeros(d, d);
    for g in &prob.generators {
        total = &total + &g.to_matrix();
    }
    let eig = herm_eig(&total.hermitian_part())?;
    let cutoff = 1e-10 * (1.0 + eig.max().abs());
    let kernel: Vec<usize> = (0..d).filter(|&k| eig.values[k] <= cutoff).collect();
    let range: Vec<usize> = (0..d).filter(|&k| eig.values[k] > cutoff).collect();

    let g_scale = 1.0 + prob.target.frobenius_norm();
    let qmat = ComplexMatrix::from_fn(d, range.len(), |i, j| eig.vectors[(i, range[j])]);
    let r = range.len();
    // `lift` maps the reduced problem back: Z = lift · Z_red · lift*.
    let mut lift = qmat.clone();
    let mut g_red = qmat.adjoint().matmul(&prob.target).matmul(&qmat).hermitian_part();
    if !kernel.is_empty() {
        let kmat = ComplexMatrix::from_fn(d, kernel.len(), |i, j| eig.vectors[(i, kernel[j])]);
        let gk = kmat.adjoint().matmul(&prob.target).matmul(&kmat).hermitian_part();
        let gk_eig = herm_eig(&gk)?;
        if gk_eig.max() > tol * g_scale {
            let v = kmat.mul_vec(&gk_eig.vector(kernel.len() - 1));
            return Err(DominationError::Infeasible { certificate: Some(v) });
        }
        // Kernel directions where G vanishes must not couple to the range;
        // directions where G is negative are eliminated by a Schur complement.
        let neg: Vec<usize> = (0..kernel.len()).filter(|&k| gk_eig.values[k] < -tol * g_scale).collect();
        let flat: Vec<usize> = (0..kernel.len()).filter(|&k| gk_eig.values[k] >= -tol * g_scale).collect();
        let kv = kmat.matmul(&gk_eig.vectors);
        let cols = |idx: &[usize]| ComplexMatrix::from_fn(d, idx.len(), |i, j| kv[(i, idx[j])]);
        let k_flat = cols(&flat);
        let cross_flat = qmat.adjoint().matmul(&prob.target).matmul(&k_flat);
        if cross_flat.frobenius_norm() > tol * g_scale {
            return Err(DominationError::Infeasible { certificate: None });
        }
        if !neg.is_empty() {
            let k_neg = cols(&neg);
            let inv = ComplexMatrix::from_diag(&neg.iter().map(|&k| C64::new(-1.0 / gk_eig.values[k], 0.0)).collect::<Vec<_>>());
            let g_nr = k_neg.adjoint().matmul(&prob.target).matmul(&qmat);
            let m_coupling = inv.matmul(&g_nr);
            g_red = (&g_red + &g_nr.adjoint().matmul(&m_coupling)).hermitian_part();
            lift = &lift + &k_neg.matmul(&m_coupling);
        }
    }

    if r == 0 {
        let weights = vec![0.0; m];
        let slack = herm_eig(&prob.slack_matrix(&weights))?.min();
        return Ok(LmiSolution {
            weights,
            dual: ComplexMatrix::zeros(d, d),
            objective: 0.0,
            dual_objective: 0.0,
            gap: 0.0,
            slack,
            iterations: 0,
        });
    }
    let gens: Vec<Generator> = prob.generators.iter().map(|g| g.compress(&qmat)).collect();

    let constraints = gens
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let psd = match g {
                Generator::Dense(mat) => Coef::Dense(mat.scale_real(-1.0)),
                Generator::RankOne(v) => Coef::RankOne { scale: -1.0, v: v.clone() },
            };
            Constraint { parts: vec![(0, psd), (1, Coef::Diag(vec![(k, -1.0)]))] }
        })
        .collect();
    let sdp = Sdp {
        blocks: vec![BlockSpec::Psd(r), BlockSpec::Lp(m)],
        c: vec![BlockValue::Psd(g_red.scale_real(-1.0)), BlockValue::Lp(vec![0.0; m])],
        constraints,
        b: prob.costs.iter().map(|c| -c).collect(),
    };
    let sol = solve_sdp_with_gap(&sdp, tol, tol.max(STALL_GAP))?;

    let weights: Vec<f64> = sol.y.iter().map(|w| w.max(0.0)).collect();
    let z_red = sol.x[0].psd().hermitian_part();
    let mut dual = lift.matmul(&z_red).matmul(&lift.adjoint()).hermitian_part();
    // Scale Z onto the dual feasible set exactly.
    let excess = prob
        .generators
        .iter()
        .zip(&prob.costs)
        .map(|(g, &c)| {
            let p = g.pair(&dual);
            if c > 0.0 {
                p / c
            } else if p > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .fold(1.0, f64::max);
    if excess.is_finite() && excess > 1.0 {
        dual = dual.scale_real(1.0 / excess);
    }
    let objective: f64 = weights.iter().zip(&prob.costs).map(|(w, c)| w * c).sum();
    let dual_objective = prob.target.real_inner(&dual);
    let slack = herm_eig(&prob.slack_matrix(&weights))?.min();
    Ok(LmiSolution {
        weights,
        dual,
        objective,
        dual_objective,
        gap: (objective - dual_objective).abs(),
        slack,
        iterations: sol.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn diag(a: f64, b: f64) -> Generator {
        Generator::Dense(ComplexMatrix::from_real(2, 2, &[a, 0.0, 0.0, b]))
    }

    #[test]
    fn one_by_one() {
        let prob = LmiProblem::new(ComplexMatrix::identity(1), vec![Generator::Dense(ComplexMatrix::identity(1))]);
        let sol = solve_lmi(&prob, 1e-9).unwrap();
        assert!((sol.weights[0] - 1.0).abs() < 1e-8);
        assert!((sol.dual[(0, 0)].re - 1.0).abs() < 1e-8);
        assert!(sol.gap < 1e-8);
    }

    #[test]
    fn separable_identity() {
        let prob = LmiProblem::new(ComplexMatrix::identity(2), vec![diag(1.0, 0.0), diag(0.0, 1.0)]);
        let sol = solve_lmi(&prob, 1e-9).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-8);
        assert!((sol.weights[0] - 1.0).abs() < 1e-7 && (sol.weights[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn all_ones_target() {
        let j = ComplexMatrix::from_real(2, 2, &[1.0; 4]);
        let prob = LmiProblem::new(j.clone(), vec![diag(1.0, 0.0), diag(0.0, 1.0)]);
        let sol = solve_lmi(&prob, 1e-9).unwrap();
        assert!((sol.objective - 4.0).abs() < 1e-7, "{}", sol.objective);
        assert!((&sol.dual - &j).max_abs() < 1e-6, "{:?}", sol.dual);
        assert!(sol.slack >= -1e-8);
    }

    #[test]
    fn kernel_certificate() {
        let prob = LmiProblem::new(ComplexMatrix::identity(2), vec![diag(1.0, 0.0)]);
        match solve_lmi(&prob, 1e-9) {
            Err(DominationError::Infeasible { certificate: Some(v) }) => {
                assert!(v[0].norm() < 1e-12);
                assert!((v[1].norm() - 1.0).abs() < 1e-12);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn weak_infeasibility_without_certificate() {
        let g = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let prob = LmiProblem::new(g, vec![diag(1.0, 0.0)]);
        assert_eq!(solve_lmi(&prob, 1e-9).unwrap_err(), DominationError::Infeasible { certificate: None });
    }

    #[test]
    fn negative_kernel_part_is_eliminated() {
        // [[ν, −1], [−1, 1]] ⪰ 0 iff ν ≥ 1.
        let g = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, -1.0]);
        let prob = LmiProblem::new(g.clone(), vec![diag(1.0, 0.0)]);
        let sol = solve_lmi(&prob, 1e-9).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-7);
        assert!((sol.dual_objective - 1.0).abs() < 1e-7);
        assert!(sol.slack >= -1e-8);
    }

    #[test]
    fn rank_one_matches_dense() {
        let v1 = vec![ONE, C64::new(0.0, 1.0)];
        let v2 = vec![ONE, C64::new(0.5, 0.0)];
        let g = ComplexMatrix::from_real(2, 2, &[1.0, 0.2, 0.2, 0.7]);
        let rank_one = LmiProblem::new(g.clone(), vec![Generator::RankOne(v1.clone()), Generator::RankOne(v2.clone())]);
        let dense = LmiProblem::new(
            g,
            vec![Generator::Dense(ComplexMatrix::outer(&v1, &v1)), Generator::Dense(ComplexMatrix::outer(&v2, &v2))],
        );
        let a = solve_lmi(&rank_one, 1e-10).unwrap();
        let b = solve_lmi(&dense, 1e-10).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-8);
    }
}
