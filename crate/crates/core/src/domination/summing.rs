use super::lmi::{solve_lmi, Generator, LmiProblem};
use super::{Domain, DominationCertificate, DominationError, Measure, Side, SubspaceMap};
use crate::linalg::{col_block_norm, herm_eig, operator_norm, row_block_norm, ComplexMatrix, VectorGrid, C64, ZERO};
use crate::sampling::{complex_gaussian, substream};

fn evaluation_vectors(psi: &SubspaceMap) -> Result<Vec<Vec<C64>>, DominationError> {
    match psi.domain() {
        // w_x[i] = conj(b_i(x)), so that w_x w_x* is V_x[i][j] = conj(b_i(x)) b_j(x).
        Domain::Functions { points, basis } => {
            Ok((0..*points).map(|x| basis.iter().map(|b| b[x].conj()).collect()).collect())
        }
        Domain::Matrices { .. } => Err(DominationError::WrongDomain { expected: "function" }),
    }
}

/// `a₂(ψ)` with a Pietsch measure, from the LMI
/// `min Σ ν_x` subject to `Σ ν_x V_x ⪰ G_ψ`.
pub fn two_summing_norm(psi: &SubspaceMap, tol: f64) -> Result<DominationCertificate, DominationError> {
    let w = evaluation_vectors(psi)?;
    let g = psi.image_gram();
    let prob = LmiProblem::new(g, w.into_iter().map(Generator::RankOne).collect());
    let sol = solve_lmi(&prob, tol)?;
    let total: f64 = sol.weights.iter().sum();
    let points = sol.weights.len();
    let measure = if total > 0.0 {
        sol.weights.iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / points as f64; points]
    };
    Ok(DominationCertificate {
        value: sol.objective.max(0.0).sqrt(),
        measure: Measure::Weights(measure),
        dual: sol.dual,
        primal_objective: sol.objective,
        dual_objective: sol.dual_objective,
        gap: sol.gap,
        slack: sol.slack,
    })
}

/// `value²·Σ μ(x)|f(x)|² − ‖ψ(f)‖²` for `f = Σ α_i b_i`.
pub fn domination_slack(psi: &SubspaceMap, cert: &DominationCertificate, alpha: &[C64]) -> Result<f64, DominationError> {
    let lhs: f64 = psi.apply(alpha).iter().map(|z| z.norm_sqr()).sum();
    let rhs = match (&cert.measure, psi.domain()) {
        (Measure::Weights(mu), Domain::Functions { .. }) => {
            let f = psi.function(alpha)?;
            mu.iter().zip(&f).map(|(m, v)| m * v.norm_sqr()).sum::<f64>()
        }
        (Measure::Density(rho), Domain::Matrices { .. }) => {
            let x = psi.matrix(alpha)?;
            rho.real_inner(&x.matmul(&x.adjoint()))
        }
        _ => return Err(DominationError::InvalidMap("certificate does not match the domain".into())),
    };
    Ok(cert.value * cert.value * rhs - lhs)
}

/// Norm of an `m × k` matrix over the domain with entries `Σ_t α[i][l][t] b_t`.
fn domain_norm(psi: &SubspaceMap, m: usize, k: usize, alpha: &[C64]) -> f64 {
    let d = psi.dim();
    let coeffs = |i: usize, l: usize| &alpha[(i * k + l) * d..(i * k + l + 1) * d];
    match psi.domain() {
        Domain::Functions { points, basis } => (0..*points)
            .map(|x| {
                let mat = ComplexMatrix::from_fn(m, k, |i, l| coeffs(i, l).iter().zip(basis).map(|(a, b)| a * b[x]).sum());
                operator_norm(&mat)
            })
            .fold(0.0, f64::max),
        Domain::Matrices { m: p, basis } => {
            let mut big = ComplexMatrix::zeros(m * p, k * p);
            for i in 0..m {
                for l in 0..k {
                    let mut block = ComplexMatrix::zeros(*p, *p);
                    for (a, b) in coeffs(i, l).iter().zip(basis) {
                        block.axpy(*a, b);
                    }
                    big.set_block(i * p, l * p, &block);
                }
            }
            operator_norm(&big)
        }
    }
}

/// `‖ψ_{m,k}(F)‖ / ‖F‖` for the coefficient tensor `alpha` (row-major over
/// `m × k`, then basis index). Zero when `F = 0`.
pub fn level_ratio(psi: &SubspaceMap, side: Side, m: usize, k: usize, alpha: &[C64]) -> f64 {
    let d = psi.dim();
    assert_eq!(alpha.len(), m * k * d, "coefficient tensor has the wrong length");
    let denom = domain_norm(psi, m, k, alpha);
    if denom <= 0.0 {
        return 0.0;
    }
    let mut grid = VectorGrid::zeros(m, k, psi.hilbert_dim());
    for i in 0..m {
        for l in 0..k {
            let h = psi.apply(&alpha[(i * k + l) * d..(i * k + l + 1) * d]);
            grid.get_mut(i, l).copy_from_slice(&h);
        }
    }
    let num = match side {
        Side::Row => row_block_norm(&grid),
        Side::Column => col_block_norm(&grid),
    };
    num / denom
}

fn raw_level(psi: &SubspaceMap, side: Side, m: usize, k: usize, samples: usize, seed: u64) -> f64 {
    let len = m * k * psi.dim();
    let mut rng = substream(seed, ((m as u64) << 32) | k as u64);
    (0..samples)
        .map(|_| {
            let alpha: Vec<C64> = (0..len).map(|_| complex_gaussian(&mut rng)).collect();
            level_ratio(psi, side, m, k, &alpha)
        })
        .fold(0.0, f64::max)
}

/// Sampled lower bounds for every level `(i, j)` with `i ≤ m`, `j ≤ k`;
/// entry `[i−1][j−1]`. Each entry also dominates the smaller levels, since a
/// smaller matrix embeds isometrically by zero padding.
pub fn cb_level_table(psi: &SubspaceMap, side: Side, m: usize, k: usize, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0; k]; m];
    for i in 0..m {
        for j in 0..k {
            let mut v = raw_level(psi, side, i + 1, j + 1, samples, seed);
            if i > 0 {
                v = v.max(table[i - 1][j]);
            }
            if j > 0 {
                v = v.max(table[i][j - 1]);
            }
            table[i][j] = v;
        }
    }
    table
}

/// Sampled lower bound for `‖ψ‖` at matrix level `m × k` into `H_r` or `H_c`.
pub fn cb_level_norm(psi: &SubspaceMap, side: Side, m: usize, k: usize, samples: usize, seed: u64) -> f64 {
    if m == 0 || k == 0 {
        return 0.0;
    }
    cb_level_table(psi, side, m, k, samples, seed)[m - 1][k - 1]
}

/// Row of functions `f_j = Σ_i (α_j)_i b_i` built from a dual matrix
/// `Z = Σ_j α_j α_j*`, padded to length `d`.
#[derive(Clone, Debug)]
pub struct WitnessFamily {
    /// `α_j`, one coefficient vector per function.
    pub coefficients: Vec<Vec<C64>>,
    /// Row-norm ratio `‖(ψ(f_1), …, ψ(f_d))‖ / ‖(f_1, …, f_d)‖` at level `(1, d)`.
    pub ratio: f64,
}

pub fn witness_family(psi: &SubspaceMap, side: Side, dual: &ComplexMatrix) -> Result<WitnessFamily, DominationError> {
    let d = psi.dim();
    let eig = herm_eig(&dual.hermitian_part())?;
    let mut coefficients: Vec<Vec<C64>> = Vec::with_capacity(d);
    for k in (0..d).rev() {
        let lambda = eig.values[k];
        if lambda > 0.0 {
            coefficients.push(eig.vector(k).into_iter().map(|z| z * lambda.sqrt()).collect());
        }
    }
    while coefficients.len() < d {
        coefficients.push(vec![ZERO; d]);
    }
    let alpha: Vec<C64> = coefficients.iter().flatten().copied().collect();
    let ratio = level_ratio(psi, side, 1, d, &alpha);
    Ok(WitnessFamily { coefficients, ratio })
}
