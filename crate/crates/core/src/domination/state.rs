use super::ipm::{solve_sdp_with_gap, BlockSpec, BlockValue, Coef, Constraint, Sdp, STALL_GAP};
use super::{Domain, DominationCertificate, DominationError, Measure, Side, SubspaceMap, MAX_LMI_DIM};
use crate::linalg::{herm_eig, ComplexMatrix, C64, I, ONE};

fn matrix_basis(psi: &SubspaceMap) -> Result<(usize, &[ComplexMatrix]), DominationError> {
    match psi.domain() {
        Domain::Matrices { m, basis } => Ok((*m, basis)),
        Domain::Functions { .. } => Err(DominationError::WrongDomain { expected: "matrix" }),
    }
}

/// Products `P[p][q]` with `L(σ)_pq = tr(σ P[p][q])`.
fn pair_products(basis: &[ComplexMatrix], side: Side) -> Vec<Vec<ComplexMatrix>> {
    basis
        .iter()
        .map(|xp| {
            basis
                .iter()
                .map(|xq| match side {
                    Side::Row => xq.matmul(&xp.adjoint()),
                    Side::Column => xp.adjoint().matmul(xq),
                })
                .collect()
        })
        .collect()
}

fn apply_products(products: &[Vec<ComplexMatrix>], sigma: &ComplexMatrix) -> ComplexMatrix {
    let d = products.len();
    ComplexMatrix::from_fn(d, d, |p, q| sigma.matmul(&products[p][q]).trace())
}

/// `L(σ)` with `L(σ)_pq = tr(σ x_q x_p*)` on the row side and
/// `tr(σ x_p* x_q)` on the column side, so that `α* L(σ) α = tr(σ XX*)`
/// (resp. `tr(σ X*X)`) for `X = Σ α_i x_i`.
pub fn state_gram(psi: &SubspaceMap, side: Side, sigma: &ComplexMatrix) -> Result<ComplexMatrix, DominationError> {
    let (m, basis) = matrix_basis(psi)?;
    if sigma.rows() != m || sigma.cols() != m {
        return Err(DominationError::InvalidProblem(format!("state must be {m}x{m}")));
    }
    Ok(apply_products(&pair_products(basis, side), sigma))
}

/// Real basis of the Hermitian `m × m` matrices: diagonal units first, then
/// `E_ij + E_ji` and `iE_ij − iE_ji` for `i < j`.
fn hermitian_basis(m: usize) -> Vec<ComplexMatrix> {
    let mut out: Vec<ComplexMatrix> = (0..m).map(|i| ComplexMatrix::unit(m, i, i)).collect();
    for i in 0..m {
        for j in (i + 1)..m {
            let mut re = ComplexMatrix::zeros(m, m);
            re[(i, j)] = ONE;
            re[(j, i)] = ONE;
            out.push(re);
            let mut im = ComplexMatrix::zeros(m, m);
            im[(i, j)] = I;
            im[(j, i)] = -I;
            out.push(im);
        }
    }
    out
}

/// Smallest `c` with a state `s(·) = tr(ρ ·)` such that
/// `‖ψ(x)‖² ≤ c² s(xx*)` (row side) or `c² s(x*x)` (column side).
///
/// Solved as `min tr σ` over `σ ⪰ 0` with `L(σ) ⪰ G_ψ`, giving `c² = tr σ`
/// and `ρ = σ / tr σ`. The problem is always feasible because the basis is
/// independent, so `L(I)` is positive definite; whether `c ≤ 1` is for the
/// caller to decide.
pub fn dominating_state(psi: &SubspaceMap, side: Side, tol: f64) -> Result<DominationCertificate, DominationError> {
    let (m, basis) = matrix_basis(psi)?;
    let d = psi.dim();
    if d > MAX_LMI_DIM || m > MAX_LMI_DIM {
        return Err(DominationError::InvalidProblem(format!("dimension exceeds {MAX_LMI_DIM}")));
    }
    let g = psi.image_gram();
    let products = pair_products(basis, side);
    let herm = hermitian_basis(m);

    let constraints = herm
        .iter()
        .map(|b| Constraint {
            parts: vec![
                (0, Coef::Dense(b.scale_real(-1.0))),
                (1, Coef::Dense(apply_products(&products, b).hermitian_part().scale_real(-1.0))),
            ],
        })
        .collect();
    let b: Vec<f64> = (0..herm.len()).map(|t| if t < m { -1.0 } else { 0.0 }).collect();
    let sdp = Sdp {
        blocks: vec![BlockSpec::Psd(m), BlockSpec::Psd(d)],
        c: vec![BlockValue::Psd(ComplexMatrix::zeros(m, m)), BlockValue::Psd(g.scale_real(-1.0))],
        constraints,
        b,
    };
    let sol = solve_sdp_with_gap(&sdp, tol, tol.max(STALL_GAP))?;

    let mut sigma = ComplexMatrix::zeros(m, m);
    for (y, bt) in sol.y.iter().zip(&herm) {
        sigma.axpy(C64::new(*y, 0.0), bt);
    }
    let trace = sigma.trace().re.max(0.0);
    let density = if trace > 1e-14 {
        sigma.scale_real(1.0 / trace)
    } else {
        ComplexMatrix::identity(m).scale_real(1.0 / m as f64)
    };
    let dual = sol.x[1].psd().hermitian_part();
    let dual_objective = g.real_inner(&dual);
    let lhs = apply_products(&products, &density.scale_real(trace));
    let slack = herm_eig(&(&lhs - &g).hermitian_part())?.min();
    Ok(DominationCertificate {
        value: trace.sqrt(),
        measure: Measure::Density(density),
        dual,
        primal_objective: trace,
        dual_objective,
        gap: (trace - dual_objective).abs(),
        slack,
    })
}

#[cfg(test)]
/// `s(XX*)` or `s(X*X)` for the density `ρ`.
pub(crate) fn state_value(rho: &ComplexMatrix, x: &ComplexMatrix, side: Side) -> f64 {
    let sq = match side {
        Side::Row => x.matmul(&x.adjoint()),
        Side::Column => x.adjoint().matmul(x),
    };
    rho.matmul(&sq).trace().re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    fn units(m: usize) -> Vec<ComplexMatrix> {
        (0..m).flat_map(|i| (0..m).map(move |j| ComplexMatrix::unit(m, i, j))).collect()
    }

    #[test]
    fn hermitian_basis_spans() {
        let b = hermitian_basis(3);
        assert_eq!(b.len(), 9);
        assert!(b.iter().all(|x| x.is_hermitian(0.0)));
    }

    #[test]
    fn state_gram_matches_quadratic_form() {
        let basis = units(2);
        let images: Vec<Vec<C64>> = (0..4).map(|k| vec![C64::new(k as f64, 0.0)]).collect();
        let psi = SubspaceMap::matrices(2, basis.clone(), images).unwrap();
        let rho = ComplexMatrix::from_real(2, 2, &[0.7, 0.1, 0.1, 0.3]);
        let alpha = [C64::new(1.0, 0.5), C64::new(-0.3, 0.0), ZERO, C64::new(0.2, -1.0)];
        let x = psi.matrix(&alpha).unwrap();
        for side in [Side::Row, Side::Column] {
            let l = state_gram(&psi, side, &rho).unwrap();
            let quad: C64 = (0..4).flat_map(|p| (0..4).map(move |q| (p, q))).map(|(p, q)| alpha[p].conj() * l[(p, q)] * alpha[q]).sum();
            assert!((quad.re - state_value(&rho, &x, side)).abs() < 1e-12);
        }
    }

    #[test]
    fn first_row_functional_on_row_side() {
        // ψ(x) = x_00 has ‖ψ(x)‖² ≤ (xx*)_00, so the state e_0 e_0* works with c = 1.
        let basis = units(2);
        let mut images = vec![vec![ZERO]; 4];
        images[0] = vec![ONE];
        let psi = SubspaceMap::matrices(2, basis, images).unwrap();
        let cert = dominating_state(&psi, Side::Row, 1e-9).unwrap();
        assert!((cert.value - 1.0).abs() < 1e-6);
        let rho = cert.density().unwrap();
        assert!((rho[(0, 0)].re - 1.0).abs() < 1e-5);
        assert!(cert.slack > -1e-7);
    }

    #[test]
    fn transpose_needs_more_than_one() {
        // x ↦ (x_00, x_01, x_10, x_11) is the Hilbert-Schmidt identity; c² = m.
        let basis = units(2);
        let images: Vec<Vec<C64>> = (0..4).map(|k| (0..4).map(|l| if k == l { ONE } else { ZERO }).collect()).collect();
        let psi = SubspaceMap::matrices(2, basis, images).unwrap();
        let cert = dominating_state(&psi, Side::Row, 1e-9).unwrap();
        assert!((cert.value - 2f64.sqrt()).abs() < 1e-6);
        assert!((cert.dual_objective - 2.0).abs() < 1e-6);
    }
}
