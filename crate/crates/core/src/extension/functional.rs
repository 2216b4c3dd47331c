use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::polarization::{assemble_from_grid, polarization_grid, PositiveMapOnMatrices};
use super::representation::{random_pattern_element, PatternRepresentation};
use super::ExtensionError;
use crate::domination::ipm::{solve_sdp, BlockSpec, BlockValue, Coef, Constraint, IpmError, Sdp};
use crate::domination::{state_gram, Side, SubspaceMap};
use crate::linalg::{herm_eig, inner, operator_norm, vec_norm, ComplexMatrix, C64, I, ONE};
use crate::sampling::substream;

const FEASIBILITY_TOL: f64 = 1e-8;
const SOLVER_TOL: f64 = 1e-10;
/// Largest admissible Frobenius spread between functionals from different objectives.
pub const UNIQUENESS_TOL: f64 = 1e-6;
/// Largest admissible parallelogram residual on the grid.
pub const PARALLELOGRAM_TOL: f64 = 1e-6;

/// `φ_h(b) = tr(σ b)`.
#[derive(Clone, Debug)]
pub struct DominatingFunctional {
    pub density: ComplexMatrix,
    /// Largest Frobenius distance between solutions for different objectives;
    /// zero when the linear constraints already fix `σ`.
    pub spread: f64,
    /// Smallest eigenvalue over `σ`, `L(σ) − G` for `a ↦ ρ(a)h` and for
    /// `a* ↦ ρ(a)*h`.
    pub slack: f64,
}

struct Setup {
    /// `σ` restricted to the entries fixed by `tr(σ a) = ⟨ρ(a)h, h⟩`.
    fixed: ComplexMatrix,
    /// Hermitian directions for the entries left free.
    free: Vec<ComplexMatrix>,
    /// Mismatch between the two values prescribed for a symmetric pair.
    mismatch: f64,
    forward: SubspaceMap,
    backward: SubspaceMap,
}

fn setup(rep: &PatternRepresentation, h: &[C64]) -> Result<Setup, ExtensionError> {
    let n = rep.pattern().n();
    let mut fixed = ComplexMatrix::zeros(n, n);
    let mut mismatch: f64 = 0.0;
    let mut basis = Vec::new();
    let mut fwd_images = Vec::new();
    let mut adj_basis = Vec::new();
    let mut bwd_images = Vec::new();
    for ((i, j), img) in rep.units() {
        // tr(σ E_ij) = σ_ji
        let v = inner(&img.mul_vec(h), h);
        fixed[(j, i)] = v;
        if i == j {
            mismatch = mismatch.max(v.im.abs());
            fixed[(i, i)] = C64::new(v.re, 0.0);
        } else if rep.pattern().contains(j, i) {
            let other = inner(&rep.image(j, i).expect("pair in pattern").mul_vec(h), h);
            mismatch = mismatch.max((other - v.conj()).norm());
        } else {
            fixed[(i, j)] = v.conj();
        }
        basis.push(ComplexMatrix::unit(n, i, j));
        fwd_images.push(img.mul_vec(h));
        adj_basis.push(ComplexMatrix::unit(n, j, i));
        bwd_images.push(img.adjoint_mul_vec(h));
    }
    let mut free = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if !rep.pattern().contains(i, j) && !rep.pattern().contains(j, i) {
                let mut re = ComplexMatrix::zeros(n, n);
                re[(i, j)] = ONE;
                re[(j, i)] = ONE;
                let mut im = ComplexMatrix::zeros(n, n);
                im[(i, j)] = I;
                im[(j, i)] = -I;
                free.push(re);
                free.push(im);
            }
        }
    }
    Ok(Setup {
        fixed: fixed.hermitian_part(),
        free,
        mismatch,
        forward: SubspaceMap::matrices(n, basis, fwd_images)?,
        backward: SubspaceMap::matrices(n, adj_basis, bwd_images)?,
    })
}

impl Setup {
    fn slack(&self, sigma: &ComplexMatrix) -> Result<f64, ExtensionError> {
        let mut min = herm_eig(sigma)?.min();
        for psi in [&self.forward, &self.backward] {
            let gap = &state_gram(psi, Side::Column, sigma)? - &psi.image_gram();
            min = min.min(herm_eig(&gap.hermitian_part())?.min());
        }
        Ok(min)
    }

    /// Maximize `c·y` over the feasible `σ = fixed + Σ y_t free_t`.
    fn solve(&self, objective: &[f64]) -> Result<ComplexMatrix, ExtensionError> {
        let n = self.fixed.rows();
        let d = self.forward.dim();
        let grams = [self.forward.image_gram(), self.backward.image_gram()];
        let mut c = vec![BlockValue::Psd(self.fixed.clone())];
        for (psi, g) in [&self.forward, &self.backward].into_iter().zip(&grams) {
            c.push(BlockValue::Psd((&state_gram(psi, Side::Column, &self.fixed)? - g).hermitian_part()));
        }
        let mut constraints = Vec::with_capacity(self.free.len());
        for b in &self.free {
            let mut parts = vec![(0, Coef::Dense(b.scale_real(-1.0)))];
            for (k, psi) in [&self.forward, &self.backward].into_iter().enumerate() {
                parts.push((k + 1, Coef::Dense(state_gram(psi, Side::Column, b)?.hermitian_part().scale_real(-1.0))));
            }
            constraints.push(Constraint { parts });
        }
        let sdp = Sdp {
            blocks: vec![BlockSpec::Psd(n), BlockSpec::Psd(d), BlockSpec::Psd(d)],
            c,
            constraints,
            b: objective.to_vec(),
        };
        let sol = solve_sdp(&sdp, SOLVER_TOL).map_err(|e| match e {
            IpmError::Infeasible { .. } => ExtensionError::Infeasible { violation: f64::NAN },
            other => ExtensionError::Domination(other.into()),
        })?;
        let mut sigma = self.fixed.clone();
        for (y, b) in sol.y.iter().zip(&self.free) {
            sigma.axpy(C64::new(*y, 0.0), b);
        }
        Ok(sigma.hermitian_part())
    }
}

/// The positive functional `φ` on `M_n` with `φ(1) = ‖h‖²`,
/// `‖ρ(a)h‖² ≤ φ(a*a)`, `‖ρ(a)*h‖² ≤ φ(aa*)` and `φ(a) = ⟨ρ(a)h, h⟩` on the
/// pattern algebra.
///
/// When the pattern together with its transpose covers every pair, the
/// linear conditions fix `σ` and only the inequalities are checked.
/// Otherwise the remaining entries are found by an SDP solved for
/// `objectives` random linear objectives, and disagreement beyond
/// [`UNIQUENESS_TOL`] is an error.
pub fn dominating_functional(
    rep: &PatternRepresentation,
    h: &[C64],
    objectives: usize,
    seed: u64,
) -> Result<DominatingFunctional, ExtensionError> {
    if h.len() != rep.dim() {
        return Err(ExtensionError::BadShape(format!("vector must have length {}", rep.dim())));
    }
    let n = rep.pattern().n();
    let norm2 = vec_norm(h).powi(2);
    if norm2 == 0.0 {
        return Ok(DominatingFunctional { density: ComplexMatrix::zeros(n, n), spread: 0.0, slack: 0.0 });
    }
    let s = setup(rep, h)?;
    let tol = FEASIBILITY_TOL * (1.0 + norm2);
    if s.mismatch > tol {
        return Err(ExtensionError::Infeasible { violation: s.mismatch });
    }
    let (density, spread) = if s.free.is_empty() {
        (s.fixed.clone(), 0.0)
    } else {
        let mut rng = substream(seed, 0);
        let mut sols = Vec::with_capacity(objectives.max(1));
        for _ in 0..objectives.max(1) {
            let obj: Vec<f64> = (0..s.free.len()).map(|_| rng.sample(StandardNormal)).collect();
            sols.push(s.solve(&obj)?);
        }
        let mut spread: f64 = 0.0;
        for a in 0..sols.len() {
            for b in (a + 1)..sols.len() {
                spread = spread.max((&sols[a] - &sols[b]).frobenius_norm());
            }
        }
        if spread > UNIQUENESS_TOL {
            return Err(ExtensionError::NonUnique { spread });
        }
        (sols.swap_remove(0), spread)
    };
    let slack = s.slack(&density)?;
    if slack < -tol {
        return Err(ExtensionError::Infeasible { violation: -slack });
    }
    Ok(DominatingFunctional { density, spread, slack })
}

#[derive(Clone, Debug)]
pub struct PositiveExtension {
    pub map: PositiveMapOnMatrices,
    /// `max |Φ(E_ij) − ρ(E_ij)|` over the pattern.
    pub extension_error: f64,
    /// `max |σ_{h+k} + σ_{h−k} − 2σ_h − 2σ_k|` over grid pairs.
    pub parallelogram_residual: f64,
    /// Largest uniqueness spread over the grid.
    pub uniqueness_spread: f64,
}

/// `Φ: M_n → M_d` extending `ρ`, assembled from dominating functionals on
/// the polarization grid of `C^d`.
pub fn positive_extension(
    rep: &PatternRepresentation,
    objectives: usize,
    seed: u64,
) -> Result<PositiveExtension, ExtensionError> {
    let n = rep.pattern().n();
    let d = rep.dim();
    let grid = polarization_grid(d);
    let functionals: Vec<DominatingFunctional> = grid
        .par_iter()
        .enumerate()
        .map(|(g, h)| dominating_functional(rep, h, objectives, seed.wrapping_add(g as u64)))
        .collect::<Result<_, _>>()?;
    let sigmas: Vec<ComplexMatrix> = functionals.iter().map(|f| f.density.clone()).collect();

    let mut residual: f64 = 0.0;
    let mut slot = d;
    for p in 0..d {
        for q in (p + 1)..d {
            let base = &(&sigmas[p] + &sigmas[q]).scale_real(2.0);
            for pair in [(slot, slot + 1), (slot + 2, slot + 3)] {
                let lhs = &sigmas[pair.0] + &sigmas[pair.1];
                residual = residual.max((&lhs - base).max_abs());
            }
            slot += 4;
        }
    }
    if residual > PARALLELOGRAM_TOL {
        return Err(ExtensionError::ParallelogramViolation { residual });
    }

    let map = assemble_from_grid(n, d, &sigmas);
    let extension_error = rep.units().map(|((i, j), img)| (&map.block(i, j) - img).max_abs()).fold(0.0, f64::max);
    let uniqueness_spread = functionals.iter().map(|f| f.spread).fold(0.0, f64::max);
    Ok(PositiveExtension { map, extension_error, parallelogram_residual: residual, uniqueness_spread })
}

/// Smallest eigenvalue of `Φ(a*a) − ρ(a)*ρ(a)` and `Φ(aa*) − ρ(a)ρ(a)*` over
/// random pattern elements of norm one.
pub fn schwarz_gaps(
    rep: &PatternRepresentation,
    map: &PositiveMapOnMatrices,
    samples: usize,
    seed: u64,
) -> Result<f64, ExtensionError> {
    let mut rng = substream(seed, 0);
    let mut min = f64::INFINITY;
    for _ in 0..samples {
        let a = random_pattern_element(&mut rng, rep.pattern());
        let a = a.scale_real(1.0 / operator_norm(&a));
        let r = rep.apply(&a);
        let left = &map.apply(&a.adjoint().matmul(&a)) - &r.adjoint().matmul(&r);
        let right = &map.apply(&a.matmul(&a.adjoint())) - &r.matmul(&r.adjoint());
        min = min.min(herm_eig(&left.hermitian_part())?.min()).min(herm_eig(&right.hermitian_part())?.min());
    }
    Ok(min)
}
