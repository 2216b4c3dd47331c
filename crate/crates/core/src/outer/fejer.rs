use std::f64::consts::TAU;

use super::{AnalyticPoly, OuterError, TrigPoly};
use crate::linalg::{poly_eval, poly_roots, C64, ZERO};

/// Number of grid points used for nonnegativity and error checks.
pub const FEJER_GRID: usize = 4096;

const BOUNDARY_BAND: f64 = 1e-7;
const REFINE_BAND: f64 = 1e-4;

/// `max_θ | |q(e^{iθ})|² − p(θ) |` over the check grid.
pub fn fejer_riesz_error(p: &TrigPoly, q: &AnalyticPoly) -> f64 {
    (0..FEJER_GRID)
        .map(|j| {
            let theta = TAU * j as f64 / FEJER_GRID as f64;
            (q.eval_circle(theta).norm_sqr() - p.eval(theta)).abs()
        })
        .fold(0.0, f64::max)
}

/// Outer factor `q` of degree `m` with `|q(e^{iθ})|² = p(θ)` and `q(0) > 0`.
///
/// Roots of `z^m p(z)` come in pairs `r, 1/conj(r)`; the `m` of largest
/// modulus go into `q`. Near-circle roots are handled by trying both a
/// Newton refinement on `P'` and a small positive shift of `p`, keeping
/// whichever candidate reproduces `p` best.
pub fn fejer_riesz(p: &TrigPoly, tol: f64) -> Result<AnalyticPoly, OuterError> {
    let grid = p.grid_values(FEJER_GRID);
    let min = grid.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -tol {
        return Err(OuterError::NotNonnegative { min });
    }
    let m = p.degree();
    if m == 0 {
        return AnalyticPoly::new(vec![C64::new(p.coeff(0).re.max(0.0).sqrt(), 0.0)]);
    }
    if p.coeff(m as i64) == ZERO {
        return Err(OuterError::DegenerateLeading);
    }
    let sup = grid.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let target = 1e-8 * (1.0 + sup);

    let roots = poly_roots(p.coeffs())?;
    let selected = select_outer(&roots, m);
    let mut best = build(p, &selected);
    let mut best_err = fejer_riesz_error(p, &best);
    let near_circle = selected.iter().any(|r| (r.norm() - 1.0).abs() <= BOUNDARY_BAND);
    if !near_circle && best_err <= target {
        return Ok(best);
    }

    let refined = refine_boundary(p.coeffs(), &selected);
    let candidate = build(p, &refined);
    let err = fejer_riesz_error(p, &candidate);
    if err < best_err {
        best = candidate;
        best_err = err;
    }

    let delta = 1e-10 * (1.0 + sup);
    let shifted = p.add_constant(delta);
    let shifted_roots = poly_roots(shifted.coeffs())?;
    let candidate = build(&shifted, &select_outer(&shifted_roots, m));
    let err = fejer_riesz_error(p, &candidate);
    if err < best_err {
        best = candidate;
    }
    Ok(best)
}

fn select_outer(roots: &[C64], m: usize) -> Vec<C64> {
    let mut sorted = roots.to_vec();
    sorted.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    sorted.truncate(m);
    sorted
}

/// `C Π (z − r_j)` with `|C|² = c_m (−1)^m / Π conj(r_j)` and the phase of
/// `C` chosen so that `q(0) > 0`.
fn build(p: &TrigPoly, roots: &[C64]) -> AnalyticPoly {
    let m = roots.len();
    let lead = p.coeff(m as i64);
    let prod: C64 = roots.iter().map(|r| r.conj()).product();
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let modulus = (lead * sign / prod).norm().sqrt();
    let q0: C64 = roots.iter().map(|r| -r).product();
    let phase = if q0.norm() > 0.0 { q0.conj() / q0.norm() } else { C64::new(1.0, 0.0) };
    AnalyticPoly::from_roots(phase * modulus, roots)
}

/// Near-circle roots are double roots of `P`, hence simple roots of `P'`:
/// Newton on `P'` from the radial projection converges to them quadratically.
fn refine_boundary(coeffs: &[C64], roots: &[C64]) -> Vec<C64> {
    let deriv: Vec<C64> = coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect();
    roots
        .iter()
        .map(|&r| {
            if (r.norm() - 1.0).abs() > REFINE_BAND {
                return r;
            }
            let mut z = r / r.norm();
            for _ in 0..30 {
                let (d, dd) = poly_eval(&deriv, z);
                if dd == ZERO {
                    break;
                }
                let step = d / dd;
                z -= step;
                if step.norm() <= 1e-15 {
                    break;
                }
            }
            if z.re.is_finite() && z.im.is_finite() {
                z
            } else {
                r
            }
        })
        .collect()
}
