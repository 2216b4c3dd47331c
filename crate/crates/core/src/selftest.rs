//! The numerical acceptance checks, runnable from the library or the CLI.
//!
//! Every criterion is deterministic for a given seed and reports one
//! pass/fail outcome with a short summary of the measured worst case.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::domination::{
    cb_level_table, dominating_state, domination_slack, two_summing_norm, witness_family, DominationError, Side,
    SubspaceMap,
};
use crate::extension::{
    assemble_positive_map, dominating_functional, naimark_dilate, polarization_reconstruct, positive_extension,
    random_povm, rn_margin, schwarz_gaps, PatternRepresentation, PositiveMapOnMatrices,
};
use crate::factor::{refute_logmodular, residual, structured_cholesky};
use crate::linalg::{inner, poly_roots, ComplexMatrix, C64, ONE, ZERO};
use crate::outer::{fejer_riesz, fejer_riesz_error, outer_function, AnalyticPoly, BoundaryFunction, TrigPoly};
use crate::pattern::{decide_logmodular, enumerate_patterns, LogmodularVerdict, Pattern};
use crate::sampling::{random_isometry, random_matrix, random_pd, random_unit_vector, random_vector, substream};

pub const CRITERIA: usize = 9;

const NAMES: [&str; CRITERIA] = [
    "logmodular iff block upper triangular (n <= 4)",
    "Pietsch duality",
    "witness family attains a2; sampled levels stay below",
    "dominating state",
    "polarization and positive-map assembly",
    "Naimark dilation",
    "row/column contractivity bootstrap",
    "positive extension",
    "Fejer-Riesz and outer factorization",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SelftestError {
    #[error("unknown criterion {0}; expected 1 to {CRITERIA}")]
    UnknownCriterion(usize),
}

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    /// `criterion 3 [PASS] name: detail (1.2 s)`
    pub fn line(&self) -> String {
        format!(
            "criterion {} [{}] {}: {} ({:.1} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

pub fn criterion_name(id: usize) -> Option<&'static str> {
    id.checked_sub(1).and_then(|k| NAMES.get(k)).copied()
}

type Check = Result<(bool, String), String>;

pub fn run_criterion(id: usize, seed: u64) -> Result<CriterionOutcome, SelftestError> {
    let name = criterion_name(id).ok_or(SelftestError::UnknownCriterion(id))?;
    let start = Instant::now();
    let seed = seed.wrapping_add(id as u64 * 0x9e37_79b9);
    let result = match id {
        1 => logmodular_iff(seed),
        2 => pietsch_duality(seed),
        3 => level_equality(seed),
        4 => state_domination(seed),
        5 => polarization(seed),
        6 => naimark(seed),
        7 => bootstrap(seed),
        8 => extension(seed),
        _ => fejer_outer(seed),
    };
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    Ok(CriterionOutcome { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() })
}

pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    (1..=CRITERIA).map(|id| run_criterion(id, seed).expect("id in range")).collect()
}

enum PatternCheck {
    Yes { residual: f64, outside: f64 },
    No { floor: f64 },
}

fn logmodular_iff(seed: u64) -> Check {
    let mut worst_residual: f64 = 0.0;
    let mut worst_outside: f64 = 0.0;
    let mut min_floor = f64::INFINITY;
    let (mut yes, mut no) = (0, 0);
    let mut counts = Vec::new();
    for n in 1..=4 {
        let patterns = enumerate_patterns(n).map_err(|e| e.to_string())?;
        counts.push(patterns.len());
        let checks: Vec<PatternCheck> = patterns
            .par_iter()
            .enumerate()
            .map(|(k, p)| -> Result<PatternCheck, String> {
                let stream = (n * 1000 + k) as u64;
                match decide_logmodular(p).map_err(|e| e.to_string())? {
                    LogmodularVerdict::Logmodular(cert) => {
                        let mut rng = substream(seed, stream);
                        let (mut res, mut outside): (f64, f64) = (0.0, 0.0);
                        for _ in 0..100 {
                            let mat = random_pd(&mut rng, n, 0.1);
                            let a = structured_cholesky(&mat, &cert).map_err(|e| e.to_string())?;
                            res = res.max(residual(&a, &mat));
                            for i in 0..n {
                                for j in 0..n {
                                    if !p.contains(i, j) {
                                        outside = outside.max(a[(i, j)].norm());
                                    }
                                }
                            }
                        }
                        Ok(PatternCheck::Yes { residual: res, outside })
                    }
                    LogmodularVerdict::NotLogmodular { witness } => {
                        let r = refute_logmodular(p, witness, seed ^ stream).map_err(|e| e.to_string())?;
                        Ok(PatternCheck::No { floor: r.floor })
                    }
                }
            })
            .collect::<Result<_, _>>()?;
        for c in checks {
            match c {
                PatternCheck::Yes { residual, outside } => {
                    yes += 1;
                    worst_residual = worst_residual.max(residual);
                    worst_outside = worst_outside.max(outside);
                }
                PatternCheck::No { floor } => {
                    no += 1;
                    min_floor = min_floor.min(floor);
                }
            }
        }
    }
    let passed = counts[2] == 29 && worst_residual <= 1e-8 && worst_outside == 0.0 && min_floor >= 0.1;
    Ok((
        passed,
        format!(
            "patterns per n {counts:?}; {yes} logmodular, max residual {worst_residual:.2e}; {no} refuted, min floor {min_floor:.3}"
        ),
    ))
}

fn random_function_map<R: Rng + ?Sized>(rng: &mut R) -> Result<SubspaceMap, DominationError> {
    let d = rng.random_range(1..=6);
    let points = rng.random_range(d..=20);
    let k = rng.random_range(1..=6);
    let basis = (0..d).map(|_| random_vector(rng, points)).collect();
    let images = (0..d).map(|_| random_vector(rng, k)).collect();
    SubspaceMap::functions(basis, images)
}

const INSTANCES: usize = 100;
const SOLVE_TOL: f64 = 1e-9;

fn pietsch_duality(seed: u64) -> Check {
    let rows: Vec<(f64, f64)> = (0..INSTANCES)
        .into_par_iter()
        .map(|k| -> Result<(f64, f64), String> {
            let mut rng = substream(seed, k as u64);
            let psi = random_function_map(&mut rng).map_err(|e| e.to_string())?;
            let cert = two_summing_norm(&psi, SOLVE_TOL).map_err(|e| e.to_string())?;
            let gap = cert.gap / (1.0 + cert.value * cert.value);
            let mut slack = f64::INFINITY;
            for _ in 0..1000 {
                let alpha = random_vector(&mut rng, psi.dim());
                let f = psi.function(&alpha).map_err(|e| e.to_string())?;
                let sup = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let alpha: Vec<C64> = alpha.iter().map(|a| a / sup).collect();
                slack = slack.min(domination_slack(&psi, &cert, &alpha).map_err(|e| e.to_string())?);
            }
            Ok((gap, slack))
        })
        .collect::<Result<_, _>>()?;
    let gap = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let slack = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Ok((
        gap <= 1e-6 && slack >= -1e-8,
        format!("{INSTANCES} instances; max gap/(1+a2^2) {gap:.2e}; min domination slack {slack:.2e}"),
    ))
}

fn level_equality(seed: u64) -> Check {
    let rows: Vec<(f64, f64)> = (0..INSTANCES)
        .into_par_iter()
        .map(|k| -> Result<(f64, f64), String> {
            // Same instances as the duality check.
            let mut rng = substream(seed.wrapping_sub(0x9e37_79b9), k as u64);
            let psi = random_function_map(&mut rng).map_err(|e| e.to_string())?;
            let cert = two_summing_norm(&psi, SOLVE_TOL).map_err(|e| e.to_string())?;
            let family = witness_family(&psi, Side::Row, &cert.dual).map_err(|e| e.to_string())?;
            let miss = (family.ratio - cert.value).abs();
            let mut excess = f64::NEG_INFINITY;
            for side in [Side::Row, Side::Column] {
                let table = cb_level_table(&psi, side, 2, psi.dim(), 10, seed ^ k as u64);
                for v in table.iter().flatten() {
                    excess = excess.max(v - cert.value);
                }
            }
            Ok((miss, excess))
        })
        .collect::<Result<_, _>>()?;
    let miss = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let excess = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    Ok((
        miss <= 1e-6 && excess <= 1e-8,
        format!("max |witness ratio - a2| {miss:.2e}; max sampled level - a2 {excess:.2e}"),
    ))
}

fn first_row_map(m: usize) -> Result<SubspaceMap, DominationError> {
    let mut basis = Vec::with_capacity(m * m);
    let mut images = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            basis.push(ComplexMatrix::unit(m, i, j));
            let mut h = vec![ZERO; m];
            if i == 0 {
                h[j] = ONE;
            }
            images.push(h);
        }
    }
    SubspaceMap::matrices(m, basis, images)
}

fn state_domination(_seed: u64) -> Check {
    let mut worst_value: f64 = 0.0;
    let mut worst_slack = f64::INFINITY;
    let mut scaled_min = f64::INFINITY;
    for m in 1..=6 {
        let psi = first_row_map(m).map_err(|e| e.to_string())?;
        let cert = dominating_state(&psi, Side::Row, SOLVE_TOL).map_err(|e| e.to_string())?;
        worst_value = worst_value.max((cert.value - 1.0).abs());
        worst_slack = worst_slack.min(cert.slack);
        match dominating_state(&psi.scaled(2.0), Side::Row, SOLVE_TOL) {
            Ok(c) => scaled_min = scaled_min.min(c.value),
            Err(DominationError::Infeasible { .. }) => {}
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok((
        worst_value <= 1e-6 && worst_slack >= -1e-8 && scaled_min >= 2.0 - 1e-6,
        format!("m = 1..6: max |value - 1| {worst_value:.2e}, min slack {worst_slack:.2e}; doubled map min value {scaled_min:.6}"),
    ))
}

fn polarization(seed: u64) -> Check {
    let mut form_err: f64 = 0.0;
    let mut map_err: f64 = 0.0;
    for k in 0..100 {
        let mut rng = substream(seed, k);
        let d = rng.random_range(1..=6);
        let t0 = random_matrix(&mut rng, d, d);
        let t = polarization_reconstruct(d, |h| inner(&t0.mul_vec(h), h)).map_err(|e| e.to_string())?;
        form_err = form_err.max((&t - &t0).max_abs());

        let m = rng.random_range(1..=6);
        let d = rng.random_range(1..=m);
        let v = random_isometry(&mut rng, m, d);
        let map = assemble_positive_map(m, d, |h| {
            let vh = v.mul_vec(h);
            Ok(ComplexMatrix::outer(&vh, &vh))
        })
        .map_err(|e| e.to_string())?;
        map_err = map_err.max(map.distance(&PositiveMapOnMatrices::compression(&v)));
    }
    Ok((
        form_err <= 1e-10 && map_err <= 1e-8,
        format!("100 rounds: form error {form_err:.2e}, positive-map error {map_err:.2e}"),
    ))
}

fn naimark(seed: u64) -> Check {
    let mut iso: f64 = 0.0;
    let mut comp: f64 = 0.0;
    for k in 0..100 {
        let mut rng = substream(seed, k);
        let d = rng.random_range(1..=6);
        let outcomes = rng.random_range(1..=8);
        let povm = random_povm(&mut rng, d, outcomes).map_err(|e| e.to_string())?;
        let dil = naimark_dilate(&povm).map_err(|e| e.to_string())?;
        iso = iso.max(dil.isometry_defect());
        comp = comp.max(dil.compression_defect(&povm));
    }
    Ok((iso <= 1e-8 && comp <= 1e-8, format!("100 POVMs: |V*V - I| {iso:.2e}, |V*E V - F| {comp:.2e}")))
}

fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Identity, corner and identity ⊕ corner representations of every block
/// upper triangular pattern with `n ≤ 5`; the corner needs a first block of
/// size one.
pub fn builtin_representations() -> Vec<(String, PatternRepresentation)> {
    let mut out = Vec::new();
    for n in 1..=5 {
        for sizes in compositions(n) {
            let p = Pattern::block_upper_triangular(&sizes).expect("valid block sizes");
            let id = PatternRepresentation::identity(p.clone());
            out.push((format!("identity {sizes:?}"), id.clone()));
            if sizes[0] == 1 {
                let corner = PatternRepresentation::corner(p, 0).expect("first block is a singleton");
                out.push((format!("corner {sizes:?}"), corner.clone()));
                out.push((format!("identity+corner {sizes:?}"), id.direct_sum(&corner).expect("same pattern")));
            }
        }
    }
    out
}

fn bootstrap(seed: u64) -> Check {
    let reps = builtin_representations();
    let margins: Vec<(f64, f64)> = reps
        .par_iter()
        .map(|(_, rep)| {
            let two = [Side::Row, Side::Column].iter().map(|&s| rn_margin(rep, s, 2, 2000, seed)).fold(f64::INFINITY, f64::min);
            let all = (1..=8)
                .flat_map(|n| [Side::Row, Side::Column].map(|s| (n, s)))
                .map(|(n, s)| rn_margin(rep, s, n, 2000, seed))
                .fold(f64::INFINITY, f64::min);
            (two, all)
        })
        .collect();
    let two = margins.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    let all = margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    Ok((
        two >= -1e-8 && all >= -1e-7,
        format!("{} representations: min 2-margin {two:.2e}, min margin n <= 8 {all:.2e}", reps.len()),
    ))
}

#[derive(Default)]
struct ExtensionStats {
    extension: f64,
    schwarz: f64,
    parallelogram: f64,
    spread: f64,
    identity: f64,
    consistency: f64,
    positivity: f64,
}

fn extension(seed: u64) -> Check {
    let reps = builtin_representations();
    let stats: Vec<ExtensionStats> = reps
        .par_iter()
        .enumerate()
        .map(|(k, (name, rep))| -> Result<ExtensionStats, String> {
            let ext = positive_extension(rep, 5, seed).map_err(|e| format!("{name}: {e}"))?;
            let schwarz = schwarz_gaps(rep, &ext.map, 100, seed ^ k as u64).map_err(|e| e.to_string())?;
            let identity = if name.starts_with("identity [") {
                ext.map.distance(&PositiveMapOnMatrices::identity(rep.pattern().n()))
            } else {
                0.0
            };
            let mut rng = substream(seed, 10_000 + k as u64);
            let mut consistency: f64 = 0.0;
            for t in 0..50 {
                let n = rep.pattern().n();
                let b = random_matrix(&mut rng, n, n);
                let h = random_unit_vector(&mut rng, rep.dim());
                let phi = dominating_functional(rep, &h, 5, seed ^ t).map_err(|e| e.to_string())?;
                let direct = phi.density.matmul(&b).trace();
                let via_map = inner(&ext.map.apply(&b).mul_vec(&h), &h);
                consistency = consistency.max((direct - via_map).norm());
            }
            let positivity = ext.map.block_positivity(200, seed).map_err(|e| e.to_string())?;
            Ok(ExtensionStats {
                extension: ext.extension_error,
                schwarz,
                parallelogram: ext.parallelogram_residual,
                spread: ext.uniqueness_spread,
                identity,
                consistency,
                positivity,
            })
        })
        .collect::<Result<_, _>>()?;
    let max = |f: fn(&ExtensionStats) -> f64| stats.iter().map(f).fold(0.0, f64::max);
    let min = |f: fn(&ExtensionStats) -> f64| stats.iter().map(f).fold(f64::INFINITY, f64::min);
    let s = ExtensionStats {
        extension: max(|s| s.extension),
        schwarz: min(|s| s.schwarz),
        parallelogram: max(|s| s.parallelogram),
        spread: max(|s| s.spread),
        identity: max(|s| s.identity),
        consistency: max(|s| s.consistency),
        positivity: min(|s| s.positivity),
    };
    let passed = s.extension <= 1e-7
        && s.schwarz >= -1e-7
        && s.parallelogram <= 1e-6
        && s.spread <= 1e-6
        && s.identity <= 1e-7
        && s.consistency <= 1e-6
        && s.positivity >= -1e-9;
    Ok((
        passed,
        format!(
            "{} representations: extension {:.1e}, Schwarz gap {:.1e}, parallelogram {:.1e}, spread {:.1e}, identity {:.1e}, consistency {:.1e}, positivity {:.1e}",
            reps.len(),
            s.extension,
            s.schwarz,
            s.parallelogram,
            s.spread,
            s.identity,
            s.consistency,
            s.positivity
        ),
    ))
}

/// Smooth positive test functions for the outer factorization.
pub fn smooth_positive_functions() -> Vec<(&'static str, fn(f64) -> f64)> {
    vec![
        ("exp(cos t)", |t| t.cos().exp()),
        ("2 + sin t", |t| 2.0 + t.sin()),
        ("3 + cos 3t - sin(5t)/2", |t| 3.0 + (3.0 * t).cos() - 0.5 * (5.0 * t).sin()),
        ("1/(1.5 + cos t)", |t| 1.0 / (1.5 + t.cos())),
    ]
}

fn fejer_outer(seed: u64) -> Check {
    let mut fr_err: f64 = 0.0;
    let mut min_root = f64::INFINITY;
    for k in 0..200 {
        let mut rng = substream(seed, k);
        let m = rng.random_range(1..=16);
        let q0 = AnalyticPoly::new(random_vector(&mut rng, m + 1)).map_err(|e| e.to_string())?;
        // Normalize so that sup p = 1.
        let sup = TrigPoly::modulus_squared(&q0).grid_values(4096).into_iter().fold(0.0, f64::max);
        let q0 = AnalyticPoly::new(q0.coeffs().iter().map(|c| c / sup.sqrt()).collect()).map_err(|e| e.to_string())?;
        let p = TrigPoly::modulus_squared(&q0);
        let q = fejer_riesz(&p, 1e-9).map_err(|e| e.to_string())?;
        fr_err = fr_err.max(fejer_riesz_error(&p, &q));
        if q.degree() > 0 {
            let roots = poly_roots(q.coeffs()).map_err(|e| e.to_string())?;
            min_root = min_root.min(roots.iter().map(|r| r.norm()).fold(f64::INFINITY, f64::min));
        }
    }
    let mut outer_err: f64 = 0.0;
    for (_, f) in smooth_positive_functions() {
        let samples = BoundaryFunction::from_fn(12, f).map_err(|e| e.to_string())?;
        let a = outer_function(&samples).map_err(|e| e.to_string())?;
        outer_err = outer_err.max(a.midpoint_error(f)).max(a.grid_error(&samples));
    }
    Ok((
        fr_err <= 1e-8 && min_root >= 1.0 - 1e-7 && outer_err <= 1e-6,
        format!("200 round trips: error {fr_err:.2e}, min root modulus {min_root:.6}; outer at N = 4096: error {outer_err:.2e}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_cover_every_criterion() {
        for id in 1..=CRITERIA {
            assert!(criterion_name(id).is_some());
        }
        assert_eq!(run_criterion(0, 0).unwrap_err(), SelftestError::UnknownCriterion(0));
        assert_eq!(run_criterion(10, 0).unwrap_err(), SelftestError::UnknownCriterion(10));
    }

    #[test]
    fn composition_counts() {
        assert_eq!(compositions(4).len(), 8);
        // 31 compositions of n <= 5, 16 of them start with a 1.
        assert_eq!(builtin_representations().len(), 31 + 2 * 16);
    }
}
