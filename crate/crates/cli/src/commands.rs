//! One function per subcommand. Each returns a JSON report and whether the
//! answer was a principled "no".

use std::path::{Path, PathBuf};

use logmod::domination::{dominating_state, two_summing_norm, DominationError, DEFAULT_TOL};
use logmod::extension::{positive_extension, schwarz_gaps, ExtensionError};
use logmod::factor::{factor_attempt, refute_logmodular, residual, structured_cholesky, FactorError};
use logmod::factor::{REFUTE_ITERS, REFUTE_STARTS};
use logmod::outer::{fejer_riesz, fejer_riesz_error, logmodular_witness, upsample, BoundaryFunction, OuterError};
use logmod::pattern::decide_logmodular;
use logmod::sampling::{random_pd, rng_from_seed};
use logmod::selftest::{run_criterion, CRITERIA};
use logmod::{LogmodularVerdict, PatternError};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::io::{
    self, BoundaryFile, CoeffsFile, FunctionMapFile, IoError, MatrixFile, MatrixMapFile, MeasureCertificateFile,
    PatternFile, PositiveMapFile, RepresentationFile, SideName, StateCertificateFile,
};

/// Random positive definite matrices factored to cross-check a "yes".
const CROSS_CHECKS: usize = 10;
/// Certified gap allowed by the domination contract, relative to `1 + value²`.
const GAP_CONTRACT: f64 = 1e-6;
const POSITIVITY_SAMPLES: usize = 200;
const SCHWARZ_SAMPLES: usize = 100;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 64,
            CliError::Io(IoError::Read { .. } | IoError::Parse { .. }) => 64,
            CliError::Io(_) | CliError::Numeric(_) => 65,
        }
    }
}

/// Options shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Workspace {
    pub seed: u64,
    pub tol_psd: Option<f64>,
    pub tol_gap: Option<f64>,
    pub tol_recon: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Workspace {
    pub fn validate(&self) -> Result<(), CliError> {
        for (name, t) in [("--tol-psd", self.tol_psd), ("--tol-gap", self.tol_gap), ("--tol-recon", self.tol_recon)] {
            if let Some(t) = t {
                if !(t.is_finite() && t > 0.0) {
                    return Err(CliError::Usage(format!("{name} must be positive, got {t}")));
                }
            }
        }
        Ok(())
    }

    /// Writes `artifact` to `--out` and notes the path, or inlines it.
    fn attach<T: Serialize>(&self, report: &mut Value, artifact: &T) -> Result<(), CliError> {
        match &self.out {
            Some(path) => {
                io::write(path, artifact)?;
                report["output"] = json!(path.display().to_string());
            }
            None => {
                report["result"] = serde_json::to_value(artifact).map_err(|e| IoError::Emit(e.to_string()))?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Negative,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Negative => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    /// `None` when the command already printed its output.
    pub body: Option<Value>,
    pub outcome: Outcome,
}

impl Report {
    fn json(body: Value, outcome: Outcome) -> Self {
        Self { body: Some(body), outcome }
    }
}

fn input<E: ToString>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn one_based(p: (usize, usize)) -> [usize; 2] {
    [p.0 + 1, p.1 + 1]
}

fn factor_error(e: FactorError) -> CliError {
    match e {
        FactorError::NotPsd { .. } | FactorError::DimensionMismatch(_) | FactorError::WitnessInvalid { .. } => input(e),
        FactorError::Pattern(p) => input(p),
        other => CliError::Numeric(other.to_string()),
    }
}

fn domination_error(e: DominationError) -> CliError {
    match e {
        DominationError::InvalidMap(_) | DominationError::InvalidProblem(_) | DominationError::WrongDomain { .. } => {
            input(e)
        }
        other => CliError::Numeric(other.to_string()),
    }
}

pub fn decide(ws: &Workspace, pattern: &Path) -> Result<Report, CliError> {
    let p = io::read::<PatternFile>(pattern)?.to_pattern().map_err(input)?;
    let verdict = decide_logmodular(&p).map_err(input)?;
    let mut report = json!({ "command": "decide", "seed": ws.seed, "n": p.n() });
    match verdict {
        LogmodularVerdict::Logmodular(cert) => {
            let tol = ws.tol_recon.unwrap_or(1e-8);
            let mut rng = rng_from_seed(ws.seed);
            let mut worst: f64 = 0.0;
            for _ in 0..CROSS_CHECKS {
                let mat = random_pd(&mut rng, p.n(), 0.1);
                let a = structured_cholesky(&mat, &cert).map_err(factor_error)?;
                worst = worst.max(residual(&a, &mat) / (1.0 + mat.frobenius_norm()));
            }
            report["verdict"] = json!("logmodular");
            report["permutation"] = json!(cert.permutation().iter().map(|k| k + 1).collect::<Vec<_>>());
            report["blocks"] = json!(cert.block_sizes());
            report["cross_check"] = json!({ "factored": CROSS_CHECKS, "max_relative_residual": worst, "tolerance": tol });
            if worst > tol {
                return Err(CliError::Numeric(format!("structured factor residual {worst:.3e} exceeds {tol:e}")));
            }
            Ok(Report::json(report, Outcome::Success))
        }
        LogmodularVerdict::NotLogmodular { witness } => {
            let refutation = refute_logmodular(&p, witness, ws.seed).map_err(factor_error)?;
            report["verdict"] = json!("not logmodular");
            report["witness"] = json!(one_based(witness));
            report["cross_check"] = json!({ "residual_floor": refutation.floor, "starts": REFUTE_STARTS });
            Ok(Report::json(report, Outcome::Negative))
        }
    }
}

pub fn factor(ws: &Workspace, matrix: &Path, pattern: &Path) -> Result<Report, CliError> {
    let mat = io::read::<MatrixFile>(matrix)?.to_matrix().map_err(input)?;
    let p = io::read::<PatternFile>(pattern)?.to_pattern().map_err(input)?;
    let tol = ws.tol_recon.unwrap_or(1e-8) * (1.0 + mat.frobenius_norm());
    let (route, a) = match decide_logmodular(&p) {
        Ok(LogmodularVerdict::Logmodular(cert)) => ("structured", structured_cholesky(&mat, &cert).map_err(factor_error)?),
        Ok(LogmodularVerdict::NotLogmodular { .. }) | Err(PatternError::NotTransitive { .. }) => {
            let r = factor_attempt(&mat, &p, REFUTE_STARTS, REFUTE_ITERS, ws.seed).map_err(factor_error)?;
            ("descent", r.factor)
        }
        Err(e) => return Err(input(e)),
    };
    let res = residual(&a, &mat);
    let mut report = json!({
        "command": "factor",
        "seed": ws.seed,
        "route": route,
        "residual": res,
        "tolerance": tol,
    });
    ws.attach(&mut report, &MatrixFile::from_matrix(&a))?;
    match (route, res <= tol) {
        (_, true) => Ok(Report::json(report, Outcome::Success)),
        ("structured", false) => Err(CliError::Numeric(format!("structured factor residual {res:.3e} exceeds {tol:.3e}"))),
        _ => Ok(Report::json(report, Outcome::Negative)),
    }
}

pub fn fejer(ws: &Workspace, coeffs: &Path) -> Result<Report, CliError> {
    let p = io::read::<CoeffsFile>(coeffs)?.to_trig().map_err(input)?;
    let mut report = json!({ "command": "fejer", "degree": p.degree() });
    let q = match fejer_riesz(&p, ws.tol_psd.unwrap_or(1e-9)) {
        Ok(q) => q,
        Err(OuterError::NotNonnegative { min }) => {
            report["verdict"] = json!("not nonnegative");
            report["minimum"] = json!(min);
            return Ok(Report::json(report, Outcome::Negative));
        }
        Err(e @ (OuterError::BadCoefficients(_) | OuterError::DegenerateLeading)) => return Err(input(e)),
        Err(e) => return Err(CliError::Numeric(e.to_string())),
    };
    let scale = p.grid_values(1024).into_iter().fold(0.0, f64::max);
    let err = fejer_riesz_error(&p, &q);
    let tol = ws.tol_recon.unwrap_or(1e-8) * (1.0 + scale);
    report["error"] = json!(err);
    report["tolerance"] = json!(tol);
    ws.attach(&mut report, &CoeffsFile::from_analytic(&q))?;
    if err > tol {
        return Err(CliError::Numeric(format!("reconstruction error {err:.3e} exceeds {tol:.3e}")));
    }
    Ok(Report::json(report, Outcome::Success))
}

pub fn outer(ws: &Workspace, samples: &Path, eps: f64) -> Result<Report, CliError> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(CliError::Usage(format!("--eps must be positive, got {eps}")));
    }
    let f = io::read::<BoundaryFile>(samples)?.to_function().map_err(input)?;
    let mut report = json!({ "command": "outer", "grid_log2": f.grid_log2(), "eps": eps });
    let a = match logmodular_witness(&f, eps) {
        Ok(a) => a,
        Err(OuterError::NotPositive { min, floor }) => {
            report["verdict"] = json!("not positive");
            report["minimum"] = json!(min);
            report["floor"] = json!(floor);
            return Ok(Report::json(report, Outcome::Negative));
        }
        Err(e @ (OuterError::NotReal { .. } | OuterError::BadGrid(_))) => return Err(input(e)),
        Err(e) => return Err(CliError::Numeric(e.to_string())),
    };
    let numeric = |e: OuterError| CliError::Numeric(e.to_string());
    let midpoint = a.interpolation_error(&f).map_err(numeric)?;
    let center = a.center_value();
    report["factor_grid_log2"] = json!(a.grid_log2());
    report["center_value"] = json!([center.re, center.im]);
    report["winding_number"] = json!(a.winding_number());
    report["grid_error"] = json!(a.grid_error(&on_grid(&f, a.grid_log2()).map_err(numeric)?));
    report["midpoint_error"] = json!(midpoint);
    ws.attach(&mut report, &BoundaryFile::from_function(&a.to_boundary()))?;
    Ok(Report::json(report, Outcome::Success))
}

/// The samples interpolated up to the factor's grid.
fn on_grid(f: &BoundaryFunction, grid_log2: u32) -> Result<BoundaryFunction, OuterError> {
    let mut g = f.clone();
    while g.grid_log2() < grid_log2 {
        g = upsample(&g)?;
    }
    Ok(g)
}

fn check_certificate(value: f64, gap: f64, slack: f64, tol_psd: f64) -> Result<(), CliError> {
    let allowed = GAP_CONTRACT * (1.0 + value * value);
    if gap > allowed {
        return Err(CliError::Numeric(format!("certified gap {gap:.3e} exceeds {allowed:.3e}")));
    }
    if slack < -tol_psd {
        return Err(CliError::Numeric(format!("domination slack {slack:.3e} is below -{tol_psd:e}")));
    }
    Ok(())
}

pub fn a2(ws: &Workspace, instance: &Path) -> Result<Report, CliError> {
    let psi = io::read::<FunctionMapFile>(instance)?.to_map().map_err(input)?;
    let cert = two_summing_norm(&psi, ws.tol_gap.unwrap_or(DEFAULT_TOL)).map_err(domination_error)?;
    let tol_psd = ws.tol_psd.unwrap_or(1e-8);
    let file = MeasureCertificateFile {
        value: cert.value,
        weights: cert.weights().unwrap_or_default().to_vec(),
        dual: MatrixFile::from_matrix(&cert.dual),
        gap: cert.gap,
        slack: cert.slack,
    };
    let mut report = json!({ "command": "a2", "value": cert.value, "gap": cert.gap, "slack": cert.slack });
    ws.attach(&mut report, &file)?;
    check_certificate(cert.value, cert.gap, cert.slack, tol_psd)?;
    Ok(Report::json(report, Outcome::Success))
}

pub fn dominate(ws: &Workspace, instance: &Path, side: SideName) -> Result<Report, CliError> {
    let psi = io::read::<MatrixMapFile>(instance)?.to_map().map_err(input)?;
    let cert = dominating_state(&psi, side.into(), ws.tol_gap.unwrap_or(DEFAULT_TOL)).map_err(domination_error)?;
    let tol_psd = ws.tol_psd.unwrap_or(1e-8);
    let density = cert.density().ok_or_else(|| CliError::Numeric("solver returned no state".into()))?;
    let file = StateCertificateFile {
        side,
        value: cert.value,
        density: MatrixFile::from_matrix(density),
        dual: MatrixFile::from_matrix(&cert.dual),
        gap: cert.gap,
        slack: cert.slack,
    };
    let mut report = json!({
        "command": "dominate",
        "side": side,
        "value": cert.value,
        "gap": cert.gap,
        "slack": cert.slack,
    });
    ws.attach(&mut report, &file)?;
    check_certificate(cert.value, cert.gap, cert.slack, tol_psd)?;
    Ok(Report::json(report, Outcome::Success))
}

pub fn extend(ws: &Workspace, representation: &Path, objectives: usize) -> Result<Report, CliError> {
    if objectives == 0 {
        return Err(CliError::Usage("--objectives must be at least 1".into()));
    }
    let rep = io::read::<RepresentationFile>(representation)?.to_representation().map_err(input)?;
    let mut report = json!({ "command": "extend", "seed": ws.seed, "n": rep.pattern().n(), "dim": rep.dim() });
    let ext = match positive_extension(&rep, objectives, ws.seed) {
        Ok(ext) => ext,
        Err(e @ (ExtensionError::Infeasible { .. } | ExtensionError::NonUnique { .. })) => {
            report["verdict"] = json!(match e {
                ExtensionError::Infeasible { .. } => "no dominating functional",
                _ => "functional not unique",
            });
            report["detail"] = json!(e.to_string());
            return Ok(Report::json(report, Outcome::Negative));
        }
        Err(e @ ExtensionError::BadShape(_)) => return Err(input(e)),
        Err(e) => return Err(CliError::Numeric(e.to_string())),
    };
    let tol_recon = ws.tol_recon.unwrap_or(1e-7);
    let tol_psd = ws.tol_psd.unwrap_or(1e-7);
    let numeric = |e: ExtensionError| CliError::Numeric(e.to_string());
    let positivity = ext.map.block_positivity(POSITIVITY_SAMPLES, ws.seed).map_err(numeric)?;
    let schwarz = schwarz_gaps(&rep, &ext.map, SCHWARZ_SAMPLES, ws.seed).map_err(numeric)?;
    report["extension_error"] = json!(ext.extension_error);
    report["parallelogram_residual"] = json!(ext.parallelogram_residual);
    report["uniqueness_spread"] = json!(ext.uniqueness_spread);
    report["block_positivity"] = json!(positivity);
    report["schwarz_gap"] = json!(schwarz);
    ws.attach(&mut report, &PositiveMapFile::from_map(&ext.map))?;
    if ext.extension_error > tol_recon {
        return Err(CliError::Numeric(format!("extension error {:.3e} exceeds {tol_recon:e}", ext.extension_error)));
    }
    if positivity < -tol_psd || schwarz < -tol_psd {
        return Err(CliError::Numeric(format!(
            "positivity checks fail: block {positivity:.3e}, Schwarz {schwarz:.3e}"
        )));
    }
    Ok(Report::json(report, Outcome::Success))
}

/// Prints one line per criterion as it finishes.
pub fn selftest(ws: &Workspace, criteria: &[usize]) -> Result<Report, CliError> {
    let ids: Vec<usize> = if criteria.is_empty() { (1..=CRITERIA).collect() } else { criteria.to_vec() };
    let mut failed = Vec::new();
    for &id in &ids {
        let outcome = run_criterion(id, ws.seed).map_err(|e| CliError::Usage(e.to_string()))?;
        println!("{}", outcome.line());
        if !outcome.passed {
            failed.push(id);
        }
    }
    println!("{}/{} criteria passed (seed {})", ids.len() - failed.len(), ids.len(), ws.seed);
    if !failed.is_empty() {
        return Err(CliError::Numeric(format!("criteria {failed:?} failed")));
    }
    Ok(Report { body: None, outcome: Outcome::Success })
}
