//! Primal–dual interior-point method for block semidefinite programs.
//!
//! Problems are given in the dual ("LMI") form
//!
//! ```text
//! maximize  b·y   subject to   S = C − Σ_k y_k A_k ⪰ 0
//! ```
//!
//! over blocks that are either Hermitian PSD or diagonal (LP). The paired
//! primal is `min ⟨C,X⟩` subject to `⟨A_k,X⟩ = b_k`, `X ⪰ 0`. Iterations use
//! the HKM search direction with Mehrotra's predictor–corrector.

use thiserror::Error;

use crate::linalg::{herm_eig, ComplexMatrix, LinalgError, C64, ONE};

const MAX_ITERS: usize = 120;
const INTERNAL_TOL: f64 = 1e-11;
const STEP_FRACTION: f64 = 0.98;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IpmError {
    #[error("interior-point method stalled after {iterations} iterations (primal {rel_primal:.2e}, dual {rel_dual:.2e}, gap {rel_gap:.2e})")]
    NoConvergence { iterations: usize, rel_primal: f64, rel_dual: f64, rel_gap: f64 },
    #[error("the linear matrix inequality is infeasible")]
    Infeasible { ray: Vec<BlockValue> },
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockSpec {
    Psd(usize),
    Lp(usize),
}

impl BlockSpec {
    pub fn size(self) -> usize {
        match self {
            BlockSpec::Psd(n) | BlockSpec::Lp(n) => n,
        }
    }
}

/// The value of one block of `X`, `S` or `C`.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockValue {
    Psd(ComplexMatrix),
    Lp(Vec<f64>),
}

impl BlockValue {
    pub fn zeros(spec: BlockSpec) -> Self {
        match spec {
            BlockSpec::Psd(n) => BlockValue::Psd(ComplexMatrix::zeros(n, n)),
            BlockSpec::Lp(n) => BlockValue::Lp(vec![0.0; n]),
        }
    }

    pub fn identity(spec: BlockSpec, scale: f64) -> Self {
        match spec {
            BlockSpec::Psd(n) => BlockValue::Psd(ComplexMatrix::identity(n).scale_real(scale)),
            BlockSpec::Lp(n) => BlockValue::Lp(vec![scale; n]),
        }
    }

    pub fn psd(&self) -> &ComplexMatrix {
        match self {
            BlockValue::Psd(m) => m,
            BlockValue::Lp(_) => panic!("expected a PSD block"),
        }
    }

    pub fn lp(&self) -> &[f64] {
        match self {
            BlockValue::Lp(v) => v,
            BlockValue::Psd(_) => panic!("expected an LP block"),
        }
    }

    fn norm_sqr(&self) -> f64 {
        match self {
            BlockValue::Psd(m) => m.frobenius_norm().powi(2),
            BlockValue::Lp(v) => v.iter().map(|x| x * x).sum(),
        }
    }

    fn inner(&self, other: &BlockValue) -> f64 {
        match (self, other) {
            (BlockValue::Psd(a), BlockValue::Psd(b)) => a.real_inner(b),
            (BlockValue::Lp(a), BlockValue::Lp(b)) => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            _ => panic!("block kind mismatch"),
        }
    }

    fn axpy(&mut self, s: f64, other: &BlockValue) {
        match (self, other) {
            (BlockValue::Psd(a), BlockValue::Psd(b)) => a.axpy(C64::new(s, 0.0), b),
            (BlockValue::Lp(a), BlockValue::Lp(b)) => a.iter_mut().zip(b).for_each(|(x, y)| *x += s * y),
            _ => panic!("block kind mismatch"),
        }
    }

    fn sub(&self, other: &BlockValue) -> BlockValue {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }
}

/// One block of a constraint matrix `A_k`.
#[derive(Clone, Debug, PartialEq)]
pub enum Coef {
    /// Hermitian matrix in a PSD block.
    Dense(ComplexMatrix),
    /// `scale · v v*` in a PSD block.
    RankOne { scale: f64, v: Vec<C64> },
    /// Sparse diagonal entries in an LP block.
    Diag(Vec<(usize, f64)>),
}

impl Coef {
    fn to_dense(&self) -> ComplexMatrix {
        match self {
            Coef::Dense(m) => m.clone(),
            Coef::RankOne { scale, v } => ComplexMatrix::outer(v, v).scale_real(*scale),
            Coef::Diag(_) => panic!("diagonal coefficient in a PSD block"),
        }
    }

    /// `Re tr(A W)`; valid for non-Hermitian `W` because `A` is Hermitian.
    fn apply(&self, w: &BlockValue) -> f64 {
        match (self, w) {
            (Coef::Dense(a), BlockValue::Psd(w)) => a.real_inner(w),
            (Coef::RankOne { scale, v }, BlockValue::Psd(w)) => {
                let wv = w.mul_vec(v);
                scale * v.iter().zip(&wv).map(|(a, b)| a.conj() * b).sum::<C64>().re
            }
            (Coef::Diag(entries), BlockValue::Lp(x)) => entries.iter().map(|&(i, a)| a * x[i]).sum(),
            _ => panic!("coefficient does not match block kind"),
        }
    }

    fn add_to(&self, s: f64, out: &mut BlockValue) {
        match (self, out) {
            (Coef::Dense(a), BlockValue::Psd(m)) => m.axpy(C64::new(s, 0.0), a),
            (Coef::RankOne { scale, v }, BlockValue::Psd(m)) => {
                let n = v.len();
                for i in 0..n {
                    let vi = v[i] * (s * scale);
                    for j in 0..n {
                        m[(i, j)] += vi * v[j].conj();
                    }
                }
            }
            (Coef::Diag(entries), BlockValue::Lp(x)) => {
                for &(i, a) in entries {
                    x[i] += s * a;
                }
            }
            _ => panic!("coefficient does not match block kind"),
        }
    }

    fn frobenius_norm(&self) -> f64 {
        match self {
            Coef::Dense(a) => a.frobenius_norm(),
            Coef::RankOne { scale, v } => scale.abs() * v.iter().map(|z| z.norm_sqr()).sum::<f64>(),
            Coef::Diag(e) => e.iter().map(|(_, a)| a * a).sum::<f64>().sqrt(),
        }
    }
}

/// `A_k` as a sparse list of `(block index, coefficient)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Constraint {
    pub parts: Vec<(usize, Coef)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sdp {
    pub blocks: Vec<BlockSpec>,
    pub c: Vec<BlockValue>,
    pub constraints: Vec<Constraint>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub y: Vec<f64>,
    pub x: Vec<BlockValue>,
    pub s: Vec<BlockValue>,
    /// `⟨C, X⟩`
    pub primal_objective: f64,
    /// `b·y`
    pub dual_objective: f64,
    pub iterations: usize,
    pub rel_primal: f64,
    pub rel_dual: f64,
    pub rel_gap: f64,
}

impl Sdp {
    fn validate(&self) -> Result<(), IpmError> {
        if self.c.len() != self.blocks.len() {
            return Err(IpmError::Malformed("C must have one value per block".into()));
        }
        if self.b.len() != self.constraints.len() {
            return Err(IpmError::Malformed("b must have one entry per constraint".into()));
        }
        for (spec, c) in self.blocks.iter().zip(&self.c) {
            let ok = match (spec, c) {
                (BlockSpec::Psd(n), BlockValue::Psd(m)) => m.rows() == *n && m.cols() == *n,
                (BlockSpec::Lp(n), BlockValue::Lp(v)) => v.len() == *n,
                _ => false,
            };
            if !ok {
                return Err(IpmError::Malformed("C block does not match its specification".into()));
            }
        }
        for (k, con) in self.constraints.iter().enumerate() {
            for (blk, coef) in &con.parts {
                let spec = self
                    .blocks
                    .get(*blk)
                    .ok_or_else(|| IpmError::Malformed(format!("constraint {k} refers to block {blk}")))?;
                let ok = match (spec, coef) {
                    (BlockSpec::Psd(n), Coef::Dense(a)) => a.rows() == *n && a.cols() == *n,
                    (BlockSpec::Psd(n), Coef::RankOne { v, .. }) => v.len() == *n,
                    (BlockSpec::Lp(n), Coef::Diag(e)) => e.iter().all(|&(i, _)| i < *n),
                    _ => false,
                };
                if !ok {
                    return Err(IpmError::Malformed(format!("constraint {k} block {blk} has the wrong shape")));
                }
            }
        }
        Ok(())
    }

    /// `A(W)_k = Σ Re tr(A_k W)`.
    pub fn apply_a(&self, w: &[BlockValue]) -> Vec<f64> {
        self.constraints.iter().map(|con| con.parts.iter().map(|(blk, coef)| coef.apply(&w[*blk])).sum()).collect()
    }

    /// `Σ_k y_k A_k`
    pub fn apply_adjoint(&self, y: &[f64]) -> Vec<BlockValue> {
        let mut out: Vec<BlockValue> = self.blocks.iter().map(|&s| BlockValue::zeros(s)).collect();
        for (con, &yk) in self.constraints.iter().zip(y) {
            if yk == 0.0 {
                continue;
            }
            for (blk, coef) in &con.parts {
                coef.add_to(yk, &mut out[*blk]);
            }
        }
        out
    }

    /// `C − Σ y_k A_k`
    pub fn slack(&self, y: &[f64]) -> Vec<BlockValue> {
        let ay = self.apply_adjoint(y);
        self.c.iter().zip(&ay).map(|(c, a)| c.sub(a)).collect()
    }

    fn total_dim(&self) -> f64 {
        self.blocks.iter().map(|b| b.size()).sum::<usize>().max(1) as f64
    }
}

/// Smallest eigenvalue over all blocks.
pub fn min_eigenvalue(blocks: &[BlockValue]) -> Result<f64, LinalgError> {
    let mut min = f64::INFINITY;
    for b in blocks {
        let m = match b {
            BlockValue::Psd(m) if m.rows() > 0 => herm_eig(&m.hermitian_part())?.min(),
            BlockValue::Psd(_) => f64::INFINITY,
            BlockValue::Lp(v) => v.iter().copied().fold(f64::INFINITY, f64::min),
        };
        min = min.min(m);
    }
    Ok(min)
}

fn total_norm(v: &[BlockValue]) -> f64 {
    v.iter().map(BlockValue::norm_sqr).sum::<f64>().sqrt()
}

fn total_inner(a: &[BlockValue], b: &[BlockValue]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.inner(y)).sum()
}

fn vnorm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct Factorized {
    /// Lower Cholesky factor of the Schur complement, row-major.
    l: Vec<f64>,
    n: usize,
}

impl Factorized {
    /// Cholesky of `m`, retried with a growing diagonal shift when the
    /// Schur complement is numerically singular.
    fn new(m: Vec<f64>, n: usize) -> Option<Self> {
        let max_diag = (0..n).map(|i| m[i * n + i].abs()).fold(0.0, f64::max).max(1e-300);
        for attempt in 0..6 {
            let mut shifted = m.clone();
            if attempt > 0 {
                let shift = 1e-14 * max_diag * 100f64.powi(attempt - 1);
                for i in 0..n {
                    shifted[i * n + i] += shift;
                }
            }
            if let Some(l) = real_cholesky(&shifted, n) {
                return Some(Self { l, n });
            }
        }
        None
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let l = &self.l;
        let mut z = rhs.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for j in 0..i {
                s -= l[i * n + j] * z[j];
            }
            z[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in (i + 1)..n {
                s -= l[j * n + i] * z[j];
            }
            z[i] = s / l[i * n + i];
        }
        z
    }
}

fn real_cholesky(m: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

enum Inverse {
    Psd(ComplexMatrix),
    Lp(Vec<f64>),
}

fn invert(s: &BlockValue) -> Result<Inverse, LinalgError> {
    Ok(match s {
        BlockValue::Psd(m) => Inverse::Psd(herm_eig(&m.hermitian_part())?.apply(|x| 1.0 / x)),
        BlockValue::Lp(v) => Inverse::Lp(v.iter().map(|x| 1.0 / x).collect()),
    })
}

impl Sdp {
    /// Schur complement `M_kl = Σ_blocks Re tr(A_k X A_l S⁻¹)`.
    fn schur(&self, x: &[BlockValue], sinv: &[Inverse]) -> Vec<f64> {
        let m = self.constraints.len();
        let mut out = vec![0.0; m * m];
        for (blk, spec) in self.blocks.iter().enumerate() {
            let touching: Vec<(usize, &Coef)> = self
                .constraints
                .iter()
                .enumerate()
                .flat_map(|(k, con)| con.parts.iter().filter(move |(b, _)| *b == blk).map(move |(_, c)| (k, c)))
                .collect();
            if touching.is_empty() {
                continue;
            }
            match (spec, &x[blk], &sinv[blk]) {
                (BlockSpec::Lp(n), BlockValue::Lp(xv), Inverse::Lp(si)) => {
                    let mut by_coord: Vec<Vec<(usize, f64)>> = vec![Vec::new(); *n];
                    for (k, coef) in &touching {
                        if let Coef::Diag(entries) = coef {
                            for &(i, a) in entries {
                                by_coord[i].push((*k, a));
                            }
                        }
                    }
                    for (i, list) in by_coord.iter().enumerate() {
                        let w = xv[i] * si[i];
                        for &(k, a) in list {
                            for &(l, c) in list {
                                out[k * m + l] += a * c * w;
                            }
                        }
                    }
                }
                (BlockSpec::Psd(n), BlockValue::Psd(xm), Inverse::Psd(si)) => {
                    let all_rank_one = touching.iter().all(|(_, c)| matches!(c, Coef::RankOne { .. }));
                    if all_rank_one {
                        let cols = touching.len();
                        let mut vm = ComplexMatrix::zeros(*n, cols);
                        let mut scales = Vec::with_capacity(cols);
                        for (t, (_, coef)) in touching.iter().enumerate() {
                            if let Coef::RankOne { scale, v } = coef {
                                vm.set_column(t, v);
                                scales.push(*scale);
                            }
                        }
                        let vh = vm.adjoint();
                        let p = vh.matmul(&xm.matmul(&vm));
                        let q = vh.matmul(&si.matmul(&vm));
                        for (a, &(k, _)) in touching.iter().enumerate() {
                            for (b, &(l, _)) in touching.iter().enumerate() {
                                out[k * m + l] += scales[a] * scales[b] * (p[(a, b)] * q[(b, a)]).re;
                            }
                        }
                    } else {
                        let dense: Vec<ComplexMatrix> = touching.iter().map(|(_, c)| c.to_dense()).collect();
                        for (b, &(l, _)) in touching.iter().enumerate() {
                            let y = xm.matmul(&dense[b]).matmul(si);
                            for (a, &(k, _)) in touching.iter().enumerate() {
                                out[k * m + l] += dense[a].real_inner(&y);
                            }
                        }
                    }
                }
                _ => unreachable!("validated block kinds"),
            }
        }
        for k in 0..m {
            for l in (k + 1)..m {
                let avg = 0.5 * (out[k * m + l] + out[l * m + k]);
                out[k * m + l] = avg;
                out[l * m + k] = avg;
            }
        }
        out
    }

    /// HKM direction for complementarity target `rc` and residuals `rp`, `rd`.
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        x: &[BlockValue],
        sinv: &[Inverse],
        chol: &Factorized,
        rp: &[f64],
        rd: &[BlockValue],
        rc: &[BlockValue],
    ) -> (Vec<BlockValue>, Vec<f64>, Vec<BlockValue>) {
        // W = (Rc − X Rd) S⁻¹
        let w: Vec<BlockValue> = (0..self.blocks.len())
            .map(|b| match (&x[b], &rd[b], &rc[b], &sinv[b]) {
                (BlockValue::Psd(xm), BlockValue::Psd(rdm), BlockValue::Psd(rcm), Inverse::Psd(si)) => {
                    BlockValue::Psd((rcm - &xm.matmul(rdm)).matmul(si))
                }
                (BlockValue::Lp(xv), BlockValue::Lp(rdv), BlockValue::Lp(rcv), Inverse::Lp(si)) => {
                    BlockValue::Lp((0..xv.len()).map(|i| (rcv[i] - xv[i] * rdv[i]) * si[i]).collect())
                }
                _ => unreachable!(),
            })
            .collect();
        let aw = self.apply_a(&w);
        let rhs: Vec<f64> = rp.iter().zip(&aw).map(|(p, a)| p - a).collect();
        let dy = chol.solve(&rhs);
        let ady = self.apply_adjoint(&dy);
        let ds: Vec<BlockValue> = rd.iter().zip(&ady).map(|(r, a)| r.sub(a)).collect();
        let dx: Vec<BlockValue> = (0..self.blocks.len())
            .map(|b| match (&x[b], &ds[b], &rc[b], &sinv[b]) {
                (BlockValue::Psd(xm), BlockValue::Psd(dsm), BlockValue::Psd(rcm), Inverse::Psd(si)) => {
                    BlockValue::Psd((rcm - &xm.matmul(dsm)).matmul(si).hermitian_part())
                }
                (BlockValue::Lp(xv), BlockValue::Lp(dsv), BlockValue::Lp(rcv), Inverse::Lp(si)) => {
                    BlockValue::Lp((0..xv.len()).map(|i| (rcv[i] - xv[i] * dsv[i]) * si[i]).collect())
                }
                _ => unreachable!(),
            })
            .collect();
        (dx, dy, ds)
    }
}

/// Largest `α` keeping `X + α·ΔX ⪰ 0` (infinite when unconstrained).
fn max_step(x: &[BlockValue], dx: &[BlockValue]) -> Result<f64, LinalgError> {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(dx) {
        match (xb, db) {
            (BlockValue::Psd(xm), BlockValue::Psd(dm)) => {
                if xm.rows() == 0 {
                    continue;
                }
                let eig = herm_eig(&xm.hermitian_part())?;
                let inv_sqrt = eig.apply(|v| 1.0 / v.max(1e-300).sqrt());
                let scaled = inv_sqrt.matmul(dm).matmul(&inv_sqrt).hermitian_part();
                let lmin = herm_eig(&scaled)?.min();
                if lmin < 0.0 {
                    alpha = alpha.min(-1.0 / lmin);
                }
            }
            (BlockValue::Lp(xv), BlockValue::Lp(dv)) => {
                for (a, d) in xv.iter().zip(dv) {
                    if *d < 0.0 {
                        alpha = alpha.min(-a / d);
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(alpha)
}

fn complementarity(x: &[BlockValue], s: &[BlockValue], dx: &[BlockValue], ds: &[BlockValue], mu: Option<f64>) -> Vec<BlockValue> {
    x.iter()
        .zip(s)
        .zip(dx.iter().zip(ds))
        .map(|((xb, sb), (dxb, dsb))| match (xb, sb, dxb, dsb) {
            (BlockValue::Psd(xm), BlockValue::Psd(sm), BlockValue::Psd(dxm), BlockValue::Psd(dsm)) => {
                let mut r = xm.matmul(sm).scale_real(-1.0);
                if mu.is_some() {
                    r.axpy(-ONE, &dxm.matmul(dsm));
                }
                if let Some(mu) = mu {
                    for i in 0..r.rows() {
                        r[(i, i)] += mu;
                    }
                }
                BlockValue::Psd(r)
            }
            (BlockValue::Lp(xv), BlockValue::Lp(sv), BlockValue::Lp(dxv), BlockValue::Lp(dsv)) => BlockValue::Lp(
                (0..xv.len())
                    .map(|i| {
                        let base = -xv[i] * sv[i];
                        match mu {
                            Some(mu) => base + mu - dxv[i] * dsv[i],
                            None => base,
                        }
                    })
                    .collect(),
            ),
            _ => unreachable!(),
        })
        .collect()
}

/// Solve the SDP to relative accuracy `tol` in primal feasibility, dual
/// feasibility and duality gap.
pub fn solve_sdp(sdp: &Sdp, tol: f64) -> Result<SdpSolution, IpmError> {
    solve_sdp_with_gap(sdp, tol, tol)
}

/// Relative gap accepted from a stalled run whose primal and dual residuals
/// already meet the tolerance. With objectives near `±v²` this keeps the
/// absolute gap below `1e-6·(1 + v²)`.
pub const STALL_GAP: f64 = 4e-7;

/// As [`solve_sdp`], but once the iteration stalls the best iterate is still
/// accepted if it is feasible to `tol` and its relative gap is at most
/// `stall_gap`.
pub fn solve_sdp_with_gap(sdp: &Sdp, tol: f64, stall_gap: f64) -> Result<SdpSolution, IpmError> {
    sdp.validate()?;
    let m = sdp.constraints.len();
    let norm_b = vnorm(&sdp.b);
    let norm_c = total_norm(&sdp.c);
    let n_total = sdp.total_dim();

    let mut x = Vec::with_capacity(sdp.blocks.len());
    let mut s = Vec::with_capacity(sdp.blocks.len());
    for (blk, &spec) in sdp.blocks.iter().enumerate() {
        let n = spec.size().max(1) as f64;
        let mut xi: f64 = 10f64.max(n.sqrt());
        let mut eta: f64 = 10f64.max(n.sqrt()).max(sdp.c[blk].norm_sqr().sqrt());
        for (k, con) in sdp.constraints.iter().enumerate() {
            for (b, coef) in &con.parts {
                if *b == blk {
                    let a = coef.frobenius_norm();
                    xi = xi.max(n.sqrt() * (1.0 + sdp.b[k].abs()) / (1.0 + a));
                    eta = eta.max(a);
                }
            }
        }
        x.push(BlockValue::identity(spec, xi));
        s.push(BlockValue::identity(spec, eta));
    }
    let mut y = vec![0.0; m];

    let mut iterations = 0;
    let mut stall = 0;
    let mut last;
    let mut best: Option<(f64, SdpSolution)> = None;
    let mut since_best = 0;
    let score_ok = |best: &Option<(f64, SdpSolution)>| best.as_ref().is_some_and(|(b, _)| *b <= tol);
    loop {
        let ax = sdp.apply_a(&x);
        let rp: Vec<f64> = sdp.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let ady = sdp.apply_adjoint(&y);
        let rd: Vec<BlockValue> = (0..sdp.blocks.len()).map(|b| sdp.c[b].sub(&s[b]).sub(&ady[b])).collect();
        let pobj = total_inner(&sdp.c, &x);
        let dobj: f64 = sdp.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let rel_primal = vnorm(&rp) / (1.0 + norm_b);
        let rel_dual = total_norm(&rd) / (1.0 + norm_c);
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        last = (rel_primal, rel_dual, rel_gap);
        let done = |t: f64| rel_primal <= t && rel_dual <= t && rel_gap <= t;
        let solution = move |x: Vec<BlockValue>, s: Vec<BlockValue>, y: Vec<f64>| SdpSolution {
            y,
            x,
            s,
            primal_objective: pobj,
            dual_objective: dobj,
            iterations,
            rel_primal,
            rel_dual,
            rel_gap,
        };
        if done(INTERNAL_TOL.min(tol)) {
            return Ok(solution(x, s, y));
        }
        // Past about 1e-11 rounding can push the iterates off the central
        // path, so the best iterate so far is kept as the fallback.
        let score = rel_primal.max(rel_dual).max(rel_gap);
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, solution(x.clone(), s.clone(), y.clone())));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if iterations >= MAX_ITERS || stall >= 3 || (since_best >= 5 && score_ok(&best)) {
            break;
        }
        // A primal ray with A(X) ≈ 0 and ⟨C,X⟩ < 0 certifies the LMI empty.
        if iterations >= 5 && pobj < 0.0 {
            let scale = -pobj;
            if vnorm(&ax) <= 1e-9 * scale && scale > 1e6 * (1.0 + norm_b) {
                let ray = x
                    .iter()
                    .map(|b| {
                        let mut r = BlockValue::zeros(block_spec(b));
                        r.axpy(1.0 / scale, b);
                        r
                    })
                    .collect();
                return Err(IpmError::Infeasible { ray });
            }
        }
        iterations += 1;

        let sinv: Vec<Inverse> = s.iter().map(invert).collect::<Result<_, _>>()?;
        let schur = sdp.schur(&x, &sinv);
        let chol = match Factorized::new(schur, m) {
            Some(c) => c,
            None => break,
        };
        let mu = total_inner(&x, &s) / n_total;

        // predictor
        let zero_dirs: Vec<BlockValue> = sdp.blocks.iter().map(|&b| BlockValue::zeros(b)).collect();
        let rc_aff = complementarity(&x, &s, &zero_dirs, &zero_dirs, None);
        let (dx_a, _, ds_a) = sdp.direction(&x, &sinv, &chol, &rp, &rd, &rc_aff);
        let ap = max_step(&x, &dx_a)?.min(1.0);
        let ad = max_step(&s, &ds_a)?.min(1.0);
        let mut x_aff = x.clone();
        let mut s_aff = s.clone();
        for b in 0..x.len() {
            x_aff[b].axpy(ap, &dx_a[b]);
            s_aff[b].axpy(ad, &ds_a[b]);
        }
        let mu_aff = total_inner(&x_aff, &s_aff) / n_total;
        let sigma = if mu > 0.0 { (mu_aff / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };

        // corrector
        let rc = complementarity(&x, &s, &dx_a, &ds_a, Some(sigma * mu));
        let (dx, dy, ds) = sdp.direction(&x, &sinv, &chol, &rp, &rd, &rc);
        let ap = (STEP_FRACTION * max_step(&x, &dx)?).min(1.0);
        let ad = (STEP_FRACTION * max_step(&s, &ds)?).min(1.0);
        for b in 0..x.len() {
            x[b].axpy(ap, &dx[b]);
            s[b].axpy(ad, &ds[b]);
            if let BlockValue::Psd(mx) = &mut x[b] {
                *mx = mx.hermitian_part();
            }
            if let BlockValue::Psd(ms) = &mut s[b] {
                *ms = ms.hermitian_part();
            }
        }
        for (yk, d) in y.iter_mut().zip(&dy) {
            *yk += ad * d;
        }
        if ap.max(ad) < 1e-9 {
            stall += 1;
        } else {
            stall = 0;
        }
    }
    match best {
        Some((b, sol)) if b <= tol => Ok(sol),
        Some((_, sol)) if sol.rel_primal <= tol && sol.rel_dual <= tol && sol.rel_gap <= stall_gap => Ok(sol),
        Some((_, sol)) => Err(IpmError::NoConvergence {
            iterations,
            rel_primal: sol.rel_primal,
            rel_dual: sol.rel_dual,
            rel_gap: sol.rel_gap,
        }),
        None => Err(IpmError::NoConvergence { iterations, rel_primal: last.0, rel_dual: last.1, rel_gap: last.2 }),
    }
}

fn block_spec(b: &BlockValue) -> BlockSpec {
    match b {
        BlockValue::Psd(m) => BlockSpec::Psd(m.rows()),
        BlockValue::Lp(v) => BlockSpec::Lp(v.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// max y s.t. diag(1,1) − y·I ⪰ 0 → y = 1.
    #[test]
    fn scalar_bound() {
        let sdp = Sdp {
            blocks: vec![BlockSpec::Psd(2)],
            c: vec![BlockValue::Psd(ComplexMatrix::identity(2))],
            constraints: vec![Constraint { parts: vec![(0, Coef::Dense(ComplexMatrix::identity(2)))] }],
            b: vec![1.0],
        };
        let sol = solve_sdp(&sdp, 1e-9).unwrap();
        assert!((sol.y[0] - 1.0).abs() < 1e-8);
        assert!((sol.primal_objective - 1.0).abs() < 1e-8);
    }

    /// max 2y1 + 3y2 s.t. y1 ≤ 1, y2 ≤ 2 → 8
    #[test]
    fn lp_block_only() {
        let sdp = Sdp {
            blocks: vec![BlockSpec::Lp(2)],
            c: vec![BlockValue::Lp(vec![1.0, 2.0])],
            constraints: vec![
                Constraint { parts: vec![(0, Coef::Diag(vec![(0, 1.0)]))] },
                Constraint { parts: vec![(0, Coef::Diag(vec![(1, 1.0)]))] },
            ],
            b: vec![2.0, 3.0],
        };
        let sol = solve_sdp(&sdp, 1e-9).unwrap();
        assert!((sol.dual_objective - 8.0).abs() < 1e-7);
    }

    #[test]
    fn complex_off_diagonal() {
        // max t s.t. H − t I ⪰ 0 gives t = λ_min(H) = 0.
        let h = ComplexMatrix::new(2, 2, vec![ONE, C64::new(0.0, 1.0), C64::new(0.0, -1.0), ONE]).unwrap();
        let sdp = Sdp {
            blocks: vec![BlockSpec::Psd(2)],
            c: vec![BlockValue::Psd(h)],
            constraints: vec![Constraint { parts: vec![(0, Coef::Dense(ComplexMatrix::identity(2)))] }],
            b: vec![1.0],
        };
        let sol = solve_sdp(&sdp, 1e-9).unwrap();
        assert!(sol.y[0].abs() < 1e-8, "{}", sol.y[0]);
    }
}
