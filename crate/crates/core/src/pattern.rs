//! Support patterns of subalgebras `D_n ⊆ A ⊆ M_n` spanned by matrix units.
//!
//! A pattern is a reflexive relation on `{0, …, n−1}`; it is the support of
//! an algebra exactly when it is also transitive. Indices are 0-based in the
//! API (the JSON layer in the CLI converts to and from 1-based).

use std::fmt;

use thiserror::Error;

pub const MAX_DIM: usize = 64;
pub const MAX_ENUMERATE: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern dimension must be between 1 and {MAX_DIM}, got {0}")]
    BadDimension(usize),
    #[error("pair ({i},{j}) out of range for n = {n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("pattern is not transitive: ({i},{j}) and ({j},{k}) present but ({i},{k}) missing")]
    NotTransitive { i: usize, j: usize, k: usize },
    #[error("enumeration is limited to n <= {MAX_ENUMERATE}, got {0}")]
    TooLarge(usize),
    #[error("invalid block structure: {0}")]
    InvalidCertificate(String),
}

/// Reflexive support set stored as one bitset row per index.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    n: usize,
    rows: Vec<u64>,
}

impl Pattern {
    /// Pattern containing the diagonal plus `pairs` (0-based).
    pub fn new(n: usize, pairs: &[(usize, usize)]) -> Result<Self, PatternError> {
        let mut p = Self::diagonal(n)?;
        for &(i, j) in pairs {
            if i >= n || j >= n {
                return Err(PatternError::IndexOutOfRange { i, j, n });
            }
            p.rows[i] |= 1 << j;
        }
        Ok(p)
    }

    pub fn diagonal(n: usize) -> Result<Self, PatternError> {
        if n == 0 || n > MAX_DIM {
            return Err(PatternError::BadDimension(n));
        }
        Ok(Self { n, rows: (0..n).map(|i| 1u64 << i).collect() })
    }

    pub fn full(n: usize) -> Result<Self, PatternError> {
        Self::from_predicate(n, |_, _| true)
    }

    pub fn upper_triangular(n: usize) -> Result<Self, PatternError> {
        Self::from_predicate(n, |i, j| i <= j)
    }

    pub fn lower_triangular(n: usize) -> Result<Self, PatternError> {
        Self::from_predicate(n, |i, j| i >= j)
    }

    /// Block upper triangular pattern with the given consecutive block sizes.
    pub fn block_upper_triangular(sizes: &[usize]) -> Result<Self, PatternError> {
        let blocks = block_labels(sizes)?;
        Self::from_predicate(blocks.len(), |i, j| blocks[i] <= blocks[j])
    }

    pub fn from_predicate(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self, PatternError> {
        let mut p = Self::diagonal(n)?;
        for i in 0..n {
            for j in 0..n {
                if f(i, j) {
                    p.rows[i] |= 1 << j;
                }
            }
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.rows[i] >> j & 1 == 1
    }

    /// All pairs in row-major order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.contains(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self { n: self.n, rows: vec![0; self.n] };
        for (i, j) in self.pairs() {
            t.rows[j] |= 1 << i;
        }
        t
    }

    /// Relabeled pattern with `(k,l)` present iff `(perm[k], perm[l])` is.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = Self { n: self.n, rows: vec![0; self.n] };
        for k in 0..self.n {
            for l in 0..self.n {
                if self.contains(perm[k], perm[l]) {
                    out.rows[k] |= 1 << l;
                }
            }
        }
        out
    }

    /// First violating triple in lexicographic order, if any.
    pub fn transitivity_violation(&self) -> Option<(usize, usize, usize)> {
        for i in 0..self.n {
            for j in 0..self.n {
                if !self.contains(i, j) {
                    continue;
                }
                let missing = self.rows[j] & !self.rows[i];
                if missing != 0 {
                    return Some((i, j, missing.trailing_zeros() as usize));
                }
            }
        }
        None
    }

    pub fn is_transitive(&self) -> bool {
        self.transitivity_violation().is_none()
    }

    fn up_set_size(&self, i: usize) -> u32 {
        self.rows[i].count_ones()
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern(n={}, ", self.n)?;
        f.debug_list().entries(self.pairs().iter().filter(|(i, j)| i != j)).finish()?;
        write!(f, ")")
    }
}

fn block_labels(sizes: &[usize]) -> Result<Vec<usize>, PatternError> {
    if sizes.contains(&0) {
        return Err(PatternError::InvalidCertificate("block sizes must be positive".into()));
    }
    Ok(sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect())
}

/// Permutation plus block sizes exhibiting a pattern as block upper
/// triangular. `permutation[k]` is the original index placed at position `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStructure {
    permutation: Vec<usize>,
    block_sizes: Vec<usize>,
}

impl BlockStructure {
    pub fn new(permutation: Vec<usize>, block_sizes: Vec<usize>) -> Result<Self, PatternError> {
        let n = permutation.len();
        let mut seen = vec![false; n];
        for &p in &permutation {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(PatternError::InvalidCertificate(format!("{permutation:?} is not a permutation")));
            }
        }
        if block_sizes.iter().sum::<usize>() != n {
            return Err(PatternError::InvalidCertificate(format!("block sizes {block_sizes:?} do not sum to {n}")));
        }
        block_labels(&block_sizes)?;
        Ok(Self { permutation, block_sizes })
    }

    pub fn identity(block_sizes: &[usize]) -> Result<Self, PatternError> {
        Self::new((0..block_sizes.iter().sum()).collect(), block_sizes.to_vec())
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn n(&self) -> usize {
        self.permutation.len()
    }

    /// Block upper triangular pattern in the permuted coordinates.
    pub fn block_pattern(&self) -> Pattern {
        Pattern::block_upper_triangular(&self.block_sizes).expect("validated block sizes")
    }

    /// The pattern this structure certifies, in original coordinates.
    pub fn original_pattern(&self) -> Pattern {
        let n = self.n();
        let mut inverse = vec![0; n];
        for (k, &p) in self.permutation.iter().enumerate() {
            inverse[p] = k;
        }
        self.block_pattern().permuted(&inverse)
    }

    /// Exact setwise check that relabeling `p` gives the block pattern.
    pub fn certifies(&self, p: &Pattern) -> bool {
        p.n() == self.n() && p.permuted(&self.permutation) == self.block_pattern()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LogmodularVerdict {
    Logmodular(BlockStructure),
    /// Lexicographically least pair with neither `(i,j)` nor `(j,i)` present.
    NotLogmodular { witness: (usize, usize) },
}

impl LogmodularVerdict {
    pub fn is_logmodular(&self) -> bool {
        matches!(self, Self::Logmodular(_))
    }

    pub fn certificate(&self) -> Option<&BlockStructure> {
        match self {
            Self::Logmodular(c) => Some(c),
            Self::NotLogmodular { .. } => None,
        }
    }

    pub fn witness(&self) -> Option<(usize, usize)> {
        match self {
            Self::Logmodular(_) => None,
            Self::NotLogmodular { witness } => Some(*witness),
        }
    }
}

/// Smallest transitive superset (Warshall on bitsets).
pub fn transitive_closure(p: &Pattern) -> Pattern {
    let mut rows = p.rows.clone();
    for k in 0..p.n {
        let rk = rows[k];
        for row in rows.iter_mut() {
            if *row >> k & 1 == 1 {
                *row |= rk;
            }
        }
    }
    Pattern { n: p.n, rows }
}

/// Logmodular iff the preorder `i ≼ j ⇔ (i,j) ∈ p` is total.
pub fn decide_logmodular(p: &Pattern) -> Result<LogmodularVerdict, PatternError> {
    if let Some((i, j, k)) = p.transitivity_violation() {
        return Err(PatternError::NotTransitive { i, j, k });
    }
    let n = p.n();
    for i in 0..n {
        for j in (i + 1)..n {
            if !p.contains(i, j) && !p.contains(j, i) {
                return Ok(LogmodularVerdict::NotLogmodular { witness: (i, j) });
            }
        }
    }
    // In a total preorder the earlier classes have the larger up-sets.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| p.up_set_size(b).cmp(&p.up_set_size(a)).then(a.cmp(&b)));
    let mut sizes = Vec::new();
    let mut k = 0;
    while k < n {
        let mut len = 1;
        while k + len < n && p.contains(order[k + len], order[k]) {
            len += 1;
        }
        sizes.push(len);
        k += len;
    }
    let cert = BlockStructure::new(order, sizes)?;
    debug_assert!(cert.certifies(p));
    Ok(LogmodularVerdict::Logmodular(cert))
}

/// Every reflexive transitive pattern on `n ≤ 4` points.
pub fn enumerate_patterns(n: usize) -> Result<Vec<Pattern>, PatternError> {
    if n > MAX_ENUMERATE {
        return Err(PatternError::TooLarge(n));
    }
    if n == 0 {
        return Err(PatternError::BadDimension(0));
    }
    let off: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << off.len()) {
        let pairs: Vec<(usize, usize)> =
            off.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &pr)| pr).collect();
        let p = Pattern::new(n, &pairs)?;
        if p.is_transitive() {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_examples() {
        let d = Pattern::diagonal(2).unwrap();
        assert_eq!(transitive_closure(&d), d);
        let chain = Pattern::new(3, &[(0, 1), (1, 2)]).unwrap();
        let closed = transitive_closure(&chain);
        assert!(closed.contains(0, 2));
        assert_eq!(closed, Pattern::upper_triangular(3).unwrap());
        let full = Pattern::full(3).unwrap();
        assert_eq!(transitive_closure(&full), full);
    }

    #[test]
    fn upper_triangular_verdict() {
        let v = decide_logmodular(&Pattern::upper_triangular(3).unwrap()).unwrap();
        let cert = v.certificate().unwrap();
        assert_eq!(cert.permutation(), &[0, 1, 2]);
        assert_eq!(cert.block_sizes(), &[1, 1, 1]);
    }

    #[test]
    fn full_is_one_block() {
        let v = decide_logmodular(&Pattern::full(4).unwrap()).unwrap();
        assert_eq!(v.certificate().unwrap().block_sizes(), &[4]);
    }

    #[test]
    fn diagonal_two_has_witness() {
        let v = decide_logmodular(&Pattern::diagonal(2).unwrap()).unwrap();
        assert_eq!(v.witness(), Some((0, 1)));
    }

    #[test]
    fn lower_triangular_reverses() {
        let v = decide_logmodular(&Pattern::lower_triangular(3).unwrap()).unwrap();
        let cert = v.certificate().unwrap();
        assert_eq!(cert.permutation(), &[2, 1, 0]);
        assert_eq!(cert.block_sizes(), &[1, 1, 1]);
    }

    #[test]
    fn non_transitive_rejected() {
        let p = Pattern::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(decide_logmodular(&p), Err(PatternError::NotTransitive { i: 0, j: 1, k: 2 }));
    }

    #[test]
    fn enumeration_counts() {
        let counts: Vec<usize> = (1..=4).map(|n| enumerate_patterns(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 4, 29, 355]);
        assert_eq!(enumerate_patterns(5), Err(PatternError::TooLarge(5)));
    }

    #[test]
    fn block_structure_round_trip() {
        let cert = BlockStructure::new(vec![2, 0, 1], vec![1, 2]).unwrap();
        let p = cert.original_pattern();
        assert!(cert.certifies(&p));
        let v = decide_logmodular(&p).unwrap();
        assert_eq!(v.certificate(), Some(&cert));
    }
}
