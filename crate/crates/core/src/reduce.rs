//! Redundancy elimination and canonical ordering of inequality lists.
//!
//! A vector `y` stands for the moment inequality `yᵀp ≤ 0`. It is implied by
//! a list `L` when some `λ ≥ 0` gives `y ≤ Lᵀλ` componentwise, since then
//! `yᵀp ≤ λᵀ(Lp) ≤ 0` for every `p ≥ 0` satisfying the list.

use serde::{Deserialize, Serialize};

use crate::molp::IneqVector;
use crate::rat::Rat;
use crate::ratlp::{solve_lp, Direction, LinearProgram, LpStatus, RowSense};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RemovalReason {
    Duplicate,
    /// Every entry is nonpositive, so the inequality holds for all `p ≥ 0`.
    Trivial,
    /// Nonnegative multipliers on the vectors that were still present.
    Implied { witness: Vec<(Vec<Rat>, Rat)> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub vector: Vec<Rat>,
    pub reason: RemovalReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IneqSet {
    pub vectors: Vec<IneqVector>,
    /// Outcome label tuple of each coordinate (empty when unknown).
    pub labels: Vec<Vec<usize>>,
    pub log: Vec<Removal>,
}

impl IneqSet {
    pub fn with_labels(mut self, labels: Vec<Vec<usize>>) -> IneqSet {
        self.labels = labels;
        self
    }

    pub fn ys(&self) -> Vec<Vec<Rat>> {
        self.vectors.iter().map(|v| v.y.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Drops exact duplicates (first occurrence wins) and sorts lexicographically.
pub fn canonicalize(vectors: &[IneqVector]) -> IneqSet {
    let mut sorted: Vec<IneqVector> = vectors.to_vec();
    sorted.sort_by(|a, b| a.y.cmp(&b.y));
    let mut out: Vec<IneqVector> = Vec::with_capacity(sorted.len());
    let mut log = Vec::new();
    for v in sorted {
        if out.last().is_some_and(|last| last.y == v.y) {
            log.push(Removal {
                vector: v.y,
                reason: RemovalReason::Duplicate,
            });
        } else {
            out.push(v);
        }
    }
    IneqSet {
        vectors: out,
        labels: Vec::new(),
        log,
    }
}

/// Returns multipliers `λ ≥ 0` with `y ≤ Σ λ_k others_k`, if any exist.
pub fn implied_by(y: &[Rat], others: &[Vec<Rat>]) -> Option<Vec<Rat>> {
    let n = y.len();
    if y.iter().all(|x| !x.is_positive()) {
        return Some(vec![Rat::zero(); others.len()]);
    }
    if others.is_empty() {
        return None;
    }
    let mut lp = LinearProgram::new(others.len(), Direction::Minimize);
    lp.objective = others.iter().map(|_| Rat::one()).collect();
    for i in 0..n {
        let coeffs = others
            .iter()
            .enumerate()
            .filter(|(_, o)| !o[i].is_zero())
            .map(|(k, o)| (k, o[i].clone()))
            .collect();
        lp.add_row(coeffs, RowSense::Ge, y[i].clone());
    }
    let res = solve_lp(&lp).expect("well-formed implication program");
    (res.status == LpStatus::Optimal).then_some(res.x)
}

/// Canonicalizes, drops trivial vectors, then removes each vector (in
/// canonical order) that is implied by the vectors still present.
pub fn eliminate_redundant(vectors: &[IneqVector]) -> IneqSet {
    let mut set = canonicalize(vectors);
    let mut kept = Vec::with_capacity(set.vectors.len());
    for v in std::mem::take(&mut set.vectors) {
        if v.y.iter().all(|x| !x.is_positive()) {
            set.log.push(Removal {
                vector: v.y,
                reason: RemovalReason::Trivial,
            });
        } else {
            kept.push(v);
        }
    }
    let mut k = 0;
    while k < kept.len() {
        let others: Vec<Vec<Rat>> = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, v)| v.y.clone())
            .collect();
        match implied_by(&kept[k].y, &others) {
            Some(lambda) => {
                let witness = others
                    .into_iter()
                    .zip(lambda)
                    .filter(|(_, l)| !l.is_zero())
                    .collect();
                let removed = kept.remove(k);
                set.log.push(Removal {
                    vector: removed.y,
                    reason: RemovalReason::Implied { witness },
                });
            }
            None => k += 1,
        }
    }
    set.vectors = kept;
    set
}
