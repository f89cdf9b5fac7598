//! Discrete local models `p = A q`, `R q = 0`.
//!
//! Columns index regions (ordered patch tuples), or `(initial choice,
//! region)` pairs for the unconditional dynamic family. Rows index outcome
//! sequences in lexicographic order. Every column of `A` has exactly one
//! unit entry, so `A` is stored as the row hit by each column.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::discretize::{
    patches, region_index, region_tuple, Family, ModelSpec, Patch, Restriction, SpecError,
};
use crate::rat::Rat;

pub type SparseRow = Vec<(usize, Rat)>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("the patch list is empty")]
    NoPatches,
    #[error("patch list does not belong to the {0} family")]
    WrongPatchKind(Family),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnLabel {
    /// Initial choice label (unconditional dynamic family only).
    pub initial: Option<usize>,
    /// Patch indices per period.
    pub region: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionStats {
    pub generated: usize,
    pub nonzero: usize,
    pub kept: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteModel {
    pub spec: ModelSpec,
    pub patches: Vec<Patch>,
    pub n_rows: usize,
    /// Row of the single unit entry of each column of `A`.
    pub column_row: Vec<usize>,
    /// Rows of `R`, sparse over columns.
    pub restriction: Vec<SparseRow>,
    pub restriction_stats: RestrictionStats,
    /// Rows of `P_E` as sorted column lists (exchangeable models only).
    pub p_exchangeable: Option<Vec<Vec<usize>>>,
    /// Outcome label tuple per row.
    pub row_labels: Vec<Vec<usize>>,
    pub col_labels: Vec<ColumnLabel>,
}

impl DiscreteModel {
    pub fn n_cols(&self) -> usize {
        self.column_row.len()
    }

    pub fn a_dense(&self) -> Vec<Vec<Rat>> {
        let mut a = vec![vec![Rat::zero(); self.n_cols()]; self.n_rows];
        for (c, &r) in self.column_row.iter().enumerate() {
            a[r][c] = Rat::one();
        }
        a
    }

    pub fn r_dense(&self) -> Vec<Vec<Rat>> {
        self.restriction
            .iter()
            .map(|row| {
                let mut d = vec![Rat::zero(); self.n_cols()];
                for (c, v) in row {
                    d[*c] = v.clone();
                }
                d
            })
            .collect()
    }

    /// `p = A q`.
    pub fn apply_a(&self, q: &[Rat]) -> Vec<Rat> {
        let mut p = vec![Rat::zero(); self.n_rows];
        for (c, &r) in self.column_row.iter().enumerate() {
            p[r] += &q[c];
        }
        p
    }

    /// Sparse `(row, col, value)` triplets of `A`, `R` and `P_E` for debugging.
    pub fn to_triplet_json(&self) -> serde_json::Value {
        let a: Vec<_> = self
            .column_row
            .iter()
            .enumerate()
            .map(|(c, r)| json!([r, c, "1"]))
            .collect();
        let r: Vec<_> = self
            .restriction
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(c, v)| json!([i, c, v.to_string()])))
            .collect();
        let pe: Option<Vec<_>> = self.p_exchangeable.as_ref().map(|rows| {
            rows.iter()
                .enumerate()
                .flat_map(|(i, cols)| cols.iter().map(move |c| json!([i, c, "1"])))
                .collect()
        });
        json!({
            "shape": {"A": [self.n_rows, self.n_cols()], "R": [self.restriction.len(), self.n_cols()]},
            "A": a,
            "R": r,
            "P_E": pe,
        })
    }
}

pub fn outcome_labels(d: usize, len: usize, base: usize) -> Vec<Vec<usize>> {
    let total = d.pow(len as u32);
    (0..total)
        .map(|k| region_tuple(k, d, len).into_iter().map(|x| x + base).collect())
        .collect()
}

/// Builds the restriction rows over columns whose region tuples are `regs`.
/// `blocks` is the number of column blocks sharing the same region list
/// (one per initial choice in the unconditional family).
fn restriction_rows(
    n_patches: usize,
    t: usize,
    blocks: usize,
    restriction: Restriction,
    pairs: &[(usize, usize)],
) -> (Vec<SparseRow>, RestrictionStats) {
    let n_regions = n_patches.pow(t as u32);
    let mut generated = Vec::new();
    match restriction {
        Restriction::Stationary => {
            for &(s, u) in pairs {
                for f in 0..n_patches {
                    let mut row = Vec::new();
                    for g in 0..blocks {
                        for r in 0..n_regions {
                            let reg = region_tuple(r, n_patches, t);
                            let v = i64::from(reg[s] == f) - i64::from(reg[u] == f);
                            if v != 0 {
                                row.push((g * n_regions + r, Rat::from_int(v)));
                            }
                        }
                    }
                    generated.push(row);
                }
            }
        }
        Restriction::Exchangeable => {
            for r in 0..n_regions {
                let reg = region_tuple(r, n_patches, t);
                for k in 0..t - 1 {
                    let mut swapped = reg.clone();
                    swapped.swap(k, k + 1);
                    let r2 = region_index(&swapped, n_patches);
                    let mut row = Vec::new();
                    if r2 != r {
                        for g in 0..blocks {
                            row.push((g * n_regions + r, Rat::one()));
                            row.push((g * n_regions + r2, -Rat::one()));
                        }
                        row.sort_by_key(|(c, _)| *c);
                    }
                    generated.push(row);
                }
            }
        }
    }
    let mut stats = RestrictionStats {
        generated: generated.len(),
        ..Default::default()
    };
    let mut seen = HashSet::new();
    let mut kept = Vec::new();
    for row in generated {
        if row.is_empty() {
            continue;
        }
        stats.nonzero += 1;
        let flip = row[0].1.is_negative();
        let key: Vec<(usize, Rat)> = row
            .iter()
            .map(|(c, v)| (*c, if flip { -v } else { v.clone() }))
            .collect();
        if seen.insert(key) {
            kept.push(row);
        }
    }
    stats.kept = kept.len();
    (kept, stats)
}

fn generator_pairs(t: usize) -> Vec<(usize, usize)> {
    (1..t).map(|u| (0, u)).collect()
}

/// Rows of `P_E`: one per multiset of patch indices, listing the regions
/// whose tuple is a permutation of it. Rows are ordered by sorted multiset.
pub fn build_p_exchangeable(n_patches: usize, t: usize) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for r in 0..n_patches.pow(t as u32) {
        let mut key = region_tuple(r, n_patches, t);
        key.sort();
        groups.entry(key).or_default().push(r);
    }
    groups.into_values().collect()
}

fn check_kind(spec: &ModelSpec, patches: &[Patch]) -> Result<(), MatrixError> {
    spec.validate()?;
    if patches.is_empty() {
        return Err(MatrixError::NoPatches);
    }
    let ok = patches.iter().all(|p| {
        matches!(
            (spec.family, p),
            (Family::StaticPanel, Patch::Static(_))
                | (Family::DynCondOneLag, Patch::DynCond { .. })
                | (Family::DynUncondOneLag, Patch::DynUncond(_))
                | (Family::DynCondBinaryTwoLag, Patch::TwoLag(_))
        )
    });
    if ok {
        Ok(())
    } else {
        Err(MatrixError::WrongPatchKind(spec.family))
    }
}

fn assemble(
    spec: &ModelSpec,
    patches: Vec<Patch>,
    n_rows: usize,
    row_labels: Vec<Vec<usize>>,
    column_row: Vec<usize>,
    col_labels: Vec<ColumnLabel>,
    blocks: usize,
    pairs: &[(usize, usize)],
) -> DiscreteModel {
    let n = patches.len();
    let (restriction, restriction_stats) =
        restriction_rows(n, spec.t, blocks, spec.restriction, pairs);
    let p_exchangeable = (spec.restriction == Restriction::Exchangeable && blocks == 1)
        .then(|| build_p_exchangeable(n, spec.t));
    DiscreteModel {
        spec: spec.clone(),
        patches,
        n_rows,
        column_row,
        restriction,
        restriction_stats,
        p_exchangeable,
        row_labels,
        col_labels,
    }
}

fn sequence_row(seq: &[usize], d: usize) -> usize {
    seq.iter().fold(0, |acc, &x| acc * d + x)
}

pub fn build_static(patches: Vec<Patch>, spec: &ModelSpec) -> Result<DiscreteModel, MatrixError> {
    check_kind(spec, &patches)?;
    let (d, t, n) = (spec.d, spec.t, patches.len());
    let mut column_row = Vec::new();
    let mut col_labels = Vec::new();
    for r in 0..n.pow(t as u32) {
        let reg = region_tuple(r, n, t);
        let seq: Vec<usize> = (0..t).map(|k| patches[reg[k]].choice(k, 0)).collect();
        column_row.push(sequence_row(&seq, d));
        col_labels.push(ColumnLabel {
            initial: None,
            region: reg,
        });
    }
    let rows = outcome_labels(d, t, spec.label_base());
    Ok(assemble(
        spec,
        patches,
        d.pow(t as u32),
        rows,
        column_row,
        col_labels,
        1,
        &generator_pairs(t),
    ))
}

pub fn build_dyn_cond(patches: Vec<Patch>, spec: &ModelSpec) -> Result<DiscreteModel, MatrixError> {
    check_kind(spec, &patches)?;
    let (d, t, n) = (spec.d, spec.t, patches.len());
    let mut column_row = Vec::new();
    let mut col_labels = Vec::new();
    for r in 0..n.pow(t as u32) {
        let reg = region_tuple(r, n, t);
        let mut seq = Vec::with_capacity(t);
        let mut prev = 0;
        for k in 0..t {
            let c = patches[reg[k]].choice(k, prev);
            seq.push(c);
            prev = c;
        }
        column_row.push(sequence_row(&seq, d));
        col_labels.push(ColumnLabel {
            initial: None,
            region: reg,
        });
    }
    let rows = outcome_labels(d, t, spec.label_base());
    Ok(assemble(
        spec,
        patches,
        d.pow(t as u32),
        rows,
        column_row,
        col_labels,
        1,
        &generator_pairs(t),
    ))
}

pub fn build_dyn_uncond(
    patches: Vec<Patch>,
    spec: &ModelSpec,
) -> Result<DiscreteModel, MatrixError> {
    check_kind(spec, &patches)?;
    let (d, t, n) = (spec.d, spec.t, patches.len());
    let base = spec.label_base();
    let mut column_row = Vec::new();
    let mut col_labels = Vec::new();
    for g in 0..d {
        for r in 0..n.pow(t as u32) {
            let reg = region_tuple(r, n, t);
            let mut seq = vec![g];
            let mut prev = g;
            for k in 0..t {
                let c = patches[reg[k]].choice(k, prev);
                seq.push(c);
                prev = c;
            }
            column_row.push(sequence_row(&seq, d));
            col_labels.push(ColumnLabel {
                initial: Some(g + base),
                region: reg,
            });
        }
    }
    let rows = outcome_labels(d, t + 1, base);
    Ok(assemble(
        spec,
        patches,
        d.pow(t as u32 + 1),
        rows,
        column_row,
        col_labels,
        d,
        &generator_pairs(t),
    ))
}

pub fn build_ar2(patches: Vec<Patch>, spec: &ModelSpec) -> Result<DiscreteModel, MatrixError> {
    check_kind(spec, &patches)?;
    let n = patches.len();
    let cell = |p: &Patch, k: usize| match p {
        Patch::TwoLag(c) => c[k] as usize,
        _ => unreachable!(),
    };
    let mut column_row = Vec::new();
    let mut col_labels = Vec::new();
    for r in 0..n.pow(3) {
        let reg = region_tuple(r, n, 3);
        let d1 = cell(&patches[reg[0]], 0);
        let d2 = cell(&patches[reg[1]], 1 + d1);
        let d3 = cell(&patches[reg[2]], 3 + d1 + 2 * d2);
        column_row.push(sequence_row(&[d1, d2, d3], 2));
        col_labels.push(ColumnLabel {
            initial: None,
            region: reg,
        });
    }
    Ok(assemble(
        spec,
        patches,
        8,
        outcome_labels(2, 3, 0),
        column_row,
        col_labels,
        1,
        &[(0, 2), (1, 2)],
    ))
}

/// Computes the patches of `spec` and builds its discrete model.
pub fn build(spec: &ModelSpec) -> Result<DiscreteModel, MatrixError> {
    spec.validate()?;
    let p = patches(spec);
    match spec.family {
        Family::StaticPanel => build_static(p, spec),
        Family::DynCondOneLag => build_dyn_cond(p, spec),
        Family::DynUncondOneLag => build_dyn_uncond(p, spec),
        Family::DynCondBinaryTwoLag => build_ar2(p, spec),
    }
}

/// Draws a random probability vector `q ≥ 0` with `R q = 0`.
///
/// Stationary models mix a symmetrized random vector with a stationary
/// Markov chain on patches (uniform start, doubly stochastic transitions),
/// so the draw is not confined to exchangeable laws. Exchangeable models use
/// the symmetrized part only. Weights are small random integers, so every
/// entry stays an exact rational.
pub fn random_feasible_q<R: Rng>(model: &DiscreteModel, rng: &mut R) -> Vec<Rat> {
    let n = model.patches.len();
    let t = model.spec.t;
    let n_regions = n.pow(t as u32);
    let blocks = model.n_cols() / n_regions;
    let mut q = vec![Rat::zero(); model.n_cols()];
    for g in 0..blocks {
        let raw: Vec<i64> = (0..n_regions).map(|_| rng.gen_range(0..=9)).collect();
        for r in 0..n_regions {
            if raw[r] == 0 {
                continue;
            }
            let reg = region_tuple(r, n, t);
            for perm in permutations(&reg) {
                q[g * n_regions + region_index(&perm, n)] += Rat::from_int(raw[r]);
            }
        }
        if model.spec.restriction == Restriction::Stationary {
            let weight = Rat::from_int(rng.gen_range(0..=9));
            if weight.is_zero() {
                continue;
            }
            let mut trans = vec![vec![Rat::zero(); n]; n];
            for _ in 0..3 {
                let mut perm: Vec<usize> = (0..n).collect();
                for i in (1..n).rev() {
                    perm.swap(i, rng.gen_range(0..=i));
                }
                let w = Rat::from_int(rng.gen_range(1..=4));
                for (i, &j) in perm.iter().enumerate() {
                    trans[i][j] += &w;
                }
            }
            for r in 0..n_regions {
                let reg = region_tuple(r, n, t);
                let mut mass = weight.clone();
                for k in 1..t {
                    mass *= &trans[reg[k - 1]][reg[k]];
                }
                q[g * n_regions + r] += mass;
            }
        }
    }
    let total: Rat = q.iter().sum();
    if total.is_zero() {
        let u = Rat::new(1, model.n_cols() as i64);
        return vec![u; model.n_cols()];
    }
    q.iter().map(|x| x / &total).collect()
}

/// All orderings of `items` (with repetition where items repeat).
fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}
