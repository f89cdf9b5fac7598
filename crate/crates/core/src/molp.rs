//! The dual discrete choice polyhedron and its undominated extreme points.
//!
//! For a discrete model `p = A q`, `q ≥ 0`, `R q = 0`, the polyhedron is
//! `{(y, z) : Aᵀy ≤ Rᵀz, ‖y‖∞ ≤ 1}`; its projection `Q` onto `y` is the set
//! of valid inequalities `yᵀp ≤ 0` scaled into the unit box. The sharp
//! inequalities are the undominated extreme points of `Q`, which are exactly
//! the vertices of `Q − ℝⁿ₊`. [`solve_undominated`] finds them with an
//! outer approximation: it keeps an H-polyhedron containing `Q − ℝⁿ₊`,
//! enumerates its vertices by double description, and either confirms each
//! vertex or cuts it off with a supporting hyperplane read from the duals of
//! a distance LP.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discretize::Family;
use crate::matrices::DiscreteModel;
use crate::rat::Rat;
use crate::ratlp::{
    solve_lp, Direction, LinearProgram, LpStatus, RowSense, WarmProgram,
};
use crate::reduce::{eliminate_redundant, IneqSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Benson,
    Cutplane,
    Probabilistic,
    ClosedForm,
    Oracle,
}

/// An inequality `yᵀp ≤ 0` on the choice-sequence probabilities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IneqVector {
    pub y: Vec<Rat>,
    pub rank: Rat,
    pub provenance: Provenance,
}

impl IneqVector {
    pub fn new(y: Vec<Rat>, provenance: Provenance) -> IneqVector {
        let rank = y.iter().sum();
        IneqVector {
            y,
            rank,
            provenance,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MolpError {
    #[error("the brute-force oracle is limited to {limit} coordinates, this polyhedron has {n}")]
    DimensionLimit { n: usize, limit: usize },
}

/// One row `y[y] ≤ Σ_k r_k z_k` of `Aᵀy ≤ Rᵀz`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DualRow {
    pub y: usize,
    pub z: Vec<(usize, Rat)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyhedron {
    pub n_y: usize,
    pub n_z: usize,
    /// One row per column of `A`.
    pub dual_rows: Vec<DualRow>,
    /// `P_E Aᵀ y ≤ 0`, sparse over `y`, when the model is exchangeable.
    pub z_free_rows: Option<Vec<Vec<(usize, Rat)>>>,
    pub labels: Vec<Vec<usize>>,
    pub family: Family,
    pub source: String,
}

pub fn build_ddcp(model: &DiscreteModel) -> Polyhedron {
    let n_cols = model.n_cols();
    let mut z_entries: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); n_cols];
    for (k, row) in model.restriction.iter().enumerate() {
        for (c, v) in row {
            z_entries[*c].push((k, v.clone()));
        }
    }
    let dual_rows = model
        .column_row
        .iter()
        .zip(z_entries)
        .map(|(&y, z)| DualRow { y, z })
        .collect();
    let z_free_rows = model.p_exchangeable.as_ref().map(|pe| {
        pe.iter()
            .map(|cols| {
                let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
                for &c in cols {
                    *acc.entry(model.column_row[c]).or_insert_with(Rat::zero) += Rat::one();
                }
                acc.into_iter().collect()
            })
            .collect()
    });
    Polyhedron {
        n_y: model.n_rows,
        n_z: model.restriction.len(),
        dual_rows,
        z_free_rows,
        labels: model.row_labels.clone(),
        family: model.spec.family,
        source: format!(
            "{} D={} T={} {:?}, {} patches",
            model.spec.family,
            model.spec.d,
            model.spec.t,
            model.spec.restriction,
            model.patches.len()
        ),
    }
}

impl Polyhedron {
    pub fn box_rows(&self) -> usize {
        2 * self.n_y
    }

    /// Distinct dual rows in first-appearance order.
    pub fn distinct_rows(&self) -> Vec<DualRow> {
        let mut seen = HashSet::new();
        self.dual_rows
            .iter()
            .filter(|r| seen.insert((*r).clone()))
            .cloned()
            .collect()
    }

    /// `max objᵀy` (or min) over the lifted polyhedron, variables `(y, z)`.
    pub fn to_lp(&self, objective: &[Rat], direction: Direction) -> LinearProgram {
        let mut lp = LinearProgram::new(self.n_y + self.n_z, direction);
        for (j, c) in objective.iter().enumerate() {
            lp.objective[j] = c.clone();
        }
        for j in 0..self.n_y {
            lp.set_bounds(j, Some(-Rat::one()), Some(Rat::one()));
        }
        for k in 0..self.n_z {
            lp.set_free(self.n_y + k);
        }
        for row in self.distinct_rows() {
            let mut coeffs = vec![(row.y, Rat::one())];
            coeffs.extend(row.z.iter().map(|(k, v)| (self.n_y + k, -v)));
            lp.add_row(coeffs, RowSense::Le, Rat::zero());
        }
        lp
    }

    fn in_box(&self, y: &[Rat]) -> bool {
        y.len() == self.n_y && y.iter().all(|v| v.abs() <= Rat::one())
    }

    pub fn contains(&self, y: &[Rat]) -> bool {
        self.in_box(y) && Membership::new(self).contains(y)
    }

    pub fn contains_z_free(&self, y: &[Rat]) -> Option<bool> {
        let rows = self.z_free_rows.as_ref()?;
        Some(
            self.in_box(y)
                && rows.iter().all(|row| {
                    let s: Rat = row.iter().map(|(i, v)| v * &y[*i]).sum();
                    !s.is_positive()
                }),
        )
    }
}

/// Column data of the conic dual shared by the LP helpers: one column per
/// distinct dual row, with a unit entry on its `y` row and the restriction
/// entries on rows `offset + k`.
fn q_columns(poly: &Polyhedron, offset: usize) -> Vec<(usize, Vec<(usize, Rat)>)> {
    poly.distinct_rows()
        .into_iter()
        .map(|row| {
            let mut col = vec![(row.y, Rat::one())];
            col.extend(row.z.iter().map(|(k, v)| (offset + k, v.clone())));
            (row.y, col)
        })
        .collect()
}

/// Repeated membership tests in `{y : Aᵀy ≤ Rᵀz for some z}`: `y` belongs
/// iff `min −yᵀAq` over `{q ≥ 0, Rq = 0, 𝟙ᵀq ≤ 1}` is zero.
pub struct Membership {
    lp: WarmProgram,
    rows_of: Vec<usize>,
}

impl Membership {
    pub fn new(poly: &Polyhedron) -> Membership {
        let m = poly.n_z + 1;
        let mut cols = Vec::new();
        let mut rows_of = Vec::new();
        for (y, col) in q_columns(poly, 0) {
            let mut c: Vec<(usize, Rat)> = col.into_iter().skip(1).collect();
            c.push((poly.n_z, Rat::one()));
            cols.push(c);
            rows_of.push(y);
        }
        cols.push(vec![(poly.n_z, Rat::one())]);
        let n = cols.len();
        let mut rhs = vec![Rat::zero(); m];
        rhs[poly.n_z] = Rat::one();
        let lp = WarmProgram::new(
            m,
            cols,
            rhs,
            vec![Some(Rat::zero()); n],
            vec![None; n],
            vec![Rat::zero(); n],
        )
        .expect("well-formed membership program");
        Membership { lp, rows_of }
    }

    /// Ignores the box; callers check it.
    pub fn contains(&mut self, y: &[Rat]) -> bool {
        let mut cost: Vec<Rat> = self.rows_of.iter().map(|&i| -&y[i]).collect();
        cost.push(Rat::zero());
        self.lp.set_cost(cost);
        let res = self.lp.solve();
        res.status == LpStatus::Optimal && !res.value.is_negative()
    }
}

/// Support function of `Q`: `max wᵀy` over `Q` through the conic dual
/// `min 𝟙ᵀ(α + β)` subject to `Aq + α − β = w`, `Rq = 0`, `q, α, β ≥ 0`.
pub struct Support {
    lp: WarmProgram,
    n_y: usize,
    m: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPoint {
    pub value: Rat,
    /// A maximizer read from the row multipliers.
    pub y: Vec<Rat>,
}

impl Support {
    pub fn new(poly: &Polyhedron) -> Support {
        let n = poly.n_y;
        let m = n + poly.n_z;
        let mut cols: Vec<Vec<(usize, Rat)>> =
            q_columns(poly, n).into_iter().map(|(_, c)| c).collect();
        let nq = cols.len();
        for i in 0..n {
            cols.push(vec![(i, Rat::one())]);
        }
        for i in 0..n {
            cols.push(vec![(i, -Rat::one())]);
        }
        let total = cols.len();
        let mut cost = vec![Rat::zero(); total];
        for c in cost.iter_mut().skip(nq) {
            *c = Rat::one();
        }
        let lp = WarmProgram::new(
            m,
            cols,
            vec![Rat::zero(); m],
            vec![Some(Rat::zero()); total],
            vec![None; total],
            cost,
        )
        .expect("well-formed support program");
        Support { lp, n_y: n, m }
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn maximize(&mut self, w: &[Rat]) -> SupportPoint {
        let mut rhs = w.to_vec();
        rhs.resize(self.m, Rat::zero());
        self.lp.set_rhs(rhs);
        self.lp.reset();
        let res = self.lp.solve();
        assert_eq!(res.status, LpStatus::Optimal, "support program is always solvable");
        SupportPoint {
            value: res.value,
            y: res.duals[..self.n_y].to_vec(),
        }
    }
}

/// Distance from a point to `Q − ℝⁿ₊` along `−𝟙`, through the dual
/// `max vᵀλ − 𝟙ᵀ(α + β)` subject to `Aq + α − β = λ`, `Rq = 0`, `𝟙ᵀλ = 1`.
/// The optimal `λ` is the normal of a supporting hyperplane.
struct Distance {
    lp: WarmProgram,
    n_y: usize,
    n_q: usize,
}

impl Distance {
    fn new(poly: &Polyhedron) -> Distance {
        let n = poly.n_y;
        let m = n + poly.n_z + 1;
        let mut cols: Vec<Vec<(usize, Rat)>> =
            q_columns(poly, n).into_iter().map(|(_, c)| c).collect();
        let n_q = cols.len();
        for i in 0..n {
            cols.push(vec![(i, -Rat::one()), (m - 1, Rat::one())]);
        }
        for i in 0..n {
            cols.push(vec![(i, Rat::one())]);
        }
        for i in 0..n {
            cols.push(vec![(i, -Rat::one())]);
        }
        let total = cols.len();
        let mut rhs = vec![Rat::zero(); m];
        rhs[m - 1] = Rat::one();
        let lp = WarmProgram::new(
            m,
            cols,
            rhs,
            vec![Some(Rat::zero()); total],
            vec![None; total],
            vec![Rat::zero(); total],
        )
        .expect("well-formed distance program");
        Distance { lp, n_y: n, n_q }
    }

    /// Returns `t*` and `λ` with `λᵀy ≤ λᵀv − t*` valid on `Q − ℝⁿ₊`.
    fn measure(&mut self, v: &[Rat]) -> (Rat, Vec<Rat>) {
        let n = self.n_y;
        let mut cost = vec![Rat::zero(); self.n_q];
        cost.extend(v.iter().map(|x| -x));
        cost.extend((0..2 * n).map(|_| Rat::one()));
        self.lp.set_cost(cost);
        let res = self.lp.solve();
        assert_eq!(res.status, LpStatus::Optimal, "distance program is always solvable");
        let lambda = res.x[self.n_q..self.n_q + n].to_vec();
        (-res.value, lambda)
    }
}

// ---------------------------------------------------------------------------
// Double description on the homogenized cone {(y, s) : a_kᵀ(y, s) ≤ 0}.

#[derive(Clone)]
struct Generator {
    v: Vec<Rat>,
    tight: Vec<u64>,
}

fn bit_set(bits: &mut Vec<u64>, k: usize) {
    if bits.len() <= k / 64 {
        bits.resize(k / 64 + 1, 0);
    }
    bits[k / 64] |= 1 << (k % 64);
}

fn bits_and(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn bits_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter()
        .enumerate()
        .all(|(i, x)| x & b.get(i).copied().unwrap_or(0) == *x)
}

fn bits_count(a: &[u64]) -> usize {
    a.iter().map(|x| x.count_ones() as usize).sum()
}

struct DoubleDescription {
    dim: usize,
    n_cons: usize,
    gens: Vec<Generator>,
}

impl DoubleDescription {
    /// The cone of `{y ≤ u}`: constraint 0 is `−s ≤ 0`, constraint `1 + i`
    /// is `y_i − u_i s ≤ 0`.
    fn orthant_below(u: &[Rat]) -> DoubleDescription {
        let n = u.len();
        let dim = n + 1;
        let mut gens = Vec::with_capacity(dim);
        let mut apex = u.to_vec();
        apex.push(Rat::one());
        let mut tight = Vec::new();
        for i in 0..n {
            bit_set(&mut tight, 1 + i);
        }
        gens.push(Generator { v: apex, tight });
        for i in 0..n {
            let mut v = vec![Rat::zero(); dim];
            v[i] = -Rat::one();
            let mut tight = Vec::new();
            bit_set(&mut tight, 0);
            for k in 0..n {
                if k != i {
                    bit_set(&mut tight, 1 + k);
                }
            }
            gens.push(Generator { v, tight });
        }
        DoubleDescription {
            dim,
            n_cons: 1 + n,
            gens,
        }
    }

    fn add(&mut self, a: &[Rat]) {
        let k = self.n_cons;
        self.n_cons += 1;
        let vals: Vec<Rat> = self
            .gens
            .iter()
            .map(|g| a.iter().zip(&g.v).map(|(x, y)| x * y).sum())
            .collect();
        let pos: Vec<usize> = (0..self.gens.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..self.gens.len()).filter(|&i| vals[i].is_negative()).collect();
        if pos.is_empty() {
            for (g, v) in self.gens.iter_mut().zip(&vals) {
                if v.is_zero() {
                    bit_set(&mut g.tight, k);
                }
            }
            return;
        }
        let mut fresh = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = bits_and(&self.gens[p].tight, &self.gens[q].tight);
                if bits_count(&common) + 2 < self.dim {
                    continue;
                }
                let adjacent = self.gens.iter().enumerate().all(|(i, g)| {
                    i == p || i == q || !bits_subset(&common, &g.tight)
                });
                if !adjacent {
                    continue;
                }
                let (vp, vq) = (&vals[p], &vals[q]);
                let v: Vec<Rat> = self.gens[q]
                    .v
                    .iter()
                    .zip(&self.gens[p].v)
                    .map(|(x, y)| vp * x - vq * y)
                    .collect();
                let mut tight = common;
                bit_set(&mut tight, k);
                fresh.push(Generator {
                    v: normalize(v),
                    tight,
                });
            }
        }
        let mut kept: Vec<Generator> = Vec::with_capacity(self.gens.len() + fresh.len());
        for (g, v) in std::mem::take(&mut self.gens).into_iter().zip(&vals) {
            if v.is_positive() {
                continue;
            }
            let mut g = g;
            if v.is_zero() {
                bit_set(&mut g.tight, k);
            }
            kept.push(g);
        }
        kept.extend(fresh);
        self.gens = kept;
    }

    fn vertices(&self) -> Vec<Vec<Rat>> {
        self.gens
            .iter()
            .filter(|g| g.v[self.dim - 1].is_positive())
            .map(|g| g.v[..self.dim - 1].to_vec())
            .collect()
    }
}

fn normalize(v: Vec<Rat>) -> Vec<Rat> {
    let s = v.last().cloned().unwrap_or_else(Rat::zero);
    let scale = if s.is_positive() {
        s
    } else {
        v.iter().map(|x| x.abs()).max().unwrap_or_else(Rat::one)
    };
    if scale.is_zero() || scale.is_one() {
        return v;
    }
    v.iter().map(|x| x / &scale).collect()
}

/// All undominated extreme points of the `y`-projection, in lexicographic
/// order.
pub fn solve_undominated(poly: &Polyhedron) -> Vec<IneqVector> {
    let n = poly.n_y;
    let mut support = Support::new(poly);
    let ideal: Vec<Rat> = (0..n)
        .map(|i| {
            let mut e = vec![Rat::zero(); n];
            e[i] = Rat::one();
            support.maximize(&e).value
        })
        .collect();
    let mut dd = DoubleDescription::orthant_below(&ideal);
    let mut distance = Distance::new(poly);
    let mut confirmed: HashSet<Vec<Rat>> = HashSet::new();
    loop {
        let pending = dd.vertices().into_iter().find(|v| !confirmed.contains(v));
        let Some(v) = pending else {
            break;
        };
        let (t, lambda) = distance.measure(&v);
        if t.is_zero() {
            confirmed.insert(v);
            continue;
        }
        let level: Rat = lambda.iter().zip(&v).map(|(l, x)| l * x).sum::<Rat>() - t;
        let mut cut = lambda;
        cut.push(-level);
        dd.add(&cut);
    }
    let mut out: Vec<Vec<Rat>> = dd.vertices();
    out.sort();
    out.into_iter()
        .map(|y| IneqVector::new(y, Provenance::Benson))
        .collect()
}

/// Checks that `y` is in `Q` and is the unique maximizer of some strictly
/// positive objective among `candidates` and over `Q`.
pub fn certify_undominated(poly: &Polyhedron, y: &[Rat], candidates: &[Vec<Rat>]) -> bool {
    if !poly.contains(y) {
        return false;
    }
    let n = poly.n_y;
    let mut lp = LinearProgram::new(n, Direction::Minimize);
    lp.objective = vec![Rat::one(); n];
    for j in 0..n {
        lp.set_bounds(j, Some(Rat::one()), None);
    }
    for other in candidates {
        if other.as_slice() == y {
            continue;
        }
        let diff: Vec<Rat> = y.iter().zip(other).map(|(a, b)| a - b).collect();
        lp.add_dense_row(&diff, RowSense::Ge, Rat::one());
    }
    let res = solve_lp(&lp).expect("well-formed certification program");
    if res.status != LpStatus::Optimal {
        return false;
    }
    let w = res.x;
    let best = Support::new(poly).maximize(&w).value;
    let own: Rat = w.iter().zip(y).map(|(a, b)| a * b).sum();
    best == own
}

/// Scans `{0, ±1}ⁿ` for points of `Q`, keeps those not dominated by another
/// such point, and removes redundant ones.
pub fn oracle_undominated(poly: &Polyhedron, dim_limit: usize) -> Result<IneqSet, MolpError> {
    let n = poly.n_y;
    if n > dim_limit {
        return Err(MolpError::DimensionLimit { n, limit: dim_limit });
    }
    let mut member = Membership::new(poly);
    let mut feasible: HashSet<Vec<i8>> = HashSet::new();
    let mut prefix: Vec<i8> = Vec::with_capacity(n);
    scan(&mut member, n, &mut prefix, &mut feasible);
    let mut points: Vec<Vec<i8>> = feasible
        .iter()
        .filter(|y| {
            (0..n).all(|i| {
                if y[i] == 1 {
                    return true;
                }
                let mut up = (*y).clone();
                up[i] += 1;
                !feasible.contains(&up)
            })
        })
        .cloned()
        .collect();
    points.sort();
    let vectors: Vec<IneqVector> = points
        .into_iter()
        .map(|p| {
            IneqVector::new(
                p.into_iter().map(|x| Rat::from_int(x as i64)).collect(),
                Provenance::Oracle,
            )
        })
        .collect();
    Ok(eliminate_redundant(&vectors).with_labels(poly.labels.clone()))
}

fn scan(member: &mut Membership, n: usize, prefix: &mut Vec<i8>, out: &mut HashSet<Vec<i8>>) {
    let probe: Vec<Rat> = prefix
        .iter()
        .map(|&x| Rat::from_int(x as i64))
        .chain(std::iter::repeat_n(-Rat::one(), n - prefix.len()))
        .collect();
    if !member.contains(&probe) {
        return;
    }
    if prefix.len() == n {
        out.insert(prefix.clone());
        return;
    }
    for x in [-1i8, 0, 1] {
        prefix.push(x);
        scan(member, n, prefix, out);
        prefix.pop();
    }
}
