//! Model specifications and the partition of shock space into patches.
//!
//! Alternatives are indexed `0..D` internally. User-facing labels are
//! `{0, 1}` for binary models and `1..=D` otherwise; [`label_base`] converts.
//!
//! In every family alternative `d` is chosen at period `t` in state `s` when
//! `v[d][t] + γ·1{d = s} + ζ_d` is the strict maximum over alternatives.
//! Fixing `ζ_0 = 0` leaves `D − 1` free shock coordinates, and a patch is a
//! choice assignment whose defining open polyhedron is nonempty.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rat::Rat;
use crate::ratlp::strict_feasibility;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    StaticPanel,
    DynCondOneLag,
    DynUncondOneLag,
    DynCondBinaryTwoLag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Restriction {
    Stationary,
    Exchangeable,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::StaticPanel => "static",
            Family::DynCondOneLag => "dyn-cond",
            Family::DynUncondOneLag => "dyn-uncond",
            Family::DynCondBinaryTwoLag => "ar2",
        };
        f.write_str(s)
    }
}

/// A local model: one covariate/parameter configuration of a panel family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub restriction: Restriction,
    /// `v[d][t]`: index value of alternative `d` in period `t`.
    pub v: Vec<Vec<Rat>>,
    #[serde(default)]
    pub gamma: Rat,
    #[serde(default)]
    pub gamma1: Rat,
    #[serde(default)]
    pub gamma2: Rat,
    /// Initial choice (label), for the conditional families.
    #[serde(default)]
    pub y0: Option<usize>,
    /// Choice two periods before the first (label), two-lag family only.
    #[serde(default)]
    pub y_minus1: Option<usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("D must be at least 2 (got {0})")]
    TooFewAlternatives(usize),
    #[error("T must be at least 2 (got {0})")]
    TooFewPeriods(usize),
    #[error("v must be a {d}x{t} matrix (one row per alternative, one column per period)")]
    IndexShape { d: usize, t: usize },
    #[error("{0} requires an initial choice y0")]
    MissingInitial(Family),
    #[error("label {label} is outside the alternative labels {lo}..={hi}")]
    LabelOutOfRange { label: usize, lo: usize, hi: usize },
    #[error("the two-lag family requires D = 2 and T = 3")]
    TwoLagShape,
    #[error("the two-lag family requires y_minus1 in {{0, 1}}")]
    MissingPreInitial,
}

/// Offset between internal alternative indices and printed labels.
pub fn label_base(d: usize) -> usize {
    if d == 2 {
        0
    } else {
        1
    }
}

fn transpose_binary(a: &[Rat]) -> Vec<Vec<Rat>> {
    vec![vec![Rat::zero(); a.len()], a.to_vec()]
}

impl ModelSpec {
    pub fn static_panel(v: Vec<Vec<Rat>>, restriction: Restriction) -> ModelSpec {
        ModelSpec {
            family: Family::StaticPanel,
            d: v.len(),
            t: v.first().map_or(0, |r| r.len()),
            restriction,
            v,
            gamma: Rat::zero(),
            gamma1: Rat::zero(),
            gamma2: Rat::zero(),
            y0: None,
            y_minus1: None,
        }
    }

    /// Binary static model where alternative 1 has index `a[t]` relative to 0.
    pub fn binary_static(a: &[Rat], restriction: Restriction) -> ModelSpec {
        ModelSpec::static_panel(transpose_binary(a), restriction)
    }

    pub fn dyn_cond(
        v: Vec<Vec<Rat>>,
        gamma: Rat,
        y0: usize,
        restriction: Restriction,
    ) -> ModelSpec {
        ModelSpec {
            family: Family::DynCondOneLag,
            gamma,
            y0: Some(y0),
            ..ModelSpec::static_panel(v, restriction)
        }
    }

    pub fn dyn_uncond(v: Vec<Vec<Rat>>, gamma: Rat, restriction: Restriction) -> ModelSpec {
        ModelSpec {
            family: Family::DynUncondOneLag,
            gamma,
            ..ModelSpec::static_panel(v, restriction)
        }
    }

    /// Binary one-lag model in the threshold form `Y_t = 1{ε_t < a_t + γ̃·Y_{t−1}}`.
    ///
    /// The multinomial form adds `γ` to the utility of the previous choice,
    /// so `γ̃ = 2γ` up to a common shift of all thresholds.
    pub fn binary_kpt(a: &[Rat], gamma_tilde: Rat, restriction: Restriction) -> ModelSpec {
        ModelSpec::dyn_uncond(transpose_binary(a), gamma_tilde / Rat::from_int(2), restriction)
    }

    /// Conditional version of [`ModelSpec::binary_kpt`] given `Y_0 = y0`.
    pub fn binary_kpt_cond(
        a: &[Rat],
        gamma_tilde: Rat,
        y0: usize,
        restriction: Restriction,
    ) -> ModelSpec {
        ModelSpec::dyn_cond(
            transpose_binary(a),
            gamma_tilde / Rat::from_int(2),
            y0,
            restriction,
        )
    }

    /// Binary two-lag model over three periods with thresholds in `a`.
    pub fn ar2(a: Vec<Rat>, gamma1: Rat, gamma2: Rat, y0: usize, y_minus1: usize) -> ModelSpec {
        ModelSpec {
            family: Family::DynCondBinaryTwoLag,
            gamma1,
            gamma2,
            y0: Some(y0),
            y_minus1: Some(y_minus1),
            ..ModelSpec::static_panel(transpose_binary(&a), Restriction::Stationary)
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.d < 2 {
            return Err(SpecError::TooFewAlternatives(self.d));
        }
        if self.t < 2 {
            return Err(SpecError::TooFewPeriods(self.t));
        }
        if self.v.len() != self.d || self.v.iter().any(|r| r.len() != self.t) {
            return Err(SpecError::IndexShape {
                d: self.d,
                t: self.t,
            });
        }
        let base = label_base(self.d);
        let check = |label: usize| {
            if label < base || label >= base + self.d {
                Err(SpecError::LabelOutOfRange {
                    label,
                    lo: base,
                    hi: base + self.d - 1,
                })
            } else {
                Ok(())
            }
        };
        match self.family {
            Family::StaticPanel | Family::DynUncondOneLag => {}
            Family::DynCondOneLag => check(self.y0.ok_or(SpecError::MissingInitial(self.family))?)?,
            Family::DynCondBinaryTwoLag => {
                if self.d != 2 || self.t != 3 {
                    return Err(SpecError::TwoLagShape);
                }
                check(self.y0.ok_or(SpecError::MissingInitial(self.family))?)?;
                match self.y_minus1 {
                    Some(0) | Some(1) => {}
                    _ => return Err(SpecError::MissingPreInitial),
                }
            }
        }
        Ok(())
    }

    /// Internal index of the initial choice.
    pub fn initial(&self) -> Option<usize> {
        self.y0.map(|y| y - label_base(self.d))
    }

    pub fn label_base(&self) -> usize {
        label_base(self.d)
    }

    /// `v[1][t] − v[0][t]`, the binary threshold index of period `t`.
    pub fn binary_index(&self, t: usize) -> Rat {
        &self.v[1][t] - &self.v[0][t]
    }

    /// Index-value improvement `v[d][1] − v[d][0]` for two-period models.
    pub fn delta_v(&self) -> Vec<Rat> {
        self.v.iter().map(|r| &r[1] - &r[0]).collect()
    }
}

/// A cell of shock space inducing fixed choices; payloads are internal indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Patch {
    /// Choice per period.
    Static(Vec<usize>),
    /// First-period choice `c` and `table[t − 1][s]`, the choice at period
    /// `t ≥ 1` when the previous choice was `s`.
    DynCond { c: usize, table: Vec<Vec<usize>> },
    /// `table[t][s]`: choice at period `t` when the previous choice was `s`.
    DynUncond(Vec<Vec<usize>>),
    /// Choices in the seven threshold cells of the two-lag model.
    TwoLag([u8; 7]),
}

impl Patch {
    /// Choice at 0-based period `t` given the previous choice `state`.
    pub fn choice(&self, t: usize, state: usize) -> usize {
        match self {
            Patch::Static(c) => c[t],
            Patch::DynCond { c, table } => {
                if t == 0 {
                    *c
                } else {
                    table[t - 1][state]
                }
            }
            Patch::DynUncond(table) => table[t][state],
            Patch::TwoLag(_) => panic!("two-lag patches are indexed by cell, not by period"),
        }
    }
}

/// A choice cell: period and (for dynamic families) the lagged choice.
#[derive(Debug, Clone, Copy)]
struct Cell {
    t: usize,
    state: Option<usize>,
}

fn cells(spec: &ModelSpec) -> Vec<Cell> {
    match spec.family {
        Family::StaticPanel => (0..spec.t).map(|t| Cell { t, state: None }).collect(),
        Family::DynCondOneLag => {
            let mut out = vec![Cell {
                t: 0,
                state: spec.initial(),
            }];
            for t in 1..spec.t {
                for s in 0..spec.d {
                    out.push(Cell { t, state: Some(s) });
                }
            }
            out
        }
        Family::DynUncondOneLag => {
            let mut out = Vec::new();
            for t in 0..spec.t {
                for s in 0..spec.d {
                    out.push(Cell { t, state: Some(s) });
                }
            }
            out
        }
        Family::DynCondBinaryTwoLag => Vec::new(),
    }
}

fn utility(spec: &ModelSpec, d: usize, cell: Cell) -> Rat {
    let mut u = spec.v[d][cell.t].clone();
    if cell.state == Some(d) {
        u += &spec.gamma;
    }
    u
}

/// Rows `ζ_{d'} − ζ_d < u_d − u_{d'}` over `ζ_1..ζ_{D−1}` (with `ζ_0 = 0`).
fn cell_rows(spec: &ModelSpec, cell: Cell, choice: usize, a: &mut Vec<Vec<Rat>>, b: &mut Vec<Rat>) {
    let ud = utility(spec, choice, cell);
    for other in 0..spec.d {
        if other == choice {
            continue;
        }
        let mut row = vec![Rat::zero(); spec.d - 1];
        if other > 0 {
            row[other - 1] = Rat::one();
        }
        if choice > 0 {
            row[choice - 1] = -Rat::one();
        }
        a.push(row);
        b.push(&ud - &utility(spec, other, cell));
    }
}

fn encode(spec: &ModelSpec, choices: &[usize]) -> Patch {
    match spec.family {
        Family::StaticPanel => Patch::Static(choices.to_vec()),
        Family::DynCondOneLag => Patch::DynCond {
            c: choices[0],
            table: choices[1..].chunks(spec.d).map(|r| r.to_vec()).collect(),
        },
        Family::DynUncondOneLag => {
            Patch::DynUncond(choices.chunks(spec.d).map(|r| r.to_vec()).collect())
        }
        Family::DynCondBinaryTwoLag => {
            let mut out = [0u8; 7];
            for (o, c) in out.iter_mut().zip(choices) {
                *o = *c as u8;
            }
            Patch::TwoLag(out)
        }
    }
}

fn decode(spec: &ModelSpec, patch: &Patch) -> Option<Vec<usize>> {
    match (spec.family, patch) {
        (Family::StaticPanel, Patch::Static(c)) => Some(c.clone()),
        (Family::DynCondOneLag, Patch::DynCond { c, table }) => {
            let mut out = vec![*c];
            for r in table {
                out.extend_from_slice(r);
            }
            Some(out)
        }
        (Family::DynUncondOneLag, Patch::DynUncond(table)) => Some(table.concat()),
        (Family::DynCondBinaryTwoLag, Patch::TwoLag(c)) => {
            Some(c.iter().map(|&x| x as usize).collect())
        }
        _ => None,
    }
}

/// The seven two-lag thresholds: alternative 1 is chosen in cell `k` iff
/// the shock lies below `θ_k`.
pub fn ar2_thresholds(spec: &ModelSpec) -> [Rat; 7] {
    let a: Vec<Rat> = (0..3).map(|t| spec.binary_index(t)).collect();
    let (g1, g2) = (&spec.gamma1, &spec.gamma2);
    let y0 = Rat::from(spec.initial().unwrap_or(0));
    let ym1 = Rat::from(spec.y_minus1.unwrap_or(0));
    [
        &a[0] + &(g1 * &y0) + g2 * &ym1,
        &a[1] + &(g2 * &y0),
        &a[1] + g1 + g2 * &y0,
        a[2].clone(),
        &a[2] + g2,
        &a[2] + g1,
        &a[2] + g1 + g2,
    ]
}

/// Binary thresholds of every cell: alternative 1 is chosen iff `ζ_0 − ζ_1 < θ`.
fn binary_thresholds(spec: &ModelSpec) -> Vec<Rat> {
    if spec.family == Family::DynCondBinaryTwoLag {
        return ar2_thresholds(spec).to_vec();
    }
    cells(spec)
        .into_iter()
        .map(|cell| &utility(spec, 1, cell) - &utility(spec, 0, cell))
        .collect()
}

/// Choice patterns of the open intervals cut by `thresholds`, sorted.
fn interval_patterns(thresholds: &[Rat]) -> Vec<Vec<usize>> {
    let mut cuts: Vec<Rat> = thresholds.to_vec();
    cuts.sort();
    cuts.dedup();
    let mut probes = Vec::with_capacity(cuts.len() + 1);
    probes.push(&cuts[0] - &Rat::one());
    for w in cuts.windows(2) {
        probes.push((&w[0] + &w[1]) / Rat::from_int(2));
    }
    probes.push(&cuts[cuts.len() - 1] + &Rat::one());
    let mut out: Vec<Vec<usize>> = probes
        .iter()
        .map(|u| thresholds.iter().map(|th| usize::from(u < th)).collect())
        .collect();
    out.sort();
    out
}

/// Strict feasibility of the open system of a candidate choice assignment.
pub fn candidate_is_patch(spec: &ModelSpec, patch: &Patch) -> bool {
    let Some(choices) = decode(spec, patch) else {
        return false;
    };
    if spec.family == Family::DynCondBinaryTwoLag {
        let th = ar2_thresholds(spec);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (c, t) in choices.iter().zip(th.iter()) {
            if *c == 1 {
                a.push(vec![Rat::one()]);
                b.push(t.clone());
            } else {
                a.push(vec![-Rat::one()]);
                b.push(-t);
            }
        }
        return strict_feasibility(&a, &b).expect("well-formed system").strictly_feasible;
    }
    let cs = cells(spec);
    if choices.len() != cs.len() || choices.iter().any(|&c| c >= spec.d) {
        return false;
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (cell, &c) in cs.iter().zip(&choices) {
        cell_rows(spec, *cell, c, &mut a, &mut b);
    }
    strict_feasibility(&a, &b).expect("well-formed system").strictly_feasible
}

/// Depth-first enumeration with prefix pruning: an infeasible partial system
/// stays infeasible under every completion.
fn lp_patches(spec: &ModelSpec) -> Vec<Patch> {
    let cs = cells(spec);
    let mut out = Vec::new();
    let mut choices = Vec::with_capacity(cs.len());
    let mut a = Vec::new();
    let mut b = Vec::new();
    fn recurse(
        spec: &ModelSpec,
        cs: &[Cell],
        choices: &mut Vec<usize>,
        a: &mut Vec<Vec<Rat>>,
        b: &mut Vec<Rat>,
        out: &mut Vec<Patch>,
    ) {
        let k = choices.len();
        if k == cs.len() {
            out.push(encode(spec, choices));
            return;
        }
        for c in 0..spec.d {
            let mark = a.len();
            cell_rows(spec, cs[k], c, a, b);
            if strict_feasibility(a, b).expect("well-formed system").strictly_feasible {
                choices.push(c);
                recurse(spec, cs, choices, a, b, out);
                choices.pop();
            }
            a.truncate(mark);
            b.truncate(mark);
        }
    }
    recurse(spec, &cs, &mut choices, &mut a, &mut b, &mut out);
    out
}

fn threshold_patches(spec: &ModelSpec) -> Vec<Patch> {
    interval_patterns(&binary_thresholds(spec))
        .iter()
        .map(|c| encode(spec, c))
        .collect()
}

/// Patches of a static model, in lexicographic order.
///
/// Two periods use the closed-form rule (`(d, d')` is a patch iff `d = d'`
/// or `Δv_d < Δv_{d'}`); binary models sort thresholds; anything else runs
/// the strict-feasibility LPs.
pub fn static_patches(spec: &ModelSpec) -> Vec<Patch> {
    assert_eq!(spec.family, Family::StaticPanel);
    if spec.t == 2 {
        let dv = spec.delta_v();
        let mut out = Vec::new();
        for d in 0..spec.d {
            for e in 0..spec.d {
                if d == e || dv[d] < dv[e] {
                    out.push(Patch::Static(vec![d, e]));
                }
            }
        }
        return out;
    }
    if spec.d == 2 {
        return threshold_patches(spec);
    }
    lp_patches(spec)
}

/// Static patches computed by the LP route regardless of shape.
pub fn static_patches_lp(spec: &ModelSpec) -> Vec<Patch> {
    assert_eq!(spec.family, Family::StaticPanel);
    lp_patches(spec)
}

pub fn dyn_cond_patches(spec: &ModelSpec) -> Vec<Patch> {
    assert_eq!(spec.family, Family::DynCondOneLag);
    if spec.d == 2 {
        threshold_patches(spec)
    } else {
        lp_patches(spec)
    }
}

pub fn dyn_uncond_patches(spec: &ModelSpec) -> Vec<Patch> {
    assert_eq!(spec.family, Family::DynUncondOneLag);
    if spec.d == 2 {
        threshold_patches(spec)
    } else {
        lp_patches(spec)
    }
}

pub fn ar2_patches(spec: &ModelSpec) -> Vec<Patch> {
    assert_eq!(spec.family, Family::DynCondBinaryTwoLag);
    threshold_patches(spec)
}

/// Dispatches on the family.
pub fn patches(spec: &ModelSpec) -> Vec<Patch> {
    match spec.family {
        Family::StaticPanel => static_patches(spec),
        Family::DynCondOneLag => dyn_cond_patches(spec),
        Family::DynUncondOneLag => dyn_uncond_patches(spec),
        Family::DynCondBinaryTwoLag => ar2_patches(spec),
    }
}

/// All `n^t` patch-index tuples in lexicographic order.
pub fn regions(n: usize, t: usize) -> Vec<Vec<usize>> {
    let total = n.pow(t as u32);
    (0..total).map(|k| region_tuple(k, n, t)).collect()
}

/// Tuple of the `k`-th region (base-`n` digits, most significant first).
pub fn region_tuple(mut k: usize, n: usize, t: usize) -> Vec<usize> {
    let mut out = vec![0; t];
    for slot in out.iter_mut().rev() {
        *slot = k % n;
        k /= n;
    }
    out
}

/// Inverse of [`region_tuple`].
pub fn region_index(tuple: &[usize], n: usize) -> usize {
    tuple.iter().fold(0, |acc, &i| acc * n + i)
}
