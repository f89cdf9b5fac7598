//! Finite case enumeration over weak orderings of threshold quantities.
//!
//! The patch structure of a local model depends on the parameters only
//! through the weak ordering of a family-specific list of linear threshold
//! forms. A case is one realizable ordering together with a representative
//! parameter point.
//!
//! All supported forms are homogeneous and invariant under a common shift,
//! so an ordering is strictly realizable iff it is realizable with every gap
//! at least 1 and the top group pinned to the number of forms. The
//! realizability program solves exactly that, maximizing the bottom group,
//! which yields small integral representatives such as `(4, 3, 2, 2)`.

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discretize::{label_base, Family, ModelSpec, Restriction};
use crate::rat::{dot, Rat};
use crate::ratlp::{solve_lp, Direction, LinearProgram, LpStatus, RowSense};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CasesError {
    #[error("case enumeration is not available for {family} with D = {d}, T = {t}")]
    Unsupported { family: Family, d: usize, t: usize },
    #[error("the two-lag family needs initial choices y0 and y_minus1 in {{0, 1}}")]
    MissingInitial,
    #[error("ordering is not realizable")]
    NotRealizable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    None,
    Canonical,
}

/// A threshold quantity as a linear form in the free parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdForm {
    pub label: String,
    pub coeffs: Vec<Rat>,
}

impl ThresholdForm {
    pub fn eval(&self, x: &[Rat]) -> Rat {
        dot(&self.coeffs, x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseFamily {
    pub family: Family,
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub y0: Option<usize>,
    pub y_minus1: Option<usize>,
    pub params: Vec<String>,
    forms: Vec<ThresholdForm>,
}

fn unit(n: usize, entries: &[(usize, i64)]) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); n];
    for &(j, c) in entries {
        v[j] += Rat::from_int(c);
    }
    v
}

impl CaseFamily {
    /// Static panels with `T = 2` (forms `Δv_d`), the binary unconditional
    /// one-lag model with `T = 2` (forms `v_t`, `v_t + γ` in threshold
    /// form) and the binary two-lag model with `T = 3` (its seven
    /// thresholds at the given initial choices).
    pub fn new(
        family: Family,
        d: usize,
        t: usize,
        y0: Option<usize>,
        y_minus1: Option<usize>,
    ) -> Result<CaseFamily, CasesError> {
        let unsupported = CasesError::Unsupported { family, d, t };
        let (params, forms): (Vec<String>, Vec<ThresholdForm>) = match family {
            Family::StaticPanel if t == 2 && d >= 2 => {
                let base = label_base(d);
                let names: Vec<String> = (0..d).map(|k| format!("Δv{}", k + base)).collect();
                let forms = names
                    .iter()
                    .enumerate()
                    .map(|(k, name)| ThresholdForm {
                        label: name.clone(),
                        coeffs: unit(d, &[(k, 1)]),
                    })
                    .collect();
                (names, forms)
            }
            Family::DynUncondOneLag if t == 2 && d == 2 => {
                let form = |label: &str, e: &[(usize, i64)]| ThresholdForm {
                    label: label.to_string(),
                    coeffs: unit(3, e),
                };
                (
                    vec!["v1".into(), "v2".into(), "γ".into()],
                    vec![
                        form("v1", &[(0, 1)]),
                        form("v2", &[(1, 1)]),
                        form("v1+γ", &[(0, 1), (2, 1)]),
                        form("v2+γ", &[(1, 1), (2, 1)]),
                    ],
                )
            }
            Family::DynCondBinaryTwoLag if t == 3 && d == 2 => {
                let (y0, ym1) = match (y0, y_minus1) {
                    (Some(a @ 0..=1), Some(b @ 0..=1)) => (a as i64, b as i64),
                    _ => return Err(CasesError::MissingInitial),
                };
                let form = |label: String, e: &[(usize, i64)]| ThresholdForm {
                    label,
                    coeffs: unit(5, e),
                };
                (
                    ["v1", "v2", "v3", "γ1", "γ2"].iter().map(|s| s.to_string()).collect(),
                    vec![
                        form(format!("v1+{y0}γ1+{ym1}γ2"), &[(0, 1), (3, y0), (4, ym1)]),
                        form(format!("v2+{y0}γ2"), &[(1, 1), (4, y0)]),
                        form(format!("v2+γ1+{y0}γ2"), &[(1, 1), (3, 1), (4, y0)]),
                        form("v3".into(), &[(2, 1)]),
                        form("v3+γ2".into(), &[(2, 1), (4, 1)]),
                        form("v3+γ1".into(), &[(2, 1), (3, 1)]),
                        form("v3+γ1+γ2".into(), &[(2, 1), (3, 1), (4, 1)]),
                    ],
                )
            }
            _ => return Err(unsupported),
        };
        Ok(CaseFamily {
            family,
            d,
            t,
            y0,
            y_minus1,
            params,
            forms,
        })
    }

    pub fn forms(&self) -> &[ThresholdForm] {
        &self.forms
    }

    /// The local model at parameter point `x`.
    pub fn spec_for(&self, x: &[Rat], restriction: Restriction) -> ModelSpec {
        match self.family {
            Family::StaticPanel => ModelSpec::static_panel(
                x.iter().map(|dv| vec![Rat::zero(), dv.clone()]).collect(),
                restriction,
            ),
            Family::DynUncondOneLag => ModelSpec::binary_kpt(&x[..2], x[2].clone(), restriction),
            Family::DynCondBinaryTwoLag => ModelSpec::ar2(
                x[..3].to_vec(),
                x[3].clone(),
                x[4].clone(),
                self.y0.expect("checked at construction"),
                self.y_minus1.expect("checked at construction"),
            ),
            Family::DynCondOneLag => unreachable!("rejected at construction"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseDescriptor {
    pub family: CaseFamily,
    /// Groups of form indices in increasing order of value.
    pub ordering: Vec<Vec<usize>>,
    pub representative: Vec<Rat>,
    pub realizable: bool,
}

impl CaseDescriptor {
    pub fn describe(&self) -> String {
        let forms = self.family.forms();
        self.ordering
            .iter()
            .map(|g| {
                g.iter()
                    .map(|&i| forms[i].label.as_str())
                    .collect::<Vec<_>>()
                    .join(" = ")
            })
            .collect::<Vec<_>>()
            .join(" < ")
    }

    pub fn to_spec(&self, restriction: Restriction) -> ModelSpec {
        self.family.spec_for(&self.representative, restriction)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Realization {
    pub ok: bool,
    pub witness: Option<Vec<Rat>>,
}

struct OrderingProgram {
    lp: LinearProgram,
    bottom: Vec<Rat>,
}

/// Rows for `ordering` over the used forms: equal within groups, gaps of at
/// least `gaps[k]` between consecutive groups, top group pinned to `top`.
fn ordering_program(
    family: &CaseFamily,
    ordering: &[Vec<usize>],
    gaps: &[Rat],
    top: Rat,
) -> OrderingProgram {
    let n = family.params.len();
    let forms = family.forms();
    let mut lp = LinearProgram::new(n, Direction::Maximize);
    for j in 0..n {
        lp.set_free(j);
    }
    let diff = |a: usize, b: usize| -> Vec<Rat> {
        forms[a]
            .coeffs
            .iter()
            .zip(&forms[b].coeffs)
            .map(|(x, y)| x - y)
            .collect()
    };
    for group in ordering {
        for &i in &group[1..] {
            lp.add_dense_row(&diff(i, group[0]), RowSense::Eq, Rat::zero());
        }
    }
    for (k, pair) in ordering.windows(2).enumerate() {
        lp.add_dense_row(&diff(pair[1][0], pair[0][0]), RowSense::Ge, gaps[k].clone());
    }
    let head = &ordering[ordering.len() - 1][0];
    lp.add_dense_row(&forms[*head].coeffs, RowSense::Eq, top);
    OrderingProgram {
        lp,
        bottom: forms[ordering[0][0]].coeffs.clone(),
    }
}

/// Decides strict realizability of `ordering` (groups in increasing order).
pub fn realizable(family: &CaseFamily, ordering: &[Vec<usize>]) -> Realization {
    if ordering.is_empty() {
        return Realization {
            ok: true,
            witness: Some(vec![Rat::zero(); family.params.len()]),
        };
    }
    let gaps = vec![Rat::one(); ordering.len() - 1];
    let top = Rat::from_int(family.forms().len() as i64);
    let mut prog = ordering_program(family, ordering, &gaps, top);
    prog.lp.objective = prog.bottom;
    let res = solve_lp(&prog.lp).expect("well-formed ordering program");
    match res.status {
        LpStatus::Optimal => Realization {
            ok: true,
            witness: Some(res.x),
        },
        _ => Realization {
            ok: false,
            witness: None,
        },
    }
}

/// Another parameter point realizing `ordering`: a vertex of the ordering
/// cone under random gaps, a random pinned top value and a random objective,
/// inside a box.
pub fn redraw(family: &CaseFamily, ordering: &[Vec<usize>], seed: u64) -> Result<Vec<Rat>, CasesError> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let gaps: Vec<Rat> = (1..ordering.len().max(1))
        .map(|_| Rat::new(rng.gen_range(1..=12), rng.gen_range(1..=4)))
        .collect();
    let top = Rat::from_int(rng.gen_range(-6..=6));
    let mut prog = ordering_program(family, ordering, &gaps, top);
    let n = family.params.len();
    let bound = Rat::from_int(1000);
    for j in 0..n {
        prog.lp.set_bounds(j, Some(-&bound), Some(bound.clone()));
    }
    prog.lp.objective = (0..n).map(|_| Rat::from_int(rng.gen_range(-5..=5))).collect();
    let res = solve_lp(&prog.lp).expect("well-formed ordering program");
    match res.status {
        LpStatus::Optimal => Ok(res.x),
        _ => Err(CasesError::NotRealizable),
    }
}

/// All weak orderings of the forms, built by inserting one form at a time
/// and pruning prefixes that are already unrealizable.
fn all_orderings(family: &CaseFamily) -> Vec<Vec<Vec<usize>>> {
    fn extend(family: &CaseFamily, next: usize, current: Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if next == family.forms().len() {
            out.push(current);
            return;
        }
        let mut options = Vec::new();
        for g in 0..current.len() {
            let mut merged = current.clone();
            merged[g].push(next);
            options.push(merged);
        }
        for pos in 0..=current.len() {
            let mut inserted = current.clone();
            inserted.insert(pos, vec![next]);
            options.push(inserted);
        }
        for option in options {
            if realizable(family, &option).ok {
                extend(family, next + 1, option, out);
            }
        }
    }
    let mut out = Vec::new();
    extend(family, 0, Vec::new(), &mut out);
    out
}

/// Tie patterns of `Δv` sorted in decreasing order of alternative label:
/// each composition of `D` becomes an ordering whose groups are runs of
/// consecutive alternatives, the first run on top.
fn static_canonical(d: usize) -> Vec<Vec<Vec<usize>>> {
    (0u32..1 << (d - 1))
        .map(|cuts| {
            let mut runs: Vec<Vec<usize>> = vec![vec![0]];
            for k in 1..d {
                if cuts >> (k - 1) & 1 == 1 {
                    runs.push(vec![k]);
                } else {
                    runs.last_mut().expect("nonempty").push(k);
                }
            }
            runs.reverse();
            runs
        })
        .collect()
}

fn group_of(ordering: &[Vec<usize>], form: usize) -> usize {
    ordering
        .iter()
        .position(|g| g.contains(&form))
        .expect("every form is placed")
}

pub fn enumerate_cases(family: &CaseFamily, symmetry: Symmetry) -> Result<Vec<CaseDescriptor>, CasesError> {
    let orderings = match (family.family, symmetry) {
        (Family::StaticPanel, Symmetry::Canonical) => static_canonical(family.d),
        (Family::DynUncondOneLag, Symmetry::Canonical) => all_orderings(family)
            .into_iter()
            .filter(|o| group_of(o, 0) <= group_of(o, 1))
            .collect(),
        _ => all_orderings(family),
    };
    let mut out = Vec::new();
    for ordering in orderings {
        let r = realizable(family, &ordering);
        if let Some(witness) = r.witness {
            out.push(CaseDescriptor {
                family: family.clone(),
                ordering,
                representative: witness,
                realizable: true,
            });
        }
    }
    Ok(out)
}
