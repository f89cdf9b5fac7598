//! Analytic inequality families for the model classes with known closed forms.
//!
//! Each generator returns the candidate vectors in a fixed order without any
//! reduction, so callers can count them and compare with the solver output
//! after [`crate::reduce::eliminate_redundant`]. Vectors are laid out like the
//! rows of the response matrix: outcome `(d₁, …, d_T)` of internal indices
//! sits at position `Σ d_t·D^(T−t)`.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::discretize::{label_base, Family, ModelSpec};
use crate::matrices::outcome_labels;
use crate::molp::{IneqVector, Provenance};
use crate::rat::{dot, Rat};
use crate::reduce::IneqSet;

/// Largest `D` for which lower sets are enumerated over all subsets.
pub const SUBSET_LIMIT: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClosedFormError {
    #[error("tied index differences; this family needs a strict ranking")]
    Ties,
    #[error("this family needs a {expected} model (got {got})")]
    WrongFamily { expected: Family, got: Family },
    #[error("this family needs T = {expected} (got {got})")]
    Periods { expected: usize, got: usize },
    #[error("lower-set enumeration is limited to D = {limit} (got {d})")]
    TooLarge { d: usize, limit: usize },
    #[error("index matrix has {have} periods, {need} requested")]
    MissingPeriods { have: usize, need: usize },
}

fn set_of(vectors: Vec<Vec<Rat>>, d: usize, t: usize) -> IneqSet {
    IneqSet {
        vectors: vectors
            .into_iter()
            .map(|y| IneqVector::new(y, Provenance::ClosedForm))
            .collect(),
        labels: outcome_labels(d, t, label_base(d)),
        log: Vec::new(),
    }
}

fn require(spec: &ModelSpec, family: Family, t: usize) -> Result<(), ClosedFormError> {
    if spec.family != family {
        return Err(ClosedFormError::WrongFamily {
            expected: family,
            got: spec.family,
        });
    }
    if spec.t != t {
        return Err(ClosedFormError::Periods {
            expected: t,
            got: spec.t,
        });
    }
    Ok(())
}

/// Binary two-period static inequalities given the sign of `v₁ − v₂` for
/// alternative 1 (alternative 0 has index 0 in both periods).
pub fn cm_inequalities(sign: Ordering) -> IneqSet {
    let up = vec![Rat::zero(), -Rat::one(), Rat::one(), Rat::zero()];
    let down: Vec<Rat> = up.iter().map(|x| -x).collect();
    let vectors = match sign {
        Ordering::Less => vec![up],
        Ordering::Greater => vec![down],
        Ordering::Equal => vec![up, down],
    };
    set_of(vectors, 2, 2)
}

/// Alternatives ranked by decreasing index improvement `Δv_d = v_{d2} − v_{d1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedAlternatives {
    delta_v: Vec<Rat>,
    order: Vec<usize>,
}

impl RankedAlternatives {
    pub fn new(delta_v: Vec<Rat>) -> Result<RankedAlternatives, ClosedFormError> {
        let mut order: Vec<usize> = (0..delta_v.len()).collect();
        order.sort_by(|&a, &b| delta_v[b].cmp(&delta_v[a]));
        if order.windows(2).any(|w| delta_v[w[0]] == delta_v[w[1]]) {
            return Err(ClosedFormError::Ties);
        }
        Ok(RankedAlternatives { delta_v, order })
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<RankedAlternatives, ClosedFormError> {
        require(spec, Family::StaticPanel, 2)?;
        RankedAlternatives::new(spec.delta_v())
    }

    pub fn d(&self) -> usize {
        self.delta_v.len()
    }

    pub fn delta_v(&self) -> &[Rat] {
        &self.delta_v
    }

    /// `order()[i]` is the alternative with the `(i+1)`-th largest `Δv`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `U_i`: the `i` alternatives with largest `Δv`, in rank order.
    pub fn upper(&self, i: usize) -> Vec<usize> {
        self.order[..i].to_vec()
    }

    /// `L_j`: alternatives of rank `j` and below, in rank order.
    pub fn lower(&self, j: usize) -> Vec<usize> {
        self.order[j - 1..].to_vec()
    }
}

/// `P(Y₁ ∈ U_i) ≤ P(Y₂ ∈ U_i)` for `i = 1, …, D − 1`.
pub fn pp_static_inequalities(ranked: &RankedAlternatives) -> IneqSet {
    let d = ranked.d();
    let vectors = (1..d)
        .map(|i| {
            let mut inside = vec![false; d];
            for a in ranked.upper(i) {
                inside[a] = true;
            }
            let mut y = vec![Rat::zero(); d * d];
            for a in 0..d {
                for b in 0..d {
                    if inside[a] && !inside[b] {
                        y[a * d + b] = Rat::one();
                    } else if !inside[a] && inside[b] {
                        y[a * d + b] = -Rat::one();
                    }
                }
            }
            y
        })
        .collect();
    set_of(vectors, d, 2)
}

/// A union `∪ U_k × L_{k′}` of rank-coordinate products, or its transpose.
///
/// Ranks are 1-based; `(a, b)` means first-period rank `a`, second-period
/// rank `b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StaircaseSet {
    d: usize,
    products: Vec<(usize, usize)>,
    transposed: bool,
}

impl StaircaseSet {
    /// Builds the set `{(a, b) : a ≤ m, b ≥ i_a}` from the nondecreasing
    /// thresholds `i_1, …, i_m`.
    pub fn from_thresholds(d: usize, thresholds: &[usize]) -> StaircaseSet {
        assert!(thresholds.windows(2).all(|w| w[0] <= w[1]), "thresholds must be nondecreasing");
        assert!(thresholds.iter().all(|&i| (1..=d).contains(&i)), "thresholds are ranks");
        let products = thresholds
            .iter()
            .enumerate()
            .map(|(a, &i)| (a + 1, i))
            .collect();
        StaircaseSet {
            d,
            products,
            transposed: false,
        }
    }

    pub fn products(&self) -> &[(usize, usize)] {
        &self.products
    }

    /// `per(A) = ∪ L_{k′} × U_k`.
    pub fn per(&self) -> StaircaseSet {
        StaircaseSet {
            transposed: !self.transposed,
            ..self.clone()
        }
    }

    pub fn cells(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for &(k, k2) in &self.products {
            for a in 1..=k {
                for b in k2..=self.d {
                    out.insert(if self.transposed { (b, a) } else { (a, b) });
                }
            }
        }
        out
    }
}

/// Every nonempty staircase set over `D` ranks: one per nondecreasing
/// threshold sequence of length `m ≤ D`, `C(2D, D) − 1` in total.
pub fn staircase_sets(d: usize) -> Vec<StaircaseSet> {
    fn extend(d: usize, prefix: &mut Vec<usize>, out: &mut Vec<StaircaseSet>) {
        if !prefix.is_empty() {
            out.push(StaircaseSet::from_thresholds(d, prefix));
        }
        if prefix.len() == d {
            return;
        }
        let start = prefix.last().copied().unwrap_or(1);
        for i in start..=d {
            prefix.push(i);
            extend(d, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(d, &mut Vec::new(), &mut out);
    out
}

/// `y = 𝟙_A − 𝟙_{per(A)}` for every staircase set `A`, mapped from ranks to
/// alternatives.
pub fn exchangeable_family(ranked: &RankedAlternatives) -> IneqSet {
    let d = ranked.d();
    let alt = |rank: usize| ranked.order()[rank - 1];
    let vectors = staircase_sets(d)
        .into_iter()
        .map(|a| {
            let mut y = vec![Rat::zero(); d * d];
            for (r1, r2) in a.cells() {
                y[alt(r1) * d + alt(r2)] += Rat::one();
            }
            for (r1, r2) in a.per().cells() {
                y[alt(r1) * d + alt(r2)] -= Rat::one();
            }
            y
        })
        .collect();
    set_of(vectors, d, 2)
}

/// Period-to-period improvements `Δ(d, d₁)` of a two-period one-lag model
/// given `Y₀ = y₀`, and the lower sets they induce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynLowerSets {
    d: usize,
    /// `delta[d₁][d]`.
    delta: Vec<Vec<Rat>>,
    lower: Vec<Vec<BTreeSet<usize>>>,
    family: Vec<BTreeSet<usize>>,
}

impl DynLowerSets {
    pub fn new(spec: &ModelSpec) -> Result<DynLowerSets, ClosedFormError> {
        require(spec, Family::DynCondOneLag, 2)?;
        let d = spec.d;
        if d > SUBSET_LIMIT {
            return Err(ClosedFormError::TooLarge {
                d,
                limit: SUBSET_LIMIT,
            });
        }
        let y0 = spec.initial().expect("validated conditional model");
        let delta: Vec<Vec<Rat>> = (0..d)
            .map(|d1| {
                (0..d)
                    .map(|a| {
                        let mut x = &spec.v[a][1] - &spec.v[a][0];
                        if a == d1 {
                            x += &spec.gamma;
                        }
                        if a == y0 {
                            x -= &spec.gamma;
                        }
                        x
                    })
                    .collect()
            })
            .collect();
        let lower: Vec<Vec<BTreeSet<usize>>> = delta.iter().map(|row| lower_sets(row)).collect();
        let family: BTreeSet<BTreeSet<usize>> = lower.iter().flatten().cloned().collect();
        let mut family: Vec<BTreeSet<usize>> = family.into_iter().collect();
        family.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(DynLowerSets {
            d,
            delta,
            lower,
            family,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `Δ(·, d₁)` over alternatives.
    pub fn delta(&self, d1: usize) -> &Vec<Rat> {
        &self.delta[d1]
    }

    /// `ℒ(d₁)`.
    pub fn lower_sets(&self, d1: usize) -> &[BTreeSet<usize>] {
        &self.lower[d1]
    }

    /// `𝒜 = ∪_d ℒ(d)`, ordered by size and then lexicographically.
    pub fn family(&self) -> &[BTreeSet<usize>] {
        &self.family
    }

    pub fn is_lower(&self, d1: usize, set: &BTreeSet<usize>) -> bool {
        self.lower[d1].contains(set)
    }

    /// `B_{d₁|A}`: the union of the members of `ℒ(d₁)` contained in `A`.
    pub fn bound_set(&self, d1: usize, a: &BTreeSet<usize>) -> BTreeSet<usize> {
        self.lower[d1]
            .iter()
            .filter(|b| b.is_subset(a))
            .flatten()
            .copied()
            .collect()
    }
}

/// Nonempty proper subsets `A` with `Δ(a) ≤ Δ(b)` for all `a ∈ A`, `b ∉ A`.
fn lower_sets(delta: &[Rat]) -> Vec<BTreeSet<usize>> {
    let d = delta.len();
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << d) - 1 {
        let inside = |a: usize| mask >> a & 1 == 1;
        let top = (0..d).filter(|&a| inside(a)).map(|a| &delta[a]).max();
        let bottom = (0..d).filter(|&a| !inside(a)).map(|a| &delta[a]).min();
        if top <= bottom {
            out.push((0..d).filter(|&a| inside(a)).collect());
        }
    }
    out
}

/// For each `A ∈ 𝒜`: `P(∪_{d₁} {Y₁ = d₁, Y₂ ∈ B_{d₁|A}}) ≤ P(Y₁ ∈ A)`.
pub fn dynamic_family(spec: &ModelSpec) -> Result<IneqSet, ClosedFormError> {
    let lower = DynLowerSets::new(spec)?;
    let d = lower.d();
    let vectors = lower
        .family()
        .iter()
        .map(|a| {
            let mut y = vec![Rat::zero(); d * d];
            for d1 in 0..d {
                for d2 in lower.bound_set(d1, a) {
                    y[d1 * d + d2] += Rat::one();
                }
            }
            for &d1 in a {
                for d2 in 0..d {
                    y[d1 * d + d2] -= Rat::one();
                }
            }
            y
        })
        .collect();
    Ok(set_of(vectors, d, 2))
}

/// The six guarded binary inequalities for thresholds `a₁, a₂`, state
/// dependence `γ̃` and initial choice `y₀ ∈ {0, 1}`, in threshold form
/// `Y_t = 1{ε_t < a_t + γ̃·Y_{t−1}}`.
pub fn kpt_family(a1: &Rat, a2: &Rat, gamma_tilde: &Rat, y0: usize) -> IneqSet {
    assert!(y0 <= 1, "binary initial choice");
    let delta = a2 - a1;
    let g = gamma_tilde;
    let gy0 = if y0 == 1 { g.clone() } else { Rat::zero() };
    let g_other = if y0 == 0 { g.clone() } else { Rat::zero() };
    let zero = Rat::zero();
    let lo = g.clone().min(Rat::zero());
    let hi = g.clone().max(Rat::zero());
    let v = |p00: i64, p01: i64, p10: i64, p11: i64| {
        vec![
            Rat::from_int(p00),
            Rat::from_int(p01),
            Rat::from_int(p10),
            Rat::from_int(p11),
        ]
    };
    let candidates = [
        (&delta + &lo >= gy0, v(0, -1, 1, 0)),
        (&delta + &hi <= gy0, v(0, 1, -1, 0)),
        (&delta + &g_other >= zero, v(-1, -1, 1, 0)),
        (delta >= gy0, v(0, -1, 0, 0)),
        (&delta + &g_other <= zero, v(0, 0, -1, 0)),
        (delta <= gy0, v(0, 1, -1, -1)),
    ];
    let vectors = candidates
        .into_iter()
        .filter(|(guard, _)| *guard)
        .map(|(_, y)| y)
        .collect();
    set_of(vectors, 2, 2)
}

/// Sets `A ⊊ [D]` with `Aᶜ ∈ ℒ(d)` for every `d ∈ A`, each carrying the
/// nonlinear inequality `P(Y₁ ∈ A, Y₂ ∈ A) ≥ P(Y₁ ∈ A)²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pp2Family {
    pub d: usize,
    pub sets: Vec<BTreeSet<usize>>,
}

impl Pp2Family {
    /// Evaluates the inequality of `a` exactly on a two-period CCP vector.
    pub fn holds(&self, p: &[Rat], a: &BTreeSet<usize>) -> bool {
        let d = self.d;
        assert_eq!(p.len(), d * d, "CCP vector over D² outcomes");
        let mut both = Rat::zero();
        let mut first = Rat::zero();
        for &d1 in a {
            for d2 in 0..d {
                first += &p[d1 * d + d2];
                if a.contains(&d2) {
                    both += &p[d1 * d + d2];
                }
            }
        }
        both >= &first * &first
    }

    pub fn all_hold(&self, p: &[Rat]) -> bool {
        self.sets.iter().all(|a| self.holds(p, a))
    }
}

pub fn pp2_family(spec: &ModelSpec) -> Result<Pp2Family, ClosedFormError> {
    let lower = DynLowerSets::new(spec)?;
    let d = lower.d();
    let sets = (1u32..(1u32 << d) - 1)
        .map(|mask| (0..d).filter(|&a| mask >> a & 1 == 1).collect::<BTreeSet<usize>>())
        .filter(|a| {
            let complement: BTreeSet<usize> = (0..d).filter(|x| !a.contains(x)).collect();
            a.iter().all(|&x| lower.is_lower(x, &complement))
        })
        .collect();
    Ok(Pp2Family { d, sets })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Separation {
    /// Every `𝒟`-family inequality holds and some dynamic-family one fails.
    Pp2Only,
    /// Every dynamic-family inequality holds and some `𝒟`-family one fails.
    DynamicOnly,
}

/// Searches CCP vectors with entries in `{0, 1/n, …, 1}` for one separating
/// the two families in the requested direction.
pub fn separating_ccp(
    spec: &ModelSpec,
    kind: Separation,
    n: u32,
) -> Result<Option<Vec<Rat>>, ClosedFormError> {
    let pp2 = pp2_family(spec)?;
    let linear = dynamic_family(spec)?.ys();
    let d = pp2.d;
    let len = d * d;
    let mut counts = vec![0u32; len];
    loop {
        let used: u32 = counts[..len - 1].iter().sum();
        if used <= n {
            counts[len - 1] = n - used;
            let p: Vec<Rat> = counts
                .iter()
                .map(|&c| Rat::new(c as i64, n as i64))
                .collect();
            let pp2_ok = pp2.all_hold(&p);
            let linear_ok = linear.iter().all(|y| !dot(y, &p).is_positive());
            let hit = match kind {
                Separation::Pp2Only => pp2_ok && !linear_ok,
                Separation::DynamicOnly => !pp2_ok && linear_ok,
            };
            if hit {
                return Ok(Some(p));
            }
        }
        let mut k = 0;
        loop {
            if k == len - 1 {
                return Ok(None);
            }
            counts[k] += 1;
            if counts[k] <= n {
                break;
            }
            counts[k] = 0;
            k += 1;
        }
    }
}

/// Index differences of the binary two-lag model, with periods numbered
/// from 1 and lagged choices passed as `(d_{t−1}, d_{t−2})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ar2Deltas {
    v: Vec<Rat>,
    gamma1: Rat,
    gamma2: Rat,
    y0: usize,
    y_minus1: usize,
}

impl Ar2Deltas {
    pub fn new(spec: &ModelSpec) -> Ar2Deltas {
        Ar2Deltas {
            v: (0..spec.t).map(|t| spec.binary_index(t)).collect(),
            gamma1: spec.gamma1.clone(),
            gamma2: spec.gamma2.clone(),
            y0: spec.y0.expect("initial choice"),
            y_minus1: spec.y_minus1.expect("pre-initial choice"),
        }
    }

    fn index(&self, t: usize, d1: usize, d2: usize) -> Rat {
        let mut x = self.v[t - 1].clone();
        if d1 == 1 {
            x += &self.gamma1;
        }
        if d2 == 1 {
            x += &self.gamma2;
        }
        x
    }

    fn lag(&self, d: usize, g: &Rat) -> Rat {
        if d == 1 {
            g.clone()
        } else {
            Rat::zero()
        }
    }

    fn first(&self) -> Rat {
        &self.v[0] + self.lag(self.y0, &self.gamma1) + self.lag(self.y_minus1, &self.gamma2)
    }

    /// `Δ_{1,2}(d₁)`.
    pub fn one_two(&self, d1: usize) -> Rat {
        &self.v[1] + self.lag(d1, &self.gamma1) + self.lag(self.y0, &self.gamma2) - self.first()
    }

    /// `Δ_{1,t}(d_{t−1}, d_{t−2})` for `t ≥ 3`.
    pub fn one_t(&self, t: usize, d1: usize, d2: usize) -> Rat {
        self.index(t, d1, d2) - self.first()
    }

    /// `Δ⁺_{2,t}` when `plus`, else `Δ⁻_{2,t}`, for `t ≥ 3`.
    pub fn two_t(&self, t: usize, d1: usize, d2: usize, plus: bool) -> Rat {
        let g1 = self.bound(&self.gamma1, plus);
        self.index(t, d1, d2) - (&self.v[1] + g1 + self.lag(self.y0, &self.gamma2))
    }

    /// `Δ⁺_{s,t}` when `plus`, else `Δ⁻_{s,t}`, for `3 ≤ s < t`.
    pub fn s_t(&self, s: usize, t: usize, d1: usize, d2: usize, plus: bool) -> Rat {
        let g = self.bound(&self.gamma1, plus) + self.bound(&self.gamma2, plus);
        self.index(t, d1, d2) - (&self.v[s - 1] + g)
    }

    fn bound(&self, g: &Rat, plus: bool) -> Rat {
        if plus {
            g.clone().max(Rat::zero())
        } else {
            g.clone().min(Rat::zero())
        }
    }
}

/// Guarded two-lag inequalities over the outcomes `{0, 1}^T`.
pub fn ar2_family(spec: &ModelSpec, t_max: usize) -> Result<IneqSet, ClosedFormError> {
    if spec.family != Family::DynCondBinaryTwoLag {
        return Err(ClosedFormError::WrongFamily {
            expected: Family::DynCondBinaryTwoLag,
            got: spec.family,
        });
    }
    let have = spec.v.iter().map(|r| r.len()).min().unwrap_or(0);
    if have < t_max || t_max < 2 {
        return Err(ClosedFormError::MissingPeriods { have, need: t_max });
    }
    let deltas = Ar2Deltas::new(spec);
    let n = 1usize << t_max;
    let bit = |k: usize, t: usize| (k >> (t_max - t)) & 1;
    let mut vectors = Vec::new();
    let mut emit = |t: usize, value: usize, s: usize, keep: &dyn Fn(usize, usize) -> bool| {
        let mut y = vec![Rat::zero(); n];
        let mut any = false;
        for (k, entry) in y.iter_mut().enumerate() {
            if bit(k, t) != value {
                continue;
            }
            let d1 = bit(k, t - 1);
            let d2 = if t >= 3 { bit(k, t - 2) } else { 0 };
            if keep(d1, d2) {
                *entry += Rat::one();
                any = true;
            }
        }
        if !any {
            return;
        }
        for (k, entry) in y.iter_mut().enumerate() {
            if bit(k, s) == value {
                *entry -= Rat::one();
            }
        }
        vectors.push(y);
    };
    let zero = Rat::zero();
    emit(2, 0, 1, &|d1, _| deltas.one_two(d1) >= zero);
    emit(2, 1, 1, &|d1, _| deltas.one_two(d1) <= zero);
    for t in 3..=t_max {
        emit(t, 0, 1, &|d1, d2| deltas.one_t(t, d1, d2) >= zero);
        emit(t, 1, 1, &|d1, d2| deltas.one_t(t, d1, d2) <= zero);
        emit(t, 0, 2, &|d1, d2| deltas.two_t(t, d1, d2, true) >= zero);
        emit(t, 1, 2, &|d1, d2| deltas.two_t(t, d1, d2, false) <= zero);
        for s in 3..t {
            emit(t, 0, s, &|d1, d2| deltas.s_t(s, t, d1, d2, true) >= zero);
            emit(t, 1, s, &|d1, d2| deltas.s_t(s, t, d1, d2, false) <= zero);
        }
    }
    Ok(set_of(vectors, 2, t_max))
}
