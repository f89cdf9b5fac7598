//! Enumeration of maximal-rank integral points of a dual polyhedron by
//! mixed-integer search with no-good cuts, and the randomized integrality
//! check that justifies it.
//!
//! A polytope is integral iff `max wᵀy` is an integer for every integral
//! objective `w` for which it is finite. [`check_integrality`] samples such
//! objectives from a rounded normal law; a single fractional value refutes
//! integrality, while a clean run is evidence only.

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discretize::Family;
use crate::molp::{IneqVector, Polyhedron, Provenance, Support};
use crate::rat::Rat;
use crate::ratlp::{solve_lp, solve_milp_feasibility, Direction, LpStatus, RowSense};

pub const GENERATOR: &str = "pcg64";

/// Anything that can maximize a linear objective.
pub trait LinearOracle {
    fn dim(&self) -> usize;
    /// `None` when the maximum is not finite.
    fn maximize(&mut self, w: &[Rat]) -> Option<Rat>;
}

impl LinearOracle for Support {
    fn dim(&self) -> usize {
        self.n_y()
    }

    fn maximize(&mut self, w: &[Rat]) -> Option<Rat> {
        Some(Support::maximize(self, w).value)
    }
}

/// `{y : G y ≤ h}` over free variables.
pub struct HPolytope {
    g: Vec<Vec<Rat>>,
    h: Vec<Rat>,
}

impl HPolytope {
    pub fn new(g: Vec<Vec<Rat>>, h: Vec<Rat>) -> HPolytope {
        assert_eq!(g.len(), h.len(), "one bound per row");
        HPolytope { g, h }
    }
}

impl LinearOracle for HPolytope {
    fn dim(&self) -> usize {
        self.g.first().map_or(0, |r| r.len())
    }

    fn maximize(&mut self, w: &[Rat]) -> Option<Rat> {
        let n = self.dim();
        let mut lp = crate::ratlp::LinearProgram::new(n, Direction::Maximize);
        lp.objective = w.to_vec();
        for j in 0..n {
            lp.set_free(j);
        }
        for (row, b) in self.g.iter().zip(&self.h) {
            lp.add_dense_row(row, RowSense::Le, b.clone());
        }
        let res = solve_lp(&lp).expect("well-formed polytope program");
        (res.status == LpStatus::Optimal).then_some(res.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub objective: Vec<Rat>,
    pub value: Rat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralityReport {
    pub evidence: bool,
    pub tested: usize,
    pub counterexample: Option<Counterexample>,
    pub seed: Option<u64>,
    pub sigma: Option<f64>,
    pub generator: String,
}

/// Maximizes each objective in turn and stops at the first fractional value.
pub fn integrality_evidence<O: LinearOracle>(
    oracle: &mut O,
    objectives: impl IntoIterator<Item = Vec<Rat>>,
) -> IntegralityReport {
    let mut tested = 0;
    for w in objectives {
        tested += 1;
        if let Some(value) = oracle.maximize(&w) {
            if !value.is_integer() {
                return IntegralityReport {
                    evidence: false,
                    tested,
                    counterexample: Some(Counterexample { objective: w, value }),
                    seed: None,
                    sigma: None,
                    generator: String::new(),
                };
            }
        }
    }
    IntegralityReport {
        evidence: true,
        tested,
        counterexample: None,
        seed: None,
        sigma: None,
        generator: String::new(),
    }
}

/// `k` objectives with entries `⌊N(0, σ²)⌋`.
pub fn normal_floor_objectives(n: usize, k: usize, sigma: f64, seed: u64) -> Vec<Vec<Rat>> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("finite positive sigma");
    (0..k)
        .map(|_| {
            (0..n)
                .map(|_| Rat::from_int(normal.sample(&mut rng).floor() as i64))
                .collect()
        })
        .collect()
}

pub fn check_integrality(poly: &Polyhedron, k: usize, sigma: f64, seed: u64) -> IntegralityReport {
    let mut support = Support::new(poly);
    let objectives = normal_floor_objectives(poly.n_y, k, sigma, seed);
    IntegralityReport {
        seed: Some(seed),
        sigma: Some(sigma),
        generator: GENERATOR.to_string(),
        ..integrality_evidence(&mut support, objectives)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxRank {
    pub r: Rat,
    pub witness: IneqVector,
}

/// Maximizes `𝟙ᵀy`, then breaks ties lexicographically so the witness is a
/// vertex of the projection.
pub fn max_rank(poly: &Polyhedron) -> MaxRank {
    let n = poly.n_y;
    let ones = vec![Rat::one(); n];
    let mut fixed: Vec<(Vec<Rat>, Rat)> = Vec::with_capacity(n + 1);
    let mut objectives = vec![ones];
    objectives.extend((0..n).map(|i| {
        let mut e = vec![Rat::zero(); n];
        e[i] = Rat::one();
        e
    }));
    let mut y = vec![Rat::zero(); n];
    for w in objectives {
        let mut lp = poly.to_lp(&w, Direction::Maximize);
        for (a, b) in &fixed {
            let coeffs = a
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(j, v)| (j, v.clone()))
                .collect();
            lp.add_row(coeffs, RowSense::Eq, b.clone());
        }
        let res = solve_lp(&lp).expect("well-formed rank program");
        assert_eq!(res.status, LpStatus::Optimal, "the projection is a nonempty polytope");
        y = res.x[..n].to_vec();
        fixed.push((w, res.value));
    }
    MaxRank {
        r: fixed[0].1.clone(),
        witness: IneqVector::new(y, Provenance::Cutplane),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CutplaneError {
    #[error("cutting-plane enumeration is only justified for static models (got {family}); pass the dynamic override to run it anyway")]
    StaticOnly { family: Family },
    #[error("no integrality evidence for this polyhedron")]
    NoIntegralityEvidence,
    #[error("maximal rank {r} is not an integer")]
    FractionalRank { r: Rat },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateOptions {
    pub allow_dynamic: bool,
}

/// Every integral `y` of maximal rank, found one at a time over the split
/// polytope `{(u, v, z) : u + v ≤ 𝟙, Aᵀ(u − v) ≤ Rᵀz, 𝟙ᵀ(u − v) = r}` with
/// `u, v` binary, adding a no-good cut after each hit.
pub fn enumerate_max_rank_integral(
    poly: &Polyhedron,
    evidence: &IntegralityReport,
    gate: GateOptions,
) -> Result<Vec<IneqVector>, CutplaneError> {
    if poly.family != Family::StaticPanel && !gate.allow_dynamic {
        return Err(CutplaneError::StaticOnly {
            family: poly.family,
        });
    }
    if !evidence.evidence {
        return Err(CutplaneError::NoIntegralityEvidence);
    }
    let r = max_rank(poly).r;
    if !r.is_integer() {
        return Err(CutplaneError::FractionalRank { r });
    }
    let n = poly.n_y;
    let mut lp = crate::ratlp::LinearProgram::new(2 * n + poly.n_z, Direction::Maximize);
    for j in 0..2 * n {
        lp.set_bounds(j, Some(Rat::zero()), Some(Rat::one()));
    }
    for k in 0..poly.n_z {
        lp.set_free(2 * n + k);
    }
    for i in 0..n {
        lp.add_row(vec![(i, Rat::one()), (n + i, Rat::one())], RowSense::Le, Rat::one());
    }
    for row in poly.distinct_rows() {
        let mut coeffs = vec![(row.y, Rat::one()), (n + row.y, -Rat::one())];
        coeffs.extend(row.z.iter().map(|(k, v)| (2 * n + k, -v)));
        lp.add_row(coeffs, RowSense::Le, Rat::zero());
    }
    let rank_row: Vec<(usize, Rat)> = (0..n)
        .map(|i| (i, Rat::one()))
        .chain((0..n).map(|i| (n + i, -Rat::one())))
        .collect();
    lp.add_row(rank_row, RowSense::Eq, r);
    let binary: Vec<usize> = (0..2 * n).collect();
    let mut found = Vec::new();
    loop {
        let hit = solve_milp_feasibility(&lp, &binary).expect("well-formed split program");
        if !hit.feasible {
            break;
        }
        let w: Vec<bool> = hit.point[..2 * n].iter().map(|x| x.is_one()).collect();
        let y: Vec<Rat> = (0..n)
            .map(|i| Rat::from_int(w[i] as i64 - w[n + i] as i64))
            .collect();
        let ones = w.iter().filter(|b| **b).count();
        let cut = w
            .iter()
            .enumerate()
            .map(|(j, &b)| (j, if b { Rat::one() } else { -Rat::one() }))
            .collect();
        lp.add_row(cut, RowSense::Le, Rat::from_int(ones as i64 - 1));
        found.push(IneqVector::new(y, Provenance::Cutplane));
    }
    found.sort_by(|a, b| a.y.cmp(&b.y));
    Ok(found)
}
