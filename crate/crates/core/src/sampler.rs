//! Frontier recovery by random positive objectives.
//!
//! Every maximizer of `wᵀy` over the projection with `w > 0` is undominated,
//! so solving many such programs harvests undominated extreme points without
//! enumerating the whole frontier. Draw `i` of a run with seed `s` comes from
//! its own PCG stream `(s, i)`, so a run with `K` draws is a prefix of a run
//! with more draws.

use std::collections::BTreeMap;

use rand_distr::{Distribution as _, Exp1, StandardNormal};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::molp::{IneqVector, Polyhedron, Provenance, Support};
use crate::rat::Rat;
use crate::reduce::{eliminate_redundant, IneqSet};

pub const GENERATOR: &str = "pcg64 (stream = draw index)";

/// Sampled reals are truncated to multiples of `2^-PRECISION_BITS`.
pub const PRECISION_BITS: i32 = 53;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    Exponential,
    HalfNormal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub k: usize,
    pub distribution: Distribution,
    pub seed: u64,
    pub record_objectives: bool,
}

impl Default for SamplerConfig {
    fn default() -> SamplerConfig {
        SamplerConfig {
            k: 1000,
            distribution: Distribution::Exponential,
            seed: 0,
            record_objectives: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frontier {
    /// Distinct maximizers in lexicographic order.
    pub raw: Vec<IneqVector>,
    /// Index of the first draw that produced each raw vector, so the raw set
    /// of a run with `K' < K` draws is `{raw[i] : first_draw[i] < K'}`.
    pub first_draw: Vec<usize>,
    pub reduced: IneqSet,
    pub objectives: Option<Vec<Vec<Rat>>>,
}

/// Objective of draw `index`, as integer numerators over `2^53`. The common
/// denominator does not change the maximizer, so it is dropped.
pub fn draw_objective(n: usize, distribution: Distribution, seed: u64, index: u64) -> Vec<Rat> {
    let mut rng = Pcg64::new(seed as u128, index as u128);
    let scale = 2f64.powi(PRECISION_BITS);
    (0..n)
        .map(|_| {
            let x: f64 = match distribution {
                Distribution::Exponential => Exp1.sample(&mut rng),
                Distribution::HalfNormal => {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    g.abs()
                }
            };
            let units = (x * scale).floor();
            Rat::from_f64_exact(units)
                .filter(|r| r.is_positive())
                .unwrap_or_else(Rat::one)
        })
        .collect()
}

pub fn probabilistic_frontier(poly: &Polyhedron, config: &SamplerConfig) -> Frontier {
    assert!(config.k >= 1, "at least one draw");
    let draws: Vec<(Vec<Rat>, Vec<Rat>)> = (0..config.k)
        .into_par_iter()
        .map_init(
            || Support::new(poly),
            |support, i| {
                let w = draw_objective(poly.n_y, config.distribution, config.seed, i as u64);
                let y = support.maximize(&w).y;
                (w, y)
            },
        )
        .collect();
    let mut seen: BTreeMap<Vec<Rat>, usize> = BTreeMap::new();
    let mut objectives = config.record_objectives.then(Vec::new);
    for (i, (w, y)) in draws.into_iter().enumerate() {
        seen.entry(y).or_insert(i);
        if let Some(list) = objectives.as_mut() {
            list.push(w);
        }
    }
    let first_draw = seen.values().copied().collect();
    let raw: Vec<IneqVector> = seen
        .into_keys()
        .map(|y| IneqVector::new(y, Provenance::Probabilistic))
        .collect();
    let reduced = eliminate_redundant(&raw).with_labels(poly.labels.clone());
    Frontier {
        raw,
        first_draw,
        reduced,
        objectives,
    }
}
