#![allow(dead_code)]

use std::collections::BTreeSet;

use sharpset::discretize::label_base;
use sharpset::molp::{build_ddcp, solve_undominated, IneqVector};
use sharpset::matrices::DiscreteModel;
use sharpset::rat::Rat;
use sharpset::reduce::eliminate_redundant;

/// Parses `"p31+p32 <= p11+p12"` into a vector over outcomes of `d` labels.
/// Each term is `p` followed by one digit per period.
pub fn ineq(d: usize, text: &str) -> Vec<Rat> {
    let (lhs, rhs) = text.split_once("<=").expect("inequality has <=");
    let terms = |side: &str| -> Vec<Vec<usize>> {
        side.split('+')
            .map(|t| t.trim().trim_start_matches('p'))
            .filter(|t| !t.is_empty())
            .map(|t| t.chars().map(|c| c.to_digit(10).unwrap() as usize).collect())
            .collect()
    };
    let lhs = terms(lhs);
    let rhs = terms(rhs);
    let t = lhs.first().or(rhs.first()).map_or(0, |x| x.len());
    let base = label_base(d);
    let index = |labels: &[usize]| labels.iter().fold(0, |acc, l| acc * d + (l - base));
    let mut y = vec![Rat::zero(); d.pow(t as u32)];
    for l in &lhs {
        y[index(l)] += Rat::one();
    }
    for l in &rhs {
        y[index(l)] -= Rat::one();
    }
    y
}

pub fn set_of(ys: Vec<Vec<Rat>>) -> BTreeSet<Vec<Rat>> {
    ys.into_iter().collect()
}

pub fn reduced(vectors: &[IneqVector]) -> BTreeSet<Vec<Rat>> {
    set_of(eliminate_redundant(vectors).ys())
}

pub fn solver_reduced(model: &DiscreteModel) -> BTreeSet<Vec<Rat>> {
    reduced(&solve_undominated(&build_ddcp(model)))
}

pub const RANKED_STATIONARY: [&str; 3] = [
    "p12+p13+p14 <= p21+p31+p41",
    "p13+p14+p23+p24 <= p31+p32+p41+p42",
    "p14+p24+p34 <= p41+p42+p43",
];

pub const RANKED_EXCHANGEABLE: [&str; 13] = [
    "p12+p13+p14+p23+p24+p34 <= p21+p31+p32+p41+p42+p43",
    "p12+p13+p14+p23+p24 <= p21+p31+p32+p41+p42",
    "p12+p13+p14+p24+p34 <= p21+p31+p41+p42+p43",
    "p12+p13+p14+p24 <= p21+p31+p41+p42",
    "p12+p13+p14 <= p21+p31+p41",
    "p13+p14+p23+p24+p34 <= p31+p32+p41+p42+p43",
    "p13+p14+p23+p24 <= p31+p32+p41+p42",
    "p13+p14+p24+p34 <= p31+p41+p42+p43",
    "p13+p14+p24 <= p31+p41+p42",
    "p13+p14 <= p31+p41",
    "p14+p24+p34 <= p41+p42+p43",
    "p14+p24 <= p41+p42",
    "p14 <= p41",
];

pub const DYNAMIC_FOUR: [&str; 8] = [
    "p31+p32 <= p11+p12+p13+p14+p21+p22+p23+p24",
    "p12+p13+p43 <= p21+p22+p24+p31+p32+p33+p34",
    "p12+p13+p14 <= p21+p22+p24+p31+p32+p33+p34+p41+p42+p44",
    "p31 <= p11+p12+p13+p14",
    "p41+p42+p43 <= p14+p22+p24+p34",
    "p21+p23+p41+p43 <= p11+p12+p14+p32+p33+p34",
    "p21+p23+p24 <= p11+p12+p14+p32+p33+p34+p42+p44",
    "p13+p23+p43 <= p31+p32+p33+p34",
];

pub const TWO_LAG_ROWS: [&str; 4] = [
    "p010 <= p001+p100+p101+p111",
    "p010 <= p000+p001+p100+p101",
    "p100+p101 <= p010+p011",
    "p110 <= p001+p011",
];

pub fn strs(d: usize, list: &[&str]) -> BTreeSet<Vec<Rat>> {
    list.iter().map(|s| ineq(d, s)).collect()
}
