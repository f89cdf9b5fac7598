mod common;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use proptest::prelude::*;

use common::{ineq, reduced, set_of, solver_reduced, strs, TWO_LAG_ROWS, DYNAMIC_FOUR, RANKED_STATIONARY, RANKED_EXCHANGEABLE};
use sharpset::closedform::{
    ar2_family, cm_inequalities, dynamic_family, exchangeable_family, kpt_family, pp2_family,
    pp_static_inequalities, separating_ccp, staircase_sets, ClosedFormError, DynLowerSets,
    RankedAlternatives, Separation,
};
use sharpset::discretize::{ModelSpec, Restriction};
use sharpset::matrices::build;
use sharpset::molp::{build_ddcp, Membership, Provenance};
use sharpset::rat::{int, ints, rat, Rat};
use sharpset::reduce::implied_by;

fn ranked(values: &[i64]) -> RankedAlternatives {
    RankedAlternatives::new(ints(values)).unwrap()
}

fn static_model(delta: &[i64], restriction: Restriction) -> ModelSpec {
    ModelSpec::static_panel(delta.iter().map(|&x| vec![int(0), int(x)]).collect(), restriction)
}

fn dynamic_four() -> ModelSpec {
    ModelSpec::dyn_cond(
        vec![ints(&[0, 0]), ints(&[0, 3]), ints(&[0, 5]), ints(&[0, 7])],
        int(7),
        3,
        Restriction::Stationary,
    )
}

fn two_lag() -> ModelSpec {
    ModelSpec::ar2(ints(&[0, 4, 2]), int(3), int(-4), 1, 1)
}

fn binary_cond(a1: i64, a2: i64, gamma_tilde: i64, y0: usize) -> ModelSpec {
    ModelSpec::binary_kpt_cond(&ints(&[a1, a2]), int(gamma_tilde), y0, Restriction::Stationary)
}

fn sets(family: &[BTreeSet<usize>]) -> BTreeSet<Vec<usize>> {
    family.iter().map(|s| s.iter().copied().collect()).collect()
}

fn set(items: &[usize]) -> Vec<usize> {
    items.to_vec()
}

fn permutations(values: &[i64]) -> Vec<Vec<i64>> {
    if values.len() <= 1 {
        return vec![values.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..values.len() {
        let mut rest = values.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn assert_valid(spec: &ModelSpec, ys: &[Vec<Rat>]) {
    let poly = build_ddcp(&build(spec).unwrap());
    let mut member = Membership::new(&poly);
    for y in ys {
        assert!(member.contains(y), "{y:?} is not a valid inequality");
    }
}

#[test]
fn cm_covers_the_three_signs() {
    assert_eq!(cm_inequalities(Ordering::Less).ys(), vec![ints(&[0, -1, 1, 0])]);
    assert_eq!(cm_inequalities(Ordering::Greater).ys(), vec![ints(&[0, 1, -1, 0])]);
    assert_eq!(
        set_of(cm_inequalities(Ordering::Equal).ys()),
        set_of(vec![ints(&[0, -1, 1, 0]), ints(&[0, 1, -1, 0])])
    );
    for (a, sign) in [([0, 1], Ordering::Less), ([1, 0], Ordering::Greater), ([1, 1], Ordering::Equal)] {
        let model = build(&ModelSpec::binary_static(&ints(&a), Restriction::Stationary)).unwrap();
        assert_eq!(solver_reduced(&model), reduced(&cm_inequalities(sign).vectors));
    }
}

#[test]
fn ranking_sorts_descending_and_refuses_ties() {
    let r = ranked(&[2, 4, 1, 3]);
    assert_eq!(r.order(), &[1, 3, 0, 2]);
    assert_eq!(r.upper(2), vec![1, 3]);
    assert_eq!(r.lower(3), vec![0, 2]);
    assert_eq!(
        RankedAlternatives::new(ints(&[4, 3, 3, 1])).unwrap_err(),
        ClosedFormError::Ties
    );
}

#[test]
fn pp_static_reproduces_ranked_four() {
    let out = pp_static_inequalities(&ranked(&[4, 3, 2, 1]));
    assert_eq!(out.len(), 3);
    assert!(out.vectors.iter().all(|v| v.provenance == Provenance::ClosedForm));
    assert_eq!(set_of(out.ys()), strs(4, &RANKED_STATIONARY));
    assert_valid(&static_model(&[4, 3, 2, 1], Restriction::Stationary), &out.ys());
    let two = pp_static_inequalities(&ranked(&[0, 1]));
    assert_eq!(two.ys(), cm_inequalities(Ordering::Less).ys());
}

#[test]
fn staircases_are_counted_and_involutive() {
    for (d, count) in [(2, 5), (3, 19), (4, 69), (5, 251)] {
        let all = staircase_sets(d);
        assert_eq!(all.len(), count);
        let distinct: BTreeSet<_> = all.iter().map(|a| a.cells()).collect();
        assert_eq!(distinct.len(), count);
        for a in &all {
            assert!(a.products().len() <= d);
            assert_eq!(a.per().per(), *a);
            let transposed: BTreeSet<(usize, usize)> = a.cells().iter().map(|&(x, y)| (y, x)).collect();
            assert_eq!(a.per().cells(), transposed);
        }
    }
}

#[test]
fn exchangeable_family_reduces_to_ranked_exchangeable_set() {
    let r = ranked(&[4, 3, 2, 1]);
    let out = exchangeable_family(&r);
    assert_eq!(out.len(), 69);
    let got = reduced(&out.vectors);
    assert_eq!(got, strs(4, &RANKED_EXCHANGEABLE));
    let spec = static_model(&[4, 3, 2, 1], Restriction::Exchangeable);
    assert_valid(&spec, &got.iter().cloned().collect::<Vec<_>>());
    assert_eq!(exchangeable_family(&ranked(&[0, 1])).len(), 5);
}

#[test]
fn exchangeable_family_matches_the_solver() {
    let mut cases: Vec<Vec<i64>> = permutations(&[0, 1]);
    cases.extend(permutations(&[1, 2, 3]));
    cases.extend([vec![4, 3, 2, 1], vec![1, 4, 2, 3], vec![3, 1, 4, 2]]);
    for delta in cases {
        let model = build(&static_model(&delta, Restriction::Exchangeable)).unwrap();
        let family = exchangeable_family(&ranked(&delta));
        assert_eq!(solver_reduced(&model), reduced(&family.vectors), "Δv = {delta:?}");
    }
}

#[test]
fn dynamic_family_lower_sets_of_dynamic_four() {
    let lower = DynLowerSets::new(&dynamic_four()).unwrap();
    assert_eq!(lower.delta(0), &ints(&[7, 3, -2, 7]));
    assert_eq!(
        sets(lower.lower_sets(0)),
        [set(&[2]), set(&[1, 2]), set(&[0, 1, 2]), set(&[1, 2, 3])].into_iter().collect()
    );
    assert_eq!(
        sets(lower.lower_sets(1)),
        [set(&[2]), set(&[0, 2]), set(&[0, 2, 3])].into_iter().collect()
    );
    assert_eq!(
        sets(lower.lower_sets(2)),
        [set(&[0]), set(&[0, 1]), set(&[0, 1, 2])].into_iter().collect()
    );
    assert_eq!(
        sets(lower.lower_sets(3)),
        [set(&[2]), set(&[0, 2]), set(&[0, 1, 2])].into_iter().collect()
    );
    assert_eq!(lower.family().len(), 8);
    let a: BTreeSet<usize> = [0, 1, 2].into_iter().collect();
    assert_eq!(lower.bound_set(1, &a), [0, 2].into_iter().collect());
    assert_eq!(lower.bound_set(0, &a), a);
}

#[test]
fn dynamic_family_reproduces_dynamic_four() {
    let out = dynamic_family(&dynamic_four()).unwrap();
    assert_eq!(out.len(), 8);
    assert_eq!(set_of(out.ys()), strs(4, &DYNAMIC_FOUR));
    assert_eq!(reduced(&out.vectors), strs(4, &DYNAMIC_FOUR));
}

#[test]
fn dynamic_family_without_state_dependence_is_the_static_family() {
    for delta in [[4, 3, 2, 1], [1, 3, 4, 2]] {
        let v = delta.iter().map(|&x| vec![int(0), int(x)]).collect();
        let spec = ModelSpec::dyn_cond(v, int(0), 2, Restriction::Stationary);
        let dynamic = set_of(dynamic_family(&spec).unwrap().ys());
        let stat = set_of(pp_static_inequalities(&ranked(&delta)).ys());
        assert_eq!(dynamic, stat);
    }
}

const SIGN_CASES: [(i64, i64, i64, usize); 4] = [(0, 3, 2, 1), (0, -3, 2, 1), (0, 1, -4, 0), (0, -1, 4, 0)];

#[test]
fn binary_dynamic_family_follows_the_four_sign_cases() {
    let p6 = ineq(2, "p10 <= p01");
    let p7 = ineq(2, "p01 <= p10");
    let p8 = [ineq(2, "p00 <= p00+p01"), ineq(2, "p11 <= p10+p11")];
    let p9 = [ineq(2, "p01 <= p10+p11"), ineq(2, "p10 <= p00+p01")];
    let want = [vec![p6], vec![p7], p8.to_vec(), p9.to_vec()];
    for ((a1, a2, g, y0), want) in SIGN_CASES.into_iter().zip(want) {
        let spec = binary_cond(a1, a2, g, y0);
        let out = dynamic_family(&spec).unwrap();
        assert_eq!(set_of(out.ys()), set_of(want), "case {:?}", (a1, a2, g, y0));
        let model = build(&spec).unwrap();
        assert_eq!(solver_reduced(&model), reduced(&out.vectors));
    }
}

#[test]
fn binary_closed_form_guards() {
    let case_a = kpt_family(&int(0), &int(3), &int(2), 1);
    let want_a = [
        ineq(2, "p10 <= p01"),
        ineq(2, "p10 <= p00+p01"),
        ineq(2, "p00 <= p00+p01"),
    ];
    assert_eq!(set_of(case_a.ys()), set_of(want_a.to_vec()));
    assert_eq!(reduced(&case_a.vectors), set_of(vec![ineq(2, "p10 <= p01")]));
    let case_c = kpt_family(&int(0), &int(1), &int(-4), 0);
    let want_c = [ineq(2, "p00 <= p00+p01"), ineq(2, "p11 <= p10+p11")];
    assert_eq!(set_of(case_c.ys()), set_of(want_c.to_vec()));
    for (a2, sign) in [(1, Ordering::Less), (-1, Ordering::Greater), (0, Ordering::Equal)] {
        for y0 in [0, 1] {
            let got = reduced(&kpt_family(&int(0), &int(a2), &int(0), y0).vectors);
            assert_eq!(got, reduced(&cm_inequalities(sign).vectors));
        }
    }
}

#[test]
fn binary_closed_form_and_dynamic_families_agree() {
    for (a1, a2, g, y0) in SIGN_CASES {
        for y0 in [y0, 1 - y0] {
            let closed = reduced(&kpt_family(&int(a1), &int(a2), &int(g), y0).vectors);
            let dynamic = reduced(&dynamic_family(&binary_cond(a1, a2, g, y0)).unwrap().vectors);
            assert_eq!(closed, dynamic);
        }
    }
}

fn pp2_spec(gamma: Rat) -> ModelSpec {
    ModelSpec::dyn_cond(vec![ints(&[0, 0]), ints(&[0, -2])], gamma, 0, Restriction::Stationary)
}

#[test]
fn pp2_sets_in_both_cases() {
    let one = pp2_family(&pp2_spec(rat(1, 2))).unwrap();
    assert_eq!(sets(&one.sets), [set(&[0])].into_iter().collect());
    let two = pp2_family(&pp2_spec(int(2))).unwrap();
    assert_eq!(sets(&two.sets), [set(&[0]), set(&[1])].into_iter().collect());
    let a: BTreeSet<usize> = [0].into_iter().collect();
    let p = vec![rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 4)];
    assert!(one.holds(&p, &a));
    let p = vec![rat(1, 10), rat(4, 10), rat(1, 10), rat(4, 10)];
    assert!(!one.holds(&p, &a));
}

#[test]
fn pp2_and_dynamic_families_are_complementary() {
    for (gamma, kind) in [(rat(1, 2), Separation::Pp2Only), (int(2), Separation::DynamicOnly)] {
        let spec = pp2_spec(gamma);
        let p = separating_ccp(&spec, kind, 12).unwrap().expect("a separating vector exists");
        assert_eq!(p.iter().fold(Rat::zero(), |acc, x| acc + x), Rat::one());
        let pp2 = pp2_family(&spec).unwrap();
        let pp2_ok = pp2.sets.iter().all(|a| pp2.holds(&p, a));
        let dyn_ok = dynamic_family(&spec)
            .unwrap()
            .ys()
            .iter()
            .all(|y| y.iter().zip(&p).fold(Rat::zero(), |acc, (a, b)| acc + a * b) <= Rat::zero());
        match kind {
            Separation::Pp2Only => assert!(pp2_ok && !dyn_ok),
            Separation::DynamicOnly => assert!(!pp2_ok && dyn_ok),
        }
    }
}

#[test]
fn ar2_family_implies_rows_two_to_four_only() {
    let spec = two_lag();
    let family = ar2_family(&spec, 3).unwrap();
    let ys = family.ys();
    assert_valid(&spec, &ys);
    let rows: Vec<Vec<Rat>> = TWO_LAG_ROWS.iter().map(|s| ineq(2, s)).collect();
    assert!(implied_by(&rows[0], &ys).is_none());
    for row in &rows[1..] {
        assert!(implied_by(row, &ys).is_some());
    }
}

#[test]
fn ar2_family_without_lags_is_cm() {
    for (a, sign) in [([0, 1], Ordering::Less), ([1, 0], Ordering::Greater), ([2, 2], Ordering::Equal)] {
        let mut spec = ModelSpec::ar2(ints(&[a[0], a[1], 0]), int(0), int(0), 1, 0);
        for row in spec.v.iter_mut() {
            row.truncate(2);
        }
        spec.t = 2;
        let got = set_of(ar2_family(&spec, 2).unwrap().ys());
        assert_eq!(got, set_of(cm_inequalities(sign).ys()));
    }
}

#[test]
fn ar2_deltas_match_two_lag_model() {
    let d = sharpset::closedform::Ar2Deltas::new(&two_lag());
    assert_eq!(d.one_two(0), int(1));
    assert_eq!(d.one_two(1), int(4));
    assert_eq!(d.one_t(3, 0, 1), int(-1));
    assert_eq!(d.two_t(3, 1, 0, true), int(2));
    assert_eq!(d.two_t(3, 0, 1, false), int(-2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bound_sets_are_lower_sets_inside_a(
        v in proptest::collection::vec(-4i64..5, 3),
        gamma in -3i64..4,
        y0 in 1usize..4,
    ) {
        let spec = ModelSpec::dyn_cond(
            v.iter().map(|&x| vec![int(0), int(x)]).collect(),
            int(gamma),
            y0,
            Restriction::Stationary,
        );
        let lower = DynLowerSets::new(&spec).unwrap();
        for a in lower.family() {
            for d1 in 0..3 {
                let b = lower.bound_set(d1, a);
                prop_assert!(b.is_subset(a));
                if !b.is_empty() {
                    prop_assert!(lower.is_lower(d1, &b));
                }
            }
        }
    }

    #[test]
    fn closed_form_vectors_are_valid(delta in proptest::collection::vec(-3i64..4, 3)) {
        let distinct: BTreeSet<i64> = delta.iter().copied().collect();
        prop_assume!(distinct.len() == 3);
        let r = RankedAlternatives::new(ints(&delta)).unwrap();
        assert_valid(&static_model(&delta, Restriction::Stationary), &pp_static_inequalities(&r).ys());
        let ex: Vec<Vec<Rat>> = reduced(&exchangeable_family(&r).vectors).into_iter().collect();
        assert_valid(&static_model(&delta, Restriction::Exchangeable), &ex);
    }
}
