use proptest::prelude::*;
use sharpset::discretize::{
    ar2_patches, candidate_is_patch, dyn_cond_patches, dyn_uncond_patches, patches, regions,
    static_patches, static_patches_lp, ModelSpec, Patch, Restriction,
};
use sharpset::rat::{int, ints, Rat};

fn static_spec(v2: &[i64]) -> ModelSpec {
    let v = v2.iter().map(|&x| vec![int(0), int(x)]).collect();
    ModelSpec::static_panel(v, Restriction::Stationary)
}

#[test]
fn binary_heuristics_has_three_patches() {
    let spec = ModelSpec::binary_static(&ints(&[0, 1]), Restriction::Stationary);
    let p = static_patches(&spec);
    assert_eq!(
        p,
        vec![
            Patch::Static(vec![0, 0]),
            Patch::Static(vec![0, 1]),
            Patch::Static(vec![1, 1])
        ]
    );
}

#[test]
fn ranked_four_alternatives_give_ten_patches() {
    let spec = static_spec(&[4, 3, 2, 1]);
    let p = static_patches(&spec);
    assert_eq!(p.len(), 10);
    for patch in &p {
        let Patch::Static(t) = patch else { panic!() };
        let dv = |d: usize| 4 - d as i64;
        assert!(t[0] == t[1] || dv(t[0]) < dv(t[1]));
    }
    assert_eq!(p, static_patches_lp(&spec));
}

#[test]
fn tied_binary_kills_off_diagonal() {
    let spec = ModelSpec::binary_static(&ints(&[2, 2]), Restriction::Stationary);
    assert_eq!(
        static_patches(&spec),
        vec![Patch::Static(vec![0, 0]), Patch::Static(vec![1, 1])]
    );
}

#[test]
fn binary_dynamic_ordering_has_five_patches() {
    let spec = ModelSpec::binary_kpt(&ints(&[0, 1]), int(2), Restriction::Stationary);
    let p = dyn_uncond_patches(&spec);
    assert_eq!(p.len(), 5);
    for patch in &p {
        assert!(candidate_is_patch(&spec, patch));
    }
}

#[test]
fn conditional_binary_period_cells() {
    // y0 = 1 with thresholds as in the binary dynamic ordering: the per-period cells of
    // the second period are the 3 intervals cut by two thresholds, and the
    // joint count is the number of gaps of all three thresholds plus one.
    let spec = ModelSpec::dyn_cond(
        vec![ints(&[0, 0]), ints(&[0, 1])],
        int(1),
        1,
        Restriction::Stationary,
    );
    let p = dyn_cond_patches(&spec);
    assert_eq!(p.len(), 4);
    let uncond = ModelSpec::binary_kpt(&ints(&[0, 1]), int(2), Restriction::Stationary);
    assert_eq!(dyn_uncond_patches(&uncond).len(), 5);
}

#[test]
fn dyn_cond_without_state_dependence_replicates_static_cells() {
    let spec = ModelSpec::dyn_cond(
        vec![ints(&[0, 0]), ints(&[0, 2]), ints(&[0, -1])],
        int(0),
        1,
        Restriction::Stationary,
    );
    let p = dyn_cond_patches(&spec);
    let stat = static_patches(&ModelSpec::static_panel(spec.v.clone(), Restriction::Stationary));
    assert_eq!(p.len(), stat.len());
    for patch in &p {
        let Patch::DynCond { table, .. } = patch else { panic!() };
        assert!(table[0].iter().all(|&c| c == table[0][0]));
    }
}

#[test]
fn dynamic_four_patch_list_is_nonempty_and_feasible() {
    let spec = ModelSpec::dyn_cond(
        vec![ints(&[0, 0]), ints(&[0, 3]), ints(&[0, 5]), ints(&[0, 7])],
        int(7),
        3,
        Restriction::Stationary,
    );
    let p = dyn_cond_patches(&spec);
    assert!(!p.is_empty());
    for w in p.windows(2) {
        assert!(w[0] < w[1]);
    }
    for patch in &p {
        assert!(candidate_is_patch(&spec, patch));
    }
}

#[test]
fn two_lag_examples() {
    let spec = ModelSpec::ar2(ints(&[0, 4, 2]), int(3), int(-4), 1, 1);
    assert_eq!(ar2_patches(&spec).len(), 8);
    let spec = ModelSpec::ar2(ints(&[0, 1, 2]), int(0), int(0), 1, 1);
    assert_eq!(ar2_patches(&spec).len(), 4);
    let spec = ModelSpec::ar2(ints(&[1, 1, 1]), int(0), int(0), 0, 1);
    assert_eq!(
        ar2_patches(&spec),
        vec![Patch::TwoLag([0; 7]), Patch::TwoLag([1; 7])]
    );
}

#[test]
fn regions_are_lexicographic() {
    let r = regions(3, 2);
    assert_eq!(r.len(), 9);
    assert_eq!(r[0], vec![0, 0]);
    assert_eq!(r[1], vec![0, 1]);
    assert_eq!(r[8], vec![2, 2]);
    assert_eq!(regions(1, 2), vec![vec![0, 0]]);
    assert_eq!(regions(8, 3).len(), 512);
}

#[test]
fn validation_rejects_bad_specs() {
    let mut spec = static_spec(&[1, 0]);
    spec.d = 1;
    assert!(spec.validate().is_err());
    let mut spec = ModelSpec::ar2(ints(&[0, 4, 2]), int(3), int(-4), 1, 1);
    spec.t = 4;
    assert!(spec.validate().is_err());
    let spec = ModelSpec::dyn_cond(vec![ints(&[0, 0]), ints(&[0, 1])], int(1), 5, Restriction::Stationary);
    assert!(spec.validate().is_err());
}

#[test]
fn exhaustive_scan_matches_static_three_periods() {
    let spec = ModelSpec::static_panel(
        vec![ints(&[0, 0, 0]), ints(&[1, 0, 2]), ints(&[2, 1, 0])],
        Restriction::Stationary,
    );
    let found = patches(&spec);
    let mut scanned = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let p = Patch::Static(vec![a, b, c]);
                if candidate_is_patch(&spec, &p) {
                    scanned.push(p);
                }
            }
        }
    }
    assert_eq!(found, scanned);
}

fn rat_strategy() -> impl Strategy<Value = Rat> {
    (-6i64..=6, 1i64..=3).prop_map(|(n, d)| Rat::new(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn closed_form_rule_matches_lp_route(d in 2usize..=6, seed in prop::collection::vec(rat_strategy(), 12)) {
        let v: Vec<Vec<Rat>> = (0..d).map(|i| vec![seed[2 * i].clone(), seed[2 * i + 1].clone()]).collect();
        let spec = ModelSpec::static_panel(v, Restriction::Stationary);
        prop_assert_eq!(static_patches(&spec), static_patches_lp(&spec));
    }

    #[test]
    fn binary_dynamic_patches_recheck(a1 in rat_strategy(), a2 in rat_strategy(), g in rat_strategy()) {
        let spec = ModelSpec::binary_kpt(&[a1, a2], g, Restriction::Stationary);
        let found = dyn_uncond_patches(&spec);
        for p in &found {
            prop_assert!(candidate_is_patch(&spec, p));
        }
        // exhaustive scan over all 2^4 tables
        let mut count = 0;
        for bits in 0u32..16 {
            let table = vec![
                vec![(bits & 1) as usize, ((bits >> 1) & 1) as usize],
                vec![((bits >> 2) & 1) as usize, ((bits >> 3) & 1) as usize],
            ];
            if candidate_is_patch(&spec, &Patch::DynUncond(table)) {
                count += 1;
            }
        }
        prop_assert_eq!(count, found.len());
    }
}
