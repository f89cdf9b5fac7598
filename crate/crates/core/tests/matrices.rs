use rand::SeedableRng;
use rand_pcg::Pcg64;
use sharpset::discretize::{patches, regions, ModelSpec, Restriction};
use sharpset::matrices::{build, build_p_exchangeable, random_feasible_q, DiscreteModel};
use sharpset::rat::{int, ints, Rat};

fn heuristics(restriction: Restriction) -> DiscreteModel {
    build(&ModelSpec::binary_static(&ints(&[0, 1]), restriction)).unwrap()
}

fn column_multiset(model: &DiscreteModel) -> Vec<usize> {
    let mut cols = model.column_row.clone();
    cols.sort();
    cols
}

#[test]
fn heuristics_matrix_matches_display_up_to_column_order() {
    let model = heuristics(Restriction::Stationary);
    assert_eq!(model.n_rows, 4);
    assert_eq!(model.n_cols(), 9);
    // displayed A has row hits: p00 twice, p01 four times, p10 once, p11 twice
    let mut expected = vec![0, 0, 1, 1, 1, 1, 2, 3, 3];
    expected.sort();
    assert_eq!(column_multiset(&model), expected);
    assert_eq!(model.restriction.len(), 3);
    let regs = regions(3, 2);
    for (f, row) in model.restriction.iter().enumerate() {
        let mut dense = vec![Rat::zero(); 9];
        for (c, v) in row {
            dense[*c] = v.clone();
        }
        for (c, reg) in regs.iter().enumerate() {
            let want = int(i64::from(reg[0] == f) - i64::from(reg[1] == f));
            assert_eq!(dense[c], want);
        }
    }
}

#[test]
fn exchangeable_rows_before_and_after_dedup() {
    let model = heuristics(Restriction::Exchangeable);
    let stats = model.restriction_stats;
    assert_eq!(stats.generated, 9);
    assert_eq!(stats.nonzero, 6);
    assert_eq!(stats.kept, 3);
}

#[test]
fn column_sums_are_one_and_restrictions_balance() {
    let specs = vec![
        ModelSpec::static_panel(
            vec![ints(&[0, 4]), ints(&[0, 3]), ints(&[0, 2]), ints(&[0, 1])],
            Restriction::Stationary,
        ),
        ModelSpec::static_panel(
            vec![ints(&[0, 4]), ints(&[0, 3]), ints(&[0, 2]), ints(&[0, 1])],
            Restriction::Exchangeable,
        ),
        ModelSpec::dyn_cond(
            vec![ints(&[0, 0]), ints(&[0, 3]), ints(&[0, 5]), ints(&[0, 7])],
            int(7),
            3,
            Restriction::Stationary,
        ),
        ModelSpec::binary_kpt(&ints(&[0, 1]), int(2), Restriction::Stationary),
        ModelSpec::ar2(ints(&[0, 4, 2]), int(3), int(-4), 1, 1),
    ];
    for spec in specs {
        let model = build(&spec).unwrap();
        let a = model.a_dense();
        for c in 0..model.n_cols() {
            let s: Rat = a.iter().map(|r| r[c].clone()).sum();
            assert_eq!(s, Rat::one());
        }
        for row in &model.restriction {
            assert!(!row.is_empty());
            let s: Rat = row.iter().map(|(_, v)| v.clone()).sum();
            assert!(s.is_zero());
        }
    }
}

#[test]
fn dynamic_four_has_sixteen_outcomes() {
    let spec = ModelSpec::dyn_cond(
        vec![ints(&[0, 0]), ints(&[0, 3]), ints(&[0, 5]), ints(&[0, 7])],
        int(7),
        3,
        Restriction::Stationary,
    );
    let model = build(&spec).unwrap();
    assert_eq!(model.n_rows, 16);
    assert_eq!(model.row_labels[0], vec![1, 1]);
    assert_eq!(model.row_labels[15], vec![4, 4]);
}

#[test]
fn two_lag_matrix_shape() {
    let model = build(&ModelSpec::ar2(ints(&[0, 4, 2]), int(3), int(-4), 1, 1)).unwrap();
    assert_eq!(model.n_rows, 8);
    assert_eq!(model.n_cols(), 512);
    assert_eq!(model.row_labels[1], vec![0, 0, 1]);
}

#[test]
fn binary_dynamic_rows_are_lexicographic() {
    let model = build(&ModelSpec::binary_kpt(&ints(&[0, 1]), int(2), Restriction::Stationary)).unwrap();
    assert_eq!(model.n_rows, 8);
    assert_eq!(model.n_cols(), 2 * 25);
    assert_eq!(model.row_labels[0], vec![0, 0, 0]);
    assert_eq!(model.row_labels[3], vec![0, 1, 1]);
    assert_eq!(model.row_labels[4], vec![1, 0, 0]);
}

#[test]
fn exchangeable_representation_rows() {
    let p = build_p_exchangeable(3, 2);
    assert_eq!(p.len(), 6);
    let sizes: Vec<usize> = p.iter().map(|r| r.len()).collect();
    assert_eq!(sizes, vec![1, 2, 2, 1, 2, 1]);
    assert_eq!(build_p_exchangeable(1, 2), vec![vec![0]]);
    let p = build_p_exchangeable(2, 3);
    let sizes: Vec<usize> = p.iter().map(|r| r.len()).collect();
    assert_eq!(sizes, vec![1, 3, 3, 1]);
}

#[test]
fn no_state_dependence_marginalizes_to_static() {
    let v = vec![ints(&[0, 0]), ints(&[0, 2]), ints(&[0, 1])];
    let uncond = build(&ModelSpec::dyn_uncond(v.clone(), int(0), Restriction::Stationary)).unwrap();
    let stat = build(&ModelSpec::static_panel(v, Restriction::Stationary)).unwrap();
    assert_eq!(patches(&uncond.spec).len(), stat.patches.len());
    // each block g maps region r to an outcome (g, d1, d2) whose (d1, d2) part
    // is the static outcome of the same region
    let nreg = stat.n_cols();
    for g in 0..3 {
        for r in 0..nreg {
            let row = uncond.column_row[g * nreg + r];
            assert_eq!(row / 9, g);
            assert_eq!(row % 9, stat.column_row[r]);
        }
    }
}

#[test]
fn random_feasible_q_gives_probability_vectors() {
    let mut rng = Pcg64::seed_from_u64(7);
    let specs = vec![
        ModelSpec::binary_static(&ints(&[0, 1]), Restriction::Stationary),
        ModelSpec::static_panel(
            vec![ints(&[0, 4]), ints(&[0, 3]), ints(&[0, 2])],
            Restriction::Exchangeable,
        ),
        ModelSpec::binary_kpt(&ints(&[0, 1]), int(2), Restriction::Stationary),
        ModelSpec::ar2(ints(&[0, 4, 2]), int(3), int(-4), 1, 1),
    ];
    for spec in specs {
        let model = build(&spec).unwrap();
        for _ in 0..20 {
            let q = random_feasible_q(&model, &mut rng);
            assert!(q.iter().all(|x| !x.is_negative()));
            for row in &model.restriction {
                let s: Rat = row.iter().map(|(c, v)| v * &q[*c]).sum();
                assert!(s.is_zero());
            }
            let p = model.apply_a(&q);
            assert!(p.iter().all(|x| !x.is_negative()));
            assert_eq!(p.iter().sum::<Rat>(), Rat::one());
        }
    }
}

#[test]
fn triplet_json_lists_nonzeros() {
    let model = heuristics(Restriction::Stationary);
    let json = model.to_triplet_json();
    let a = json["A"].as_array().unwrap();
    assert_eq!(a.len(), 9);
    assert_eq!(json["R"].as_array().unwrap().len(), 12);
}
