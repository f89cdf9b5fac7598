use std::collections::BTreeSet;

use sharpset::cases::{enumerate_cases, realizable, redraw, CaseFamily, CasesError, Symmetry};
use sharpset::discretize::{patches, Family, Restriction};
use sharpset::rat::{int, ints, Rat};

fn static_family(d: usize) -> CaseFamily {
    CaseFamily::new(Family::StaticPanel, d, 2, None, None).unwrap()
}

fn binary_dynamic() -> CaseFamily {
    CaseFamily::new(Family::DynUncondOneLag, 2, 2, None, None).unwrap()
}

fn form_values(family: &CaseFamily, x: &[Rat]) -> Vec<Rat> {
    family.forms().iter().map(|f| f.eval(x)).collect()
}

#[test]
fn static_canonical_counts_are_powers_of_two() {
    for d in 2..=5 {
        let cases = enumerate_cases(&static_family(d), Symmetry::Canonical).unwrap();
        assert_eq!(cases.len(), 1 << (d - 1));
        assert!(cases.iter().all(|c| c.realizable));
    }
}

#[test]
fn static_four_representatives_follow_the_tie_patterns() {
    let cases = enumerate_cases(&static_family(4), Symmetry::Canonical).unwrap();
    let got: BTreeSet<Vec<Rat>> = cases.iter().map(|c| c.representative.clone()).collect();
    let want: BTreeSet<Vec<Rat>> = [
        [4, 3, 2, 1],
        [4, 3, 2, 2],
        [4, 3, 3, 2],
        [4, 3, 3, 3],
        [4, 4, 3, 2],
        [4, 4, 3, 3],
        [4, 4, 4, 3],
        [4, 4, 4, 4],
    ]
    .iter()
    .map(|v| ints(v))
    .collect();
    assert_eq!(got, want);
}

#[test]
fn static_binary_full_enumeration_has_three_cases() {
    let cases = enumerate_cases(&static_family(2), Symmetry::None).unwrap();
    assert_eq!(cases.len(), 3);
    let full4 = enumerate_cases(&static_family(3), Symmetry::None).unwrap();
    assert_eq!(full4.len(), 13);
}

#[test]
fn binary_dynamic_canonical_has_ten_cases() {
    let family = binary_dynamic();
    let cases = enumerate_cases(&family, Symmetry::Canonical).unwrap();
    assert_eq!(cases.len(), 10);
    let texts: BTreeSet<String> = cases.iter().map(|c| c.describe()).collect();
    assert!(texts.contains("v1 < v1+γ < v2 < v2+γ"));
    assert!(texts.contains("v1 = v2 = v1+γ = v2+γ"));
    let full = enumerate_cases(&family, Symmetry::None).unwrap();
    assert_eq!(full.len(), 17);
}

#[test]
fn representatives_realize_their_orderings() {
    let families = [
        static_family(3),
        binary_dynamic(),
        CaseFamily::new(Family::DynCondBinaryTwoLag, 2, 3, Some(1), Some(1)).unwrap(),
    ];
    for family in &families[..2] {
        for case in enumerate_cases(family, Symmetry::None).unwrap() {
            let values = form_values(family, &case.representative);
            for group in &case.ordering {
                assert!(group.iter().all(|&i| values[i] == values[group[0]]));
            }
            for pair in case.ordering.windows(2) {
                assert!(values[pair[0][0]] < values[pair[1][0]]);
            }
        }
    }
}

#[test]
fn binary_dynamic_listed_orderings() {
    let family = binary_dynamic();
    let ok = realizable(&family, &[vec![0], vec![2], vec![1], vec![3]]);
    assert!(ok.ok);
    let values = form_values(&family, ok.witness.as_ref().unwrap());
    assert!(values[0] < values[2] && values[2] < values[1] && values[1] < values[3]);
    let bad = realizable(&family, &[vec![3], vec![0], vec![1], vec![2]]);
    assert!(!bad.ok);
    assert!(bad.witness.is_none());
}

#[test]
fn two_lag_ordering_is_realizable() {
    let family = CaseFamily::new(Family::DynCondBinaryTwoLag, 2, 3, Some(1), Some(1)).unwrap();
    let values = ints(&[0, 4, 2, 3, -4]);
    let values = form_values(&family, &values);
    let mut idx: Vec<usize> = (0..7).collect();
    idx.sort_by(|&a, &b| values[a].cmp(&values[b]));
    let ordering: Vec<Vec<usize>> = idx.iter().map(|&i| vec![i]).collect();
    assert_eq!(idx, vec![4, 0, 1, 6, 3, 2, 5]);
    assert!(realizable(&family, &ordering).ok);
}

#[test]
fn patch_structure_depends_only_on_the_ordering() {
    let families = [static_family(3), binary_dynamic()];
    for family in &families {
        for case in enumerate_cases(family, Symmetry::Canonical).unwrap() {
            let base: BTreeSet<_> = patches(&case.to_spec(Restriction::Stationary)).into_iter().collect();
            for seed in 0..5 {
                let mut other = case.clone();
                other.representative = redraw(family, &case.ordering, seed).unwrap();
                let values = form_values(family, &other.representative);
                for pair in case.ordering.windows(2) {
                    assert!(values[pair[0][0]] < values[pair[1][0]]);
                }
                let got: BTreeSet<_> = patches(&other.to_spec(Restriction::Stationary)).into_iter().collect();
                assert_eq!(got, base, "{}", case.describe());
            }
        }
    }
}

#[test]
fn two_lag_patches_are_stable_under_redraws() {
    let family = CaseFamily::new(Family::DynCondBinaryTwoLag, 2, 3, Some(1), Some(1)).unwrap();
    let ordering: Vec<Vec<usize>> = [4, 0, 1, 6, 3, 2, 5].iter().map(|&i| vec![i]).collect();
    let case = realizable(&family, &ordering);
    let spec = family.spec_for(case.witness.as_ref().unwrap(), Restriction::Stationary);
    let base: BTreeSet<_> = patches(&spec).into_iter().collect();
    assert_eq!(base.len(), 8);
    for seed in 0..5 {
        let x = redraw(&family, &ordering, seed).unwrap();
        let got: BTreeSet<_> = patches(&family.spec_for(&x, Restriction::Stationary)).into_iter().collect();
        assert_eq!(got, base);
    }
}

#[test]
fn unsupported_families_are_refused() {
    assert!(matches!(
        CaseFamily::new(Family::DynCondOneLag, 3, 2, Some(1), None),
        Err(CasesError::Unsupported { .. })
    ));
    assert!(matches!(
        CaseFamily::new(Family::StaticPanel, 3, 3, None, None),
        Err(CasesError::Unsupported { .. })
    ));
    let _ = int(0);
}
