use proptest::prelude::*;
use sharpset::rat::{int, ints, rat, Rat};
use sharpset::ratlp::{
    solve_lp, solve_lp_routed, solve_milp_feasibility, strict_feasibility, verify_infeasibility,
    verify_unbounded_ray, Direction, LinearProgram, LpStatus, Route, RowSense, WarmProgram,
};

#[test]
fn one_variable_maximum() {
    let mut lp = LinearProgram::new(1, Direction::Maximize);
    lp.objective = ints(&[1]);
    lp.add_dense_row(&ints(&[1]), RowSense::Le, int(3));
    let res = solve_lp(&lp).unwrap();
    assert_eq!(res.status, LpStatus::Optimal);
    assert_eq!(res.x, ints(&[3]));
    assert_eq!(res.value, int(3));
    assert_eq!(res.duals, ints(&[1]));
}

#[test]
fn farkas_certificate_for_contradictory_pair() {
    let mut lp = LinearProgram::new(1, Direction::Minimize);
    lp.set_free(0);
    lp.add_dense_row(&ints(&[1]), RowSense::Le, int(0));
    lp.add_dense_row(&ints(&[-1]), RowSense::Le, int(-1));
    for route in [Route::Primal, Route::Dual, Route::Auto] {
        let res = solve_lp_routed(&lp, route).unwrap();
        assert_eq!(res.status, LpStatus::Infeasible);
        let lambda = &res.certificate;
        assert_eq!(lambda[0], lambda[1]);
        assert!(lambda[0].is_positive());
        assert!(verify_infeasibility(&lp, lambda));
    }
}

#[test]
fn unbounded_problem_returns_improving_ray() {
    let mut lp = LinearProgram::new(2, Direction::Maximize);
    lp.objective = ints(&[1, 1]);
    lp.add_dense_row(&ints(&[1, -1]), RowSense::Le, int(2));
    for route in [Route::Primal, Route::Dual] {
        let res = solve_lp_routed(&lp, route).unwrap();
        assert_eq!(res.status, LpStatus::Unbounded);
        assert!(verify_unbounded_ray(&lp, &res.certificate));
    }
}

#[test]
fn dimension_mismatch_is_structural_error() {
    let mut lp = LinearProgram::new(2, Direction::Maximize);
    lp.objective = ints(&[1]);
    assert!(solve_lp(&lp).is_err());
    let mut lp = LinearProgram::new(1, Direction::Maximize);
    lp.add_row(vec![(3, int(1))], RowSense::Le, int(1));
    assert!(solve_lp(&lp).is_err());
}

#[test]
fn strict_feasibility_interval_intersection() {
    let a = vec![ints(&[1]), ints(&[1]), ints(&[1]), ints(&[1])];
    let b = ints(&[0, 2, 1, 3]);
    let res = strict_feasibility(&a, &b).unwrap();
    assert!(res.strictly_feasible);
    assert!(res.witness[0] < int(0));

    let a = vec![ints(&[1]), ints(&[-1])];
    let b = ints(&[0, 0]);
    assert!(!strict_feasibility(&a, &b).unwrap().strictly_feasible);
}

#[test]
fn milp_feasibility_examples() {
    let mut lp = LinearProgram::new(2, Direction::Minimize);
    lp.set_bounds(0, Some(int(0)), Some(int(1)));
    lp.set_bounds(1, Some(int(0)), Some(int(1)));
    lp.add_dense_row(&ints(&[1, 1]), RowSense::Eq, int(1));
    let res = solve_milp_feasibility(&lp, &[0, 1]).unwrap();
    assert!(res.feasible);
    assert_eq!(res.point, ints(&[1, 0]));

    let mut lp2 = lp.clone();
    lp2.rows[0].rhs = rat(1, 2);
    let res = solve_milp_feasibility(&lp2, &[0, 1]).unwrap();
    assert!(!res.feasible);
}

#[test]
fn bounded_variables_and_equalities() {
    // min -x - 2y  s.t.  x + y = 3, 0 <= x <= 2, 1 <= y <= 2
    let mut lp = LinearProgram::new(2, Direction::Minimize);
    lp.objective = ints(&[-1, -2]);
    lp.set_bounds(0, Some(int(0)), Some(int(2)));
    lp.set_bounds(1, Some(int(1)), Some(int(2)));
    lp.add_dense_row(&ints(&[1, 1]), RowSense::Eq, int(3));
    for route in [Route::Primal, Route::Dual] {
        let res = solve_lp_routed(&lp, route).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert_eq!(res.x, ints(&[1, 2]));
        assert_eq!(res.value, int(-5));
    }
}

fn small_rat() -> impl Strategy<Value = Rat> {
    (-4i64..=4).prop_map(int)
}

#[derive(Debug, Clone)]
struct RandomLp {
    lp: LinearProgram,
}

fn random_lp() -> impl Strategy<Value = RandomLp> {
    (1usize..=4, 1usize..=6).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(small_rat(), n),
            prop::collection::vec(prop::collection::vec(small_rat(), n), m),
            prop::collection::vec(small_rat(), m),
            prop::collection::vec(0u8..3, m),
            prop::collection::vec(0u8..4, n),
            any::<bool>(),
        )
            .prop_map(move |(c, rows, rhs, senses, kinds, maximize)| {
                let dir = if maximize {
                    Direction::Maximize
                } else {
                    Direction::Minimize
                };
                let mut lp = LinearProgram::new(n, dir);
                lp.objective = c;
                for (row, (b, s)) in rows.iter().zip(rhs.iter().zip(&senses)) {
                    let sense = match s {
                        0 => RowSense::Le,
                        1 => RowSense::Ge,
                        _ => RowSense::Eq,
                    };
                    lp.add_dense_row(row, sense, b.clone());
                }
                for (j, k) in kinds.iter().enumerate() {
                    match k {
                        0 => {}
                        1 => lp.set_free(j),
                        2 => lp.set_bounds(j, Some(int(-1)), Some(int(2))),
                        _ => lp.set_bounds(j, None, Some(int(1))),
                    }
                }
                RandomLp { lp }
            })
    })
}

fn row_ok(lp: &LinearProgram, x: &[Rat]) -> bool {
    lp.rows.iter().all(|row| {
        let lhs: Rat = row.coeffs.iter().map(|(j, a)| a * &x[*j]).sum();
        match row.sense {
            RowSense::Le => lhs <= row.rhs,
            RowSense::Ge => lhs >= row.rhs,
            RowSense::Eq => lhs == row.rhs,
        }
    }) && (0..lp.num_vars()).all(|j| {
        lp.lower[j].as_ref().is_none_or(|l| &x[j] >= l)
            && lp.upper[j].as_ref().is_none_or(|u| &x[j] <= u)
    })
}

fn duals_certify_optimality(lp: &LinearProgram, x: &[Rat], y: &[Rat]) -> bool {
    let max = lp.direction == Direction::Maximize;
    for (i, row) in lp.rows.iter().enumerate() {
        let s = y[i].signum();
        let sign_ok = match (row.sense, max) {
            (RowSense::Le, true) | (RowSense::Ge, false) => s >= 0,
            (RowSense::Ge, true) | (RowSense::Le, false) => s <= 0,
            (RowSense::Eq, _) => true,
        };
        if !sign_ok {
            return false;
        }
        let lhs: Rat = row.coeffs.iter().map(|(j, a)| a * &x[*j]).sum();
        if s != 0 && lhs != row.rhs {
            return false;
        }
    }
    let mut d = lp.objective.clone();
    for (row, yi) in lp.rows.iter().zip(y) {
        for (j, a) in &row.coeffs {
            d[*j] -= a * yi;
        }
    }
    (0..lp.num_vars()).all(|j| {
        let at_lo = lp.lower[j].as_ref() == Some(&x[j]);
        let at_hi = lp.upper[j].as_ref() == Some(&x[j]);
        let s = if max { d[j].signum() } else { -d[j].signum() };
        match (at_lo, at_hi) {
            (true, true) => true,
            (true, false) => s <= 0,
            (false, true) => s >= 0,
            (false, false) => s == 0,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn primal_and_dual_routes_agree(case in random_lp()) {
        let lp = &case.lp;
        let p = solve_lp_routed(lp, Route::Primal).unwrap();
        let d = solve_lp_routed(lp, Route::Dual).unwrap();
        prop_assert_eq!(p.status, d.status);
        for res in [&p, &d] {
            match res.status {
                LpStatus::Optimal => {
                    prop_assert!(row_ok(lp, &res.x));
                    let value: Rat = lp.objective.iter().zip(&res.x).map(|(c, x)| c * x).sum();
                    prop_assert_eq!(&value, &res.value);
                    prop_assert!(duals_certify_optimality(lp, &res.x, &res.duals));
                }
                LpStatus::Infeasible => prop_assert!(verify_infeasibility(lp, &res.certificate)),
                LpStatus::Unbounded => prop_assert!(verify_unbounded_ray(lp, &res.certificate)),
            }
        }
        if p.status == LpStatus::Optimal {
            prop_assert_eq!(&p.value, &d.value);
        }
    }

    #[test]
    fn solve_is_deterministic(case in random_lp()) {
        let a = solve_lp(&case.lp).unwrap();
        let b = solve_lp(&case.lp).unwrap();
        prop_assert_eq!(a, b);
    }
}

fn standard_form() -> impl Strategy<Value = (usize, Vec<Vec<Rat>>, Vec<Vec<Rat>>, Vec<Vec<Rat>>, Vec<u8>)> {
    (1usize..=4, 2usize..=6).prop_flat_map(|(m, n)| {
        (
            Just(m),
            prop::collection::vec(prop::collection::vec(small_rat(), m), n),
            prop::collection::vec(prop::collection::vec(small_rat(), m), 3),
            prop::collection::vec(prop::collection::vec(small_rat(), n), 3),
            prop::collection::vec(0u8..3, n),
        )
    })
}

fn fresh(m: usize, cols: &[Vec<Rat>], rhs: &[Rat], cost: &[Rat], kinds: &[u8]) -> WarmProgram {
    let sparse: Vec<Vec<(usize, Rat)>> = cols
        .iter()
        .map(|c| c.iter().cloned().enumerate().filter(|(_, a)| !a.is_zero()).collect())
        .collect();
    let lower = kinds
        .iter()
        .map(|k| match k {
            0 => Some(int(0)),
            1 => Some(int(-1)),
            _ => None,
        })
        .collect();
    let upper = kinds
        .iter()
        .map(|k| match k {
            1 => Some(int(2)),
            2 => Some(int(3)),
            _ => None,
        })
        .collect();
    WarmProgram::new(m, sparse, rhs.to_vec(), lower, upper, cost.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn warm_restarts_match_cold_solves((m, cols, rhss, costs, kinds) in standard_form()) {
        let mut warm = fresh(m, &cols, &rhss[0], &costs[0], &kinds);
        warm.solve();
        for (rhs, cost) in rhss.iter().zip(&costs).skip(1).chain(rhss.iter().zip(&costs).take(1)) {
            warm.set_cost(cost.clone());
            let a = warm.solve();
            let b = fresh(m, &cols, &rhss[0], cost, &kinds).solve();
            prop_assert_eq!(a.status, b.status);
            if a.status == LpStatus::Optimal {
                prop_assert_eq!(&a.value, &b.value);
            }
            warm.set_cost(costs[0].clone());
            warm.solve();
            warm.set_rhs(rhs.clone());
            let a = warm.solve();
            let b = fresh(m, &cols, rhs, &costs[0], &kinds).solve();
            prop_assert_eq!(a.status, b.status);
            if a.status == LpStatus::Optimal {
                prop_assert_eq!(&a.value, &b.value);
                let mut act = vec![Rat::zero(); m];
                for (c, x) in cols.iter().zip(&a.x) {
                    for (i, v) in c.iter().enumerate() {
                        act[i] += v * x;
                    }
                }
                prop_assert_eq!(&act, rhs);
            }
            warm.set_rhs(rhss[0].clone());
            warm.solve();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn data_changed_before_first_solve_is_honoured((m, cols, rhss, costs, kinds) in standard_form()) {
        let mut warm = fresh(m, &cols, &rhss[0], &costs[0], &kinds);
        warm.set_rhs(rhss[1 % rhss.len()].clone());
        warm.set_cost(costs[1 % costs.len()].clone());
        let a = warm.solve();
        let b = fresh(m, &cols, &rhss[1 % rhss.len()], &costs[1 % costs.len()], &kinds).solve();
        prop_assert_eq!(a.status, b.status);
        if a.status == LpStatus::Optimal {
            prop_assert_eq!(&a.value, &b.value);
        }
    }
}
