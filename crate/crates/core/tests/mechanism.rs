mod common;

use std::sync::Arc;

use procure_core::costmodel::param_order;
use procure_core::mechanism::AnchorRule;
use procure_core::verify::{check_ic, check_monotone, check_pointwise, check_vp};
use procure_core::*;
use proptest::prelude::*;

fn arb_problem() -> impl Strategy<Value = ProcurementProblem> {
    let ty = (0.0f64..6.0, 0.3f64..1.5, 0.5f64..3.0);
    (
        prop::collection::vec(ty, 1..5),
        0.6f64..2.0,
        100.0f64..800.0,
        10usize..120,
        1.5f64..3.5,
        4usize..60,
    )
        .prop_map(|(params, a, q_max, n_cells, shape, n_w)| {
            let types = params
                .iter()
                .enumerate()
                .map(|(i, (c0, t, g))| SellerType::simple(format!("t{i}"), *c0, *t, *g, 0.0))
                .collect();
            let space = TypeSpace::uniform(types, &SimpleCost).unwrap();
            let buyer = BuyerUtility::affine(a, a / q_max).unwrap();
            let grid = QuantityGrid::new(q_max, n_cells).unwrap();
            let weather = WeatherModel::weibull(shape, 5.0, n_w).unwrap();
            ProcurementProblem::new(space, Arc::new(SimpleCost), weather, buyer, grid).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solution_certificates_hold(p in arb_problem()) {
        let sol = p.solve(None).unwrap();
        for e in check_pointwise(&p, &sol).into_iter().chain(check_ic(&p, &sol)).chain(check_vp(&p, &sol)) {
            prop_assert!(e.passed, "{:?}", e);
        }
        let monotone = &check_monotone(&p, &sol)[0];
        prop_assert!(monotone.passed, "{:?}", monotone);
    }

    #[test]
    fn open_prices_sit_between_cost_extremes(p in arb_problem()) {
        let sol = p.solve(None).unwrap();
        for (i, &price) in sol.schedule.open_prices().iter().enumerate() {
            let lo = (0..p.types().len()).map(|x| p.cell_cost(x, i)).fold(f64::INFINITY, f64::min);
            let hi = (0..p.types().len()).map(|x| p.cell_cost(x, i)).fold(0.0, f64::max);
            prop_assert!(price >= lo && price <= hi);
            prop_assert!(p.cell_value(i) >= price);
        }
    }

    #[test]
    fn parameter_ordered_types_produce_more(p in arb_problem()) {
        let sol = p.solve(None).unwrap();
        let types = p.types();
        for x in 0..types.len() {
            for y in 0..types.len() {
                if param_order(&types[x], &types[y], &SimpleCost.directions()) == Dominance::Better {
                    prop_assert!(sol.outcome.types[x].q >= sol.outcome.types[y].q);
                }
            }
        }
    }

    #[test]
    fn anchor_shift_keeps_every_choice(p in arb_problem(), shift in -50.0f64..50.0) {
        let sol = p.solve(None).unwrap();
        let moved = sol.schedule.clone().with_t0(sol.schedule.t0() + shift);
        for x in 0..p.types().len() {
            prop_assert_eq!(p.best_response(x, &sol.schedule).q_index, p.best_response(x, &moved).q_index);
        }
    }
}

#[test]
fn single_type_gets_first_best() {
    let weather = WeatherModel::weibull(3.0, 5.0, 200).unwrap();
    let x = SellerType::simple("only", 3.0, 1.2, 1.0, 1.0);
    let space = TypeSpace::new(vec![x], &SimpleCost).unwrap();
    let buyer = BuyerUtility::affine(1.4, 0.003).unwrap();
    let grid = ProcurementProblem::default_grid(&buyer, None, 1000).unwrap();
    let p = ProcurementProblem::new(space, Arc::new(SimpleCost), weather, buyer.clone(), grid).unwrap();
    let sol = p.solve(None).unwrap();
    let o = &sol.outcome.types[0];
    assert!(o.utility.abs() < 1e-9, "{}", o.utility);
    assert_eq!(sol.outcome.t0, 3.0);
    let first_best = (0..=grid.n_cells())
        .map(|k| buyer.value(grid.point(k)) - p.expected_cost_at(0, k))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((sol.outcome.buyer_utility - first_best).abs() < 1e-9);
    // p equals c where open, and closes where the buyer's value drops below it
    for (i, &price) in sol.schedule.open_prices().iter().enumerate() {
        assert_eq!(price, p.cell_cost(0, i));
    }
    let k = sol.schedule.open_cells();
    assert!(k < grid.n_cells() && p.cell_value(k) < p.cell_cost(0, k));
}

#[test]
fn worst_type_anchor_is_its_startup_cost() {
    let p = common::worst_type_fixture(500);
    let sol = p.solve(None).unwrap();
    assert_eq!(sol.outcome.anchor, AnchorRule::WorstType { index: 0 });
    assert_eq!(sol.outcome.t0, 4.0);
    assert!(sol.outcome.types[0].utility.abs() < 1e-9);
    assert!(sol.outcome.types[1].q >= sol.outcome.types[0].q);
}

#[test]
fn benchmark_has_no_worst_type_and_binds_someone() {
    let p = common::benchmark(2000);
    let sol = p.solve(None).unwrap();
    assert!(matches!(sol.outcome.anchor, AnchorRule::Posterior { .. }));
    let tol = p.tol_grid();
    let min_u = sol.outcome.types.iter().map(|o| o.utility).fold(f64::INFINITY, f64::min);
    assert!(min_u.abs() <= tol);
    assert!(sol.outcome.types.iter().all(|o| o.utility >= -tol && o.q > 0.0));
}

#[test]
fn closed_everywhere_when_costs_exceed_value() {
    let weather = WeatherModel::point_mass(0.0).unwrap();
    let space = TypeSpace::new(vec![SellerType::simple("x", 1.0, 5.0, 1.0, 1.0)], &SimpleCost).unwrap();
    let buyer = BuyerUtility::affine(1.0, 0.01).unwrap();
    let grid = ProcurementProblem::default_grid(&buyer, None, 50).unwrap();
    let p = ProcurementProblem::new(space, Arc::new(SimpleCost), weather, buyer, grid).unwrap();
    let sol = p.solve(None).unwrap();
    assert_eq!(sol.schedule.closed_from(), Some(0));
    assert!((0..=50).all(|k| sol.schedule.payment(k) == 1.0));
}

fn exclusion_problem(c0_last: f64) -> ProcurementProblem {
    let weather = WeatherModel::weibull(3.0, 5.0, 100).unwrap();
    let types = vec![
        SellerType::simple("x", 0.0, 0.6, 2.0, 0.0),
        SellerType::simple("y", 0.0, 0.8, 1.5, 0.0),
        SellerType::simple("z", c0_last, 1.0, 1.0, 0.0),
    ];
    let space = TypeSpace::uniform(types, &SimpleCost).unwrap();
    let buyer = BuyerUtility::affine(1.2, 0.003).unwrap();
    let grid = ProcurementProblem::default_grid(&buyer, None, 400).unwrap();
    ProcurementProblem::new(space, Arc::new(SimpleCost), weather, buyer, grid).unwrap()
}

#[test]
fn exclusion_drops_a_type_with_huge_startup_cost() {
    let p = exclusion_problem(500.0);
    let full = p.solve(None).unwrap();
    let r = p.exclusion_search(64).unwrap();
    assert!(!r.heuristic);
    assert_eq!(r.admissible, vec![0, 1]);
    assert!(r.solution.outcome.buyer_utility > full.outcome.buyer_utility);
    // the excluded type walks away
    assert!(!r.solution.outcome.types[2].participates);
    assert_eq!(r.solution.outcome.types[2].payment, 0.0);
}

#[test]
fn exclusion_keeps_everyone_without_startup_costs() {
    let p = exclusion_problem(0.0);
    let r = p.exclusion_search(64).unwrap();
    assert_eq!(r.admissible, vec![0, 1, 2]);

    let weather = WeatherModel::weibull(3.0, 5.0, 50).unwrap();
    let space = TypeSpace::new(vec![SellerType::simple("x", 2.0, 1.0, 1.0, 1.0)], &SimpleCost).unwrap();
    let buyer = BuyerUtility::affine(1.2, 0.003).unwrap();
    let grid = ProcurementProblem::default_grid(&buyer, None, 100).unwrap();
    let p = ProcurementProblem::new(space, Arc::new(SimpleCost), weather, buyer, grid).unwrap();
    assert_eq!(p.exclusion_search(4).unwrap().admissible, vec![0]);
}

#[test]
fn exclusion_budget_flags_heuristic() {
    let p = exclusion_problem(500.0);
    let r = p.exclusion_search(1).unwrap();
    assert!(r.heuristic);
    assert_eq!(r.admissible, vec![0, 1, 2]);
}
