mod common;

use std::sync::Arc;

use procure_core::verify::{check_joint_lattice, check_oracle, check_quasi_concavity, oracle_solve, ORACLE_TOL};
use procure_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn oracle_agrees_on_random_ordered_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut compared = 0;
    for _ in 0..60 {
        let p = common::random_ordered_instance(&mut rng);
        let sol = p.solve(None).unwrap();
        let qc = check_quasi_concavity(&sol);
        let e = check_oracle(&p, &sol).unwrap();
        // a gap is only admissible where the threshold rule breaks down
        assert!(e.passed || !qc.passed, "{e:?}");
        if qc.passed {
            compared += 1;
        }
    }
    assert!(compared >= 20, "{compared}");
}

#[test]
fn oracle_refuses_oversized_instances() {
    let p = common::worst_type_fixture(9);
    assert!(oracle_solve(&p).is_err());
    let p = common::benchmark(8);
    assert!(oracle_solve(&p).is_err());
}

#[test]
fn single_type_oracle_is_first_best() {
    let space = TypeSpace::new(vec![SellerType::simple("x", 1.0, 1.1, 1.3, 1.0)], &SimpleCost).unwrap();
    let buyer = BuyerUtility::affine(1.0, 0.004).unwrap();
    let grid = ProcurementProblem::default_grid(&buyer, None, 8).unwrap();
    let p = ProcurementProblem::new(space, Arc::new(SimpleCost), WeatherModel::weibull(3.0, 5.0, 10).unwrap(), buyer.clone(), grid)
        .unwrap();
    let first_best = (0..=8)
        .map(|k| buyer.value(grid.point(k)) - p.expected_cost_at(0, k))
        .fold(f64::NEG_INFINITY, f64::max);
    let o = oracle_solve(&p).unwrap();
    assert!((o.buyer_utility - first_best).abs() < ORACLE_TOL);
    assert!((p.solve(None).unwrap().outcome.buyer_utility - first_best).abs() < ORACLE_TOL);
}

#[test]
fn point_mass_weather_two_types() {
    let space = TypeSpace::uniform(
        vec![SellerType::simple("lo", 0.5, 0.4, 1.0, 0.0), SellerType::simple("hi", 1.0, 0.7, 1.0, 0.0)],
        &SimpleCost,
    )
    .unwrap();
    let buyer = BuyerUtility::affine(1.0, 0.01).unwrap();
    let grid = ProcurementProblem::default_grid(&buyer, None, 5).unwrap();
    let p = ProcurementProblem::new(space, Arc::new(SimpleCost), WeatherModel::point_mass(0.0).unwrap(), buyer, grid).unwrap();
    let sol = p.solve(None).unwrap();
    let o = oracle_solve(&p).unwrap();
    assert!((o.buyer_utility - sol.outcome.buyer_utility).abs() < ORACLE_TOL);
    for (i, price) in o.prices.iter().enumerate() {
        match (price, sol.schedule.price(i)) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
            (None, None) => {}
            other => panic!("cell {i}: {other:?}"),
        }
    }
}

#[test]
fn joint_lattice_finds_nothing_better_on_two_cells() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 10 {
        let p = common::random_ordered_instance(&mut rng);
        if p.grid().n_cells() > 2 {
            continue;
        }
        let sol = p.solve(None).unwrap();
        let e = check_joint_lattice(&p, &sol, 120).unwrap();
        assert!(e.passed, "{e:?}");
        checked += 1;
    }
}
