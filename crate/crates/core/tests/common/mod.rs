#![allow(dead_code)]

use std::sync::Arc;

use procure_core::costmodel::WindParams;
use procure_core::*;
use rand::Rng;

pub fn benchmark(n_cells: usize) -> ProcurementProblem {
    let weather = WeatherModel::weibull(3.0, 5.0, 200).unwrap();
    let types = WindParams::reference_types()
        .iter()
        .map(|(id, p)| SellerType::wind(*id, *p, 0.0))
        .collect();
    let space = TypeSpace::uniform(types, &WindConventionalCost).unwrap();
    let buyer = BuyerUtility::affine(0.6, 0.0006).unwrap();
    let grid = ProcurementProblem::default_grid(&buyer, None, n_cells).unwrap();
    ProcurementProblem::new(space, Arc::new(WindConventionalCost), weather, buyer, grid).unwrap()
}

/// Two simple-case types differing only in turbine size.
pub fn worst_type_fixture(n_cells: usize) -> ProcurementProblem {
    let space = TypeSpace::uniform(
        vec![
            SellerType::simple("small", 4.0, 1.2, 1.0, 0.0),
            SellerType::simple("large", 4.0, 1.2, 2.0, 0.0),
        ],
        &SimpleCost,
    )
    .unwrap();
    let buyer = BuyerUtility::affine(1.5, 0.004).unwrap();
    let grid = ProcurementProblem::default_grid(&buyer, None, n_cells).unwrap();
    ProcurementProblem::new(space, Arc::new(SimpleCost), WeatherModel::weibull(3.0, 5.0, 200).unwrap(), buyer, grid)
        .unwrap()
}

/// Tiny simple-case instance whose types form a chain in every coordinate
/// (start-up and conventional cost rising, turbine shrinking), so the
/// marginal costs are ordered and a worst type exists.
pub fn random_ordered_instance<R: Rng>(rng: &mut R) -> ProcurementProblem {
    let n = rng.gen_range(1..=4);
    let (mut c0, mut theta, mut gamma) = (rng.gen_range(0.0..2.0), rng.gen_range(0.5..1.0), rng.gen_range(2.0..3.0));
    let mut types = Vec::new();
    for i in 0..n {
        types.push(SellerType::simple(format!("t{i}"), c0, theta, gamma, 0.0));
        c0 += rng.gen_range(0.0..1.5);
        theta += rng.gen_range(0.0..0.3);
        gamma -= rng.gen_range(0.0..0.5);
    }
    let mut priors: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = priors.iter().sum();
    priors.iter_mut().for_each(|p| *p /= total);
    let last = 1.0 - priors[..n - 1].iter().sum::<f64>();
    priors[n - 1] = last;
    for (t, p) in types.iter_mut().zip(&priors) {
        t.prior = *p;
    }
    let space = TypeSpace::new(types, &SimpleCost).unwrap();
    let weather = WeatherModel::weibull(rng.gen_range(1.5..3.5), rng.gen_range(3.0..7.0), rng.gen_range(3..12)).unwrap();
    let a = rng.gen_range(0.5..2.0);
    let q_max = rng.gen_range(50.0..600.0);
    let buyer = BuyerUtility::affine(a, a / q_max).unwrap();
    let grid = QuantityGrid::new(q_max, rng.gen_range(2..=8)).unwrap();
    ProcurementProblem::new(space, Arc::new(SimpleCost), weather, buyer, grid).unwrap()
}
