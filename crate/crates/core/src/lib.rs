//! Optimal nonlinear pricing for energy procurement from a strategic seller.
//!
//! The seller owns a conventional plant and a renewable plant whose output
//! depends on the weather. Her cost technology is private and
//! multi-dimensional. The buyer posts a payment schedule `t(q)`; each seller
//! type picks the quantity maximizing expected profit. The optimal schedule is
//! obtained pointwise: at every quantity the marginal price maximizes
//! `P[p >= c(q, x)] * (V'(q) - p)` over the types' expected marginal costs.
//!
//! Modules:
//! - [`weather`]: discrete weather distributions and expectations.
//! - [`costmodel`]: seller types, generation cost, dominance order.
//! - [`mechanism`]: quantity grid, pricing, anchoring, best responses.
//! - [`settlement`]: weather-indexed and risk-sharing payments.
//! - [`verify`]: brute-force oracles and numerical certificates.

pub mod costmodel;
pub mod error;
pub mod mechanism;
pub mod settlement;
pub mod verify;
pub mod weather;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use costmodel::{
    CostModel, Direction, Dominance, SellerType, SimpleCost, TypeSpace, WindConventionalCost,
};
pub use error::{Error, Result};
pub use mechanism::{
    BuyerUtility, ContractOutcome, PriceSchedule, ProcurementProblem, QuantityGrid,
};
pub use weather::{WeatherModel, WeatherState};
