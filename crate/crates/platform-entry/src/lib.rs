//! Solver and simulator for strategic platform entry into seller
//! marketplaces.
//!
//! The single-seller side is exact: closed-form Gittins indices for the
//! four-state product chain ([`gittins`]), an outcome-tree evaluator for
//! seller/platform/buyer utilities under a committed platform policy
//! ([`seller`]), and a boundary/region/Pareto optimizer for the platform's
//! entry time, fee, and per-product entry vector ([`optimizer`]).
//!
//! The multi-seller side is simulated: a finite-horizon Markov game with
//! congestion and information spillover ([`game`]), independent Q-learning
//! with iterative best-response certification ([`marl`]), Gittins-guided
//! scenario generation ([`scenario`]), and a sweep/reporting harness
//! ([`experiment`]).
//!
//! See the `examples/` directory for one runnable entry point per
//! capability.

pub mod experiment;
pub mod game;
pub mod gittins;
pub mod marl;
pub mod optimizer;
pub mod scenario;
pub mod seller;
pub mod types;

pub use gittins::{GittinsResult, StoppingRule};
pub use seller::{SingleMarketState, SingleSellerMetrics};
pub use types::{
    CostMatrix, DiscountProfile, EntryTime, MarketConfig, PlatformPolicy, ProductSpec,
    ProductState,
};
