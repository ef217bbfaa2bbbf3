//! Regression-based Monte Carlo for discrete-time optimal stopping.
//!
//! The crate prices Bermudan-style claims (max-calls, a 1-asset put, and a
//! cancelable coupon swap) by backward induction on simulated paths. The
//! continuation value at each exercise date is fitted by linear least squares
//! on a basis of state functions; optionally the basis is *reinforced* at each
//! backward step with the previously fitted value surface, which adds one
//! nonlinear regressor per step at negligible extra cost.
//!
//! Outputs are out-of-sample lower bounds (the fitted exercise rule applied to
//! fresh paths) and nested-simulation dual upper bounds, plus a symbolic cost
//! model that predicts training/evaluation work for both algorithm variants.
//!
//! The CLI in `src/main.rs` wires these pieces into config-driven pipelines;
//! the `examples/` directory demonstrates each capability in isolation.

pub mod backward;
pub mod basis;
pub mod bounds;
pub mod config;
pub mod costmodel;
pub mod error;
pub mod market;
pub mod oracle;
pub mod products;
pub mod regression;
pub mod rng;
pub mod runner;

pub use error::{Error, Result};
