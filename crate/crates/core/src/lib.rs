//! Expected-cost analysis of emergency-override architectures.
//!
//! The crate models an emergency mechanism as one cell of a Scope ×
//! Authority grid ([`taxonomy`]), prices it with a stochastic expected-cost
//! objective ([`cost_model`]), and calibrates the inputs from incident
//! data ([`incidents`]), heavy-tailed loss statistics ([`loss_tail`]) and
//! community sentiment ([`sentiment`]). [`simulator`] checks the analytic
//! expectation by Monte Carlo.

pub mod cost_model;
pub mod error;
pub mod incidents;
pub mod loss_tail;
pub mod rng;
pub mod scenario;
pub mod sentiment;
pub mod simulator;
pub mod taxonomy;

pub use error::{Error, Result};
