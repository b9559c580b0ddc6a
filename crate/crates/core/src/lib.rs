//! Persona-grounded social simulation engine.
//!
//! The crate is organised as a pipeline:
//!
//! - [`pool`] — ingest, clean, and query a pool of real social-media users
//!   with labeled demographic attributes.
//! - [`synthesis`] — turn marginal or joint demographic targets into a
//!   concrete agent population (iterative proportional fitting, direct
//!   distribution sampling, a log-normal + Pareto income mixture, and
//!   population-proportional regional allocation).
//! - [`scenario`] — questionnaire instruments and scenario configs, compiled
//!   into a self-contained [`scenario::SimulationPlan`].
//! - [`behavior`] — agent response generation: prompt rendering, response
//!   parsing, a deterministic rule oracle, and an HTTP chat-completions
//!   backend with retry/rate-limit handling.
//! - [`evaluation`] — aggregation (winner-takes-all, Likert, spending) and
//!   alignment metrics (accuracy, RMSE, NRMSE, KL divergence).
//! - [`fixtures`] — deterministic generator for the synthetic fixture set
//!   shipped with the repository.
//!
//! Everything downstream of a seed is deterministic: random draws go through
//! counter-split substreams (see [`synthesis::rng`]) so results do not depend
//! on thread count or scheduling order.

pub mod behavior;
pub mod error;
pub mod evaluation;
pub mod fixtures;
pub mod pool;
pub mod scenario;
pub mod synthesis;

pub use error::{Error, Result};
