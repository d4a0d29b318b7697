//! Quantitative analysis toolkit for a low-cost RFID mutual-authentication
//! protocol.
//!
//! The crate has five layers, built on top of each other:
//!
//! * [`protocol`] — an executable model of the tag/reader/server exchange,
//!   including the server-side old/new identifier pairs that give the scheme
//!   its resistance to desynchronisation.
//! * [`dtmc`] — sparse discrete-time Markov chains with reward structures and
//!   the numerical engines (transient, until, reward and steady-state
//!   analysis).
//! * [`pctl`] — a probabilistic temporal logic with reward queries: parser,
//!   printer and evaluator.
//! * [`modelgen`] — a guarded-command modelling language plus a generator
//!   that turns a tag-population configuration into a counter-abstracted
//!   chain with cost rewards.
//! * [`sim`] — a seeded Monte Carlo oracle: trajectory sampling over chains
//!   and a discrete-event simulation of the real protocol, used to
//!   cross-validate the analytical engines.

pub mod bits;
pub mod dtmc;
pub mod modelgen;
pub mod pctl;
pub mod protocol;
pub mod rng;
pub mod scalar;
pub mod sim;

pub use scalar::Real;

/// Chain over `f64` probabilities, the default everywhere.
pub type Dtmc64 = dtmc::Dtmc<f64>;
/// Chain over `f32`, for memory-bound state spaces.
pub type Dtmc32 = dtmc::Dtmc<f32>;
/// Reward structure over `f64`.
pub type Rewards64 = dtmc::RewardStructure<f64>;
/// Reward structure over `f32`.
pub type Rewards32 = dtmc::RewardStructure<f32>;
