//! Deterministic system-level simulator for multi-cell multi-user MIMO
//! downlink with collocated planar arrays, distributed circular arrays and
//! individually distributed antenna elements.
//!
//! The pipeline per Monte Carlo drop is: hexagonal layout ([`layout`]),
//! antenna and UE placement ([`antenna`]), large-scale LoS channel
//! ([`channel`]), per-sector SLNR precoding ([`precoding`]) and link budgets
//! ([`metrics`]). [`experiments`] runs drops and studies; [`report`] renders
//! results to CSV and summary text.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antenna;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod layout;
pub mod metrics;
pub mod precoding;
pub mod report;


/// Complex baseband scalar.
pub type Complex64 = nalgebra::Complex<f64>;

pub use antenna::ScenarioKind;
pub use error::{Result, SimError};
pub use experiments::ScenarioConfig;
