//! Energy-efficient design of dense uplink massive MIMO networks.
//!
//! Closed-form SINR/SE bounds, a circuit-power model, the alternating
//! optimizer over pilot reuse, antennas and UEs per cell, and Monte Carlo
//! validation on Poisson networks over a wraparound torus.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod mc;
pub mod optimizer;
pub mod params;
pub mod plot;
pub mod special;
pub mod stats;

pub use config::{load_config, parse_config};
pub use error::{Error, Infeasibility, Result};
pub use stats::McEstimate;
pub use optimizer::{alternating_optimize, OptimResult};
pub use geometry::{DropRealization, ThetaSums, TorusRegion};
pub use mc::McConfig;
pub use params::{Combiner, DesignPoint, EeBreakdown, HardwareParams, NetworkParams, PowerModel};
