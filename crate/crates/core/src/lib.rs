//! Collocation-based harmonic balance.
//!
//! The crate builds the time-domain residual `ωA x̂ − E⁺ f̃(E x̂)` for any
//! number of collocation nodes `M ≥ 2N+1`, which covers the HDHB (`M = 2N+1`),
//! RHB (`M = (φ+1)N+1`) and AFT (`M = 2φN+1`) variants, together with an
//! exact frequency-domain harmonic balance residual for polynomial fields.

pub mod assembly;
pub mod error;
pub mod integrate;
pub mod poly;
pub mod solvers;
pub mod spectral;
pub mod systems;

pub use error::{HbError, Result};
