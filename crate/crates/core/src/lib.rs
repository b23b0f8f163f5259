//! Numerics for Hermitian metrics given symbolically in local coordinates.
//!
//! The crate evaluates metric components as second-order Wirtinger jets,
//! assembles the Chern curvature tensor and the holomorphic sectional
//! curvature (HSC) from them, searches chart boxes for the minimum HSC, and
//! provides the warped-product machinery for fibrations
//! (`Φ + λ·π*(ω_Y)`) together with the quantitative estimates that go with it.
//!
//! Layout:
//! - [`wirtinger`]: second-order jets in `z` and `z̄`, plus a finite-difference oracle.
//! - [`dsl`]: expression parser/printer, [`dsl::MetricSpec`], metric catalog.
//! - [`curvature`]: metric jets, curvature tensor, HSC, slices.
//! - [`positivity`]: direction minimisation, chart scans, negative witnesses.
//! - [`lemmas`]: block-splitting estimate constants and the `G + λH` formula.
//! - [`warp`]: fibrations in product charts and the λ search.
//! - [`selftest`]: the acceptance suite, shared by tests and the CLI.

pub mod curvature;
pub mod dsl;
pub mod error;
pub mod lemmas;
pub mod positivity;
pub mod rng;
pub mod selftest;
pub mod warp;
pub mod wirtinger;

pub use error::{HscError, Result};
pub use num_complex::Complex64 as C64;

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
