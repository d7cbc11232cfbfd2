//! Integer-valued autoregressive INAR(p) processes: model classification,
//! companion-matrix spectral analysis, exact moments, exact-distribution
//! simulation, the squared Bessel (CIR) scaling limit of unit-root models,
//! and (weighted) conditional least squares estimation.

pub mod cir;
pub mod data;
pub mod error;
pub mod estimate;
pub mod experiment;
pub mod model;
pub mod roots;
pub mod moments;
pub mod rng;
pub mod simulate;
pub mod spectral;
pub mod stats;

pub use error::{InarError, Result};
pub use model::{classify, decompose, gcd_support, validate, Classification, Coefficients, InnovationSpec, ModelSpec, Regime, SpecDocument};
