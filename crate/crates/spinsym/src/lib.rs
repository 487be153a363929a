//! Symbol correspondences for spin-j systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`spin_algebra`]: half-integers, exact signed square roots, factorials,
//!   Legendre polynomials and the Clebsch-Gordan engine.
//! - [`catalog`]: characteristic-number families and their classification.
//! - [`symbols`]: coupled basis matrices, the symbol map, twisted products.
//! - [`localization`]: Π-distributions, moments and localization sweeps.
//! - [`quantization`]: J₃-invariant quantization and norm sequences.
//! - [`ground`]: the nested Fourier-coefficient model of the ground space.

pub mod catalog;
pub mod error;
pub mod ground;
pub mod localization;
pub mod quantization;
pub mod spin_algebra;
pub mod symbols;

pub use error::{Error, Result};
