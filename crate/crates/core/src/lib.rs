//! Spectral exterior calculus on `R^n` and the half-space `R^n_+`.
//!
//! Fields are sampled on a large periodic torus, operators act as Fourier
//! multipliers, and half-space problems are solved through reflection
//! extensions.

pub mod algebra;
pub mod calculus;
pub mod error;
pub mod evolution;
pub mod field;
pub mod half_space;
pub mod littlewood_paley;
pub mod tolerances;

pub use error::{Error, Result};
