//! Default tolerances shared by the library checks, the test suites and the CLI.

/// Largest admissible zero-mode `L²` mass relative to `‖u‖₂` for
/// operators that need mean-free input.
pub const ZERO_MODE_REL: f64 = 1e-12;

/// Largest admissible spectral mass outside a homogeneous filter bank window.
pub const BANK_LEAKAGE: f64 = 1e-10;

pub const ALGEBRA: f64 = 1e-12;
pub const SYMBOL_FD: f64 = 1e-6;
pub const NILPOTENT: f64 = 1e-10;
pub const WHOLE_SPACE_DECOMP: f64 = 1e-10;
pub const LERAY_DIV_FORM: f64 = 1e-12;
pub const REFLECTION: f64 = 1e-12;
pub const BOUNDARY: f64 = 1e-8;
pub const HALF_SPACE_DECOMP: f64 = 1e-9;
pub const HALF_SPACE_ORTHO: f64 = 1e-8;
pub const DECOUPLING: f64 = 1e-10;
pub const TRACE_DUALITY: f64 = 1e-6;
pub const NAVIER_SLIP: f64 = 1e-7;
pub const RESOLVENT_SPREAD: f64 = 3.0;
pub const MAXREG_SPREAD: f64 = 1.1;
pub const CONVERGENCE_RATIO: (f64, f64) = (3.6, 4.4);

/// Stencil order for one-sided boundary normal derivatives.
pub const BOUNDARY_STENCIL_ORDER: usize = 16;
