//! Quadrature over `R^n_+` for integrands that are not reflection symmetric.
//!
//! The trapezoid rule in `x_n` on `[0, L]` loses its spectral accuracy when
//! the integrand has nonzero odd normal derivatives at `x_n = 0`. The
//! Euler–Maclaurin endpoint terms
//! `∫_0^∞ f = h Σ'' f(r h) + Σ_k B_{2k} h^{2k}/(2k)! f^{(2k−1)}(0)`
//! restore it; the odd derivatives are taken spectrally on the full grid.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{fft, Grid};

/// `B_2, B_4, B_6, B_8`.
const BERNOULLI: [f64; 4] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0];

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Boundary row sums `Σ_{x'} g(x', 0)` of a full-grid scalar.
fn boundary_row_sum(grid: &Grid, values: &[Complex64]) -> Complex64 {
    let points = grid.points();
    let lines: Vec<Complex64> = values.par_chunks(points).map(|line| line[points / 2]).collect();
    lines.into_iter().sum()
}

/// `∫_{x_n > 0} F dx` for a scalar density sampled on the full grid.
///
/// `corrections` Euler–Maclaurin terms (at most 4) are added.
pub fn half_space_integral(grid: &Grid, density: &[Complex64], corrections: usize) -> Result<Complex64> {
    if density.len() != grid.len() {
        return Err(Error::ShapeMismatch("density does not match the grid".into()));
    }
    if corrections > BERNOULLI.len() {
        return Err(Error::InvalidParameter(format!(
            "at most {} endpoint corrections are available",
            BERNOULLI.len()
        )));
    }
    let n = grid.dim();
    let points = grid.points();
    let half = points / 2;
    let h = grid.spacing();
    let lines: Vec<Complex64> = density
        .par_chunks(points)
        .map(|line| {
            let mut acc = 0.5 * (line[half] + line[0]);
            for v in &line[half + 1..] {
                acc += v;
            }
            acc
        })
        .collect();
    let trapezoid: Complex64 = lines.into_iter().sum();
    let mut total = trapezoid * grid.cell_volume();
    if corrections > 0 {
        let spectrum = fft::forward(grid, density);
        let xi_n = grid.xi_axis(n);
        let tangential = h.powi(n as i32 - 1);
        for (k, b) in BERNOULLI.iter().take(corrections).enumerate() {
            let order = 2 * k + 1;
            let factor = Complex64::new(0.0, 1.0).powi(order as i32);
            let deriv: Vec<Complex64> = spectrum
                .par_iter()
                .zip(xi_n.par_iter())
                .map(|(v, x)| v * factor * x.powi(order as i32))
                .collect();
            let deriv = fft::inverse(grid, &deriv);
            let m = 2 * (k + 1);
            total += boundary_row_sum(grid, &deriv) * (tangential * b * h.powi(m as i32) / factorial(m));
        }
    }
    Ok(total)
}

/// `∫_{∂R^n_+} g dx'` for a density on the boundary grid.
pub fn boundary_integral(boundary: &Grid, density: &[Complex64]) -> Result<Complex64> {
    if density.len() != boundary.len() {
        return Err(Error::ShapeMismatch("density does not match the boundary grid".into()));
    }
    Ok(density.iter().sum::<Complex64>() * boundary.cell_volume())
}
