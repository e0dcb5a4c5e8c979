//! Boundary-condition residuals evaluated on the row `x_n = 0`.
//!
//! Tangential derivatives are spectral on the boundary grid; the normal
//! derivative uses a one-sided finite-difference stencil on the first rows,
//! so these residuals also apply to fields without reflection symmetry.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::traces::BoundaryForm;
use super::HalfField;
use crate::algebra::{wedge_sign, Blade};
use crate::error::{Error, Result};
use crate::field::fft;

/// Weights of the `m`-th derivative at `z` for the given nodes (Fornberg's
/// recursion).
pub fn fornberg_weights(z: f64, nodes: &[f64], m: usize) -> Vec<f64> {
    let count = nodes.len();
    let mut c = vec![vec![0.0; m + 1]; count];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..count {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// `∂_n u_blade(·, 0)` from a one-sided stencil over rows `0..=order`.
pub fn normal_derivative(u: &HalfField, blade: Blade, order: usize) -> Result<Vec<Complex64>> {
    let rows = u.rows();
    if order == 0 || order >= rows {
        return Err(Error::InvalidParameter(format!(
            "stencil order must lie in 1..{rows}, got {order}"
        )));
    }
    let comp = u
        .component(blade)
        .ok_or_else(|| Error::ShapeMismatch(format!("component {blade:?} absent")))?;
    let nodes: Vec<f64> = (0..=order).map(|r| r as f64).collect();
    let w = fornberg_weights(0.0, &nodes, 1);
    let h = u.grid().spacing();
    Ok(comp
        .par_chunks(rows)
        .map(|line| line.iter().zip(&w).map(|(v, wi)| v * *wi).sum::<Complex64>() / h)
        .collect())
}

/// `∂_axis` of a boundary row, spectrally on the boundary grid (`axis < n`).
pub fn tangential_derivative(u: &HalfField, values: &[Complex64], axis: usize) -> Result<Vec<Complex64>> {
    let bgrid = u.grid().boundary()?;
    if axis == 0 || axis > bgrid.dim() {
        return Err(Error::InvalidParameter(format!("tangential axis {axis} out of range")));
    }
    let mut spec = fft::forward(&bgrid, values);
    let xi = bgrid.xi_axis(axis);
    spec.par_iter_mut()
        .zip(xi.par_iter())
        .for_each(|(v, x)| *v *= Complex64::new(0.0, *x));
    Ok(fft::inverse(&bgrid, &spec))
}

/// `∂_axis u_blade(·, 0)` for any axis.
pub fn boundary_derivative(u: &HalfField, blade: Blade, axis: usize, order: usize) -> Result<Vec<Complex64>> {
    if axis == u.dim() {
        normal_derivative(u, blade, order)
    } else {
        let row = u
            .boundary_row(blade)
            .ok_or_else(|| Error::ShapeMismatch(format!("component {blade:?} absent")))?;
        tangential_derivative(u, &row, axis)
    }
}

/// Pair of boundary `L²` norms: a value condition and a first-order condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResidual {
    pub trace: f64,
    pub flux: f64,
}

impl BoundaryResidual {
    pub fn max(&self) -> f64 {
        self.trace.max(self.flux)
    }
}

fn boundary_norm(values: &[Vec<Complex64>], cell: f64) -> f64 {
    let sum: f64 = values.iter().flat_map(|v| v.iter()).map(|x| x.norm_sqr()).sum();
    (sum * cell).sqrt()
}

/// Navier-slip residuals of a 1-form: `trace = ‖ν·u‖` and
/// `flux = ‖[(∇u + ∇uᵀ)ν]_tan‖` on `∂R^n_+`, where
/// `[(∇u + ∇uᵀ)ν]_tan = −Σ_{k<n} (∂_k u_n + ∂_n u_k) e_k`.
pub fn navier_slip_residual(u: &HalfField, order: usize) -> Result<BoundaryResidual> {
    let n = u.dim();
    if !u.mask().contains(1) {
        return Err(Error::ShapeMismatch("Navier-slip residual needs a 1-form".into()));
    }
    let cell = u.grid().boundary()?.cell_volume();
    let un = u.boundary_row(Blade::axis(n)).expect("1-form");
    let stress = (1..n)
        .map(|k| {
            let a = tangential_derivative(u, &un, k)?;
            let b = normal_derivative(u, Blade::axis(k), order)?;
            Ok(a.iter().zip(&b).map(|(x, y)| -(x + y)).collect())
        })
        .collect::<Result<Vec<Vec<Complex64>>>>()?;
    Ok(BoundaryResidual {
        trace: boundary_norm(&[un], cell),
        flux: boundary_norm(&stress, cell),
    })
}

/// `ν⌟(du)|_∂` with the normal derivative from the one-sided stencil.
pub fn tangential_trace_of_d(u: &HalfField, order: usize) -> Result<BoundaryForm> {
    let n = u.dim();
    let mut out = BoundaryForm::zeros(u.grid())?;
    for deg in u.mask().degrees() {
        for k in Blade::of_degree(n, deg).filter(|b| !b.contains(n)) {
            let c = k.with_axis(n);
            let mut acc = vec![Complex64::new(0.0, 0.0); out.grid().len()];
            for a in c.axes() {
                let src = c.without_axis(a);
                let s = wedge_sign(Blade::axis(a), src) as f64;
                let der = boundary_derivative(u, src, a, order)?;
                acc.iter_mut().zip(&der).for_each(|(x, y)| *x += y * s);
            }
            let s = -wedge_sign(Blade::axis(n), k) as f64;
            out.set(k, acc.into_iter().map(|v| v * s).collect())?;
        }
    }
    Ok(out)
}

/// Absolute Hodge boundary residuals: `trace = ‖ν⌟u‖`, `flux = ‖ν⌟du‖`.
pub fn hodge_bc_residual(u: &HalfField, order: usize) -> Result<BoundaryResidual> {
    Ok(BoundaryResidual {
        trace: super::tangential_trace(u)?.norm_l2(),
        flux: tangential_trace_of_d(u, order)?.norm_l2(),
    })
}
