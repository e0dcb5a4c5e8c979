//! Whole-space operators as Fourier multipliers.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{wedge_sign, Blade};
use crate::error::{Error, Result};
use crate::field::{FormField, Grid, SpectralField};
use crate::tolerances::ZERO_MODE_REL;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A point `λ` of the open sector `Σ_μ = {z ≠ 0 : |arg z| < μ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorPoint {
    lambda: Complex64,
    mu: f64,
}

impl SectorPoint {
    pub fn new(lambda: Complex64, mu: f64) -> Result<Self> {
        if !(0.0..PI).contains(&mu) {
            return Err(Error::Sector(format!("half-angle {mu} outside [0, π)")));
        }
        if lambda == Complex64::new(0.0, 0.0) || !lambda.re.is_finite() || !lambda.im.is_finite() {
            return Err(Error::Sector(format!("λ = {lambda} is not a nonzero finite number")));
        }
        let inside = if mu == 0.0 {
            lambda.im == 0.0 && lambda.re > 0.0
        } else {
            lambda.arg().abs() < mu
        };
        if !inside {
            return Err(Error::Sector(format!("λ = {lambda} lies outside Σ_μ with μ = {mu}")));
        }
        Ok(Self { lambda, mu })
    }

    pub fn polar(r: f64, theta: f64, mu: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(r, theta), mu)
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Log-spaced radii in `[r_min, r_max]` crossed with equispaced angles in
    /// `[-theta_max, theta_max]`, inside the sector of half-angle
    /// `(theta_max + π)/2`.
    pub fn sweep(r_min: f64, r_max: f64, radii: usize, theta_max: f64, angles: usize) -> Result<Vec<Self>> {
        if radii == 0 || angles == 0 || !(r_min > 0.0 && r_max >= r_min) {
            return Err(Error::InvalidParameter("empty or invalid sector sweep".into()));
        }
        let mu = 0.5 * (theta_max + PI);
        let mut out = Vec::with_capacity(radii * angles);
        for i in 0..radii {
            let t = if radii == 1 { 0.0 } else { i as f64 / (radii - 1) as f64 };
            let r = r_min * (r_max / r_min).powf(t);
            for j in 0..angles {
                let theta = if angles == 1 {
                    0.0
                } else {
                    -theta_max + 2.0 * theta_max * j as f64 / (angles - 1) as f64
                };
                out.push(Self::polar(r, theta, mu)?);
            }
        }
        Ok(out)
    }
}

/// How a symbol treats the `ξ = 0` coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroModeRule {
    /// The symbol is finite at the origin.
    Finite,
    /// The origin coefficient is set to zero.
    MapToZero,
    /// The origin coefficient is set to zero and mean-carrying input is refused.
    RejectMean,
}

/// Named Fourier multipliers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Multiplier {
    /// `iξ∧`
    Exterior,
    /// `−iξ⌟`
    Interior,
    /// `iξ∧ − iξ⌟`
    Dirac,
    /// `−|ξ|²`
    Laplacian,
    /// `e^{−t|ξ|²}`
    Heat(f64),
    /// `(λ + |ξ|²)^{−1}`
    Resolvent(Complex64),
    /// `|ξ|^s`
    FracLaplacian(f64),
    /// `iξ_k/|ξ|` for a 1-based axis `k`
    Riesz(usize),
}

impl Multiplier {
    pub fn zero_mode_rule(&self) -> ZeroModeRule {
        match *self {
            Multiplier::Resolvent(l) if l == Complex64::new(0.0, 0.0) => ZeroModeRule::RejectMean,
            Multiplier::FracLaplacian(s) if s < 0.0 => ZeroModeRule::RejectMean,
            Multiplier::Riesz(_) => ZeroModeRule::MapToZero,
            _ => ZeroModeRule::Finite,
        }
    }

    /// Scalar symbol at `ξ`, or `None` for algebra-valued symbols.
    pub fn scalar_symbol(&self, xi: &[f64]) -> Option<Complex64> {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        let real = |v: f64| Some(Complex64::new(v, 0.0));
        match *self {
            Multiplier::Exterior | Multiplier::Interior | Multiplier::Dirac => None,
            Multiplier::Laplacian => real(-r2),
            Multiplier::Heat(t) => real((-t * r2).exp()),
            Multiplier::Resolvent(l) => {
                let den = l + r2;
                if r2 == 0.0 && l == Complex64::new(0.0, 0.0) {
                    real(0.0)
                } else {
                    Some(1.0 / den)
                }
            }
            Multiplier::FracLaplacian(s) => {
                if r2 == 0.0 {
                    real(if s == 0.0 { 1.0 } else { 0.0 })
                } else {
                    real(r2.powf(0.5 * s))
                }
            }
            Multiplier::Riesz(k) => {
                if r2 == 0.0 {
                    real(0.0)
                } else {
                    Some(I * xi[k - 1] / r2.sqrt())
                }
            }
        }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        match *self {
            Multiplier::Heat(t) if !(t >= 0.0 && t.is_finite()) => {
                Err(Error::InvalidParameter(format!("heat time must be >= 0, got {t}")))
            }
            Multiplier::Riesz(k) if k == 0 || k > grid.dim() => Err(Error::InvalidParameter(format!(
                "Riesz axis {k} outside 1..={}",
                grid.dim()
            ))),
            Multiplier::FracLaplacian(s) if !s.is_finite() => {
                Err(Error::InvalidParameter("fractional power must be finite".into()))
            }
            Multiplier::Resolvent(l) => {
                if l.im == 0.0 && l.re < 0.0 {
                    Err(Error::Sector(format!("λ = {l} lies on the spectrum of Δ")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Applies the multiplier to a spectrum.
    pub fn apply(&self, u: &SpectralField) -> Result<SpectralField> {
        let grid = *u.grid();
        self.validate(&grid)?;
        if self.zero_mode_rule() == ZeroModeRule::RejectMean {
            check_mean_free(u)?;
        }
        match self {
            Multiplier::Exterior => Ok(exterior_symbol(u)),
            Multiplier::Interior => Ok(interior_symbol(u)),
            Multiplier::Dirac => exterior_symbol(u).add(&interior_symbol(u)),
            _ => Ok(u.multiply(&self.table(&grid))),
        }
    }

    /// Scalar symbol tabulated on the lattice in FFT order.
    pub fn table(&self, grid: &Grid) -> Vec<Complex64> {
        let xi = xi_tables(grid);
        let n = grid.dim();
        (0..grid.len())
            .into_par_iter()
            .map(|flat| {
                let mut v = [0.0; 4];
                for a in 0..n {
                    v[a] = xi[a][flat];
                }
                self.scalar_symbol(&v[..n]).expect("scalar symbol")
            })
            .collect()
    }
}

/// `ξ_a` tables for every axis.
pub fn xi_tables(grid: &Grid) -> Vec<Vec<f64>> {
    (1..=grid.dim()).map(|a| grid.xi_axis(a)).collect()
}

/// `1/|ξ|²` with the origin mapped to zero.
pub fn inverse_xi_sq(grid: &Grid) -> Vec<f64> {
    grid.xi_sq()
        .into_iter()
        .map(|r| if r == 0.0 { 0.0 } else { 1.0 / r })
        .collect()
}

/// Refuses spectra whose zero mode carries more than the admissible `L²` mass.
pub fn check_mean_free(u: &SpectralField) -> Result<()> {
    let zero = u.zero_mode_norm();
    let total = u.norm_l2();
    if zero > ZERO_MODE_REL * total {
        return Err(Error::ZeroMode(format!(
            "input mean carries L² mass {zero:.3e} of {total:.3e}"
        )));
    }
    Ok(())
}

/// `ξ∧` on a spectrum, scaled by `factor`.
fn wedge_xi(u: &SpectralField, factor: Complex64) -> SpectralField {
    let grid = *u.grid();
    let n = grid.dim();
    let xi = xi_tables(&grid);
    let mut out = SpectralField::zeros(grid, u.mask().raised(n));
    for c in out.blades() {
        let terms: Vec<(usize, f64, &[Complex64])> = c
            .axes()
            .filter_map(|a| {
                let b = c.without_axis(a);
                u.component(b)
                    .map(|src| (a - 1, wedge_sign(Blade::axis(a), b) as f64, src))
            })
            .collect();
        let dst = out.component_mut(c).expect("present blade");
        dst.par_iter_mut().enumerate().for_each(|(p, v)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(a, s, src) in &terms {
                acc += src[p] * (s * xi[a][p]);
            }
            *v = acc * factor;
        });
    }
    out
}

/// `ξ⌟` on a spectrum (real `ξ`), scaled by `factor`.
fn contract_xi(u: &SpectralField, factor: Complex64) -> SpectralField {
    let grid = *u.grid();
    let n = grid.dim();
    let xi = xi_tables(&grid);
    let mut out = SpectralField::zeros(grid, u.mask().lowered());
    for k in out.blades() {
        let terms: Vec<(usize, f64, &[Complex64])> = (1..=n)
            .filter(|&a| !k.contains(a))
            .filter_map(|a| {
                u.component(k.with_axis(a))
                    .map(|src| (a - 1, wedge_sign(Blade::axis(a), k) as f64, src))
            })
            .collect();
        let dst = out.component_mut(k).expect("present blade");
        dst.par_iter_mut().enumerate().for_each(|(p, v)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(a, s, src) in &terms {
                acc += src[p] * (s * xi[a][p]);
            }
            *v = acc * factor;
        });
    }
    out
}

/// Symbol of `d`: `û ↦ iξ∧û`.
pub fn exterior_symbol(u: &SpectralField) -> SpectralField {
    wedge_xi(u, I)
}

/// Symbol of `δ`: `û ↦ −iξ⌟û`.
pub fn interior_symbol(u: &SpectralField) -> SpectralField {
    contract_xi(u, -I)
}

fn via_spectrum<F>(u: &FormField, op: F) -> Result<FormField>
where
    F: FnOnce(&SpectralField) -> Result<SpectralField>,
{
    Ok(op(&u.fft()?)?.ifft())
}

pub fn d(u: &FormField) -> Result<FormField> {
    via_spectrum(u, |s| Ok(exterior_symbol(s)))
}

pub fn delta(u: &FormField) -> Result<FormField> {
    via_spectrum(u, |s| Ok(interior_symbol(s)))
}

/// `D = d + δ`.
pub fn hodge_dirac(u: &FormField) -> Result<FormField> {
    via_spectrum(u, |s| Multiplier::Dirac.apply(s))
}

pub fn laplacian(u: &FormField) -> Result<FormField> {
    via_spectrum(u, |s| Multiplier::Laplacian.apply(s))
}

/// Solves `λu − Δu = f`.
pub fn resolvent(lambda: &SectorPoint, f: &FormField) -> Result<FormField> {
    via_spectrum(f, |s| Multiplier::Resolvent(lambda.lambda()).apply(s))
}

/// `e^{tΔ}u`.
pub fn heat(t: f64, u: &FormField) -> Result<FormField> {
    via_spectrum(u, |s| Multiplier::Heat(t).apply(s))
}

/// `(−Δ)^{s/2}u`.
pub fn frac_laplacian(s: f64, u: &FormField) -> Result<FormField> {
    via_spectrum(u, |sp| Multiplier::FracLaplacian(s).apply(sp))
}

/// Riesz transform `R_k`.
pub fn riesz(k: usize, u: &FormField) -> Result<FormField> {
    via_spectrum(u, |s| Multiplier::Riesz(k).apply(s))
}

/// Spectral whole-space Hodge splitting `û = P̂u + Ĝu` with
/// `Ĝu = ξ∧(ξ⌟û)/|ξ|²`.
pub fn leray_symbol(u: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    check_mean_free(u)?;
    let inv = inverse_xi_sq(u.grid());
    let g = wedge_xi(&contract_xi(u, Complex64::new(1.0, 0.0)), Complex64::new(1.0, 0.0))
        .multiply_real(&inv)
        .with_mask(u.mask());
    let p = u.sub(&g)?;
    Ok((p, g))
}

/// Spectral splitting `û = Q̂u + (I − Q̂)u` with `(I − Q̂)u = ξ⌟(ξ∧û)/|ξ|²`.
pub fn coleray_symbol(u: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    check_mean_free(u)?;
    let inv = inverse_xi_sq(u.grid());
    let r = contract_xi(&wedge_xi(u, Complex64::new(1.0, 0.0)), Complex64::new(1.0, 0.0))
        .multiply_real(&inv)
        .with_mask(u.mask());
    let q = u.sub(&r)?;
    Ok((q, r))
}

/// Whole-space Hodge decomposition `u = Pu + Gu`, `P = I − d(−Δ)^{−1}δ`.
pub fn leray_wholespace(u: &FormField) -> Result<(FormField, FormField)> {
    let (_, g) = leray_symbol(&u.fft()?)?;
    let g = g.ifft();
    let p = u.sub(&g)?;
    Ok((p, g))
}

/// Pointwise Hodge star `⋆e_I = sign(I, I^c) e_{I^c}`.
pub fn star(u: &FormField) -> FormField {
    let n = u.dim();
    let parts = u
        .components()
        .map(|(b, c)| {
            let s = wedge_sign(b, b.complement(n)) as f64;
            (b.complement(n), c.iter().map(|v| v * s).collect())
        })
        .collect();
    FormField::from_components(*u.grid(), parts).expect("complement blades are consistent")
}

/// Weighted Parseval norm `‖|ξ|^m û‖` of the represented field.
fn weighted_norm(u: &SpectralField, power: i32) -> f64 {
    let w: Vec<f64> = u.grid().xi_sq().into_iter().map(|r| r.powi(power)).collect();
    let sum: f64 = u
        .components()
        .map(|(_, c)| c.iter().zip(&w).map(|(v, wi)| v.norm_sqr() * wi).sum::<f64>())
        .sum();
    let g = u.grid();
    (sum * g.cell_volume() / g.len() as f64).sqrt()
}

/// `(Σ_k ‖∂_k u‖₂²)^{1/2}`.
pub fn gradient_norm(u: &SpectralField) -> f64 {
    weighted_norm(u, 1)
}

/// `(Σ_{j,k} ‖∂_j ∂_k u‖₂²)^{1/2}`.
pub fn hessian_norm(u: &SpectralField) -> f64 {
    weighted_norm(u, 2)
}

/// `(|λ|‖u‖₂ + |λ|^{1/2}‖∇u‖₂ + ‖∇²u‖₂)/‖f‖₂` for `u = (λ − Δ)^{−1} f`.
pub fn resolvent_ratio(lambda: &SectorPoint, f: &SpectralField) -> Result<f64> {
    let fnorm = f.norm_l2();
    if fnorm == 0.0 {
        return Err(Error::InvalidParameter("resolvent ratio of a zero field".into()));
    }
    let u = Multiplier::Resolvent(lambda.lambda()).apply(f)?;
    let r = lambda.lambda().norm();
    Ok((r * u.norm_l2() + r.sqrt() * gradient_norm(&u) + hessian_norm(&u)) / fnorm)
}
