//! Littlewood–Paley filters and Besov/Sobolev norms.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FormField, Grid, SpectralField};
use crate::tolerances::BANK_LEAKAGE;

/// `C^∞` step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let g = |x: f64| (-1.0 / x).exp();
    let a = g(t);
    a / (a + g(1.0 - t))
}

pub const PHI_INNER: f64 = 0.75;
pub const PHI_OUTER: f64 = 4.0 / 3.0;

/// Radial cutoff profile for the base function `φ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `exp(−1/t)` mollifier transition between `3/4` and `4/3`.
    #[default]
    Mollifier,
}

impl Profile {
    pub fn phi(&self, r: f64) -> f64 {
        match self {
            Profile::Mollifier => smooth_step((PHI_OUTER - r) / (PHI_OUTER - PHI_INNER)),
        }
    }

    /// `ψ_j(r) = φ(2^{−j−1} r) − φ(2^{−j} r)`.
    pub fn psi(&self, j: i32, r: f64) -> f64 {
        self.phi(r * 2f64.powi(-j - 1)) - self.phi(r * 2f64.powi(-j))
    }
}

/// Tabulated filters `ψ_j`, `j_min <= j <= j_max`, on one grid.
#[derive(Clone, Debug)]
pub struct FilterBank {
    grid: Grid,
    j_min: i32,
    j_max: i32,
    profile: Profile,
    psi: Vec<Vec<f64>>,
    cover: Vec<f64>,
}

/// Largest window satisfying the resolution constraints of `grid`.
pub fn default_window(grid: &Grid) -> (i32, i32) {
    let j_min = grid.frequency_step().log2().ceil() as i32;
    let j_max = grid.max_frequency().log2().floor() as i32;
    (j_min, j_max)
}

pub fn build_bank(grid: &Grid, j_min: i32, j_max: i32, profile: Profile) -> Result<FilterBank> {
    if j_min > j_max {
        return Err(Error::FilterBank(format!("empty window [{j_min}, {j_max}]")));
    }
    if 2f64.powi(j_max) > grid.max_frequency() {
        return Err(Error::FilterBank(format!(
            "2^{j_max} exceeds the largest lattice frequency {:.4}",
            grid.max_frequency()
        )));
    }
    if 2f64.powi(j_min) < grid.frequency_step() {
        return Err(Error::FilterBank(format!(
            "2^{j_min} is below the lattice spacing {:.4}",
            grid.frequency_step()
        )));
    }
    let r = grid.xi_norm();
    let psi: Vec<Vec<f64>> = (j_min..=j_max)
        .into_par_iter()
        .map(|j| r.iter().map(|&x| profile.psi(j, x)).collect())
        .collect();
    let cover = r
        .iter()
        .map(|&x| profile.phi(x * 2f64.powi(-j_max - 1)) - profile.phi(x * 2f64.powi(-j_min)))
        .collect();
    Ok(FilterBank {
        grid: *grid,
        j_min,
        j_max,
        profile,
        psi,
        cover,
    })
}

impl FilterBank {
    pub fn with_default_window(grid: &Grid) -> Result<Self> {
        let (a, b) = default_window(grid);
        build_bank(grid, a, b, Profile::Mollifier)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn window(&self) -> (i32, i32) {
        (self.j_min, self.j_max)
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    /// `ψ_j` on the lattice.
    pub fn psi(&self, j: i32) -> Result<&[f64]> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::FilterBank(format!(
                "block {j} outside window [{}, {}]",
                self.j_min, self.j_max
            )));
        }
        Ok(&self.psi[(j - self.j_min) as usize])
    }

    /// `Σ_j ψ_j` on the lattice.
    pub fn cover(&self) -> &[f64] {
        &self.cover
    }

    /// Low-pass remainder `φ(2^{−j_min} ξ)`.
    pub fn low_pass(&self) -> Vec<f64> {
        self.grid
            .xi_norm()
            .into_iter()
            .map(|r| self.profile.phi(r * 2f64.powi(-self.j_min)))
            .collect()
    }

    /// Radial interval on which the window sums to one.
    pub fn resolved_band(&self) -> (f64, f64) {
        (
            PHI_OUTER * 2f64.powi(self.j_min),
            2.0 * PHI_INNER * 2f64.powi(self.j_max),
        )
    }

    fn check_grid(&self, u: &SpectralField) -> Result<()> {
        if *u.grid() != self.grid {
            return Err(Error::ShapeMismatch("field and filter bank grids differ".into()));
        }
        Ok(())
    }

    /// Relative spectral mass the window misses, `Σ(1 − cover)|û|² / Σ|û|²`.
    pub fn leakage(&self, u: &SpectralField) -> Result<f64> {
        self.check_grid(u)?;
        let mut missed = 0.0;
        let mut total = 0.0;
        for (_, c) in u.components() {
            for (v, w) in c.iter().zip(&self.cover) {
                let m = v.norm_sqr();
                total += m;
                missed += (1.0 - w) * m;
            }
        }
        Ok(if total == 0.0 { 0.0 } else { missed / total })
    }

    /// Refuses spectra whose leakage exceeds the admissible mass.
    pub fn check_leakage(&self, u: &SpectralField) -> Result<()> {
        let mass = self.leakage(u)?;
        if mass > BANK_LEAKAGE {
            return Err(Error::SpectralLeakage {
                mass,
                limit: BANK_LEAKAGE,
            });
        }
        Ok(())
    }
}

/// `Δ̇_j u` on the spectral side.
pub fn dyadic_block_spectrum(bank: &FilterBank, j: i32, u: &SpectralField) -> Result<SpectralField> {
    bank.check_grid(u)?;
    Ok(u.multiply_real(bank.psi(j)?))
}

/// `Δ̇_j u = F^{−1} ψ_j F u`.
pub fn dyadic_block(bank: &FilterBank, j: i32, u: &FormField) -> Result<FormField> {
    Ok(dyadic_block_spectrum(bank, j, &u.fft()?)?.ifft())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Besov,
    Sobolev,
}

/// `(s, p, q)` together with the norm family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub homogeneous: bool,
    pub kind: NormKind,
}

impl SpaceParams {
    pub fn besov(s: f64, p: f64, q: f64) -> Self {
        Self {
            s,
            p,
            q,
            homogeneous: true,
            kind: NormKind::Besov,
        }
    }

    pub fn sobolev(s: f64, p: f64) -> Self {
        Self {
            s,
            p,
            q: 2.0,
            homogeneous: true,
            kind: NormKind::Sobolev,
        }
    }

    pub fn inhomogeneous(self) -> Self {
        Self {
            homogeneous: false,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::InvalidParameter(format!("s must be finite, got {}", self.s)));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p must lie in (1, ∞), got {}", self.p)));
        }
        if self.kind == NormKind::Besov && !(self.q >= 1.0) {
            return Err(Error::InvalidParameter(format!("q must lie in [1, ∞], got {}", self.q)));
        }
        Ok(())
    }
}

/// `(C_{s,p,q})`: `s < n/p`, or `q = 1` and `s <= n/p`.
pub fn completeness_ok(params: &SpaceParams, n: usize) -> bool {
    let critical = n as f64 / params.p;
    match params.kind {
        NormKind::Besov => params.s < critical || (params.q == 1.0 && params.s <= critical),
        NormKind::Sobolev => params.s < critical,
    }
}

/// `ℓ^q` norm of a finite sequence, `q = ∞` allowed.
pub fn lq_norm(values: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        values.iter().copied().fold(0.0, f64::max)
    } else if q == 1.0 {
        values.iter().sum()
    } else {
        values.iter().map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `L^p` norm of the field represented by a (filtered) spectrum.
pub fn spectral_lp_norm(u: &SpectralField, p: f64) -> Result<f64> {
    if p == 2.0 {
        return Ok(u.norm_l2());
    }
    u.ifft().lp_norm(p)
}

/// `2^{js}‖Δ_j u‖_{L^p}` for every block of the norm.
pub fn besov_blocks(params: &SpaceParams, bank: &FilterBank, u: &SpectralField) -> Result<Vec<(i32, f64)>> {
    params.validate()?;
    bank.check_grid(u)?;
    let (j_min, j_max) = bank.window();
    let mut filters: Vec<(i32, Vec<f64>)> = Vec::new();
    if params.homogeneous {
        bank.check_leakage(u)?;
        for j in j_min..=j_max {
            filters.push((j, bank.psi(j)?.to_vec()));
        }
    } else {
        let r = bank.grid.xi_norm();
        let missed: f64 = u
            .components()
            .map(|(_, c)| {
                c.iter()
                    .zip(&r)
                    .map(|(v, &x)| (1.0 - bank.profile.phi(x * 2f64.powi(-j_max - 1))) * v.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        let total: f64 = u
            .components()
            .map(|(_, c)| c.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum();
        if total > 0.0 && missed / total > BANK_LEAKAGE {
            return Err(Error::SpectralLeakage {
                mass: missed / total,
                limit: BANK_LEAKAGE,
            });
        }
        filters.push((-1, r.iter().map(|&x| bank.profile.phi(x)).collect()));
        for j in 0..=j_max {
            filters.push((j, r.iter().map(|&x| bank.profile.psi(j, x)).collect()));
        }
    }
    filters
        .into_par_iter()
        .map(|(j, w)| {
            let norm = spectral_lp_norm(&u.multiply_real(&w), params.p)?;
            Ok((j, 2f64.powf(j as f64 * params.s) * norm))
        })
        .collect()
}

/// `‖(2^{js}‖Δ_j u‖_{L^p})_j‖_{ℓ^q}` from a spectrum.
pub fn besov_norm_spectral(params: &SpaceParams, bank: &FilterBank, u: &SpectralField) -> Result<f64> {
    let blocks: Vec<f64> = besov_blocks(params, bank, u)?.into_iter().map(|(_, v)| v).collect();
    Ok(lq_norm(&blocks, params.q))
}

pub fn besov_norm(params: &SpaceParams, bank: &FilterBank, u: &FormField) -> Result<f64> {
    besov_norm_spectral(params, bank, &u.fft()?)
}

/// `‖(−Δ)^{s/2} Σ_j Δ̇_j u‖_{L^p}` (homogeneous) or `‖(I − Δ)^{s/2} u‖_{L^p}`.
pub fn sobolev_norm_spectral(params: &SpaceParams, bank: &FilterBank, u: &SpectralField) -> Result<f64> {
    params.validate()?;
    bank.check_grid(u)?;
    let r2 = bank.grid.xi_sq();
    let weight: Vec<f64> = if params.homogeneous {
        bank.check_leakage(u)?;
        r2.iter()
            .zip(bank.cover())
            .map(|(&x, &c)| if x == 0.0 { 0.0 } else { c * x.powf(0.5 * params.s) })
            .collect()
    } else {
        r2.iter().map(|&x| (1.0 + x).powf(0.5 * params.s)).collect()
    };
    spectral_lp_norm(&u.multiply_real(&weight), params.p)
}

pub fn sobolev_norm(params: &SpaceParams, bank: &FilterBank, u: &FormField) -> Result<f64> {
    sobolev_norm_spectral(params, bank, &u.fft()?)
}

/// Dispatches on `params.kind`.
pub fn space_norm_spectral(params: &SpaceParams, bank: &FilterBank, u: &SpectralField) -> Result<f64> {
    match params.kind {
        NormKind::Besov => besov_norm_spectral(params, bank, u),
        NormKind::Sobolev => sobolev_norm_spectral(params, bank, u),
    }
}

/// Sum of all blocks plus the low-pass remainder, for resynthesis checks.
pub fn resynthesize(bank: &FilterBank, u: &SpectralField) -> Result<SpectralField> {
    let mut acc = u.multiply_real(&bank.low_pass());
    let (a, b) = bank.window();
    for j in a..=b {
        acc = acc.add(&dyadic_block_spectrum(bank, j, u)?)?;
    }
    let tail: Vec<f64> = bank
        .grid
        .xi_norm()
        .into_iter()
        .map(|r| 1.0 - bank.profile.phi(r * 2f64.powi(-b - 1)))
        .collect();
    acc.add(&u.multiply_real(&tail))
}

/// Fraction of `L²` mass carried by a complex spectrum, for diagnostics.
pub fn spectral_energy(u: &SpectralField) -> f64 {
    u.components()
        .map(|(_, c)| c.iter().map(Complex64::norm_sqr).sum::<f64>())
        .sum()
}
