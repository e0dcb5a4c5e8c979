//! Λ-valued fields on a periodic grid and their Fourier representation.

pub mod fft;
pub mod grid;
pub mod io;
pub mod synth;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Blade;
use crate::error::{Error, Result};
pub use grid::Grid;

/// Parallel sum of `f(0) + … + f(len − 1)` whose rounding does not depend on
/// the number of threads.
pub(crate) fn stable_sum<F>(len: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    const CHUNK: usize = 4096;
    let partial: Vec<Complex64> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|k| (k * CHUNK..((k + 1) * CHUNK).min(len)).map(&f).sum())
        .collect();
    partial.into_iter().sum()
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Set of degrees `k` whose `Λ^k` slices are present (bit `k`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DegreeMask(pub u8);

impl DegreeMask {
    pub const EMPTY: DegreeMask = DegreeMask(0);

    pub fn single(k: usize) -> Self {
        DegreeMask(1 << k)
    }

    pub fn full(n: usize) -> Self {
        DegreeMask(((1u16 << (n + 1)) - 1) as u8)
    }

    pub fn from_degrees(degrees: &[usize]) -> Self {
        DegreeMask(degrees.iter().fold(0u8, |m, &k| m | (1 << k)))
    }

    pub fn contains(self, k: usize) -> bool {
        k < 8 && self.0 & (1 << k) != 0
    }

    pub fn degrees(self) -> impl Iterator<Item = usize> {
        (0..8).filter(move |&k| self.contains(k))
    }

    pub fn union(self, other: Self) -> Self {
        DegreeMask(self.0 | other.0)
    }

    /// Degrees after a degree-raising operator in dimension `n`.
    pub fn raised(self, n: usize) -> Self {
        DegreeMask((self.0 << 1) & DegreeMask::full(n).0)
    }

    /// Degrees after a degree-lowering operator.
    pub fn lowered(self) -> Self {
        DegreeMask(self.0 >> 1)
    }

    /// Blades of all present degrees in increasing bitmask order.
    pub fn blades(self, n: usize) -> Vec<Blade> {
        Blade::all(n).filter(|b| self.contains(b.degree())).collect()
    }
}

type Components = Vec<Option<Vec<Complex64>>>;

fn empty_components(grid: &Grid, mask: DegreeMask) -> Components {
    Blade::all(grid.dim())
        .map(|b| mask.contains(b.degree()).then(|| vec![ZERO; grid.len()]))
        .collect()
}

fn mask_of(n: usize, data: &Components) -> Result<DegreeMask> {
    let mut mask = DegreeMask::EMPTY;
    for k in 0..=n {
        let present: Vec<bool> = Blade::of_degree(n, k).map(|b| data[b.index()].is_some()).collect();
        if present.iter().all(|&p| p) {
            mask = mask.union(DegreeMask::single(k));
        } else if present.iter().any(|&p| p) {
            return Err(Error::ShapeMismatch(format!("degree {k} is only partially present")));
        }
    }
    Ok(mask)
}

/// A `Λ`-valued complex field sampled on a [`Grid`].
///
/// Only the degrees listed in the mask carry storage; every blade of a
/// present degree has exactly `N^n` samples.
#[derive(Clone, Debug, PartialEq)]
pub struct FormField {
    grid: Grid,
    data: Components,
}

/// Fourier coefficients of a [`FormField`], indexed like the FFT output.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    data: Components,
}

macro_rules! component_api {
    ($ty:ident) => {
        impl $ty {
            pub fn zeros(grid: Grid, mask: DegreeMask) -> Self {
                Self {
                    grid,
                    data: empty_components(&grid, mask),
                }
            }

            /// Builds a field from `(blade, samples)` pairs; missing blades of a
            /// present degree are filled with zeros.
            pub fn from_components(grid: Grid, parts: Vec<(Blade, Vec<Complex64>)>) -> Result<Self> {
                let n = grid.dim();
                let mut mask = DegreeMask::EMPTY;
                for (b, _) in &parts {
                    if b.index() >= 1 << n {
                        return Err(Error::ShapeMismatch(format!("blade {b:?} outside Λ(R^{n})")));
                    }
                    mask = mask.union(DegreeMask::single(b.degree()));
                }
                let mut out = Self::zeros(grid, mask);
                for (b, samples) in parts {
                    if samples.len() != grid.len() {
                        return Err(Error::ShapeMismatch(format!(
                            "component {b:?} has {} samples, expected {}",
                            samples.len(),
                            grid.len()
                        )));
                    }
                    out.data[b.index()] = Some(samples);
                }
                Ok(out)
            }

            pub fn grid(&self) -> &Grid {
                &self.grid
            }

            pub fn dim(&self) -> usize {
                self.grid.dim()
            }

            pub fn mask(&self) -> DegreeMask {
                mask_of(self.grid.dim(), &self.data).expect("mask invariant")
            }

            /// Present blades in increasing bitmask order.
            pub fn blades(&self) -> Vec<Blade> {
                Blade::all(self.dim())
                    .filter(|b| self.data[b.index()].is_some())
                    .collect()
            }

            pub fn component(&self, blade: Blade) -> Option<&[Complex64]> {
                self.data.get(blade.index()).and_then(|c| c.as_deref())
            }

            pub fn component_mut(&mut self, blade: Blade) -> Option<&mut [Complex64]> {
                self.data.get_mut(blade.index()).and_then(|c| c.as_deref_mut())
            }

            pub fn components(&self) -> impl Iterator<Item = (Blade, &[Complex64])> {
                self.data
                    .iter()
                    .enumerate()
                    .filter_map(|(i, c)| c.as_deref().map(|s| (Blade(i as u16), s)))
            }

            /// Degree-`k` slice only.
            pub fn degree_part(&self, k: usize) -> Self {
                let data = self
                    .data
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        if Blade(i as u16).degree() == k {
                            c.clone()
                        } else {
                            None
                        }
                    })
                    .collect();
                Self {
                    grid: self.grid,
                    data,
                }
            }

            /// Widens the field to a larger degree mask (new slices are zero).
            pub fn with_mask(&self, mask: DegreeMask) -> Self {
                let mut out = Self::zeros(self.grid, self.mask().union(mask));
                for (b, c) in self.components() {
                    out.data[b.index()] = Some(c.to_vec());
                }
                out
            }

            fn check_same_grid(&self, other: &Self) -> Result<()> {
                if self.grid != other.grid {
                    return Err(Error::ShapeMismatch("fields live on different grids".into()));
                }
                Ok(())
            }

            /// `self + c·other`; the result carries the union of both masks.
            pub fn axpy(&self, c: Complex64, other: &Self) -> Result<Self> {
                self.check_same_grid(other)?;
                let mut out = self.with_mask(other.mask());
                for (b, o) in other.components() {
                    let dst = out.data[b.index()].as_mut().expect("mask union");
                    dst.par_iter_mut()
                        .zip(o.par_iter())
                        .for_each(|(d, s)| *d += c * s);
                }
                Ok(out)
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                self.axpy(Complex64::new(1.0, 0.0), other)
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.axpy(Complex64::new(-1.0, 0.0), other)
            }

            pub fn scale(&self, c: Complex64) -> Self {
                let data = self
                    .data
                    .iter()
                    .map(|comp| comp.as_ref().map(|v| v.iter().map(|x| x * c).collect()))
                    .collect();
                Self {
                    grid: self.grid,
                    data,
                }
            }

            /// Largest coefficient modulus over all components.
            pub fn max_abs(&self) -> f64 {
                self.data
                    .iter()
                    .flatten()
                    .flat_map(|c| c.iter())
                    .map(|x| x.norm())
                    .fold(0.0, f64::max)
            }

            /// Multiplies every component pointwise by a real table.
            pub fn multiply_real(&self, table: &[f64]) -> Self {
                let data = self
                    .data
                    .iter()
                    .map(|comp| {
                        comp.as_ref()
                            .map(|v| v.par_iter().zip(table.par_iter()).map(|(x, &m)| x * m).collect())
                    })
                    .collect();
                Self {
                    grid: self.grid,
                    data,
                }
            }

            /// Multiplies every component pointwise by a complex table.
            pub fn multiply(&self, table: &[Complex64]) -> Self {
                let data = self
                    .data
                    .iter()
                    .map(|comp| {
                        comp.as_ref()
                            .map(|v| v.par_iter().zip(table.par_iter()).map(|(x, m)| x * m).collect())
                    })
                    .collect();
                Self {
                    grid: self.grid,
                    data,
                }
            }
        }
    };
}

component_api!(FormField);
component_api!(SpectralField);

impl FormField {
    /// Samples `f(blade, x)` for every blade of the given degrees.
    pub fn from_fn<F>(grid: Grid, mask: DegreeMask, f: F) -> Self
    where
        F: Fn(Blade, &[f64]) -> Complex64 + Sync,
    {
        let n = grid.dim();
        let data = Blade::all(n)
            .map(|b| {
                mask.contains(b.degree()).then(|| {
                    (0..grid.len())
                        .into_par_iter()
                        .map(|flat| f(b, &grid.point(flat)[..n]))
                        .collect()
                })
            })
            .collect();
        Self { grid, data }
    }

    pub fn check_finite(&self) -> Result<()> {
        for (b, c) in self.components() {
            if let Some(index) = c.iter().position(|x| !x.re.is_finite() || !x.im.is_finite()) {
                return Err(Error::NonFinite {
                    component: b.index(),
                    index,
                });
            }
        }
        Ok(())
    }

    /// Unnormalized forward FFT of every component.
    pub fn fft(&self) -> Result<SpectralField> {
        self.check_finite()?;
        let grid = self.grid;
        let data = self
            .data
            .par_iter()
            .map(|c| c.as_ref().map(|v| fft::forward(&grid, v)))
            .collect();
        Ok(SpectralField { grid, data })
    }

    /// Pointwise modulus `|u(x)| = (Σ_I |u_I(x)|²)^{1/2}`.
    pub fn pointwise_norm(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.grid.len()];
        for (_, c) in self.components() {
            acc.par_iter_mut()
                .zip(c.par_iter())
                .for_each(|(a, x)| *a += x.norm_sqr());
        }
        acc.into_iter().map(f64::sqrt).collect()
    }

    /// Quadrature `L^p` norm `(Σ_x |u(x)|^p h^n)^{1/p}`; `p = ∞` is the max.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm_of(&self.pointwise_norm(), self.grid.cell_volume(), p)
    }

    pub fn norm_l2(&self) -> f64 {
        let sum: f64 = self
            .components()
            .map(|(_, c)| c.iter().map(|x| x.norm_sqr()).sum::<f64>())
            .sum();
        (sum * self.grid.cell_volume()).sqrt()
    }

    /// `∫ ⟨u, v⟩ dx`, conjugate-linear in `v`; absent slices count as zero.
    pub fn inner_l2(&self, other: &FormField) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let mut acc = ZERO;
        for (b, c) in self.components() {
            if let Some(o) = other.component(b) {
                acc += stable_sum(c.len(), |i| c[i] * o[i].conj());
            }
        }
        Ok(acc * self.grid.cell_volume())
    }

    pub fn mean(&self, blade: Blade) -> Option<Complex64> {
        self.component(blade)
            .map(|c| c.iter().sum::<Complex64>() / self.grid.len() as f64)
    }
}

impl SpectralField {
    /// Inverse FFT of every component (carries `1/N^n`).
    pub fn ifft(&self) -> FormField {
        let grid = self.grid;
        let data = self
            .data
            .par_iter()
            .map(|c| c.as_ref().map(|v| fft::inverse(&grid, v)))
            .collect();
        FormField { grid, data }
    }

    /// `L²` norm of the represented field via discrete Parseval.
    pub fn norm_l2(&self) -> f64 {
        let sum: f64 = self
            .components()
            .map(|(_, c)| c.iter().map(|x| x.norm_sqr()).sum::<f64>())
            .sum();
        (sum * self.grid.cell_volume() / self.grid.len() as f64).sqrt()
    }

    /// `L²` inner product of the represented fields via Parseval.
    pub fn inner_l2(&self, other: &SpectralField) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let mut acc = ZERO;
        for (b, c) in self.components() {
            if let Some(o) = other.component(b) {
                acc += stable_sum(c.len(), |i| c[i] * o[i].conj());
            }
        }
        Ok(acc * self.grid.cell_volume() / self.grid.len() as f64)
    }

    /// `L²` mass of the zero-frequency coefficients.
    pub fn zero_mode_norm(&self) -> f64 {
        let sum: f64 = self.components().map(|(_, c)| c[0].norm_sqr()).sum();
        (sum * self.grid.cell_volume() / self.grid.len() as f64).sqrt()
    }

    pub fn coefficient(&self, blade: Blade, flat: usize) -> Option<Complex64> {
        self.component(blade).map(|c| c[flat])
    }
}

pub(crate) fn lp_norm_of(pointwise: &[f64], cell_volume: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("L^p norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(pointwise.iter().copied().fold(0.0, f64::max));
    }
    if p == 2.0 {
        return Ok((pointwise.iter().map(|x| x * x).sum::<f64>() * cell_volume).sqrt());
    }
    let sum: f64 = pointwise.iter().map(|x| x.powf(p)).sum();
    Ok((sum * cell_volume).powf(1.0 / p))
}
