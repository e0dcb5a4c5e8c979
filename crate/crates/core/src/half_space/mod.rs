//! Half-space fields `{x_n >= 0}` and reflection extensions.

pub mod boundary;
pub mod operators;
pub mod quadrature;
pub mod traces;

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Blade;
use crate::error::{Error, Result};
use crate::field::io::FieldRecord;
use crate::field::{stable_sum, DegreeMask, FormField, Grid, SpectralField};

pub use boundary::{fornberg_weights, hodge_bc_residual, navier_slip_residual, BoundaryResidual};
pub use operators::{
    d_half, delta_half, hodge_heat, hodge_resolvent, hodge_stokes_apply, leray_halfspace, q_projector,
};
pub use traces::{normal_trace, tangential_trace, BoundaryForm};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Reflection rule across `x_n = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryFlavor {
    /// Odd extension of every component.
    D,
    /// Even extension of every component.
    N,
    /// Odd on components containing `dx_n`, even otherwise.
    Ht,
    /// Even on components containing `dx_n`, odd otherwise.
    Hn,
}

impl BoundaryFlavor {
    /// Whether the component `blade` is extended oddly in dimension `n`.
    pub fn is_odd(self, blade: Blade, n: usize) -> bool {
        match self {
            BoundaryFlavor::D => true,
            BoundaryFlavor::N => false,
            BoundaryFlavor::Ht => blade.contains(n),
            BoundaryFlavor::Hn => !blade.contains(n),
        }
    }

    pub fn sign(self, blade: Blade, n: usize) -> f64 {
        if self.is_odd(blade, n) {
            -1.0
        } else {
            1.0
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            BoundaryFlavor::D => 1,
            BoundaryFlavor::N => 2,
            BoundaryFlavor::Ht => 3,
            BoundaryFlavor::Hn => 4,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(BoundaryFlavor::D),
            2 => Some(BoundaryFlavor::N),
            3 => Some(BoundaryFlavor::Ht),
            4 => Some(BoundaryFlavor::Hn),
            _ => None,
        }
    }
}

impl std::fmt::Display for BoundaryFlavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BoundaryFlavor::D => "D",
            BoundaryFlavor::N => "N",
            BoundaryFlavor::Ht => "Ht",
            BoundaryFlavor::Hn => "Hn",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for BoundaryFlavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D" => Ok(BoundaryFlavor::D),
            "N" => Ok(BoundaryFlavor::N),
            "Ht" => Ok(BoundaryFlavor::Ht),
            "Hn" => Ok(BoundaryFlavor::Hn),
            other => Err(Error::Flavor(format!("unknown flavor {other:?}"))),
        }
    }
}

/// A form field on the rows `x_n = r h`, `0 <= r <= N/2`, of a symmetric grid.
///
/// The flavor is optional: unflavored fields can be traced and integrated
/// but not extended.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfField {
    grid: Grid,
    flavor: Option<BoundaryFlavor>,
    data: Vec<Option<Vec<Complex64>>>,
}

impl HalfField {
    /// Rows along `x_n`, `N/2 + 1`.
    pub fn rows_for(grid: &Grid) -> usize {
        grid.points() / 2 + 1
    }

    /// Number of tangential points, `N^{n-1}`.
    pub fn outer_for(grid: &Grid) -> usize {
        grid.points().pow(grid.dim() as u32 - 1)
    }

    fn check_grid(grid: &Grid) -> Result<()> {
        if grid.dim() < 2 {
            return Err(Error::InvalidGrid("half-space fields need n >= 2".into()));
        }
        Ok(())
    }

    pub fn zeros(grid: Grid, flavor: Option<BoundaryFlavor>, mask: DegreeMask) -> Result<Self> {
        Self::check_grid(&grid)?;
        let len = Self::outer_for(&grid) * Self::rows_for(&grid);
        let data = Blade::all(grid.dim())
            .map(|b| mask.contains(b.degree()).then(|| vec![ZERO; len]))
            .collect();
        Ok(Self { grid, flavor, data })
    }

    /// Samples `f(blade, x)` on the half grid. Components that the flavor
    /// extends oddly get exact zeros on the rows `x_n = 0` and `x_n = L`.
    pub fn from_fn<F>(grid: Grid, flavor: Option<BoundaryFlavor>, mask: DegreeMask, f: F) -> Result<Self>
    where
        F: Fn(Blade, &[f64]) -> Complex64 + Sync,
    {
        let mut out = Self::zeros(grid, flavor, mask)?;
        let n = grid.dim();
        let rows = Self::rows_for(&grid);
        let h = grid.spacing();
        let bgrid = grid.boundary()?;
        for b in out.blades() {
            let comp = out.data[b.index()].as_mut().expect("present");
            comp.par_chunks_mut(rows).enumerate().for_each(|(outer, line)| {
                let mut x = bgrid.point(outer);
                for (r, v) in line.iter_mut().enumerate() {
                    x[n - 1] = r as f64 * h;
                    *v = f(b, &x[..n]);
                }
            });
        }
        out.enforce_parity();
        Ok(out)
    }

    /// Builds from `(blade, samples)` pairs in half-grid layout.
    pub fn from_components(
        grid: Grid,
        flavor: Option<BoundaryFlavor>,
        parts: Vec<(Blade, Vec<Complex64>)>,
    ) -> Result<Self> {
        let mask = parts
            .iter()
            .fold(DegreeMask::EMPTY, |m, (b, _)| m.union(DegreeMask::single(b.degree())));
        let mut out = Self::zeros(grid, flavor, mask)?;
        let len = out.len();
        for (b, c) in parts {
            if c.len() != len || b.index() >= 1 << grid.dim() {
                return Err(Error::ShapeMismatch(format!(
                    "component {b:?} does not fit the half grid"
                )));
            }
            out.data[b.index()] = Some(c);
        }
        Ok(out)
    }

    fn enforce_parity(&mut self) {
        let Some(flavor) = self.flavor else { return };
        let n = self.grid.dim();
        let rows = self.rows();
        for (i, comp) in self.data.iter_mut().enumerate() {
            if let Some(c) = comp {
                if flavor.is_odd(Blade(i as u16), n) {
                    c.par_chunks_mut(rows).for_each(|line| {
                        line[0] = ZERO;
                        line[rows - 1] = ZERO;
                    });
                }
            }
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn flavor(&self) -> Option<BoundaryFlavor> {
        self.flavor
    }

    /// Same samples under a different flavor label (parity is re-enforced).
    pub fn with_flavor(&self, flavor: Option<BoundaryFlavor>) -> Self {
        let mut out = Self { flavor, ..self.clone() };
        out.enforce_parity();
        out
    }

    pub fn rows(&self) -> usize {
        Self::rows_for(&self.grid)
    }

    pub fn outer(&self) -> usize {
        Self::outer_for(&self.grid)
    }

    pub fn len(&self) -> usize {
        self.rows() * self.outer()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mask(&self) -> DegreeMask {
        self.blades()
            .iter()
            .fold(DegreeMask::EMPTY, |m, b| m.union(DegreeMask::single(b.degree())))
    }

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

    /// Coordinates of a half-grid flat index.
    pub fn point(&self, flat: usize) -> [f64; 4] {
        let n = self.dim();
        let rows = self.rows();
        let bgrid = self.grid.boundary().expect("n >= 2");
        let mut x = bgrid.point(flat / rows);
        x[n - 1] = (flat % rows) as f64 * self.grid.spacing();
        x
    }

    /// Values of one component on the boundary row `x_n = 0`.
    pub fn boundary_row(&self, blade: Blade) -> Option<Vec<Complex64>> {
        self.component(blade)
            .map(|c| c.iter().step_by(self.rows()).copied().collect())
    }

    /// Values of one component on row `r`.
    pub fn row(&self, blade: Blade, r: usize) -> Option<Vec<Complex64>> {
        self.component(blade)
            .map(|c| c.iter().skip(r).step_by(self.rows()).copied().collect())
    }

    fn combine(&self, other: &Self, c: Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("half fields live on different grids".into()));
        }
        let flavor = if self.flavor == other.flavor { self.flavor } else { None };
        let mut out = Self::zeros(self.grid, flavor, self.mask().union(other.mask()))?;
        for (b, s) in self.components() {
            out.data[b.index()] = Some(s.to_vec());
        }
        for (b, o) in other.components() {
            let dst = out.data[b.index()].as_mut().expect("mask union");
            dst.par_iter_mut().zip(o.par_iter()).for_each(|(d, v)| *d += c * v);
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    pub fn axpy(&self, c: Complex64, other: &Self) -> Result<Self> {
        self.combine(other, c)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let data = self
            .data
            .iter()
            .map(|comp| comp.as_ref().map(|v| v.iter().map(|x| x * c).collect()))
            .collect();
        Self {
            grid: self.grid,
            flavor: self.flavor,
            data,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components()
            .flat_map(|(_, c)| c.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Trapezoid weight of row `r` (half weight on both end rows).
    pub fn row_weight(&self, r: usize) -> f64 {
        if r == 0 || r == self.rows() - 1 {
            0.5
        } else {
            1.0
        }
    }

    /// `∫_{R^n_+} ⟨u, v⟩` by the trapezoid rule in `x_n`; exact up to
    /// spectral accuracy when the integrand extends evenly.
    pub fn inner_l2(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("half fields live on different grids".into()));
        }
        let rows = self.rows();
        let w: Vec<f64> = (0..rows).map(|r| self.row_weight(r)).collect();
        let mut acc = ZERO;
        for (b, c) in self.components() {
            if let Some(o) = other.component(b) {
                acc += stable_sum(c.len(), |i| c[i] * o[i].conj() * w[i % rows]);
            }
        }
        Ok(acc * self.grid.cell_volume())
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner_l2(self).map(|v| v.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    pub(crate) fn flavor_or(&self, fallback: Option<BoundaryFlavor>) -> Result<BoundaryFlavor> {
        match (self.flavor, fallback) {
            (Some(a), Some(b)) if a != b => {
                Err(Error::Flavor(format!("field carries flavor {a} but {b} was requested")))
            }
            (Some(a), _) => Ok(a),
            (None, Some(b)) => Ok(b),
            (None, None) => Err(Error::Flavor("field has no boundary flavor".into())),
        }
    }
}

/// Full-grid row index of half-grid row `r`, with the mirrored row.
fn row_map(points: usize, j: usize) -> (usize, bool) {
    let half = points / 2;
    if j >= half {
        (j - half, false)
    } else {
        (half - j, true)
    }
}

/// `E u`: reflects every component across `x_n = 0` according to the flavor.
pub fn extend(u: &HalfField) -> Result<FormField> {
    let flavor = u.flavor_or(None)?;
    extend_as(u, flavor)
}

/// Extension with an explicit flavor (must agree with the field's own).
pub fn extend_as(u: &HalfField, flavor: BoundaryFlavor) -> Result<FormField> {
    let flavor = u.flavor_or(Some(flavor))?;
    let grid = *u.grid();
    let n = grid.dim();
    let points = grid.points();
    let rows = u.rows();
    let parts = u
        .components()
        .map(|(b, c)| {
            let s = flavor.sign(b, n);
            let mut full = vec![ZERO; grid.len()];
            full.par_chunks_mut(points)
                .zip(c.par_chunks(rows))
                .for_each(|(dst, src)| {
                    for (j, v) in dst.iter_mut().enumerate() {
                        let (r, mirrored) = row_map(points, j);
                        *v = if mirrored { src[r] * s } else { src[r] };
                    }
                });
            (b, full)
        })
        .collect();
    FormField::from_components(grid, parts)
}

/// Restriction of a full-grid field to `x_n >= 0`; components the flavor
/// extends oddly get exact zeros on the rows `x_n = 0` and `x_n = L`.
pub fn restrict(u: &FormField, flavor: Option<BoundaryFlavor>) -> Result<HalfField> {
    let grid = *u.grid();
    let n = grid.dim();
    let points = grid.points();
    let half = points / 2;
    let mut out = HalfField::zeros(grid, flavor, u.mask())?;
    let rows = out.rows();
    for (b, c) in u.components() {
        let s = flavor.map_or(1.0, |f| f.sign(b, n));
        let dst = out.component_mut(b).expect("same mask");
        dst.par_chunks_mut(rows).zip(c.par_chunks(points)).for_each(|(d, src)| {
            for (r, v) in d.iter_mut().enumerate() {
                *v = if r < half { src[half + r] } else { src[0] * s };
            }
        });
    }
    out.enforce_parity();
    Ok(out)
}

/// Restriction of `(u + σ R u) / 2`, where `R` reflects `x_n ↦ −x_n` and
/// `σ` is the flavor sign of each component. The extension of the result is
/// exactly that average, so band limits and mean-freeness of `u` survive.
pub fn symmetrize(u: &FormField, flavor: BoundaryFlavor) -> Result<HalfField> {
    let grid = *u.grid();
    let n = grid.dim();
    let points = grid.points();
    let parts = u
        .components()
        .map(|(b, c)| {
            let s = flavor.sign(b, n);
            let mut sym = vec![ZERO; grid.len()];
            sym.par_chunks_mut(points)
                .zip(c.par_chunks(points))
                .for_each(|(dst, src)| {
                    for (j, v) in dst.iter_mut().enumerate() {
                        *v = (src[j] + src[(points - j) % points] * s) * 0.5;
                    }
                });
            (b, sym)
        })
        .collect();
    restrict(&FormField::from_components(grid, parts)?, Some(flavor))
}

/// Spectrum of the extension.
pub fn extend_spectrum(u: &HalfField) -> Result<SpectralField> {
    extend(u)?.fft()
}

/// Restriction of the field represented by a spectrum.
pub fn restrict_spectrum(s: &SpectralField, flavor: BoundaryFlavor) -> Result<HalfField> {
    restrict(&s.ifft(), Some(flavor))
}

impl HalfField {
    pub fn to_record(&self) -> FieldRecord {
        FieldRecord {
            grid: self.grid,
            mask: self.mask(),
            flavor_tag: self.flavor.map_or(0, BoundaryFlavor::tag),
            rows: self.rows(),
            components: self.components().map(|(b, c)| (b, c.to_vec())).collect(),
        }
    }

    /// Tag 0 with half-grid rows is a half-space field without a flavor.
    pub fn from_record(record: FieldRecord) -> Result<Self> {
        if record.rows != Self::rows_for(&record.grid) {
            return Err(Error::Format("container does not hold half-space data".into()));
        }
        let flavor = match record.flavor_tag {
            0 => None,
            t => Some(BoundaryFlavor::from_tag(t).ok_or_else(|| Error::Format(format!("unknown flavor tag {t}")))?),
        };
        Self::from_components(record.grid, flavor, record.components)
    }

    pub fn save(&self, path: &Path, metadata: BTreeMap<String, serde_json::Value>) -> Result<()> {
        self.to_record().save(path, metadata)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_record(FieldRecord::load(path)?)
    }
}
