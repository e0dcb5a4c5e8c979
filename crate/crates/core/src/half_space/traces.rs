//! Tangential and normal traces on `∂R^n_+ = {x_n = 0}`.

use num_complex::Complex64;

use super::HalfField;
use crate::algebra::{wedge_sign, Blade};
use crate::error::{Error, Result};
use crate::field::Grid;

/// A form on the boundary grid. Components keep their `R^n` blade labels, so
/// a normal trace carries blades containing `dx_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryForm {
    grid: Grid,
    ambient: usize,
    data: Vec<Option<Vec<Complex64>>>,
}

impl BoundaryForm {
    pub fn zeros(ambient_grid: &Grid) -> Result<Self> {
        let grid = ambient_grid.boundary()?;
        Ok(Self {
            grid,
            ambient: ambient_grid.dim(),
            data: vec![None; 1 << ambient_grid.dim()],
        })
    }

    /// Boundary grid (dimension `n - 1`).
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn component(&self, blade: Blade) -> Option<&[Complex64]> {
        self.data.get(blade.index()).and_then(|c| c.as_deref())
    }

    pub fn components(&self) -> impl Iterator<Item = (Blade, &[Complex64])> {
        self.data
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_deref().map(|s| (Blade(i as u16), s)))
    }

    pub fn set(&mut self, blade: Blade, values: Vec<Complex64>) -> Result<()> {
        if values.len() != self.grid.len() || blade.index() >= self.data.len() {
            return Err(Error::ShapeMismatch(format!(
                "boundary component {blade:?} has wrong shape"
            )));
        }
        self.data[blade.index()] = Some(values);
        Ok(())
    }

    /// All components of `u` on the boundary row.
    pub fn from_boundary_values(u: &HalfField) -> Result<Self> {
        let mut out = Self::zeros(u.grid())?;
        for b in u.blades() {
            out.set(b, u.boundary_row(b).expect("present"))?;
        }
        Ok(out)
    }

    /// `∫_{∂R^n_+} ⟨a, b⟩ dx'`, absent components counting as zero.
    pub fn inner_l2(&self, other: &BoundaryForm) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("boundary grids differ".into()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, c) in self.components() {
            if let Some(o) = other.component(b) {
                acc += c.iter().zip(o).map(|(x, y)| x * y.conj()).sum::<Complex64>();
            }
        }
        Ok(acc * self.grid.cell_volume())
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner_l2(self).map(|v| v.re.max(0.0).sqrt()).unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.components()
            .flat_map(|(_, c)| c.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// `ν⌟u|_∂` with `ν = −e_n`: `(ν⌟u)_K = −sign(n, K) u_{K∪n}(·, 0)`.
pub fn tangential_trace(u: &HalfField) -> Result<BoundaryForm> {
    let n = u.dim();
    let mut out = BoundaryForm::zeros(u.grid())?;
    for b in u.blades().into_iter().filter(|b| b.contains(n)) {
        let k = b.without_axis(n);
        let s = -wedge_sign(Blade::axis(n), k) as f64;
        let row = u.boundary_row(b).expect("present");
        out.set(k, row.into_iter().map(|v| v * s).collect())?;
    }
    fill_degree(&mut out, u, |d| d.checked_sub(1))?;
    Ok(out)
}

/// `ν∧u|_∂` with `ν = −e_n`: `(ν∧u)_{B∪n} = −sign(n, B) u_B(·, 0)`.
pub fn normal_trace(u: &HalfField) -> Result<BoundaryForm> {
    let n = u.dim();
    let mut out = BoundaryForm::zeros(u.grid())?;
    for b in u.blades().into_iter().filter(|b| !b.contains(n)) {
        let s = -wedge_sign(Blade::axis(n), b) as f64;
        let row = u.boundary_row(b).expect("present");
        out.set(b.with_axis(n), row.into_iter().map(|v| v * s).collect())?;
    }
    fill_degree(&mut out, u, |d| (d < n).then_some(d + 1))?;
    Ok(out)
}

/// Adds explicit zero components so every blade of the target degrees is present.
fn fill_degree<F>(out: &mut BoundaryForm, u: &HalfField, target: F) -> Result<()>
where
    F: Fn(usize) -> Option<usize>,
{
    let n = u.dim();
    let zeros = vec![Complex64::new(0.0, 0.0); out.grid.len()];
    for k in u.mask().degrees().filter_map(&target) {
        let wanted: Vec<Blade> = Blade::of_degree(n, k).collect();
        for b in wanted {
            if out.component(b).is_none() {
                out.set(b, zeros.clone())?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DegreeMask;

    #[test]
    fn one_form_tangential_trace_is_normal_component() {
        let g = Grid::new(2, 8, 2.0).unwrap();
        let u = HalfField::from_fn(g, None, DegreeMask::single(1), |b, x| {
            Complex64::new(if b == Blade::axis(2) { 1.0 + x[0] } else { 5.0 }, 0.0)
        })
        .unwrap();
        let t = tangential_trace(&u).unwrap();
        let bx = g.boundary().unwrap();
        let c = t.component(Blade::SCALAR).unwrap();
        // ν⌟u = ν·u = −u_2
        for (i, v) in c.iter().enumerate() {
            assert_eq!(*v, Complex64::new(-(1.0 + bx.coordinate(i)), 0.0));
        }
    }

    #[test]
    fn normal_trace_signs() {
        let g = Grid::new(3, 4, 1.0).unwrap();
        let u = HalfField::from_fn(g, None, DegreeMask::single(1), |b, _| Complex64::new(b.0 as f64, 0.0)).unwrap();
        let t = normal_trace(&u).unwrap();
        // (ν∧u)_{13} = −sign(3, {1}) u_1 = u_1
        assert_eq!(t.component(Blade(0b101)).unwrap()[0], Complex64::new(1.0, 0.0));
        assert_eq!(t.component(Blade(0b110)).unwrap()[0], Complex64::new(2.0, 0.0));
        assert!(t.component(Blade(0b011)).unwrap().iter().all(|v| v.norm() == 0.0));
    }
}
