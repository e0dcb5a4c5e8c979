use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::check_dim;
use crate::error::{Error, Result};

/// Uniform periodic grid on the torus `[-L, L)^n` standing in for `R^n`.
///
/// Samples are stored in C order with the last axis (the normal direction
/// `x_n` for half-space work) varying fastest. Axis numbers are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points: usize,
    half_length: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, half_length: f64) -> Result<Self> {
        check_dim(dim)?;
        if points < 2 || points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and >= 2, got {points}"
            )));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half length must be positive, got {half_length}"
            )));
        }
        Ok(Self {
            dim,
            points,
            half_length,
        })
    }

    /// Defaults used throughout the test corpus: `L = 16` with `N = 128`
    /// for `n <= 2`, `N = 64` for `n = 3` and `N = 32` for `n = 4`.
    pub fn default_for(dim: usize) -> Result<Self> {
        let points = match dim {
            1 | 2 => 128,
            3 => 64,
            _ => 32,
        };
        Self::new(dim, points, 16.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Stride of a 1-based axis in the flat sample array.
    pub fn stride(&self, axis: usize) -> usize {
        self.points.pow((self.dim - axis) as u32)
    }

    /// Index along a 1-based axis of a flat sample index.
    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.stride(axis)) % self.points
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    /// Coordinates of a flat sample index.
    pub fn point(&self, flat: usize) -> [f64; 4] {
        let mut x = [0.0; 4];
        for axis in 1..=self.dim {
            x[axis - 1] = self.coordinate(self.axis_index(flat, axis));
        }
        x
    }

    /// Signed lattice integer of an FFT index: `0, 1, ..., N/2-1, -N/2, ..., -1`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.points / 2 {
            i as i64
        } else {
            i as i64 - self.points as i64
        }
    }

    /// FFT index of a lattice integer, if representable.
    pub fn fft_index(&self, k: i64) -> Option<usize> {
        let half = (self.points / 2) as i64;
        if k < -half || k >= half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + self.points as i64) as usize)
        }
    }

    /// Lattice spacing in frequency, `π / L`.
    pub fn frequency_step(&self) -> f64 {
        PI / self.half_length
    }

    /// Physical frequency of an FFT index.
    pub fn frequency(&self, i: usize) -> f64 {
        self.frequency_step() * self.wavenumber(i) as f64
    }

    /// Largest positive frequency on each axis, `(π/L)(N/2 - 1)`.
    pub fn max_frequency(&self) -> f64 {
        self.frequency_step() * (self.points / 2 - 1) as f64
    }

    /// Per-axis frequency table.
    pub fn axis_frequencies(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.frequency(i)).collect()
    }

    /// `|ξ|²` for every lattice point, in FFT order.
    pub fn xi_sq(&self) -> Vec<f64> {
        let freqs = self.axis_frequencies();
        let mut out = vec![0.0; self.len()];
        for axis in 1..=self.dim {
            let stride = self.stride(axis);
            for (flat, v) in out.iter_mut().enumerate() {
                let f = freqs[(flat / stride) % self.points];
                *v += f * f;
            }
        }
        out
    }

    /// `|ξ|` for every lattice point.
    pub fn xi_norm(&self) -> Vec<f64> {
        self.xi_sq().into_iter().map(f64::sqrt).collect()
    }

    /// `ξ_axis` for every lattice point.
    pub fn xi_axis(&self, axis: usize) -> Vec<f64> {
        let freqs = self.axis_frequencies();
        let stride = self.stride(axis);
        (0..self.len())
            .map(|flat| freqs[(flat / stride) % self.points])
            .collect()
    }

    /// The same torus with one dimension fewer (the boundary `x_n = 0`).
    pub fn boundary(&self) -> Result<Grid> {
        if self.dim < 2 {
            return Err(Error::InvalidGrid("half-space work needs n >= 2".into()));
        }
        Grid::new(self.dim - 1, self.points, self.half_length)
    }

    /// Index of the row `x = 0` along any axis.
    pub fn origin_index(&self) -> usize {
        self.points / 2
    }
}
