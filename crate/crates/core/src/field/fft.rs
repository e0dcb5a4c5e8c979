//! Axis-by-axis n-dimensional FFT on flat C-order buffers.
//!
//! Forward transforms are unnormalized; the inverse carries `1/N^n`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(len: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(len)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(len), planner.plan_fft_inverse(len))
        })
        .clone()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

fn transform(grid: &Grid, data: &mut [Complex64], dir: Direction) {
    let n = grid.points();
    debug_assert_eq!(data.len(), grid.len());
    let (fwd, inv) = plans(n);
    let plan = match dir {
        Direction::Forward => fwd,
        Direction::Inverse => inv,
    };
    for axis in 1..=grid.dim() {
        let stride = grid.stride(axis);
        let block = n * stride;
        if stride == 1 {
            let lines_per_task = (4096 / n).max(1);
            data.par_chunks_mut(lines_per_task * n).for_each(|chunk| {
                let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
                for line in chunk.chunks_mut(n) {
                    plan.process_with_scratch(line, &mut scratch);
                }
            });
        } else {
            data.par_chunks_mut(block).for_each(|blk| {
                let mut line = vec![Complex64::new(0.0, 0.0); n];
                let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
                for offset in 0..stride {
                    for (i, v) in line.iter_mut().enumerate() {
                        *v = blk[offset + i * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (i, v) in line.iter().enumerate() {
                        blk[offset + i * stride] = *v;
                    }
                }
            });
        }
    }
    if dir == Direction::Inverse {
        let scale = 1.0 / grid.len() as f64;
        data.par_iter_mut().for_each(|v| *v *= scale);
    }
}

/// In-place unnormalized forward transform.
pub fn forward_in_place(grid: &Grid, data: &mut [Complex64]) {
    transform(grid, data, Direction::Forward);
}

/// In-place inverse transform including the `1/N^n` factor.
pub fn inverse_in_place(grid: &Grid, data: &mut [Complex64]) {
    transform(grid, data, Direction::Inverse);
}

pub fn forward(grid: &Grid, data: &[Complex64]) -> Vec<Complex64> {
    let mut out = data.to_vec();
    forward_in_place(grid, &mut out);
    out
}

pub fn inverse(grid: &Grid, data: &[Complex64]) -> Vec<Complex64> {
    let mut out = data.to_vec();
    inverse_in_place(grid, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_2d(n: usize, data: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for k1 in 0..n {
            for k2 in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for j1 in 0..n {
                    for j2 in 0..n {
                        let phase = -2.0 * std::f64::consts::PI * ((j1 * k1 + j2 * k2) as f64) / n as f64;
                        acc += data[j1 * n + j2] * Complex64::from_polar(1.0, phase);
                    }
                }
                out[k1 * n + k2] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let data: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let fast = forward(&g, &data);
        let slow = naive_dft_2d(8, &data);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-11);
        }
        let back = inverse(&g, &fast);
        for (a, b) in back.iter().zip(&data) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
