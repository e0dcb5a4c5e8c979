//! Test-function generators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DegreeMask, FormField, Grid, SpectralField};
use crate::algebra::Blade;
use crate::error::{Error, Result};
use crate::littlewood_paley::smooth_step;

/// Recipe for a synthetic input field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunctionSpec {
    /// `c_I exp(-|x - center|² / width²)`; `c_I = 1` without a seed,
    /// otherwise random in the unit square.
    GaussianBump {
        center: Vec<f64>,
        width: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Real random field whose spectrum is exactly supported in
    /// `inner <= |ξ| <= outer`.
    AnnulusBand { inner: f64, outer: f64, seed: u64 },
    /// `exp(i x·ξ0)` in every component; `xi` must be a lattice frequency.
    SingleMode { xi: Vec<f64> },
    /// Real random field with spectrum supported in `|ξ| <= cutoff`.
    RandomBand { cutoff: f64, seed: u64 },
}

impl TestFunctionSpec {
    pub fn gaussian(center: Vec<f64>, width: f64) -> Self {
        TestFunctionSpec::GaussianBump {
            center,
            width,
            seed: None,
        }
    }

    pub fn annulus(inner: f64, outer: f64, seed: u64) -> Self {
        TestFunctionSpec::AnnulusBand { inner, outer, seed }
    }
}

/// Mixes a user seed with a component index.
fn component_seed(seed: u64, blade: Blade) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (blade.0 as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Smooth radial window equal to 1 well inside `[a, b]` and 0 outside it.
fn band_window(r: f64, a: f64, b: f64) -> f64 {
    let ramp = (b - a) / 4.0;
    smooth_step((r - a) / ramp) * smooth_step((b - r) / ramp)
}

/// Localized real noise: uniform samples under a wide Gaussian envelope.
fn localized_noise(grid: &Grid, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = grid.half_length() / 4.0;
    let n = grid.dim();
    (0..grid.len())
        .map(|flat| {
            let x = grid.point(flat);
            let r2: f64 = x[..n].iter().map(|v| v * v).sum();
            let env = (-r2 / (2.0 * sigma * sigma)).exp();
            Complex64::new(rng.gen_range(-1.0..1.0) * env, 0.0)
        })
        .collect()
}

fn filtered_noise<W>(grid: &Grid, mask: DegreeMask, seed: u64, window: W) -> Result<FormField>
where
    W: Fn(f64) -> f64 + Sync,
{
    let table: Vec<f64> = grid.xi_norm().into_par_iter().map(|r| window(r)).collect();
    let parts = mask
        .blades(grid.dim())
        .into_iter()
        .map(|b| {
            let spec = super::fft::forward(grid, &localized_noise(grid, component_seed(seed, b)));
            (b, spec)
        })
        .collect();
    let spectral = SpectralField::from_components(*grid, parts)?.multiply_real(&table);
    Ok(spectral.ifft())
}

fn check_vector(grid: &Grid, v: &[f64], what: &str) -> Result<()> {
    if v.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} must be finite")));
    }
    Ok(())
}

/// Samples `spec` on `grid` for every blade of the given degrees.
pub fn synthesize(spec: &TestFunctionSpec, grid: &Grid, mask: DegreeMask) -> Result<FormField> {
    let n = grid.dim();
    match spec {
        TestFunctionSpec::GaussianBump { center, width, seed } => {
            check_vector(grid, center, "center")?;
            if !(*width > 0.0 && width.is_finite()) {
                return Err(Error::InvalidParameter(format!("width must be positive, got {width}")));
            }
            let coeff = |b: Blade| match seed {
                None => Complex64::new(1.0, 0.0),
                Some(s) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(component_seed(*s, b));
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                }
            };
            let coeffs: Vec<Complex64> = Blade::all(n).map(coeff).collect();
            Ok(FormField::from_fn(*grid, mask, |b, x| {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                coeffs[b.index()] * (-r2 / (width * width)).exp()
            }))
        }
        TestFunctionSpec::AnnulusBand { inner, outer, seed } => {
            if !(*inner > 0.0 && outer > inner && outer.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "annulus needs 0 < inner < outer, got ({inner}, {outer})"
                )));
            }
            if *outer > grid.max_frequency() {
                return Err(Error::InvalidParameter(format!(
                    "annulus radius {outer} exceeds the grid Nyquist range {}",
                    grid.max_frequency()
                )));
            }
            let (a, b) = (*inner, *outer);
            filtered_noise(grid, mask, *seed, move |r| band_window(r, a, b))
        }
        TestFunctionSpec::RandomBand { cutoff, seed } => {
            if !(*cutoff > 0.0 && *cutoff <= grid.max_frequency()) {
                return Err(Error::InvalidParameter(format!(
                    "cutoff must lie in (0, {}], got {cutoff}",
                    grid.max_frequency()
                )));
            }
            let c = *cutoff;
            filtered_noise(grid, mask, *seed, move |r| smooth_step(4.0 * (c - r) / c))
        }
        TestFunctionSpec::SingleMode { xi } => {
            check_vector(grid, xi, "mode")?;
            let step = grid.frequency_step();
            for &x in xi {
                let k = (x / step).round();
                if (x / step - k).abs() > 1e-9 || grid.fft_index(k as i64).is_none() {
                    return Err(Error::InvalidParameter(format!(
                        "mode component {x} is not a representable lattice frequency"
                    )));
                }
            }
            Ok(FormField::from_fn(*grid, mask, |_, x| {
                let phase: f64 = x.iter().zip(xi).map(|(a, k)| a * k).sum();
                Complex64::from_polar(1.0, phase)
            }))
        }
    }
}
