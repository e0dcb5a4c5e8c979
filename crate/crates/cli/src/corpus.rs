//! Synthetic input fields.

use anyhow::{Context, Result};
use hodgehalf::field::synth::{synthesize, TestFunctionSpec};
use hodgehalf::field::{DegreeMask, FormField, Grid};
use hodgehalf::half_space::{symmetrize, BoundaryFlavor, HalfField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{CorpusKind, CorpusSpec};

pub fn kind_name(kind: CorpusKind) -> &'static str {
    match kind {
        CorpusKind::Annulus => "annulus",
        CorpusKind::Gaussian => "gaussian",
        CorpusKind::RandomBand => "random_band",
    }
}

/// Gaussian centre drawn from the seed, within a fifth of the box.
fn center(grid: &Grid, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let r = grid.half_length() / 5.0;
    (0..grid.dim()).map(|_| rng.gen_range(-r..r)).collect()
}

pub fn member(grid: &Grid, spec: &CorpusSpec, kind: CorpusKind, seed: u64) -> Result<FormField> {
    let mask = DegreeMask::from_degrees(&spec.degrees);
    let recipe = match kind {
        CorpusKind::Annulus => TestFunctionSpec::annulus(spec.inner, spec.outer.min(grid.max_frequency()), seed),
        CorpusKind::Gaussian => TestFunctionSpec::GaussianBump {
            center: center(grid, seed),
            width: spec.width,
            seed: Some(seed),
        },
        CorpusKind::RandomBand => TestFunctionSpec::RandomBand {
            cutoff: spec.cutoff.min(grid.max_frequency()),
            seed,
        },
    };
    synthesize(&recipe, grid, mask).with_context(|| format!("{} corpus member, seed {seed}", kind_name(kind)))
}

/// Every `(kind, seed)` member, labelled `kind_seed`.
pub fn whole_space(grid: &Grid, spec: &CorpusSpec) -> Result<Vec<(String, FormField)>> {
    let mut out = Vec::new();
    for &kind in &spec.kinds {
        for &seed in &spec.seeds {
            out.push((format!("{}_{seed}", kind_name(kind)), member(grid, spec, kind, seed)?));
        }
    }
    Ok(out)
}

/// Annulus members symmetrized into half-space fields of the given flavor.
pub fn half_space(grid: &Grid, spec: &CorpusSpec, flavor: BoundaryFlavor) -> Result<Vec<(String, HalfField)>> {
    let mut out = Vec::new();
    for &seed in &spec.seeds {
        let u = member(grid, spec, CorpusKind::Annulus, seed)?;
        out.push((format!("annulus_{seed}"), symmetrize(&u, flavor)?));
    }
    Ok(out)
}

/// Gaussian bump centred at mid-height, negligible on the boundary row.
/// One-sided boundary stencils resolve it to `1e-8` once `N >= 256`.
pub fn interior_bump(grid: &Grid, flavor: BoundaryFlavor, mask: DegreeMask) -> Result<HalfField> {
    let n = grid.dim();
    let height = grid.half_length() / 2.0;
    let width = grid.half_length() / 10.0;
    Ok(HalfField::from_fn(*grid, Some(flavor), mask, |b, x| {
        let mut r2 = (x[n - 1] - height).powi(2);
        for (a, v) in x[..n - 1].iter().enumerate() {
            r2 += (v - 0.1 * (a as f64 + 1.0)).powi(2);
        }
        num_complex::Complex64::new(1.0 + 0.1 * b.0 as f64, 0.2) * (-r2 / (width * width)).exp()
    })?)
}

/// All-degree Gaussian with a random centre straddling the boundary.
pub fn smooth_pair_member(grid: &Grid, seed: u64) -> Result<FormField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.dim();
    let scale = grid.half_length() / 8.0;
    let mut center = vec![0.0; n];
    for c in center.iter_mut().take(n - 1) {
        *c = rng.gen_range(-1.0..1.0) * scale;
    }
    center[n - 1] = rng.gen_range(-0.5..1.0) * scale;
    let width = rng.gen_range(1.0..1.5) * scale;
    Ok(synthesize(
        &TestFunctionSpec::GaussianBump {
            center,
            width,
            seed: Some(seed),
        },
        grid,
        DegreeMask::full(n),
    )?)
}
