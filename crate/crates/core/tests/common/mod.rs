#![allow(dead_code)]

use hodgehalf::field::synth::{synthesize, TestFunctionSpec};
use hodgehalf::field::{DegreeMask, FormField, Grid};
use num_complex::Complex64;

/// `‖a − b‖₂ / ‖b‖₂` (absolute when `b` vanishes).
pub fn rel_diff(a: &FormField, b: &FormField) -> f64 {
    let diff = a.sub(b).unwrap().norm_l2();
    let scale = b.norm_l2();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Mean-free random field with spectrum in `inner <= |ξ| <= outer`.
pub fn s0_field(grid: Grid, degrees: &[usize], inner: f64, outer: f64, seed: u64) -> FormField {
    synthesize(
        &TestFunctionSpec::annulus(inner, outer, seed),
        &grid,
        DegreeMask::from_degrees(degrees),
    )
    .unwrap()
}

/// Random Gaussian bump with per-component coefficients.
pub fn bump(grid: Grid, degrees: &[usize], center: Vec<f64>, width: f64, seed: u64) -> FormField {
    synthesize(
        &TestFunctionSpec::GaussianBump {
            center,
            width,
            seed: Some(seed),
        },
        &grid,
        DegreeMask::from_degrees(degrees),
    )
    .unwrap()
}

/// Periodic 8th-order central difference `∂_axis` of a full-grid component.
pub fn fd_partial(grid: &Grid, data: &[Complex64], axis: usize) -> Vec<Complex64> {
    const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let n = grid.points();
    let stride = grid.stride(axis);
    let h = grid.spacing();
    (0..grid.len())
        .map(|flat| {
            let i = grid.axis_index(flat, axis);
            let base = flat - i * stride;
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, w) in W.iter().enumerate() {
                let s = k + 1;
                let plus = base + ((i + s) % n) * stride;
                let minus = base + ((i + n - s) % n) * stride;
                acc += (data[plus] - data[minus]) * *w;
            }
            acc / h
        })
        .collect()
}

/// Mean-free band-limited half-space field whose extension under `flavor`
/// is exactly the reflection-symmetrized annulus field.
pub fn symmetric_s0(
    grid: Grid,
    degrees: &[usize],
    flavor: hodgehalf::half_space::BoundaryFlavor,
    inner: f64,
    outer: f64,
    seed: u64,
) -> hodgehalf::half_space::HalfField {
    hodgehalf::half_space::symmetrize(&s0_field(grid, degrees, inner, outer, seed), flavor).unwrap()
}

/// `‖a − b‖ / ‖b‖` on the half-space.
pub fn half_rel(a: &hodgehalf::half_space::HalfField, b: &hodgehalf::half_space::HalfField) -> f64 {
    let diff = a.sub(b).unwrap().norm_l2();
    let scale = b.norm_l2();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Pointwise `⟨a, b⟩` over the shared components of two full-grid fields.
pub fn pointwise_inner(a: &FormField, b: &FormField) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.grid().len()];
    for (blade, x) in a.components() {
        if let Some(y) = b.component(blade) {
            out.iter_mut()
                .zip(x.iter().zip(y))
                .for_each(|(o, (p, q))| *o += p * q.conj());
        }
    }
    out
}

/// Relative residuals of the two Green formulas on `R^n_+` for a pair of
/// smooth full-grid fields:
/// `∫_∂⟨ν⌟u, Ψ⟩ = ∫⟨u, dΨ⟩ − ∫⟨δu, Ψ⟩` and `∫_∂⟨ν∧u, Ψ⟩ = ∫⟨du, Ψ⟩ − ∫⟨u, δΨ⟩`.
pub fn green_residuals(u: &FormField, psi: &FormField) -> (f64, f64) {
    use hodgehalf::calculus::{d, delta};
    use hodgehalf::half_space::quadrature::half_space_integral;
    use hodgehalf::half_space::{normal_trace, restrict, tangential_trace, BoundaryForm};
    let g = *u.grid();
    let integral = |a: &FormField, b: &FormField| half_space_integral(&g, &pointwise_inner(a, b), 4).unwrap();
    let hu = restrict(u, None).unwrap();
    let hpsi = BoundaryForm::from_boundary_values(&restrict(psi, None).unwrap()).unwrap();
    let (du, dpsi) = (d(u).unwrap(), d(psi).unwrap());
    let (deltau, deltapsi) = (delta(u).unwrap(), delta(psi).unwrap());

    let a1 = integral(u, &dpsi);
    let b1 = integral(&deltau, psi);
    let t1 = tangential_trace(&hu).unwrap().inner_l2(&hpsi).unwrap();
    let r1 = (t1 - (a1 - b1)).norm() / t1.norm().max(a1.norm()).max(b1.norm());

    let a2 = integral(&du, psi);
    let b2 = integral(u, &deltapsi);
    let t2 = normal_trace(&hu).unwrap().inner_l2(&hpsi).unwrap();
    let r2 = (t2 - (a2 - b2)).norm() / t2.norm().max(a2.norm()).max(b2.norm());
    (r1, r2)
}

/// Random smooth form with all degrees present, offset across the boundary.
pub fn smooth_pair_member(grid: Grid, seed: u64) -> FormField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = grid.dim();
    let mut center = vec![0.0; n];
    for c in center.iter_mut().take(n - 1) {
        *c = rng.gen_range(-1.0..1.0);
    }
    center[n - 1] = rng.gen_range(-0.5..1.0);
    let width = rng.gen_range(1.0..1.5);
    let all: Vec<usize> = (0..=n).collect();
    bump(grid, &all, center, width, seed)
}
