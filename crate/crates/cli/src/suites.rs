//! Verification suites behind `hodgehalf verify`.

use std::f64::consts::PI;
use std::sync::Arc;

use anyhow::Result;
use hodgehalf::algebra::{hodge_star, inner, interior, wedge, wedge_sign, AlgebraElement, Blade, Vector1Form};
use hodgehalf::calculus::{
    d, delta, gradient_norm, hessian_norm, leray_wholespace, resolvent, Multiplier, SectorPoint,
};
use hodgehalf::evolution::{
    max_reg_report, momentum_residual, ratio_spread, solve_hodge_stokes, solve_navier_slip, MaxRegOptions,
    SeparableForcing, TimeGrid, ZeroForcing,
};
use hodgehalf::field::synth::{synthesize, TestFunctionSpec};
use hodgehalf::field::{DegreeMask, FormField, Grid};
use hodgehalf::half_space::quadrature::half_space_integral;
use hodgehalf::half_space::{
    d_half, delta_half, extend, hodge_bc_residual, hodge_resolvent, leray_halfspace, navier_slip_residual,
    normal_trace, restrict, symmetrize, tangential_trace, BoundaryFlavor, BoundaryForm, HalfField,
};
use hodgehalf::littlewood_paley::{FilterBank, SpaceParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{CorpusSpec, RunConfig, Tolerances};
use crate::corpus;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyOutcome {
    pub suite: String,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
    pub status: String,
}

impl VerifyOutcome {
    fn new(suite: &str, checks: Vec<Check>) -> Self {
        let failed = checks.iter().filter(|c| !c.passed).count();
        Self {
            suite: suite.to_string(),
            passed: checks.len() - failed,
            failed,
            status: if failed == 0 { "ok" } else { "fail" }.to_string(),
            checks,
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

/// Running maximum of one residual against its tolerance.
struct Tally {
    name: &'static str,
    worst: f64,
    tolerance: f64,
    finite: bool,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            worst: 0.0,
            tolerance,
            finite: true,
        }
    }

    fn see(&mut self, v: f64) {
        self.finite &= v.is_finite();
        self.worst = self.worst.max(v);
    }

    fn done(self) -> Check {
        Check {
            name: self.name.to_string(),
            worst: self.worst,
            tolerance: self.tolerance,
            passed: self.finite && self.worst < self.tolerance,
        }
    }
}

pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub grid: Grid,
    pub tol: Tolerances,
    pub seed: u64,
}

impl Context<'_> {
    fn corpus(&self) -> CorpusSpec {
        let mut spec = self.config.corpus.clone();
        spec.seeds = spec.seeds.iter().map(|s| s.wrapping_add(self.seed)).collect();
        spec
    }

    fn band(&self) -> (f64, f64) {
        let c = &self.config.corpus;
        (c.inner, c.outer.min(self.grid.max_frequency()))
    }
}

pub fn run(name: &str, ctx: &Context) -> Result<VerifyOutcome> {
    let checks = match name {
        "algebra" => algebra(ctx),
        "symbols" => symbols(ctx)?,
        "decomposition" => decomposition(ctx)?,
        "halfspace" => halfspace(ctx)?,
        "traces" => traces(ctx)?,
        "evolution" => evolution(ctx)?,
        other => anyhow::bail!(crate::ConfigError(format!("unknown suite `{other}`"))),
    };
    Ok(VerifyOutcome::new(name, checks))
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn basis(n: usize, b: Blade) -> AlgebraElement {
    AlgebraElement::basis(n, b).expect("blade fits the dimension")
}

fn random_element(rng: &mut ChaCha8Rng, n: usize) -> AlgebraElement {
    let coeffs = (0..1 << n)
        .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
        .collect();
    AlgebraElement::from_coeffs(n, coeffs).expect("length 2^n")
}

fn algebra(ctx: &Context) -> Vec<Check> {
    let n = ctx.grid.dim();
    let tol = ctx.tol.algebra;
    let mut anti = Tally::new("anticommutativity", tol);
    let mut star = Tally::new("star_involution", tol);
    let mut adjoint = Tally::new("adjointness", tol);
    let mut lagrange = Tally::new("lagrange_identity", tol);
    for a in Blade::all(n) {
        let l = a.degree();
        let s = if (l * (n - l)).is_multiple_of(2) { 1.0 } else { -1.0 };
        let twice = hodge_star(&hodge_star(&basis(n, a)));
        star.see(twice.sub(&basis(n, a).scale(c(s))).expect("same n").norm());
        for b in Blade::all(n) {
            let ab = wedge(&basis(n, a), &basis(n, b)).expect("same n");
            let ba = wedge(&basis(n, b), &basis(n, a)).expect("same n");
            let s = if (a.degree() * b.degree()) % 2 == 0 { 1.0 } else { -1.0 };
            anti.see(ab.sub(&ba.scale(c(s))).expect("same n").norm());
        }
    }
    for axis in 1..=n {
        let v = Vector1Form::unit(n, axis).expect("axis in range");
        for u in Blade::all(n) {
            for w in Blade::all(n) {
                let lhs = inner(&wedge(&v.to_element(), &basis(n, u)).expect("same n"), &basis(n, w)).expect("same n");
                let rhs = inner(&basis(n, u), &interior(&v, &basis(n, w)).expect("same n")).expect("same n");
                adjoint.see((lhs - rhs).norm());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    for _ in 0..500 {
        let u = random_element(&mut rng, n);
        let w = random_element(&mut rng, n);
        let a: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let a = Vector1Form::new(a).expect("n entries");
        let lhs = inner(&wedge(&a.to_element(), &u).expect("same n"), &w).expect("same n");
        let rhs = inner(&u, &interior(&a, &w).expect("same n")).expect("same n");
        adjoint.see((lhs - rhs).norm() / (1.0 + lhs.norm()));

        let re: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let v = Vector1Form::real(&re).expect("n entries");
        let ve = v.to_element();
        let sum = wedge(&ve, &interior(&v, &u).expect("same n"))
            .expect("same n")
            .add(&interior(&v, &wedge(&ve, &u).expect("same n")).expect("same n"))
            .expect("same n");
        let expected = u.scale(c(v.norm_sqr()));
        lagrange.see(sum.sub(&expected).expect("same n").norm() / (1.0 + expected.norm()));
    }
    vec![anti.done(), star.done(), adjoint.done(), lagrange.done()]
}

/// Periodic eighth-order central difference along a 1-based axis.
pub fn fd_partial(grid: &Grid, data: &[Complex64], axis: usize) -> Vec<Complex64> {
    const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let points = grid.points();
    let stride = grid.stride(axis);
    let h = grid.spacing();
    (0..data.len())
        .map(|flat| {
            let j = grid.axis_index(flat, axis);
            let base = flat - j * stride;
            let at = |k: i64| data[base + (k.rem_euclid(points as i64) as usize) * stride];
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, w) in W.iter().enumerate() {
                let k = m as i64 + 1;
                acc += (at(j as i64 + k) - at(j as i64 - k)) * *w;
            }
            acc / h
        })
        .collect()
}

/// `d` and `δ` assembled from finite-difference partials, blade by blade.
fn fd_d_and_delta(u: &FormField) -> Result<(FormField, FormField)> {
    let g = *u.grid();
    let n = g.dim();
    let zero = || vec![Complex64::new(0.0, 0.0); g.len()];
    let mut du: Vec<Vec<Complex64>> = (0..1 << n).map(|_| zero()).collect();
    let mut dl: Vec<Vec<Complex64>> = (0..1 << n).map(|_| zero()).collect();
    for (b, comp) in u.components() {
        for a in 1..=n {
            let p = fd_partial(&g, comp, a);
            let (target, store, s) = if b.contains(a) {
                let t = b.without_axis(a);
                (t, &mut dl, -(wedge_sign(Blade::axis(a), t) as f64))
            } else {
                (b.with_axis(a), &mut du, wedge_sign(Blade::axis(a), b) as f64)
            };
            store[target.index()].iter_mut().zip(&p).for_each(|(x, y)| *x += y * s);
        }
    }
    let pack = |parts: &[Vec<Complex64>], mask: DegreeMask| {
        let kept = mask
            .blades(n)
            .into_iter()
            .map(|b| (b, parts[b.index()].clone()))
            .collect();
        FormField::from_components(g, kept)
    };
    Ok((pack(&du, d(u)?.mask())?, pack(&dl, delta(u)?.mask())?))
}

fn rel_diff(a: &FormField, b: &FormField) -> Result<f64> {
    let scale = b.norm_l2();
    let diff = a.sub(b)?.norm_l2();
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

fn half_rel(a: &HalfField, b: &HalfField) -> Result<f64> {
    let scale = b.norm_l2();
    let diff = a.sub(b)?.norm_l2();
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

fn h2(u: &FormField) -> Result<f64> {
    let s = u.fft()?;
    Ok(s.norm_l2() + gradient_norm(&s) + hessian_norm(&s))
}

fn symbols(ctx: &Context) -> Result<Vec<Check>> {
    let g = ctx.grid;
    let n = g.dim();
    let mut fd = Tally::new("spectral_vs_finite_difference", ctx.tol.symbol_fd);
    let mut nil = Tally::new("nilpotence", ctx.tol.nilpotent);
    let width = ctx.config.corpus.width;
    for seed in ctx.corpus().seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let u = synthesize(
            &TestFunctionSpec::GaussianBump {
                center,
                width,
                seed: Some(seed),
            },
            &g,
            DegreeMask::full(n),
        )?;
        let (du_fd, dl_fd) = fd_d_and_delta(&u)?;
        let du = d(&u)?;
        let dl = delta(&u)?;
        fd.see(rel_diff(&du, &du_fd)?);
        fd.see(rel_diff(&dl, &dl_fd)?);
        let scale = h2(&u)?;
        nil.see(d(&du)?.norm_l2() / scale);
        nil.see(delta(&dl)?.norm_l2() / scale);
    }
    Ok(vec![fd.done(), nil.done()])
}

fn decomposition(ctx: &Context) -> Result<Vec<Check>> {
    let g = ctx.grid;
    let tol = &ctx.tol;
    let mut exact = Tally::new("recomposition", tol.whole_space_decomp);
    let mut closed = Tally::new("delta_p_and_d_g", tol.whole_space_decomp);
    let mut ortho = Tally::new("orthogonality", tol.whole_space_decomp);
    let mut formula = Tally::new("divergence_formula", tol.leray_div_form);
    let (inner_r, outer_r) = ctx.band();
    for seed in ctx.corpus().seeds {
        let u = synthesize(
            &TestFunctionSpec::annulus(inner_r, outer_r, seed),
            &g,
            DegreeMask::single(1),
        )?;
        let (p, gr) = leray_wholespace(&u)?;
        exact.see(rel_diff(&p.add(&gr)?, &u)?);
        let scale = h2(&u)?;
        closed.see(delta(&p)?.norm_l2() / scale);
        closed.see(d(&gr)?.norm_l2() / scale);
        ortho.see(p.inner_l2(&gr)?.norm() / u.norm_l2().powi(2));
        // P = I + ∇(−Δ)^{−1} div and div = −δ on 1-forms
        let div = delta(&u)?.scale(c(-1.0));
        let potential = Multiplier::Resolvent(c(0.0)).apply(&div.fft()?)?.ifft();
        formula.see(rel_diff(&p, &u.add(&d(&potential)?)?)?);
    }
    Ok(vec![exact.done(), closed.done(), ortho.done(), formula.done()])
}

fn sector_samples() -> Result<Vec<SectorPoint>> {
    Ok(SectorPoint::sweep(0.01, 100.0, 4, 3.0 * PI / 4.0, 3)?)
}

fn halfspace(ctx: &Context) -> Result<Vec<Check>> {
    let g = ctx.grid;
    let n = g.dim();
    let tol = &ctx.tol;
    let corpus = ctx.corpus();
    let (inner_r, outer_r) = ctx.band();
    let sweep = sector_samples()?;

    let mut reflect = Tally::new("reflection_identity", tol.reflection);
    let degrees: Vec<usize> = (0..=n.min(2)).collect();
    let f = symmetrize(
        &synthesize(
            &TestFunctionSpec::annulus(inner_r, outer_r, corpus.seeds[0]),
            &g,
            DegreeMask::from_degrees(&degrees),
        )?,
        BoundaryFlavor::Ht,
    )?;
    for sp in &sweep {
        let u = hodge_resolvent(sp, &f, BoundaryFlavor::Ht)?;
        let lhs = extend(&u)?.fft()?;
        let rhs = resolvent(sp, &extend(&f)?)?.fft()?;
        reflect.see(lhs.sub(&rhs)?.max_abs() / rhs.max_abs());
    }

    let mut bc = Tally::new("resolvent_boundary_conditions", tol.boundary);
    let bump = corpus::interior_bump(&g, BoundaryFlavor::Ht, DegreeMask::single(1))?;
    for sp in &sweep {
        let u = hodge_resolvent(sp, &bump, BoundaryFlavor::Ht)?;
        let r = hodge_bc_residual(&u, hodgehalf::tolerances::BOUNDARY_STENCIL_ORDER)?;
        bc.see(r.trace / u.norm_l2());
        bc.see(r.flux / d_half(&u)?.norm_l2());
    }

    let mut idem = Tally::new("leray_idempotence", tol.half_space_decomp);
    let mut closed = Tally::new("leray_closedness", tol.half_space_decomp);
    let mut ortho = Tally::new("leray_orthogonality", tol.half_space_ortho);
    let mut trace = Tally::new("leray_boundary_trace", tol.boundary);
    for seed in &corpus.seeds {
        let u = symmetrize(
            &synthesize(
                &TestFunctionSpec::annulus(inner_r, outer_r, *seed),
                &g,
                DegreeMask::single(1),
            )?,
            BoundaryFlavor::Ht,
        )?;
        let (p, gr) = leray_halfspace(&u)?;
        let scale = u.norm_l2();
        idem.see(half_rel(&leray_halfspace(&p)?.0, &p)?);
        closed.see(delta_half(&p)?.norm_l2() / scale);
        closed.see(d_half(&gr)?.norm_l2() / scale);
        ortho.see(p.inner_l2(&gr)?.norm() / (scale * scale));
        trace.see(tangential_trace(&p)?.norm_l2() / scale);
    }

    let mut decouple = Tally::new("scalar_decoupling", tol.decoupling);
    let sp = SectorPoint::new(Complex64::new(0.5, -2.0), 3.0)?;
    let u = hodge_resolvent(&sp, &f, BoundaryFlavor::Ht)?;
    for (b, comp) in f.components() {
        let flavor = if b.contains(n) {
            BoundaryFlavor::D
        } else {
            BoundaryFlavor::N
        };
        let scalar = HalfField::from_components(g, Some(flavor), vec![(Blade::SCALAR, comp.to_vec())])?;
        let out = hodge_resolvent(&sp, &scalar, flavor)?;
        let expected = out.component(Blade::SCALAR).expect("scalar field");
        let got = u.component(b).expect("same mask");
        let err = got
            .iter()
            .zip(expected)
            .map(|(a, e)| (a - e).norm())
            .fold(0.0, f64::max);
        decouple.see(err / u.max_abs());
    }
    Ok(vec![
        reflect.done(),
        bc.done(),
        idem.done(),
        closed.done(),
        ortho.done(),
        trace.done(),
        decouple.done(),
    ])
}

fn pointwise_inner(a: &FormField, b: &FormField) -> Vec<Complex64> {
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

/// Residuals of `∫_∂⟨ν⌟u, Ψ⟩ = ∫⟨u, dΨ⟩ − ∫⟨δu, Ψ⟩` and of its `ν∧` mirror.
pub fn green_residuals(u: &FormField, psi: &FormField) -> Result<(f64, f64)> {
    let g = *u.grid();
    let integral = |a: &FormField, b: &FormField| half_space_integral(&g, &pointwise_inner(a, b), 4);
    let hu = restrict(u, None)?;
    let hpsi = BoundaryForm::from_boundary_values(&restrict(psi, None)?)?;

    let a1 = integral(u, &d(psi)?)?;
    let b1 = integral(&delta(u)?, psi)?;
    let t1 = tangential_trace(&hu)?.inner_l2(&hpsi)?;
    let r1 = (t1 - (a1 - b1)).norm() / t1.norm().max(a1.norm()).max(b1.norm());

    let a2 = integral(&d(u)?, psi)?;
    let b2 = integral(u, &delta(psi)?)?;
    let t2 = normal_trace(&hu)?.inner_l2(&hpsi)?;
    let r2 = (t2 - (a2 - b2)).norm() / t2.norm().max(a2.norm()).max(b2.norm());
    Ok((r1, r2))
}

fn traces(ctx: &Context) -> Result<Vec<Check>> {
    let g = ctx.grid;
    let tol = &ctx.tol;
    let mut tangential = Tally::new("green_formula_tangential", tol.trace_duality);
    let mut normal = Tally::new("green_formula_normal", tol.trace_duality);
    for seed in ctx.corpus().seeds {
        let u = corpus::smooth_pair_member(&g, 2 * seed)?;
        let psi = corpus::smooth_pair_member(&g, 2 * seed + 1)?;
        let (t, m) = green_residuals(&u, &psi)?;
        tangential.see(t);
        normal.see(m);
    }
    let mut slip = Tally::new("hodge_to_navier_slip", tol.navier_slip);
    let bump = corpus::interior_bump(&g, BoundaryFlavor::Ht, DegreeMask::single(1))?;
    for sp in SectorPoint::sweep(0.1, 10.0, 3, 2.0, 2)? {
        let u = hodge_resolvent(&sp, &bump, BoundaryFlavor::Ht)?;
        let r = navier_slip_residual(&u, hodgehalf::tolerances::BOUNDARY_STENCIL_ORDER)?;
        slip.see(r.max() / u.norm_l2());
    }
    Ok(vec![tangential.done(), normal.done(), slip.done()])
}

fn evolution(ctx: &Context) -> Result<Vec<Check>> {
    let g = ctx.grid;
    let tol = &ctx.tol;
    let seed = ctx.corpus().seeds[0];
    let (inner_r, _) = ctx.band();
    let slow = (inner_r, (4.0 * inner_r).min(g.max_frequency()));
    let band = |a: f64, b: f64, s: u64| -> Result<HalfField> {
        let u = synthesize(&TestFunctionSpec::annulus(a, b, s), &g, DegreeMask::single(1))?;
        Ok(symmetrize(&u, BoundaryFlavor::Ht)?)
    };
    let u0 = leray_halfspace(&band(slow.0, slow.1, seed)?)?.0;
    let forcing = Arc::new(SeparableForcing {
        profile: band(slow.0, slow.1, seed + 1)?,
        time: Arc::new(|t: f64| (2.0 * PI * t).sin()),
    });

    let mut conv = Check {
        name: "momentum_residual_order".into(),
        worst: f64::NAN,
        tolerance: tol.convergence_high,
        passed: false,
    };
    let mut solenoidal = Tally::new("stokes_states_solenoidal", tol.half_space_decomp);
    let residuals = [32usize, 64, 128]
        .iter()
        .map(|&m| {
            let (traj, _) = solve_navier_slip(forcing.clone(), &u0, TimeGrid::new(1.0, m)?, false)?;
            for u in &traj.states {
                solenoidal.see(delta_half(u)?.norm_l2() / u.norm_l2().max(f64::MIN_POSITIVE));
            }
            Ok(momentum_residual(&traj)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    conv.passed = ratios
        .iter()
        .all(|r| (tol.convergence_low..=tol.convergence_high).contains(r));
    // the reported value is the ratio furthest from 4
    conv.worst = ratios
        .iter()
        .copied()
        .max_by(|a, b| (a - 4.0).abs().total_cmp(&(b - 4.0).abs()))
        .unwrap_or(f64::NAN);

    let fast = (inner_r.max(g.max_frequency() / 8.0), g.max_frequency() * 0.7);
    let v0 = leray_halfspace(&band(fast.0, fast.1, seed + 2)?)?.0;
    let bank = FilterBank::with_default_window(&g)?;
    let options = MaxRegOptions {
        allow_incomplete: true,
        ..MaxRegOptions::default()
    };
    let reports = [1.0, 10.0]
        .iter()
        .map(|&t| {
            let traj = solve_hodge_stokes(Arc::new(ZeroForcing::like(&v0)?), &v0, TimeGrid::new(t, 64)?, false)?;
            Ok(max_reg_report(
                &traj,
                &SpaceParams::besov(0.0, 2.0, 2.0),
                &bank,
                &options,
            )?)
        })
        .collect::<Result<Vec<_>>>()?;
    let spread = ratio_spread(&reports);
    let maxreg = Check {
        name: "maxreg_ratio_spread".into(),
        worst: spread,
        tolerance: tol.maxreg_spread,
        passed: spread < tol.maxreg_spread,
    };
    Ok(vec![conv, solenoidal.done(), maxreg])
}
