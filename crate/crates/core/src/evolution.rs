//! Hodge-heat, Hodge–Stokes and Navier-slip Stokes evolution on `R^n_+`,
//! plus the maximal-regularity ratio harness.

use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{leray_symbol, Multiplier, SectorPoint};
use crate::error::{Error, Result};
use crate::field::{DegreeMask, Grid, SpectralField};
use crate::half_space::{extend_as, hodge_resolvent, leray_halfspace, restrict, BoundaryFlavor, HalfField};
use crate::littlewood_paley::{completeness_ok, lq_norm, spectral_lp_norm, FilterBank, NormKind, SpaceParams};
use crate::tolerances::HALF_SPACE_DECOMP;

/// Uniform nodes `t_m = m T / M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_final: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidParameter("at least one time step is required".into()));
        }
        Ok(Self { t_final, steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn node(&self, m: usize) -> f64 {
        self.t_final * m as f64 / self.steps as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|m| self.node(m)).collect()
    }
}

/// Time-dependent source `f(t)`.
pub trait Forcing: Send + Sync {
    fn at(&self, t: f64) -> HalfField;

    /// True when `at` is identically zero; lets solvers skip transforms.
    fn is_zero(&self) -> bool {
        false
    }

    /// `Some((F, g(t)))` when `f(t) = g(t) F` for a fixed profile `F`, so the
    /// profile needs to be transformed only once.
    fn separated(&self, _t: f64) -> Option<(&HalfField, f64)> {
        None
    }
}

/// `f ≡ 0` with a given shape.
pub struct ZeroForcing {
    template: HalfField,
}

impl ZeroForcing {
    pub fn new(grid: Grid, flavor: BoundaryFlavor, mask: DegreeMask) -> Result<Self> {
        Ok(Self {
            template: HalfField::zeros(grid, Some(flavor), mask)?,
        })
    }

    pub fn like(u: &HalfField) -> Result<Self> {
        Ok(Self {
            template: HalfField::zeros(*u.grid(), u.flavor(), u.mask())?,
        })
    }
}

impl Forcing for ZeroForcing {
    fn at(&self, _t: f64) -> HalfField {
        self.template.clone()
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// `f(t) = F` for all `t`.
pub struct ConstantForcing(pub HalfField);

impl Forcing for ConstantForcing {
    fn at(&self, _t: f64) -> HalfField {
        self.0.clone()
    }

    fn separated(&self, _t: f64) -> Option<(&HalfField, f64)> {
        Some((&self.0, 1.0))
    }
}

/// `f(t) = g(t) F`.
pub struct SeparableForcing {
    pub profile: HalfField,
    pub time: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Forcing for SeparableForcing {
    fn at(&self, t: f64) -> HalfField {
        self.profile.scale(Complex64::new((self.time)(t), 0.0))
    }

    fn separated(&self, t: f64) -> Option<(&HalfField, f64)> {
        Some((&self.profile, (self.time)(t)))
    }
}

/// Piecewise-linear interpolation between snapshots, constant outside.
pub struct SampledForcing {
    times: Vec<f64>,
    snapshots: Vec<HalfField>,
}

impl SampledForcing {
    pub fn new(times: Vec<f64>, snapshots: Vec<HalfField>) -> Result<Self> {
        if times.is_empty() || times.len() != snapshots.len() {
            return Err(Error::ShapeMismatch(
                "sample times and snapshots differ in length".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("sample times must increase".into()));
        }
        Ok(Self { times, snapshots })
    }
}

impl Forcing for SampledForcing {
    fn at(&self, t: f64) -> HalfField {
        let last = self.times.len() - 1;
        if t <= self.times[0] {
            return self.snapshots[0].clone();
        }
        if t >= self.times[last] {
            return self.snapshots[last].clone();
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        self.snapshots[i]
            .scale(Complex64::new(1.0 - w, 0.0))
            .axpy(Complex64::new(w, 0.0), &self.snapshots[i + 1])
            .expect("snapshots share a shape")
    }
}

/// Which evolution system a trajectory solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    HodgeHeat,
    HodgeStokes,
    NavierSlip,
}

impl std::fmt::Display for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            System::HodgeHeat => "hodge_heat",
            System::HodgeStokes => "hodge_stokes",
            System::NavierSlip => "navier_slip",
        })
    }
}

/// Node values of a computed solution.
#[derive(Clone)]
pub struct Trajectory {
    pub system: System,
    pub flavor: BoundaryFlavor,
    pub time: TimeGrid,
    /// `u(t_m)`, `m = 0..=M`.
    pub states: Vec<HalfField>,
    /// Source actually driving `u` at the nodes (`Pf` for the Stokes systems).
    pub sources: Vec<HalfField>,
    /// Pressure gradient `∇p(t_m)` (Navier-slip only).
    pub pressure: Option<Vec<HalfField>>,
    pub initial: HalfField,
    pub forcing: Arc<dyn Forcing>,
}

/// Exact heat propagation plus the midpoint rule for the Duhamel integral,
/// on the extended spectrum.
struct Stepper {
    flavor: BoundaryFlavor,
    project: bool,
    profile: OnceLock<SourceParts>,
}

/// Extended spectrum of a source and its Leray parts.
#[derive(Clone)]
struct SourceParts {
    raw: SpectralField,
    driving: SpectralField,
    gradient: Option<SpectralField>,
}

impl SourceParts {
    fn scale(&self, c: f64) -> Self {
        let c = Complex64::new(c, 0.0);
        Self {
            raw: self.raw.scale(c),
            driving: self.driving.scale(c),
            gradient: self.gradient.as_ref().map(|g| g.scale(c)),
        }
    }
}

impl Stepper {
    fn new(flavor: BoundaryFlavor, project: bool) -> Self {
        Self {
            flavor,
            project,
            profile: OnceLock::new(),
        }
    }

    fn split(&self, f: &HalfField) -> Result<SourceParts> {
        let raw = extend_as(f, self.flavor)?.fft()?;
        if self.project {
            let (p, g) = leray_symbol(&raw)?;
            Ok(SourceParts {
                raw,
                driving: p,
                gradient: Some(g),
            })
        } else {
            Ok(SourceParts {
                driving: raw.clone(),
                raw,
                gradient: None,
            })
        }
    }

    fn parts(&self, forcing: &dyn Forcing, t: f64) -> Result<SourceParts> {
        match forcing.separated(t) {
            Some((profile, g)) => {
                if self.profile.get().is_none() {
                    let _ = self.profile.set(self.split(profile)?);
                }
                Ok(self.profile.get().expect("initialized above").scale(g))
            }
            None => self.split(&forcing.at(t)),
        }
    }

    fn source_spectrum(&self, forcing: &dyn Forcing, t: f64) -> Result<SpectralField> {
        Ok(self.parts(forcing, t)?.driving)
    }

    /// State at `t0 + tau` from the state spectrum at `t0`.
    fn advance(&self, state: &SpectralField, forcing: &dyn Forcing, t0: f64, tau: f64) -> Result<SpectralField> {
        let free = Multiplier::Heat(tau).apply(state)?;
        if forcing.is_zero() {
            return Ok(free);
        }
        let mid = self.source_spectrum(forcing, t0 + 0.5 * tau)?;
        let duhamel = Multiplier::Heat(0.5 * tau).apply(&mid)?;
        free.axpy(Complex64::new(tau, 0.0), &duhamel)
    }
}

fn check_shape(u0: &HalfField, f0: &HalfField) -> Result<()> {
    if u0.grid() != f0.grid() || u0.mask() != f0.mask() {
        return Err(Error::ShapeMismatch(
            "forcing and initial datum differ in grid or degrees".into(),
        ));
    }
    Ok(())
}

fn run(
    system: System,
    forcing: Arc<dyn Forcing>,
    u0: HalfField,
    time: TimeGrid,
    flavor: BoundaryFlavor,
    project: bool,
) -> Result<Trajectory> {
    check_shape(&u0, &forcing.at(0.0))?;
    let stepper = Stepper::new(flavor, project);
    let dt = time.dt();
    let mut state = extend_as(&u0, flavor)?.fft()?;
    let mut states = Vec::with_capacity(time.steps() + 1);
    states.push(u0.clone());
    for m in 0..time.steps() {
        state = stepper.advance(&state, forcing.as_ref(), time.node(m), dt)?;
        states.push(restrict(&state.ifft(), Some(flavor))?);
    }
    let sources = time
        .nodes()
        .into_par_iter()
        .map(|t| restrict(&stepper.source_spectrum(forcing.as_ref(), t)?.ifft(), Some(flavor)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        system,
        flavor,
        time,
        states,
        sources,
        pressure: None,
        initial: u0,
        forcing,
    })
}

/// `∂_t u − Δ_H u = f`, `u(0) = u0`, with the given boundary flavor.
pub fn solve_hodge_heat(
    forcing: Arc<dyn Forcing>,
    u0: &HalfField,
    time: TimeGrid,
    flavor: BoundaryFlavor,
) -> Result<Trajectory> {
    let u0 = u0.with_flavor(Some(u0.flavor_checked(flavor)?));
    run(System::HodgeHeat, forcing, u0, time, flavor, false)
}

fn stokes_datum(u0: &HalfField, auto_project: bool) -> Result<HalfField> {
    let u0 = u0.with_flavor(Some(u0.flavor_checked(BoundaryFlavor::Ht)?));
    let (p, g) = leray_halfspace(&u0)?;
    if auto_project {
        return Ok(p);
    }
    let defect = g.norm_l2();
    if defect > HALF_SPACE_DECOMP * u0.norm_l2() {
        return Err(Error::Domain(format!(
            "initial datum is not solenoidal (‖u0 − Pu0‖ = {defect:.3e}); enable auto-projection"
        )));
    }
    Ok(u0)
}

/// Hodge–Stokes system: the Hodge-heat flow driven by `Pf` from `P u0`.
pub fn solve_hodge_stokes(
    forcing: Arc<dyn Forcing>,
    u0: &HalfField,
    time: TimeGrid,
    auto_project: bool,
) -> Result<Trajectory> {
    let u0 = stokes_datum(u0, auto_project)?;
    run(System::HodgeStokes, forcing, u0, time, BoundaryFlavor::Ht, true)
}

/// Navier-slip Stokes system on 1-forms; returns the trajectory and the
/// pressure gradients `∇p(t_m) = (I − P) f(t_m)`.
pub fn solve_navier_slip(
    forcing: Arc<dyn Forcing>,
    u0: &HalfField,
    time: TimeGrid,
    auto_project: bool,
) -> Result<(Trajectory, Vec<HalfField>)> {
    if u0.mask() != DegreeMask::single(1) {
        return Err(Error::ShapeMismatch("Navier-slip fields are 1-forms".into()));
    }
    let u0 = stokes_datum(u0, auto_project)?;
    let mut traj = run(System::NavierSlip, forcing.clone(), u0, time, BoundaryFlavor::Ht, true)?;
    let pressure = time
        .nodes()
        .into_par_iter()
        .map(|t| {
            let f = forcing.at(t).with_flavor(Some(BoundaryFlavor::Ht));
            Ok(leray_halfspace(&f)?.1)
        })
        .collect::<Result<Vec<_>>>()?;
    traj.pressure = Some(pressure.clone());
    Ok((traj, pressure))
}

impl HalfField {
    pub(crate) fn flavor_checked(&self, flavor: BoundaryFlavor) -> Result<BoundaryFlavor> {
        match self.flavor() {
            Some(f) if f != flavor => Err(Error::Flavor(format!("field has flavor {f}, expected {flavor}"))),
            _ => Ok(flavor),
        }
    }
}

/// Builds an `A`-regular datum `P (1 − Δ_H)^{−2} seed` for `q = ∞` reports.
pub fn a_regular_datum(seed: &HalfField) -> Result<HalfField> {
    let one = SectorPoint::new(Complex64::new(1.0, 0.0), 0.0)?;
    let once = hodge_resolvent(&one, seed, BoundaryFlavor::Ht)?;
    let twice = hodge_resolvent(&one, &once, BoundaryFlavor::Ht)?;
    Ok(leray_halfspace(&twice)?.0)
}

/// `‖∂_t u − Δu + ∇p − f‖₂` at interior nodes (central differences in
/// time, spectral in space), aggregated as the root mean square over nodes.
pub fn momentum_residual(traj: &Trajectory) -> Result<f64> {
    let m_total = traj.time.steps();
    if m_total < 2 {
        return Err(Error::InvalidParameter(
            "momentum residual needs at least two steps".into(),
        ));
    }
    let dt = traj.time.dt();
    let flavor = traj.flavor;
    let values = (1..m_total)
        .into_par_iter()
        .map(|m| {
            let dudt = traj.states[m + 1]
                .sub(&traj.states[m - 1])?
                .scale(Complex64::new(0.5 / dt, 0.0));
            let lap = restrict(
                &Multiplier::Laplacian
                    .apply(&extend_as(&traj.states[m], flavor)?.fft()?)?
                    .ifft(),
                Some(flavor),
            )?;
            let f = traj.forcing.at(traj.time.node(m)).with_flavor(Some(flavor));
            let mut r = dudt.sub(&lap)?.sub(&f)?;
            if let Some(p) = &traj.pressure {
                r = r.add(&p[m])?;
            } else if traj.system == System::HodgeStokes {
                // the Stokes system is driven by Pf; the remainder is a gradient
                r = r.add(&leray_halfspace(&f)?.1)?;
            }
            Ok(r.norm_l2().powi(2))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((values.iter().sum::<f64>() / values.len() as f64).sqrt())
}

/// Components of the maximal-regularity estimate for one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxRegReport {
    pub system: System,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub t_final: f64,
    pub steps: usize,
    /// `sup_t ‖u(t)‖_{Ḃ^{2+s−2/q}_{p,q}}` over nodes.
    pub sup_state: f64,
    /// `‖∂_t u‖_{L^q Ḃ^s_{p,q}}`.
    pub time_derivative: f64,
    /// `‖∇²u‖_{L^q Ḃ^s_{p,q}}`.
    pub hessian: f64,
    /// `‖∇p‖_{L^q Ḃ^s_{p,q}}` (zero unless Navier-slip).
    pub pressure: f64,
    /// `‖f‖_{L^q Ḃ^s_{p,q}}`.
    pub forcing: f64,
    /// `‖u0‖_{Ḃ^{2+s−2/q}_{p,q}}`, or `‖A u0‖_{Ḃ^s_{p,q}}` when `q = ∞`.
    pub initial: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Options of [`max_reg_report`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxRegOptions {
    /// Evaluate even when the completeness predicate fails.
    pub allow_incomplete: bool,
    /// Relative tolerance of the adaptive time quadrature.
    pub quadrature_tol: f64,
}

impl Default for MaxRegOptions {
    fn default() -> Self {
        Self {
            allow_incomplete: false,
            quadrature_tol: 1e-8,
        }
    }
}

/// Weights for the spatial quantities measured at one time.
#[derive(Clone, Copy)]
enum Quantity {
    TimeDerivative,
    Hessian,
    Pressure,
    Forcing,
}

/// Half-space homogeneous Besov norm `2^{−1/p} ‖E u‖_{Ḃ^s_{p,q}}` of a field
/// given by its extended spectrum, optionally times a radial weight.
///
/// Leakage is checked on the data (initial datum and forcing), not here: the
/// heat flow cannot widen a spectrum, and decayed states would otherwise be
/// judged by their rounding noise.
fn half_besov(params: &SpaceParams, bank: &FilterBank, spec: &SpectralField, weight: Option<&[f64]>) -> Result<f64> {
    let weighted;
    let target = match weight {
        Some(w) => {
            weighted = spec.multiply_real(w);
            &weighted
        }
        None => spec,
    };
    let (a, b) = bank.window();
    let blocks = (a..=b)
        .map(|j| {
            let block = target.multiply_real(bank.psi(j)?);
            Ok(2f64.powf(j as f64 * params.s) * spectral_lp_norm(&block, params.p)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(lq_norm(&blocks, params.q) * 2f64.powf(-1.0 / params.p))
}

/// `‖∇²u‖_{Ḃ^s_{p,q}}` with the pointwise Frobenius norm of the Hessian.
fn hessian_besov(params: &SpaceParams, bank: &FilterBank, spec: &SpectralField) -> Result<f64> {
    let grid = bank.grid();
    if params.p == 2.0 {
        return half_besov(params, bank, spec, Some(&grid.xi_sq()));
    }
    let n = grid.dim();
    let xi: Vec<Vec<f64>> = (1..=n).map(|a| grid.xi_axis(a)).collect();
    let (j_min, j_max) = bank.window();
    let mut blocks = Vec::new();
    for j in j_min..=j_max {
        let psi = bank.psi(j)?;
        let mut pointwise = vec![0.0; grid.len()];
        for a in 0..n {
            for b in a..n {
                let mult: f64 = if a == b { 1.0 } else { 2.0 };
                let w: Vec<f64> = (0..grid.len()).map(|i| -psi[i] * xi[a][i] * xi[b][i]).collect();
                let field = spec.multiply_real(&w).ifft();
                for (_, c) in field.components() {
                    pointwise
                        .iter_mut()
                        .zip(c)
                        .for_each(|(acc, v)| *acc += mult * v.norm_sqr());
                }
            }
        }
        let pw: Vec<f64> = pointwise.into_iter().map(f64::sqrt).collect();
        let norm = crate::field::lp_norm_of(&pw, grid.cell_volume(), params.p)?;
        blocks.push(2f64.powf(j as f64 * params.s) * norm);
    }
    Ok(lq_norm(&blocks, params.q) * 2f64.powf(-1.0 / params.p))
}

/// Evaluates the spatial quantities of a trajectory at arbitrary times.
struct Evaluator<'a> {
    traj: &'a Trajectory,
    stepper: Stepper,
    params: SpaceParams,
    bank: &'a FilterBank,
    node_spectra: Vec<SpectralField>,
    neg_xi_sq: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn state_at(&self, t: f64) -> Result<SpectralField> {
        let dt = self.traj.time.dt();
        let m = ((t / dt).floor() as usize).min(self.traj.time.steps());
        let t0 = self.traj.time.node(m);
        let tau = t - t0;
        if tau <= 1e-14 * dt.max(1.0) {
            return Ok(self.node_spectra[m].clone());
        }
        self.stepper
            .advance(&self.node_spectra[m], self.traj.forcing.as_ref(), t0, tau)
    }

    fn quantities(&self, t: f64, which: &[Quantity]) -> Result<Vec<f64>> {
        let u = self.state_at(t)?;
        let parts = if self.traj.forcing.is_zero() {
            let zero = self.node_spectra[0].scale(Complex64::new(0.0, 0.0));
            SourceParts {
                raw: zero.clone(),
                driving: zero,
                gradient: None,
            }
        } else {
            self.stepper.parts(self.traj.forcing.as_ref(), t)?
        };
        self.bank.check_leakage(&parts.raw)?;
        let SourceParts { raw, driving, gradient } = parts;
        which
            .iter()
            .map(|q| match q {
                Quantity::TimeDerivative => {
                    let dudt = u.multiply_real(&self.neg_xi_sq).add(&driving)?;
                    half_besov(&self.params, self.bank, &dudt, None)
                }
                Quantity::Hessian => hessian_besov(&self.params, self.bank, &u),
                Quantity::Pressure => match (&gradient, self.traj.system) {
                    (Some(g), System::NavierSlip) => half_besov(&self.params, self.bank, g, None),
                    _ => Ok(0.0),
                },
                Quantity::Forcing => half_besov(&self.params, self.bank, &raw, None),
            })
            .collect()
    }
}

/// Adaptive Simpson rule for a vector of integrands sharing evaluations.
fn adaptive_simpson<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: &[f64],
    fm: &[f64],
    fb: &[f64],
    tol: &[f64],
    depth: usize,
) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let h = b - a;
    let m = 0.5 * (a + b);
    let whole: Vec<f64> = (0..fa.len()).map(|i| h / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i])).collect();
    let (flm, frm) = rayon::join(|| f(0.5 * (a + m)), || f(0.5 * (m + b)));
    let (flm, frm) = (flm?, frm?);
    let left: Vec<f64> = (0..fa.len())
        .map(|i| h / 12.0 * (fa[i] + 4.0 * flm[i] + fm[i]))
        .collect();
    let right: Vec<f64> = (0..fa.len())
        .map(|i| h / 12.0 * (fm[i] + 4.0 * frm[i] + fb[i]))
        .collect();
    let converged = (0..fa.len()).all(|i| (left[i] + right[i] - whole[i]).abs() <= 15.0 * tol[i]);
    if converged || depth == 0 {
        return Ok((0..fa.len())
            .map(|i| left[i] + right[i] + (left[i] + right[i] - whole[i]) / 15.0)
            .collect());
    }
    let half_tol: Vec<f64> = tol.iter().map(|t| 0.5 * t).collect();
    let (l, r) = rayon::join(
        || adaptive_simpson(f, a, m, fa, &flm, fm, &half_tol, depth - 1),
        || adaptive_simpson(f, m, b, fm, &frm, fb, &half_tol, depth - 1),
    );
    let (l, r) = (l?, r?);
    Ok(l.iter().zip(&r).map(|(x, y)| x + y).collect())
}

/// Maximal-regularity estimate components of a trajectory.
///
/// Norms are homogeneous Besov norms `Ḃ^s_{p,q}` on the half-space, measured
/// through the reflection extension. `L^q` norms in time use adaptive
/// Simpson quadrature on each step, with states between nodes reconstructed
/// by the same exact-heat/midpoint propagation the solver uses.
pub fn max_reg_report(
    traj: &Trajectory,
    params: &SpaceParams,
    bank: &FilterBank,
    options: &MaxRegOptions,
) -> Result<MaxRegReport> {
    if params.kind != NormKind::Besov || !params.homogeneous {
        return Err(Error::InvalidParameter("reports use homogeneous Besov norms".into()));
    }
    params.validate()?;
    let n = traj.initial.dim();
    let q = params.q;
    let shift = 2.0 - if q.is_infinite() { 0.0 } else { 2.0 / q };
    let trace_params = SpaceParams {
        s: params.s + shift,
        ..*params
    };
    if !options.allow_incomplete && !completeness_ok(&trace_params, n) {
        return Err(Error::Completeness {
            s: trace_params.s,
            p: params.p,
            q,
            n,
        });
    }
    if bank.grid() != traj.initial.grid() {
        return Err(Error::ShapeMismatch(
            "filter bank grid differs from the trajectory grid".into(),
        ));
    }
    let flavor = traj.flavor;
    let node_spectra = traj
        .states
        .par_iter()
        .map(|u| extend_as(u, flavor)?.fft())
        .collect::<Result<Vec<_>>>()?;
    let neg_xi_sq: Vec<f64> = bank.grid().xi_sq().into_iter().map(|r| -r).collect();
    let eval = Evaluator {
        traj,
        stepper: Stepper::new(flavor, traj.system != System::HodgeHeat),
        params: *params,
        bank,
        node_spectra,
        neg_xi_sq,
    };

    let sup_state = eval
        .node_spectra
        .par_iter()
        .map(|s| half_besov(&trace_params, bank, s, None))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let initial_spec = &eval.node_spectra[0];
    bank.check_leakage(initial_spec)?;
    let initial = if q.is_infinite() {
        half_besov(params, bank, &initial_spec.multiply_real(&eval.neg_xi_sq), None)?
    } else {
        half_besov(&trace_params, bank, initial_spec, None)?
    };

    let which = [
        Quantity::TimeDerivative,
        Quantity::Hessian,
        Quantity::Pressure,
        Quantity::Forcing,
    ];
    let nodes = traj.time.nodes();
    let node_values = nodes
        .par_iter()
        .map(|&t| eval.quantities(t, &which))
        .collect::<Result<Vec<_>>>()?;
    let time_norms: Vec<f64> = if q.is_infinite() {
        (0..which.len())
            .map(|i| node_values.iter().map(|v| v[i]).fold(0.0, f64::max))
            .collect()
    } else {
        let powered: Vec<Vec<f64>> = node_values
            .iter()
            .map(|v| v.iter().map(|x| x.powf(q)).collect())
            .collect();
        let dt = traj.time.dt();
        let rough: Vec<f64> = (0..which.len())
            .map(|i| powered.iter().map(|v| v[i]).sum::<f64>() * dt)
            .collect();
        let f =
            |t: f64| -> Result<Vec<f64>> { Ok(eval.quantities(t, &which)?.into_iter().map(|x| x.powf(q)).collect()) };
        let steps = traj.time.steps();
        let per_step_tol: Vec<f64> = rough
            .iter()
            .map(|r| (options.quadrature_tol * r / steps as f64).max(1e-300))
            .collect();
        let pieces = (0..steps)
            .into_par_iter()
            .map(|m| {
                let (a, b) = (nodes[m], nodes[m + 1]);
                let fm = f(0.5 * (a + b))?;
                adaptive_simpson(&f, a, b, &powered[m], &fm, &powered[m + 1], &per_step_tol, 24)
            })
            .collect::<Result<Vec<_>>>()?;
        (0..which.len())
            .map(|i| pieces.iter().map(|p| p[i]).sum::<f64>().max(0.0).powf(1.0 / q))
            .collect()
    };

    let lhs = sup_state + time_norms[0] + time_norms[1] + time_norms[2];
    let rhs = time_norms[3] + initial;
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(MaxRegReport {
        system: traj.system,
        s: params.s,
        p: params.p,
        q,
        t_final: traj.time.t_final(),
        steps: traj.time.steps(),
        sup_state,
        time_derivative: time_norms[0],
        hessian: time_norms[1],
        pressure: time_norms[2],
        forcing: time_norms[3],
        initial,
        lhs,
        rhs,
        ratio,
    })
}

/// `max/min` of the ratios over a sweep (1 for a single report).
pub fn ratio_spread(reports: &[MaxRegReport]) -> f64 {
    let ratios: Vec<f64> = reports.iter().map(|r| r.ratio).collect();
    let max = ratios.iter().copied().fold(f64::MIN, f64::max);
    let min = ratios.iter().copied().fold(f64::MAX, f64::min);
    if ratios.is_empty() || min <= 0.0 {
        return if max <= 0.0 { 1.0 } else { f64::INFINITY };
    }
    max / min
}
