//! The five subcommands.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context as _, Result};
use hodgehalf::calculus::leray_wholespace;
use hodgehalf::evolution::{
    max_reg_report, momentum_residual, ratio_spread, solve_hodge_heat, solve_hodge_stokes, solve_navier_slip,
    ConstantForcing, Forcing, MaxRegOptions, MaxRegReport, SeparableForcing, TimeGrid, Trajectory, ZeroForcing,
};
use hodgehalf::field::{FormField, Grid};
use hodgehalf::half_space::{
    delta_half, extend, leray_halfspace, q_projector, restrict, symmetrize, BoundaryFlavor, HalfField,
};
use hodgehalf::littlewood_paley::{space_norm_spectral, FilterBank, NormKind, SpaceParams};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{CorpusKind, ForcingKind, RunConfig, SpaceSpec, SystemName};
use crate::report::{num, write_json, Table};
use crate::suites::{self, Context, VerifyOutcome};
use crate::{corpus, ConfigError, Status};

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

fn shifted(cfg: &RunConfig, seed: u64) -> crate::config::CorpusSpec {
    let mut spec = cfg.corpus.clone();
    spec.seeds = spec.seeds.iter().map(|s| s.wrapping_add(seed)).collect();
    spec
}

fn fields_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out.join("fields");
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn meta(pairs: &[(&str, serde_json::Value)]) -> BTreeMap<String, serde_json::Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Relative zero-mode mass below which a loaded field counts as mean-free;
/// the container stores single precision.
const STORAGE_MEAN_REL: f64 = 1e-6;

/// Drops a mean that is only single-precision storage error.
fn strip_storage_mean(u: FormField) -> Result<FormField> {
    let spectrum = u.fft()?;
    if spectrum.zero_mode_norm() > STORAGE_MEAN_REL * spectrum.norm_l2() {
        return Ok(u);
    }
    let parts = u
        .components()
        .map(|(b, c)| {
            let m = u.mean(b).expect("present blade");
            (b, c.iter().map(|x| x - m).collect())
        })
        .collect();
    Ok(FormField::from_components(*u.grid(), parts)?)
}

fn load_form(path: &Path) -> Result<FormField> {
    let u = FormField::load(path).map_err(|e| ConfigError(format!("input field {}: {e}", path.display())))?;
    strip_storage_mean(u)
}

fn load_half(path: &Path, flavor: BoundaryFlavor) -> Result<HalfField> {
    let u = HalfField::load(path).map_err(|e| ConfigError(format!("input field {}: {e}", path.display())))?;
    match u.flavor() {
        Some(f) if f != flavor => {
            Err(ConfigError(format!("input field has flavor {f}, the config asks for {flavor}")).into())
        }
        _ => {
            let u = u.with_flavor(Some(flavor));
            Ok(restrict(&strip_storage_mean(extend(&u)?)?, Some(flavor))?)
        }
    }
}

fn whole_fields(cfg: &RunConfig, grid: &Grid, seed: u64) -> Result<Vec<(String, FormField)>> {
    match &cfg.input {
        Some(path) => Ok(vec![("input".into(), load_form(path)?)]),
        None => corpus::whole_space(grid, &shifted(cfg, seed)),
    }
}

fn half_fields(cfg: &RunConfig, grid: &Grid, seed: u64, flavor: BoundaryFlavor) -> Result<Vec<(String, HalfField)>> {
    match &cfg.input {
        Some(path) => Ok(vec![("input".into(), load_half(path, flavor)?)]),
        None => corpus::half_space(grid, &shifted(cfg, seed), flavor),
    }
}

pub fn verify(cfg: &RunConfig, seed: u64) -> Result<Status> {
    let ctx = Context {
        config: cfg,
        grid: cfg.grid.build()?,
        tol: cfg.tolerances,
        seed,
    };
    let mut table = Table::new(&["suite", "check", "worst", "tolerance", "passed"]);
    let mut outcomes: Vec<VerifyOutcome> = Vec::new();
    for name in &cfg.suites {
        let outcome = suites::run(name, &ctx).with_context(|| format!("suite {name}"))?;
        for c in &outcome.checks {
            println!(
                "{:<14} {:<34} {} worst {:.3e} tol {:.1e}",
                outcome.suite,
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.worst,
                c.tolerance
            );
            table.push(vec![
                outcome.suite.clone(),
                c.name.clone(),
                num(c.worst),
                num(c.tolerance),
                c.passed.to_string(),
            ]);
        }
        outcomes.push(outcome);
    }
    table.write(&cfg.out.join("verify.csv"))?;
    write_json(&cfg.out.join("verify.json"), &outcomes)?;
    Ok(if outcomes.iter().all(VerifyOutcome::ok) {
        Status::Passed
    } else {
        Status::Violations
    })
}

const DECOMPOSE_HEADER: [&str; 10] = [
    "label",
    "norm_u",
    "norm_first",
    "norm_second",
    "g_mass_ratio",
    "orthogonality",
    "recomposition",
    "passed",
    "status",
    "reason",
];

struct Split {
    norm_u: f64,
    first: f64,
    second: f64,
    inner: Complex64,
    recomposition: f64,
}

impl Split {
    fn row(&self, label: &str, tol: f64) -> (Vec<String>, bool) {
        let u2 = self.norm_u * self.norm_u;
        let orth = ratio(self.inner.norm(), u2);
        let recomp = ratio(self.recomposition, self.norm_u);
        let passed = orth < tol && recomp < tol;
        let row = vec![
            label.to_string(),
            num(self.norm_u),
            num(self.first),
            num(self.second),
            num(ratio(self.second * self.second, u2)),
            num(orth),
            num(recomp),
            passed.to_string(),
            "ok".into(),
            String::new(),
        ];
        (row, passed)
    }
}

fn rejected(label: &str, width: usize, reason: &str) -> Vec<String> {
    let mut row = vec![label.to_string()];
    row.resize(width - 2, String::new());
    row.push("rejected".into());
    row.push(reason.to_string());
    row
}

/// `u = Pu + Gu` on the whole space, or the half-space split for `Ht`/`Hn`.
pub fn decompose(cfg: &RunConfig, seed: u64) -> Result<Status> {
    let grid = cfg.grid.build()?;
    let dir = fields_dir(cfg)?;
    let mut table = Table::new(&DECOMPOSE_HEADER);
    let mut all_ok = true;
    match cfg.flavor {
        None => {
            let tol = cfg.tolerances.whole_space_decomp;
            for (label, u) in whole_fields(cfg, &grid, seed)? {
                match leray_wholespace(&u) {
                    Ok((p, g)) => {
                        let split = Split {
                            norm_u: u.norm_l2(),
                            first: p.norm_l2(),
                            second: g.norm_l2(),
                            inner: p.inner_l2(&g)?,
                            recomposition: p.add(&g)?.sub(&u)?.norm_l2(),
                        };
                        let (row, ok) = split.row(&label, tol);
                        all_ok &= ok;
                        table.push(row);
                        let m = meta(&[("source", json!(label))]);
                        p.save(&dir.join(format!("{label}_P.hhf")), m.clone())?;
                        g.save(&dir.join(format!("{label}_G.hhf")), m)?;
                    }
                    Err(e) => table.push(rejected(&label, DECOMPOSE_HEADER.len(), &e.to_string())),
                }
            }
        }
        Some(flavor) => {
            let (split_fn, names): (fn(&HalfField) -> hodgehalf::Result<(HalfField, HalfField)>, _) = match flavor {
                BoundaryFlavor::Ht => (leray_halfspace, ("P", "G")),
                BoundaryFlavor::Hn => (q_projector, ("Q", "R")),
                other => {
                    return Err(ConfigError(format!("decompose needs flavor Ht or Hn, got {other}")).into());
                }
            };
            let tol = cfg.tolerances.half_space_decomp;
            for (label, u) in half_fields(cfg, &grid, seed, flavor)? {
                match split_fn(&u) {
                    Ok((a, b)) => {
                        let split = Split {
                            norm_u: u.norm_l2(),
                            first: a.norm_l2(),
                            second: b.norm_l2(),
                            inner: a.inner_l2(&b)?,
                            recomposition: a.add(&b)?.sub(&u)?.norm_l2(),
                        };
                        // orthogonality is only resolved to the half-space quadrature accuracy
                        let (row, ok) = split.row(&label, tol.max(cfg.tolerances.half_space_ortho));
                        all_ok &= ok;
                        table.push(row);
                        let m = meta(&[("source", json!(label)), ("flavor", json!(flavor))]);
                        a.save(&dir.join(format!("{label}_{}.hhf", names.0)), m.clone())?;
                        b.save(&dir.join(format!("{label}_{}.hhf", names.1)), m)?;
                    }
                    Err(e) => table.push(rejected(&label, DECOMPOSE_HEADER.len(), &e.to_string())),
                }
            }
        }
    }
    table.write(&cfg.out.join("decompose.csv"))?;
    println!("decompose: {} fields", table.len());
    Ok(if all_ok { Status::Passed } else { Status::Violations })
}

fn flavor_for(cfg: &RunConfig) -> Result<BoundaryFlavor> {
    let system = cfg.evolution.system;
    match (system, cfg.flavor) {
        (SystemName::HodgeHeat, f) => Ok(f.unwrap_or(BoundaryFlavor::Ht)),
        (_, None | Some(BoundaryFlavor::Ht)) => Ok(BoundaryFlavor::Ht),
        (_, Some(f)) => Err(ConfigError(format!("{system:?} runs with flavor Ht, got {f}")).into()),
    }
}

/// Initial datum and forcing profile from the first corpus seed.
fn evolution_data(cfg: &RunConfig, grid: &Grid, seed: u64, flavor: BoundaryFlavor) -> Result<(HalfField, HalfField)> {
    let mut spec = shifted(cfg, seed);
    let base = spec.seeds[0];
    let u0 = match &cfg.input {
        Some(path) => load_half(path, flavor)?,
        None => symmetrize(&corpus::member(grid, &spec, CorpusKind::Annulus, base)?, flavor)?,
    };
    if u0.grid() != grid {
        return Err(ConfigError("input field grid differs from the configured grid".into()).into());
    }
    // the forcing lives in the same degrees as the datum
    spec.degrees = u0.mask().degrees().collect();
    let profile = symmetrize(
        &corpus::member(grid, &spec, CorpusKind::Annulus, base.wrapping_add(1))?,
        flavor,
    )?;
    Ok((u0, profile))
}

fn forcing(kind: ForcingKind, profile: HalfField) -> Result<Arc<dyn Forcing>> {
    Ok(match kind {
        ForcingKind::Zero => Arc::new(ZeroForcing::like(&profile)?),
        ForcingKind::Constant => Arc::new(ConstantForcing(profile)),
        ForcingKind::Sine => Arc::new(SeparableForcing {
            profile,
            time: Arc::new(|t: f64| (2.0 * PI * t).sin()),
        }),
    })
}

fn integrate(
    cfg: &RunConfig,
    f: Arc<dyn Forcing>,
    u0: &HalfField,
    t: f64,
    flavor: BoundaryFlavor,
) -> Result<Trajectory> {
    let e = &cfg.evolution;
    let time = TimeGrid::new(t, e.steps)?;
    Ok(match e.system {
        SystemName::HodgeHeat => solve_hodge_heat(f, u0, time, flavor)?,
        SystemName::HodgeStokes => solve_hodge_stokes(f, u0, time, e.auto_project)?,
        SystemName::NavierSlip => solve_navier_slip(f, u0, time, e.auto_project)?.0,
    })
}

pub fn solve(cfg: &RunConfig, seed: u64) -> Result<Status> {
    let grid = cfg.grid.build()?;
    let flavor = flavor_for(cfg)?;
    let (u0, profile) = evolution_data(cfg, &grid, seed, flavor)?;
    let f = forcing(cfg.evolution.forcing, profile)?;
    let dir = fields_dir(cfg)?;
    let mut table = Table::new(&[
        "t_final",
        "step",
        "t",
        "norm_l2",
        "source_l2",
        "delta_l2",
        "pressure_l2",
    ]);
    let mut summary = Vec::new();
    let mut finite = true;
    for (run, &t_final) in cfg.evolution.t_final.iter().enumerate() {
        let traj = integrate(cfg, f.clone(), &u0, t_final, flavor)?;
        for (m, u) in traj.states.iter().enumerate() {
            let pressure = traj.pressure.as_ref().map_or(0.0, |p| p[m].norm_l2());
            let delta = delta_half(u).map(|v| v.norm_l2()).unwrap_or(f64::NAN);
            let norm = u.norm_l2();
            finite &= norm.is_finite();
            table.push(vec![
                num(t_final),
                m.to_string(),
                num(traj.time.node(m)),
                num(norm),
                num(traj.sources[m].norm_l2()),
                num(delta),
                num(pressure),
            ]);
        }
        let residual = if traj.system == hodgehalf::evolution::System::NavierSlip {
            Some(momentum_residual(&traj)?)
        } else {
            None
        };
        let last = traj.states.last().expect("at least one node");
        let path = dir.join(format!("solve_final_{run}.hhf"));
        last.save(
            &path,
            meta(&[
                ("system", json!(traj.system.to_string())),
                ("t_final", json!(t_final)),
                ("steps", json!(traj.time.steps())),
            ]),
        )?;
        summary.push(json!({
            "system": traj.system.to_string(),
            "t_final": t_final,
            "steps": traj.time.steps(),
            "final_norm_l2": last.norm_l2(),
            "momentum_residual": residual,
            "final_state": path.file_name().map(|p| p.to_string_lossy().into_owned()),
        }));
    }
    table.write(&cfg.out.join("solve.csv"))?;
    write_json(&cfg.out.join("solve.json"), &summary)?;
    println!("solve: {} runs, {} rows", summary.len(), table.len());
    Ok(if finite { Status::Passed } else { Status::Violations })
}

const MAXREG_HEADER: [&str; 20] = [
    "system",
    "kind",
    "s",
    "p",
    "q",
    "homogeneous",
    "t_final",
    "steps",
    "sup_state",
    "time_derivative",
    "hessian",
    "pressure",
    "forcing",
    "initial",
    "lhs",
    "rhs",
    "ratio",
    "status",
    "reason",
    "complete",
];

fn kind_name(kind: NormKind) -> &'static str {
    match kind {
        NormKind::Besov => "besov",
        NormKind::Sobolev => "sobolev",
    }
}

fn space_cells(sp: &SpaceParams) -> Vec<String> {
    vec![
        kind_name(sp.kind).into(),
        num(sp.s),
        num(sp.p),
        num(sp.q),
        sp.homogeneous.to_string(),
    ]
}

fn report_row(sp: &SpaceParams, r: &MaxRegReport, complete: bool) -> Vec<String> {
    let mut row = vec![r.system.to_string()];
    row.extend(space_cells(sp));
    row.extend([num(r.t_final), r.steps.to_string()]);
    row.extend(
        [
            r.sup_state,
            r.time_derivative,
            r.hessian,
            r.pressure,
            r.forcing,
            r.initial,
            r.lhs,
            r.rhs,
            r.ratio,
        ]
        .map(num),
    );
    row.extend(["ok".into(), String::new(), complete.to_string()]);
    row
}

/// Completeness of the trace space `Ḃ^{s+2−2/q}_{p,q}` the solution lives in.
fn trace_complete(sp: &SpaceParams, n: usize) -> bool {
    let shift = if sp.q.is_infinite() { 2.0 } else { 2.0 - 2.0 / sp.q };
    let trace = SpaceParams { s: sp.s + shift, ..*sp };
    hodgehalf::littlewood_paley::completeness_ok(&trace, n)
}

pub fn maxreg(cfg: &RunConfig, seed: u64) -> Result<Status> {
    let grid = cfg.grid.build()?;
    let flavor = flavor_for(cfg)?;
    let (u0, profile) = evolution_data(cfg, &grid, seed, flavor)?;
    let f = forcing(cfg.evolution.forcing, profile)?;
    let bank = FilterBank::with_default_window(&grid)?;
    let options = MaxRegOptions {
        allow_incomplete: cfg.evolution.allow_incomplete,
        quadrature_tol: cfg.evolution.quadrature_tol,
    };
    let trajectories = cfg
        .evolution
        .t_final
        .iter()
        .map(|&t| integrate(cfg, f.clone(), &u0, t, flavor))
        .collect::<Result<Vec<_>>>()?;
    let system = trajectories[0].system.to_string();

    let mut table = Table::new(&MAXREG_HEADER);
    let mut spreads = Table::new(&[
        "system",
        "kind",
        "s",
        "p",
        "q",
        "homogeneous",
        "runs",
        "spread",
        "tolerance",
        "passed",
    ]);
    let tol = cfg.tolerances.maxreg_spread;
    let mut all_ok = true;
    for space in &cfg.spaces {
        let sp = space.params();
        let complete = trace_complete(&sp, grid.dim());
        let mut reports = Vec::new();
        for traj in &trajectories {
            match max_reg_report(traj, &sp, &bank, &options) {
                Ok(r) => {
                    table.push(report_row(&sp, &r, complete));
                    reports.push(r);
                }
                Err(e) => {
                    let mut row = vec![system.clone()];
                    row.extend(space_cells(&sp));
                    row.extend([num(traj.time.t_final()), traj.time.steps().to_string()]);
                    row.resize(MAXREG_HEADER.len() - 3, String::new());
                    row.extend(["rejected".into(), e.to_string(), complete.to_string()]);
                    table.push(row);
                }
            }
        }
        if !reports.is_empty() {
            let spread = ratio_spread(&reports);
            let passed = spread < tol;
            all_ok &= passed;
            let mut row = vec![system.clone()];
            row.extend(space_cells(&sp));
            row.extend([reports.len().to_string(), num(spread), num(tol), passed.to_string()]);
            spreads.push(row);
        }
    }
    table.write(&cfg.out.join("maxreg.csv"))?;
    spreads.write(&cfg.out.join("maxreg_spread.csv"))?;
    println!("maxreg: {} rows, {} spaces evaluated", table.len(), spreads.len());
    Ok(if all_ok { Status::Passed } else { Status::Violations })
}

fn space_norm(sp: &SpaceSpec, bank: &FilterBank, spectrum: &hodgehalf::field::SpectralField) -> hodgehalf::Result<f64> {
    space_norm_spectral(&sp.params(), bank, spectrum)
}

/// Norms of every field in every configured space.
pub fn normtable(cfg: &RunConfig, seed: u64) -> Result<Status> {
    let grid = cfg.grid.build()?;
    let bank = FilterBank::with_default_window(&grid)?;
    // half-space norms are those of the reflection extension, scaled by 2^{-1/p}
    let spectra: Vec<(String, hodgehalf::Result<_>, bool)> = match cfg.flavor {
        None => whole_fields(cfg, &grid, seed)?
            .into_iter()
            .map(|(label, u)| (label, u.fft(), false))
            .collect(),
        Some(flavor) => half_fields(cfg, &grid, seed, flavor)?
            .into_iter()
            .map(|(label, u)| (label, extend(&u).and_then(|e| e.fft()), true))
            .collect(),
    };
    let mut table = Table::new(&[
        "label",
        "kind",
        "s",
        "p",
        "q",
        "homogeneous",
        "norm",
        "status",
        "reason",
    ]);
    for (label, spectrum, half) in &spectra {
        for space in &cfg.spaces {
            let sp = space.params();
            let mut row = vec![label.clone()];
            row.extend(space_cells(&sp));
            let norm = spectrum.as_ref().map_err(|e| e.to_string()).and_then(|s| {
                space_norm(space, &bank, s)
                    .map(|v| if *half { v * 2f64.powf(-1.0 / sp.p) } else { v })
                    .map_err(|e| e.to_string())
            });
            match norm {
                Ok(v) => row.extend([num(v), "ok".into(), String::new()]),
                Err(reason) => row.extend([String::new(), "rejected".into(), reason]),
            }
            table.push(row);
        }
    }
    table.write(&cfg.out.join("normtable.csv"))?;
    println!("normtable: {} rows", table.len());
    Ok(Status::Passed)
}
