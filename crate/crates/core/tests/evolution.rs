mod common;

use std::sync::Arc;

use common::{half_rel, symmetric_s0};
use hodgehalf::algebra::Blade;
use hodgehalf::evolution::{
    a_regular_datum, max_reg_report, momentum_residual, ratio_spread, solve_hodge_heat, solve_hodge_stokes,
    solve_navier_slip, ConstantForcing, Forcing, MaxRegOptions, SampledForcing, SeparableForcing, System, TimeGrid,
    ZeroForcing,
};
use hodgehalf::field::{DegreeMask, Grid};
use hodgehalf::half_space::{
    d_half, delta_half, hodge_bc_residual, hodge_heat, leray_halfspace, navier_slip_residual, BoundaryFlavor, HalfField,
};
use hodgehalf::littlewood_paley::{FilterBank, SpaceParams};
use num_complex::Complex64;

use BoundaryFlavor::{Ht, N};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn solenoidal(grid: Grid, inner: f64, outer: f64, seed: u64) -> HalfField {
    leray_halfspace(&symmetric_s0(grid, &[1], Ht, inner, outer, seed))
        .unwrap()
        .0
}

fn sine_forcing(profile: HalfField) -> Arc<SeparableForcing> {
    Arc::new(SeparableForcing {
        profile,
        time: Arc::new(|t: f64| (2.0 * std::f64::consts::PI * t).sin()),
    })
}

#[test]
fn time_grid() {
    let t = TimeGrid::new(2.0, 4).unwrap();
    assert_eq!(t.nodes(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    assert_eq!(t.dt(), 0.5);
    assert!(TimeGrid::new(0.0, 4).is_err());
    assert!(TimeGrid::new(f64::INFINITY, 4).is_err());
    assert!(TimeGrid::new(1.0, 0).is_err());
}

#[test]
fn sampled_forcing_interpolates_linearly() {
    let g = Grid::new(2, 8, 2.0).unwrap();
    let a = HalfField::from_fn(g, Some(N), DegreeMask::single(0), |_, _| c(1.0)).unwrap();
    let b = a.scale(c(3.0));
    let f = SampledForcing::new(vec![0.0, 1.0], vec![a.clone(), b.clone()]).unwrap();
    assert_eq!(f.at(-1.0), a);
    assert_eq!(f.at(2.0), b);
    assert!((f.at(0.25).component(Blade::SCALAR).unwrap()[0] - c(1.5)).norm() < 1e-15);
    assert!(SampledForcing::new(vec![1.0, 0.0], vec![a.clone(), b]).is_err());
    assert!(SampledForcing::new(vec![0.0], vec![]).is_err());
}

#[test]
fn free_heat_flow_keeps_the_boundary_conditions() {
    // only the tangential component: a Neumann problem in each step
    let g = Grid::new(2, 256, 8.0).unwrap();
    let u0 = HalfField::from_fn(g, Some(Ht), DegreeMask::single(1), |b, x| {
        if b == Blade::axis(1) {
            c((-((x[0] - 0.4).powi(2) + (x[1] - 4.0).powi(2)) / 0.64).exp())
        } else {
            c(0.0)
        }
    })
    .unwrap();
    let traj = solve_hodge_heat(
        Arc::new(ZeroForcing::like(&u0).unwrap()),
        &u0,
        TimeGrid::new(1.0, 4).unwrap(),
        Ht,
    )
    .unwrap();
    for u in &traj.states[1..] {
        let r = hodge_bc_residual(u, 16).unwrap();
        assert!(r.max() < 1e-8 * u.norm_l2(), "{r:?}");
        assert!(u.component(Blade::axis(2)).unwrap().iter().all(|v| v.norm() < 1e-14));
    }
    let exact = hodge_heat(1.0, &u0, Ht).unwrap();
    assert!(half_rel(traj.states.last().unwrap(), &exact) < 1e-13);
}

#[test]
fn constant_forcing_on_a_single_mode() {
    // f = cos(ξ₁x₁)cos(ξ₂x₂) extends evenly; u(t) = (1 − e^{−t|ξ|²}) f / |ξ|²
    let g = Grid::new(2, 32, 8.0).unwrap();
    let k = g.frequency_step();
    let (a, b) = (2.0 * k, k);
    let f = HalfField::from_fn(g, Some(N), DegreeMask::single(0), |_, x| {
        c((a * x[0]).cos() * (b * x[1]).cos())
    })
    .unwrap();
    let u0 = HalfField::zeros(g, Some(N), DegreeMask::single(0)).unwrap();
    let traj = solve_hodge_heat(
        Arc::new(ConstantForcing(f.clone())),
        &u0,
        TimeGrid::new(2.0, 400).unwrap(),
        N,
    )
    .unwrap();
    let r2 = a * a + b * b;
    for m in [100, 250, 400] {
        let t = traj.time.node(m);
        let exact = f.scale(c((1.0 - (-t * r2).exp()) / r2));
        assert!(half_rel(&traj.states[m], &exact) < 1e-5, "t={t}");
    }
}

#[test]
fn heat_residual_converges_at_second_order() {
    let g = Grid::new(2, 32, 8.0).unwrap();
    let u0 = symmetric_s0(g, &[0, 1], Ht, 0.4, 1.5, 1);
    let forcing = sine_forcing(symmetric_s0(g, &[0, 1], Ht, 0.4, 1.5, 2));
    let residuals: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&m| {
            let traj = solve_hodge_heat(forcing.clone(), &u0, TimeGrid::new(1.0, m).unwrap(), Ht).unwrap();
            momentum_residual(&traj).unwrap()
        })
        .collect();
    for w in residuals.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.6..=4.4).contains(&ratio), "{residuals:?}");
    }
}

#[test]
fn shape_and_flavor_mismatches_are_errors() {
    let g = Grid::new(2, 16, 4.0).unwrap();
    let u0 = symmetric_s0(g, &[1], Ht, 1.0, 3.0, 1);
    let wrong = ZeroForcing::new(g, Ht, DegreeMask::single(0)).unwrap();
    assert!(solve_hodge_heat(Arc::new(wrong), &u0, TimeGrid::new(1.0, 2).unwrap(), Ht).is_err());
    let f = Arc::new(ZeroForcing::like(&u0).unwrap());
    assert!(solve_hodge_heat(f.clone(), &u0, TimeGrid::new(1.0, 2).unwrap(), N).is_err());
    let scalar = symmetric_s0(g, &[0], Ht, 1.0, 3.0, 1);
    assert!(solve_navier_slip(
        Arc::new(ZeroForcing::like(&scalar).unwrap()),
        &scalar,
        TimeGrid::new(1.0, 2).unwrap(),
        true
    )
    .is_err());
}

#[test]
fn stokes_rejects_non_solenoidal_data_unless_projecting() {
    let g = Grid::new(2, 32, 8.0).unwrap();
    let u0 = symmetric_s0(g, &[1], Ht, 0.5, 3.0, 3);
    let f = Arc::new(ZeroForcing::like(&u0).unwrap());
    let time = TimeGrid::new(1.0, 4).unwrap();
    assert!(solve_hodge_stokes(f.clone(), &u0, time, false).is_err());
    let traj = solve_hodge_stokes(f, &u0, time, true).unwrap();
    assert!(half_rel(&traj.initial, &leray_halfspace(&u0).unwrap().0) < 1e-15);
    assert_eq!(traj.system, System::HodgeStokes);
}

#[test]
fn free_stokes_flow_dissipates_energy() {
    let g = Grid::new(2, 32, 8.0).unwrap();
    let u0 = solenoidal(g, 0.5, 3.0, 4);
    let traj = solve_hodge_stokes(
        Arc::new(ZeroForcing::like(&u0).unwrap()),
        &u0,
        TimeGrid::new(2.0, 16).unwrap(),
        false,
    )
    .unwrap();
    let energy: Vec<f64> = traj.states.iter().map(HalfField::norm_l2).collect();
    assert!(energy.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn gradient_forcing_does_not_drive_stokes_flow() {
    let g = Grid::new(2, 32, 8.0).unwrap();
    let u0 = solenoidal(g, 0.5, 3.0, 5);
    let grad = d_half(&symmetric_s0(g, &[0], Ht, 0.5, 3.0, 6)).unwrap();
    let traj = solve_hodge_stokes(
        Arc::new(ConstantForcing(grad)),
        &u0,
        TimeGrid::new(1.0, 8).unwrap(),
        false,
    )
    .unwrap();
    for (m, u) in traj.states.iter().enumerate() {
        let free = hodge_heat(traj.time.node(m), &u0, Ht).unwrap();
        assert!(half_rel(u, &free) < 1e-9);
    }
}

#[test]
fn stokes_states_stay_solenoidal() {
    let g = Grid::new(3, 16, 4.0).unwrap();
    let u0 = solenoidal(g, 1.0, 4.0, 7);
    let f = symmetric_s0(g, &[1], Ht, 1.0, 4.0, 8);
    let traj = solve_hodge_stokes(sine_forcing(f), &u0, TimeGrid::new(0.5, 8).unwrap(), false).unwrap();
    for u in &traj.states {
        let (p, _) = leray_halfspace(u).unwrap();
        assert!(half_rel(&p, u) < 1e-9);
        assert!(delta_half(u).unwrap().norm_l2() <= 1e-9 * u.norm_l2());
    }
}

#[test]
fn navier_slip_special_forcings() {
    let g = Grid::new(2, 32, 8.0).unwrap();
    let zero = HalfField::zeros(g, Some(Ht), DegreeMask::single(1)).unwrap();
    let grad = d_half(&symmetric_s0(g, &[0], Ht, 0.5, 3.0, 9)).unwrap();
    let time = TimeGrid::new(1.0, 4).unwrap();
    let (traj, pressure) = solve_navier_slip(Arc::new(ConstantForcing(grad.clone())), &zero, time, false).unwrap();
    for (u, p) in traj.states.iter().zip(&pressure) {
        assert!(u.norm_l2() <= 1e-9 * grad.norm_l2());
        assert!(half_rel(p, &grad) < 1e-9);
    }
    let sol = solenoidal(g, 0.5, 3.0, 10);
    let (_, pressure) = solve_navier_slip(Arc::new(ConstantForcing(sol.clone())), &zero, time, false).unwrap();
    assert!(pressure.iter().all(|p| p.norm_l2() <= 1e-9 * sol.norm_l2()));
}

#[test]
fn navier_slip_pressure_is_a_gradient_and_the_slip_conditions_hold() {
    let g = Grid::new(2, 256, 8.0).unwrap();
    let u0 = solenoidal(g, 0.5, 3.0, 11);
    let f = symmetric_s0(g, &[1], Ht, 0.5, 3.0, 12);
    let (traj, pressure) = solve_navier_slip(sine_forcing(f), &u0, TimeGrid::new(0.5, 4).unwrap(), false).unwrap();
    for p in &pressure {
        assert!(d_half(p).unwrap().norm_l2() <= 1e-9 * p.norm_l2().max(1e-300));
    }
    for u in &traj.states {
        assert!(navier_slip_residual(u, 16).unwrap().max() < 1e-7 * u.norm_l2());
    }
}

#[test]
fn navier_slip_momentum_residual_vanishes_under_refinement() {
    let g = Grid::new(2, 32, 8.0).unwrap();
    let u0 = solenoidal(g, 0.4, 1.5, 13);
    let f = symmetric_s0(g, &[1], Ht, 0.4, 1.5, 14);
    let scale = f.norm_l2();
    let (traj, _) = solve_navier_slip(sine_forcing(f), &u0, TimeGrid::new(1.0, 8192).unwrap(), false).unwrap();
    let r = momentum_residual(&traj).unwrap();
    assert!(r < 1e-7 * scale, "{r:e} {scale:e}");
}

#[test]
fn restarting_matches_one_long_run() {
    let g = Grid::new(2, 32, 8.0).unwrap();
    let u0 = solenoidal(g, 0.5, 3.0, 15);
    let profile = symmetric_s0(g, &[1], Ht, 0.5, 3.0, 16);
    let shift = 1.0;
    let full = solve_hodge_stokes(
        sine_forcing(profile.clone()),
        &u0,
        TimeGrid::new(2.0, 16).unwrap(),
        false,
    )
    .unwrap();
    let first = solve_hodge_stokes(
        sine_forcing(profile.clone()),
        &u0,
        TimeGrid::new(1.0, 8).unwrap(),
        false,
    )
    .unwrap();
    let later = Arc::new(SeparableForcing {
        profile,
        time: Arc::new(move |t: f64| (2.0 * std::f64::consts::PI * (t + shift)).sin()),
    });
    let second = solve_hodge_stokes(
        later,
        first.states.last().unwrap(),
        TimeGrid::new(1.0, 8).unwrap(),
        false,
    )
    .unwrap();
    for m in 0..=8 {
        assert!(half_rel(&second.states[m], &full.states[8 + m]) < 1e-10);
    }
    // deterministic
    let again = solve_hodge_stokes(
        sine_forcing(first.initial.clone()),
        &u0,
        TimeGrid::new(1.0, 8).unwrap(),
        false,
    )
    .unwrap();
    let twice = solve_hodge_stokes(
        sine_forcing(first.initial.clone()),
        &u0,
        TimeGrid::new(1.0, 8).unwrap(),
        false,
    )
    .unwrap();
    assert_eq!(again.states, twice.states);
}

fn report_grid() -> (Grid, FilterBank) {
    let g = Grid::new(2, 64, 16.0).unwrap();
    let bank = FilterBank::with_default_window(&g).unwrap();
    (g, bank)
}

#[test]
fn empty_problem_reports_zero() {
    let (g, bank) = report_grid();
    let zero = HalfField::zeros(g, Some(Ht), DegreeMask::single(1)).unwrap();
    let traj = solve_hodge_stokes(
        Arc::new(ZeroForcing::like(&zero).unwrap()),
        &zero,
        TimeGrid::new(1.0, 4).unwrap(),
        false,
    )
    .unwrap();
    let r = max_reg_report(
        &traj,
        &SpaceParams::besov(0.0, 2.0, 1.0),
        &bank,
        &MaxRegOptions::default(),
    )
    .unwrap();
    assert_eq!((r.lhs, r.rhs, r.ratio), (0.0, 0.0, 0.0));
}

#[test]
fn reports_refuse_incomplete_spaces() {
    let (g, bank) = report_grid();
    let u0 = solenoidal(g, 2.0, 4.5, 17);
    let traj = solve_hodge_stokes(
        Arc::new(ZeroForcing::like(&u0).unwrap()),
        &u0,
        TimeGrid::new(1.0, 8).unwrap(),
        false,
    )
    .unwrap();
    // s + 2 − 2/q = 1 = n/p with q = 2
    let params = SpaceParams::besov(0.0, 2.0, 2.0);
    assert!(matches!(
        max_reg_report(&traj, &params, &bank, &MaxRegOptions::default()),
        Err(hodgehalf::Error::Completeness { .. })
    ));
    let forced = MaxRegOptions {
        allow_incomplete: true,
        ..MaxRegOptions::default()
    };
    assert!(max_reg_report(&traj, &params, &bank, &forced)
        .unwrap()
        .ratio
        .is_finite());
    assert!(max_reg_report(&traj, &SpaceParams::sobolev(0.0, 2.0), &bank, &forced).is_err());
}

#[test]
fn l1_in_time_report_is_finite() {
    let (g, bank) = report_grid();
    let u0 = solenoidal(g, 2.0, 4.5, 18);
    let f = symmetric_s0(g, &[1], Ht, 2.0, 4.5, 19);
    let traj = solve_hodge_stokes(sine_forcing(f), &u0, TimeGrid::new(1.0, 16).unwrap(), false).unwrap();
    let r = max_reg_report(
        &traj,
        &SpaceParams::besov(0.0, 2.0, 1.0),
        &bank,
        &MaxRegOptions::default(),
    )
    .unwrap();
    assert!(r.ratio.is_finite() && r.ratio > 0.0);
    for v in [r.sup_state, r.time_derivative, r.hessian, r.forcing, r.initial] {
        assert!(v.is_finite() && v > 0.0);
    }
    assert_eq!(r.pressure, 0.0);
}

#[test]
fn free_flow_hessian_closed_form() {
    let (g, bank) = report_grid();
    let u0 = solenoidal(g, 2.0, 4.5, 20);
    let traj = solve_hodge_stokes(
        Arc::new(ZeroForcing::like(&u0).unwrap()),
        &u0,
        TimeGrid::new(1.0, 32).unwrap(),
        false,
    )
    .unwrap();
    let opts = MaxRegOptions {
        allow_incomplete: true,
        ..MaxRegOptions::default()
    };
    let r = max_reg_report(&traj, &SpaceParams::besov(0.0, 2.0, 2.0), &bank, &opts).unwrap();
    // ∂_t u = Δu for free flow
    assert!((r.time_derivative - r.hessian).abs() <= 1e-9 * r.hessian);
    // ∫₀¹ |ξ|⁴ e^{−2t|ξ|²} dt = |ξ|² (1 − e^{−2|ξ|²}) / 2 mode by mode
    let spec = hodgehalf::half_space::extend(&u0).unwrap().fft().unwrap();
    let r2 = g.xi_sq();
    let (a, b) = bank.window();
    let mut total = 0.0;
    for j in a..=b {
        let psi = bank.psi(j).unwrap();
        for (_, comp) in spec.components() {
            for (i, v) in comp.iter().enumerate() {
                let w = psi[i] * psi[i] * v.norm_sqr();
                total += w * r2[i] * (1.0 - (-2.0 * r2[i]).exp()) / 2.0;
            }
        }
    }
    let oracle = (total * g.cell_volume() / g.len() as f64 / 2.0).sqrt();
    assert!((r.hessian - oracle).abs() <= 1e-6 * oracle, "{} {}", r.hessian, oracle);
}

#[test]
fn a_regular_data_are_solenoidal() {
    let g = Grid::new(2, 32, 8.0).unwrap();
    let seed = symmetric_s0(g, &[1], Ht, 0.5, 3.0, 21);
    let u0 = a_regular_datum(&seed).unwrap();
    assert!(half_rel(&leray_halfspace(&u0).unwrap().0, &u0) < 1e-12);
    assert!(u0.norm_l2() < seed.norm_l2());
}

#[test]
fn spread_of_ratios() {
    let (g, bank) = report_grid();
    let u0 = solenoidal(g, 2.0, 4.5, 22);
    let params = SpaceParams::besov(0.0, 2.0, 1.0);
    let reports: Vec<_> = [1.0, 4.0]
        .iter()
        .map(|&t| {
            let traj = solve_hodge_stokes(
                Arc::new(ZeroForcing::like(&u0).unwrap()),
                &u0,
                TimeGrid::new(t, 16).unwrap(),
                false,
            )
            .unwrap();
            max_reg_report(&traj, &params, &bank, &MaxRegOptions::default()).unwrap()
        })
        .collect();
    let spread = ratio_spread(&reports);
    assert!((1.0..1.1).contains(&spread));
    assert_eq!(ratio_spread(&reports[..1]), 1.0);
}
