//! Manufactured-solution convergence of the flow solver.
//!
//! The decaying vortex `u = sin x cos y e^(-2νt)`, `v = -cos x sin y e^(-2νt)`
//! solves the unforced incompressible equations exactly on the periodic
//! `[0,2π]²` box, so the computed error is pure discretization error.
//! Spatial order is measured against the analytic field with `dt ∝ dx²`
//! (the first-order splitting error then scales like the spatial one);
//! temporal order by self-convergence on a fixed grid.

use std::time::Instant;

use prandtl::closure::{Closure, ClosureConfig, LengthScaleMode};
use prandtl::field::VectorField;
use prandtl::grid::{BcKind, Grid};
use prandtl::solver::{step, BodyForce, FaceMaps, FlowState, SolverConfig};

const NU: f64 = 0.01;

fn vortex_grid(n: usize) -> Grid {
    let two_pi = 2.0 * std::f64::consts::PI;
    Grid::make((0.0, 0.0), (two_pi, two_pi), (n, n), (BcKind::Periodic, BcKind::Periodic), &[])
        .unwrap()
}

fn vortex(grid: &Grid, t: f64) -> VectorField {
    let decay = (-2.0 * NU * t).exp();
    VectorField::from_fn(
        grid,
        move |x, y| x.sin() * y.cos() * decay,
        move |x, y| -x.cos() * y.sin() * decay,
    )
}

fn nse_closure(grid: &Grid) -> Closure {
    Closure::new(
        ClosureConfig { mode: LengthScaleMode::Off, nu: NU, ..Default::default() },
        grid,
        1.0 / NU,
    )
    .unwrap()
}

/// March the vortex to `t_end` and return the final state.
fn integrate(grid: &Grid, dt: f64, t_end: f64) -> FlowState {
    let closure = nse_closure(grid);
    let maps = FaceMaps::build(grid);
    let cfg = SolverConfig { dt, t_end, ramp: false, ..Default::default() };
    let mut state = FlowState::rest(grid);
    state.vel = vortex(grid, 0.0);
    let steps = (t_end / dt).round() as u64;
    for _ in 0..steps {
        step(&mut state, &closure, grid, &cfg, &BodyForce::None, &maps).unwrap();
    }
    state
}

#[test]
fn vortex_convergence_orders() {
    let start = Instant::now();
    let t_end = 0.25;

    // Spatial: error against the analytic solution with dt tied to dx².
    let mut errors = Vec::new();
    for n in [16usize, 32, 64] {
        let grid = vortex_grid(n);
        let dt_target = 0.2 * grid.dx * grid.dx;
        let steps = (t_end / dt_target).ceil();
        let dt = t_end / steps;
        let state = integrate(&grid, dt, t_end);
        let exact = vortex(&grid, state.t);
        errors.push(state.vel.l2_diff(&exact, &grid));
    }
    let o1 = (errors[0] / errors[1]).log2();
    let o2 = (errors[1] / errors[2]).log2();
    println!("spatial errors {errors:?}, orders {o1:.2} {o2:.2}");
    assert!(o1 >= 1.9 && o2 >= 1.9, "spatial orders {o1:.2} {o2:.2} below 1.9");

    // Temporal: self-convergence on a fixed 32² grid.
    let grid = vortex_grid(32);
    let t_end = 0.4;
    let states: Vec<FlowState> =
        [0.04, 0.02, 0.01].iter().map(|&dt| integrate(&grid, dt, t_end)).collect();
    let e1 = states[0].vel.l2_diff(&states[1].vel, &grid);
    let e2 = states[1].vel.l2_diff(&states[2].vel, &grid);
    let order = (e1 / e2).log2();
    println!("temporal self-convergence {e1:.3e} {e2:.3e}, order {order:.2}");
    assert!(order >= 0.9, "temporal order {order:.2} below 0.9");

    let elapsed = start.elapsed().as_secs_f64();
    println!("manufactured-solution suite: {elapsed:.1}s");
    assert!(elapsed < 120.0, "runtime {elapsed:.1}s exceeds the 2 minute budget");
}
