//! Positivity and oracle properties of the k-equation step.

use prandtl::closure::{
    decay_ode_oracle, k_step, Closure, ClosureConfig, DecayMode, LengthScaleMode,
};
use prandtl::field::{ScalarField, VectorField};
use prandtl::grid::{BcKind, Grid};
use proptest::prelude::*;

fn grid8() -> Grid {
    Grid::make((0.0, 0.0), (1.0, 1.0), (8, 8), (BcKind::Periodic, BcKind::Periodic), &[]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Under the advective monotonicity bound dt ≤ 1/(max|u|/dx + max|v|/dy),
    /// the step keeps k nonnegative up to solver roundoff: the clamp restores
    /// a vanishing share of the k mass.
    #[test]
    fn k_step_preserves_positivity(
        k_vals in prop::collection::vec(0.0f64..2.0, 64),
        vel_vals in prop::collection::vec(-1.0f64..1.0, 80),
        tau in 0.05f64..4.0,
        mode_static in any::<bool>(),
    ) {
        let g = grid8();
        let mut k = ScalarField::zeros(&g);
        for (dst, src) in k.data_mut().iter_mut().zip(&k_vals) {
            *dst = *src;
        }
        let mut vel = VectorField::zeros(&g);
        for (q, v) in vel.u.iter_mut().chain(vel.v.iter_mut()).zip(vel_vals.iter().cycle()) {
            *q = *v;
        }
        vel.apply_bc(&g);
        // dx = dy = 1/8: the donor-cell bound is 1/(8+8) = 1/16.
        let dt = 0.05;

        let cfg = ClosureConfig {
            tau,
            mode: if mode_static { LengthScaleMode::Static } else { LengthScaleMode::Kinematic },
            ..Default::default()
        };
        let closure = if mode_static {
            Closure::with_static_field(cfg, ScalarField::constant(&g, 0.3)).unwrap()
        } else {
            Closure::new(cfg, &g, 1e4).unwrap()
        };
        let (k_new, diag) = k_step(&k, &vel, &closure, &g, dt).unwrap();
        prop_assert!(k_new.min() >= 0.0);
        let mass: f64 = k_new.integral_fluid(&g);
        prop_assert!(
            diag.clamped_mass <= 1e-12 * mass.max(1e-12),
            "clamped {} of {}",
            diag.clamped_mass,
            mass
        );
    }
}

/// The geometric blend's field step tracks the independent ODE oracle on
/// uniform free decay.
#[test]
fn geometric_k_step_tracks_oracle() {
    let g = grid8();
    let theta = 2.0 / 1.3;
    let cfg = ClosureConfig {
        mode: LengthScaleMode::Geometric { theta },
        tau: 1.0,
        ..Default::default()
    };
    let closure = Closure::with_static_field(cfg, ScalarField::constant(&g, 1.0)).unwrap();
    let vel = VectorField::zeros(&g);
    let dt = 0.002_f64;
    let t_end = 3.0;
    let mut k = ScalarField::constant(&g, 1.0);
    let steps = (t_end / dt).round() as usize;
    for _ in 0..steps {
        let (k_new, _) = k_step(&k, &vel, &closure, &g, dt).unwrap();
        k = k_new;
    }
    let oracle = decay_ode_oracle(1.0, DecayMode::Geometric { theta, l0: 1.0, tau: 1.0 }, t_end);
    let rel = (k.at(4, 4) - oracle).abs() / oracle;
    println!("geometric decay: field {} oracle {oracle} rel {rel:.2e}", k.at(4, 4));
    assert!(rel < 5.0 * dt, "field step strayed from the oracle: {rel}");
}

/// Model-off closure leaves k untouched and reports zero eddy viscosity.
#[test]
fn model_off_is_inert() {
    let g = grid8();
    let cfg = ClosureConfig { mode: LengthScaleMode::Off, ..Default::default() };
    let closure = Closure::new(cfg, &g, 1e4).unwrap();
    let k = ScalarField::from_fn(&g, |x, y| x + y);
    let vel = VectorField::from_fn(&g, |_, _| 0.3, |_, _| -0.1);
    let (k_new, diag) = k_step(&k, &vel, &closure, &g, 0.01).unwrap();
    assert_eq!(k_new, k);
    assert_eq!(diag.production_integral, 0.0);
    assert_eq!(closure.eddy_viscosity_field(&k).linf(), 0.0);
}
