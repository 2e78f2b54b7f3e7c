//! Space-averaged flow statistics, body-force scales, and time averaging.
//!
//! All spatial integrals run over the fluid region only (solid-mask cells are
//! excluded). Ratio statistics with a vanishing denominator report a missing
//! value rather than zero so they cannot silently pollute time averages.

use serde::Serialize;

use crate::closure::Closure;
use crate::error::{Error, Result};

use crate::grid::Grid;
use crate::ops;
use crate::solver::{BodyForce, FlowState};

/// Large flow scales derived from the body force and the realized velocity:
/// `F = (⟨|f|²⟩)^(1/2)`, `L = min[L_Ω, F/sup|∇ˢf|, F/⟨|∇ˢf|²⟩^(1/2)]`,
/// `U = (time-avg ⟨|v|²⟩)^(1/2)`, `Re = LU/ν`, `T* = L/U`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FlowScales {
    pub force_scale: f64,
    pub length: f64,
    pub velocity: f64,
    pub re: f64,
    pub t_star: f64,
    pub domain_scale: f64,
    pub sup_grad_f: f64,
    pub rms_grad_f: f64,
}

/// Derive the flow scales from the steady (fully ramped) body force and the
/// recorded `⟨|v|²⟩` history over `[t0, T]`.
pub fn compute_scales(
    grid: &Grid,
    force: &BodyForce,
    speed_sq_series: &[(f64, f64)],
    t0: f64,
    nu: f64,
) -> Result<FlowScales> {
    let mut f_sq = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_fluid(i, j) {
                let (fx, fy) = force.eval(grid.x_center(i), grid.y_center(j));
                f_sq += fx * fx + fy * fy;
            }
        }
    }
    let force_scale = (f_sq / grid.fluid_cell_count() as f64).sqrt();
    if force_scale == 0.0 {
        return Err(Error::ScalesUndefined("body force is identically zero".into()));
    }

    let f_field = force.sample(grid, 1.0, false);
    let grad_sq = ops::deformation_magsq(grid, &f_field);
    let mut sup = 0.0f64;
    let mut mean = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_fluid(i, j) {
                sup = sup.max(grad_sq.at(i, j));
                mean += grad_sq.at(i, j);
            }
        }
    }
    mean /= grid.fluid_cell_count() as f64;
    let sup_grad_f = sup.sqrt();
    let rms_grad_f = mean.sqrt();

    let domain_scale = grid.extent.0.max(grid.extent.1);
    let mut length = domain_scale;
    if sup_grad_f > 0.0 {
        length = length.min(force_scale / sup_grad_f);
    }
    if rms_grad_f > 0.0 {
        length = length.min(force_scale / rms_grad_f);
    }

    let t_end = speed_sq_series.last().map(|s| s.0).unwrap_or(t0);
    let mean_speed_sq = time_average(speed_sq_series, t0, t_end)
        .ok_or_else(|| Error::ScalesUndefined("velocity history does not cover t > t0".into()))?;
    let velocity = mean_speed_sq.max(0.0).sqrt();

    Ok(FlowScales {
        force_scale,
        length,
        velocity,
        re: length * velocity / nu,
        t_star: if velocity > 0.0 { length / velocity } else { f64::INFINITY },
        domain_scale,
        sup_grad_f,
        rms_grad_f,
    })
}

/// Model energy dissipation rate per unit volume:
/// `ε = ⟨2ν|∇ˢv|² + k^(3/2)/l⟩`, with the relaxation form `(√2/2)τ⁻¹k` in
/// kinematic mode.
pub fn dissipation_rate(state: &FlowState, closure: &Closure, grid: &Grid) -> f64 {
    let defmag = ops::deformation_magsq(grid, &state.vel);
    let relax = closure.relaxation_density(&state.k);
    let mut s = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_fluid(i, j) {
                s += 2.0 * closure.cfg.nu * defmag.at(i, j) + relax.at(i, j);
            }
        }
    }
    s / grid.fluid_cell_count() as f64
}

/// Turbulence intensity `I = 2⟨k⟩ / ⟨|v|²⟩`; missing when the flow is at rest.
pub fn intensity(state: &FlowState, grid: &Grid) -> Option<f64> {
    let speed_sq = state.vel.mean_speed_sq_fluid(grid);
    if speed_sq <= 0.0 {
        return None;
    }
    Some(2.0 * state.k.mean_fluid(grid) / speed_sq)
}

/// `ν_eff = ⟨[ν + μl√k] |∇ˢv|²⟩ / ⟨|∇ˢv|²⟩` (the single-ν convention).
pub fn effective_viscosity(state: &FlowState, closure: &Closure, grid: &Grid) -> Option<f64> {
    let defmag = ops::deformation_magsq(grid, &state.vel);
    let nu_t = closure.eddy_viscosity_field(&state.k);
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_fluid(i, j) {
                num += (closure.cfg.nu + nu_t.at(i, j)) * defmag.at(i, j);
                den += defmag.at(i, j);
            }
        }
    }
    if den <= 0.0 {
        None
    } else {
        Some(num / den)
    }
}

/// Viscosity ratio `VR = ⟨μl√k |∇ˢv|²⟩ / ⟨2ν |∇ˢv|²⟩`.
pub fn viscosity_ratio(state: &FlowState, closure: &Closure, grid: &Grid) -> Option<f64> {
    let defmag = ops::deformation_magsq(grid, &state.vel);
    let nu_t = closure.eddy_viscosity_field(&state.k);
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_fluid(i, j) {
                num += nu_t.at(i, j) * defmag.at(i, j);
                den += 2.0 * closure.cfg.nu * defmag.at(i, j);
            }
        }
    }
    if den <= 0.0 {
        None
    } else {
        Some(num / den)
    }
}

/// Taylor microscale `λ = (∫|∇ˢv|² / ∫|v|²)^(-1/2)` at a fixed time, both
/// integrals spatial over the fluid region.
pub fn taylor_microscale(state: &FlowState, grid: &Grid) -> Option<f64> {
    let defmag = ops::deformation_magsq(grid, &state.vel);
    let mut grad_int = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_fluid(i, j) {
                grad_int += defmag.at(i, j);
            }
        }
    }
    let speed_int = state.vel.mean_speed_sq_fluid(grid) * grid.fluid_cell_count() as f64;
    if grad_int <= 0.0 || speed_int <= 0.0 {
        return None;
    }
    Some((grad_int / speed_int).powf(-0.5))
}

/// Scaled averaged length scale `avg(l)/L = (⟨l²⟩)^(1/2) / L`. Missing when
/// the blend produces non-finite lengths (θ > 1 with vanishing k).
pub fn avg_l(state: &FlowState, closure: &Closure, grid: &Grid, length: f64) -> Option<f64> {
    let l = closure.length_scale(&state.k);
    let mut s = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_fluid(i, j) {
                let v = l.at(i, j);
                if !v.is_finite() {
                    return None;
                }
                s += v * v;
            }
        }
    }
    Some((s / grid.fluid_cell_count() as f64).sqrt() / length)
}

/// Scaled averaged eddy viscosity `avg(ν_T)/(LU) = ⟨μl√k⟩ / (LU)`.
pub fn avg_nu_t(
    state: &FlowState,
    closure: &Closure,
    grid: &Grid,
    length: f64,
    velocity: f64,
) -> Option<f64> {
    if velocity <= 0.0 {
        return None;
    }
    let nu_t = closure.eddy_viscosity_field(&state.k);
    Some(nu_t.mean_fluid(grid) / (length * velocity))
}

/// Finite-horizon stand-in for the long-time average: the trapezoidal mean
/// `(1/(T-t0)) ∫_{t0}^{T} φ dt` over the recorded series, clipping the first
/// segment at `t0`. `None` when the window is empty.
pub fn time_average(series: &[(f64, f64)], t0: f64, t_end: f64) -> Option<f64> {
    let mut integral = 0.0;
    let mut covered = 0.0;
    for pair in series.windows(2) {
        let (ta, va) = pair[0];
        let (tb, vb) = pair[1];
        if tb <= t0 || ta >= t_end || tb <= ta {
            continue;
        }
        // Clip the segment to [t0, t_end] with linear interpolation.
        let (mut lo_t, mut lo_v) = (ta, va);
        let (mut hi_t, mut hi_v) = (tb, vb);
        if lo_t < t0 {
            let w = (t0 - ta) / (tb - ta);
            lo_v = va + w * (vb - va);
            lo_t = t0;
        }
        if hi_t > t_end {
            let w = (t_end - ta) / (tb - ta);
            hi_v = va + w * (vb - va);
            hi_t = t_end;
        }
        integral += 0.5 * (lo_v + hi_v) * (hi_t - lo_t);
        covered += hi_t - lo_t;
    }
    if covered <= 0.0 {
        None
    } else {
        Some(integral / covered)
    }
}

/// Running trapezoidal averager for optionally-missing samples; segments with
/// a missing endpoint and times before the spin-up cutoff are skipped.
#[derive(Clone, Debug)]
pub struct TimeAverager {
    t0: f64,
    last: Option<(f64, Option<f64>)>,
    integral: f64,
    covered: f64,
}

impl TimeAverager {
    pub fn new(t0: f64) -> Self {
        Self { t0, last: None, integral: 0.0, covered: 0.0 }
    }

    pub fn push(&mut self, t: f64, value: Option<f64>) {
        if let Some((ta, Some(va))) = self.last {
            if let Some(vb) = value {
                if t > self.t0 && t > ta {
                    let (mut lo_t, mut lo_v) = (ta, va);
                    if lo_t < self.t0 {
                        let w = (self.t0 - ta) / (t - ta);
                        lo_v = va + w * (vb - va);
                        lo_t = self.t0;
                    }
                    self.integral += 0.5 * (lo_v + vb) * (t - lo_t);
                    self.covered += t - lo_t;
                }
            }
        }
        self.last = Some((t, value));
    }

    pub fn average(&self) -> Option<f64> {
        if self.covered > 0.0 {
            Some(self.integral / self.covered)
        } else {
            None
        }
    }
}

/// One sampled row of the statistics time series, before force/velocity
/// scaling is known.
#[derive(Clone, Copy, Debug)]
pub struct RawSample {
    pub t: f64,
    pub energy: f64,
    pub kinetic: f64,
    pub k_integral: f64,
    pub mean_k: f64,
    pub mean_speed_sq: f64,
    pub eps_model: f64,
    pub intensity: Option<f64>,
    pub nu_eff: Option<f64>,
    pub vr: Option<f64>,
    pub taylor: Option<f64>,
    /// `(⟨l²⟩)^(1/2)` — unscaled.
    pub avg_l: Option<f64>,
    /// `⟨μ l √k⟩` — unscaled; the left-hand side of the
    /// production/relaxation balance up to the `2μτ²` factor.
    pub mean_nu_t: f64,
    /// `⟨μ l √k |∇ˢv|²⟩` — the balance right-hand side.
    pub mean_production: f64,
}

/// Compute all statistics of a state in one pass.
pub fn sample_stats(state: &FlowState, closure: &Closure, grid: &Grid) -> RawSample {
    let defmag = ops::deformation_magsq(grid, &state.vel);
    let nu_t = closure.eddy_viscosity_field(&state.k);
    let relax = closure.relaxation_density(&state.k);
    let l_field = closure.length_scale(&state.k);
    let n_fluid = grid.fluid_cell_count() as f64;

    let mut grad_int = 0.0;
    let mut eps = 0.0;
    let mut nu_wgt = 0.0;
    let mut nu_t_wgt = 0.0;
    let mut l_sq = 0.0;
    let mut l_finite = true;
    let mut nu_t_mean = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if !grid.is_fluid(i, j) {
                continue;
            }
            let d = defmag.at(i, j);
            let nt = nu_t.at(i, j);
            grad_int += d;
            eps += 2.0 * closure.cfg.nu * d + relax.at(i, j);
            nu_wgt += (closure.cfg.nu + nt) * d;
            nu_t_wgt += nt * d;
            nu_t_mean += nt;
            let lv = l_field.at(i, j);
            if lv.is_finite() {
                l_sq += lv * lv;
            } else {
                l_finite = false;
            }
        }
    }

    let mean_speed_sq = state.vel.mean_speed_sq_fluid(grid);
    let mean_k = state.k.mean_fluid(grid);
    let kinetic = state.vel.kinetic_energy(grid);
    let k_integral = state.k.integral_fluid(grid);

    RawSample {
        t: state.t,
        energy: kinetic + k_integral,
        kinetic,
        k_integral,
        mean_k,
        mean_speed_sq,
        eps_model: eps / n_fluid,
        intensity: if mean_speed_sq > 0.0 { Some(2.0 * mean_k / mean_speed_sq) } else { None },
        nu_eff: if grad_int > 0.0 { Some(nu_wgt / grad_int) } else { None },
        vr: if grad_int > 0.0 { Some(nu_t_wgt / (2.0 * closure.cfg.nu * grad_int)) } else { None },
        taylor: if grad_int > 0.0 && mean_speed_sq > 0.0 {
            Some((grad_int / (mean_speed_sq * n_fluid)).powf(-0.5))
        } else {
            None
        },
        avg_l: if l_finite { Some((l_sq / n_fluid).sqrt()) } else { None },
        mean_nu_t: nu_t_mean / n_fluid,
        mean_production: nu_t_wgt / n_fluid,
    }
}

/// Scaled statistics row as emitted to the time-series CSV.
#[derive(Clone, Copy, Debug)]
pub struct StatRecord {
    pub t: f64,
    pub energy: f64,
    pub eps_model: f64,
    pub intensity: Option<f64>,
    pub nu_eff: Option<f64>,
    pub vr: Option<f64>,
    pub taylor: Option<f64>,
    pub avg_l_over_l: Option<f64>,
    pub avg_nu_t_over_lu: Option<f64>,
}

pub const STATS_CSV_HEADER: &str =
    "t,energy,eps_model,intensity,nu_eff,vr,taylor,avg_l_over_L,avg_nuT_over_LU";

#[derive(Clone, Debug, Default)]
pub struct StatSeries {
    pub samples: Vec<RawSample>,
}

impl StatSeries {
    pub fn push(&mut self, sample: RawSample) {
        self.samples.push(sample);
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn series(&self, f: impl Fn(&RawSample) -> f64) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.t, f(s))).collect()
    }

    pub fn series_opt(&self, f: impl Fn(&RawSample) -> Option<f64>) -> Vec<(f64, Option<f64>)> {
        self.samples.iter().map(|s| (s.t, f(s))).collect()
    }

    /// Scale the raw samples into emitted records given the computed scales.
    pub fn to_records(&self, scales: &FlowScales) -> Vec<StatRecord> {
        self.samples
            .iter()
            .map(|s| StatRecord {
                t: s.t,
                energy: s.energy,
                eps_model: s.eps_model,
                intensity: s.intensity,
                nu_eff: s.nu_eff,
                vr: s.vr,
                taylor: s.taylor,
                avg_l_over_l: s.avg_l.map(|v| v / scales.length),
                avg_nu_t_over_lu: if scales.velocity > 0.0 {
                    Some(s.mean_nu_t / (scales.length * scales.velocity))
                } else {
                    None
                },
            })
            .collect()
    }

    pub fn to_csv(&self, scales: &FlowScales) -> String {
        let mut out = String::from(STATS_CSV_HEADER);
        out.push('\n');
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in self.to_records(scales) {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.t,
                r.energy,
                r.eps_model,
                fmt(r.intensity),
                fmt(r.nu_eff),
                fmt(r.vr),
                fmt(r.taylor),
                fmt(r.avg_l_over_l),
                fmt(r.avg_nu_t_over_lu),
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::{Closure, ClosureConfig, LengthScaleMode, SQRT2};
    use crate::field::{ScalarField, VectorField};
    use crate::grid::BcKind;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn periodic_grid(n: usize) -> Grid {
        Grid::make((0.0, 0.0), (1.0, 1.0), (n, n), (BcKind::Periodic, BcKind::Periodic), &[]).unwrap()
    }

    fn kinematic(grid: &Grid, nu: f64) -> Closure {
        Closure::new(ClosureConfig { nu, ..Default::default() }, grid, 1e4).unwrap()
    }

    #[test]
    fn dissipation_of_rest_state_is_zero() {
        let g = periodic_grid(8);
        let closure = kinematic(&g, 1e-4);
        let state = FlowState::rest(&g);
        assert_eq!(dissipation_rate(&state, &closure, &g), 0.0);
    }

    #[test]
    fn dissipation_of_uniform_k_kinematic() {
        let g = periodic_grid(8);
        let closure = kinematic(&g, 1e-4);
        let mut state = FlowState::rest(&g);
        state.k = ScalarField::constant(&g, 1.0);
        // ε = (√2/2) k/τ = √2/2.
        assert_relative_eq!(dissipation_rate(&state, &closure, &g), SQRT2 / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn dissipation_of_pure_shear() {
        // v = (y, 0), k = 0, ν = 1e-4: 2ν|∇ˢv|² = 2ν · 1/2 = 1e-4 away from
        // the periodic wrap.
        let g = periodic_grid(32);
        let closure = kinematic(&g, 1e-4);
        let mut state = FlowState::rest(&g);
        state.vel = VectorField::from_fn(&g, |_, y| y, |_, _| 0.0);
        let defmag = ops::deformation_magsq(&g, &state.vel);
        assert_relative_eq!(defmag.at(5, 16), 0.5, epsilon = 1e-12);
        let interior_eps = 2.0 * 1e-4 * defmag.at(5, 16);
        assert_relative_eq!(interior_eps, 1e-4, epsilon = 1e-15);
        let _ = closure;
    }

    #[test]
    fn intensity_examples() {
        let g = periodic_grid(8);
        let mut state = FlowState::rest(&g);
        state.vel = VectorField::from_fn(&g, |_, _| 1.0, |_, _| 0.0);
        state.k = ScalarField::constant(&g, 0.5);
        assert_relative_eq!(intensity(&state, &g).unwrap(), 1.0, epsilon = 1e-12);
        state.k = ScalarField::zeros(&g);
        assert_eq!(intensity(&state, &g), Some(0.0));
        // Scaling v by 2 with k fixed divides I by 4.
        state.k = ScalarField::constant(&g, 0.5);
        let i1 = intensity(&state, &g).unwrap();
        state.vel = VectorField::from_fn(&g, |_, _| 2.0, |_, _| 0.0);
        let i2 = intensity(&state, &g).unwrap();
        assert_relative_eq!(i1 / i2, 4.0, epsilon = 1e-12);
        // Rest state: missing, not zero.
        state.vel = VectorField::zeros(&g);
        assert_eq!(intensity(&state, &g), None);
    }

    #[test]
    fn effective_viscosity_and_ratio_limits() {
        let g = periodic_grid(16);
        let nu = 2e-3;
        let mut state = FlowState::rest(&g);
        let two_pi = 2.0 * PI;
        state.vel = VectorField::from_fn(&g, |_, y| (two_pi * y).sin(), |_, _| 0.0);

        // ν_T = 0: ν_eff = ν, VR = 0.
        let off = Closure::new(
            ClosureConfig { mode: LengthScaleMode::Off, nu, ..Default::default() },
            &g,
            1e4,
        )
        .unwrap();
        assert_relative_eq!(effective_viscosity(&state, &off, &g).unwrap(), nu, epsilon = 1e-15);
        assert_eq!(viscosity_ratio(&state, &off, &g).unwrap(), 0.0);

        // Uniform ν_T = ν: ν_eff = 2ν, VR = 1/2 (the ratio definition carries
        // the 2ν denominator).
        let k_val: f64 = 0.25;
        let l_val = nu / (0.55 * k_val.sqrt());
        let cfg = ClosureConfig { mode: LengthScaleMode::Static, nu, ..Default::default() };
        let closure = Closure::with_static_field(cfg, ScalarField::constant(&g, l_val)).unwrap();
        state.k = ScalarField::constant(&g, k_val);
        assert_relative_eq!(
            effective_viscosity(&state, &closure, &g).unwrap(),
            2.0 * nu,
            max_relative = 1e-12
        );
        assert_relative_eq!(viscosity_ratio(&state, &closure, &g).unwrap(), 0.5, max_relative = 1e-12);

        // ν_T = 2ν uniform: VR = 1.
        let l_val2 = 2.0 * nu / (0.55 * k_val.sqrt());
        let cfg = ClosureConfig { mode: LengthScaleMode::Static, nu, ..Default::default() };
        let closure2 = Closure::with_static_field(cfg, ScalarField::constant(&g, l_val2)).unwrap();
        assert_relative_eq!(viscosity_ratio(&state, &closure2, &g).unwrap(), 1.0, max_relative = 1e-12);

        // Zero-gradient field: missing values.
        state.vel = VectorField::zeros(&g);
        assert_eq!(effective_viscosity(&state, &closure, &g), None);
        assert_eq!(viscosity_ratio(&state, &closure, &g), None);
    }

    #[test]
    fn taylor_microscale_of_sinusoidal_shear() {
        // v = (sin y, 0) on [0,2π]²: ∫|∇ˢv|²/∫|v|² = 1/2, λ = √2.
        let g = Grid::make(
            (0.0, 0.0),
            (2.0 * PI, 2.0 * PI),
            (64, 64),
            (BcKind::Periodic, BcKind::Periodic),
            &[],
        )
        .unwrap();
        let mut state = FlowState::rest(&g);
        state.vel = VectorField::from_fn(&g, |_, y| y.sin(), |_, _| 0.0);
        let lambda = taylor_microscale(&state, &g).unwrap();
        assert_relative_eq!(lambda, SQRT2, max_relative = 2e-3);
        // Scaling v leaves λ unchanged.
        state.vel = VectorField::from_fn(&g, |_, y| 3.7 * y.sin(), |_, _| 0.0);
        assert_relative_eq!(taylor_microscale(&state, &g).unwrap(), lambda, max_relative = 1e-12);
        // Refining the grid moves λ by well under 1%.
        let g2 = Grid::make(
            (0.0, 0.0),
            (2.0 * PI, 2.0 * PI),
            (128, 128),
            (BcKind::Periodic, BcKind::Periodic),
            &[],
        )
        .unwrap();
        let mut state2 = FlowState::rest(&g2);
        state2.vel = VectorField::from_fn(&g2, |_, y| y.sin(), |_, _| 0.0);
        let lambda2 = taylor_microscale(&state2, &g2).unwrap();
        assert!((lambda2 - lambda).abs() / lambda < 0.01);
    }

    #[test]
    fn avg_length_scale_examples() {
        let g = periodic_grid(8);
        let nu = 1e-4;
        let cfg = ClosureConfig { mode: LengthScaleMode::Static, nu, ..Default::default() };
        let closure = Closure::with_static_field(cfg, ScalarField::constant(&g, 0.02)).unwrap();
        let state = FlowState::rest(&g);
        // Uniform l = c: avg(l)/L = c/L.
        assert_relative_eq!(avg_l(&state, &closure, &g, 2.0).unwrap(), 0.01, epsilon = 1e-12);
        // Kinematic with uniform k: avg(ν_T)/(LU) = √2 μ k τ/(LU).
        let closure = kinematic(&g, nu);
        let mut state = FlowState::rest(&g);
        state.k = ScalarField::constant(&g, 0.3);
        let got = avg_nu_t(&state, &closure, &g, 2.0, 0.5).unwrap();
        assert_relative_eq!(got, SQRT2 * 0.55 * 0.3 / (2.0 * 0.5), max_relative = 1e-12);
        // l = 0 everywhere: zero.
        state.k = ScalarField::zeros(&g);
        assert_eq!(avg_l(&state, &closure, &g, 2.0), Some(0.0));
    }

    #[test]
    fn time_average_examples() {
        // Constant series.
        let series: Vec<(f64, f64)> = (0..11).map(|i| (i as f64 * 0.2, 3.0)).collect();
        assert_relative_eq!(time_average(&series, 0.0, 2.0).unwrap(), 3.0);
        // φ(t) = t on [0, 2] averages to 1; trapezoid is exact for linear.
        let series: Vec<(f64, f64)> = (0..21).map(|i| (i as f64 * 0.1, i as f64 * 0.1)).collect();
        assert_relative_eq!(time_average(&series, 0.0, 2.0).unwrap(), 1.0, epsilon = 1e-12);
        // Averaging the constant extension of an average is idempotent.
        let avg = time_average(&series, 0.0, 2.0).unwrap();
        let const_series: Vec<(f64, f64)> = (0..21).map(|i| (i as f64 * 0.1, avg)).collect();
        assert_relative_eq!(time_average(&const_series, 0.0, 2.0).unwrap(), avg, epsilon = 1e-12);
        // Empty window.
        assert_eq!(time_average(&series, 5.0, 2.0), None);
        // Spin-up cutoff clips the first segment.
        let series = vec![(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)];
        assert_relative_eq!(time_average(&series, 1.0, 2.0).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn averager_skips_missing_samples() {
        let mut avg = TimeAverager::new(0.0);
        avg.push(0.0, Some(1.0));
        avg.push(1.0, None);
        avg.push(2.0, Some(3.0));
        avg.push(3.0, Some(3.0));
        // Only the [2,3] segment counts.
        assert_relative_eq!(avg.average().unwrap(), 3.0);
    }

    #[test]
    fn cauchy_schwarz_for_trapezoidal_averages() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(3..40);
            let mut t = 0.0;
            let mut phi = Vec::new();
            let mut psi = Vec::new();
            let mut prod = Vec::new();
            for _ in 0..n {
                t += rng.gen_range(0.01..0.5);
                let a: f64 = rng.gen_range(-2.0..2.0);
                let b: f64 = rng.gen_range(-2.0..2.0);
                phi.push((t, a * a));
                psi.push((t, b * b));
                prod.push((t, (a * b).abs()));
            }
            let t_end = t;
            let lhs = time_average(&prod, 0.0, t_end).unwrap();
            let rhs = time_average(&phi, 0.0, t_end).unwrap().sqrt()
                * time_average(&psi, 0.0, t_end).unwrap().sqrt();
            assert!(lhs <= rhs * (1.0 + 1e-9), "Cauchy-Schwarz violated: {lhs} > {rhs}");
        }
    }

    #[test]
    fn scales_of_constant_force_on_periodic_box() {
        let g = periodic_grid(16);
        let force = BodyForce::Uniform { fx: 3.0, fy: 4.0 };
        let series = vec![(0.0, 0.25), (1.0, 0.25), (2.0, 0.25)];
        let s = compute_scales(&g, &force, &series, 0.5, 1e-3).unwrap();
        assert_relative_eq!(s.force_scale, 5.0, epsilon = 1e-12);
        // Gradient-free force: L = domain scale.
        assert_relative_eq!(s.length, 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.velocity, 0.5, epsilon = 1e-12);
        assert_relative_eq!(s.re, 1.0 * 0.5 / 1e-3, epsilon = 1e-9);
        assert_relative_eq!(s.t_star, 2.0, epsilon = 1e-12);

        // Doubling the force doubles F and leaves L unchanged.
        let force2 = BodyForce::Uniform { fx: 6.0, fy: 8.0 };
        let s2 = compute_scales(&g, &force2, &series, 0.5, 1e-3).unwrap();
        assert_relative_eq!(s2.force_scale, 10.0, epsilon = 1e-12);
        assert_relative_eq!(s2.length, s.length, epsilon = 1e-12);
    }

    #[test]
    fn zero_force_scales_are_an_error() {
        let g = periodic_grid(8);
        let series = vec![(0.0, 1.0), (1.0, 1.0)];
        assert!(compute_scales(&g, &BodyForce::None, &series, 0.0, 1e-3).is_err());
    }

    #[test]
    fn length_bound_consequences_hold() {
        // ||∇ˢf||_∞ ≤ F/L and ⟨|∇ˢf|²⟩^(1/2) ≤ F/L with quadrature slack.
        let g = Grid::make(
            (-1.0, -1.0),
            (2.0, 2.0),
            (64, 64),
            (BcKind::Periodic, BcKind::Periodic),
            &[crate::grid::SolidRegion::OutsideCircle(crate::grid::Circle::new(0.0, 0.0, 1.0))],
        )
        .unwrap();
        let series = vec![(0.0, 0.09), (10.0, 0.09)];
        let s = compute_scales(&g, &BodyForce::Annulus { amp: 1.0 }, &series, 1.0, 1e-4).unwrap();
        let slack = 1.01;
        assert!(s.sup_grad_f <= s.force_scale / s.length * slack);
        assert!(s.rms_grad_f <= s.force_scale / s.length * slack);
        assert!(s.length <= s.domain_scale);
    }

    #[test]
    fn csv_header_and_missing_values() {
        let g = periodic_grid(8);
        let closure = kinematic(&g, 1e-4);
        let state = FlowState::rest(&g);
        let mut series = StatSeries::default();
        series.push(sample_stats(&state, &closure, &g));
        let scales = FlowScales {
            force_scale: 1.0,
            length: 0.5,
            velocity: 1.0,
            re: 5000.0,
            t_star: 0.5,
            domain_scale: 1.0,
            sup_grad_f: 2.0,
            rms_grad_f: 1.0,
        };
        let csv = series.to_csv(&scales);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), STATS_CSV_HEADER);
        let row = lines.next().unwrap();
        // Rest state: intensity/nu_eff/vr/taylor are empty fields.
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[3], "");
        assert_eq!(fields[4], "");
    }
}
