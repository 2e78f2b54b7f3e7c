//! Numerical verification of the closure's structural guarantees.
//!
//! Each check runs one or more simulations and produces a [`ConditionReport`]
//! with the measured values, the bound or target, and a pass flag:
//!
//! * model reversion: as τ→0 the velocity gap to a plain Navier-Stokes
//!   reference run shrinks monotonically and vanishes at the smallest τ;
//! * bounded energy: `1/2 ||v||² + ∫k` stays bounded with a non-positive
//!   late-time trend;
//! * statistical equilibrium: the time-averaged dissipation rate sits below
//!   `4 (1 + Re⁻¹) U³/L` whenever `τ/T* ≤ μ^(-1/2)`;
//! * production/relaxation balance: `⟨⟨√2μkτ⟩⟩ = 2μτ² ⟨⟨√2μkτ|∇ˢv|²⟩⟩` up to
//!   a finite-horizon residual that shrinks as the horizon grows;
//! * the integrated k-equation identity, first order in dt;
//! * free-decay exponents of the three length-scale modes.
//!
//! Checks are deterministic: rerunning a check on the same configuration
//! reproduces the report bit for bit.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::closure::{k_step, LengthScaleMode, SQRT2};
use crate::config::{build_scenario, ScenarioConfig, ScenarioKind};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::runner::{run, RunResult};
use crate::solver::{step, FaceMaps};
use crate::stats::{compute_scales, time_average, FlowScales};

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub pass: bool,
    /// False for informational reports (out-of-hypothesis runs) that do not
    /// count toward the aggregate verdict.
    pub asserted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis_ok: Option<bool>,
    pub measured: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub tolerance: f64,
    pub config: BTreeMap<String, Value>,
}

fn run_meta(cfg: &ScenarioConfig) -> BTreeMap<String, Value> {
    BTreeMap::from([
        ("scenario".into(), json!(cfg.scenario.name())),
        ("grid".into(), json!(cfg.resolution)),
        ("mode".into(), serde_json::to_value(cfg.mode).unwrap_or(Value::Null)),
        ("tau_s".into(), json!(cfg.tau_s)),
        ("mu".into(), json!(cfg.mu)),
        ("nu_m2s".into(), json!(cfg.nu_m2s)),
        ("dt_s".into(), json!(cfg.dt_s)),
        ("t_end_s".into(), json!(cfg.t_end_s)),
    ])
}

/// Least-squares slope of `y` against `x`.
fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in points {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Model-reversion check: velocity gap to the ν_T ≡ 0 reference run is
/// strictly decreasing over the supplied decreasing τ list, and the smallest
/// τ lands within `tol_factor · U` of the reference.
pub fn check_condition1(
    base: &ScenarioConfig,
    taus: &[f64],
    tol_factor: f64,
) -> Result<ConditionReport> {
    if taus.len() < 3 {
        return Err(Error::Config("condition 1 needs at least three tau values".into()));
    }
    if taus.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("tau list must be strictly decreasing".into()));
    }

    // Reference run with the model off, storing sampled velocity fields.
    let mut nse_cfg = base.clone();
    nse_cfg.mode = LengthScaleMode::Off;
    nse_cfg.k_init = crate::config::KInit::Zero;
    let scenario = build_scenario(&nse_cfg)?;
    let maps = FaceMaps::build(&scenario.grid);
    let total_steps = (scenario.solver.t_end / scenario.solver.dt).round() as u64;
    let sample_every = base.sample_every_steps as u64;

    let mut nse_state = scenario.initial.clone();
    let mut nse_samples: Vec<VectorField> = Vec::new();
    let mut speed_sq: Vec<(f64, f64)> = Vec::new();
    while nse_state.step < total_steps {
        step(&mut nse_state, &scenario.closure, &scenario.grid, &scenario.solver, &scenario.force, &maps)?;
        if nse_state.step % sample_every == 0 || nse_state.step == total_steps {
            nse_samples.push(nse_state.vel.clone());
            speed_sq.push((nse_state.t, nse_state.vel.mean_speed_sq_fluid(&scenario.grid)));
        }
    }
    let scales = compute_scales(
        &scenario.grid,
        &scenario.force,
        &speed_sq,
        base.t0_spinup_s.min(scenario.solver.t_end / 2.0),
        base.nu_m2s,
    )?;
    let u_ref = scales.velocity;

    let mut gaps = Vec::with_capacity(taus.len());
    for &tau in taus {
        let mut cfg = base.clone();
        cfg.mode = LengthScaleMode::Kinematic;
        cfg.tau_s = tau;
        let sc = build_scenario(&cfg)?;
        let mut state = sc.initial.clone();
        let mut gap = 0.0f64;
        let mut sample_idx = 0;
        while state.step < total_steps {
            step(&mut state, &sc.closure, &sc.grid, &sc.solver, &sc.force, &maps)?;
            if state.step % sample_every == 0 || state.step == total_steps {
                gap = gap.max(state.vel.l2_diff(&nse_samples[sample_idx], &sc.grid));
                sample_idx += 1;
            }
        }
        gaps.push(gap);
    }

    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let threshold = tol_factor * u_ref;
    let smallest_ok = *gaps.last().unwrap() < threshold;

    let mut measured = BTreeMap::new();
    measured.insert("taus".into(), json!(taus));
    measured.insert("gaps_l2_max_in_time".into(), json!(gaps));
    measured.insert("u_reference".into(), json!(u_ref));
    measured.insert("threshold".into(), json!(threshold));
    measured.insert("monotone_decreasing".into(), json!(monotone));
    Ok(ConditionReport {
        condition: "condition1_model_reversion".into(),
        pass: monotone && smallest_ok,
        asserted: true,
        hypothesis_ok: None,
        measured,
        bound: Some(threshold),
        tolerance: tol_factor,
        config: run_meta(base),
    })
}

/// Bounded-energy check on a recorded per-step energy series: the supremum is
/// attained before `0.9 t_end` or the late-time slope is non-positive within
/// tolerance, and no sample escapes the saturation envelope.
pub fn check_condition3(
    energy: &[(f64, f64)],
    t_end: f64,
    cfg: &ScenarioConfig,
) -> ConditionReport {
    let slope_tol_rel = 0.01; // relative energy growth per time unit
    let y0 = energy.first().map(|p| p.1).unwrap_or(0.0);
    let (mut sup, mut t_sup) = (f64::NEG_INFINITY, 0.0);
    for &(t, e) in energy {
        if e > sup {
            sup = e;
            t_sup = t;
        }
    }
    let bounded = sup.is_finite();
    let attained_early = t_sup <= 0.9 * t_end;

    let late_start = t_end - 0.3 * t_end;
    let late: Vec<(f64, f64)> =
        energy.iter().copied().filter(|(t, _)| *t >= late_start).collect();
    let late_mean = if late.is_empty() {
        0.0
    } else {
        late.iter().map(|p| p.1).sum::<f64>() / late.len() as f64
    };
    let slope = if late.len() >= 2 { fit_slope(&late) } else { 0.0 };
    let slope_ok = slope <= slope_tol_rel * late_mean.max(1e-300);

    // Saturation envelope: with a ramped start from rest, y0 = 0 and the
    // envelope is a plateau with headroom for the spin-up overshoot (the
    // forced transient peaks at roughly 1.6x the plateau before the eddy
    // viscosity catches up).
    let envelope = (2.0 * late_mean).max(y0);
    let envelope_ok = energy.iter().all(|(_, e)| *e <= envelope * (1.0 + 1e-9));

    let pass = bounded && (attained_early || slope_ok) && envelope_ok;
    let mut measured = BTreeMap::new();
    measured.insert("sup_energy".into(), json!(sup));
    measured.insert("t_sup".into(), json!(t_sup));
    measured.insert("late_mean".into(), json!(late_mean));
    measured.insert("late_slope".into(), json!(slope));
    measured.insert("envelope".into(), json!(envelope));
    measured.insert("envelope_ok".into(), json!(envelope_ok));
    ConditionReport {
        condition: "condition3_bounded_energy".into(),
        pass,
        asserted: true,
        hypothesis_ok: None,
        measured,
        bound: Some(envelope),
        tolerance: slope_tol_rel,
        config: run_meta(cfg),
    }
}

/// Statistical-equilibrium check: `⟨ε_model⟩ ≤ 4 (1 + Re⁻¹) U³ / L` within a
/// finite-horizon slack, hypothesis `τ/T* ≤ μ^(-1/2)` verified in-run.
/// Out-of-hypothesis runs are reported but not asserted.
pub fn check_condition4(
    eps_series: &[(f64, f64)],
    scales: &FlowScales,
    cfg: &ScenarioConfig,
    t0: f64,
    t_end: f64,
) -> ConditionReport {
    let slack = 0.05;
    let eps_avg = time_average(eps_series, t0, t_end).unwrap_or(0.0);
    let hypothesis_limit = 1.0 / cfg.mu.sqrt();
    let tau_over_tstar =
        if scales.t_star.is_finite() { cfg.tau_s / scales.t_star } else { 0.0 };
    let hypothesis_ok = tau_over_tstar <= hypothesis_limit;

    let (bound, pass) = if scales.velocity == 0.0 {
        (0.0, eps_avg == 0.0)
    } else {
        let bound =
            4.0 * (1.0 + 1.0 / scales.re) * scales.velocity.powi(3) / scales.length;
        (bound, eps_avg <= bound * (1.0 + slack))
    };

    let mut measured = BTreeMap::new();
    measured.insert("eps_avg".into(), json!(eps_avg));
    measured.insert("u".into(), json!(scales.velocity));
    measured.insert("length".into(), json!(scales.length));
    measured.insert("re".into(), json!(scales.re));
    measured.insert("tau_over_t_star".into(), json!(tau_over_tstar));
    measured.insert("hypothesis_limit".into(), json!(hypothesis_limit));
    measured.insert(
        "bound_ratio".into(),
        json!(if bound > 0.0 { eps_avg / bound } else { 0.0 }),
    );
    ConditionReport {
        condition: "condition4_statistical_equilibrium".into(),
        pass,
        asserted: hypothesis_ok,
        hypothesis_ok: Some(hypothesis_ok),
        measured,
        bound: Some(bound),
        tolerance: slack,
        config: run_meta(cfg),
    }
}

/// Production/relaxation balance at one or more horizons:
/// `⟨⟨ν_T⟩_Ω⟩ = 2μτ² ⟨⟨ν_T |∇ˢv|²⟩_Ω⟩` with discrepancy below `tol` at the
/// first horizon and strictly decreasing across horizons.
pub fn check_lemma1(
    result: &RunResult,
    cfg: &ScenarioConfig,
    horizons: &[f64],
    tol: f64,
) -> Result<ConditionReport> {
    if !matches!(cfg.mode, LengthScaleMode::Kinematic) {
        return Err(Error::Config("the balance check applies to the kinematic mode".into()));
    }
    let lhs_series = result.series.series(|s| s.mean_nu_t);
    let rhs_series = result.series.series(|s| s.mean_production);
    let factor = 2.0 * cfg.mu * cfg.tau_s * cfg.tau_s;
    let t0 = cfg.t0_spinup_s;

    let mut discs = Vec::new();
    let mut lhss = Vec::new();
    let mut rhss = Vec::new();
    for &h in horizons {
        let lhs = time_average(&lhs_series, t0, h).unwrap_or(0.0);
        let rhs = factor * time_average(&rhs_series, t0, h).unwrap_or(0.0);
        let denom = lhs.abs().max(rhs.abs());
        let disc = if denom > 0.0 { (lhs - rhs).abs() / denom } else { 0.0 };
        discs.push(disc);
        lhss.push(lhs);
        rhss.push(rhs);
    }
    let first_ok = discs[0] <= tol;
    let decreasing = discs.windows(2).all(|w| w[1] < w[0]);
    let pass = first_ok && (horizons.len() < 2 || decreasing);

    let mut measured = BTreeMap::new();
    measured.insert("horizons".into(), json!(horizons));
    measured.insert("discrepancies".into(), json!(discs));
    measured.insert("lhs_avg_nu_t".into(), json!(lhss));
    measured.insert("rhs_scaled_production".into(), json!(rhss));
    Ok(ConditionReport {
        condition: "lemma1_production_relaxation_balance".into(),
        pass,
        asserted: true,
        hypothesis_ok: None,
        measured,
        bound: None,
        tolerance: tol,
        config: run_meta(cfg),
    })
}

/// First-order consistency of the integrated k-equation
/// `d/dt ∫k + (√2/2τ) ∫k = ∫ √2μkτ |∇ˢv|²`:
/// the naive per-step residual halves when dt halves, and the exact discrete
/// accounting (implicit relaxation, injected production, clamped mass) closes
/// to solver tolerance.
pub fn check_k_energy_equality(
    coarse: &RunResult,
    fine: &RunResult,
    cfg_coarse: &ScenarioConfig,
) -> Result<ConditionReport> {
    if !matches!(cfg_coarse.mode, LengthScaleMode::Kinematic) {
        return Err(Error::Config("the k-balance check applies to the kinematic mode".into()));
    }
    let gamma = 0.5 * SQRT2 / cfg_coarse.tau_s;

    let residuals = |r: &RunResult, dt: f64| -> (f64, f64) {
        let m0 = r.series.samples.first().map(|s| s.k_integral).unwrap_or(0.0);
        let ps = &r.per_step;
        let mut max_naive = 0.0f64;
        let mut max_exact = 0.0f64;
        let mut m_prev = m0;
        for n in 0..ps.t.len() {
            let m_next = ps.k_mass[n];
            let naive = (m_next - m_prev) / dt + gamma * m_prev - ps.production[n];
            let exact = (m_next - m_prev) / dt + ps.relaxation[n]
                - ps.production[n]
                - ps.clamped_mass[n] / dt;
            max_naive = max_naive.max(naive.abs());
            max_exact = max_exact.max(exact.abs());
            m_prev = m_next;
        }
        (max_naive, max_exact)
    };

    let dt_c = cfg_coarse.dt_s;
    let (naive_c, exact_c) = residuals(coarse, dt_c);
    let (naive_f, exact_f) = residuals(fine, dt_c / 2.0);
    let ratio = if naive_f > 0.0 { naive_c / naive_f } else { f64::INFINITY };
    let halving_ok = (1.6..=2.4).contains(&ratio);

    // Exact accounting closes to solver tolerance: compare against the
    // balance terms' own magnitude.
    let scale = coarse
        .per_step
        .production
        .iter()
        .chain(&coarse.per_step.relaxation)
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    let exact_ok = exact_c <= 1e-8 * scale && exact_f <= 1e-8 * scale;

    let mut measured = BTreeMap::new();
    measured.insert("max_residual_dt".into(), json!(naive_c));
    measured.insert("max_residual_dt_half".into(), json!(naive_f));
    measured.insert("residual_ratio".into(), json!(ratio));
    measured.insert("max_exact_residual_dt".into(), json!(exact_c));
    measured.insert("max_exact_residual_dt_half".into(), json!(exact_f));
    Ok(ConditionReport {
        condition: "k_equation_energy_equality".into(),
        pass: halving_ok && exact_ok,
        asserted: true,
        hypothesis_ok: None,
        measured,
        bound: None,
        tolerance: 0.2,
        config: run_meta(cfg_coarse),
    })
}

/// Free-decay exponents of the zero-velocity k-equation: exponential with
/// rate `1/(√2 τ)` for the kinematic scale, power-law exponent -2 for a
/// constant static scale, and -1.3 for the geometric blend with θ = 2/1.3.
pub fn check_decay_exponents() -> Result<ConditionReport> {
    use crate::closure::{Closure, ClosureConfig};
    use crate::grid::{BcKind, Grid};

    let grid = Grid::make((0.0, 0.0), (1.0, 1.0), (4, 4), (BcKind::Periodic, BcKind::Periodic), &[])?;
    let vel = VectorField::zeros(&grid);

    let decay_series = |closure: &Closure, dt: f64, t_end: f64| -> Result<Vec<(f64, f64)>> {
        let mut k = ScalarField::constant(&grid, 1.0);
        let mut t = 0.0;
        let steps = (t_end / dt).round() as usize;
        let mut out = Vec::with_capacity(steps + 1);
        out.push((t, k.at(0, 0)));
        for _ in 0..steps {
            let (k_new, _) = k_step(&k, &vel, closure, &grid, dt)?;
            k = k_new;
            t += dt;
            out.push((t, k.at(0, 0)));
        }
        Ok(out)
    };
    let window_fit = |series: &[(f64, f64)], lo: f64, hi: f64, log_x: bool| -> f64 {
        let pts: Vec<(f64, f64)> = series
            .iter()
            .filter(|(t, k)| *t >= lo && *t <= hi && *k > 0.0)
            .map(|(t, k)| (if log_x { t.ln() } else { *t }, k.ln()))
            .collect();
        fit_slope(&pts)
    };

    // Kinematic: log-linear slope -1/(√2 τ).
    let tau = 1.0;
    let kin = Closure::new(
        ClosureConfig { tau, mode: LengthScaleMode::Kinematic, ..Default::default() },
        &grid,
        1e4,
    )?;
    let series = decay_series(&kin, 0.005, 20.0)?;
    let kin_slope = window_fit(&series, 4.0, 16.0, false);
    let kin_target = -1.0 / (SQRT2 * tau);
    let kin_err = (kin_slope - kin_target).abs() / kin_target.abs();

    // Static constant l: late-time log-log slope -2.
    let static_cfg = ClosureConfig { mode: LengthScaleMode::Static, ..Default::default() };
    let stat = Closure::with_static_field(static_cfg, ScalarField::constant(&grid, 1.0))?;
    let series = decay_series(&stat, 0.05, 2000.0)?;
    let static_slope = window_fit(&series, 1000.0, 2000.0, true);
    let static_err = (static_slope - (-2.0)).abs() / 2.0;

    // Geometric blend with θ = 2/1.3: slope -1.3.
    let theta = 2.0 / 1.3;
    let geo_cfg = ClosureConfig {
        mode: LengthScaleMode::Geometric { theta },
        tau,
        ..Default::default()
    };
    let geo = Closure::with_static_field(geo_cfg, ScalarField::constant(&grid, 1.0))?;
    let series = decay_series(&geo, 0.05, 2000.0)?;
    let geo_slope = window_fit(&series, 1000.0, 2000.0, true);
    let geo_err = (geo_slope - (-1.3)).abs() / 1.3;

    let pass = kin_err <= 0.01 && static_err <= 0.02 && geo_err <= 0.02;
    let mut measured = BTreeMap::new();
    measured.insert("kinematic_log_slope".into(), json!(kin_slope));
    measured.insert("kinematic_target".into(), json!(kin_target));
    measured.insert("kinematic_rel_err".into(), json!(kin_err));
    measured.insert("static_loglog_slope".into(), json!(static_slope));
    measured.insert("static_rel_err".into(), json!(static_err));
    measured.insert("geometric_theta".into(), json!(theta));
    measured.insert("geometric_loglog_slope".into(), json!(geo_slope));
    measured.insert("geometric_rel_err".into(), json!(geo_err));
    Ok(ConditionReport {
        condition: "free_decay_exponents".into(),
        pass,
        asserted: true,
        hypothesis_ok: None,
        measured,
        bound: None,
        tolerance: 0.02,
        config: BTreeMap::from([("grid".into(), json!([4, 4]))]),
    })
}

/// Drive the full verification battery from a base configuration and write
/// one JSON report per check plus an aggregate `verification_report.json`.
/// Returns the reports and the aggregate verdict. Informational reports do
/// not affect the verdict: out-of-hypothesis dissipation-bound runs, and the
/// production/relaxation balance on wall-bounded domains (where the k = 0
/// wall layer is a genuine sink between production and relaxation; the
/// identity is stated for periodic boundaries).
pub fn verify_all(cfg: &ScenarioConfig, out_dir: Option<&Path>) -> Result<(Vec<ConditionReport>, bool)> {
    let mut reports = Vec::new();
    let failed_report = |name: &str, err: &Error| ConditionReport {
        condition: name.into(),
        pass: false,
        asserted: true,
        hypothesis_ok: None,
        measured: BTreeMap::from([("error".into(), json!(err.to_string()))]),
        bound: None,
        tolerance: 0.0,
        config: run_meta(cfg),
    };

    // Main run, extended to twice the horizon for the balance check.
    let mut cfg_main = cfg.clone();
    cfg_main.t_end_s = cfg.t_end_s * 2.0;
    cfg_main.sample_every_steps = cfg.sample_every_steps.min(5);
    let main = run(&cfg_main, None)?;

    let t_end = cfg.t_end_s;
    let energy: Vec<(f64, f64)> = main
        .per_step
        .energy_series()
        .into_iter()
        .filter(|(t, _)| *t <= t_end + 1e-12)
        .collect();
    reports.push(check_condition3(&energy, t_end, cfg));

    let speed_sq: Vec<(f64, f64)> = main
        .series
        .series(|s| s.mean_speed_sq)
        .into_iter()
        .filter(|(t, _)| *t <= t_end + 1e-12)
        .collect();
    let scenario = build_scenario(cfg)?;
    let scales_t = compute_scales(
        &scenario.grid,
        &scenario.force,
        &speed_sq,
        cfg.t0_spinup_s,
        cfg.nu_m2s,
    )?;
    let eps_series = main.series.series(|s| s.eps_model);
    reports.push(check_condition4(&eps_series, &scales_t, cfg, cfg.t0_spinup_s, t_end));

    let wall_bounded = scenario.grid.has_solids()
        || scenario.grid.bc_x != crate::grid::BcKind::Periodic
        || scenario.grid.bc_y != crate::grid::BcKind::Periodic;
    if matches!(cfg.mode, LengthScaleMode::Kinematic) {
        let mut report = check_lemma1(&main, cfg, &[t_end, 2.0 * t_end], 0.10)?;
        if wall_bounded {
            report.asserted = false;
            report.measured.insert(
                "boundary_note".into(),
                json!("wall k-sink between production and relaxation; balance reported, not asserted"),
            );
        }
        reports.push(report);
    }

    // Model reversion on a short horizon. The reference run carries no eddy
    // damping, so it steps four times finer than the base configuration to
    // stay inside the advective CFL guard during spin-up.
    let mut c1_cfg = cfg.clone();
    c1_cfg.t_end_s = cfg.t_end_s.min(2.0);
    c1_cfg.dt_s = cfg.dt_s / 4.0;
    c1_cfg.sample_every_steps = 40;
    match check_condition1(&c1_cfg, &[1e-2, 1e-3, 1e-4], 1e-3) {
        Ok(r) => reports.push(r),
        Err(e) => reports.push(failed_report("condition1_model_reversion", &e)),
    }

    // Integrated k-equation identity on a forced periodic box.
    let kcfg = ScenarioConfig {
        scenario: ScenarioKind::PeriodicBox,
        resolution: [32, 32],
        mode: LengthScaleMode::Kinematic,
        tau_s: 1.0,
        dt_s: 0.01,
        t_end_s: 2.0,
        t0_spinup_s: 0.0,
        ramp: false,
        k_init: crate::config::KInit::Uniform,
        k0_uniform_m2s2: 1e-3,
        force_amplitude: 0.5,
        ..Default::default()
    };
    let mut kcfg_fine = kcfg.clone();
    kcfg_fine.dt_s = kcfg.dt_s / 2.0;
    let coarse = run(&kcfg, None)?;
    let fine = run(&kcfg_fine, None)?;
    reports.push(check_k_energy_equality(&coarse, &fine, &kcfg)?);

    reports.push(check_decay_exponents()?);

    let overall = reports.iter().all(|r| !r.asserted || r.pass);
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        for r in &reports {
            std::fs::write(
                dir.join(format!("{}.json", r.condition)),
                serde_json::to_string_pretty(r)?,
            )?;
        }
        let aggregate = json!({
            "overall_pass": overall,
            "reports": reports,
        });
        std::fs::write(
            dir.join("verification_report.json"),
            serde_json::to_string_pretty(&aggregate)?,
        )?;
    }
    Ok((reports, overall))
}
