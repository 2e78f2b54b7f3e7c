//! End-to-end run orchestration: the time loop, statistics sampling, output
//! files, run manifests, paired-run comparison, and parameter sweeps.
//!
//! Output layout per run (under the output root, which the CLI takes from
//! `--out`, the `PRANDTL_OUT` environment variable, or the working
//! directory):
//!
//! ```text
//! <out>/<run_name>/
//!   stats.csv            time series, one row per sampling interval
//!   manifest.json        config hash, diagnostics, emitted files
//!   snapshot_t*.csv      cell-center field dumps at requested times
//!   checkpoint_t*.ckpt   restartable binary state at requested times
//!   final.ckpt           state at t_end
//! ```
//!
//! Identical configurations produce byte-identical CSV and checkpoint
//! outputs: kernels are sequential with a fixed reduction order and all
//! scheduling is driven by integer step counts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{build_scenario, sweep_apply, Scenario, ScenarioConfig};
use crate::error::{Error, Result};
use crate::solver::{
    read_checkpoint, step, write_checkpoint, FaceMaps, FlowState, StepDiagnostics,
};
use crate::stats::{compute_scales, sample_stats, time_average, FlowScales, StatSeries};

/// Cheap per-step series used by the verification checks and the energy
/// audit; recorded on every step.
#[derive(Clone, Debug, Default)]
pub struct StepSeries {
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub k_mass: Vec<f64>,
    pub production: Vec<f64>,
    pub relaxation: Vec<f64>,
    pub clamped_mass: Vec<f64>,
    pub audit_residual: Vec<f64>,
    pub div_inf: Vec<f64>,
}

impl StepSeries {
    fn push(&mut self, t: f64, d: &StepDiagnostics) {
        self.t.push(t);
        self.energy.push(d.energy_post);
        self.k_mass.push(d.k_mass_post);
        self.production.push(d.production_integral);
        self.relaxation.push(d.relaxation_integral);
        self.clamped_mass.push(d.clamped_mass);
        self.audit_residual.push(d.audit_residual);
        self.div_inf.push(d.div_inf);
    }

    pub fn energy_series(&self) -> Vec<(f64, f64)> {
        self.t.iter().copied().zip(self.energy.iter().copied()).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub steps: u64,
    pub wall_seconds: f64,
    pub max_cfl: f64,
    pub max_div_inf: f64,
    pub total_clamped_mass: f64,
    /// Largest per-step ratio of clamped mass to `∫k dx`.
    pub max_clamp_ratio: f64,
    pub momentum_iters: u64,
    pub poisson_iters: u64,
    pub k_iters: u64,
    pub max_audit_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub scenario: String,
    pub run_name: String,
    pub started_unix_ms: u64,
    pub ended_unix_ms: u64,
    pub emitted_files: Vec<String>,
    pub diagnostics: RunDiagnostics,
    pub scales: Option<BTreeMap<String, f64>>,
    /// Time averages of the emitted statistics over `[t0, T]`.
    pub averages: BTreeMap<String, Option<f64>>,
    pub failure: Option<String>,
    pub failure_step: Option<u64>,
    /// Geometry deviations baked into the scenario (penalized masks instead
    /// of body-fitted walls).
    pub geometry_note: Option<String>,
}

pub struct RunResult {
    pub manifest: RunManifest,
    pub series: StatSeries,
    pub per_step: StepSeries,
    pub final_state: FlowState,
    pub scales: Option<FlowScales>,
    pub out_dir: Option<PathBuf>,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// Resolve the output root: explicit flag, `PRANDTL_OUT`, or the working
/// directory.
pub fn output_root(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var("PRANDTL_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from(".")
}

pub fn run_dir_name(cfg: &ScenarioConfig) -> String {
    match &cfg.run_name {
        Some(name) => name.clone(),
        None => format!("{}-{}", cfg.scenario.name(), &cfg.hash()[..8]),
    }
}

fn scales_map(s: &FlowScales) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("F".into(), s.force_scale),
        ("L".into(), s.length),
        ("U".into(), s.velocity),
        ("Re".into(), s.re),
        ("T_star".into(), s.t_star),
        ("sup_grad_f".into(), s.sup_grad_f),
        ("rms_grad_f".into(), s.rms_grad_f),
    ])
}

/// Execute a scenario end to end. When `out_dir` is given, all output files
/// are written beneath it (the directory is created); the manifest is written
/// even when a solver error aborts the run, with the failure step recorded.
pub fn run(cfg: &ScenarioConfig, out_dir: Option<&Path>) -> Result<RunResult> {
    let started = now_ms();
    let scenario = build_scenario(cfg)?;
    let Scenario { grid, closure, solver: solver_cfg, force, initial, t0, .. } = scenario;
    let maps = FaceMaps::build(&grid);

    let mut state = match &cfg.restart_from {
        Some(path) => read_checkpoint(path, &grid)?,
        None => initial,
    };

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }

    let dt = solver_cfg.dt;
    let total_steps = (solver_cfg.t_end / dt).round() as u64;
    let snapshot_steps: Vec<u64> =
        cfg.snapshot_times_s.iter().map(|t| (t / dt).round() as u64).collect();
    let checkpoint_steps: Vec<u64> =
        cfg.checkpoint_times_s.iter().map(|t| (t / dt).round() as u64).collect();

    let mut series = StatSeries::default();
    let mut per_step = StepSeries::default();
    let mut diagnostics = RunDiagnostics::default();
    let mut emitted: Vec<String> = Vec::new();
    let mut failure: Option<(String, u64)> = None;

    let emit_state_files = |state: &FlowState,
                                emitted: &mut Vec<String>,
                                snapshot: bool,
                                checkpoint: bool|
     -> Result<()> {
        if let Some(dir) = out_dir {
            if snapshot {
                let name = format!("snapshot_t{:.4}.csv", state.t);
                write_snapshot(&dir.join(&name), &grid, &closure, state)?;
                emitted.push(name);
            }
            if checkpoint {
                let name = format!("checkpoint_t{:.4}.ckpt", state.t);
                write_checkpoint(&dir.join(&name), state)?;
                emitted.push(name);
            }
        }
        Ok(())
    };

    // Sample the initial (or restart) state, then march.
    series.push(sample_stats(&state, &closure, &grid));
    emit_state_files(
        &state,
        &mut emitted,
        snapshot_steps.contains(&state.step),
        checkpoint_steps.contains(&state.step),
    )?;

    while state.step < total_steps {
        match step(&mut state, &closure, &grid, &solver_cfg, &force, &maps) {
            Ok(d) => {
                per_step.push(state.t, &d);
                diagnostics.steps += 1;
                diagnostics.max_cfl = diagnostics.max_cfl.max(d.cfl);
                diagnostics.max_div_inf = diagnostics.max_div_inf.max(d.div_inf);
                diagnostics.total_clamped_mass += d.clamped_mass;
                if d.k_mass_post > 0.0 {
                    diagnostics.max_clamp_ratio =
                        diagnostics.max_clamp_ratio.max(d.clamped_mass / d.k_mass_post);
                }
                diagnostics.momentum_iters += d.momentum.iterations as u64;
                diagnostics.poisson_iters += d.poisson.iterations as u64;
                diagnostics.k_iters += d.k_solve.iterations as u64;
                diagnostics.max_audit_residual =
                    diagnostics.max_audit_residual.max(d.audit_residual);
            }
            Err(e) => {
                failure = Some((e.to_string(), state.step));
                break;
            }
        }
        if state.step % cfg.sample_every_steps as u64 == 0 || state.step == total_steps {
            series.push(sample_stats(&state, &closure, &grid));
        }
        emit_state_files(
            &state,
            &mut emitted,
            snapshot_steps.contains(&state.step),
            checkpoint_steps.contains(&state.step),
        )?;
    }

    // Scales need a nonzero force and a velocity history past the cutoff.
    let speed_sq = series.series(|s| s.mean_speed_sq);
    let scales = compute_scales(&grid, &force, &speed_sq, t0, closure.cfg.nu).ok();

    let mut averages: BTreeMap<String, Option<f64>> = BTreeMap::new();
    let t_end = state.t;
    let avg_of = |sel: &dyn Fn(&crate::stats::RawSample) -> Option<f64>| -> Option<f64> {
        let pts: Vec<(f64, f64)> = series
            .samples
            .iter()
            .filter_map(|s| sel(s).map(|v| (s.t, v)))
            .collect();
        time_average(&pts, t0, t_end)
    };
    averages.insert("energy".into(), avg_of(&|s| Some(s.energy)));
    averages.insert("eps_model".into(), avg_of(&|s| Some(s.eps_model)));
    averages.insert("intensity".into(), avg_of(&|s| s.intensity));
    averages.insert("nu_eff".into(), avg_of(&|s| s.nu_eff));
    averages.insert("vr".into(), avg_of(&|s| s.vr));
    averages.insert("taylor".into(), avg_of(&|s| s.taylor));
    if let Some(sc) = &scales {
        averages.insert(
            "avg_l_over_L".into(),
            avg_of(&|s| s.avg_l).map(|v| v / sc.length),
        );
        averages.insert(
            "avg_nuT_over_LU".into(),
            if sc.velocity > 0.0 {
                avg_of(&|s| Some(s.mean_nu_t)).map(|v| v / (sc.length * sc.velocity))
            } else {
                None
            },
        );
    }

    if let Some(dir) = out_dir {
        if let Some(sc) = &scales {
            std::fs::write(dir.join("stats.csv"), series.to_csv(sc))?;
            emitted.push("stats.csv".into());
        } else {
            // No defined scales (unforced run): emit with unit scales so the
            // series is still inspectable.
            let unit = FlowScales {
                force_scale: 0.0,
                length: 1.0,
                velocity: 1.0,
                re: 0.0,
                t_star: f64::INFINITY,
                domain_scale: grid.extent.0.max(grid.extent.1),
                sup_grad_f: 0.0,
                rms_grad_f: 0.0,
            };
            std::fs::write(dir.join("stats.csv"), series.to_csv(&unit))?;
            emitted.push("stats.csv".into());
        }
        if failure.is_none() {
            write_checkpoint(&dir.join("final.ckpt"), &state)?;
            emitted.push("final.ckpt".into());
        }
    }

    diagnostics.wall_seconds = (now_ms() - started) as f64 / 1000.0;
    let manifest = RunManifest {
        config_hash: cfg.hash(),
        scenario: cfg.scenario.name().into(),
        run_name: run_dir_name(cfg),
        started_unix_ms: started,
        ended_unix_ms: now_ms(),
        emitted_files: emitted,
        diagnostics,
        scales: scales.as_ref().map(scales_map),
        averages,
        failure: failure.as_ref().map(|(msg, _)| msg.clone()),
        failure_step: failure.as_ref().map(|(_, s)| *s),
        geometry_note: match cfg.scenario {
            crate::config::ScenarioKind::Annulus2d => Some(
                "curved walls are volume-penalized masks in a periodic box, not body-fitted"
                    .into(),
            ),
            _ => None,
        },
    };
    if let Some(dir) = out_dir {
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    }

    if let Some((msg, step_idx)) = failure {
        return Err(Error::Config(format!("run aborted at step {step_idx}: {msg}")));
    }

    Ok(RunResult {
        manifest,
        series,
        per_step,
        final_state: state,
        scales,
        out_dir: out_dir.map(|p| p.to_path_buf()),
    })
}

/// Cell-center field snapshot: `x,y,u,v,p,k,nu_t` per cell.
fn write_snapshot(
    path: &Path,
    grid: &crate::grid::Grid,
    closure: &crate::closure::Closure,
    state: &FlowState,
) -> Result<()> {
    let nu_t = closure.eddy_viscosity_field(&state.k);
    let mut out = String::from("x,y,u,v,p,k,nu_t\n");
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (uc, vc) = state.vel.at_center(i, j);
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                grid.x_center(i),
                grid.y_center(j),
                uc,
                vc,
                state.p.at(i, j),
                state.k.at(i, j),
                nu_t.at(i, j),
            ));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Paired comparison of two completed runs that share grid, dt, and sampling
/// times. Produces a per-sample CSV of both series and their differences plus
/// time-averaged difference summaries.
pub struct Comparison {
    pub csv: String,
    pub avg_diff: BTreeMap<String, Option<f64>>,
}

const COMPARED_STATS: [&str; 8] =
    ["energy", "eps_model", "intensity", "nu_eff", "vr", "taylor", "avg_l_over_L", "avg_nuT_over_LU"];

pub fn compare_results(a: &RunResult, b: &RunResult, t0: f64) -> Result<Comparison> {
    let (sa, sb) = (&a.series, &b.series);
    if sa.samples.len() != sb.samples.len() {
        return Err(Error::Compare(format!(
            "sample counts differ: {} vs {}",
            sa.samples.len(),
            sb.samples.len()
        )));
    }
    for (ra, rb) in sa.samples.iter().zip(&sb.samples) {
        if (ra.t - rb.t).abs() > 1e-12 {
            return Err(Error::Compare(format!("sampling times differ: {} vs {}", ra.t, rb.t)));
        }
    }
    let scale_a = a.scales.as_ref().ok_or_else(|| Error::Compare("run A has no scales".into()))?;
    let scale_b = b.scales.as_ref().ok_or_else(|| Error::Compare("run B has no scales".into()))?;
    let rec_a = sa.to_records(scale_a);
    let rec_b = sb.to_records(scale_b);

    let select = |r: &crate::stats::StatRecord, name: &str| -> Option<f64> {
        match name {
            "energy" => Some(r.energy),
            "eps_model" => Some(r.eps_model),
            "intensity" => r.intensity,
            "nu_eff" => r.nu_eff,
            "vr" => r.vr,
            "taylor" => r.taylor,
            "avg_l_over_L" => r.avg_l_over_l,
            "avg_nuT_over_LU" => r.avg_nu_t_over_lu,
            _ => None,
        }
    };

    let mut csv = String::from("t");
    for name in COMPARED_STATS {
        csv.push_str(&format!(",{name}_a,{name}_b,{name}_diff"));
    }
    csv.push('\n');
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (ra, rb) in rec_a.iter().zip(&rec_b) {
        csv.push_str(&ra.t.to_string());
        for name in COMPARED_STATS {
            let va = select(ra, name);
            let vb = select(rb, name);
            let diff = match (va, vb) {
                (Some(x), Some(y)) => Some(x - y),
                _ => None,
            };
            csv.push_str(&format!(",{},{},{}", fmt(va), fmt(vb), fmt(diff)));
        }
        csv.push('\n');
    }

    let t_end = rec_a.last().map(|r| r.t).unwrap_or(t0);
    let mut avg_diff = BTreeMap::new();
    for name in COMPARED_STATS {
        let pts: Vec<(f64, f64)> = rec_a
            .iter()
            .zip(&rec_b)
            .filter_map(|(ra, rb)| match (select(ra, name), select(rb, name)) {
                (Some(x), Some(y)) => Some((ra.t, x - y)),
                _ => None,
            })
            .collect();
        avg_diff.insert(name.to_string(), time_average(&pts, t0, t_end));
    }
    Ok(Comparison { csv, avg_diff })
}

/// File-based comparison driven by two manifests, for the CLI.
pub fn compare_manifests(
    manifest_a: &Path,
    manifest_b: &Path,
    out_dir: &Path,
) -> Result<Comparison> {
    let load = |path: &Path| -> Result<(RunManifest, Vec<BTreeMap<String, Option<f64>>>, Vec<f64>)> {
        let manifest: RunManifest = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        let csv = std::fs::read_to_string(dir.join("stats.csv"))?;
        let mut rows = Vec::new();
        let mut times = Vec::new();
        let mut lines = csv.lines();
        let header: Vec<String> =
            lines.next().unwrap_or_default().split(',').map(|s| s.to_string()).collect();
        for line in lines {
            let mut row = BTreeMap::new();
            let mut t = f64::NAN;
            for (name, field) in header.iter().zip(line.split(',')) {
                let value = if field.is_empty() { None } else { field.parse::<f64>().ok() };
                if name == "t" {
                    t = value.unwrap_or(f64::NAN);
                } else {
                    row.insert(name.clone(), value);
                }
            }
            times.push(t);
            rows.push(row);
        }
        Ok((manifest, rows, times))
    };
    let (ma, rows_a, t_a) = load(manifest_a)?;
    let (mb, rows_b, t_b) = load(manifest_b)?;
    if t_a.len() != t_b.len() || t_a.iter().zip(&t_b).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(Error::Compare("runs have different sampling times".into()));
    }
    if ma.config_hash == mb.config_hash {
        // Identical configs are legal; the comparison is then all zeros.
    }

    let mut csv = String::from("t");
    for name in COMPARED_STATS {
        csv.push_str(&format!(",{name}_a,{name}_b,{name}_diff"));
    }
    csv.push('\n');
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut sums: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for ((t, ra), rb) in t_a.iter().zip(&rows_a).zip(&rows_b) {
        csv.push_str(&t.to_string());
        for name in COMPARED_STATS {
            let va = ra.get(name).copied().flatten();
            let vb = rb.get(name).copied().flatten();
            let diff = match (va, vb) {
                (Some(x), Some(y)) => Some(x - y),
                _ => None,
            };
            if let Some(d) = diff {
                sums.entry(name.to_string()).or_default().push((*t, d));
            }
            csv.push_str(&format!(",{},{},{}", fmt(va), fmt(vb), fmt(diff)));
        }
        csv.push('\n');
    }
    let t_end = t_a.last().copied().unwrap_or(0.0);
    let mut avg_diff = BTreeMap::new();
    for name in COMPARED_STATS {
        let avg = sums.get(name).and_then(|pts| time_average(pts, 0.0, t_end));
        avg_diff.insert(name.to_string(), avg);
    }

    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("comparison.csv"), &csv)?;
    std::fs::write(
        out_dir.join("comparison_summary.json"),
        serde_json::to_string_pretty(&avg_diff)?,
    )?;
    Ok(Comparison { csv, avg_diff })
}

/// Run one configuration per sweep value in parallel; each run owns its own
/// output directory `sweep_<param>_<value>`. Returns manifests in value
/// order.
pub fn sweep(
    cfg: &ScenarioConfig,
    param: &str,
    values: &[f64],
    out_root: Option<&Path>,
) -> Result<Vec<RunResult>> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    // Validate all variants up front so a bad parameter fails fast.
    let variants: Result<Vec<ScenarioConfig>> = values
        .iter()
        .map(|v| {
            let mut c = sweep_apply(cfg.clone(), param, *v)?;
            c.run_name = Some(format!("sweep_{param}_{v}"));
            Ok(c)
        })
        .collect();
    let variants = variants?;

    let results: Vec<Result<RunResult>> = variants
        .par_iter()
        .map(|c| {
            let dir = out_root.map(|root| root.join(c.run_name.as_deref().unwrap_or("run")));
            run(c, dir.as_deref())
        })
        .collect();

    let mut out = Vec::with_capacity(results.len());
    for r in results {
        out.push(r?);
    }

    if let Some(root) = out_root {
        let mut summary = String::from(format!("{param},energy,eps_model,nu_eff,avg_l_over_L,avg_nuT_over_LU\n"));
        let fmt = |v: Option<&Option<f64>>| {
            v.and_then(|x| x.as_ref()).map(|x| x.to_string()).unwrap_or_default()
        };
        for (v, r) in values.iter().zip(&out) {
            summary.push_str(&format!(
                "{},{},{},{},{},{}\n",
                v,
                fmt(r.manifest.averages.get("energy")),
                fmt(r.manifest.averages.get("eps_model")),
                fmt(r.manifest.averages.get("nu_eff")),
                fmt(r.manifest.averages.get("avg_l_over_L")),
                fmt(r.manifest.averages.get("avg_nuT_over_LU")),
            ));
        }
        std::fs::create_dir_all(root)?;
        std::fs::write(root.join("sweep_summary.csv"), summary)?;
    }
    Ok(out)
}
