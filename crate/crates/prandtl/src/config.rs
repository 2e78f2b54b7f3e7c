//! JSON run configuration, validation, stable hashing, and scenario
//! construction.
//!
//! A configuration is a single JSON document; dimensioned fields carry their
//! unit in the name (`tau_s`, `nu_m2s`, `u0_bulk_ms`). The configuration hash
//! is computed from the canonical (key-sorted) JSON serialization of the
//! typed document, so it is stable under field reordering in the input file.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::closure::{
    initial_k_duct, initial_k_from_l0, static_length_scale, Closure, ClosureConfig,
    LengthScaleMode,
};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::{BcKind, Circle, Grid, SolidRegion};
use crate::solver::{BodyForce, FlowState, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Rotationally forced flow in a penalized disk with an offset circular
    /// obstacle, embedded in a periodic box.
    Annulus2d,
    /// Fully periodic box with a cellular body force.
    PeriodicBox,
    /// Streamwise-periodic channel with no-slip walls and uniform forcing.
    Channel,
    /// Zero-velocity free decay of a uniform k field.
    DecayOde,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Annulus2d => "annulus2d",
            ScenarioKind::PeriodicBox => "periodic_box",
            ScenarioKind::Channel => "channel",
            ScenarioKind::DecayOde => "decay_ode",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KInit {
    /// `k(x,0) = l0(x)² / (2τ²)`, so the kinematic length starts equal to the
    /// static one.
    FromL0,
    /// `k = 1.5 |u0|² I²` with `I = 0.16 Re^(-1/8)`.
    Duct,
    /// Uniform value `k0_uniform_m2s2`.
    Uniform,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub resolution: [usize; 2],
    pub mode: LengthScaleMode,
    pub mu: f64,
    pub tau_s: f64,
    pub nu_m2s: f64,
    pub k_floor_m2s2: f64,
    /// Reynolds number used by the static length-scale formula and the duct
    /// initializer; defaults to `1/ν` (unit length and velocity scales).
    pub re_nominal: Option<f64>,
    pub dt_s: f64,
    pub t_end_s: f64,
    pub proj_tol: f64,
    pub penal_eta_s: f64,
    pub ramp: bool,
    /// Spin-up cutoff: statistics time averages start here.
    pub t0_spinup_s: f64,
    pub sample_every_steps: usize,
    pub snapshot_times_s: Vec<f64>,
    pub checkpoint_times_s: Vec<f64>,
    pub k_init: KInit,
    /// Uniform initial streamwise velocity (channel scenario).
    pub u0_bulk_ms: f64,
    /// Uniform initial k (decay scenario, `k_init = uniform`).
    pub k0_uniform_m2s2: f64,
    /// Override the static length scale with a constant (decay scenario).
    pub l0_const_m: Option<f64>,
    /// Multiplier on the scenario's body force.
    pub force_amplitude: f64,
    pub restart_from: Option<PathBuf>,
    pub run_name: Option<String>,
    pub sweep: Option<SweepSpec>,
}

impl Default for ScenarioConfig {
    /// The paper-style default: rotationally forced obstructed disk, 64²,
    /// kinematic closure with τ=1, μ=0.55, ν=1e-4, dt=0.01, T=10.
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::Annulus2d,
            resolution: [64, 64],
            mode: LengthScaleMode::Kinematic,
            mu: 0.55,
            tau_s: 1.0,
            nu_m2s: 1e-4,
            k_floor_m2s2: 0.0,
            re_nominal: None,
            dt_s: 0.01,
            t_end_s: 10.0,
            proj_tol: 1e-8,
            penal_eta_s: 1e-6,
            ramp: true,
            t0_spinup_s: 1.0,
            sample_every_steps: 10,
            snapshot_times_s: Vec::new(),
            checkpoint_times_s: Vec::new(),
            k_init: KInit::FromL0,
            u0_bulk_ms: 0.0,
            k0_uniform_m2s2: 1.0,
            l0_const_m: None,
            force_amplitude: 1.0,
            restart_from: None,
            run_name: None,
            sweep: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.closure_config().validate()?;
        self.solver_config().validate()?;
        if self.resolution[0] < 4 || self.resolution[1] < 4 {
            return Err(Error::Config("resolution must be at least 4x4".into()));
        }
        if self.sample_every_steps == 0 {
            return Err(Error::Config("sample_every_steps must be positive".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::Config("sweep values must be non-empty".into()));
            }
            sweep_apply(self.clone(), &sweep.param, sweep.values[0])?;
        }
        if let Some(re) = self.re_nominal {
            if !(re > 0.0) {
                return Err(Error::Config("re_nominal must be positive".into()));
            }
        }
        if matches!(self.k_init, KInit::FromL0) && !(self.tau_s > 0.0) {
            return Err(Error::Config("k_init=from_l0 requires tau_s > 0".into()));
        }
        Ok(())
    }

    pub fn re_nominal(&self) -> f64 {
        self.re_nominal.unwrap_or(1.0 / self.nu_m2s)
    }

    pub fn closure_config(&self) -> ClosureConfig {
        ClosureConfig {
            mu: self.mu,
            tau: self.tau_s,
            mode: self.mode,
            nu: self.nu_m2s,
            k_floor: self.k_floor_m2s2,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt: self.dt_s,
            t_end: self.t_end_s,
            proj_tol: self.proj_tol,
            penal_eta: self.penal_eta_s,
            ramp: self.ramp,
            ..SolverConfig::default()
        }
    }

    /// Hex SHA-256 of the canonical JSON serialization. serde_json sorts
    /// object keys, so the hash does not depend on input field order.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Return a copy of the config with one sweepable parameter replaced.
pub fn sweep_apply(mut cfg: ScenarioConfig, param: &str, value: f64) -> Result<ScenarioConfig> {
    match param {
        "tau" => cfg.tau_s = value,
        "mu" => cfg.mu = value,
        "nu" => cfg.nu_m2s = value,
        "dt" => cfg.dt_s = value,
        "theta" => match cfg.mode {
            LengthScaleMode::Geometric { .. } => {
                cfg.mode = LengthScaleMode::Geometric { theta: value }
            }
            _ => {
                return Err(Error::Config(
                    "theta sweep requires the geometric length-scale mode".into(),
                ))
            }
        },
        "re_nominal" => cfg.re_nominal = Some(value),
        "force_amplitude" => cfg.force_amplitude = value,
        other => {
            return Err(Error::Config(format!(
                "unknown sweep parameter '{other}' (tau, mu, nu, dt, theta, re_nominal, force_amplitude)"
            )))
        }
    }
    cfg.sweep = None;
    Ok(cfg)
}

/// Everything the run loop needs, assembled from a config.
pub struct Scenario {
    pub grid: Grid,
    pub closure: Closure,
    pub solver: SolverConfig,
    pub force: BodyForce,
    pub initial: FlowState,
    pub re_nominal: f64,
    pub t0: f64,
}

/// The obstacle layout of the obstructed-disk scenario: the flow domain is
/// the unit disk minus a small circle at (0.5, 0), realized as solid masks in
/// a periodic `[-1,1]²` box.
pub fn annulus_solids() -> Vec<SolidRegion> {
    vec![
        SolidRegion::OutsideCircle(Circle::new(0.0, 0.0, 1.0)),
        SolidRegion::InsideCircle(Circle::new(0.5, 0.0, 0.1)),
    ]
}

pub fn build_scenario(cfg: &ScenarioConfig) -> Result<Scenario> {
    cfg.validate()?;
    let (nx, ny) = (cfg.resolution[0], cfg.resolution[1]);
    let re = cfg.re_nominal();

    let (grid, force) = match cfg.scenario {
        ScenarioKind::Annulus2d => {
            let grid = Grid::make(
                (-1.0, -1.0),
                (2.0, 2.0),
                (nx, ny),
                (BcKind::Periodic, BcKind::Periodic),
                &annulus_solids(),
            )?;
            (grid, BodyForce::Annulus { amp: cfg.force_amplitude })
        }
        ScenarioKind::PeriodicBox => {
            let grid = Grid::make(
                (0.0, 0.0),
                (1.0, 1.0),
                (nx, ny),
                (BcKind::Periodic, BcKind::Periodic),
                &[],
            )?;
            let omega = 2.0 * std::f64::consts::PI;
            (grid, BodyForce::Cellular { amp: cfg.force_amplitude, omega })
        }
        ScenarioKind::Channel => {
            let grid = Grid::make(
                (0.0, 0.0),
                (2.0, 1.0),
                (nx, ny),
                (BcKind::Periodic, BcKind::NoSlip),
                &[],
            )?;
            (grid, BodyForce::Uniform { fx: cfg.force_amplitude, fy: 0.0 })
        }
        ScenarioKind::DecayOde => {
            let grid = Grid::make(
                (0.0, 0.0),
                (1.0, 1.0),
                (nx, ny),
                (BcKind::Periodic, BcKind::Periodic),
                &[],
            )?;
            (grid, BodyForce::None)
        }
    };

    let closure_cfg = cfg.closure_config();
    let closure = match cfg.l0_const_m {
        Some(l0) => Closure::with_static_field(closure_cfg, ScalarField::constant(&grid, l0))?,
        None => Closure::new(closure_cfg, &grid, re)?,
    };

    let mut initial = FlowState::rest(&grid);
    if cfg.u0_bulk_ms != 0.0 {
        initial.vel = VectorField::from_fn(&grid, |_, _| cfg.u0_bulk_ms, |_, _| 0.0);
    }
    initial.k = match cfg.k_init {
        KInit::FromL0 => {
            let l0 = match cfg.l0_const_m {
                Some(l0) => ScalarField::constant(&grid, l0),
                None => static_length_scale(&grid, re),
            };
            initial_k_from_l0(&l0, cfg.tau_s)
        }
        KInit::Duct => initial_k_duct(&grid, &initial.vel, re),
        KInit::Uniform => ScalarField::constant(&grid, cfg.k0_uniform_m2s2),
        KInit::Zero => ScalarField::zeros(&grid),
    };
    // k vanishes inside obstacles and on the wall-adjacent Dirichlet layer.
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_solid(i, j) || grid.wall_distance(i, j) == 0.0 {
                initial.k.set(i, j, 0.0);
            }
        }
    }

    Ok(Scenario {
        grid,
        closure,
        solver: cfg.solver_config(),
        force,
        initial,
        re_nominal: re,
        t0: cfg.t0_spinup_s,
    })
}
