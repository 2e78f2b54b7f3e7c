//! Time integration of the momentum/continuity system coupled to the
//! turbulence closure.
//!
//! One step runs
//!
//! 1. an implicit momentum solve: explicit advection and body force, explicit
//!    old-time pressure gradient, implicit variable-viscosity diffusion
//!    `∇·([2ν+ν_T] ∇ˢv)` with old-time `ν_T`, and implicit Brinkman
//!    penalization `-χ_solid v / η` inside the solid mask;
//! 2. a pressure-correction projection that restores a discrete divergence
//!    below `proj_tol` in the max norm;
//! 3. the k-equation step, with production driven by the freshly projected
//!    velocity.
//!
//! A discrete energy audit is recorded every step: the change of
//! `1/2 ||v||² + ∫k` plus the credited dissipation must not exceed the body
//! force work by more than a splitting error that shrinks linearly in `dt`.

use std::io::{Read, Write};
use std::path::Path;

use crate::closure::{k_step, Closure, KStepDiagnostics};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::linsolve::{cg, cg_with_precond, CgOptions, SolveStats};
use crate::ops;

/// Body force of the ramped rotational scenario:
/// `f = min{t,1} · (-4y(1-x²-y²), 4x(1-x²-y²))`.
pub fn body_force_annulus(x: f64, y: f64, t: f64, ramp: bool) -> (f64, f64) {
    let factor = if ramp { t.min(1.0) } else { 1.0 };
    let shape = 1.0 - x * x - y * y;
    (-4.0 * y * shape * factor, 4.0 * x * shape * factor)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BodyForce {
    None,
    /// Counter-clockwise rotational forcing of the obstructed-disk scenario.
    Annulus { amp: f64 },
    Uniform { fx: f64, fy: f64 },
    /// Divergence-free cellular forcing
    /// `amp · (sin(ω x) cos(ω y), -cos(ω x) sin(ω y))` for periodic boxes.
    Cellular { amp: f64, omega: f64 },
}

impl BodyForce {
    /// Unramped force at a point.
    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            BodyForce::None => (0.0, 0.0),
            BodyForce::Annulus { amp } => {
                let (fx, fy) = body_force_annulus(x, y, 1.0, false);
                (amp * fx, amp * fy)
            }
            BodyForce::Uniform { fx, fy } => (fx, fy),
            BodyForce::Cellular { amp, omega } => (
                amp * (omega * x).sin() * (omega * y).cos(),
                -amp * (omega * x).cos() * (omega * y).sin(),
            ),
        }
    }

    /// Sample the force on the staggered faces at ramp time `t`.
    pub fn sample(&self, grid: &Grid, t: f64, ramp: bool) -> VectorField {
        let factor = if ramp { t.min(1.0) } else { 1.0 };
        VectorField::from_fn(
            grid,
            |x, y| self.eval(x, y).0 * factor,
            |x, y| self.eval(x, y).1 * factor,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Max-norm bound on the post-projection divergence.
    pub proj_tol: f64,
    /// Brinkman penalization time scale.
    pub penal_eta: f64,
    /// Multiply the body force by `min{t, 1}`.
    pub ramp: bool,
    /// Advective CFL guard; the step aborts above this.
    pub cfl_limit: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_end: 10.0,
            proj_tol: 1e-8,
            penal_eta: 1e-6,
            ramp: true,
            cfl_limit: 0.9,
            max_iter: 50_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        if !(self.proj_tol > 0.0) {
            return Err(Error::Config("proj_tol must be positive".into()));
        }
        if !(self.penal_eta > 0.0) {
            return Err(Error::Config("penal_eta must be positive".into()));
        }
        if self.t_end < 0.0 {
            return Err(Error::Config("t_end must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FlowState {
    pub vel: VectorField,
    pub p: ScalarField,
    pub k: ScalarField,
    pub t: f64,
    pub step: u64,
}

impl FlowState {
    pub fn rest(grid: &Grid) -> Self {
        Self {
            vel: VectorField::zeros(grid),
            p: ScalarField::zeros(grid),
            k: ScalarField::zeros(grid),
            t: 0.0,
            step: 0,
        }
    }

    /// Total model energy `1/2 ||v||² + ∫k dx` (face-native kinetic part,
    /// fluid-only k part).
    pub fn total_energy(&self, grid: &Grid) -> f64 {
        self.vel.kinetic_energy(grid) + self.k.integral_fluid(grid)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct StepDiagnostics {
    pub momentum: SolveStats,
    pub poisson: SolveStats,
    pub k_solve: SolveStats,
    pub cfl: f64,
    pub div_inf: f64,
    pub clamped_mass: f64,
    pub k_mass_pre: f64,
    pub k_mass_post: f64,
    /// Production injected into k this step (new velocity, old ν_T).
    pub production_integral: f64,
    /// Dissipation removed from k by the implicit relaxation this step.
    pub relaxation_integral: f64,
    pub energy_pre: f64,
    pub energy_post: f64,
    /// `∫ 2ν |∇ˢv|² + k^(3/2)/l dx` of the post-step state.
    pub dissipation_post: f64,
    /// `(f, v)` with the force actually applied this step and the post-step
    /// velocity.
    pub force_work: f64,
    /// `ΔE + dt·dissipation - dt·work`; positive values are splitting error.
    pub audit_residual: f64,
}

/// Active-face index maps for the packed momentum solve.
pub struct FaceMaps {
    pub u: Vec<(usize, usize)>,
    pub v: Vec<(usize, usize)>,
}

impl FaceMaps {
    pub fn build(grid: &Grid) -> Self {
        Self {
            u: VectorField::active_u(grid).collect(),
            v: VectorField::active_v(grid).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.u.len() + self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pack(&self, vel: &VectorField, out: &mut [f64]) {
        let nu = self.u.len();
        for (pos, &(i, j)) in self.u.iter().enumerate() {
            out[pos] = vel.u[vel.u_idx(i, j)];
        }
        for (pos, &(i, j)) in self.v.iter().enumerate() {
            out[nu + pos] = vel.v[vel.v_idx(i, j)];
        }
    }

    pub fn unpack(&self, x: &[f64], grid: &Grid, vel: &mut VectorField) {
        let nu = self.u.len();
        vel.u.fill(0.0);
        vel.v.fill(0.0);
        for (pos, &(i, j)) in self.u.iter().enumerate() {
            let idx = vel.u_idx(i, j);
            vel.u[idx] = x[pos];
        }
        for (pos, &(i, j)) in self.v.iter().enumerate() {
            let idx = vel.v_idx(i, j);
            vel.v[idx] = x[nu + pos];
        }
        vel.apply_bc(grid);
    }
}

/// Advance the advection/diffusion/force part of the momentum equation with
/// the old-time pressure gradient; returns the unprojected velocity.
pub fn momentum_step(
    state: &FlowState,
    closure: &Closure,
    grid: &Grid,
    cfg: &SolverConfig,
    force: &BodyForce,
    maps: &FaceMaps,
) -> Result<(VectorField, SolveStats)> {
    let dt = cfg.dt;
    let nu_t = closure.eddy_viscosity_field(&state.k);
    let mut a_cell = nu_t;
    for v in a_cell.data_mut() {
        *v = 2.0 * closure.cfg.nu + *v;
    }

    let adv = ops::advect_velocity(grid, &state.vel);
    let gp = ops::gradient(grid, &state.p);
    let f = force.sample(grid, state.t, cfg.ramp);

    let n = maps.len();
    let nu_faces = maps.u.len();
    let mut b = vec![0.0; n];
    let mut penal = vec![0.0; n];
    let inv_eta = 1.0 / cfg.penal_eta;
    for (pos, &(i, j)) in maps.u.iter().enumerate() {
        let idx = state.vel.u_idx(i, j);
        b[pos] = state.vel.u[idx] / dt + adv.u[idx] - gp.u[idx] + f.u[idx];
        if grid.u_face_penalized(i, j) {
            penal[pos] = inv_eta;
        }
    }
    for (pos, &(i, j)) in maps.v.iter().enumerate() {
        let idx = state.vel.v_idx(i, j);
        b[nu_faces + pos] = state.vel.v[idx] / dt + adv.v[idx] - gp.v[idx] + f.v[idx];
        if grid.v_face_penalized(i, j) {
            penal[nu_faces + pos] = inv_eta;
        }
    }

    let mut inv_diag = vec![0.0; n];
    for (pos, &(i, j)) in maps.u.iter().enumerate() {
        inv_diag[pos] = 1.0 / (1.0 / dt + penal[pos] + ops::sym_grad_diag_u(grid, &a_cell, i, j));
    }
    for (pos, &(i, j)) in maps.v.iter().enumerate() {
        inv_diag[nu_faces + pos] =
            1.0 / (1.0 / dt + penal[nu_faces + pos] + ops::sym_grad_diag_v(grid, &a_cell, i, j));
    }

    let mut x = vec![0.0; n];
    maps.pack(&state.vel, &mut x);

    let corners = ops::corner_coeffs(grid, &a_cell);
    let mut vel_work = VectorField::zeros(grid);
    let mut diff_work = VectorField::zeros(grid);
    let apply = |xs: &[f64], out: &mut [f64]| {
        maps.unpack(xs, grid, &mut vel_work);
        ops::sym_grad_apply(grid, &vel_work, &a_cell, &corners, &mut diff_work);
        for (pos, &(i, j)) in maps.u.iter().enumerate() {
            out[pos] = xs[pos] * (1.0 / dt + penal[pos]) - diff_work.u[diff_work.u_idx(i, j)];
        }
        for (pos, &(i, j)) in maps.v.iter().enumerate() {
            let q = nu_faces + pos;
            out[q] = xs[q] * (1.0 / dt + penal[q]) - diff_work.v[diff_work.v_idx(i, j)];
        }
    };
    let b_inf = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let stats = cg(
        apply,
        &b,
        &mut x,
        &CgOptions {
            tol_inf: 1e-12 * b_inf,
            accept_tol_inf: 1e-9 * b_inf,
            max_iter: cfg.max_iter,
            precond_inv_diag: Some(&inv_diag),
            remove_mean: false,
            label: "momentum",
        },
    )?;

    let mut u_star = VectorField::zeros(grid);
    maps.unpack(&x, grid, &mut u_star);
    Ok((u_star, stats))
}

/// Project the intermediate velocity onto the discretely divergence-free
/// space; `p` receives the pressure increment. Returns the solve stats and
/// the post-correction max-norm divergence.
pub fn pressure_project(
    grid: &Grid,
    u_star: &mut VectorField,
    p: &mut ScalarField,
    cfg: &SolverConfig,
) -> Result<(SolveStats, f64)> {
    let dt = cfg.dt;
    let mut div = ops::divergence(grid, u_star);
    // Solve -∇²φ = -div(u*)/dt so that v = u* - dt ∇φ is divergence free.
    let b: Vec<f64> = div.data().iter().map(|d| -d / dt).collect();
    let mut phi = vec![0.0; b.len()];
    let mut scratch_vel = VectorField::zeros(grid);
    let mut scratch = ScalarField::zeros(grid);
    let mut field = ScalarField::zeros(grid);
    let apply = |xs: &[f64], out: &mut [f64]| {
        field.data_mut().copy_from_slice(xs);
        ops::neg_laplacian_into(grid, &field, &mut scratch_vel, &mut scratch);
        out.copy_from_slice(scratch.data());
    };
    let stencil = ops::SsorStencil::poisson(grid);
    let stats = cg_with_precond(
        apply,
        |r: &[f64], z: &mut [f64]| stencil.ssor(r, z),
        &b,
        &mut phi,
        &CgOptions {
            tol_inf: 0.5 * cfg.proj_tol / dt,
            accept_tol_inf: 0.5 * cfg.proj_tol / dt,
            max_iter: cfg.max_iter,
            precond_inv_diag: None,
            remove_mean: true,
            label: "pressure",
        },
    )?;

    let mut phi_field = ScalarField::zeros(grid);
    phi_field.data_mut().copy_from_slice(&phi);
    let gphi = ops::gradient(grid, &phi_field);
    for (u, g) in u_star.u.iter_mut().zip(&gphi.u) {
        *u -= dt * g;
    }
    for (v, g) in u_star.v.iter_mut().zip(&gphi.v) {
        *v -= dt * g;
    }
    u_star.apply_bc(grid);
    for (pv, inc) in p.data_mut().iter_mut().zip(&phi) {
        *pv += inc;
    }
    ops::divergence_into(grid, u_star, &mut div);
    Ok((stats, div.linf()))
}

/// One full time step: momentum, projection, k-equation, clock advance.
pub fn step(
    state: &mut FlowState,
    closure: &Closure,
    grid: &Grid,
    cfg: &SolverConfig,
    force: &BodyForce,
    maps: &FaceMaps,
) -> Result<StepDiagnostics> {
    let dt = cfg.dt;
    let mut diag = StepDiagnostics::default();

    diag.cfl = state.vel.linf() * dt / grid.dx.min(grid.dy);
    if diag.cfl > cfg.cfl_limit {
        return Err(Error::CflViolation {
            cfl: diag.cfl,
            limit: cfg.cfl_limit,
            t: state.t,
            step: state.step,
        });
    }

    diag.energy_pre = state.total_energy(grid);
    diag.k_mass_pre = state.k.integral_fluid(grid);
    let t_force = state.t;

    let (mut u_star, mom_stats) = momentum_step(state, closure, grid, cfg, force, maps)?;
    diag.momentum = mom_stats;
    let (poisson_stats, div_inf) = pressure_project(grid, &mut u_star, &mut state.p, cfg)?;
    diag.poisson = poisson_stats;
    diag.div_inf = div_inf;
    state.vel = u_star;

    let (k_new, k_diag): (ScalarField, KStepDiagnostics) =
        k_step(&state.k, &state.vel, closure, grid, dt)?;
    diag.k_solve = k_diag.solve;
    diag.clamped_mass = k_diag.clamped_mass;
    diag.production_integral = k_diag.production_integral;
    diag.relaxation_integral = k_diag.relaxation_integral;
    state.k = k_new;

    state.t += dt;
    state.step += 1;

    diag.k_mass_post = state.k.integral_fluid(grid);
    diag.energy_post = state.total_energy(grid);
    let defmag = ops::deformation_magsq(grid, &state.vel);
    let relax = closure.relaxation_density(&state.k);
    let mut diss = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_fluid(i, j) {
                diss += 2.0 * closure.cfg.nu * defmag.at(i, j) + relax.at(i, j);
            }
        }
    }
    diag.dissipation_post = diss * grid.cell_volume();

    let f = force.sample(grid, t_force, cfg.ramp);
    let mut work = 0.0;
    for (i, j) in VectorField::active_u(grid) {
        work += f.u[f.u_idx(i, j)] * state.vel.u[state.vel.u_idx(i, j)];
    }
    for (i, j) in VectorField::active_v(grid) {
        work += f.v[f.v_idx(i, j)] * state.vel.v[state.vel.v_idx(i, j)];
    }
    diag.force_work = work * grid.cell_volume();

    diag.audit_residual =
        (diag.energy_post - diag.energy_pre) + dt * diag.dissipation_post - dt * diag.force_work;
    Ok(diag)
}

pub const CHECKPOINT_MAGIC: [u8; 8] = *b"PRNDTLCK";
pub const CHECKPOINT_VERSION: u32 = 1;
const CHECKPOINT_HEADER_LEN: usize = 64;

/// Serialize the state in the flat little-endian layout documented in the
/// README: a 64-byte header (magic, version, nx, ny, t, step) followed by the
/// u, v, p and k arrays in row-major order. Restarts from this file are
/// bit-reproducible.
pub fn write_checkpoint(path: &Path, state: &FlowState) -> Result<()> {
    let mut header = [0u8; CHECKPOINT_HEADER_LEN];
    header[0..8].copy_from_slice(&CHECKPOINT_MAGIC);
    header[8..12].copy_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    header[12..16].copy_from_slice(&(state.vel.nx as u32).to_le_bytes());
    header[16..20].copy_from_slice(&(state.vel.ny as u32).to_le_bytes());
    header[24..32].copy_from_slice(&state.t.to_le_bytes());
    header[32..40].copy_from_slice(&state.step.to_le_bytes());

    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(&header)?;
    for arr in [&state.vel.u, &state.vel.v, &state.p.data().to_vec(), &state.k.data().to_vec()] {
        for v in arr.iter() {
            file.write_all(&v.to_le_bytes())?;
        }
    }
    file.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path, grid: &Grid) -> Result<FlowState> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut header = [0u8; CHECKPOINT_HEADER_LEN];
    file.read_exact(&mut header)?;
    if header[0..8] != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let nx = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let ny = u32::from_le_bytes(header[16..20].try_into().unwrap()) as usize;
    if nx != grid.nx || ny != grid.ny {
        return Err(Error::Checkpoint(format!(
            "checkpoint is {nx}x{ny}, grid is {}x{}",
            grid.nx, grid.ny
        )));
    }
    let t = f64::from_le_bytes(header[24..32].try_into().unwrap());
    let step = u64::from_le_bytes(header[32..40].try_into().unwrap());

    let mut state = FlowState::rest(grid);
    state.t = t;
    state.step = step;
    let mut buf = [0u8; 8];
    for v in state.vel.u.iter_mut() {
        file.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    for v in state.vel.v.iter_mut() {
        file.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    for v in state.p.data_mut().iter_mut() {
        file.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    for v in state.k.data_mut().iter_mut() {
        file.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    Ok(state)
}
