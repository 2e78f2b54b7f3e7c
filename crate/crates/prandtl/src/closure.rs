//! Turbulence closure: mixing length scales, eddy viscosity, and the
//! turbulent-kinetic-energy transport step.
//!
//! The model solves
//!
//! ```text
//! k_t + v·∇k - ∇·([ν + ν_T] ∇k) + k^(3/2)/l = ν_T |∇ˢv|²,   ν_T = μ l √k
//! ```
//!
//! with the length scale `l` selected per [`LengthScaleMode`]:
//!
//! * `Static`: `l0(x) = min(0.41 y, 0.082 Re^(-1/2))`, `y` = wall distance.
//! * `Kinematic`: `l(x,t) = sqrt(2) k^(1/2) τ`, which turns the dissipation
//!   term into the linear relaxation `(sqrt(2)/2) τ⁻¹ k` and the eddy
//!   viscosity into `sqrt(2) μ k τ`.
//! * `Geometric(θ)`: the pointwise blend `l0^θ · l_K^(1-θ)`.
//!
//! The step treats advection explicitly (monotone upwind), diffusion
//! implicitly, and the dissipation term implicitly — linearly in `k` for the
//! kinematic scale, with a lagged `√k` factor otherwise — so positivity never
//! depends on `dt` being small relative to the relaxation time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::linsolve::{cg_with_precond, CgOptions, SolveStats};
use crate::ops;

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Von Karman slope and outer-scale cap of the static channel length scale.
pub const STATIC_WALL_SLOPE: f64 = 0.41;
pub const STATIC_CAP_COEFF: f64 = 0.082;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LengthScaleMode {
    /// Geometry-based mixing length, fixed in time.
    Static,
    /// State-based mixing length `sqrt(2) k^(1/2) τ`.
    Kinematic,
    /// `l0^θ · l_K^(1-θ)` blend; θ=1 is static, θ=0 kinematic.
    Geometric { theta: f64 },
    /// No turbulence model: ν_T ≡ 0 and k is left untouched. Reference mode
    /// for model-reversion checks.
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureConfig {
    /// Calibration constant of the Prandtl-Kolmogorov eddy viscosity.
    pub mu: f64,
    /// Time-filter window. May be exactly zero in kinematic mode, which
    /// reproduces the plain Navier-Stokes step bit for bit.
    pub tau: f64,
    pub mode: LengthScaleMode,
    /// Kinematic (molecular) viscosity.
    pub nu: f64,
    /// Values of k below this are clamped up and the clamped mass logged.
    pub k_floor: f64,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        Self {
            mu: 0.55,
            tau: 1.0,
            mode: LengthScaleMode::Kinematic,
            nu: 1e-4,
            k_floor: 0.0,
        }
    }
}

impl ClosureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::Config(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.nu > 0.0) {
            return Err(Error::Config(format!("nu must be positive, got {}", self.nu)));
        }
        if self.k_floor < 0.0 {
            return Err(Error::Config("k_floor must be nonnegative".into()));
        }
        match self.mode {
            LengthScaleMode::Kinematic => {
                if self.tau < 0.0 {
                    return Err(Error::Config("tau must be nonnegative".into()));
                }
            }
            LengthScaleMode::Geometric { theta } => {
                if !(self.tau > 0.0) {
                    return Err(Error::Config("tau must be positive for the geometric blend".into()));
                }
                if !(0.0..=2.0).contains(&theta) {
                    return Err(Error::Config(format!("theta must lie in [0, 2], got {theta}")));
                }
            }
            LengthScaleMode::Static | LengthScaleMode::Off => {}
        }
        Ok(())
    }
}

/// `min(0.41 y, 0.082 Re^(-1/2))` at a single wall distance.
pub fn static_length_scale_at(wall_distance: f64, re: f64) -> f64 {
    (STATIC_WALL_SLOPE * wall_distance).min(STATIC_CAP_COEFF / re.sqrt())
}

/// Static mixing length from the grid's wall distances. On grids without any
/// wall the distance is infinite and the cap term applies everywhere.
pub fn static_length_scale(grid: &Grid, re: f64) -> ScalarField {
    let mut out = ScalarField::zeros(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            out.set(i, j, static_length_scale_at(grid.wall_distance(i, j), re));
        }
    }
    out
}

/// `l = sqrt(2) k^(1/2) τ` pointwise; negative k is a contract violation and
/// is guarded only by a debug assertion.
pub fn kinematic_length_scale(k: &ScalarField, tau: f64) -> ScalarField {
    let mut out = k.clone();
    for v in out.data_mut() {
        debug_assert!(*v >= 0.0, "kinematic_length_scale expects k >= 0");
        *v = SQRT2 * v.max(0.0).sqrt() * tau;
    }
    out
}

/// Pointwise weighted geometric mean `l0^θ · lk^(1-θ)`. For θ in (0, 1] a
/// vanishing l0 yields zero; for θ > 1 a vanishing lk sends the blend to
/// infinity, which downstream consumers treat as "no dissipation here".
pub fn geometric_length_scale(l0: &ScalarField, lk: &ScalarField, theta: f64) -> ScalarField {
    let mut out = l0.clone();
    for (v, lk_v) in out.data_mut().iter_mut().zip(lk.data()) {
        *v = v.powf(theta) * lk_v.powf(1.0 - theta);
    }
    out
}

/// Prandtl-Kolmogorov eddy viscosity `ν_T = μ l √k`.
pub fn eddy_viscosity(l: &ScalarField, k: &ScalarField, mu: f64) -> ScalarField {
    let mut out = l.clone();
    for (v, k_v) in out.data_mut().iter_mut().zip(k.data()) {
        *v = mu * *v * k_v.max(0.0).sqrt();
    }
    out
}

/// Initial turbulent kinetic energy chosen so the kinematic length scale
/// starts equal to the static one: `k(x,0) = l0(x)² / (2 τ²)`.
pub fn initial_k_from_l0(l0: &ScalarField, tau: f64) -> ScalarField {
    assert!(tau > 0.0, "initializer requires a positive time window");
    let mut out = l0.clone();
    for v in out.data_mut() {
        *v = *v * *v / (2.0 * tau * tau);
    }
    out
}

/// Duct-style initializer `k = 1.5 |u0|² I²` with turbulent intensity
/// `I = 0.16 Re^(-1/8)`.
pub fn initial_k_duct(grid: &Grid, vel0: &VectorField, re: f64) -> ScalarField {
    assert!(re > 0.0);
    let intensity = 0.16 * re.powf(-0.125);
    let mut out = ScalarField::zeros(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (uc, vc) = vel0.at_center(i, j);
            let speed_sq = uc * uc + vc * vc;
            out.set(i, j, 1.5 * speed_sq * intensity * intensity);
        }
    }
    out
}

/// Runtime closure: configuration plus the cached static length scale where
/// the mode needs one.
#[derive(Clone, Debug)]
pub struct Closure {
    pub cfg: ClosureConfig,
    l0: Option<ScalarField>,
}

impl Closure {
    pub fn new(cfg: ClosureConfig, grid: &Grid, re_nominal: f64) -> Result<Self> {
        cfg.validate()?;
        let l0 = match cfg.mode {
            LengthScaleMode::Static | LengthScaleMode::Geometric { .. } => {
                if !(re_nominal > 0.0) {
                    return Err(Error::Config("static length scale needs a positive Reynolds number".into()));
                }
                Some(static_length_scale(grid, re_nominal))
            }
            _ => None,
        };
        Ok(Self { cfg, l0 })
    }

    /// Use an explicit static length-scale field (uniform test fields,
    /// free-decay configurations).
    pub fn with_static_field(cfg: ClosureConfig, l0: ScalarField) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, l0: Some(l0) })
    }

    pub fn l0(&self) -> Option<&ScalarField> {
        self.l0.as_ref()
    }

    /// The active mixing-length field for the given state.
    pub fn length_scale(&self, k: &ScalarField) -> ScalarField {
        match self.cfg.mode {
            LengthScaleMode::Static => self.l0.clone().expect("static mode caches l0"),
            LengthScaleMode::Kinematic => kinematic_length_scale(k, self.cfg.tau),
            LengthScaleMode::Geometric { theta } => {
                let lk = kinematic_length_scale(k, self.cfg.tau);
                geometric_length_scale(self.l0.as_ref().expect("geometric mode caches l0"), &lk, theta)
            }
            LengthScaleMode::Off => {
                let mut z = k.clone();
                z.fill(0.0);
                z
            }
        }
    }

    /// `ν_T = μ l √k` for the active mode; identically zero when the model is
    /// off and exactly zero in kinematic mode with τ = 0.
    pub fn eddy_viscosity_field(&self, k: &ScalarField) -> ScalarField {
        match self.cfg.mode {
            LengthScaleMode::Off => {
                let mut z = k.clone();
                z.fill(0.0);
                z
            }
            _ => eddy_viscosity(&self.length_scale(k), k, self.cfg.mu),
        }
    }

    /// Energy density removed by the dissipation term `k^(3/2)/l`; for the
    /// kinematic scale this is the relaxation `(sqrt(2)/2) τ⁻¹ k`.
    pub fn relaxation_density(&self, k: &ScalarField) -> ScalarField {
        let mut out = k.clone();
        match self.cfg.mode {
            LengthScaleMode::Off => out.fill(0.0),
            LengthScaleMode::Kinematic => {
                let tau = self.cfg.tau;
                for v in out.data_mut() {
                    *v = if tau > 0.0 { 0.5 * SQRT2 * *v / tau } else { 0.0 };
                }
            }
            LengthScaleMode::Static => {
                let l0 = self.l0.as_ref().expect("static mode caches l0");
                for (v, l) in out.data_mut().iter_mut().zip(l0.data()) {
                    *v = if *l > 0.0 { v.max(0.0).powf(1.5) / l } else { 0.0 };
                }
            }
            LengthScaleMode::Geometric { theta } => {
                let l0 = self.l0.as_ref().expect("geometric mode caches l0");
                let denom_t = (SQRT2 * self.cfg.tau).powf(1.0 - theta);
                for (v, l) in out.data_mut().iter_mut().zip(l0.data()) {
                    *v = if *l > 0.0 || theta == 0.0 {
                        v.max(0.0).powf(0.5 * (2.0 + theta)) / (l.powf(theta) * denom_t)
                    } else {
                        0.0
                    };
                }
            }
        }
        out
    }

    /// Coefficient `c` of the implicit dissipation treatment
    /// `c(k_old) · k_new`; `None` marks cells whose k is pinned to zero
    /// because the length scale vanishes there.
    fn relaxation_coeff(&self, k_old: f64, l0: f64) -> Option<f64> {
        match self.cfg.mode {
            LengthScaleMode::Off => Some(0.0),
            LengthScaleMode::Kinematic => Some(0.5 * SQRT2 / self.cfg.tau),
            LengthScaleMode::Static => {
                if l0 > 0.0 {
                    Some(k_old.max(0.0).sqrt() / l0)
                } else {
                    None
                }
            }
            LengthScaleMode::Geometric { theta } => {
                if theta == 0.0 {
                    Some(0.5 * SQRT2 / self.cfg.tau)
                } else if l0 > 0.0 {
                    let denom = l0.powf(theta) * (SQRT2 * self.cfg.tau).powf(1.0 - theta);
                    Some(k_old.max(0.0).powf(0.5 * theta) / denom)
                } else {
                    None
                }
            }
        }
    }
}

/// Turbulent kinetic energy carries a homogeneous Dirichlet condition at
/// walls: cells in the first layer off a no-slip or penalized surface (zero
/// wall distance) hold k = 0 in every mode, so the mixing length vanishes at
/// walls. Without it, the one-cell velocity jump at a penalized interface
/// feeds spurious production.
#[inline]
fn k_pinned_at_wall(grid: &Grid, i: usize, j: usize) -> bool {
    grid.wall_distance(i, j) == 0.0
}

#[derive(Clone, Debug, Default)]
pub struct KStepDiagnostics {
    pub solve: SolveStats,
    /// Mass `∫ max(k_floor - k, 0) dx` restored by the clamp.
    pub clamped_mass: f64,
    /// `∫ ν_T |∇ˢv|² dx` actually injected this step.
    pub production_integral: f64,
    /// `∫ c(k_old) k_new dx` actually removed this step.
    pub relaxation_integral: f64,
}

/// One implicit-explicit step of the k-equation. `vel` is the velocity used
/// for both advection and production (the caller passes the freshly projected
/// field); diffusivity and production use the entry value of k.
pub fn k_step(
    k_old: &ScalarField,
    vel: &VectorField,
    closure: &Closure,
    grid: &Grid,
    dt: f64,
) -> Result<(ScalarField, KStepDiagnostics)> {
    assert!(dt > 0.0, "k_step requires dt > 0");
    let mut diag = KStepDiagnostics::default();

    if matches!(closure.cfg.mode, LengthScaleMode::Off) {
        return Ok((k_old.clone(), diag));
    }
    // τ = 0 collapses the kinematic relaxation time to zero: k is destroyed
    // within the step and the model term vanishes identically.
    if closure.cfg.tau == 0.0 && matches!(closure.cfg.mode, LengthScaleMode::Kinematic) {
        let mut k = k_old.clone();
        k.fill(0.0);
        return Ok((k, diag));
    }

    let nu_t = closure.eddy_viscosity_field(k_old);
    let mut d_cell = nu_t.clone();
    for v in d_cell.data_mut() {
        *v += closure.cfg.nu;
    }
    let adv = ops::advect_scalar(grid, vel, k_old);
    let defmag = ops::deformation_magsq(grid, vel);

    // Active cells: fluid, and not pinned to zero by a vanishing length scale.
    let zero_l0 = ScalarField::zeros(grid);
    let l0 = closure.l0.as_ref().unwrap_or(&zero_l0);
    let mut cells = Vec::with_capacity(grid.fluid_cell_count());
    let mut coeff = Vec::with_capacity(grid.fluid_cell_count());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if grid.is_solid(i, j) || k_pinned_at_wall(grid, i, j) {
                continue;
            }
            match closure.relaxation_coeff(k_old.at(i, j), l0.at(i, j)) {
                Some(c) => {
                    cells.push((i, j));
                    coeff.push(c);
                }
                None => {}
            }
        }
    }

    let mut b = Vec::with_capacity(cells.len());
    for (&(i, j), _) in cells.iter().zip(&coeff) {
        let production = nu_t.at(i, j) * defmag.at(i, j);
        b.push(k_old.at(i, j) / dt + adv.at(i, j) + production);
        diag.production_integral += production;
    }
    diag.production_integral *= grid.cell_volume();

    // Symmetric Gauss-Seidel preconditioner over the active cells.
    let diff_diag = ops::scalar_diffusion_diag(grid, &d_cell);
    let mut pos = vec![usize::MAX; grid.nx * grid.ny];
    for (p, &(i, j)) in cells.iter().enumerate() {
        pos[grid.idx(i, j)] = p;
    }
    let mut inv_diag = Vec::with_capacity(cells.len());
    let mut stencil_neighbors = vec![(0u32, 0.0f64); 4 * cells.len()];
    for (p, (&(i, j), c)) in cells.iter().zip(&coeff).enumerate() {
        inv_diag.push(1.0 / (1.0 / dt + c + diff_diag.at(i, j)));
        for (slot, (di, dj, h)) in
            [(-1i64, 0i64, grid.dx), (1, 0, grid.dx), (0, -1, grid.dy), (0, 1, grid.dy)]
                .into_iter()
                .enumerate()
        {
            stencil_neighbors[4 * p + slot] = (p as u32, 0.0);
            if let Some((ni, nj)) = grid.neighbor(i, j, di, dj) {
                let q = pos[grid.idx(ni, nj)];
                if q != usize::MAX {
                    let d_face = 0.5 * (d_cell.at(i, j) + d_cell.at(ni, nj));
                    stencil_neighbors[4 * p + slot] = (q as u32, -d_face / (h * h));
                }
            }
        }
    }
    let stencil = ops::SsorStencil::new(inv_diag, stencil_neighbors);

    // Matrix-free apply: unpack into a full field (pinned/solid cells read as
    // zero), run the diffusion stencil, repack.
    let mut work = ScalarField::zeros(grid);
    let mut diffused = ScalarField::zeros(grid);
    let mut x = vec![0.0; cells.len()];
    let apply = |xs: &[f64], out: &mut [f64]| {
        work.fill(0.0);
        for (pos, &(i, j)) in cells.iter().enumerate() {
            work.set(i, j, xs[pos]);
        }
        ops::scalar_diffusion_neg(grid, &work, &d_cell, &mut diffused);
        for (pos, &(i, j)) in cells.iter().enumerate() {
            out[pos] = xs[pos] / dt + coeff[pos] * xs[pos] + diffused.at(i, j);
        }
    };
    let b_inf = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // A fully decayed k field eventually reaches denormal magnitudes where
    // the iteration cannot reduce residuals (intermediate products
    // underflow). Flush it to zero and account the lost mass with the clamp.
    if b_inf < 1e-120 {
        let k_new = ScalarField::zeros(grid);
        diag.clamped_mass = k_old.integral_fluid(grid).max(0.0);
        diag.production_integral = 0.0;
        diag.relaxation_integral = 0.0;
        return Ok((k_new, diag));
    }
    let stats = cg_with_precond(
        apply,
        |r: &[f64], z: &mut [f64]| stencil.ssor(r, z),
        &b,
        &mut x,
        &CgOptions {
            tol_inf: 1e-14 * b_inf,
            accept_tol_inf: 1e-10 * b_inf,
            max_iter: 10_000,
            precond_inv_diag: None,
            remove_mean: false,
            label: "k-diffusion",
        },
    )?;
    diag.solve = stats;

    let mut k_new = ScalarField::zeros(grid);
    let floor = closure.cfg.k_floor;
    for (pos, &(i, j)) in cells.iter().enumerate() {
        let mut val = x[pos];
        if val < floor {
            diag.clamped_mass += floor - val;
            val = floor;
        }
        diag.relaxation_integral += coeff[pos] * val;
        k_new.set(i, j, val);
    }
    diag.clamped_mass *= grid.cell_volume();
    diag.relaxation_integral *= grid.cell_volume();
    Ok((k_new, diag))
}

/// Free-decay mode parameters for the zero-velocity k-equation
/// `k' = -k^(3/2) / l(k)`.
#[derive(Clone, Copy, Debug)]
pub enum DecayMode {
    Kinematic { tau: f64 },
    StaticConst { l: f64 },
    Geometric { theta: f64, l0: f64, tau: f64 },
}

impl DecayMode {
    fn rate(&self, k: f64) -> f64 {
        let k = k.max(0.0);
        match *self {
            DecayMode::Kinematic { tau } => -0.5 * SQRT2 * k / tau,
            DecayMode::StaticConst { l } => -k.powf(1.5) / l,
            DecayMode::Geometric { theta, l0, tau } => {
                -k.powf(0.5 * (2.0 + theta)) / (l0.powf(theta) * (SQRT2 * tau).powf(1.0 - theta))
            }
        }
    }
}

/// High-accuracy scalar ODE oracle for the free-decay k-equation, integrated
/// with an adaptive Dormand-Prince 5(4) pair to a 1e-10 relative tolerance.
/// Independent of the field solver; used to cross-check `k_step`.
pub fn decay_ode_oracle(k0: f64, mode: DecayMode, t_end: f64) -> f64 {
    assert!(k0 >= 0.0);
    if t_end == 0.0 || k0 == 0.0 {
        return k0;
    }
    let f = |k: f64| mode.rate(k);
    let rel_tol = 1e-10;
    let abs_tol = 1e-14 * k0;

    let mut t = 0.0;
    let mut k = k0;
    let mut h = (t_end / 100.0).min(0.1);
    // Dormand-Prince butcher tableau.
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    while t < t_end {
        h = h.min(t_end - t);
        let mut ks = [0.0f64; 7];
        ks[0] = f(k);
        for stage in 0..6 {
            let mut y = k;
            for (m, a) in A[stage].iter().enumerate().take(stage + 1) {
                y += h * a * ks[m];
            }
            ks[stage + 1] = f(y);
        }
        let mut y5 = k;
        let mut y4 = k;
        for m in 0..7 {
            y5 += h * B5[m] * ks[m];
            y4 += h * B4[m] * ks[m];
        }
        let err = (y5 - y4).abs();
        let scale = abs_tol + rel_tol * k.abs().max(y5.abs());
        if err <= scale {
            t += h;
            k = y5.max(0.0);
        }
        let factor = if err > 0.0 { 0.9 * (scale / err).powf(0.2) } else { 4.0 };
        h *= factor.clamp(0.2, 4.0);
        if h < 1e-15 * t_end.max(1.0) {
            break;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BcKind;
    use approx::assert_relative_eq;

    fn periodic_grid(n: usize) -> Grid {
        Grid::make((0.0, 0.0), (1.0, 1.0), (n, n), (BcKind::Periodic, BcKind::Periodic), &[]).unwrap()
    }

    #[test]
    fn static_length_scale_formula() {
        assert_eq!(static_length_scale_at(0.0, 1e4), 0.0);
        assert_relative_eq!(static_length_scale_at(0.001, 1e4), 4.1e-4, epsilon = 1e-16);
        assert_relative_eq!(static_length_scale_at(0.5, 1e4), 8.2e-4, epsilon = 1e-16);
        // Infinite wall distance falls back to the cap term.
        assert_relative_eq!(static_length_scale_at(f64::INFINITY, 1e4), 8.2e-4);
    }

    #[test]
    fn kinematic_length_scale_values() {
        let g = periodic_grid(4);
        let k = ScalarField::constant(&g, 0.5);
        let l = kinematic_length_scale(&k, 1.0);
        assert_relative_eq!(l.at(0, 0), 1.0, epsilon = 1e-15);
        let k = ScalarField::constant(&g, 2.0);
        let l = kinematic_length_scale(&k, 0.5);
        assert_relative_eq!(l.at(2, 2), 1.0, epsilon = 1e-15);
        let k = ScalarField::zeros(&g);
        assert_eq!(kinematic_length_scale(&k, 3.0).at(1, 1), 0.0);
    }

    #[test]
    fn geometric_blend_endpoints_and_midpoint() {
        let g = periodic_grid(4);
        let l0 = ScalarField::constant(&g, 4.0);
        let lk = ScalarField::constant(&g, 1.0);
        assert_relative_eq!(geometric_length_scale(&l0, &lk, 1.0).at(0, 0), 4.0);
        assert_relative_eq!(geometric_length_scale(&l0, &lk, 0.0).at(0, 0), 1.0);
        assert_relative_eq!(geometric_length_scale(&l0, &lk, 0.5).at(0, 0), 2.0);
        // Vanishing l0 wins for θ > 0.
        let l0 = ScalarField::zeros(&g);
        assert_eq!(geometric_length_scale(&l0, &lk, 0.5).at(0, 0), 0.0);
    }

    #[test]
    fn eddy_viscosity_values() {
        let g = periodic_grid(4);
        let k = ScalarField::zeros(&g);
        let l = ScalarField::constant(&g, 1.0);
        assert_eq!(eddy_viscosity(&l, &k, 0.55).at(0, 0), 0.0);
        let k = ScalarField::constant(&g, 1.0);
        assert_relative_eq!(eddy_viscosity(&l, &k, 0.55).at(0, 0), 0.55);
        // Kinematic substitution: μ l_K √k = sqrt(2) μ k τ.
        let k = ScalarField::constant(&g, 0.5);
        let lk = kinematic_length_scale(&k, 1.0);
        assert_relative_eq!(
            eddy_viscosity(&lk, &k, 0.55).at(0, 0),
            SQRT2 * 0.55 * 0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn initializer_round_trip() {
        let g = periodic_grid(6);
        let l0 = ScalarField::from_fn(&g, |x, y| 1e-3 * (1.0 + x + y));
        let tau = 0.7;
        let k0 = initial_k_from_l0(&l0, tau);
        let back = kinematic_length_scale(&k0, tau);
        for (a, b) in back.data().iter().zip(l0.data()) {
            assert_relative_eq!(a, b, epsilon = 1e-15, max_relative = 1e-12);
        }
        // Direct value.
        let l0 = ScalarField::constant(&g, 4.1e-4);
        let k0 = initial_k_from_l0(&l0, 1.0);
        assert_relative_eq!(k0.at(0, 0), 8.405e-8, max_relative = 1e-12);
    }

    #[test]
    fn duct_initializer_values() {
        let g = periodic_grid(4);
        let vel = VectorField::from_fn(&g, |_, _| 1.0, |_, _| 0.0);
        let k = initial_k_duct(&g, &vel, 1e4);
        let intensity = 0.16 * 1e4f64.powf(-0.125);
        assert_relative_eq!(k.at(1, 1), 1.5 * intensity * intensity, max_relative = 1e-12);
        assert_relative_eq!(k.at(1, 1), 3.84e-3, max_relative = 0.01);
        // Zero velocity gives zero k; doubling velocity quadruples k.
        let zero = VectorField::zeros(&g);
        assert_eq!(initial_k_duct(&g, &zero, 1e4).at(0, 0), 0.0);
        let vel2 = VectorField::from_fn(&g, |_, _| 2.0, |_, _| 0.0);
        let k2 = initial_k_duct(&g, &vel2, 1e4);
        assert_relative_eq!(k2.at(1, 1) / k.at(1, 1), 4.0, max_relative = 1e-12);
    }

    #[test]
    fn decay_oracle_matches_closed_forms() {
        // Kinematic: exact exponential with rate 1/(sqrt(2) τ).
        let k = decay_ode_oracle(1.0, DecayMode::Kinematic { tau: 1.0 }, SQRT2);
        assert_relative_eq!(k, (-1.0f64).exp(), max_relative = 1e-9);
        // Static constant l: k(t) = k0 (1 + sqrt(k0) t / (2 l))^-2.
        let k = decay_ode_oracle(1.0, DecayMode::StaticConst { l: 1.0 }, 2.0);
        assert_relative_eq!(k, 0.25, max_relative = 1e-9);
        // Geometric blend: k(t) = k0 (1 + λ t)^(-2/θ).
        let theta: f64 = 2.0 / 1.3;
        let mode = DecayMode::Geometric { theta, l0: 1.0, tau: 1.0 };
        let p = 0.5 * (2.0 + theta);
        let c = 1.0 / (SQRT2f64.powf(1.0 - theta));
        let t = 5.0;
        let exact = (1.0 + c * (p - 1.0) * t).powf(-1.0 / (p - 1.0));
        let k = decay_ode_oracle(1.0, mode, t);
        assert_relative_eq!(k, exact, max_relative = 1e-8);
    }

    #[allow(non_upper_case_globals)]
    const SQRT2f64: f64 = SQRT2;

    fn uniform_setup(n: usize, k0: f64) -> (Grid, ScalarField, VectorField) {
        let g = periodic_grid(n);
        let k = ScalarField::constant(&g, k0);
        let vel = VectorField::zeros(&g);
        (g, k, vel)
    }

    #[test]
    fn k_step_fixed_point_at_zero() {
        let (g, _, vel) = uniform_setup(8, 0.0);
        let k = ScalarField::zeros(&g);
        let closure = Closure::new(ClosureConfig::default(), &g, 1e4).unwrap();
        let (k_new, diag) = k_step(&k, &vel, &closure, &g, 0.01).unwrap();
        assert!(k_new.linf() == 0.0);
        assert_eq!(diag.clamped_mass, 0.0);
    }

    #[test]
    fn k_step_kinematic_uniform_decay_matches_oracle() {
        let (g, mut k, vel) = uniform_setup(8, 1.0);
        let closure = Closure::new(ClosureConfig::default(), &g, 1e4).unwrap();
        let dt = 0.005;
        let steps = (SQRT2 / dt).round() as usize;
        for _ in 0..steps {
            let (k_new, _) = k_step(&k, &vel, &closure, &g, dt).unwrap();
            k = k_new;
        }
        let oracle = decay_ode_oracle(1.0, DecayMode::Kinematic { tau: 1.0 }, dt * steps as f64);
        assert_relative_eq!(k.at(3, 3), oracle, max_relative = 3.0 * dt);
        // Closed form at exactly t = sqrt(2): k = e^-1.
        let exact_t = decay_ode_oracle(1.0, DecayMode::Kinematic { tau: 1.0 }, SQRT2);
        assert_relative_eq!(exact_t, (-1.0f64).exp(), max_relative = 1e-6);
    }

    #[test]
    fn k_step_error_is_first_order_in_dt() {
        let t_end = 1.0;
        let run = |dt: f64| -> f64 {
            let (g, mut k, vel) = uniform_setup(4, 1.0);
            let closure = Closure::new(ClosureConfig::default(), &g, 1e4).unwrap();
            let steps = (t_end / dt).round() as usize;
            for _ in 0..steps {
                let (k_new, _) = k_step(&k, &vel, &closure, &g, dt).unwrap();
                k = k_new;
            }
            let oracle = decay_ode_oracle(1.0, DecayMode::Kinematic { tau: 1.0 }, t_end);
            (k.at(0, 0) - oracle).abs()
        };
        let e1 = run(0.02);
        let e2 = run(0.01);
        let ratio = e1 / e2;
        assert!((1.6..=2.4).contains(&ratio), "error ratio {ratio}");
    }

    #[test]
    fn k_step_static_uniform_decay() {
        let (g, mut k, vel) = uniform_setup(8, 1.0);
        let cfg = ClosureConfig { mode: LengthScaleMode::Static, ..ClosureConfig::default() };
        let closure = Closure::with_static_field(cfg, ScalarField::constant(&g, 1.0)).unwrap();
        let dt = 0.002_f64;
        let steps = (2.0 / dt).round() as usize;
        for _ in 0..steps {
            let (k_new, _) = k_step(&k, &vel, &closure, &g, dt).unwrap();
            k = k_new;
        }
        // Closed form k(2) = 0.25 with l = 1.
        assert_relative_eq!(k.at(0, 0), 0.25, max_relative = 5.0 * dt);
    }

    #[test]
    fn k_step_kinematic_tau_zero_kills_k() {
        let (g, k, vel) = uniform_setup(4, 1.0);
        let cfg = ClosureConfig { tau: 0.0, ..ClosureConfig::default() };
        let closure = Closure::new(cfg, &g, 1e4).unwrap();
        let (k_new, _) = k_step(&k, &vel, &closure, &g, 0.01).unwrap();
        assert!(k_new.linf() == 0.0);
    }

    #[test]
    fn k_step_pins_k_where_static_length_vanishes() {
        let g = Grid::make((0.0, 0.0), (1.0, 1.0), (8, 8), (BcKind::NoSlip, BcKind::NoSlip), &[]).unwrap();
        let cfg = ClosureConfig { mode: LengthScaleMode::Static, ..ClosureConfig::default() };
        let closure = Closure::new(cfg, &g, 1e4).unwrap();
        let k = ScalarField::constant(&g, 0.3);
        let vel = VectorField::zeros(&g);
        let (k_new, _) = k_step(&k, &vel, &closure, &g, 0.01).unwrap();
        // Wall-adjacent cells have zero wall distance, hence zero l0 and a
        // pinned k.
        assert_eq!(k_new.at(0, 4), 0.0);
        assert!(k_new.at(4, 4) > 0.0);
    }

    #[test]
    fn condition_monotone_in_tau_at_frozen_k() {
        let g = periodic_grid(4);
        let k = ScalarField::constant(&g, 1.0);
        let nu_t = |tau: f64| {
            let cfg = ClosureConfig { tau, ..ClosureConfig::default() };
            let c = Closure::new(cfg, &g, 1e4).unwrap();
            c.eddy_viscosity_field(&k).at(0, 0)
        };
        assert_relative_eq!(nu_t(2.0) / nu_t(1.0), 2.0, max_relative = 1e-12);
        assert!(nu_t(0.5) < nu_t(1.0));
        assert_eq!(nu_t(0.0), 0.0);
    }
}
