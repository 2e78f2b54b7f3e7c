//! Cell- and face-centered discrete fields.

use crate::grid::{BcKind, Grid};

/// Scalar samples on cell centers (pressure, turbulent kinetic energy,
/// eddy viscosity, length scales).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub nx: usize,
    pub ny: usize,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            data: vec![0.0; grid.nx * grid.ny],
        }
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            data: vec![value; grid.nx * grid.ny],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut s = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                s.data[j * grid.nx + i] = f(grid.x_center(i), grid.y_center(j));
            }
        }
        s
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[j * self.nx + i] = value;
    }

    /// Value at cell `(i, j)` with offsets wrapped across periodic
    /// boundaries; out-of-range cells on no-slip boundaries read as `fallback`.
    #[inline]
    pub fn at_bc(&self, grid: &Grid, i: i64, j: i64, fallback: f64) -> f64 {
        match (grid.cell_x(i), grid.cell_y(j)) {
            (Some(ii), Some(jj)) => self.data[jj * self.nx + ii],
            _ => fallback,
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, value: f64) {
        self.data.fill(value);
    }

    pub fn linf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sum over fluid cells times the cell volume.
    pub fn integral_fluid(&self, grid: &Grid) -> f64 {
        let mut s = 0.0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                if grid.is_fluid(i, j) {
                    s += self.at(i, j);
                }
            }
        }
        s * grid.cell_volume()
    }

    /// Mean over the fluid region.
    pub fn mean_fluid(&self, grid: &Grid) -> f64 {
        self.integral_fluid(grid) / grid.fluid_volume()
    }

    pub fn max_fluid(&self, grid: &Grid) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for j in 0..self.ny {
            for i in 0..self.nx {
                if grid.is_fluid(i, j) {
                    m = m.max(self.at(i, j));
                }
            }
        }
        m
    }

    pub fn min(&self) -> f64 {
        self.data.iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }
}

/// Velocity components on the staggered faces: `u` on vertical faces
/// (`(nx+1) * ny`), `v` on horizontal faces (`nx * (ny+1)`).
///
/// On periodic boundaries the last face duplicates the first; callers that
/// mutate faces directly must restore that invariant with [`VectorField::sync`].
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub nx: usize,
    pub ny: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            u: vec![0.0; (grid.nx + 1) * grid.ny],
            v: vec![0.0; grid.nx * (grid.ny + 1)],
        }
    }

    /// Sample analytic components at face centers. No-slip normal faces are
    /// forced to zero and periodic ghosts synchronized.
    pub fn from_fn(
        grid: &Grid,
        fu: impl Fn(f64, f64) -> f64,
        fv: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut vel = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..=grid.nx {
                let idx = vel.u_idx(i, j);
                vel.u[idx] = fu(grid.x_face(i), grid.y_center(j));
            }
        }
        for j in 0..=grid.ny {
            for i in 0..grid.nx {
                let idx = vel.v_idx(i, j);
                vel.v[idx] = fv(grid.x_center(i), grid.y_face(j));
            }
        }
        vel.apply_bc(grid);
        vel
    }

    #[inline]
    pub fn u_idx(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn v_idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// u at face `(i, j)` honoring boundary conditions: periodic wrap, or
    /// no-slip ghost reflection in the tangential direction so the wall value
    /// interpolates to zero.
    pub fn u_at(&self, grid: &Grid, i: i64, j: i64) -> f64 {
        let (i, mut sign) = match grid.bc_x {
            BcKind::Periodic => (i.rem_euclid(grid.nx as i64) as usize, 1.0),
            BcKind::NoSlip => {
                debug_assert!(i >= 0 && i <= grid.nx as i64);
                (i.clamp(0, grid.nx as i64) as usize, 1.0)
            }
        };
        let j = match grid.bc_y {
            BcKind::Periodic => j.rem_euclid(grid.ny as i64) as usize,
            BcKind::NoSlip => {
                if j < 0 {
                    sign = -sign;
                    0
                } else if j >= grid.ny as i64 {
                    sign = -sign;
                    grid.ny - 1
                } else {
                    j as usize
                }
            }
        };
        sign * self.u[self.u_idx(i, j)]
    }

    pub fn v_at(&self, grid: &Grid, i: i64, j: i64) -> f64 {
        let (j, mut sign) = match grid.bc_y {
            BcKind::Periodic => (j.rem_euclid(grid.ny as i64) as usize, 1.0),
            BcKind::NoSlip => {
                debug_assert!(j >= 0 && j <= grid.ny as i64);
                (j.clamp(0, grid.ny as i64) as usize, 1.0)
            }
        };
        let i = match grid.bc_x {
            BcKind::Periodic => i.rem_euclid(grid.nx as i64) as usize,
            BcKind::NoSlip => {
                if i < 0 {
                    sign = -sign;
                    0
                } else if i >= grid.nx as i64 {
                    sign = -sign;
                    grid.nx - 1
                } else {
                    i as usize
                }
            }
        };
        sign * self.v[self.v_idx(i, j)]
    }

    /// Restore periodic ghost faces and no-slip normal Dirichlet values.
    pub fn apply_bc(&mut self, grid: &Grid) {
        match grid.bc_x {
            BcKind::Periodic => {
                for j in 0..grid.ny {
                    let (src, dst) = (self.u_idx(0, j), self.u_idx(grid.nx, j));
                    self.u[dst] = self.u[src];
                }
            }
            BcKind::NoSlip => {
                for j in 0..grid.ny {
                    let (a, b) = (self.u_idx(0, j), self.u_idx(grid.nx, j));
                    self.u[a] = 0.0;
                    self.u[b] = 0.0;
                }
            }
        }
        match grid.bc_y {
            BcKind::Periodic => {
                for i in 0..grid.nx {
                    let (src, dst) = (self.v_idx(i, 0), self.v_idx(i, grid.ny));
                    self.v[dst] = self.v[src];
                }
            }
            BcKind::NoSlip => {
                for i in 0..grid.nx {
                    let (a, b) = (self.v_idx(i, 0), self.v_idx(i, grid.ny));
                    self.v[a] = 0.0;
                    self.v[b] = 0.0;
                }
            }
        }
    }

    /// Iterate the unique (active) u-faces for the grid's boundary
    /// conditions: periodic grids exclude the duplicated last column, no-slip
    /// grids exclude the Dirichlet boundary faces.
    pub fn active_u(grid: &Grid) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (lo, hi) = match grid.bc_x {
            BcKind::Periodic => (0, grid.nx),
            BcKind::NoSlip => (1, grid.nx),
        };
        (0..grid.ny).flat_map(move |j| (lo..hi).map(move |i| (i, j)))
    }

    pub fn active_v(grid: &Grid) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (lo, hi) = match grid.bc_y {
            BcKind::Periodic => (0, grid.ny),
            BcKind::NoSlip => (1, grid.ny),
        };
        (lo..hi).flat_map(move |j| (0..grid.nx).map(move |i| (i, j)))
    }

    pub fn linf(&self) -> f64 {
        let mu = self.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mv = self.v.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        mu.max(mv)
    }

    /// Face-native kinetic energy `1/2 * sum(q^2) * cell volume` over active
    /// faces.
    pub fn kinetic_energy(&self, grid: &Grid) -> f64 {
        let vol = grid.cell_volume();
        let mut s = 0.0;
        for (i, j) in Self::active_u(grid) {
            s += self.u[self.u_idx(i, j)].powi(2);
        }
        for (i, j) in Self::active_v(grid) {
            s += self.v[self.v_idx(i, j)].powi(2);
        }
        0.5 * s * vol
    }

    /// L2 norm of the active-face difference with another field.
    pub fn l2_diff(&self, other: &VectorField, grid: &Grid) -> f64 {
        let vol = grid.cell_volume();
        let mut s = 0.0;
        for (i, j) in Self::active_u(grid) {
            s += (self.u[self.u_idx(i, j)] - other.u[other.u_idx(i, j)]).powi(2);
        }
        for (i, j) in Self::active_v(grid) {
            s += (self.v[self.v_idx(i, j)] - other.v[other.v_idx(i, j)]).powi(2);
        }
        (s * vol).sqrt()
    }

    /// Velocity components interpolated to the cell center `(i, j)`.
    #[inline]
    pub fn at_center(&self, i: usize, j: usize) -> (f64, f64) {
        let uc = 0.5 * (self.u[self.u_idx(i, j)] + self.u[self.u_idx(i + 1, j)]);
        let vc = 0.5 * (self.v[self.v_idx(i, j)] + self.v[self.v_idx(i, j + 1)]);
        (uc, vc)
    }

    /// Mean of `|v|^2` over fluid cells using center-interpolated components.
    pub fn mean_speed_sq_fluid(&self, grid: &Grid) -> f64 {
        let mut s = 0.0;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                if grid.is_fluid(i, j) {
                    let (uc, vc) = self.at_center(i, j);
                    s += uc * uc + vc * vc;
                }
            }
        }
        s / grid.fluid_cell_count() as f64
    }
}
