//! Staggered (MAC) rectangular grid with solid masks and wall distances.
//!
//! Cells are indexed `(i, j)` with centers at `origin + ((i+1/2)dx, (j+1/2)dy)`.
//! x-velocity lives on vertical faces (`(nx+1) * ny`), y-velocity on horizontal
//! faces (`nx * (ny+1)`), scalars on cell centers. Obstacles are represented by
//! a per-cell solid mask (for Brinkman penalization in the solver) plus an
//! analytic distance-to-wall field computed from the generating geometry, not
//! from a discrete distance transform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcKind {
    Periodic,
    NoSlip,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl Circle {
    pub fn new(cx: f64, cy: f64, r: f64) -> Self {
        Self { cx, cy, r }
    }

    pub fn dist_from_center(&self, x: f64, y: f64) -> f64 {
        ((x - self.cx).powi(2) + (y - self.cy).powi(2)).sqrt()
    }
}

/// A region of the box occupied by solid material.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolidRegion {
    /// Solid inside the circle: an obstacle in the flow.
    InsideCircle(Circle),
    /// Solid outside the circle: a containing curved wall.
    OutsideCircle(Circle),
}

#[derive(Clone, Debug)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub origin: (f64, f64),
    pub extent: (f64, f64),
    pub bc_x: BcKind,
    pub bc_y: BcKind,
    solid: Vec<bool>,
    wall_distance: Vec<f64>,
    fluid_cells: usize,
}

impl Grid {
    /// Build a grid over `origin..origin+extent` with `resolution` cells and
    /// the given solid regions. Wall distance is evaluated analytically from
    /// the circle/box geometry; cells adjacent to a no-slip boundary or to the
    /// solid mask are forced to distance zero.
    pub fn make(
        origin: (f64, f64),
        extent: (f64, f64),
        resolution: (usize, usize),
        bc: (BcKind, BcKind),
        solids: &[SolidRegion],
    ) -> Result<Grid> {
        let (nx, ny) = resolution;
        if nx < 4 || ny < 4 {
            return Err(Error::Config(format!(
                "grid resolution {nx}x{ny} too coarse; need at least 4x4"
            )));
        }
        if !(extent.0 > 0.0 && extent.1 > 0.0) {
            return Err(Error::Config("grid extent must be positive".into()));
        }
        let dx = extent.0 / nx as f64;
        let dy = extent.1 / ny as f64;
        let h = dx.max(dy);
        let eps = 1e-12 * (extent.0 + extent.1);
        for region in solids {
            let c = match region {
                SolidRegion::InsideCircle(c) | SolidRegion::OutsideCircle(c) => c,
            };
            if 2.0 * c.r < 2.0 * h {
                return Err(Error::Config(format!(
                    "circle of radius {} unresolvable at cell size {h}",
                    c.r
                )));
            }
            let inside_box = c.cx - c.r >= origin.0 - eps
                && c.cx + c.r <= origin.0 + extent.0 + eps
                && c.cy - c.r >= origin.1 - eps
                && c.cy + c.r <= origin.1 + extent.1 + eps;
            if !inside_box {
                return Err(Error::Config(format!(
                    "circle at ({}, {}) r={} does not lie inside the domain box",
                    c.cx, c.cy, c.r
                )));
            }
        }

        let mut grid = Grid {
            nx,
            ny,
            dx,
            dy,
            origin,
            extent,
            bc_x: bc.0,
            bc_y: bc.1,
            solid: vec![false; nx * ny],
            wall_distance: vec![f64::INFINITY; nx * ny],
            fluid_cells: 0,
        };

        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = (grid.x_center(i), grid.y_center(j));
                let mut is_solid = false;
                for region in solids {
                    match region {
                        SolidRegion::InsideCircle(c) => {
                            if c.dist_from_center(x, y) < c.r {
                                is_solid = true;
                            }
                        }
                        SolidRegion::OutsideCircle(c) => {
                            if c.dist_from_center(x, y) > c.r {
                                is_solid = true;
                            }
                        }
                    }
                }
                grid.solid[j * nx + i] = is_solid;
            }
        }

        for j in 0..ny {
            for i in 0..nx {
                let idx = j * nx + i;
                if grid.solid[idx] {
                    grid.wall_distance[idx] = 0.0;
                    continue;
                }
                let (x, y) = (grid.x_center(i), grid.y_center(j));
                let mut d = f64::INFINITY;
                for region in solids {
                    let dist = match region {
                        SolidRegion::InsideCircle(c) => c.dist_from_center(x, y) - c.r,
                        SolidRegion::OutsideCircle(c) => c.r - c.dist_from_center(x, y),
                    };
                    d = d.min(dist.max(0.0));
                }
                if grid.bc_x == BcKind::NoSlip {
                    d = d.min(x - origin.0).min(origin.0 + extent.0 - x);
                }
                if grid.bc_y == BcKind::NoSlip {
                    d = d.min(y - origin.1).min(origin.1 + extent.1 - y);
                }
                grid.wall_distance[idx] = d.max(0.0);
            }
        }

        // Cells touching a wall get distance zero exactly, so length scales
        // that must vanish at walls do so on the first fluid layer.
        let mut zero = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if grid.solid[j * nx + i] {
                    continue;
                }
                let mut at_wall = false;
                for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                    match grid.neighbor(i, j, di, dj) {
                        Some((ni, nj)) => {
                            if grid.solid[nj * nx + ni] {
                                at_wall = true;
                            }
                        }
                        // Out of range only happens on no-slip boundaries.
                        None => at_wall = true,
                    }
                }
                if at_wall {
                    zero.push(j * nx + i);
                }
            }
        }
        for idx in zero {
            grid.wall_distance[idx] = 0.0;
        }

        grid.fluid_cells = grid.solid.iter().filter(|s| !**s).count();
        if grid.fluid_cells == 0 {
            return Err(Error::Config("solid regions cover the whole domain".into()));
        }
        Ok(grid)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn x_center(&self, i: usize) -> f64 {
        self.origin.0 + (i as f64 + 0.5) * self.dx
    }

    #[inline]
    pub fn y_center(&self, j: usize) -> f64 {
        self.origin.1 + (j as f64 + 0.5) * self.dy
    }

    /// x-coordinate of vertical face `i` (0..=nx).
    #[inline]
    pub fn x_face(&self, i: usize) -> f64 {
        self.origin.0 + i as f64 * self.dx
    }

    /// y-coordinate of horizontal face `j` (0..=ny).
    #[inline]
    pub fn y_face(&self, j: usize) -> f64 {
        self.origin.1 + j as f64 * self.dy
    }

    #[inline]
    pub fn is_solid(&self, i: usize, j: usize) -> bool {
        self.solid[j * self.nx + i]
    }

    #[inline]
    pub fn is_fluid(&self, i: usize, j: usize) -> bool {
        !self.solid[j * self.nx + i]
    }

    #[inline]
    pub fn wall_distance(&self, i: usize, j: usize) -> f64 {
        self.wall_distance[j * self.nx + i]
    }

    pub fn wall_distance_field(&self) -> &[f64] {
        &self.wall_distance
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn fluid_cell_count(&self) -> usize {
        self.fluid_cells
    }

    pub fn fluid_volume(&self) -> f64 {
        self.fluid_cells as f64 * self.cell_volume()
    }

    pub fn has_solids(&self) -> bool {
        self.fluid_cells != self.nx * self.ny
    }

    /// Resolve the cell neighbor at offset `(di, dj)`, wrapping on periodic
    /// boundaries. `None` means the neighbor is outside a no-slip boundary.
    #[inline]
    pub fn neighbor(&self, i: usize, j: usize, di: i64, dj: i64) -> Option<(usize, usize)> {
        let ni = wrap_index(i as i64 + di, self.nx, self.bc_x)?;
        let nj = wrap_index(j as i64 + dj, self.ny, self.bc_y)?;
        Some((ni, nj))
    }

    /// Cell index in x with periodic wrapping; `None` outside no-slip walls.
    #[inline]
    pub fn cell_x(&self, i: i64) -> Option<usize> {
        wrap_index(i, self.nx, self.bc_x)
    }

    #[inline]
    pub fn cell_y(&self, j: i64) -> Option<usize> {
        wrap_index(j, self.ny, self.bc_y)
    }

    /// True if the x-face `(i, j)` borders a solid cell. Boundary faces of a
    /// no-slip box are not counted; they are handled as Dirichlet values.
    pub fn u_face_penalized(&self, i: usize, j: usize) -> bool {
        let left = self.cell_x(i as i64 - 1);
        let right = self.cell_x(i as i64);
        let l = left.map(|ii| self.is_solid(ii, j)).unwrap_or(false);
        let r = right.map(|ii| self.is_solid(ii, j)).unwrap_or(false);
        l || r
    }

    pub fn v_face_penalized(&self, i: usize, j: usize) -> bool {
        let below = self.cell_y(j as i64 - 1);
        let above = self.cell_y(j as i64);
        let b = below.map(|jj| self.is_solid(i, jj)).unwrap_or(false);
        let a = above.map(|jj| self.is_solid(i, jj)).unwrap_or(false);
        b || a
    }
}

#[inline]
fn wrap_index(i: i64, n: usize, bc: BcKind) -> Option<usize> {
    let n_i = n as i64;
    match bc {
        BcKind::Periodic => Some(i.rem_euclid(n_i) as usize),
        BcKind::NoSlip => {
            if i < 0 || i >= n_i {
                None
            } else {
                Some(i as usize)
            }
        }
    }
}
