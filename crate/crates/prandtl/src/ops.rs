//! Discrete differential operators on the staggered grid.
//!
//! `divergence` and `gradient` are exact discrete adjoints (up to boundary
//! terms that vanish for periodic grids and for no-slip velocity fields), so
//! the pressure projection built from their composition removes divergence to
//! solver tolerance. Scalar advection is first-order upwind in flux form,
//! which keeps the transported quantity nonnegative under the advective CFL
//! limit. Velocity advection and all derivative stencils are second-order
//! centered differences.

use crate::field::{ScalarField, VectorField};
use crate::grid::{BcKind, Grid};

/// Cell-centered divergence of a face velocity field.
pub fn divergence(grid: &Grid, vel: &VectorField) -> ScalarField {
    let mut out = ScalarField::zeros(grid);
    divergence_into(grid, vel, &mut out);
    out
}

pub fn divergence_into(grid: &Grid, vel: &VectorField, out: &mut ScalarField) {
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let du = (vel.u[vel.u_idx(i + 1, j)] - vel.u[vel.u_idx(i, j)]) / grid.dx;
            let dv = (vel.v[vel.v_idx(i, j + 1)] - vel.v[vel.v_idx(i, j)]) / grid.dy;
            out.set(i, j, du + dv);
        }
    }
}

/// Face-centered gradient of a cell scalar. No-slip boundary faces carry a
/// zero gradient; the corresponding velocity faces are Dirichlet values.
pub fn gradient(grid: &Grid, p: &ScalarField) -> VectorField {
    let mut out = VectorField::zeros(grid);
    gradient_into(grid, p, &mut out);
    out
}

pub fn gradient_into(grid: &Grid, p: &ScalarField, out: &mut VectorField) {
    out.u.fill(0.0);
    out.v.fill(0.0);
    for (i, j) in VectorField::active_u(grid) {
        let left = grid.cell_x(i as i64 - 1).expect("active u-face has a left cell");
        let idx = out.u_idx(i, j);
        out.u[idx] = (p.at(i, j) - p.at(left, j)) / grid.dx;
    }
    for (i, j) in VectorField::active_v(grid) {
        let below = grid.cell_y(j as i64 - 1).expect("active v-face has a lower cell");
        let idx = out.v_idx(i, j);
        out.v[idx] = (p.at(i, j) - p.at(i, below)) / grid.dy;
    }
    out.apply_bc(grid);
}

/// `-div(grad p)`: symmetric positive semidefinite pressure operator.
pub fn neg_laplacian_into(
    grid: &Grid,
    p: &ScalarField,
    scratch: &mut VectorField,
    out: &mut ScalarField,
) {
    gradient_into(grid, p, scratch);
    divergence_into(grid, scratch, out);
    for v in out.data_mut() {
        *v = -*v;
    }
}

/// Off-diagonal entry of the deformation tensor at grid corner `(ci, cj)`:
/// `(du/dy + dv/dx) / 2`.
#[inline]
pub fn shear_at_corner(grid: &Grid, vel: &VectorField, ci: i64, cj: i64) -> f64 {
    let uy = (vel.u_at(grid, ci, cj) - vel.u_at(grid, ci, cj - 1)) / grid.dy;
    let vx = (vel.v_at(grid, ci, cj) - vel.v_at(grid, ci - 1, cj)) / grid.dx;
    0.5 * (uy + vx)
}

/// Arithmetic mean of a cell coefficient at grid corner `(ci, cj)`.
#[inline]
pub fn corner_coeff(grid: &Grid, a: &ScalarField, ci: i64, cj: i64) -> f64 {
    let mut sum = 0.0;
    let mut n = 0;
    for (di, dj) in [(-1i64, -1i64), (0, -1), (-1, 0), (0, 0)] {
        if let (Some(ii), Some(jj)) = (grid.cell_x(ci + di), grid.cell_y(cj + dj)) {
            sum += a.at(ii, jj);
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Cell-centered squared magnitude of the symmetric velocity gradient
/// `|∇ˢv|² = ux² + vy² + 2·s12²`, with the off-diagonal entry averaged from
/// the four surrounding corners to the cell center.
pub fn deformation_magsq(grid: &Grid, vel: &VectorField) -> ScalarField {
    let mut out = ScalarField::zeros(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let ux = (vel.u[vel.u_idx(i + 1, j)] - vel.u[vel.u_idx(i, j)]) / grid.dx;
            let vy = (vel.v[vel.v_idx(i, j + 1)] - vel.v[vel.v_idx(i, j)]) / grid.dy;
            let (i64i, i64j) = (i as i64, j as i64);
            let s12 = 0.25
                * (shear_at_corner(grid, vel, i64i, i64j)
                    + shear_at_corner(grid, vel, i64i + 1, i64j)
                    + shear_at_corner(grid, vel, i64i, i64j + 1)
                    + shear_at_corner(grid, vel, i64i + 1, i64j + 1));
            out.set(i, j, ux * ux + vy * vy + 2.0 * s12 * s12);
        }
    }
    out
}

/// Upwind advection tendency `-div(vel * q)` for a cell scalar. Fluxes at
/// no-slip boundary faces vanish with the normal velocity; solid cells carry
/// a stored value of zero so leakage into the mask only removes mass.
pub fn advect_scalar(grid: &Grid, vel: &VectorField, q: &ScalarField) -> ScalarField {
    let mut out = ScalarField::zeros(grid);
    let flux_x = |i: usize, j: usize| -> f64 {
        let u = vel.u[vel.u_idx(i, j)];
        let q_up = if u >= 0.0 {
            q.at_bc(grid, i as i64 - 1, j as i64, 0.0)
        } else {
            q.at_bc(grid, i as i64, j as i64, 0.0)
        };
        u * q_up
    };
    let flux_y = |i: usize, j: usize| -> f64 {
        let v = vel.v[vel.v_idx(i, j)];
        let q_up = if v >= 0.0 {
            q.at_bc(grid, i as i64, j as i64 - 1, 0.0)
        } else {
            q.at_bc(grid, i as i64, j as i64, 0.0)
        };
        v * q_up
    };
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let div = (flux_x(i + 1, j) - flux_x(i, j)) / grid.dx
                + (flux_y(i, j + 1) - flux_y(i, j)) / grid.dy;
            out.set(i, j, -div);
        }
    }
    out
}

/// Conservative second-order advection tendency `-div(vel ⊗ vel)` on faces.
pub fn advect_velocity(grid: &Grid, vel: &VectorField) -> VectorField {
    let mut out = VectorField::zeros(grid);
    // u·v flux at grid corner (ci, cj).
    let corner_flux = |ci: i64, cj: i64| -> f64 {
        let ubar = 0.5 * (vel.u_at(grid, ci, cj) + vel.u_at(grid, ci, cj - 1));
        let vbar = 0.5 * (vel.v_at(grid, ci, cj) + vel.v_at(grid, ci - 1, cj));
        ubar * vbar
    };
    for (i, j) in VectorField::active_u(grid) {
        let (ii, jj) = (i as i64, j as i64);
        // u averaged to the centers of the two cells sharing this face.
        let ubar_r = 0.5 * (vel.u_at(grid, ii, jj) + vel.u_at(grid, ii + 1, jj));
        let ubar_l = 0.5 * (vel.u_at(grid, ii - 1, jj) + vel.u_at(grid, ii, jj));
        let duu = (ubar_r * ubar_r - ubar_l * ubar_l) / grid.dx;
        let duv = (corner_flux(ii, jj + 1) - corner_flux(ii, jj)) / grid.dy;
        let idx = out.u_idx(i, j);
        out.u[idx] = -(duu + duv);
    }
    for (i, j) in VectorField::active_v(grid) {
        let (ii, jj) = (i as i64, j as i64);
        let vbar_t = 0.5 * (vel.v_at(grid, ii, jj) + vel.v_at(grid, ii, jj + 1));
        let vbar_b = 0.5 * (vel.v_at(grid, ii, jj - 1) + vel.v_at(grid, ii, jj));
        let dvv = (vbar_t * vbar_t - vbar_b * vbar_b) / grid.dy;
        let duv = (corner_flux(ii + 1, jj) - corner_flux(ii, jj)) / grid.dx;
        let idx = out.v_idx(i, j);
        out.v[idx] = -(duv + dvv);
    }
    out.apply_bc(grid);
    out
}

/// Apply the variable-coefficient symmetric-gradient diffusion operator
/// `∇·(a ∇ˢv)` with the cell coefficient `a` and its corner average from
/// [`corner_coeffs`]. The operator is symmetric negative semidefinite on
/// active faces, which the implicit momentum solve relies on.
pub fn sym_grad_apply(
    grid: &Grid,
    vel: &VectorField,
    a: &ScalarField,
    corners: &[f64],
    out: &mut VectorField,
) {
    if grid.bc_x == BcKind::Periodic && grid.bc_y == BcKind::Periodic {
        sym_grad_apply_periodic(grid, vel, a, corners, out);
        return;
    }
    let cw = grid.nx + 1;
    // Coefficient-weighted shear at every corner, evaluated once per apply.
    let mut flux = vec![0.0; cw * (grid.ny + 1)];
    for cj in 0..=grid.ny {
        for ci in 0..=grid.nx {
            flux[cj * cw + ci] =
                corners[cj * cw + ci] * shear_at_corner(grid, vel, ci as i64, cj as i64);
        }
    }
    out.u.fill(0.0);
    out.v.fill(0.0);
    for (i, j) in VectorField::active_u(grid) {
        let (ii, jj) = (i as i64, j as i64);
        let right = grid.cell_x(ii).expect("active face");
        let left = grid.cell_x(ii - 1).expect("active face");
        let ux_r = (vel.u_at(grid, ii + 1, jj) - vel.u_at(grid, ii, jj)) / grid.dx;
        let ux_l = (vel.u_at(grid, ii, jj) - vel.u_at(grid, ii - 1, jj)) / grid.dx;
        let t1 = (a.at(right, j) * ux_r - a.at(left, j) * ux_l) / grid.dx;
        let t2 = (flux[(j + 1) * cw + i] - flux[j * cw + i]) / grid.dy;
        let idx = out.u_idx(i, j);
        out.u[idx] = t1 + t2;
    }
    for (i, j) in VectorField::active_v(grid) {
        let (ii, jj) = (i as i64, j as i64);
        let above = grid.cell_y(jj).expect("active face");
        let below = grid.cell_y(jj - 1).expect("active face");
        let vy_t = (vel.v_at(grid, ii, jj + 1) - vel.v_at(grid, ii, jj)) / grid.dy;
        let vy_b = (vel.v_at(grid, ii, jj) - vel.v_at(grid, ii, jj - 1)) / grid.dy;
        let t2 = (a.at(i, above) * vy_t - a.at(i, below) * vy_b) / grid.dy;
        let t1 = (flux[j * cw + i + 1] - flux[j * cw + i]) / grid.dx;
        let idx = out.v_idx(i, j);
        out.v[idx] = t1 + t2;
    }
    out.apply_bc(grid);
}

/// Fully periodic fast path of [`sym_grad_apply`]: direct index arithmetic,
/// arithmetic identical to the generic accessor path (periodic ghost faces
/// mirror the stored values bitwise).
fn sym_grad_apply_periodic(
    grid: &Grid,
    vel: &VectorField,
    a: &ScalarField,
    corners: &[f64],
    out: &mut VectorField,
) {
    let (nx, ny) = (grid.nx, grid.ny);
    let (dx, dy) = (grid.dx, grid.dy);
    let cw = nx + 1;
    let mut flux = vec![0.0; cw * (ny + 1)];
    for cj in 0..=ny {
        let r1 = cj % ny;
        let r0 = (cj + ny - 1) % ny;
        for ci in 0..=nx {
            let c1 = ci % nx;
            let c0 = (ci + nx - 1) % nx;
            let uy = (vel.u[r1 * cw + ci] - vel.u[r0 * cw + ci]) / dy;
            let vx = (vel.v[cj * nx + c1] - vel.v[cj * nx + c0]) / dx;
            flux[cj * cw + ci] = corners[cj * cw + ci] * (0.5 * (uy + vx));
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            let left = (i + nx - 1) % nx;
            let u_w = vel.u[j * cw + left];
            let u_c = vel.u[j * cw + i];
            let u_e = vel.u[j * cw + i + 1];
            let t1 = (a.at(i, j) * (u_e - u_c) / dx - a.at(left, j) * (u_c - u_w) / dx) / dx;
            let t2 = (flux[(j + 1) * cw + i] - flux[j * cw + i]) / dy;
            out.u[j * cw + i] = t1 + t2;
        }
    }
    for j in 0..ny {
        let below = (j + ny - 1) % ny;
        for i in 0..nx {
            let v_s = vel.v[below * nx + i];
            let v_c = vel.v[j * nx + i];
            let v_n = vel.v[(j + 1) * nx + i];
            let t2 = (a.at(i, j) * (v_n - v_c) / dy - a.at(i, below) * (v_c - v_s) / dy) / dy;
            let t1 = (flux[j * cw + i + 1] - flux[j * cw + i]) / dx;
            out.v[j * nx + i] = t1 + t2;
        }
    }
    out.apply_bc(grid);
}

/// Diagonal of `-∇·(a ∇ˢ·)` on the u faces, for Jacobi preconditioning.
pub fn sym_grad_diag_u(grid: &Grid, a: &ScalarField, i: usize, j: usize) -> f64 {
    let (ii, jj) = (i as i64, j as i64);
    let right = grid.cell_x(ii).expect("active face");
    let left = grid.cell_x(ii - 1).expect("active face");
    let dxx = (a.at(right, j) + a.at(left, j)) / (grid.dx * grid.dx);
    // Ghost reflection at a no-slip wall doubles the tangential coupling.
    let refl = |cj: i64| -> f64 {
        if grid.bc_y == BcKind::NoSlip && (cj == 0 || cj == grid.ny as i64) {
            2.0
        } else {
            1.0
        }
    };
    let top = corner_coeff(grid, a, ii, jj + 1) * refl(jj + 1);
    let bot = corner_coeff(grid, a, ii, jj) * refl(jj);
    dxx + (top + bot) / (2.0 * grid.dy * grid.dy)
}

pub fn sym_grad_diag_v(grid: &Grid, a: &ScalarField, i: usize, j: usize) -> f64 {
    let (ii, jj) = (i as i64, j as i64);
    let above = grid.cell_y(jj).expect("active face");
    let below = grid.cell_y(jj - 1).expect("active face");
    let dyy = (a.at(i, above) + a.at(i, below)) / (grid.dy * grid.dy);
    let refl = |ci: i64| -> f64 {
        if grid.bc_x == BcKind::NoSlip && (ci == 0 || ci == grid.nx as i64) {
            2.0
        } else {
            1.0
        }
    };
    let right = corner_coeff(grid, a, ii + 1, jj) * refl(ii + 1);
    let left = corner_coeff(grid, a, ii, jj) * refl(ii);
    dyy + (right + left) / (2.0 * grid.dx * grid.dx)
}

/// `-∇·(D ∇q)` for a cell scalar with Dirichlet-zero values beyond no-slip
/// walls. Solid cells participate through their stored values (held at zero
/// by the solver), so the mask acts as a homogeneous Dirichlet region.
pub fn scalar_diffusion_neg(
    grid: &Grid,
    q: &ScalarField,
    d_cell: &ScalarField,
    out: &mut ScalarField,
) {
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let qc = q.at(i, j);
            let dc = d_cell.at(i, j);
            let mut acc = 0.0;
            for (di, dj, h) in [
                (-1i64, 0i64, grid.dx),
                (1, 0, grid.dx),
                (0, -1, grid.dy),
                (0, 1, grid.dy),
            ] {
                match grid.neighbor(i, j, di, dj) {
                    Some((ni, nj)) => {
                        let d_face = 0.5 * (dc + d_cell.at(ni, nj));
                        acc += d_face * (qc - q.at(ni, nj)) / (h * h);
                    }
                    None => {
                        // Wall at half a cell: mirror ghost.
                        acc += 2.0 * dc * qc / (h * h);
                    }
                }
            }
            out.set(i, j, acc);
        }
    }
}

/// Explicit 5-point stencil with a symmetric Gauss-Seidel sweep, used to
/// precondition the pressure and k systems.
pub struct SsorStencil {
    n: usize,
    inv_diag: Vec<f64>,
    /// Four `(neighbor, coefficient)` slots per row; padding slots point at
    /// the row itself with zero coefficient.
    neighbors: Vec<(u32, f64)>,
}

impl SsorStencil {
    pub fn new(inv_diag: Vec<f64>, neighbors: Vec<(u32, f64)>) -> Self {
        assert_eq!(neighbors.len(), 4 * inv_diag.len());
        Self { n: inv_diag.len(), inv_diag, neighbors }
    }

    /// Stencil of the pressure operator `-div(grad ·)`, matching the composed
    /// gradient/divergence operator coefficient for coefficient.
    pub fn poisson(grid: &Grid) -> Self {
        let n = grid.nx * grid.ny;
        let mut inv_diag = vec![0.0; n];
        let mut neighbors = vec![(0u32, 0.0f64); 4 * n];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let c = grid.idx(i, j);
                let mut diag = 0.0;
                for (slot, (di, dj, h)) in [
                    (-1i64, 0i64, grid.dx),
                    (1, 0, grid.dx),
                    (0, -1, grid.dy),
                    (0, 1, grid.dy),
                ]
                .into_iter()
                .enumerate()
                {
                    match grid.neighbor(i, j, di, dj) {
                        Some((ni, nj)) => {
                            let nb = grid.idx(ni, nj);
                            diag += 1.0 / (h * h);
                            neighbors[4 * c + slot] = (nb as u32, -1.0 / (h * h));
                        }
                        None => {
                            neighbors[4 * c + slot] = (c as u32, 0.0);
                        }
                    }
                }
                inv_diag[c] = 1.0 / diag;
            }
        }
        Self::new(inv_diag, neighbors)
    }

    /// Symmetric Gauss-Seidel sweep `z = (D+U)^-1 D (D+L)^-1 r` in fixed
    /// row order (deterministic).
    pub fn ssor(&self, r: &[f64], z: &mut [f64]) {
        debug_assert_eq!(r.len(), self.n);
        for c in 0..self.n {
            let mut acc = r[c];
            for s in 0..4 {
                let (nb, coeff) = self.neighbors[4 * c + s];
                let nb = nb as usize;
                if nb < c {
                    acc -= coeff * z[nb];
                }
            }
            z[c] = acc * self.inv_diag[c];
        }
        for c in (0..self.n).rev() {
            let mut acc = z[c] / self.inv_diag[c];
            for s in 0..4 {
                let (nb, coeff) = self.neighbors[4 * c + s];
                let nb = nb as usize;
                if nb > c {
                    acc -= coeff * z[nb];
                }
            }
            z[c] = acc * self.inv_diag[c];
        }
    }
}

/// Coefficient averaged to all grid corners: `(nx+1) x (ny+1)` values,
/// corner `(ci, cj)` at index `cj * (nx+1) + ci`. Hoisted out of the CG loop
/// of the momentum solve.
pub fn corner_coeffs(grid: &Grid, a: &ScalarField) -> Vec<f64> {
    let mut out = vec![0.0; (grid.nx + 1) * (grid.ny + 1)];
    for cj in 0..=grid.ny {
        for ci in 0..=grid.nx {
            out[cj * (grid.nx + 1) + ci] = corner_coeff(grid, a, ci as i64, cj as i64);
        }
    }
    out
}

/// Diagonal of [`scalar_diffusion_neg`].
pub fn scalar_diffusion_diag(grid: &Grid, d_cell: &ScalarField) -> ScalarField {
    let mut out = ScalarField::zeros(grid);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let dc = d_cell.at(i, j);
            let mut acc = 0.0;
            for (di, dj, h) in [
                (-1i64, 0i64, grid.dx),
                (1, 0, grid.dx),
                (0, -1, grid.dy),
                (0, 1, grid.dy),
            ] {
                match grid.neighbor(i, j, di, dj) {
                    Some((ni, nj)) => acc += 0.5 * (dc + d_cell.at(ni, nj)) / (h * h),
                    None => acc += 2.0 * dc / (h * h),
                }
            }
            out.set(i, j, acc);
        }
    }
    out
}
