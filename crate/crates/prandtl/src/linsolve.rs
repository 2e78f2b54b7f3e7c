//! Matrix-free preconditioned conjugate gradient.
//!
//! All reductions run in a fixed sequential order so that repeated runs of
//! the same configuration are bit-identical.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual_inf: f64,
}

pub struct CgOptions<'a> {
    /// Stop when the max-norm of the residual drops to this level.
    pub tol_inf: f64,
    /// Residual level that is still acceptable if the iteration breaks down
    /// (e.g. `p·Ap` underflows on a denormal-range right-hand side). Zero
    /// disables the fallback.
    pub accept_tol_inf: f64,
    pub max_iter: usize,
    /// Inverse diagonal for Jacobi preconditioning.
    pub precond_inv_diag: Option<&'a [f64]>,
    /// Project the constant mode out of iterates and right-hand side; needed
    /// for the singular pressure system.
    pub remove_mean: bool,
    pub label: &'static str,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

fn linf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn subtract_mean(a: &mut [f64]) {
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    for v in a.iter_mut() {
        *v -= mean;
    }
}

/// Solve `A x = b` for a symmetric positive (semi)definite operator given as
/// `apply(x, out)`, with a custom symmetric preconditioner `precond(r, z)`.
/// `x` carries the initial guess on entry.
pub fn cg_with_precond<F, P>(
    mut apply: F,
    mut precond: P,
    b: &[f64],
    x: &mut [f64],
    opts: &CgOptions,
) -> Result<SolveStats>
where
    F: FnMut(&[f64], &mut [f64]),
    P: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    assert_eq!(x.len(), n);
    if linf(b) == 0.0 && linf(x) == 0.0 {
        return Ok(SolveStats { iterations: 0, residual_inf: 0.0 });
    }

    let mut b = b.to_vec();
    if opts.remove_mean {
        subtract_mean(&mut b);
        subtract_mean(x);
    }

    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    apply(x, &mut ap);
    for i in 0..n {
        r[i] = b[i] - ap[i];
    }
    if opts.remove_mean {
        subtract_mean(&mut r);
    }

    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    if opts.remove_mean {
        subtract_mean(&mut z);
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = linf(&r);
    if res <= opts.tol_inf {
        return Ok(SolveStats { iterations: 0, residual_inf: res });
    }

    for iter in 1..=opts.max_iter {
        apply(&p, &mut ap);
        if opts.remove_mean {
            subtract_mean(&mut ap);
        }
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            if res <= opts.accept_tol_inf {
                if opts.remove_mean {
                    subtract_mean(x);
                }
                return Ok(SolveStats { iterations: iter, residual_inf: res });
            }
            return Err(Error::SolverDiverged {
                solver: opts.label,
                iterations: iter,
                residual: res,
                tolerance: opts.tol_inf,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = linf(&r);
        if res <= opts.tol_inf {
            if opts.remove_mean {
                subtract_mean(x);
            }
            return Ok(SolveStats { iterations: iter, residual_inf: res });
        }
        precond(&r, &mut z);
        if opts.remove_mean {
            subtract_mean(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    Err(Error::SolverDiverged {
        solver: opts.label,
        iterations: opts.max_iter,
        residual: res,
        tolerance: opts.tol_inf,
    })
}

/// Solve `A x = b` for a symmetric positive (semi)definite operator given as
/// `apply(x, out)`. `x` carries the initial guess on entry.
pub fn cg<F>(mut apply: F, b: &[f64], x: &mut [f64], opts: &CgOptions) -> Result<SolveStats>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    assert_eq!(x.len(), n);
    if linf(b) == 0.0 && linf(x) == 0.0 {
        return Ok(SolveStats { iterations: 0, residual_inf: 0.0 });
    }

    let mut b = b.to_vec();
    if opts.remove_mean {
        subtract_mean(&mut b);
        subtract_mean(x);
    }

    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    apply(x, &mut ap);
    for i in 0..n {
        r[i] = b[i] - ap[i];
    }
    if opts.remove_mean {
        subtract_mean(&mut r);
    }

    let precondition = |r: &[f64], z: &mut Vec<f64>| {
        z.clear();
        match opts.precond_inv_diag {
            Some(d) => z.extend(r.iter().zip(d).map(|(ri, di)| ri * di)),
            None => z.extend_from_slice(r),
        }
    };

    let mut z = Vec::with_capacity(n);
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = linf(&r);
    if res <= opts.tol_inf {
        return Ok(SolveStats { iterations: 0, residual_inf: res });
    }

    for iter in 1..=opts.max_iter {
        apply(&p, &mut ap);
        if opts.remove_mean {
            subtract_mean(&mut ap);
        }
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            if res <= opts.accept_tol_inf {
                if opts.remove_mean {
                    subtract_mean(x);
                }
                return Ok(SolveStats { iterations: iter, residual_inf: res });
            }
            return Err(Error::SolverDiverged {
                solver: opts.label,
                iterations: iter,
                residual: res,
                tolerance: opts.tol_inf,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = linf(&r);
        if res <= opts.tol_inf {
            if opts.remove_mean {
                subtract_mean(x);
            }
            return Ok(SolveStats { iterations: iter, residual_inf: res });
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    Err(Error::SolverDiverged {
        solver: opts.label,
        iterations: opts.max_iter,
        residual: res,
        tolerance: opts.tol_inf,
    })
}
