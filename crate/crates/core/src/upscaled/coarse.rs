use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use super::condense::CondensedSubdomain;
use super::layout::CoarseLayout;
use crate::error::{Error, Result};

/// Coarse systems up to this size are factored densely; larger ones use
/// Jacobi-preconditioned conjugate gradients.
pub const DENSE_LIMIT: usize = 2000;

/// Assembled coarse system `a xi = b`.
#[derive(Debug, Clone)]
pub struct CoarseSystem {
    pub a: Mat<f64>,
    pub b: Vec<f64>,
    /// `max |a - a^T| / max |a|`.
    pub asymmetry: f64,
}

impl CoarseSystem {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|r| (0..n).map(|c| self.a[(r, c)] * x[c]).sum()).collect()
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim();
        let sym = nalgebra::DMatrix::from_fn(n, n, |r, c| 0.5 * (self.a[(r, c)] + self.a[(c, r)]));
        let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Sums the condensed subdomain contributions in subdomain order.
pub fn assemble_coarse(layout: &CoarseLayout, condensed: &[CondensedSubdomain]) -> Result<CoarseSystem> {
    let n = layout.dim();
    let mut a = Mat::<f64>::zeros(n, n);
    let mut b = vec![0.0; n];
    for c in condensed {
        for (r, &dr) in c.coarse_dofs.iter().enumerate() {
            for (col, &dc) in c.coarse_dofs.iter().enumerate() {
                a[(dr, dc)] += c.s[(r, col)];
            }
            b[dr] -= c.g[r];
        }
    }
    let mut scale: f64 = 0.0;
    let mut skew: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            scale = scale.max(a[(r, c)].abs());
            skew = skew.max((a[(r, c)] - a[(c, r)]).abs());
        }
    }
    let asymmetry = if scale > 0.0 { skew / scale } else { 0.0 };
    Ok(CoarseSystem { a, b, asymmetry })
}

#[derive(Debug, Clone)]
pub struct CoarseSolution {
    pub xi: Vec<f64>,
    pub iterations: usize,
    /// `||a xi - b|| / ||b||`, zero for a zero right-hand side.
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_residual(system: &CoarseSystem, xi: &[f64]) -> f64 {
    let ax = system.apply(xi);
    let r: Vec<f64> = ax.iter().zip(&system.b).map(|(a, b)| a - b).collect();
    let nb = norm(&system.b);
    if nb > 0.0 {
        norm(&r) / nb
    } else {
        norm(&r)
    }
}

pub fn solve_coarse(system: &CoarseSystem, tol: f64) -> Result<CoarseSolution> {
    let n = system.dim();
    if n == 0 {
        return Ok(CoarseSolution {
            xi: Vec::new(),
            iterations: 0,
            residual: 0.0,
        });
    }
    if n <= DENSE_LIMIT {
        let llt = system
            .a
            .llt(Side::Lower)
            .map_err(|e| Error::NotSpd(format!("dense factorization failed ({e:?})")))?;
        let rhs = Mat::<f64>::from_fn(n, 1, |r, _| system.b[r]);
        let x = llt.solve(&rhs);
        let xi: Vec<f64> = (0..n).map(|r| x[(r, 0)]).collect();
        let residual = relative_residual(system, &xi);
        return Ok(CoarseSolution {
            xi,
            iterations: 1,
            residual,
        });
    }
    conjugate_gradient(system, tol)
}

fn conjugate_gradient(system: &CoarseSystem, tol: f64) -> Result<CoarseSolution> {
    let n = system.dim();
    let diag: Vec<f64> = (0..n).map(|i| system.a[(i, i)]).collect();
    if let Some(i) = diag.iter().position(|&d| d <= 0.0) {
        return Err(Error::NotSpd(format!("coarse system: non-positive diagonal at {i}")));
    }
    let nb = norm(&system.b);
    let mut x = vec![0.0; n];
    if nb == 0.0 {
        return Ok(CoarseSolution { xi: x, iterations: 0, residual: 0.0 });
    }
    let mut r = system.b.clone();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for it in 1..=10 * n {
        let ap = system.apply(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::NotSpd(format!("coarse system: non-positive curvature at iteration {it}")));
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        if norm(&r) <= tol * nb {
            let residual = relative_residual(system, &x);
            return Ok(CoarseSolution { xi: x, iterations: it, residual });
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotSpd("coarse conjugate gradients did not converge".into()))
}
