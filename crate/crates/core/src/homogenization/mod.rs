//! Periodic cell problems, the homogenized tensor and the first-order
//! corrector.

use std::io::{self, Write};

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};
use crate::fem::quadrature::physical_triangle_rule;
use crate::fem::Point;

/// Continuous piecewise-linear periodic correctors on a uniform `n x n`
/// cell mesh of `[0, 1]^2` (two triangles per square, diagonal from lower
/// left to upper right).
#[derive(Debug, Clone, PartialEq)]
pub struct CellSolution {
    pub n_cell: usize,
    /// Nodal values `chi[k][j * n + i]` at `(i / n, j / n)`.
    pub chi: [Vec<f64>; 2],
    /// Symmetrized homogenized tensor.
    pub alpha0: [[f64; 2]; 2],
    /// `max |a0_ij - a0_ji|` before symmetrization.
    pub asymmetry: f64,
    pub arithmetic_mean: f64,
    pub harmonic_mean: f64,
    /// Max-norm residual of the bordered linear system.
    pub residual: f64,
    /// Per-triangle integral of the coefficient, triangle `2 (j n + i) + t`.
    cell_integrals: Vec<f64>,
}

/// Corners of triangle `t` of square `(i, j)` as node indices `(i, j)`.
fn triangle_nodes(i: usize, j: usize, t: usize) -> [(usize, usize); 3] {
    if t == 0 {
        [(i, j), (i + 1, j), (i + 1, j + 1)]
    } else {
        [(i, j), (i + 1, j + 1), (i, j + 1)]
    }
}

/// Reference gradients (in units of `n`) of the three hat functions of
/// triangle `t`.
fn triangle_grads(t: usize) -> [[f64; 2]; 3] {
    if t == 0 {
        [[-1.0, 0.0], [1.0, -1.0], [0.0, 1.0]]
    } else {
        [[0.0, -1.0], [1.0, 0.0], [-1.0, 1.0]]
    }
}

pub fn solve_cell_problems(alpha_cell: impl Fn(Point) -> f64, n_cell: usize) -> Result<CellSolution> {
    if n_cell < 4 {
        return Err(Error::InvalidArgument(format!("n_cell must be at least 4, got {n_cell}")));
    }
    let n = n_cell;
    let nn = n * n;
    let hgrid = 1.0 / n as f64;
    let node = |i: usize, j: usize| (j % n) * n + (i % n);

    let mut cell_integrals = Vec::with_capacity(2 * nn);
    let mut inv_integral = 0.0;
    for j in 0..n {
        for i in 0..n {
            for t in 0..2 {
                let v = triangle_nodes(i, j, t).map(|(a, b)| [a as f64 * hgrid, b as f64 * hgrid]);
                let mut a_int = 0.0;
                for (x, w) in physical_triangle_rule(&v, 6, None)? {
                    let a = alpha_cell(x);
                    if !(a > 0.0) {
                        return Err(Error::NonPositiveCoefficient { value: a, x: x[0], y: x[1] });
                    }
                    a_int += w * a;
                    inv_integral += w / a;
                }
                cell_integrals.push(a_int);
            }
        }
    }

    // Stiffness with the Lagrange multiplier bordering the last row/column.
    let mut trip = Vec::with_capacity(2 * nn * 9 + 2 * nn);
    let mut rhs = Mat::<f64>::zeros(nn + 1, 2);
    let mass = 1.0 / nn as f64;
    for j in 0..n {
        for i in 0..n {
            for t in 0..2 {
                let a_int = cell_integrals[2 * (j * n + i) + t];
                let nodes = triangle_nodes(i, j, t).map(|(a, b)| node(a, b));
                let g = triangle_grads(t).map(|g| [g[0] * n as f64, g[1] * n as f64]);
                for p in 0..3 {
                    for q in 0..3 {
                        trip.push(Triplet::new(nodes[p], nodes[q], a_int * (g[p][0] * g[q][0] + g[p][1] * g[q][1])));
                    }
                    rhs[(nodes[p], 0)] -= a_int * g[p][0];
                    rhs[(nodes[p], 1)] -= a_int * g[p][1];
                }
            }
        }
    }
    for i in 0..nn {
        trip.push(Triplet::new(i, nn, mass));
        trip.push(Triplet::new(nn, i, mass));
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(nn + 1, nn + 1, &trip)
        .map_err(|e| Error::InvalidArgument(format!("cell matrix: {e:?}")))?;
    let lu = mat
        .sp_lu()
        .map_err(|_| Error::NotSpd("cell problem matrix is singular".into()))?;
    let sol = lu.solve(&rhs);
    let res = &mat * &sol - &rhs;
    let mut residual = 0.0f64;
    for c in 0..2 {
        for r in 0..=nn {
            residual = residual.max(res[(r, c)].abs());
        }
    }
    if sol.col_iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(Error::NotSpd("cell problem produced non-finite values".into()));
    }
    let chi = [
        (0..nn).map(|r| sol[(r, 0)]).collect::<Vec<_>>(),
        (0..nn).map(|r| sol[(r, 1)]).collect::<Vec<_>>(),
    ];

    let mut a0 = [[0.0; 2]; 2];
    let mut arithmetic = 0.0;
    for j in 0..n {
        for i in 0..n {
            for t in 0..2 {
                let a_int = cell_integrals[2 * (j * n + i) + t];
                arithmetic += a_int;
                let nodes = triangle_nodes(i, j, t).map(|(a, b)| node(a, b));
                let g = triangle_grads(t);
                for jj in 0..2 {
                    let mut grad = [0.0; 2];
                    for p in 0..3 {
                        grad[0] += chi[jj][nodes[p]] * g[p][0] * n as f64;
                        grad[1] += chi[jj][nodes[p]] * g[p][1] * n as f64;
                    }
                    for ii in 0..2 {
                        let delta = if ii == jj { 1.0 } else { 0.0 };
                        a0[ii][jj] += a_int * (delta + grad[ii]);
                    }
                }
            }
        }
    }
    let asymmetry = (a0[0][1] - a0[1][0]).abs();
    let off = 0.5 * (a0[0][1] + a0[1][0]);
    a0[0][1] = off;
    a0[1][0] = off;
    Ok(CellSolution {
        n_cell,
        chi,
        alpha0: a0,
        asymmetry,
        arithmetic_mean: arithmetic,
        harmonic_mean: 1.0 / inv_integral,
        residual,
        cell_integrals,
    })
}

impl CellSolution {
    /// Square `(i, j)`, triangle and local square coordinates of a point of
    /// the torus. Points on grid lines go to the lower-left cell and
    /// points on a diagonal to the lower triangle.
    fn locate(&self, y: Point) -> (usize, usize, usize, f64, f64) {
        let n = self.n_cell;
        let wrap = |t: f64| {
            let s = (t - t.floor()) * n as f64;
            if s <= 0.0 {
                (n - 1, 1.0)
            } else {
                let i = (s.ceil() as usize - 1).min(n - 1);
                (i, s - i as f64)
            }
        };
        let (i, xi) = wrap(y[0]);
        let (j, eta) = wrap(y[1]);
        let t = if xi >= eta { 0 } else { 1 };
        (i, j, t, xi, eta)
    }

    fn nodes(&self, i: usize, j: usize, t: usize) -> [usize; 3] {
        let n = self.n_cell;
        triangle_nodes(i, j, t).map(|(a, b)| (b % n) * n + (a % n))
    }

    /// `chi_k(y)` for `y` anywhere in the plane (periodic extension).
    pub fn chi(&self, k: usize, y: Point) -> f64 {
        let (i, j, t, xi, eta) = self.locate(y);
        let nodes = self.nodes(i, j, t);
        let c = &self.chi[k];
        // Hat values in local square coordinates.
        let w = if t == 0 {
            [1.0 - xi, xi - eta, eta]
        } else {
            [1.0 - eta, xi, eta - xi]
        };
        w[0] * c[nodes[0]] + w[1] * c[nodes[1]] + w[2] * c[nodes[2]]
    }

    /// `grad_y chi_k(y)`, piecewise constant.
    pub fn grad_chi(&self, k: usize, y: Point) -> Point {
        let (i, j, t, _, _) = self.locate(y);
        let nodes = self.nodes(i, j, t);
        let g = triangle_grads(t);
        let n = self.n_cell as f64;
        let mut out = [0.0; 2];
        for p in 0..3 {
            out[0] += self.chi[k][nodes[p]] * g[p][0] * n;
            out[1] += self.chi[k][nodes[p]] * g[p][1] * n;
        }
        out
    }

    /// `int_Y chi_k`, exact for the piecewise-linear field.
    pub fn mean(&self, k: usize) -> f64 {
        self.chi[k].iter().sum::<f64>() / (self.n_cell * self.n_cell) as f64
    }

    /// `L^2(Y)` distance between the correctors of two cell solutions.
    pub fn l2_distance(&self, other: &CellSolution, k: usize) -> f64 {
        let m = self.n_cell.max(other.n_cell);
        let h = 1.0 / m as f64;
        let mut s = 0.0;
        for j in 0..m {
            for i in 0..m {
                for t in 0..2 {
                    let v = triangle_nodes(i, j, t).map(|(a, b)| [a as f64 * h, b as f64 * h]);
                    for (y, w) in physical_triangle_rule(&v, 4, None).expect("order 4") {
                        s += w * (self.chi(k, y) - other.chi(k, y)).powi(2);
                    }
                }
            }
        }
        s.sqrt()
    }

    /// Coefficient integral over each cell triangle.
    pub fn cell_integrals(&self) -> &[f64] {
        &self.cell_integrals
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.alpha0;
        let tr = 0.5 * (a[0][0] + a[1][1]);
        let d = (0.25 * (a[0][0] - a[1][1]).powi(2) + a[0][1] * a[1][0]).sqrt();
        [tr - d, tr + d]
    }

    /// Nodal corrector values as CSV (`i,j,y1,y2,chi1,chi2`).
    pub fn write_chi_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "i,j,y1,y2,chi1,chi2")?;
        let n = self.n_cell;
        for j in 0..n {
            for i in 0..n {
                let id = j * n + i;
                writeln!(
                    w,
                    "{i},{j},{:.12e},{:.12e},{:.12e},{:.12e}",
                    i as f64 / n as f64,
                    j as f64 / n as f64,
                    self.chi[0][id],
                    self.chi[1][id]
                )?;
            }
        }
        Ok(())
    }
}

/// Returns `alpha0` of a solved cell.
pub fn homogenized_tensor(cell: &CellSolution) -> [[f64; 2]; 2] {
    cell.alpha0
}

/// `u0(x) + eps * sum_k chi_k(x / eps) d_k u0(x)`; `u0` returns value and
/// gradient.
pub fn corrector<'a>(
    u0: impl Fn(Point) -> (f64, Point) + 'a,
    cell: &'a CellSolution,
    eps: f64,
) -> impl Fn(Point) -> f64 + 'a {
    move |x| {
        let (v, g) = u0(x);
        let y = [x[0] / eps, x[1] / eps];
        v + eps * (cell.chi(0, y) * g[0] + cell.chi(1, y) * g[1])
    }
}

#[cfg(test)]
mod tests;
