use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fem::quadrature::{physical_triangle_rule, segment_quadrature};
use crate::fem::{CoefficientField, Point, ScaledMonomials, SegmentBasis};
use crate::mesh::Subdomain;

pub type SourceFn = dyn Fn(Point) -> f64 + Send + Sync;

/// Geometry and data of one fine element.
#[derive(Clone, Copy)]
pub struct ElementInput<'a> {
    /// Counter-clockwise vertices; local face `j` runs from `vertices[j + 1]`
    /// to `vertices[j + 2]`.
    pub vertices: [Point; 3],
    /// Face parameter is `1 - t` instead of `t` on reversed faces.
    pub reversed: [bool; 3],
    pub tau: [f64; 3],
    pub alpha: &'a CoefficientField,
    pub source: Option<&'a SourceFn>,
}

impl<'a> ElementInput<'a> {
    pub fn from_subdomain(
        sub: &Subdomain,
        e: usize,
        tau: [f64; 3],
        alpha: &'a CoefficientField,
        source: Option<&'a SourceFn>,
    ) -> Self {
        Self {
            vertices: sub.element_vertices(e),
            reversed: sub.elements[e].reversed,
            tau,
            alpha,
            source,
        }
    }

    /// Start point, end point, length and outward normal of local face `j`.
    pub fn face_geometry(&self, j: usize) -> (Point, Point, f64, Point) {
        let a = self.vertices[(j + 1) % 3];
        let b = self.vertices[(j + 2) % 3];
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = dx.hypot(dy);
        (a, b, len, [dy / len, -dx / len])
    }

    /// Face parameter at traversal parameter `t` of local face `j`.
    pub fn face_param(&self, j: usize, t: f64) -> f64 {
        if self.reversed[j] {
            1.0 - t
        } else {
            t
        }
    }
}

/// Local HDG solver of one element, condensed onto its face multipliers.
///
/// Local unknowns are ordered `[q_x, q_y, u]`, each in the scaled monomial
/// basis of degree `k`. Multipliers are ordered face by face, each in the
/// orthonormal face basis of degree `k`.
#[derive(Debug, Clone)]
pub struct ElementOperator {
    pub degree: usize,
    pub basis: ScaledMonomials,
    /// Condensed matrix; `-(S lambda + g)` is the flux functional
    /// `<q_hat . n, mu>` over the element boundary.
    pub s: DMatrix<f64>,
    pub g: DVector<f64>,
    /// Local unknowns are `x lambda + xf`.
    pub x: DMatrix<f64>,
    pub xf: DVector<f64>,
}

/// Recovered element solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSolution {
    pub qx: Vec<f64>,
    pub qy: Vec<f64>,
    pub u: Vec<f64>,
}

impl ElementOperator {
    pub fn n_local(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_trace(&self) -> usize {
        self.s.nrows()
    }

    pub fn recover(&self, lambda: &DVector<f64>) -> LocalSolution {
        let z = &self.x * lambda + &self.xf;
        let np = self.basis.dim();
        LocalSolution {
            qx: z.rows(0, np).iter().copied().collect(),
            qy: z.rows(np, np).iter().copied().collect(),
            u: z.rows(2 * np, np).iter().copied().collect(),
        }
    }

    /// `<q_hat . n, mu>` for every face basis function `mu`.
    pub fn flux_functional(&self, lambda: &DVector<f64>) -> DVector<f64> {
        -(&self.s * lambda + &self.g)
    }
}

/// Uncondensed element system `m z = r lambda + load` with flux functional
/// `t z - gmat lambda`.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub basis: ScaledMonomials,
    pub m: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub t: DMatrix<f64>,
    pub gmat: DMatrix<f64>,
    pub load: DVector<f64>,
}

pub fn local_system(input: &ElementInput<'_>, k: usize) -> Result<LocalSystem> {
    let v = input.vertices;
    let basis = ScaledMonomials::for_triangle(&v, k);
    let np = basis.dim();
    let nf = k + 1;
    let n = 3 * np;
    let nl = 3 * nf;
    let order = 2 * k as i32 + 2;

    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut load = DVector::<f64>::zeros(n);
    let mut vals = vec![0.0; np];
    let mut grads = vec![[0.0; 2]; np];
    for (x, w) in physical_triangle_rule(&v, order, input.alpha.oscillation_scale())? {
        basis.eval_with_grad(x, &mut vals, &mut grads);
        let a = w * input.alpha.eval(x);
        for i in 0..np {
            for j in 0..np {
                let mass = a * vals[i] * vals[j];
                m[(i, j)] += mass;
                m[(np + i, np + j)] += mass;
                // (div v_j, w_i), entering the u-rows with + and the q-rows with -.
                let bx = w * grads[j][0] * vals[i];
                let by = w * grads[j][1] * vals[i];
                m[(2 * np + i, j)] += bx;
                m[(2 * np + i, np + j)] += by;
                m[(j, 2 * np + i)] -= bx;
                m[(np + j, 2 * np + i)] -= by;
            }
        }
        if let Some(f) = input.source {
            let fw = w * f(x);
            for i in 0..np {
                load[2 * np + i] += fw * vals[i];
            }
        }
    }

    // r = [-C; E] and its transpose-like partner t = [C^T, E^T].
    let mut r = DMatrix::<f64>::zeros(n, nl);
    let mut gmat = DMatrix::<f64>::zeros(nl, nl);
    let rule = segment_quadrature(order)?;
    let fb = SegmentBasis::new(k);
    let mut mu = vec![0.0; nf];
    for j in 0..3 {
        let (a, b, len, nrm) = input.face_geometry(j);
        let tau = input.tau[j];
        for (t, wt) in rule.iter() {
            let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            basis.eval(x, &mut vals);
            fb.eval_scaled(input.face_param(j, t), len, &mut mu);
            let w = wt * len;
            for i in 0..np {
                for l in 0..np {
                    m[(2 * np + i, 2 * np + l)] += w * tau * vals[i] * vals[l];
                }
                for p in 0..nf {
                    let c = w * mu[p] * vals[i];
                    r[(i, j * nf + p)] -= c * nrm[0];
                    r[(np + i, j * nf + p)] -= c * nrm[1];
                    r[(2 * np + i, j * nf + p)] += tau * c;
                }
            }
            for p in 0..nf {
                for q in 0..nf {
                    gmat[(j * nf + p, j * nf + q)] += w * tau * mu[p] * mu[q];
                }
            }
        }
    }
    let mut t = r.transpose();
    t.columns_mut(0, 2 * np).neg_mut();
    Ok(LocalSystem {
        basis,
        m,
        r,
        t,
        gmat,
        load,
    })
}

/// Builds and condenses the local system of one element.
pub fn element_operator(input: &ElementInput<'_>, k: usize) -> Result<ElementOperator> {
    if input.tau.iter().all(|&t| t <= 0.0) {
        return Err(Error::Singular("element interior block: no face with positive tau"));
    }
    let LocalSystem {
        basis,
        m,
        r,
        t,
        gmat,
        load,
    } = local_system(input, k)?;
    let lu = m.lu();
    let x = lu
        .solve(&r)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or(Error::Singular("element interior block"))?;
    let xf = lu.solve(&load).ok_or(Error::Singular("element interior block"))?;
    let s = gmat - &t * &x;
    let g = -(&t * &xf);
    Ok(ElementOperator {
        degree: k,
        basis,
        s,
        g,
        x,
        xf,
    })
}
