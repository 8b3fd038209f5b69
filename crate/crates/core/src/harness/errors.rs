use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problems::ExactSolution;
use crate::error::{Error, Result};
use crate::fem::quadrature::{mapped_triangle_rule, oscillation_split};
use crate::fem::basis::triangle_diameter;
use crate::fem::CoefficientField;
use crate::mesh::MeshHierarchy;
use crate::upscaled::{Diagnostics, DiscreteSolution, SolveReport};

/// `||q - q_h||_alpha`, `||q - q_h||` and `||u - u_h||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub q_alpha: f64,
    pub q_l2: f64,
    pub u_l2: f64,
}

/// Error norms together with the solver diagnostics of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub err_q_alpha: Option<f64>,
    pub err_q_l2: Option<f64>,
    pub err_u_l2: Option<f64>,
    pub jump_max: f64,
    pub cons_max: f64,
    pub diagnostics: Diagnostics,
    pub dim_coarse: usize,
    pub iterations: usize,
}

impl ErrorReport {
    pub fn new(norms: Option<ErrorNorms>, report: &SolveReport) -> Self {
        Self {
            err_q_alpha: norms.map(|n| n.q_alpha),
            err_q_l2: norms.map(|n| n.q_l2),
            err_u_l2: norms.map(|n| n.u_l2),
            jump_max: report.diagnostics.jump_max,
            cons_max: report.diagnostics.cons_max,
            diagnostics: report.diagnostics,
            dim_coarse: report.coarse_dim,
            iterations: report.iterations,
        }
    }
}

#[derive(Default, Clone, Copy)]
struct Sums {
    q_alpha: f64,
    q_l2: f64,
    u_l2: f64,
}

impl Sums {
    fn add(&mut self, w: f64, a: f64, du: f64, dq: [f64; 2]) {
        let q2 = dq[0] * dq[0] + dq[1] * dq[1];
        self.q_alpha += w * a * q2;
        self.q_l2 += w * q2;
        self.u_l2 += w * du * du;
    }

    fn finish(parts: Vec<Sums>) -> ErrorNorms {
        let mut t = Sums::default();
        for p in parts {
            t.q_alpha += p.q_alpha;
            t.q_l2 += p.q_l2;
            t.u_l2 += p.u_l2;
        }
        ErrorNorms {
            q_alpha: t.q_alpha.sqrt(),
            q_l2: t.q_l2.sqrt(),
            u_l2: t.u_l2.sqrt(),
        }
    }
}

/// Errors against a closed-form solution by element quadrature of order
/// `2k + 4`, sub-split under a two-scale coefficient.
pub fn compute_errors(
    sol: &DiscreteSolution,
    exact: &ExactSolution,
    mesh: &MeshHierarchy,
    alpha: &CoefficientField,
) -> Result<ErrorNorms> {
    let order = 2 * sol.k as i32 + 4;
    let eps = alpha.oscillation_scale();
    let parts = mesh
        .subdomains
        .par_iter()
        .enumerate()
        .map(|(s, sub)| {
            let mut acc = Sums::default();
            for e in 0..sub.elements.len() {
                let v = sub.element_vertices(e);
                let split = oscillation_split(triangle_diameter(&v), eps);
                for (x, w) in mapped_triangle_rule(&v, order, split)? {
                    let (u, q) = sol.eval_in(mesh, s, e, x);
                    let qe = (exact.q)(x);
                    acc.add(w, alpha.eval(x), (exact.u)(x) - u, [qe[0] - q[0], qe[1] - q[1]]);
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sums::finish(parts))
}

/// Errors against a discrete reference on a finer mesh. Quadrature runs over
/// the reference elements, each split in four, and locates `sol` pointwise.
pub fn compute_errors_against(
    sol: &DiscreteSolution,
    mesh: &MeshHierarchy,
    reference: &DiscreteSolution,
    ref_mesh: &MeshHierarchy,
    alpha: &CoefficientField,
) -> Result<ErrorNorms> {
    let order = 2 * sol.k.max(reference.k) as i32 + 4;
    let eps = alpha.oscillation_scale();
    let parts = ref_mesh
        .subdomains
        .par_iter()
        .enumerate()
        .map(|(s, sub)| {
            let mut acc = Sums::default();
            for e in 0..sub.elements.len() {
                let v = sub.element_vertices(e);
                let split = oscillation_split(triangle_diameter(&v), eps).max(2);
                for (x, w) in mapped_triangle_rule(&v, order, split)? {
                    let (ur, qr) = reference.eval_in(ref_mesh, s, e, x);
                    let (u, q) = sol
                        .eval(mesh, x)
                        .ok_or_else(|| Error::InvalidMesh(format!("point ({}, {}) outside the mesh", x[0], x[1])))?;
                    acc.add(w, alpha.eval(x), ur - u, [qr[0] - q[0], qr[1] - q[1]]);
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sums::finish(parts))
}
