use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::condense::{element_op, slots, Slot};
use super::layout::{CoarseLayout, SubdomainLayout};
use super::DiscreteProblem;
use crate::error::Result;
use crate::fem::quadrature::physical_triangle_rule;
use crate::fem::{Point, ScaledMonomials};
use crate::mesh::{MeshHierarchy, Subdomain};

/// Fine fields of one subdomain; element blocks are contiguous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdomainSolution {
    pub qx: Vec<f64>,
    pub qy: Vec<f64>,
    pub u: Vec<f64>,
    /// Face multipliers in the orthonormal face basis, face by face.
    pub faces: Vec<f64>,
}

/// Discrete solution on the whole mesh hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSolution {
    pub k: usize,
    pub subdomains: Vec<SubdomainSolution>,
    /// Coarse multipliers, segment blocks at `coarse_offsets`.
    pub coarse: Vec<f64>,
    pub coarse_offsets: Vec<usize>,
}

/// Post-solve checks of the discrete flux.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest `L^2` norm of the projected normal-flux jump on a fine interior face.
    pub jump_fine: f64,
    /// Largest norm of the coarse flux residual on a skeleton segment.
    pub jump_skeleton: f64,
    pub jump_max: f64,
    /// Largest element residual `|int_dK q_hat.n - int_K f|`.
    pub cons_max: f64,
    /// Largest residual relative to `|K| ||f||_inf + ||q_h||`.
    pub cons_rel: f64,
    pub q_norm: f64,
    pub f_inf: f64,
}

impl Diagnostics {
    pub const JUMP_TOL: f64 = 1e-9;
    pub const CONS_TOL: f64 = 1e-10;

    pub fn jump_ok(&self) -> bool {
        self.jump_max <= Self::JUMP_TOL * self.q_norm
    }

    pub fn cons_ok(&self) -> bool {
        self.cons_rel <= Self::CONS_TOL
    }
}

pub(crate) struct SubdomainPart {
    solution: SubdomainSolution,
    jump_fine: f64,
    /// Coarse flux contributions, indexed by global coarse DOF.
    coarse_flux: Vec<(usize, f64)>,
    /// `(residual, area)` per element.
    cons: Vec<(f64, f64)>,
    q_sq: f64,
    f_inf: f64,
}

/// Element fields, face multipliers and flux checks for one subdomain.
pub(crate) fn recover_subdomain(
    problem: &DiscreteProblem<'_>,
    sub: &Subdomain,
    lay: &SubdomainLayout,
    lambda_interior: &[f64],
    xi: &[f64],
) -> Result<SubdomainPart> {
    let k = problem.k;
    let nf = k + 1;
    let np = (k + 1) * (k + 2) / 2;
    let ne = sub.elements.len();
    let mut faces = vec![0.0; sub.faces.len() * nf];
    for (f, c) in sub.faces.iter().enumerate().map(|(f, _)| (f, &lay.skeleton[f])) {
        if let Some(i) = lay.interior_index[f] {
            faces[f * nf..(f + 1) * nf].copy_from_slice(&lambda_interior[i * nf..(i + 1) * nf]);
        } else if let Some(c) = c {
            let col = lay.local_offset(c.segment);
            let m = c.proj.ncols();
            let v = &c.proj * DVector::from_column_slice(&xi[col..col + m]);
            faces[f * nf..(f + 1) * nf].copy_from_slice(v.as_slice());
        }
    }
    let mut sol = SubdomainSolution {
        qx: Vec::with_capacity(ne * np),
        qy: Vec::with_capacity(ne * np),
        u: Vec::with_capacity(ne * np),
        faces,
    };
    let mut face_flux = vec![0.0; sub.faces.len() * nf];
    let mut coarse_local = vec![0.0; lay.n_coarse];
    let mut cons = Vec::with_capacity(ne);
    let mut q_sq = 0.0;
    let mut f_inf: f64 = 0.0;
    let order = 2 * k as i32 + 2;
    let mut vals = vec![0.0; np];
    for e in 0..ne {
        let op = element_op(problem, sub, e)?;
        let ef = sub.elements[e].faces;
        let mut lam = DVector::zeros(3 * nf);
        for j in 0..3 {
            lam.rows_mut(j * nf, nf)
                .copy_from_slice(&sol.faces[ef[j] * nf..(ef[j] + 1) * nf]);
        }
        let local = op.recover(&lam);
        let flux = op.flux_functional(&lam);
        let tau = problem.tau.get(sub.id, e);
        let v = sub.element_vertices(e);
        let mut boundary_total = 0.0;
        for (j, slot) in slots(sub, lay, e).iter().enumerate() {
            let fj = flux.rows(j * nf, nf);
            boundary_total += fj[0] * sub.faces[ef[j]].length.sqrt();
            match slot {
                Slot::Interior(_) => {
                    for p in 0..nf {
                        face_flux[ef[j] * nf + p] += fj[p];
                    }
                }
                Slot::Skeleton { col, coupling } => {
                    let mut pf = coupling.proj.transpose() * fj;
                    if tau[j] > 0.0 {
                        let m = coupling.proj.ncols();
                        pf -= tau[j] * &coupling.defect * DVector::from_column_slice(&xi[*col..col + m]);
                    }
                    for (i, val) in pf.iter().enumerate() {
                        coarse_local[col + i] += val;
                    }
                }
                Slot::Boundary => {}
            }
        }
        let mut f_int = 0.0;
        for (x, w) in physical_triangle_rule(&v, order, problem.alpha.oscillation_scale())? {
            if let Some(f) = problem.source {
                let fx = f(x);
                f_int += w * fx;
                f_inf = f_inf.max(fx.abs());
            }
            op.basis.eval(x, &mut vals);
            let qx: f64 = vals.iter().zip(&local.qx).map(|(a, b)| a * b).sum();
            let qy: f64 = vals.iter().zip(&local.qy).map(|(a, b)| a * b).sum();
            q_sq += w * (qx * qx + qy * qy);
        }
        cons.push(((boundary_total - f_int).abs(), sub.element_area(e)));
        sol.qx.extend_from_slice(&local.qx);
        sol.qy.extend_from_slice(&local.qy);
        sol.u.extend_from_slice(&local.u);
    }
    let jump_fine = sub
        .interior_faces()
        .map(|f| face_flux[f * nf..(f + 1) * nf].iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    Ok(SubdomainPart {
        solution: sol,
        jump_fine,
        coarse_flux: lay.coarse_dofs.iter().copied().zip(coarse_local).collect(),
        cons,
        q_sq,
        f_inf,
    })
}

/// Sequential, order-fixed reduction of the per-subdomain parts.
pub(crate) fn combine(
    problem: &DiscreteProblem<'_>,
    layout: &CoarseLayout,
    parts: Vec<SubdomainPart>,
    xi: Vec<f64>,
) -> (DiscreteSolution, Diagnostics) {
    let mut coarse_flux = vec![0.0; layout.dim()];
    let mut jump_fine: f64 = 0.0;
    let mut q_sq = 0.0;
    let mut f_inf: f64 = 0.0;
    let mut cons_max: f64 = 0.0;
    for p in &parts {
        jump_fine = jump_fine.max(p.jump_fine);
        q_sq += p.q_sq;
        f_inf = f_inf.max(p.f_inf);
        for &(d, v) in &p.coarse_flux {
            coarse_flux[d] += v;
        }
        for &(r, _) in &p.cons {
            cons_max = cons_max.max(r);
        }
    }
    let q_norm = q_sq.sqrt();
    let mut cons_rel: f64 = 0.0;
    for p in &parts {
        for &(r, area) in &p.cons {
            let denom = area * f_inf + q_norm;
            if r > 0.0 {
                cons_rel = cons_rel.max(if denom > 0.0 { r / denom } else { f64::INFINITY });
            }
        }
    }
    let jump_skeleton = (0..layout.offsets.len() - 1)
        .map(|s| coarse_flux[layout.range(s)].iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let diagnostics = Diagnostics {
        jump_fine,
        jump_skeleton,
        jump_max: jump_fine.max(jump_skeleton),
        cons_max,
        cons_rel,
        q_norm,
        f_inf,
    };
    let solution = DiscreteSolution {
        k: problem.k,
        subdomains: parts.into_iter().map(|p| p.solution).collect(),
        coarse: xi,
        coarse_offsets: layout.offsets.clone(),
    };
    (solution, diagnostics)
}

impl DiscreteSolution {
    pub fn n_local(&self) -> usize {
        (self.k + 1) * (self.k + 2) / 2
    }

    fn block<'s>(&self, v: &'s [f64], e: usize) -> &'s [f64] {
        let np = self.n_local();
        &v[e * np..(e + 1) * np]
    }

    pub fn basis(&self, mesh: &MeshHierarchy, sub: usize, e: usize) -> ScaledMonomials {
        ScaledMonomials::for_triangle(&mesh.subdomains[sub].element_vertices(e), self.k)
    }

    /// `(u_h, q_h)` at `x` inside element `e` of subdomain `sub`.
    pub fn eval_in(&self, mesh: &MeshHierarchy, sub: usize, e: usize, x: Point) -> (f64, Point) {
        let basis = self.basis(mesh, sub, e);
        let s = &self.subdomains[sub];
        (
            basis.evaluate(self.block(&s.u, e), x),
            [basis.evaluate(self.block(&s.qx, e), x), basis.evaluate(self.block(&s.qy, e), x)],
        )
    }

    /// `(u_h, q_h)` at an arbitrary point of the domain.
    pub fn eval(&self, mesh: &MeshHierarchy, x: Point) -> Option<(f64, Point)> {
        let loc = mesh.locate(x)?;
        Some(self.eval_in(mesh, loc.subdomain, loc.element, x))
    }

    pub fn element_u(&self, sub: usize, e: usize) -> &[f64] {
        self.block(&self.subdomains[sub].u, e)
    }

    pub fn element_q(&self, sub: usize, e: usize) -> (&[f64], &[f64]) {
        let s = &self.subdomains[sub];
        (self.block(&s.qx, e), self.block(&s.qy, e))
    }

    /// Largest absolute coefficient of any field or multiplier.
    pub fn max_abs(&self) -> f64 {
        self.subdomains
            .iter()
            .flat_map(|s| s.qx.iter().chain(&s.qy).chain(&s.u).chain(&s.faces))
            .chain(&self.coarse)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest coefficient difference to a solution on the same mesh.
    pub fn max_difference(&self, other: &Self) -> f64 {
        let a = self.subdomains.iter().flat_map(|s| s.qx.iter().chain(&s.qy).chain(&s.u).chain(&s.faces));
        let b = other.subdomains.iter().flat_map(|s| s.qx.iter().chain(&s.qy).chain(&s.u).chain(&s.faces));
        a.zip(b)
            .chain(self.coarse.iter().zip(&other.coarse))
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }
}
