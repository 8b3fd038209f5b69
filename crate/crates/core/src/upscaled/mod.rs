//! Two-level solver: per-subdomain condensation onto the coarse skeleton
//! multipliers, the coarse SPD solve, and fine-scale reconstruction. A
//! one-level monolithic path solves the same discrete problem directly.

mod coarse;
mod condense;
pub mod layout;
mod solution;


pub use coarse::{assemble_coarse, solve_coarse, CoarseSolution, CoarseSystem, DENSE_LIMIT};
pub use condense::{condense_subdomain, CondensedSubdomain};
pub use layout::{CoarseLayout, SkeletonCoupling, SubdomainLayout};
pub use solution::{Diagnostics, DiscreteSolution, SubdomainSolution};

use faer::sparse::Triplet;
use rayon::prelude::*;

use crate::coarse_space::TraceBasis;
use crate::error::{Error, Result};
use crate::fem::CoefficientField;
use crate::hdg::{SourceFn, TauAssignment};
use crate::mesh::MeshHierarchy;
use condense::{assemble_blocks, factor_spd};
use solution::recover_subdomain;

/// Everything that defines the discrete system.
#[derive(Clone, Copy)]
pub struct DiscreteProblem<'a> {
    pub mesh: &'a MeshHierarchy,
    pub alpha: &'a CoefficientField,
    pub source: Option<&'a SourceFn>,
    pub tau: &'a TauAssignment,
    pub k: usize,
    pub trace_bases: &'a [TraceBasis],
    /// Skip the `h <= eps / 2` resolution check for two-scale coefficients.
    pub allow_underresolved: bool,
}

impl DiscreteProblem<'_> {
    pub fn check(&self) -> Result<CoarseLayout> {
        if self.k > 4 {
            return Err(Error::InvalidArgument(format!("k = {} exceeds the supported maximum 4", self.k)));
        }
        if let Some(eps) = self.alpha.oscillation_scale() {
            let h = self.mesh.scales.h;
            if h > 0.5 * eps {
                if self.allow_underresolved {
                    log::warn!("fine mesh does not resolve the coefficient: h = {h}, eps / 2 = {}", 0.5 * eps);
                } else {
                    return Err(Error::Underresolved { h, half_eps: 0.5 * eps });
                }
            }
        }
        CoarseLayout::new(self.mesh, self.trace_bases)
    }

    fn layouts(&self, layout: &CoarseLayout) -> Vec<SubdomainLayout> {
        self.mesh
            .subdomains
            .par_iter()
            .map(|s| SubdomainLayout::new(s, self.trace_bases, layout, self.k))
            .collect()
    }
}

/// Result of a full solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: DiscreteSolution,
    pub diagnostics: Diagnostics,
    pub coarse_dim: usize,
    pub iterations: usize,
    /// Relative asymmetry of the assembled matrix.
    pub asymmetry: f64,
}

fn sequential_faer() {
    faer::set_global_parallelism(faer::Par::Seq);
}

/// Condenses every subdomain (in parallel) and assembles the coarse system.
pub fn condense_all(problem: &DiscreteProblem<'_>) -> Result<(CoarseLayout, Vec<CondensedSubdomain>, CoarseSystem)> {
    sequential_faer();
    let layout = problem.check()?;
    let lays = problem.layouts(&layout);
    let condensed: Vec<CondensedSubdomain> = problem
        .mesh
        .subdomains
        .par_iter()
        .zip(lays)
        .map(|(sub, lay)| condense_subdomain(problem, sub, lay))
        .collect::<Result<_>>()?;
    let system = assemble_coarse(&layout, &condensed)?;
    Ok((layout, condensed, system))
}

/// Fine solution from the coarse multipliers `xi`.
pub fn reconstruct(
    problem: &DiscreteProblem<'_>,
    layout: &CoarseLayout,
    condensed: &[CondensedSubdomain],
    xi: &[f64],
) -> Result<(DiscreteSolution, Diagnostics)> {
    let parts = problem
        .mesh
        .subdomains
        .par_iter()
        .zip(condensed)
        .map(|(sub, c)| {
            let xi_local: Vec<f64> = c.coarse_dofs.iter().map(|&d| xi[d]).collect();
            let lambda = c.recover_interior(&xi_local);
            recover_subdomain(problem, sub, &c.layout, &lambda, &xi_local)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(solution::combine(problem, layout, parts, xi.to_vec()))
}

pub fn solve_two_level(problem: &DiscreteProblem<'_>) -> Result<SolveReport> {
    let (layout, condensed, system) = condense_all(problem)?;
    let coarse = solve_coarse(&system, 1e-10)?;
    let (solution, diagnostics) = reconstruct(problem, &layout, &condensed, &coarse.xi)?;
    Ok(SolveReport {
        solution,
        diagnostics,
        coarse_dim: layout.dim(),
        iterations: coarse.iterations,
        asymmetry: system.asymmetry,
    })
}

/// One sparse SPD solve over all interior fine multipliers and all coarse
/// multipliers at once.
pub fn solve_monolithic(problem: &DiscreteProblem<'_>) -> Result<SolveReport> {
    sequential_faer();
    let layout = problem.check()?;
    let lays = problem.layouts(&layout);
    let nf = problem.k + 1;
    let blocks = problem
        .mesh
        .subdomains
        .par_iter()
        .zip(&lays)
        .map(|(sub, lay)| assemble_blocks(problem, sub, lay))
        .collect::<Result<Vec<_>>>()?;
    let mut offsets = Vec::with_capacity(lays.len() + 1);
    offsets.push(0);
    for lay in &lays {
        offsets.push(offsets.last().unwrap() + lay.n_interior * nf);
    }
    let ni = *offsets.last().unwrap();
    let n = ni + layout.dim();
    let mut trip = Vec::new();
    let mut rhs = vec![0.0; n];
    for ((b, lay), &off) in blocks.iter().zip(&lays).zip(&offsets) {
        for t in &b.kii {
            trip.push(Triplet::new(off + t.row, off + t.col, t.val));
        }
        for t in &b.kib {
            let c = ni + lay.coarse_dofs[t.col];
            trip.push(Triplet::new(off + t.row, c, t.val));
            trip.push(Triplet::new(c, off + t.row, t.val));
        }
        for r in 0..lay.n_coarse {
            for c in 0..lay.n_coarse {
                trip.push(Triplet::new(ni + lay.coarse_dofs[r], ni + lay.coarse_dofs[c], b.kbb[(r, c)]));
            }
            rhs[ni + lay.coarse_dofs[r]] -= b.gb[r];
        }
        for (i, g) in b.gi.iter().enumerate() {
            rhs[off + i] -= g;
        }
    }
    let x = if n == 0 {
        Vec::new()
    } else {
        let (mat, llt) = factor_spd(n, &trip, "monolithic multiplier system")
            .map_err(|_| Error::NotSpd("monolithic multiplier system factorization failed".into()))?;
        let mut sol = faer::Mat::<f64>::from_fn(n, 1, |r, _| rhs[r]);
        faer::linalg::solvers::SolveCore::solve_in_place_with_conj(&llt, faer::Conj::No, sol.as_mut());
        drop(mat);
        (0..n).map(|r| sol[(r, 0)]).collect()
    };
    let xi = x[ni..].to_vec();
    let parts = problem
        .mesh
        .subdomains
        .par_iter()
        .zip(&lays)
        .enumerate()
        .map(|(s, (sub, lay))| {
            let xi_local: Vec<f64> = lay.coarse_dofs.iter().map(|&d| xi[d]).collect();
            recover_subdomain(problem, sub, lay, &x[offsets[s]..offsets[s + 1]], &xi_local)
        })
        .collect::<Result<Vec<_>>>()?;
    let (solution, diagnostics) = solution::combine(problem, &layout, parts, xi);
    Ok(SolveReport {
        solution,
        diagnostics,
        coarse_dim: layout.dim(),
        iterations: 0,
        asymmetry: 0.0,
    })
}
