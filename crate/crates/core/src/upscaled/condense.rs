use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat, Side};
use nalgebra::DVector;

use super::layout::{SkeletonCoupling, SubdomainLayout};
use super::DiscreteProblem;
use crate::error::{Error, Result};
use crate::hdg::{element_operator, ElementInput, ElementOperator};
use crate::mesh::Subdomain;

/// Columns of the interior coupling solved at once during condensation.
const CHUNK: usize = 16;

/// Where the multiplier of one local face of an element lives.
pub(crate) enum Slot<'a> {
    Interior(usize),
    Skeleton { col: usize, coupling: &'a SkeletonCoupling },
    Boundary,
}

pub(crate) fn slots<'a>(sub: &Subdomain, lay: &'a SubdomainLayout, e: usize) -> [Slot<'a>; 3] {
    sub.elements[e].faces.map(|f| {
        if let Some(i) = lay.interior_index[f] {
            Slot::Interior(i)
        } else if let Some(c) = &lay.skeleton[f] {
            Slot::Skeleton {
                col: lay.local_offset(c.segment),
                coupling: c,
            }
        } else {
            Slot::Boundary
        }
    })
}

pub(crate) fn element_op(problem: &DiscreteProblem<'_>, sub: &Subdomain, e: usize) -> Result<ElementOperator> {
    let input = ElementInput::from_subdomain(sub, e, problem.tau.get(sub.id, e), problem.alpha, problem.source);
    element_operator(&input, problem.k)
}

/// Subdomain matrices before eliminating the interior multipliers.
pub(crate) struct LocalBlocks {
    pub kii: Vec<Triplet<usize, usize, f64>>,
    pub kib: Vec<Triplet<usize, usize, f64>>,
    pub kbb: Mat<f64>,
    pub gi: Vec<f64>,
    pub gb: Vec<f64>,
}

pub(crate) fn assemble_blocks(problem: &DiscreteProblem<'_>, sub: &Subdomain, lay: &SubdomainLayout) -> Result<LocalBlocks> {
    let nf = problem.k + 1;
    let nb = lay.n_coarse;
    let mut out = LocalBlocks {
        kii: Vec::with_capacity(sub.elements.len() * 9 * nf * nf),
        kib: Vec::new(),
        kbb: Mat::zeros(nb, nb),
        gi: vec![0.0; lay.n_interior * nf],
        gb: vec![0.0; nb],
    };
    for e in 0..sub.elements.len() {
        let op = element_op(problem, sub, e)?;
        let sl = slots(sub, lay, e);
        let tau = problem.tau.get(sub.id, e);
        for (j, a) in sl.iter().enumerate() {
            let gj = op.g.rows(j * nf, nf);
            match a {
                Slot::Interior(ia) => {
                    for p in 0..nf {
                        out.gi[ia * nf + p] += gj[p];
                    }
                }
                Slot::Skeleton { col, coupling } => {
                    let pg = coupling.proj.transpose() * gj;
                    for (i, v) in pg.iter().enumerate() {
                        out.gb[col + i] += v;
                    }
                    if tau[j] > 0.0 {
                        let d = &coupling.defect;
                        for r in 0..d.nrows() {
                            for c in 0..d.ncols() {
                                out.kbb[(col + r, col + c)] += tau[j] * d[(r, c)];
                            }
                        }
                    }
                }
                Slot::Boundary => {}
            }
            for (j2, b) in sl.iter().enumerate() {
                let block = op.s.view((j * nf, j2 * nf), (nf, nf));
                match (a, b) {
                    (Slot::Interior(ia), Slot::Interior(ib)) => {
                        for p in 0..nf {
                            for q in 0..nf {
                                out.kii.push(Triplet::new(ia * nf + p, ib * nf + q, block[(p, q)]));
                            }
                        }
                    }
                    (Slot::Interior(ia), Slot::Skeleton { col, coupling }) => {
                        let m = block * &coupling.proj;
                        for p in 0..nf {
                            for i in 0..m.ncols() {
                                out.kib.push(Triplet::new(ia * nf + p, col + i, m[(p, i)]));
                            }
                        }
                    }
                    (Slot::Skeleton { col: ca, coupling: pa }, Slot::Skeleton { col: cb, coupling: pb }) => {
                        let m = pa.proj.transpose() * block * &pb.proj;
                        for r in 0..m.nrows() {
                            for c in 0..m.ncols() {
                                out.kbb[(ca + r, cb + c)] += m[(r, c)];
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(out)
}

struct InteriorRecovery {
    llt: Llt<usize, f64>,
    kib: SparseColMat<usize, f64>,
    gi: Vec<f64>,
}

/// A subdomain reduced onto the coarse multipliers of its boundary.
pub struct CondensedSubdomain {
    pub subdomain: usize,
    pub layout: SubdomainLayout,
    /// Global coarse DOFs of the local rows/columns of `s`.
    pub coarse_dofs: Vec<usize>,
    /// Schur complement; `s xi + g` is minus the coarse flux functional.
    pub s: Mat<f64>,
    pub g: Vec<f64>,
    recovery: Option<InteriorRecovery>,
}

fn solve_in_place(llt: &Llt<usize, f64>, rhs: &mut Mat<f64>) {
    llt.solve_in_place_with_conj(Conj::No, rhs.as_mut());
}

pub(crate) fn factor_spd(n: usize, trip: &[Triplet<usize, usize, f64>], what: &'static str) -> Result<(SparseColMat<usize, f64>, Llt<usize, f64>)> {
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, trip)
        .map_err(|e| Error::InvalidArgument(format!("{what}: {e:?}")))?;
    let llt = mat.sp_cholesky(Side::Lower).map_err(|_| Error::Singular(what))?;
    Ok((mat, llt))
}

pub fn condense_subdomain(problem: &DiscreteProblem<'_>, sub: &Subdomain, lay: SubdomainLayout) -> Result<CondensedSubdomain> {
    let nf = problem.k + 1;
    let blocks = assemble_blocks(problem, sub, &lay)?;
    let ni = lay.n_interior * nf;
    let nb = lay.n_coarse;
    let mut s = blocks.kbb;
    let mut g = blocks.gb;
    let recovery = if ni == 0 {
        None
    } else {
        let (_, llt) = factor_spd(ni, &blocks.kii, "subdomain interior multiplier block")?;
        let kib = SparseColMat::<usize, f64>::try_new_from_triplets(ni, nb, &blocks.kib)
            .map_err(|e| Error::InvalidArgument(format!("interior coupling: {e:?}")))?;
        let col_entries = |c: usize| kib.row_idx_of_col(c).zip(kib.val_of_col(c).iter().copied());
        let mut c0 = 0;
        while c0 < nb {
            let c1 = (c0 + CHUNK).min(nb);
            let mut x = Mat::<f64>::zeros(ni, c1 - c0);
            for c in c0..c1 {
                for (r, v) in col_entries(c) {
                    x[(r, c - c0)] = v;
                }
            }
            solve_in_place(&llt, &mut x);
            for b in 0..nb {
                for (r, v) in col_entries(b) {
                    for c in c0..c1 {
                        s[(b, c)] -= v * x[(r, c - c0)];
                    }
                }
            }
            c0 = c1;
        }
        let mut w = Mat::<f64>::from_fn(ni, 1, |r, _| blocks.gi[r]);
        solve_in_place(&llt, &mut w);
        for (b, gb) in g.iter_mut().enumerate() {
            for (r, v) in col_entries(b) {
                *gb -= v * w[(r, 0)];
            }
        }
        Some(InteriorRecovery {
            llt,
            kib,
            gi: blocks.gi,
        })
    };
    Ok(CondensedSubdomain {
        subdomain: sub.id,
        coarse_dofs: lay.coarse_dofs.clone(),
        layout: lay,
        s,
        g,
        recovery,
    })
}

impl CondensedSubdomain {
    /// Interior multipliers for the local coarse values `xi`.
    pub fn recover_interior(&self, xi: &[f64]) -> Vec<f64> {
        let Some(rec) = &self.recovery else {
            return Vec::new();
        };
        let ni = rec.gi.len();
        let mut rhs = Mat::<f64>::from_fn(ni, 1, |r, _| rec.gi[r]);
        for (c, &x) in xi.iter().enumerate() {
            for (r, v) in rec.kib.row_idx_of_col(c).zip(rec.kib.val_of_col(c)) {
                rhs[(r, 0)] += v * x;
            }
        }
        solve_in_place(&rec.llt, &mut rhs);
        (0..ni).map(|r| -rhs[(r, 0)]).collect()
    }

    /// Coarse flux functional `-(s xi + g)` for local coarse values `xi`.
    pub fn coarse_flux(&self, xi: &[f64]) -> DVector<f64> {
        let nb = self.g.len();
        DVector::from_fn(nb, |r, _| -(self.g[r] + (0..nb).map(|c| self.s[(r, c)] * xi[c]).sum::<f64>()))
    }
}
