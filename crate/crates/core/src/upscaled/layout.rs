use nalgebra::DMatrix;

use crate::coarse_space::{TraceBasis, TraceKind};
use crate::error::{Error, Result};
use crate::fem::quadrature::{composite_segment_rule, segment_quadrature};
use crate::fem::SegmentBasis;
use crate::mesh::{FaceClass, Face, MeshHierarchy, Subdomain};

/// Global numbering of the coarse multipliers: one block per segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoarseLayout {
    pub offsets: Vec<usize>,
}

impl CoarseLayout {
    pub fn new(mesh: &MeshHierarchy, bases: &[TraceBasis]) -> Result<Self> {
        let nseg = mesh.skeleton_segments.len();
        if bases.len() < nseg {
            return Err(Error::MissingTraceBasis(bases.len()));
        }
        if bases.len() > nseg {
            return Err(Error::TraceBasisMismatch(nseg));
        }
        let mut offsets = Vec::with_capacity(nseg + 1);
        offsets.push(0);
        for (seg, b) in mesh.skeleton_segments.iter().zip(bases) {
            if b.segment != seg.id || (b.length - seg.length).abs() > 1e-12 * seg.length.max(1.0) {
                return Err(Error::TraceBasisMismatch(seg.id));
            }
            offsets.push(offsets.last().unwrap() + b.dim());
        }
        Ok(Self { offsets })
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn range(&self, seg: usize) -> std::ops::Range<usize> {
        self.offsets[seg]..self.offsets[seg + 1]
    }
}

/// Coupling of one skeleton face to the coarse space of its segment.
#[derive(Debug, Clone)]
pub struct SkeletonCoupling {
    pub segment: usize,
    /// `P^k` face coefficients of each coarse basis function (`nf x m`).
    pub proj: DMatrix<f64>,
    /// `Gram - P^T P` over the face; zero when the coarse space restricts
    /// into `P^k(F)`.
    pub defect: DMatrix<f64>,
}

pub fn skeleton_coupling(face: &Face, basis: &TraceBasis, k: usize) -> SkeletonCoupling {
    let [sa, sb] = face.segment_param.expect("skeleton face carries segment parameters");
    let nf = k + 1;
    let m = basis.dim();
    let l = basis.degree();
    let frac = (sb - sa).abs();
    let order = (2 * k.max(l) + 2).max(if matches!(basis.kind, TraceKind::Multiscale { .. }) { 7 } else { 0 });
    let rule = composite_segment_rule(&segment_quadrature(order as i32).expect("small order"), basis.panels_for(frac));
    let fb = SegmentBasis::new(k);
    let mut proj = DMatrix::zeros(nf, m);
    let mut gram = DMatrix::zeros(m, m);
    let mut phi = vec![0.0; nf];
    let mut mu = vec![0.0; m];
    for (s, w) in rule.iter() {
        fb.eval_scaled(s, face.length, &mut phi);
        basis.eval(sa + s * (sb - sa), &mut mu);
        let wl = w * face.length;
        for i in 0..m {
            for p in 0..nf {
                proj[(p, i)] += wl * phi[p] * mu[i];
            }
            for j in 0..m {
                gram[(i, j)] += wl * mu[i] * mu[j];
            }
        }
    }
    let exact_restriction = matches!(basis.kind, TraceKind::Polynomial { l } if l <= k);
    let defect = if exact_restriction {
        DMatrix::zeros(m, m)
    } else {
        gram - proj.transpose() * &proj
    };
    SkeletonCoupling {
        segment: basis.segment,
        proj,
        defect,
    }
}

/// How the multipliers of one subdomain map to unknowns.
#[derive(Debug, Clone)]
pub struct SubdomainLayout {
    /// Interior-face index of each face, `None` off the interior set.
    pub interior_index: Vec<Option<usize>>,
    pub n_interior: usize,
    /// Segments touching the subdomain in increasing id, with their local
    /// column offsets.
    pub segments: Vec<(usize, usize)>,
    pub n_coarse: usize,
    /// Global coarse DOF of each local coarse column.
    pub coarse_dofs: Vec<usize>,
    pub skeleton: Vec<Option<SkeletonCoupling>>,
}

impl SubdomainLayout {
    pub fn new(sub: &Subdomain, bases: &[TraceBasis], layout: &CoarseLayout, k: usize) -> Self {
        let mut interior_index = vec![None; sub.faces.len()];
        let mut n_interior = 0;
        let mut segs: Vec<usize> = Vec::new();
        let mut skeleton = vec![None; sub.faces.len()];
        for (i, f) in sub.faces.iter().enumerate() {
            match f.class {
                FaceClass::InteriorFine => {
                    interior_index[i] = Some(n_interior);
                    n_interior += 1;
                }
                FaceClass::SkeletonOwned(s) => {
                    segs.push(s);
                    skeleton[i] = Some(skeleton_coupling(f, &bases[s], k));
                }
                FaceClass::Boundary => {}
            }
        }
        segs.sort_unstable();
        segs.dedup();
        let mut segments = Vec::with_capacity(segs.len());
        let mut coarse_dofs = Vec::new();
        for s in segs {
            segments.push((s, coarse_dofs.len()));
            coarse_dofs.extend(layout.range(s));
        }
        Self {
            interior_index,
            n_interior,
            n_coarse: coarse_dofs.len(),
            segments,
            coarse_dofs,
            skeleton,
        }
    }

    pub fn local_offset(&self, seg: usize) -> usize {
        self.segments
            .iter()
            .find(|(s, _)| *s == seg)
            .map(|(_, o)| *o)
            .expect("segment touches the subdomain")
    }
}
