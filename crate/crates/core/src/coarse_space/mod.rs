//! Coarse multiplier spaces on skeleton segments.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fem::basis::monomial_exponents;
use crate::fem::quadrature::{composite_segment_rule, segment_quadrature, SegmentRule};
use crate::fem::{Point, SegmentBasis};
use crate::homogenization::CellSolution;
use crate::mesh::SkeletonSegment;

/// Relative singular-value cut-off of the multiscale construction.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum TraceKind {
    Polynomial { l: usize },
    Multiscale { l: usize, eps: f64, half_width: f64 },
}

#[derive(Debug, Clone)]
enum Repr {
    Polynomial(SegmentBasis),
    Multiscale {
        cell: Arc<CellSolution>,
        exps: Vec<(u32, u32)>,
        /// Row `i` holds the candidate weights of basis function `i`.
        coeffs: DMatrix<f64>,
    },
}

/// Basis of the coarse multiplier space on one skeleton segment, orthonormal
/// in `L^2` of the segment. Functions are evaluated at the segment parameter
/// `s in [0, 1]`.
#[derive(Debug, Clone)]
pub struct TraceBasis {
    pub segment: usize,
    pub kind: TraceKind,
    pub length: f64,
    origin: Point,
    tangent: Point,
    normal: Point,
    repr: Repr,
}

impl TraceBasis {
    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Polynomial(b) => b.dim(),
            Repr::Multiscale { coeffs, .. } => coeffs.nrows(),
        }
    }

    pub fn degree(&self) -> usize {
        match self.kind {
            TraceKind::Polynomial { l } | TraceKind::Multiscale { l, .. } => l,
        }
    }

    pub fn point(&self, s: f64) -> Point {
        [
            self.origin[0] + s * self.length * self.tangent[0],
            self.origin[1] + s * self.length * self.tangent[1],
        ]
    }

    /// Values of all basis functions at segment parameter `s`.
    pub fn eval(&self, s: f64, out: &mut [f64]) {
        match &self.repr {
            Repr::Polynomial(b) => b.eval_scaled(s, self.length, out),
            Repr::Multiscale { cell, exps, coeffs } => {
                let TraceKind::Multiscale { eps, half_width, .. } = self.kind else {
                    unreachable!()
                };
                let cand = candidates(exps, cell, eps, half_width, self.length, self.tangent, self.normal, self.point(s), s);
                for (i, o) in out.iter_mut().enumerate().take(coeffs.nrows()) {
                    *o = coeffs.row(i).iter().zip(&cand).map(|(a, b)| a * b).sum();
                }
            }
        }
    }

    /// `dim x n` matrix of values at the given parameters.
    pub fn eval_points(&self, s: &[f64]) -> DMatrix<f64> {
        let m = self.dim();
        let mut out = DMatrix::zeros(m, s.len());
        let mut v = vec![0.0; m];
        for (j, &sj) in s.iter().enumerate() {
            self.eval(sj, &mut v);
            out.column_mut(j).copy_from_slice(&v);
        }
        out
    }

    pub fn evaluate(&self, coeffs: &[f64], s: f64) -> f64 {
        let mut v = vec![0.0; self.dim()];
        self.eval(s, &mut v);
        v.iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }

    /// Rule on `[0, 1]` integrating products of basis functions accurately:
    /// a single Gauss rule for polynomials, panels of length at most `eps / 4`
    /// otherwise.
    pub fn sampling_rule(&self) -> SegmentRule {
        match self.kind {
            TraceKind::Polynomial { l } => segment_quadrature(2 * l as i32 + 2).expect("small order"),
            TraceKind::Multiscale { eps, .. } => multiscale_rule(self.length, eps),
        }
    }

    /// Panel count for integrating these functions over a sub-interval of
    /// relative length `frac`.
    pub fn panels_for(&self, frac: f64) -> usize {
        match self.kind {
            TraceKind::Polynomial { .. } => 1,
            TraceKind::Multiscale { eps, .. } => ((4.0 * frac * self.length / eps).ceil() as usize).max(1),
        }
    }

    /// Identifies the space for cross-interface consistency checks.
    pub fn signature(&self) -> (usize, usize, u64) {
        let tag = match self.kind {
            TraceKind::Polynomial { l } => l as u64,
            TraceKind::Multiscale { l, eps, half_width } => {
                (l as u64) ^ eps.to_bits().rotate_left(7) ^ half_width.to_bits().rotate_left(19) ^ 1
            }
        };
        (self.segment, self.dim(), tag)
    }
}

fn multiscale_rule(length: f64, eps: f64) -> SegmentRule {
    let panels = ((4.0 * length / eps).ceil() as usize).max(1);
    composite_segment_rule(&segment_quadrature(7).expect("order 7"), panels)
}

/// `p(x) + eps chi(x / eps) . grad p(x)` for every monomial `p` of the local
/// frame `(s_hat, n_hat)` centred at the segment midpoint.
#[allow(clippy::too_many_arguments)]
fn candidates(
    exps: &[(u32, u32)],
    cell: &CellSolution,
    eps: f64,
    half_width: f64,
    length: f64,
    tangent: Point,
    normal: Point,
    x: Point,
    s: f64,
) -> Vec<f64> {
    let sh = (s - 0.5) * 2.0;
    // Points lie on the segment, so n_hat = 0.
    let nh = 0.0f64;
    let y = [x[0] / eps, x[1] / eps];
    let chi = [cell.chi(0, y), cell.chi(1, y)];
    let chi_t = chi[0] * tangent[0] + chi[1] * tangent[1];
    let chi_n = chi[0] * normal[0] + chi[1] * normal[1];
    exps.iter()
        .map(|&(a, b)| {
            let p = sh.powi(a as i32) * nh.powi(b as i32);
            let dps = if a == 0 { 0.0 } else { a as f64 * sh.powi(a as i32 - 1) * nh.powi(b as i32) };
            let dpn = if b == 0 { 0.0 } else { b as f64 * sh.powi(a as i32) * nh.powi(b as i32 - 1) };
            p + eps * (chi_t * dps * 2.0 / length + chi_n * dpn / half_width)
        })
        .collect()
}

/// Orthonormal Legendre basis of `P^l` on the segment.
pub fn polynomial_trace_basis(seg: &SkeletonSegment, l: usize) -> TraceBasis {
    TraceBasis {
        segment: seg.id,
        kind: TraceKind::Polynomial { l },
        length: seg.length,
        origin: seg.endpoints[0],
        tangent: seg.tangent(),
        normal: seg.normal,
        repr: Repr::Polynomial(SegmentBasis::new(l)),
    }
}

/// Multiscale space spanned by the corrected monomials of degree `l`,
/// orthonormalized through an SVD of weighted samples.
pub fn multiscale_trace_basis(
    seg: &SkeletonSegment,
    l: usize,
    cell: Arc<CellSolution>,
    eps: f64,
    half_width: f64,
) -> Result<TraceBasis> {
    if !(eps > 0.0) || !(half_width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps and half_width must be positive (got {eps}, {half_width})"
        )));
    }
    let exps = monomial_exponents(l);
    let rule = multiscale_rule(seg.length, eps);
    if rule.len() < exps.len() {
        return Err(Error::DegenerateSampling {
            samples: rule.len(),
            candidates: exps.len(),
        });
    }
    let tangent = seg.tangent();
    let mut a = DMatrix::<f64>::zeros(rule.len(), exps.len());
    for (r, (s, w)) in rule.iter().enumerate() {
        let c = candidates(&exps, &cell, eps, half_width, seg.length, tangent, seg.normal, seg.point(s), s);
        let sw = (w * seg.length).sqrt();
        for (j, v) in c.iter().enumerate() {
            a[(r, j)] = sw * v;
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    let mut keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > RANK_TOL * smax)
        .collect();
    keep.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let mut coeffs = DMatrix::<f64>::zeros(keep.len(), exps.len());
    for (row, &i) in keep.iter().enumerate() {
        let sigma = svd.singular_values[i];
        // Fix the sign so the largest weight is positive.
        let vrow = v_t.row(i);
        let sign = if vrow.iter().fold(0.0f64, |m, &x| if x.abs() > m.abs() { x } else { m }) < 0.0 {
            -1.0
        } else {
            1.0
        };
        for j in 0..exps.len() {
            coeffs[(row, j)] = sign * vrow[j] / sigma;
        }
    }
    Ok(TraceBasis {
        segment: seg.id,
        kind: TraceKind::Multiscale { l, eps, half_width },
        length: seg.length,
        origin: seg.endpoints[0],
        tangent,
        normal: seg.normal,
        repr: Repr::Multiscale { cell, exps, coeffs },
    })
}

/// `L^2` projection of `g` (a function of the segment parameter) onto the
/// span of `basis`.
pub fn interpolate_on_trace_basis(g: impl Fn(f64) -> f64, basis: &TraceBasis) -> DVector<f64> {
    let m = basis.dim();
    let rule = match basis.kind {
        TraceKind::Polynomial { l } => composite_segment_rule(&segment_quadrature(2 * l as i32 + 12).expect("order"), 8),
        TraceKind::Multiscale { .. } => basis.sampling_rule(),
    };
    let mut out = DVector::zeros(m);
    let mut v = vec![0.0; m];
    for (s, w) in rule.iter() {
        basis.eval(s, &mut v);
        let gw = g(s) * w * basis.length;
        for i in 0..m {
            out[i] += gw * v[i];
        }
    }
    out
}

/// Gram matrix of `basis` under its sampling rule.
pub fn gram_matrix(basis: &TraceBasis) -> DMatrix<f64> {
    let rule = basis.sampling_rule();
    let m = basis.dim();
    let mut g = DMatrix::zeros(m, m);
    let mut v = vec![0.0; m];
    for (s, w) in rule.iter() {
        basis.eval(s, &mut v);
        for i in 0..m {
            for j in 0..m {
                g[(i, j)] += w * basis.length * v[i] * v[j];
            }
        }
    }
    g
}

#[cfg(test)]
mod tests;
