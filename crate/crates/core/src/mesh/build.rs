use super::{assemble_subdomain, classify_boundary_faces, compute_scales, MeshHierarchy, Rect};
use crate::error::{Error, Result};
use crate::fem::Point;

/// Diagonal layout of the structured squares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalPolicy {
    /// Lower-left to upper-right everywhere, except in subdomain corner
    /// squares whose two outer sides both lie on interior interfaces; those use
    /// the other diagonal so no triangle owns two skeleton faces.
    #[default]
    CornerFlip,
    /// Lower-left to upper-right everywhere.
    Fixed,
}

/// Structured three-scale mesh with the same fine resolution in every
/// subdomain.
pub fn build_structured(domain: Rect, n_sub: usize, n_seg: usize, n_fine: usize) -> Result<MeshHierarchy> {
    build_structured_with(domain, n_sub, n_seg, &[n_fine], DiagonalPolicy::CornerFlip)
}

/// Structured mesh with `n_fine` given once or per subdomain (row-major,
/// subdomain `(i, j)` has id `j * n_sub + i`).
pub fn build_structured_with(
    domain: Rect,
    n_sub: usize,
    n_seg: usize,
    n_fine: &[usize],
    diagonal: DiagonalPolicy,
) -> Result<MeshHierarchy> {
    if n_sub == 0 || n_seg == 0 || n_fine.is_empty() || n_fine.contains(&0) {
        return Err(Error::InvalidArgument(
            "n_sub, n_seg and n_fine must be at least 1".into(),
        ));
    }
    if n_fine.len() != 1 && n_fine.len() != n_sub * n_sub {
        return Err(Error::InvalidArgument(format!(
            "expected 1 or {} fine resolutions, got {}",
            n_sub * n_sub,
            n_fine.len()
        )));
    }
    if !(domain.width() > 0.0 && domain.height() > 0.0) {
        return Err(Error::InvalidArgument("domain must have positive extent".into()));
    }
    if let Some(&bad) = n_fine.iter().find(|&&n| n % n_seg != 0) {
        return Err(Error::Nesting { n_fine: bad, n_seg });
    }
    let dx = domain.width() / n_sub as f64;
    let dy = domain.height() / n_sub as f64;
    let xs = |i: usize| if i == n_sub { domain.x1 } else { domain.x0 + i as f64 * dx };
    let ys = |j: usize| if j == n_sub { domain.y1 } else { domain.y0 + j as f64 * dy };

    let mut subs = Vec::with_capacity(n_sub * n_sub);
    for bj in 0..n_sub {
        for bi in 0..n_sub {
            let id = bj * n_sub + bi;
            let n = if n_fine.len() == 1 { n_fine[0] } else { n_fine[id] };
            let rect = Rect::new(xs(bi), ys(bj), xs(bi + 1), ys(bj + 1));
            let flip_ul = diagonal == DiagonalPolicy::CornerFlip && n >= 2 && bi > 0 && bj + 1 < n_sub;
            let flip_lr = diagonal == DiagonalPolicy::CornerFlip && n >= 2 && bi + 1 < n_sub && bj > 0;
            let (vertices, triangles) = grid_triangulation(rect, n, |i, j| {
                (flip_ul && i == 0 && j == n - 1) || (flip_lr && i == n - 1 && j == 0)
            });
            subs.push(assemble_subdomain(id, rect, vertices, &triangles, Some(n))?);
        }
    }

    let mut segments = Vec::with_capacity(2 * n_sub * (n_sub - 1) * n_seg);
    for i in 1..n_sub {
        for j in 0..n_sub {
            let (y0, y1) = (ys(j), ys(j + 1));
            for s in 0..n_seg {
                let a = y0 + (y1 - y0) * s as f64 / n_seg as f64;
                let b = if s + 1 == n_seg { y1 } else { y0 + (y1 - y0) * (s + 1) as f64 / n_seg as f64 };
                segments.push([[xs(i), a], [xs(i), b]]);
            }
        }
    }
    for j in 1..n_sub {
        for i in 0..n_sub {
            let (x0, x1) = (xs(i), xs(i + 1));
            for s in 0..n_seg {
                let a = x0 + (x1 - x0) * s as f64 / n_seg as f64;
                let b = if s + 1 == n_seg { x1 } else { x0 + (x1 - x0) * (s + 1) as f64 / n_seg as f64 };
                segments.push([[a, ys(j)], [b, ys(j)]]);
            }
        }
    }
    let segs = classify_boundary_faces(domain, &mut subs, &segments)?;
    let scales = compute_scales(&subs, &segs);
    Ok(MeshHierarchy {
        domain,
        subdomains: subs,
        skeleton_segments: segs,
        scales,
    })
}

/// `n x n` squares split into two counter-clockwise triangles each.
fn grid_triangulation(
    rect: Rect,
    n: usize,
    flipped: impl Fn(usize, usize) -> bool,
) -> (Vec<Point>, Vec<[usize; 3]>) {
    let coord = |lo: f64, hi: f64, i: usize| {
        if i == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / n as f64
        }
    };
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([coord(rect.x0, rect.x1, i), coord(rect.y0, rect.y1, j)]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = j * (n + 1) + i;
            let v10 = v00 + 1;
            let v01 = v00 + n + 1;
            let v11 = v01 + 1;
            if flipped(i, j) {
                triangles.push([v00, v10, v01]);
                triangles.push([v10, v11, v01]);
            } else {
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
    }
    (vertices, triangles)
}
