use super::{MeshHierarchy, Subdomain};
use crate::fem::Point;

/// A point located in the fine mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub subdomain: usize,
    pub element: usize,
    pub barycentric: [f64; 3],
}

fn barycentric(v: &[Point; 3], p: Point) -> [f64; 3] {
    let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    let l1 = ((p[0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (p[1] - v[0][1])) / det;
    let l2 = ((v[1][0] - v[0][0]) * (p[1] - v[0][1]) - (p[0] - v[0][0]) * (v[1][1] - v[0][1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

fn best_of(sub: &Subdomain, candidates: impl Iterator<Item = usize>, p: Point) -> Option<(usize, [f64; 3])> {
    let mut best: Option<(usize, [f64; 3], f64)> = None;
    for e in candidates {
        let b = barycentric(&sub.element_vertices(e), p);
        let m = b[0].min(b[1]).min(b[2]);
        if best.as_ref().is_none_or(|x| m > x.2) {
            best = Some((e, b, m));
        }
    }
    best.filter(|x| x.2 >= -1e-10).map(|x| (x.0, x.1))
}

impl MeshHierarchy {
    /// Fine element containing `p`. Points on shared edges go to the lowest
    /// subdomain id and, within a subdomain, to the first best-fitting element.
    pub fn locate(&self, p: Point) -> Option<Location> {
        let tol = 1e-12 * self.domain.diameter().max(1.0);
        for sub in self.subdomains.iter().filter(|s| s.rect.contains(p, tol)) {
            let found = match sub.grid {
                Some(n) => {
                    let cell = |t: f64, lo: f64, hi: f64| {
                        (((t - lo) / (hi - lo) * n as f64).floor().max(0.0) as usize).min(n - 1)
                    };
                    let i = cell(p[0], sub.rect.x0, sub.rect.x1);
                    let j = cell(p[1], sub.rect.y0, sub.rect.y1);
                    let c = j * n + i;
                    best_of(sub, [2 * c, 2 * c + 1].into_iter(), p)
                }
                None => best_of(sub, 0..sub.elements.len(), p),
            };
            if let Some((element, barycentric)) = found {
                return Some(Location {
                    subdomain: sub.id,
                    element,
                    barycentric,
                });
            }
        }
        None
    }
}
