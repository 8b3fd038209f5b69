use std::fmt;

use super::{param_on, FaceClass, MeshHierarchy, GEOM_TOL};

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NegativeArea { subdomain: usize, element: usize, area: f64 },
    NonConforming { subdomain: usize, face: usize, detail: String },
    MultipleSkeletonFaces { subdomain: usize, element: usize, count: usize },
    NotNested { segment: usize, subdomain: usize, detail: String },
    Scales { detail: String },
    Tiling { detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NegativeArea { subdomain, element, area } => {
                write!(f, "negative area: subdomain {subdomain}, element {element} (signed area {area:e})")
            }
            Self::NonConforming { subdomain, face, detail } => {
                write!(f, "non-conforming face: subdomain {subdomain}, face {face}: {detail}")
            }
            Self::MultipleSkeletonFaces { subdomain, element, count } => write!(
                f,
                "multiple skeleton faces: subdomain {subdomain}, element {element} owns {count}"
            ),
            Self::NotNested { segment, subdomain, detail } => {
                write!(f, "nesting: segment {segment}, subdomain {subdomain}: {detail}")
            }
            Self::Scales { detail } => write!(f, "scales: {detail}"),
            Self::Tiling { detail } => write!(f, "tiling: {detail}"),
        }
    }
}

/// Lists every structural problem of `mesh`; empty iff the mesh is valid.
pub fn validate(mesh: &MeshHierarchy) -> Vec<Violation> {
    let mut out = Vec::new();
    let tol = GEOM_TOL * mesh.domain.diameter().max(1.0);

    let mut rect_area = 0.0;
    for sub in &mesh.subdomains {
        rect_area += sub.rect.area();
        let mut tri_area = 0.0;
        for (e, el) in sub.elements.iter().enumerate() {
            let area = sub.element_area(e);
            tri_area += area.abs();
            if area <= 0.0 {
                out.push(Violation::NegativeArea {
                    subdomain: sub.id,
                    element: e,
                    area,
                });
            }
            let count = el
                .faces
                .iter()
                .filter(|&&f| matches!(sub.faces[f].class, FaceClass::SkeletonOwned(_)))
                .count();
            if count > 1 {
                out.push(Violation::MultipleSkeletonFaces {
                    subdomain: sub.id,
                    element: e,
                    count,
                });
            }
        }
        if (tri_area - sub.rect.area()).abs() > 1e-12 * sub.rect.area() {
            out.push(Violation::Tiling {
                detail: format!(
                    "subdomain {}: triangle areas sum to {tri_area}, rectangle area {}",
                    sub.id,
                    sub.rect.area()
                ),
            });
        }
        for (fi, face) in sub.faces.iter().enumerate() {
            let bad = |detail: String| Violation::NonConforming {
                subdomain: sub.id,
                face: fi,
                detail,
            };
            match (face.class, face.elements.len()) {
                (FaceClass::InteriorFine, 2) => {
                    let (e0, j0) = face.elements[0];
                    let (e1, j1) = face.elements[1];
                    if sub.elements[e0].reversed[j0] == sub.elements[e1].reversed[j1] {
                        out.push(bad("both neighbours traverse the face in the same direction".into()));
                    }
                }
                (FaceClass::InteriorFine, n) => out.push(bad(format!("interior face with {n} neighbours"))),
                (_, 1) => {}
                (_, n) => out.push(bad(format!("subdomain-boundary face with {n} neighbours"))),
            }
            if face.class == FaceClass::Boundary
                && !mesh.domain.edge_on_boundary(face.endpoints[0], face.endpoints[1], tol)
            {
                out.push(bad("boundary face off the domain boundary".into()));
            }
        }
    }
    if (rect_area - mesh.domain.area()).abs() > 1e-12 * mesh.domain.area() {
        out.push(Violation::Tiling {
            detail: format!(
                "subdomain areas sum to {rect_area}, domain area {}",
                mesh.domain.area()
            ),
        });
    }

    for seg in &mesh.skeleton_segments {
        for side in &seg.sides {
            let sub = &mesh.subdomains[side.subdomain];
            let mut covered = 0.0;
            for &fi in &side.faces {
                let face = &sub.faces[fi];
                let inside = param_on(&seg.endpoints, face.endpoints[0], tol).is_some()
                    && param_on(&seg.endpoints, face.endpoints[1], tol).is_some();
                if face.class != FaceClass::SkeletonOwned(seg.id) || !inside {
                    out.push(Violation::NotNested {
                        segment: seg.id,
                        subdomain: sub.id,
                        detail: format!("face {fi} is not contained in the segment"),
                    });
                }
                covered += face.length;
            }
            if (covered - seg.length).abs() > 1e-10 * seg.length {
                out.push(Violation::NotNested {
                    segment: seg.id,
                    subdomain: sub.id,
                    detail: format!("fine faces cover {covered} of length {}", seg.length),
                });
            }
        }
    }

    let s = mesh.scales;
    if !(s.h > 0.0 && s.big_h > 0.0 && s.big_l > 0.0) {
        out.push(Violation::Scales {
            detail: format!("non-positive scale (L = {}, H = {}, h = {})", s.big_l, s.big_h, s.h),
        });
    }
    if !mesh.skeleton_segments.is_empty() && s.h >= s.big_h {
        out.push(Violation::Scales {
            detail: format!("h = {} is not below H = {}", s.h, s.big_h),
        });
    }
    if s.big_h > s.big_l * (1.0 + 1e-12) {
        out.push(Violation::Scales {
            detail: format!("H = {} exceeds L = {}", s.big_h, s.big_l),
        });
    }
    if s.big_l > mesh.domain.diameter() * (1.0 + 1e-12) {
        out.push(Violation::Scales {
            detail: format!("L = {} exceeds the domain diameter", s.big_l),
        });
    }
    out
}
