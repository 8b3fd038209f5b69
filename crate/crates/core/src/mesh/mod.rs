//! Three-scale partition of a rectangle: subdomains, skeleton segments on the
//! subdomain interfaces, and a conforming fine triangulation per subdomain.

mod build;
mod locate;
pub use locate::Location;
mod validate;
pub mod vtk;

pub use build::{build_structured, build_structured_with, DiagonalPolicy};
pub use validate::{validate, Violation};


use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::basis::{signed_area, triangle_diameter};
use crate::fem::Point;

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect {
        x0: 0.0,
        y0: 0.0,
        x1: 1.0,
        y1: 1.0,
    };

    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        p[0] >= self.x0 - tol && p[0] <= self.x1 + tol && p[1] >= self.y0 - tol && p[1] <= self.y1 + tol
    }

    /// True when `p` lies on the boundary of the rectangle.
    pub fn on_boundary(&self, p: Point, tol: f64) -> bool {
        self.contains(p, tol)
            && ((p[0] - self.x0).abs() <= tol
                || (p[0] - self.x1).abs() <= tol
                || (p[1] - self.y0).abs() <= tol
                || (p[1] - self.y1).abs() <= tol)
    }

    /// True when the segment `a`-`b` lies on one side of the rectangle.
    pub fn edge_on_boundary(&self, a: Point, b: Point, tol: f64) -> bool {
        let on = |c: f64, v0: f64, v1: f64| (c - v0).abs() <= tol && (c - v1).abs() <= tol;
        self.contains(a, tol)
            && self.contains(b, tol)
            && (on(self.x0, a[0], b[0])
                || on(self.x1, a[0], b[0])
                || on(self.y0, a[1], b[1])
                || on(self.y1, a[1], b[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceClass {
    InteriorFine,
    SkeletonOwned(usize),
    Boundary,
}

/// An edge of the fine triangulation of one subdomain.
///
/// The canonical direction runs from `vertices[0]` to `vertices[1]`
/// (increasing local vertex index); `normal` is the right-hand unit normal of
/// that direction and the face parameter `s` runs from 0 to 1 along it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub vertices: [usize; 2],
    pub endpoints: [Point; 2],
    pub class: FaceClass,
    /// `(element, local face)` pairs; one entry on the subdomain boundary.
    pub elements: Vec<(usize, usize)>,
    pub normal: Point,
    pub length: f64,
    /// Skeleton-segment parameters of the two endpoints (skeleton faces only).
    pub segment_param: Option<[f64; 2]>,
}

impl Face {
    pub fn point(&self, s: f64) -> Point {
        let [a, b] = self.endpoints;
        [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
    }

    pub fn midpoint(&self) -> Point {
        self.point(0.5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineElement {
    /// Counter-clockwise local vertex indices.
    pub vertices: [usize; 3],
    /// Local face `j` is the edge opposite vertex `j`, traversed from
    /// `vertices[j + 1]` to `vertices[j + 2]`.
    pub faces: [usize; 3],
    /// Whether the traversal above opposes the face's canonical direction.
    pub reversed: [bool; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subdomain {
    pub id: usize,
    pub rect: Rect,
    pub vertices: Vec<Point>,
    pub elements: Vec<FineElement>,
    pub faces: Vec<Face>,
    /// Cells per axis when generated on a structured grid; element `2c` and
    /// `2c + 1` then cover square `c = j * n + i`.
    pub grid: Option<usize>,
}

impl Subdomain {
    pub fn element_vertices(&self, e: usize) -> [Point; 3] {
        let v = self.elements[e].vertices;
        [self.vertices[v[0]], self.vertices[v[1]], self.vertices[v[2]]]
    }

    pub fn element_area(&self, e: usize) -> f64 {
        signed_area(&self.element_vertices(e))
    }

    /// Outward unit normal of local face `j` of element `e`.
    pub fn outward_normal(&self, e: usize, j: usize) -> Point {
        let el = &self.elements[e];
        let n = self.faces[el.faces[j]].normal;
        if el.reversed[j] {
            [-n[0], -n[1]]
        } else {
            n
        }
    }

    pub fn interior_faces(&self) -> impl Iterator<Item = usize> + '_ {
        self.faces_of(|c| c == FaceClass::InteriorFine)
    }

    pub fn skeleton_faces(&self) -> impl Iterator<Item = usize> + '_ {
        self.faces_of(|c| matches!(c, FaceClass::SkeletonOwned(_)))
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        self.faces_of(|c| c == FaceClass::Boundary)
    }

    fn faces_of(&self, pred: impl Fn(FaceClass) -> bool + 'static) -> impl Iterator<Item = usize> + '_ {
        self.faces
            .iter()
            .enumerate()
            .filter(move |(_, f)| pred(f.class))
            .map(|(i, _)| i)
    }
}

/// The fine faces of one subdomain covering a skeleton segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSide {
    pub subdomain: usize,
    pub faces: Vec<usize>,
}

/// A piece of an interface between two subdomains; the parameter runs from
/// `endpoints[0]` to `endpoints[1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonSegment {
    pub id: usize,
    pub endpoints: [Point; 2],
    pub sides: [SegmentSide; 2],
    pub length: f64,
    /// Unit normal pointing from `sides[0]` into `sides[1]`.
    pub normal: Point,
}

impl SkeletonSegment {
    pub fn point(&self, s: f64) -> Point {
        let [a, b] = self.endpoints;
        [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
    }

    pub fn tangent(&self) -> Point {
        let [a, b] = self.endpoints;
        [(b[0] - a[0]) / self.length, (b[1] - a[1]) / self.length]
    }

    pub fn midpoint(&self) -> Point {
        self.point(0.5)
    }

    /// Segment parameter of the orthogonal projection of `p`.
    pub fn param_of(&self, p: Point) -> f64 {
        let t = self.tangent();
        let a = self.endpoints[0];
        ((p[0] - a[0]) * t[0] + (p[1] - a[1]) * t[1]) / self.length
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    #[serde(rename = "L")]
    pub big_l: f64,
    #[serde(rename = "H")]
    pub big_h: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshHierarchy {
    pub domain: Rect,
    pub subdomains: Vec<Subdomain>,
    pub skeleton_segments: Vec<SkeletonSegment>,
    pub scales: Scales,
}

/// Face classification of one subdomain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubdomainFaceSets {
    pub interior: Vec<usize>,
    pub skeleton: Vec<usize>,
    pub boundary: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceSets {
    pub subdomains: Vec<SubdomainFaceSets>,
    /// Ids of the skeleton segments.
    pub skeleton: Vec<usize>,
}

/// Input for [`MeshHierarchy::from_triangulations`].
#[derive(Debug, Clone)]
pub struct SubdomainInput {
    pub rect: Rect,
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

pub(crate) const GEOM_TOL: f64 = 1e-12;

impl MeshHierarchy {
    pub fn n_elements(&self) -> usize {
        self.subdomains.iter().map(|s| s.elements.len()).sum()
    }

    pub fn face_sets(&self) -> FaceSets {
        FaceSets {
            subdomains: self
                .subdomains
                .iter()
                .map(|s| SubdomainFaceSets {
                    interior: s.interior_faces().collect(),
                    skeleton: s.skeleton_faces().collect(),
                    boundary: s.boundary_faces().collect(),
                })
                .collect(),
            skeleton: self.skeleton_segments.iter().map(|s| s.id).collect(),
        }
    }

    /// Assembles a hierarchy from explicit triangulations and segments.
    ///
    /// Triangles are taken as given (orientation is checked by [`validate`]).
    /// Subdomain-boundary edges on the domain boundary become `Boundary`
    /// faces; the others must lie in one of the skeleton segments.
    pub fn from_triangulations(
        domain: Rect,
        subdomains: Vec<SubdomainInput>,
        segments: Vec<[Point; 2]>,
    ) -> Result<Self> {
        let mut subs: Vec<Subdomain> = subdomains
            .into_iter()
            .enumerate()
            .map(|(id, input)| assemble_subdomain(id, input.rect, input.vertices, &input.triangles, None))
            .collect::<Result<_>>()?;
        let segs = classify_boundary_faces(domain, &mut subs, &segments)?;
        let scales = compute_scales(&subs, &segs);
        Ok(Self {
            domain,
            subdomains: subs,
            skeleton_segments: segs,
            scales,
        })
    }

    /// Total number of fine faces carrying a multiplier of their own.
    pub fn n_interior_faces(&self) -> usize {
        self.subdomains.iter().map(|s| s.interior_faces().count()).sum()
    }
}

pub(crate) fn assemble_subdomain(
    id: usize,
    rect: Rect,
    vertices: Vec<Point>,
    triangles: &[[usize; 3]],
    grid: Option<usize>,
) -> Result<Subdomain> {
    use std::collections::HashMap;
    let mut faces: Vec<Face> = Vec::new();
    let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
    let mut elements = Vec::with_capacity(triangles.len());
    for (e, tri) in triangles.iter().enumerate() {
        if tri.iter().any(|&v| v >= vertices.len()) {
            return Err(Error::InvalidMesh(format!(
                "subdomain {id}: triangle {e} references a missing vertex"
            )));
        }
        let mut el = FineElement {
            vertices: *tri,
            faces: [0; 3],
            reversed: [false; 3],
        };
        for j in 0..3 {
            let a = tri[(j + 1) % 3];
            let b = tri[(j + 2) % 3];
            let key = (a.min(b), a.max(b));
            let f = *lookup.entry(key).or_insert_with(|| {
                let (pa, pb) = (vertices[key.0], vertices[key.1]);
                let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
                let length = dx.hypot(dy);
                faces.push(Face {
                    vertices: [key.0, key.1],
                    endpoints: [pa, pb],
                    class: FaceClass::InteriorFine,
                    elements: Vec::with_capacity(2),
                    normal: [dy / length, -dx / length],
                    length,
                    segment_param: None,
                });
                faces.len() - 1
            });
            faces[f].elements.push((e, j));
            el.faces[j] = f;
            el.reversed[j] = a > b;
        }
        elements.push(el);
    }
    for (i, f) in faces.iter().enumerate() {
        if f.elements.len() > 2 {
            return Err(Error::InvalidMesh(format!(
                "subdomain {id}: face {i} shared by {} triangles",
                f.elements.len()
            )));
        }
    }
    Ok(Subdomain {
        id,
        rect,
        vertices,
        elements,
        faces,
        grid,
    })
}

/// Marks single-element faces as `Boundary` or `SkeletonOwned` and builds the
/// skeleton segments with their per-side face lists.
pub(crate) fn classify_boundary_faces(
    domain: Rect,
    subs: &mut [Subdomain],
    segments: &[[Point; 2]],
) -> Result<Vec<SkeletonSegment>> {
    let mut sides: Vec<Vec<SegmentSide>> = vec![Vec::new(); segments.len()];
    for sub in subs.iter_mut() {
        let tol = GEOM_TOL * sub.rect.diameter().max(1.0);
        for (fi, face) in sub.faces.iter_mut().enumerate() {
            if face.elements.len() != 1 {
                continue;
            }
            let [a, b] = face.endpoints;
            if domain.edge_on_boundary(a, b, tol) {
                face.class = FaceClass::Boundary;
                continue;
            }
            let found = segments.iter().enumerate().find_map(|(si, seg)| {
                let pa = param_on(seg, a, tol)?;
                let pb = param_on(seg, b, tol)?;
                Some((si, pa, pb))
            });
            match found {
                Some((si, pa, pb)) => {
                    face.class = FaceClass::SkeletonOwned(si);
                    face.segment_param = Some([pa, pb]);
                    match sides[si].iter_mut().find(|s| s.subdomain == sub.id) {
                        Some(side) => side.faces.push(fi),
                        None => sides[si].push(SegmentSide {
                            subdomain: sub.id,
                            faces: vec![fi],
                        }),
                    }
                }
                None => {
                    return Err(Error::InvalidMesh(format!(
                        "subdomain {}: boundary face {fi} lies neither on the domain boundary nor in a skeleton segment",
                        sub.id
                    )))
                }
            }
        }
    }
    let mut out = Vec::with_capacity(segments.len());
    for (id, (seg, mut s)) in segments.iter().zip(sides).enumerate() {
        if s.len() != 2 {
            return Err(Error::InvalidMesh(format!(
                "skeleton segment {id} touches {} subdomains",
                s.len()
            )));
        }
        let length = (seg[1][0] - seg[0][0]).hypot(seg[1][1] - seg[0][1]);
        let t = [(seg[1][0] - seg[0][0]) / length, (seg[1][1] - seg[0][1]) / length];
        let normal = [t[1], -t[0]];
        // Side 0 lies behind the normal.
        let c0 = rect_center(subs[s[0].subdomain].rect);
        let mid = [0.5 * (seg[0][0] + seg[1][0]), 0.5 * (seg[0][1] + seg[1][1])];
        if (mid[0] - c0[0]) * normal[0] + (mid[1] - c0[1]) * normal[1] < 0.0 {
            s.swap(0, 1);
        }
        for side in &mut s {
            let sub = &subs[side.subdomain];
            side.faces.sort_by(|&x, &y| {
                let px = sub.faces[x].segment_param.unwrap();
                let py = sub.faces[y].segment_param.unwrap();
                px[0].min(px[1]).total_cmp(&py[0].min(py[1]))
            });
        }
        let [s0, s1] = <[SegmentSide; 2]>::try_from(s).expect("two sides");
        out.push(SkeletonSegment {
            id,
            endpoints: *seg,
            sides: [s0, s1],
            length,
            normal,
        });
    }
    Ok(out)
}

fn rect_center(r: Rect) -> Point {
    [0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1)]
}

/// Parameter of `p` on `seg` if `p` lies on the closed segment.
fn param_on(seg: &[Point; 2], p: Point, tol: f64) -> Option<f64> {
    let [a, b] = *seg;
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2;
    let q = [a[0] + t * dx, a[1] + t * dy];
    let dist = (p[0] - q[0]).hypot(p[1] - q[1]);
    let ttol = tol / len2.sqrt();
    (dist <= tol && t >= -ttol && t <= 1.0 + ttol).then_some(t.clamp(0.0, 1.0))
}

pub(crate) fn compute_scales(subs: &[Subdomain], segs: &[SkeletonSegment]) -> Scales {
    let big_l = subs
        .iter()
        .map(|s| s.rect.width().max(s.rect.height()))
        .fold(0.0, f64::max);
    let h = subs
        .iter()
        .flat_map(|s| (0..s.elements.len()).map(move |e| triangle_diameter(&s.element_vertices(e))))
        .fold(0.0, f64::max);
    let big_h = if segs.is_empty() {
        big_l
    } else {
        segs.iter().map(|s| s.length).fold(0.0, f64::max)
    };
    Scales { big_l, big_h, h }
}
