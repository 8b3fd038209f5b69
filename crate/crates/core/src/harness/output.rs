use std::io::{self, Write};

use crate::fem::Point;
use crate::mesh::{vtk::write_polydata, MeshHierarchy};
use crate::upscaled::DiscreteSolution;

/// `u_h` per triangle sampled at its vertices (discontinuous point data)
/// with the element mean of `q_h` as cell data.
pub fn write_solution_vtk<W: Write>(mesh: &MeshHierarchy, sol: &DiscreteSolution, w: &mut W) -> io::Result<()> {
    let n = mesh.n_elements();
    let mut points: Vec<Point> = Vec::with_capacity(3 * n);
    let mut triangles = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(3 * n);
    let mut qx = Vec::with_capacity(n);
    let mut qy = Vec::with_capacity(n);
    for (s, sub) in mesh.subdomains.iter().enumerate() {
        for e in 0..sub.elements.len() {
            let v = sub.element_vertices(e);
            let base = points.len();
            for x in v {
                points.push(x);
                u.push(sol.eval_in(mesh, s, e, x).0);
            }
            triangles.push([base, base + 1, base + 2]);
            let c = [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0];
            let q = sol.eval_in(mesh, s, e, c).1;
            qx.push(q[0]);
            qy.push(q[1]);
        }
    }
    write_polydata(w, "u_h", &points, &triangles, &[("u_h", &u)], &[("q_x", &qx), ("q_y", &qy)])
}
