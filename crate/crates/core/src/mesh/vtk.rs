//! Legacy ASCII VTK output (POLYDATA with triangle polygons).

use std::io::{self, Write};

use super::MeshHierarchy;
use crate::fem::Point;

pub type Field<'a> = (&'a str, &'a [f64]);

pub fn write_polydata<W: Write>(
    w: &mut W,
    title: &str,
    points: &[Point],
    triangles: &[[usize; 3]],
    point_data: &[Field<'_>],
    cell_data: &[Field<'_>],
) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.lines().next().unwrap_or(""))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET POLYDATA")?;
    writeln!(w, "POINTS {} double", points.len())?;
    for p in points {
        writeln!(w, "{} {} 0", p[0], p[1])?;
    }
    writeln!(w, "POLYGONS {} {}", triangles.len(), 4 * triangles.len())?;
    for t in triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    write_fields(w, "CELL_DATA", triangles.len(), cell_data)?;
    write_fields(w, "POINT_DATA", points.len(), point_data)
}

fn write_fields<W: Write>(w: &mut W, kind: &str, n: usize, fields: &[Field<'_>]) -> io::Result<()> {
    if fields.is_empty() {
        return Ok(());
    }
    writeln!(w, "{kind} {n}")?;
    for (name, values) in fields {
        assert_eq!(values.len(), n, "field {name} has the wrong length");
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in *values {
            writeln!(w, "{v}")?;
        }
    }
    Ok(())
}

/// Writes all fine triangles with their subdomain id as cell data.
pub fn write_mesh<W: Write>(mesh: &MeshHierarchy, w: &mut W) -> io::Result<()> {
    let mut points = Vec::new();
    let mut triangles = Vec::with_capacity(mesh.n_elements());
    let mut owner = Vec::with_capacity(mesh.n_elements());
    for sub in &mesh.subdomains {
        let offset = points.len();
        points.extend_from_slice(&sub.vertices);
        for el in &sub.elements {
            triangles.push(el.vertices.map(|v| v + offset));
            owner.push(sub.id as f64);
        }
    }
    write_polydata(w, "three-scale mesh", &points, &triangles, &[], &[("subdomain", &owner)])
}
