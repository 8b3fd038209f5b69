use nalgebra::{DMatrix, DVector};

use super::element::LocalSolution;
use crate::error::{Error, Result};
use crate::fem::basis::simplex_dim;
use crate::fem::quadrature::{physical_triangle_rule, segment_quadrature};
use crate::fem::{Point, ScaledMonomials, SegmentBasis};

/// The HDG projection `(Pi_V q, Pi_W u)` on one element.
///
/// Determined by moments of `q` and `u` against `P^{k-1}(K)` and by the
/// combination `q . n + tau u` tested against `P^k(F)` on every face.
/// Coefficients refer to [`ScaledMonomials::for_triangle`].
pub fn hdg_projection(
    u: impl Fn(Point) -> f64,
    q: impl Fn(Point) -> Point,
    vertices: &[Point; 3],
    tau: [f64; 3],
    k: usize,
) -> Result<LocalSolution> {
    let basis = ScaledMonomials::for_triangle(vertices, k);
    let np = basis.dim();
    let nm = if k == 0 { 0 } else { simplex_dim(k - 1) };
    let n = 3 * np;
    let order = 2 * k as i32 + 4;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    let mut vals = vec![0.0; np];

    // Monomials are ordered by degree, so the first `nm` span P^{k-1}.
    for (x, w) in physical_triangle_rule(vertices, order, None)? {
        basis.eval(x, &mut vals);
        let (qv, uv) = (q(x), u(x));
        for i in 0..nm {
            for j in 0..np {
                let mass = w * vals[i] * vals[j];
                a[(i, j)] += mass;
                a[(nm + i, np + j)] += mass;
                a[(2 * nm + i, 2 * np + j)] += mass;
            }
            rhs[i] += w * qv[0] * vals[i];
            rhs[nm + i] += w * qv[1] * vals[i];
            rhs[2 * nm + i] += w * uv * vals[i];
        }
    }

    let rule = segment_quadrature(order)?;
    let fb = SegmentBasis::new(k);
    let mut mu = vec![0.0; k + 1];
    for j in 0..3 {
        let p0 = vertices[(j + 1) % 3];
        let p1 = vertices[(j + 2) % 3];
        let (dx, dy) = (p1[0] - p0[0], p1[1] - p0[1]);
        let len = dx.hypot(dy);
        let nrm = [dy / len, -dx / len];
        for (t, wt) in rule.iter() {
            let x = [p0[0] + t * dx, p0[1] + t * dy];
            basis.eval(x, &mut vals);
            fb.eval_scaled(t, len, &mut mu);
            let (qv, uv) = (q(x), u(x));
            let target = qv[0] * nrm[0] + qv[1] * nrm[1] + tau[j] * uv;
            let w = wt * len;
            for (p, &m) in mu.iter().enumerate() {
                let row = 3 * nm + j * (k + 1) + p;
                for l in 0..np {
                    a[(row, l)] += w * m * vals[l] * nrm[0];
                    a[(row, np + l)] += w * m * vals[l] * nrm[1];
                    a[(row, 2 * np + l)] += w * m * vals[l] * tau[j];
                }
                rhs[row] += w * m * target;
            }
        }
    }
    let z = a
        .lu()
        .solve(&rhs)
        .filter(|z| z.iter().all(|v| v.is_finite()))
        .ok_or(Error::Singular("HDG projection system"))?;
    Ok(LocalSolution {
        qx: z.rows(0, np).iter().copied().collect(),
        qy: z.rows(np, np).iter().copied().collect(),
        u: z.rows(2 * np, np).iter().copied().collect(),
    })
}
