use nalgebra::{DMatrix, DVector};

use super::basis::SegmentBasis;
use super::quadrature::{composite_segment_rule, segment_quadrature};
use super::Point;
use crate::error::{Error, Result};

/// `L^2(F)` projection of `g` onto `P^l(F)` for the straight face `a -> b`.
///
/// Coefficients refer to [`SegmentBasis::eval_scaled`] with the face
/// parameter running from `a` (s = 0) to `b` (s = 1). `pieces > 1` uses a
/// composite rule, for oscillatory integrands.
pub fn l2_project_face(
    g: impl Fn(Point) -> f64,
    a: Point,
    b: Point,
    basis: &SegmentBasis,
    pieces: usize,
) -> Result<DVector<f64>> {
    let length = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    l2_project_segment(
        |s| g([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]),
        length,
        basis,
        pieces,
    )
}

/// Same as [`l2_project_face`] for a function of the face parameter.
pub fn l2_project_segment(
    g: impl Fn(f64) -> f64,
    length: f64,
    basis: &SegmentBasis,
    pieces: usize,
) -> Result<DVector<f64>> {
    let order = 2 * basis.degree as i32 + 12;
    let rule = composite_segment_rule(&segment_quadrature(order)?, pieces.max(1));
    let n = basis.dim();
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    let mut v = vec![0.0; n];
    for (s, w) in rule.iter() {
        basis.eval_scaled(s, length, &mut v);
        let gv = g(s);
        let wl = w * length;
        for i in 0..n {
            rhs[i] += wl * gv * v[i];
            for j in 0..n {
                gram[(i, j)] += wl * v[i] * v[j];
            }
        }
    }
    let chol = gram.cholesky().ok_or(Error::Singular("face projection Gram"))?;
    Ok(chol.solve(&rhs))
}

/// Value at face parameter `s` of an expansion in the scaled segment basis.
pub fn evaluate_segment_expansion(basis: &SegmentBasis, coeffs: &[f64], s: f64, length: f64) -> f64 {
    let mut v = vec![0.0; basis.dim()];
    basis.eval_scaled(s, length, &mut v);
    v.iter().zip(coeffs).map(|(a, b)| a * b).sum()
}
