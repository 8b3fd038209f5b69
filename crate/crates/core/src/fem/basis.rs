//! Polynomial bases: centroid-shifted, diameter-scaled monomials on
//! triangles and orthonormal Legendre polynomials on segments.

use super::Point;

/// Dimension of `P^k` in two variables.
pub fn simplex_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Exponent pairs `(a, b)` of `x^a y^b` with `a + b <= k`, ordered by total
/// degree and then by increasing power of `y`.
pub fn monomial_exponents(k: usize) -> Vec<(u32, u32)> {
    let mut exps = Vec::with_capacity(simplex_dim(k));
    for d in 0..=k as u32 {
        for b in 0..=d {
            exps.push((d - b, b));
        }
    }
    exps
}

/// Monomials `((x - c) / s)^a ((y - c) / s)^b` spanning `P^k` on one element.
#[derive(Debug, Clone)]
pub struct ScaledMonomials {
    degree: usize,
    exps: Vec<(u32, u32)>,
    center: Point,
    scale: f64,
}

impl ScaledMonomials {
    pub fn new(degree: usize, center: Point, scale: f64) -> Self {
        Self {
            degree,
            exps: monomial_exponents(degree),
            center,
            scale,
        }
    }

    /// Basis centred at the triangle centroid and scaled by its diameter.
    pub fn for_triangle(vertices: &[Point; 3], degree: usize) -> Self {
        let center = [
            (vertices[0][0] + vertices[1][0] + vertices[2][0]) / 3.0,
            (vertices[0][1] + vertices[1][1] + vertices[2][1]) / 3.0,
        ];
        Self::new(degree, center, triangle_diameter(vertices))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    fn local(&self, x: Point) -> (f64, f64) {
        (
            (x[0] - self.center[0]) / self.scale,
            (x[1] - self.center[1]) / self.scale,
        )
    }

    pub fn eval(&self, x: Point, values: &mut [f64]) {
        let (xi, eta) = self.local(x);
        for (v, &(a, b)) in values.iter_mut().zip(&self.exps) {
            *v = xi.powi(a as i32) * eta.powi(b as i32);
        }
    }

    pub fn eval_with_grad(&self, x: Point, values: &mut [f64], grads: &mut [[f64; 2]]) {
        let (xi, eta) = self.local(x);
        let inv = 1.0 / self.scale;
        for ((v, g), &(a, b)) in values.iter_mut().zip(grads.iter_mut()).zip(&self.exps) {
            let (a, b) = (a as i32, b as i32);
            *v = xi.powi(a) * eta.powi(b);
            g[0] = if a > 0 {
                a as f64 * xi.powi(a - 1) * eta.powi(b) * inv
            } else {
                0.0
            };
            g[1] = if b > 0 {
                b as f64 * xi.powi(a) * eta.powi(b - 1) * inv
            } else {
                0.0
            };
        }
    }

    /// Value of the expansion `sum_i c_i phi_i` at `x`.
    pub fn evaluate(&self, coeffs: &[f64], x: Point) -> f64 {
        let (xi, eta) = self.local(x);
        coeffs
            .iter()
            .zip(&self.exps)
            .map(|(c, &(a, b))| c * xi.powi(a as i32) * eta.powi(b as i32))
            .sum()
    }
}

/// `P^k` basis on the reference triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimplexBasis {
    pub degree: usize,
}

impl SimplexBasis {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    pub fn dim(&self) -> usize {
        simplex_dim(self.degree)
    }

    pub fn on_reference(&self) -> ScaledMonomials {
        ScaledMonomials::for_triangle(&REFERENCE_TRIANGLE, self.degree)
    }
}

pub const REFERENCE_TRIANGLE: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

pub fn triangle_diameter(v: &[Point; 3]) -> f64 {
    let d = |a: Point, b: Point| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    d(v[0], v[1]).max(d(v[1], v[2])).max(d(v[2], v[0]))
}

/// Signed area, positive for counter-clockwise vertex order.
pub fn signed_area(v: &[Point; 3]) -> f64 {
    0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]))
}

/// Orthonormal Legendre basis of `P^l` on `[0, 1]`:
/// `sqrt(2n + 1) P_n(2s - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentBasis {
    pub degree: usize,
}

impl SegmentBasis {
    pub fn new(degree: usize) -> Self {
        Self { degree }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    /// Values at reference parameter `s`.
    pub fn eval(&self, s: f64, values: &mut [f64]) {
        let x = 2.0 * s - 1.0;
        let (mut p0, mut p1) = (1.0, x);
        for (n, v) in values.iter_mut().enumerate().take(self.degree + 1) {
            let p = match n {
                0 => 1.0,
                1 => x,
                _ => {
                    let p2 = ((2 * n - 1) as f64 * x * p1 - (n - 1) as f64 * p0) / n as f64;
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
            *v = ((2 * n + 1) as f64).sqrt() * p;
        }
    }

    /// Values of the basis orthonormal in `L^2` of a segment of the given
    /// length, at reference parameter `s`.
    pub fn eval_scaled(&self, s: f64, length: f64, values: &mut [f64]) {
        self.eval(s, values);
        let inv = 1.0 / length.sqrt();
        for v in values.iter_mut().take(self.degree + 1) {
            *v *= inv;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::quadrature::{segment_quadrature, triangle_quadrature};
    use nalgebra::DMatrix;

    #[test]
    fn dims_and_exponents() {
        assert_eq!(simplex_dim(0), 1);
        assert_eq!(simplex_dim(4), 15);
        assert_eq!(monomial_exponents(1), vec![(0, 0), (1, 0), (0, 1)]);
    }

    #[test]
    fn gram_well_conditioned_up_to_degree_four() {
        let rule = triangle_quadrature(10).unwrap();
        for k in 0..=4 {
            let b = SimplexBasis::new(k).on_reference();
            let n = b.dim();
            let mut g = DMatrix::<f64>::zeros(n, n);
            let mut v = vec![0.0; n];
            for (p, w) in rule.iter() {
                b.eval(p, &mut v);
                for i in 0..n {
                    for j in 0..n {
                        g[(i, j)] += w * v[i] * v[j];
                    }
                }
            }
            let eig = g.symmetric_eigen().eigenvalues;
            let cond = eig.max() / eig.min();
            assert!(eig.min() > 0.0 && cond < 1e9, "k = {k}: cond {cond}");
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let tri = [[0.1, 0.2], [0.5, 0.1], [0.3, 0.6]];
        let b = ScaledMonomials::for_triangle(&tri, 3);
        let n = b.dim();
        let x = [0.3, 0.3];
        let (mut v, mut g) = (vec![0.0; n], vec![[0.0; 2]; n]);
        b.eval_with_grad(x, &mut v, &mut g);
        let (mut vp, mut vm) = (vec![0.0; n], vec![0.0; n]);
        let h = 1e-6;
        for d in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[d] += h;
            xm[d] -= h;
            b.eval(xp, &mut vp);
            b.eval(xm, &mut vm);
            for i in 0..n {
                assert!(((vp[i] - vm[i]) / (2.0 * h) - g[i][d]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn legendre_orthonormal() {
        let rule = segment_quadrature(20).unwrap();
        let b = SegmentBasis::new(6);
        let mut v = vec![0.0; 7];
        let mut g = DMatrix::<f64>::zeros(7, 7);
        for (s, w) in rule.iter() {
            b.eval_scaled(s, 0.25, &mut v);
            for i in 0..7 {
                for j in 0..7 {
                    g[(i, j)] += 0.25 * w * v[i] * v[j];
                }
            }
        }
        assert!((g - DMatrix::identity(7, 7)).amax() < 1e-13);
    }

    #[test]
    fn orientation() {
        assert!(signed_area(&REFERENCE_TRIANGLE) > 0.0);
        assert!(signed_area(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]) < 0.0);
    }
}
