//! Gauss rules on the reference segment `[0, 1]` and the reference triangle
//! `{x, y >= 0, x + y <= 1}`.

use super::basis::triangle_diameter;
use super::Point;
use crate::error::{Error, Result};

/// Quadrature points and weights on a reference cell.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub order: usize,
}

pub type TriangleRule = QuadratureRule<[f64; 2]>;
pub type SegmentRule = QuadratureRule<f64>;

impl<P: Copy> QuadratureRule<P> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (P, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

pub const MAX_TRIANGLE_ORDER: i32 = 12;
pub const MAX_SEGMENT_ORDER: i32 = 255;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule on `[0, 1]` exact to the given order.
pub fn segment_quadrature(order: i32) -> Result<SegmentRule> {
    if !(1..=MAX_SEGMENT_ORDER).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    let n = order as usize / 2 + 1;
    let (x, w) = gauss_legendre(n);
    Ok(QuadratureRule {
        points: x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        weights: w.iter().map(|w| 0.5 * w).collect(),
        order: 2 * n - 1,
    })
}

/// Rule on the reference triangle exact to the given order, with positive
/// weights summing to 1/2.
pub fn triangle_quadrature(order: i32) -> Result<TriangleRule> {
    if !(1..=MAX_TRIANGLE_ORDER).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    match order {
        1 => Ok(QuadratureRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
            order: 1,
        }),
        2 => Ok(QuadratureRule {
            points: vec![
                [1.0 / 6.0, 1.0 / 6.0],
                [2.0 / 3.0, 1.0 / 6.0],
                [1.0 / 6.0, 2.0 / 3.0],
            ],
            weights: vec![1.0 / 6.0; 3],
            order: 2,
        }),
        _ => {
            // Collapsed (Duffy) tensor Gauss rule.
            let n = (order as usize + 3) / 2;
            let (x, w) = gauss_legendre(n);
            let mut points = Vec::with_capacity(n * n);
            let mut weights = Vec::with_capacity(n * n);
            for (xi, wi) in x.iter().zip(&w) {
                let u = 0.5 * (xi + 1.0);
                for (xj, wj) in x.iter().zip(&w) {
                    let v = 0.5 * (xj + 1.0);
                    points.push([u, v * (1.0 - u)]);
                    weights.push(0.25 * wi * wj * (1.0 - u));
                }
            }
            Ok(QuadratureRule {
                points,
                weights,
                order: order as usize,
            })
        }
    }
}

/// Applies `rule` on each of the `m * m` congruent sub-triangles of a uniform
/// split of the reference triangle.
pub fn subdivide_triangle_rule(rule: &TriangleRule, m: usize) -> TriangleRule {
    if m <= 1 {
        return rule.clone();
    }
    let h = 1.0 / m as f64;
    let scale = h * h;
    let mut points = Vec::with_capacity(rule.len() * m * m);
    let mut weights = Vec::with_capacity(rule.len() * m * m);
    for i in 0..m {
        for j in 0..m - i {
            let o = [i as f64 * h, j as f64 * h];
            for (p, w) in rule.iter() {
                points.push([o[0] + h * p[0], o[1] + h * p[1]]);
                weights.push(w * scale);
            }
            if i + j + 1 < m {
                // Downward triangle with vertices o + h(1,0), o + h(0,1), o + h(1,1).
                for (p, w) in rule.iter() {
                    points.push([o[0] + h * (1.0 - p[1]), o[1] + h * (1.0 - p[0])]);
                    weights.push(w * scale);
                }
            }
        }
    }
    QuadratureRule {
        points,
        weights,
        order: rule.order,
    }
}

/// Sub-split count for a triangle of diameter `diam` under a coefficient
/// oscillating with period `eps`.
pub fn oscillation_split(diam: f64, eps: Option<f64>) -> usize {
    match eps {
        Some(e) if e > 0.0 => ((3.0 * diam / e).ceil() as usize).clamp(1, 8),
        _ => 1,
    }
}

/// Rule of the given order mapped onto the triangle `v`, sub-split when the
/// coefficient oscillates on scale `eps`.
pub fn physical_triangle_rule(v: &[Point; 3], order: i32, eps: Option<f64>) -> Result<Vec<(Point, f64)>> {
    mapped_triangle_rule(v, order, oscillation_split(triangle_diameter(v), eps))
}

/// Rule of the given order on each of `split * split` sub-triangles of `v`.
pub fn mapped_triangle_rule(v: &[Point; 3], order: i32, split: usize) -> Result<Vec<(Point, f64)>> {
    let rule = subdivide_triangle_rule(&triangle_quadrature(order)?, split);
    let e1 = [v[1][0] - v[0][0], v[1][1] - v[0][1]];
    let e2 = [v[2][0] - v[0][0], v[2][1] - v[0][1]];
    let jac = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    Ok(rule
        .iter()
        .map(|(p, w)| {
            (
                [v[0][0] + p[0] * e1[0] + p[1] * e2[0], v[0][1] + p[0] * e1[1] + p[1] * e2[1]],
                w * jac,
            )
        })
        .collect())
}

/// Composite rule on `[0, 1]` with `pieces` equal panels.
pub fn composite_segment_rule(rule: &SegmentRule, pieces: usize) -> SegmentRule {
    if pieces <= 1 {
        return rule.clone();
    }
    let h = 1.0 / pieces as f64;
    let mut points = Vec::with_capacity(rule.len() * pieces);
    let mut weights = Vec::with_capacity(rule.len() * pieces);
    for p in 0..pieces {
        for (x, w) in rule.iter() {
            points.push((p as f64 + x) * h);
            weights.push(w * h);
        }
    }
    QuadratureRule {
        points,
        weights,
        order: rule.order,
    }
}
