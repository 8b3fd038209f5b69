use std::fmt;
use std::sync::Arc;

use super::Point;
use crate::error::{Error, Result};

pub type PointFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type CellFn = Arc<dyn Fn(Point, Point) -> f64 + Send + Sync>;

/// Piecewise-constant values on a uniform grid of axis-aligned cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    pub origin: Point,
    pub extent: Point,
    pub nx: usize,
    pub ny: usize,
    /// Row-major values, `values[j * nx + i]` for cell `(i, j)`.
    pub values: Vec<f64>,
}

impl CellGrid {
    fn eval(&self, x: Point) -> f64 {
        let cell = |t: f64, o: f64, e: f64, n: usize| {
            (((t - o) / e * n as f64).floor().max(0.0) as usize).min(n - 1)
        };
        let i = cell(x[0], self.origin[0], self.extent[0], self.nx);
        let j = cell(x[1], self.origin[1], self.extent[1], self.ny);
        self.values[j * self.nx + i]
    }
}

/// The scalar coefficient `alpha = kappa^{-1}` of the mixed problem.
#[derive(Clone)]
pub enum CoefficientField {
    Constant(f64),
    Analytic(PointFn),
    /// `alpha(x) = cell(x, frac(x / eps))` with `cell` periodic on `[0, 1]^2`
    /// in its second argument.
    TwoScale { cell: CellFn, eps: f64 },
    PiecewiseConstant(CellGrid),
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Analytic(_) => write!(f, "Analytic"),
            Self::TwoScale { eps, .. } => write!(f, "TwoScale {{ eps: {eps} }}"),
            Self::PiecewiseConstant(g) => write!(f, "PiecewiseConstant({}x{})", g.nx, g.ny),
        }
    }
}

impl CoefficientField {
    pub fn analytic(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Self::Analytic(Arc::new(f))
    }

    pub fn eval(&self, x: Point) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Analytic(f) => f(x),
            Self::TwoScale { cell, eps } => cell(x, fast_variable(x, *eps)),
            Self::PiecewiseConstant(g) => g.eval(x),
        }
    }

    /// Period of the fast oscillation, if any.
    pub fn oscillation_scale(&self) -> Option<f64> {
        match self {
            Self::TwoScale { eps, .. } => Some(*eps),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }
}

/// `frac(x / eps)` componentwise.
pub fn fast_variable(x: Point, eps: f64) -> Point {
    let f = |t: f64| {
        let y = t / eps;
        y - y.floor()
    };
    [f(x[0]), f(x[1])]
}

/// Two-scale field `alpha(x, x / eps)` built from a periodic cell function.
pub fn make_two_scale(
    cell: impl Fn(Point, Point) -> f64 + Send + Sync + 'static,
    eps: f64,
) -> Result<CoefficientField> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    Ok(CoefficientField::TwoScale {
        cell: Arc::new(cell),
        eps,
    })
}
