use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{make_two_scale, CoefficientField, Point};
use crate::hdg::SourceFn;

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point) -> Point + Send + Sync>;
pub type CellCoefficient = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Registered problem ids.
pub const REGISTRY: [&str; 5] = ["poly_linear", "sine", "bubble", "laminate_eps", "unit_source"];

/// Closed-form solution `(u, q)` with `q = -alpha^{-1} grad u`.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarFn,
    pub q: VectorFn,
}

/// Periodic cell coefficient and its period.
#[derive(Clone)]
pub struct TwoScaleData {
    pub cell_id: &'static str,
    pub cell: CellCoefficient,
    pub eps: f64,
}

/// A model problem on the unit square with homogeneous Dirichlet data.
#[derive(Clone)]
pub struct ProblemSpec {
    pub id: String,
    pub alpha: CoefficientField,
    pub source: ScalarFn,
    pub exact: Option<ExactSolution>,
    pub two_scale: Option<TwoScaleData>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("id", &self.id)
            .field("alpha", &self.alpha)
            .field("exact", &self.exact.is_some())
            .field("eps", &self.two_scale.as_ref().map(|t| t.eps))
            .finish()
    }
}

impl ProblemSpec {
    pub fn source_fn(&self) -> &SourceFn {
        &*self.source
    }
}

/// Laminate cell `{1, 4}` layered across `y_1`.
pub fn laminate_cell(y: Point) -> f64 {
    if y[0].rem_euclid(1.0) < 0.5 {
        1.0
    } else {
        4.0
    }
}

fn bubble(x: Point) -> (f64, Point, f64) {
    let (a, b) = (x[0] * (1.0 - x[0]), x[1] * (1.0 - x[1]));
    let grad = [(1.0 - 2.0 * x[0]) * b, a * (1.0 - 2.0 * x[1])];
    (a * b, grad, -2.0 * (a + b))
}

/// Builds a registered problem. `alpha` is the constant coefficient of the
/// smooth problems; `eps` the period of the two-scale one.
pub fn problem(id: &str, alpha: f64, eps: Option<f64>) -> Result<ProblemSpec> {
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveCoefficient { value: alpha, x: 0.0, y: 0.0 });
    }
    let inv = 1.0 / alpha;
    let smooth = |u: ScalarFn, grad: VectorFn, lap: ScalarFn| ProblemSpec {
        id: id.to_string(),
        alpha: CoefficientField::Constant(alpha),
        source: Arc::new(move |x| -inv * lap(x)),
        exact: Some(ExactSolution {
            u,
            q: Arc::new(move |x| {
                let g = grad(x);
                [-inv * g[0], -inv * g[1]]
            }),
        }),
        two_scale: None,
    };
    match id {
        "sine" => Ok(smooth(
            Arc::new(|x| (PI * x[0]).sin() * (PI * x[1]).sin()),
            Arc::new(|x| {
                [
                    PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
                    PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
                ]
            }),
            Arc::new(|x| -2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin()),
        )),
        "bubble" => Ok(smooth(
            Arc::new(|x| bubble(x).0),
            Arc::new(|x| bubble(x).1),
            Arc::new(|x| bubble(x).2),
        )),
        // The linear profile x + 2y times the boundary bubble.
        "poly_linear" => Ok(smooth(
            Arc::new(|x| (x[0] + 2.0 * x[1]) * bubble(x).0),
            Arc::new(|x| {
                let (b, g, _) = bubble(x);
                let p = x[0] + 2.0 * x[1];
                [b + p * g[0], 2.0 * b + p * g[1]]
            }),
            Arc::new(|x| {
                let (_, g, lap) = bubble(x);
                (x[0] + 2.0 * x[1]) * lap + 2.0 * (g[0] + 2.0 * g[1])
            }),
        )),
        "unit_source" => Ok(ProblemSpec {
            id: id.to_string(),
            alpha: CoefficientField::Constant(alpha),
            source: Arc::new(|_| 1.0),
            exact: None,
            two_scale: None,
        }),
        "laminate_eps" => {
            let eps = eps.unwrap_or(1.0 / 16.0);
            let cell: CellCoefficient = Arc::new(laminate_cell);
            let c = cell.clone();
            Ok(ProblemSpec {
                id: id.to_string(),
                alpha: make_two_scale(move |_, y| c(y), eps)?,
                source: Arc::new(|_| 1.0),
                exact: None,
                two_scale: Some(TwoScaleData {
                    cell_id: "laminate",
                    cell,
                    eps,
                }),
            })
        }
        _ => Err(Error::Config(format!(
            "unknown problem id '{id}' (known: {})",
            REGISTRY.join(", ")
        ))),
    }
}
