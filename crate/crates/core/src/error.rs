use thiserror::Error;

/// Errors raised by mesh construction, discretization and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("nesting violated: n_fine = {n_fine} is not divisible by n_seg = {n_seg}")]
    Nesting { n_fine: usize, n_seg: usize },

    #[error("unsupported quadrature order {0}")]
    UnsupportedOrder(i32),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("coefficient is not positive ({value}) at ({x}, {y})")]
    NonPositiveCoefficient { value: f64, x: f64, y: f64 },

    #[error("singular {0} system")]
    Singular(&'static str),

    #[error("tau policy {policy} cannot be realized: element {element} of subdomain {subdomain} owns {count} skeleton faces")]
    TauPolicy {
        policy: &'static str,
        subdomain: usize,
        element: usize,
        count: usize,
    },

    #[error("element {element} of subdomain {subdomain} has zero stabilization on every face")]
    NoStabilizedFace { subdomain: usize, element: usize },

    #[error("missing trace basis for skeleton segment {0}")]
    MissingTraceBasis(usize),

    #[error("trace basis mismatch on skeleton segment {0}")]
    TraceBasisMismatch(usize),

    #[error("coarse system not SPD: {0}")]
    NotSpd(String),

    #[error("degenerate sampling: {samples} samples for {candidates} candidate functions")]
    DegenerateSampling { samples: usize, candidates: usize },

    #[error("fine grid does not resolve the oscillation: h = {h} > eps/2 = {half_eps}")]
    Underresolved { h: f64, half_eps: f64 },

    #[error("problem '{0}' has no exact solution")]
    MissingExactSolution(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
