use thiserror::Error;

/// Errors raised by the geometric and numerical kernels.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("vectors are linearly dependent (step {step})")]
    DegenerateSpan { step: usize },
    #[error("cannot normalize a lightlike vector (step {step})")]
    LightlikeStep { step: usize },
    #[error("point ({u}, {v}) with stencil reach {reach} leaves the parameter domain")]
    OutOfDomain { u: f64, v: f64, reach: f64 },
    #[error("tangent plane is not spacelike (E = {e}, EG - F^2 = {det})")]
    NotSpacelike { e: f64, det: f64 },
    #[error("first fundamental form is degenerate (EG - F^2 = {det})")]
    DegenerateMetric { det: f64 },
    #[error("vector is not normal to the surface (tangential defect {defect:e})")]
    NotNormal { defect: f64 },
    #[error("minimal point: |H| = {norm:e}")]
    MinimalPoint { norm: f64 },
    #[error("mean curvature vector is lightlike")]
    LightlikeMeanCurvature,
    #[error("geometric frame is undetermined: |mu| = {mu:e}")]
    FrameDegenerate { mu: f64 },
    #[error("frame field flips across the stencil (alignment score {score})")]
    FrameFlip { score: f64 },
    #[error("parameters are not orthogonal: |F| / sqrt(EG) = {ratio:e}")]
    NotOrthogonal { ratio: f64 },
    #[error("metric factors are not separable: relative error {error:e}")]
    NotSeparable { error: f64 },
    #[error("adaptive quadrature failed on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },
    #[error("chart is not monotone near {at}")]
    NonMonotone { at: f64 },
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("grid too small: {n_u} x {n_v} (need at least 3 x 3)")]
    GridTooSmall { n_u: usize, n_v: usize },
    #[error("mu vanishes at every grid point")]
    MuVanishes,
    #[error("drift {drift:e} exceeds bound {bound:e}")]
    DriftExceeded { drift: f64, bound: f64 },
    #[error("grid geometry mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
