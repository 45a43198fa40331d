use serde::Serialize;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Numerical(#[from] pnmc_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    /// Stable machine-readable name of the failure.
    pub fn kind(&self) -> &'static str {
        use pnmc_core::Error as E;
        match self {
            CliError::Validation(_) => "invalid_config",
            CliError::Io { .. } => "io",
            CliError::Numerical(e) => match e {
                E::DegenerateSpan { .. } => "degenerate_span",
                E::LightlikeStep { .. } => "lightlike_step",
                E::OutOfDomain { .. } => "out_of_domain",
                E::NotSpacelike { .. } => "not_spacelike",
                E::DegenerateMetric { .. } => "degenerate_metric",
                E::NotNormal { .. } => "not_normal",
                E::MinimalPoint { .. } => "minimal_point",
                E::LightlikeMeanCurvature => "lightlike_mean_curvature",
                E::FrameDegenerate { .. } => "frame_degenerate",
                E::FrameFlip { .. } => "frame_flip",
                E::NotOrthogonal { .. } => "not_orthogonal",
                E::NotSeparable { .. } => "not_separable",
                E::QuadratureFailure { .. } => "quadrature_failure",
                E::NonMonotone { .. } => "non_monotone",
                E::DomainViolation(_) => "domain_violation",
                E::GridTooSmall { .. } => "grid_too_small",
                E::MuVanishes => "mu_vanishes",
                E::DriftExceeded { .. } => "drift_exceeded",
                E::ShapeMismatch(_) => "shape_mismatch",
                E::InvalidInput(_) => "invalid_input",
            },
        }
    }

    pub fn to_json(&self) -> String {
        let r = ErrorReport { error: self.kind(), message: self.to_string(), exit_code: self.exit_code() };
        serde_json::to_string(&r).expect("error report serializes")
    }
}
