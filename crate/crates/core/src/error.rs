use thiserror::Error;

/// Errors raised by the geometry pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("vector is not unit timelike past-pointing (<u,u> = {inner}, u0 = {time})")]
    NotUnitTimelike { inner: f64, time: f64 },
    #[error("radius must be positive, got {0}")]
    NonpositiveRadius(f64),
    #[error("radial function must be positive, got {value} at ({u}, {v})")]
    NonpositiveRadialFunction { value: f64, u: f64, v: f64 },
    #[error("division by a jet with vanishing constant term")]
    DivisionByZeroJet,
    #[error("{function} is undefined at {value}")]
    DomainError { function: &'static str, value: f64 },
    #[error("derivative order {order} exceeds the jet order")]
    OrderExceeded { order: usize },
    #[error("chart is only accurate to order {available}, {required} needed")]
    InsufficientOrder { required: usize, available: usize },
    #[error("point ({u}, {v}) is not on the future lightcone (<psi,psi> = {inner}, psi0 = {time})")]
    OffCone { u: f64, v: f64, inner: f64, time: f64 },
    #[error("induced metric is not positive definite at ({u}, {v})")]
    NotSpacelike { u: f64, v: f64 },
    #[error("normal frame is singular at ({u}, {v})")]
    DegenerateNormalFrame { u: f64, v: f64 },
    #[error("Gauss map undefined: eta0 vanishes at ({u}, {v})")]
    GaussMapUndefined { u: f64, v: f64 },
    #[error("metric field is degenerate")]
    DegenerateMetric,
    #[error("eta is degenerate at ({u}, {v}): |det A_eta| = {det}")]
    DegeneracyViolation { u: f64, v: f64, det: f64 },
    #[error("II_eta is not positive definite at ({u}, {v})")]
    NotRiemannianII { u: f64, v: f64 },
    #[error("surface '{0}' is not compact")]
    NotCompact(String),
    #[error("eigen solver failed: {0}")]
    EigenSolverFailure(String),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
