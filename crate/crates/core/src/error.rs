use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes shared by every stage of the surface pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not traceless (trace = {trace:e})")]
    NotTraceless { trace: f64 },
    #[error("singular frame (|det| = {det:e})")]
    SingularFrame { det: f64 },
    #[error("elliptic modulus k = {k} outside [0, 1]")]
    ModulusOutOfRange { k: f64 },
    #[error("argument {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },
    #[error("pole of the third-kind integrand at t = {at}")]
    PoleOnPath { at: f64 },
    #[error("integrand is not finite at x = {at}")]
    SingularIntegrand { at: f64 },
    #[error("custom model violates its first integral at x = {x} (residual {residual:e})")]
    ModelInconsistent { x: f64, residual: f64 },
    #[error("u_x vanishes inside the interval, near x = {at}")]
    TurningPoint { at: f64 },
    #[error("u + lambda = {value:e} too close to zero at x = {x}")]
    SingularDenominator { x: f64, value: f64 },
    #[error("unsupported symmetry characteristic")]
    UnsupportedCharacteristic,
    #[error("discriminant g = {g:e} too close to zero")]
    DegenerateSpectrum { g: f64 },
    #[error("discriminant changes sign within [{lo}, {hi}]")]
    BranchCrossing { lo: f64, hi: f64 },
    #[error("integrator step size underflow at t = {at}")]
    StepSizeUnderflow { at: f64 },
    #[error("tangent vectors are linearly dependent (measure {measure:e})")]
    DegenerateTangents { measure: f64 },
    #[error("every grid point is masked")]
    EmptyGrid,
    #[error("invalid configuration: {0}")]
    Invalid(&'static str),
}
