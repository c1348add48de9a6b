//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhaseError {
    #[error("parameter {name} = {value} outside valid range {range}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("t = {t} outside domain (0, 1]")]
    OutOfDomain { t: f64 },
    #[error("{what} overflows f64 at t = {t}; use the log-magnitude evaluators")]
    RangeOverflow { what: &'static str, t: f64 },
    #[error("inversion target s (ln s = {ln_s}) below gamma''(1) (ln = {ln_floor})")]
    InversionBelowRange { ln_s: f64, ln_floor: f64 },
    #[error("custom phase pair fails structural audit: {reason}")]
    StructuralAudit { reason: String },
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("invalid interval [{a}, {b}]: need finite endpoints with 0 <= a < b")]
    InvalidInterval { a: f64, b: f64 },
    #[error("tolerance {tol} must be positive and finite")]
    InvalidTolerance { tol: f64 },
    #[error("invalid operator spec: {reason}")]
    InvalidSpec { reason: &'static str },
    #[error("assumption fit '{which}' unavailable or failed; run check_assumptions first")]
    MissingFit { which: &'static str },
    #[error("tolerance unreachable: truncation level {level} exceeds the dyadic grid cap")]
    ToleranceUnreachable { level: u64 },
    #[error("no curvature split for this frequency: requires k >= 2 and eta > 0")]
    NoSplit,
    #[error(transparent)]
    Phase(#[from] PhaseError),
}

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("grid dimensions {n_x} x {n_y} invalid: need powers of two >= 16")]
    BadDimensions { n_x: usize, n_y: usize },
    #[error("grid spacings h_x = {h_x}, h_y = {h_y} must be positive and finite")]
    BadSpacing { h_x: f64, h_y: f64 },
    #[error("field dimensions {got_x} x {got_y} do not match operator grid {want_x} x {want_y}")]
    DimensionMismatch {
        got_x: usize,
        got_y: usize,
        want_x: usize,
        want_y: usize,
    },
    #[error(
        "field spacing ({got_x}, {got_y}) does not match operator grid spacing ({want_x}, {want_y})"
    )]
    SpacingMismatch {
        got_x: f64,
        got_y: f64,
        want_x: f64,
        want_y: f64,
    },
    #[error("truncation epsilon = {eps} must satisfy 0 < eps < 1")]
    BadEpsilon { eps: f64 },
    #[error("spectral application requires the periodic-extension flag")]
    NotPeriodic,
    #[error("multiplier evaluation failed at (xi, eta) = ({xi}, {eta})")]
    MultiplierFailure { xi: f64, eta: f64 },
    #[error("binary field format: {reason}")]
    Format { reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Quad(#[from] QuadError),
}
