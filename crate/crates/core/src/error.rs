use thiserror::Error;

/// Errors raised by the simulation and oracle routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A potential was requested at a point whose dependence zone is not covered
    /// by the configuration window.
    #[error(
        "window too small: point at distance {distance:.6} from the origin needs a window of radius \
         {required:.6}, configuration only covers {window:.6}"
    )]
    WindowTooSmall {
        distance: f64,
        required: f64,
        window: f64,
    },

    #[error("Born series diverged after {terms} terms (term-norm ratio {ratio:.4})")]
    BornDivergence { terms: usize, ratio: f64 },

    #[error("contour error: {0}")]
    Contour(String),

    #[error("radius {r:.6} lies outside the eigenfunction grid (max {max:.6})")]
    Extrapolation { r: f64, max: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
