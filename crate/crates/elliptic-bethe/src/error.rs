//! Crate-wide error type.

use num_complex::Complex64 as C64;

/// Errors reported by evaluation, solving and I/O routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A modular or coupling parameter is outside its admissible domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An evaluation point contained a NaN or infinity.
    #[error("non-finite argument {0}")]
    NonFiniteArgument(C64),

    /// A theta function in a denominator is too close to one of its zeros.
    #[error("theta denominator at {arg} is within {tol:e} of a zero")]
    PoleProximity { arg: C64, tol: f64 },

    /// Derivative order outside the supported range.
    #[error("unsupported derivative order {0} (supported: 0, 1, 2)")]
    UnsupportedOrder(u32),

    /// Theta characteristic index outside {0, 1}.
    #[error("unsupported theta characteristic {0} (supported: 0, 1)")]
    UnsupportedCharacteristic(u32),

    /// Two heights that must differ by +-1 do not.
    #[error("height pair ({0}, {1}) is not admissible: levels must differ by exactly 1")]
    HeightsNotAdjacent(i64, i64),

    /// A cyclic height sequence breaks the +-1 adjacency rule.
    #[error("height path is not admissible at step {0}")]
    PathNotAdmissible(usize),

    /// Inhomogeneities or Bethe roots collide modulo the period lattice.
    #[error("points {0} and {1} coincide modulo the period lattice")]
    CoincidentPoints(C64, C64),

    /// Dimension or length mismatch between related inputs.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Newton iteration did not reach the requested tolerance.
    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        /// Max-norm residual recorded at each iteration.
        trace: Vec<f64>,
    },

    /// The Jacobian became numerically singular during Newton iteration.
    #[error("singular Jacobian at iteration {0}")]
    SingularJacobian(usize),

    /// The anisotropy eta is not of the rational form required here.
    #[error("operation requires eta = p/q with c in i*pi*Z: {0}")]
    EtaNotRational(String),

    /// A computed object vanished to working precision (e.g. a linear
    /// functional annihilated the vector it was applied to).
    #[error("degenerate result: {0}")]
    Degenerate(String),

    /// Malformed run configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
