use thiserror::Error;

use crate::environment::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong between reading a model and printing moments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model:\n{0}")]
    InvalidModel(ValidationReport),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("state {state} has positive arrival rate but zero speed (infinite offered load)")]
    InfiniteLoad { state: usize },

    #[error("stationary balance system is singular (condition estimate {condition:.3e})")]
    SingularChain { condition: f64 },

    #[error(
        "Laplace transform of state {state} underflows at order {order} (argument {argument:.3e})"
    )]
    TransformOverflow {
        state: usize,
        order: usize,
        argument: f64,
    },

    #[error(
        "ill-conditioned system at order {order}: residual {residual:.3e}, condition estimate {condition:.3e}"
    )]
    IllConditioned {
        order: usize,
        residual: f64,
        condition: f64,
    },

    #[error("negative moment {value:.6e} at order {order}, state {state}: numerical breakdown")]
    NegativeMoment {
        order: usize,
        state: usize,
        value: f64,
    },

    #[error("order {requested} exceeds the supported maximum {max}")]
    OrderTooLarge { requested: usize, max: usize },

    #[error("degenerate two-state model: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid simulation config: {0}")]
    Config(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("cannot parse model file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by bad input rather than by arithmetic.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidModel(_)
                | Error::Parse(_)
                | Error::Io(_)
                | Error::Config(_)
                | Error::Domain(_)
                | Error::InfiniteLoad { .. }
                | Error::OrderTooLarge { .. }
                | Error::Unsupported(_)
        )
    }
}
