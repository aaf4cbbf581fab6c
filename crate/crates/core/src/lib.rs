//! Stationary factorial and raw moments of the number of customers in an
//! M/M/∞ queue whose arrival rate and service speed are modulated by a
//! finite-state semi-Markov environment.
//!
//! The analytic path lives in [`moments`]: per-order matrix recursions for
//! the moments of the random Poisson intensity of the customer count, which
//! are exactly its factorial moments. [`closedform`] gives explicit
//! two-state formulas and [`sim`] a discrete-event simulator, both used to
//! cross-check the recursion. [`cli`] holds the model-file schema and the
//! command implementations behind the `mminf` binary.

// `!(x <= limit)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod closedform;
pub mod environment;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod moments;
pub mod sim;

pub use environment::{
    chain_statics, ChainStatics, EnvironmentModel, SojournDistribution, StateParams,
};
pub use error::{Error, Result};
pub use moments::{MomentTable, Weighting};
