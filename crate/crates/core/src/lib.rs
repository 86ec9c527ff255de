//! Quasi-stationary distributions of absorbed Markov processes: exact tools for
//! finite chains, Monte Carlo tools for killed diffusions, and checkers for
//! the constants that control convergence of conditioned laws.

pub mod certificates;
pub mod diffusion;
pub mod error;
pub mod finite;
pub mod measure;
pub mod particle;
pub mod report;
pub mod scale1d;
pub mod space;

pub use error::{Error, Result};
pub use measure::{lipschitz_constant, tv_distance, BinGrid, Measure, Support};
pub use report::{Check, Relation, VerificationReport};
pub use space::{Point, SpaceKind, StateSpace};
