//! Euler-Maruyama simulation of diffusions killed at the boundary of a
//! bounded Euclidean domain.

pub(crate) mod domain;
mod estimate;
mod model;
mod path;

pub use domain::Domain;
pub use estimate::{
    hitting_before, staged_survival, survival_curve, survival_curve_from_cloud, survival_probability, terminal_positions, tube_probability,
    Estimate, McConfig, StagedSurvival,
};
pub(crate) use estimate::par_paths;
pub use model::{DiffusionModel, Diffusion, Drift, ModelBounds};
pub(crate) use path::aux_rng;
pub use path::{simulate_path, steps_for, AbsorbedPath, PathConfig, PathRng, Stepper, TargetSet};
