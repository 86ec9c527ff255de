//! Exact engine for absorbed chains on finitely many states.

mod chain;
mod minorization;
pub(crate) mod spectral;
mod survival_ratio;
mod two_sided;
pub(crate) mod verify;

pub use chain::{ConditionedLaw, FiniteAbsorbedChain};
pub use minorization::{
    build_nu_xy, check_coupling_condition, coupling_tv_check, infimum_measure, CouplingConstants, CouplingMeasure,
    CouplingSetup,
};
pub use spectral::{qsd_spectral, SpectralData};
pub use survival_ratio::{survival_ratio, survival_ratio_with, SurvivalRatio};
pub use two_sided::{fit_two_sided, TwoSidedCertificate};
pub use verify::{verify_two_sided, ContractionGrid};
