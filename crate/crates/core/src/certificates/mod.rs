//! Monte Carlo probes of the minorization, gradient, boundary-return and
//! irreducibility hypotheses, and the bound-versus-measurement comparison
//! for decay of conditioned laws. Diffusion probes replace infima over the
//! state space by minima over a stratified grid, so their output is an
//! estimate with confidence ends rather than a proof.

mod boundary;
mod condition_a;
mod decay;
mod gradient;
mod probe;

pub use boundary::{
    boundary_return_constant, ht_profile, ht_profile_chain, irreducibility_probe, BoundaryReturn, HtProfile,
    IrreducibilityProbe, ReturnPoint,
};
pub use condition_a::{
    certify_condition_a, certify_condition_a_chain, estimate_a1, estimate_a1_chain, estimate_a2, estimate_a2_chain,
    minorize, sample_histogram, ConditionACertificate, MinorizationEstimate, SurvivalComparison, CI_Z,
};
pub use decay::{
    conditioned_tv_series, decay_report_chain, decay_report_diffusion, empirical_rate, ChainRate, DecayReport, TvSeries,
};
pub use gradient::{gradient_profile, gradient_profile_chain, survival_table, GradientProfile, SurvivalMethod};
pub use probe::{probe_seed, ProbeGrid};
