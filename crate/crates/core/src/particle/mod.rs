//! Monte Carlo estimators of conditioned laws and quasi-stationary
//! distributions for killed diffusions.

mod decay;
mod fleming_viot;
mod histogram;
mod rejection;

pub use decay::{exponential_rate, lambda0_from_rebirths, lambda0_from_survival, linear_fit, RateFit};
pub use fleming_viot::{fleming_viot_run, FvConfig, FvResult, InitialLaw, RateWindow};
pub use histogram::{read_weights_csv, weights_csv, HistogramMeasure};
pub use rejection::{conditional_rejection, conditional_rejection_series, RejectionSample};
