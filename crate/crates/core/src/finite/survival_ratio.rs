use super::{qsd_spectral, FiniteAbsorbedChain, SpectralData};
use crate::error::{Error, Result};
use crate::measure::Measure;

/// `inf_t P_pi(t < tau) / sup_z P_z(t < tau)`, resolved as the minimum of a
/// finite grid and the long-time limit `pi(eta) / max eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalRatio {
    pub value: f64,
    pub grid_min: f64,
    pub argmin_t: u64,
    /// `None` when the chain is not primitive.
    pub limit: Option<f64>,
    /// Whether the ratio never increased over the grid.
    pub nonincreasing: bool,
}

pub fn survival_ratio(chain: &FiniteAbsorbedChain, pi: &Measure, horizon: u64) -> Result<SurvivalRatio> {
    let spectral = match qsd_spectral(chain) {
        Ok(s) => Some(s),
        Err(Error::NotPrimitive) => None,
        Err(e) => return Err(e),
    };
    survival_ratio_with(chain, spectral.as_ref(), pi, horizon)
}

/// Same as [`survival_ratio`], reusing precomputed spectral data.
pub fn survival_ratio_with(
    chain: &FiniteAbsorbedChain,
    spectral: Option<&SpectralData>,
    pi: &Measure,
    horizon: u64,
) -> Result<SurvivalRatio> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least one step".into()));
    }
    if pi.len() != chain.n() {
        return Err(Error::SupportMismatch);
    }
    let ratios = ratio_series(chain, pi.weights(), horizon);
    let (argmin_t, grid_min) = ratios
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (t, &r)| if r < acc.1 { (t as u64, r) } else { acc });
    let nonincreasing = ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let limit = spectral.map(|s| pi.integrate(s.eta.as_slice()));
    let value = limit.map_or(grid_min, |l| grid_min.min(l));
    Ok(SurvivalRatio { value, grid_min, argmin_t, limit, nonincreasing })
}

/// `c_t(pi) = pi(s_t) / max s_t` for `t = 0..=horizon`, with `s_t = Q^t 1`
/// carried normalised by its maximum so it never underflows.
pub(crate) fn ratio_series(chain: &FiniteAbsorbedChain, pi: &[f64], horizon: u64) -> Vec<f64> {
    let q = chain.kernel();
    let mut s = nalgebra::DVector::from_element(chain.n(), 1.0);
    let mut out = Vec::with_capacity(horizon as usize + 1);
    for t in 0..=horizon {
        if t > 0 {
            s = q * &s;
            let m = s.max();
            s /= m;
        }
        out.push(pi.iter().zip(s.iter()).map(|(p, v)| p * v).sum());
    }
    out
}
