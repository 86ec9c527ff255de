use nalgebra::DVector;

use super::FiniteAbsorbedChain;
use crate::error::{Error, Result};
use crate::measure::{tv_weights, Measure};

pub const POWER_TOL: f64 = 1e-13;
pub const POWER_MAX_ITER: usize = 1_000_000;
/// Largest state count for which the full spectrum is computed.
pub const DENSE_EIGEN_LIMIT: usize = 512;

/// Perron data of a primitive substochastic kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    /// Quasi-stationary distribution (left Perron vector, mass 1).
    pub alpha: Measure,
    /// Perron eigenvalue; `P_alpha(t < tau) = perron^t`.
    pub perron: f64,
    /// Decay rate `-ln(perron) / dt`.
    pub lambda0: f64,
    /// Right Perron vector, sup-norm 1.
    pub eta: Vec<f64>,
    /// Largest modulus among the other eigenvalues; `None` above
    /// [`DENSE_EIGEN_LIMIT`] states.
    pub second_modulus: Option<f64>,
    pub iterations: usize,
}

impl SpectralData {
    /// `|theta_2| / perron`, the asymptotic per-step contraction of conditioned laws.
    pub fn gap_ratio(&self) -> Option<f64> {
        self.second_modulus.map(|m| m / self.perron)
    }
}

/// Quasi-stationary distribution, decay rate and survival eigenfunction by
/// power iteration on `Q` and `Q^T`.
pub fn qsd_spectral(chain: &FiniteAbsorbedChain) -> Result<SpectralData> {
    if !chain.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    let q = chain.kernel();
    let n = chain.n();

    let mut alpha = DVector::from_element(n, 1.0 / n as f64);
    let mut it_left = 0;
    loop {
        let mut next = q.tr_mul(&alpha);
        next /= next.sum();
        let change = tv_weights(next.as_slice(), alpha.as_slice());
        alpha = next;
        it_left += 1;
        if change < POWER_TOL {
            break;
        }
        if it_left >= POWER_MAX_ITER {
            return Err(Error::IterationLimit { iterations: it_left });
        }
    }

    let mut eta = DVector::from_element(n, 1.0);
    let mut it_right = 0;
    loop {
        let mut next = q * &eta;
        next /= next.max();
        let change = (&next - &eta).amax();
        eta = next;
        it_right += 1;
        if change < POWER_TOL {
            break;
        }
        if it_right >= POWER_MAX_ITER {
            return Err(Error::IterationLimit { iterations: it_right });
        }
    }

    let perron = q.tr_mul(&alpha).sum();
    let second_modulus = (n <= DENSE_EIGEN_LIMIT).then(|| {
        let eig = q.complex_eigenvalues();
        let (skip, _) = eig
            .iter()
            .enumerate()
            .map(|(i, z)| (i, (z - nalgebra::Complex::new(perron, 0.0)).norm()))
            .fold((0, f64::INFINITY), |acc, (i, d)| if d < acc.1 { (i, d) } else { acc });
        eig.iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max)
    });

    Ok(SpectralData {
        alpha: Measure::on_states(alpha.iter().map(|v| v.max(0.0)).collect())?,
        perron,
        lambda0: -perron.ln() / chain.dt(),
        eta: eta.iter().copied().collect(),
        second_modulus,
        iterations: it_left.max(it_right),
    })
}
