use super::FiniteAbsorbedChain;
use crate::error::{Error, Result};
use crate::measure::Measure;

/// Witness of `c^-1 f(x) mu(y) <= (Q^t0)_{xy} <= c f(x) mu(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedCertificate {
    pub t0: u64,
    pub c: f64,
    pub f: Vec<f64>,
    pub mu: Measure,
    /// Minorization constant `c^-2`.
    pub c1: f64,
    /// Survival-comparison constant `c^-3 mu(f)`.
    pub c2: f64,
}

impl TwoSidedCertificate {
    pub fn mu_f(&self) -> f64 {
        self.mu.integrate(&self.f)
    }

    /// `1 - c^-5 mu(f)`: contraction per `t0` steps.
    pub fn rate_factor(&self) -> f64 {
        1.0 - self.c1 * self.c2
    }

    /// Largest relative violation of the two-sided estimate, zero when it holds.
    pub fn max_violation(&self, power: &nalgebra::DMatrix<f64>) -> f64 {
        let n = self.f.len();
        let mu = self.mu.weights();
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                let scale = self.f[x] * mu[y];
                let v = power[(x, y)];
                worst = worst.max((scale / self.c - v) / scale).max((v - self.c * scale) / scale);
            }
        }
        worst
    }
}

/// Fits a two-sided estimate at `t0`.
///
/// `mu` is the normalised column-sum profile of `Q^t0`. For fixed `mu` the
/// optimal `f` and `c` are closed-form per row: with `r_x(y) = Q^t0_{xy}/mu(y)`,
/// `f(x) = sqrt(max r_x * min r_x)` and `c = max_x sqrt(max r_x / min r_x)`,
/// so the returned `c` is the smallest possible for this `mu`.
pub fn fit_two_sided(chain: &FiniteAbsorbedChain, t0: u64) -> Result<TwoSidedCertificate> {
    if t0 == 0 {
        return Err(Error::InvalidArgument("t0 must be at least one step".into()));
    }
    let p = chain.power(t0);
    let n = chain.n();
    for x in 0..n {
        for y in 0..n {
            if !(p[(x, y)] > 0.0) {
                return Err(Error::NoCertificate { t0, row: x, col: y });
            }
        }
    }
    let col: Vec<f64> = (0..n).map(|y| p.column(y).sum()).collect();
    let total: f64 = col.iter().sum();
    let mu: Vec<f64> = col.iter().map(|v| v / total).collect();

    let mut f = Vec::with_capacity(n);
    let mut c = 1.0f64;
    for x in 0..n {
        let (lo, hi) = (0..n)
            .map(|y| p[(x, y)] / mu[y])
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
        f.push((lo * hi).sqrt());
        c = c.max((hi / lo).sqrt());
    }
    // mu is already a probability, and c^-1 f(x) <= sum_y Q^t0_{xy} <= 1
    // forces ||f||_inf <= c.
    let mu = Measure::distribution(mu)?;
    let mu_f = mu.integrate(&f);
    let cert = TwoSidedCertificate { t0, c, c1: c.powi(-2), c2: c.powi(-3) * mu_f, f, mu };
    let violation = cert.max_violation(&p);
    if violation > 1e-10 {
        return Err(Error::InvalidChain(format!("fitted certificate violated by {violation:e}")));
    }
    Ok(cert)
}
