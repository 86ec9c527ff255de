use rand::Rng;

use super::ProbeGrid;
use crate::diffusion::{aux_rng, survival_curve, survival_curve_from_cloud, DiffusionModel, Estimate};
use crate::error::{Error, Result};
use crate::finite::{survival_ratio, FiniteAbsorbedChain};
use crate::measure::{BinGrid, Measure, Support};
use crate::particle::conditional_rejection;

/// Largest common part of a family of probability vectors: `m = min_x h_x`
/// binwise, `c1 = sum m`, `nu = m / c1`.
pub fn minorize(laws: &[&[f64]]) -> Result<(f64, Vec<f64>)> {
    let first = laws.first().ok_or(Error::InvalidArgument("no laws to minorize".into()))?;
    let mut m = first.to_vec();
    for law in &laws[1..] {
        if law.len() != m.len() {
            return Err(Error::SupportMismatch);
        }
        for (a, b) in m.iter_mut().zip(law.iter()) {
            *a = a.min(*b);
        }
    }
    let c1: f64 = m.iter().sum();
    if !(c1 > 0.0) {
        return Err(Error::NoMinorization);
    }
    Ok((c1, m.iter().map(|v| v / c1).collect()))
}

/// Minorization estimate at `t0`: the conditioned laws from every probe
/// point dominate `c1 * nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorizationEstimate {
    pub t0: f64,
    pub c1: f64,
    pub nu: Measure,
    /// Conditioned histograms, one per probe point.
    pub laws: Vec<Measure>,
}

pub fn estimate_a1(model: &DiffusionModel, grid: &ProbeGrid, t0: f64, bins: &BinGrid) -> Result<MinorizationEstimate> {
    let mut laws = Vec::with_capacity(grid.points.len());
    for (i, x) in grid.points.iter().enumerate() {
        let sample = conditional_rejection(model, x, t0, bins, &grid.probe_mc(i as u64))?;
        laws.push(sample.histogram.measure()?);
    }
    let refs: Vec<&[f64]> = laws.iter().map(|m| m.weights()).collect();
    let (c1, nu) = minorize(&refs)?;
    Ok(MinorizationEstimate { t0, c1, nu: Measure::new(Support::Bins(bins.clone()), nu)?, laws })
}

/// Same construction on a finite chain, exact: the conditioned rows of `Q^t0`
/// at the given states.
pub fn estimate_a1_chain(chain: &FiniteAbsorbedChain, states: &[usize], t0: u64) -> Result<MinorizationEstimate> {
    if states.is_empty() || states.iter().any(|&s| s >= chain.n()) {
        return Err(Error::InvalidArgument("states must be a nonempty list of valid states".into()));
    }
    let p = chain.power(t0);
    let laws: Vec<Measure> = states.iter().map(|&x| FiniteAbsorbedChain::conditioned_row(&p, x)).collect();
    let refs: Vec<&[f64]> = laws.iter().map(|m| m.weights()).collect();
    let (c1, nu) = minorize(&refs)?;
    Ok(MinorizationEstimate { t0: t0 as f64 * chain.dt(), c1, nu: Measure::on_states(nu)?, laws })
}

/// Survival comparison `P_nu(t < tau) >= c2 P_z(t < tau)` over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalComparison {
    pub c2: f64,
    /// Lower confidence end of the numerator over the upper end of the denominator.
    pub c2_conservative: f64,
    pub argmin_t: f64,
    pub numerator: Vec<Estimate>,
    pub denominator: Vec<Estimate>,
}

/// Confidence multiplier used for conservative ends.
pub const CI_Z: f64 = 1.96;

/// Draws `n` start points from a histogram measure: a bin by its weight, then
/// a uniform point inside it (retried until it falls in the open domain).
pub fn sample_histogram(nu: &Measure, model: &DiffusionModel, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let Support::Bins(grid) = nu.support() else {
        return Err(Error::InvalidArgument("expected a histogram measure".into()));
    };
    let mut rng = aux_rng(seed, 2);
    let cdf: Vec<f64> = nu
        .weights()
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let total = *cdf.last().unwrap_or(&0.0);
    let mut out = Vec::with_capacity(n);
    let mut tries = 0usize;
    while out.len() < n {
        tries += 1;
        if tries > 1000 * n + 1000 {
            return Err(Error::InvalidArgument("histogram mass lies outside the domain".into()));
        }
        let u = rng.random::<f64>() * total;
        let b = cdf.partition_point(|c| *c <= u).min(cdf.len() - 1);
        let (lo, hi) = grid.bounds(b);
        let p: Vec<f64> = lo.iter().zip(&hi).map(|(a, c)| a + (c - a) * rng.random::<f64>()).collect();
        if model.domain().contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Monte Carlo survival comparison: the numerator starts every path from a
/// fresh draw of `nu`; the denominator is the largest survival over the probe
/// points at each time.
pub fn estimate_a2(model: &DiffusionModel, nu: &Measure, grid: &ProbeGrid) -> Result<SurvivalComparison> {
    let times: Vec<f64> = grid.times.iter().cloned().filter(|t| *t > 0.0).collect();
    if times.is_empty() {
        return Err(Error::InvalidArgument("survival comparison needs positive times".into()));
    }
    let starts = sample_histogram(nu, model, grid.mc.paths as usize, grid.mc.seed)?;
    let numerator = survival_curve_from_cloud(model, &starts, &times, &grid.probe_mc(u64::MAX >> 2))?;
    let mut denominator: Vec<Estimate> = vec![Estimate { value: 0.0, se: 0.0, n: 0 }; times.len()];
    for (i, z) in grid.points.iter().enumerate() {
        let curve = survival_curve(model, z, &times, &grid.probe_mc(i as u64))?;
        for (d, e) in denominator.iter_mut().zip(curve) {
            if e.value > d.value {
                *d = e;
            }
        }
    }
    let mut best = (f64::INFINITY, f64::INFINITY, 0.0);
    for ((num, den), &t) in numerator.iter().zip(&denominator).zip(&times) {
        if num.value == 0.0 {
            return Err(Error::FailedA2 { t });
        }
        let ratio = num.value / den.value;
        let conservative = (num.wilson_lower(CI_Z) / den.wilson_upper(CI_Z)).min(1.0);
        if ratio < best.0 {
            best.0 = ratio;
            best.2 = t;
        }
        best.1 = best.1.min(conservative);
    }
    Ok(SurvivalComparison {
        c2: best.0.min(1.0),
        c2_conservative: best.1,
        argmin_t: best.2,
        numerator,
        denominator,
    })
}

/// Exact survival comparison on a chain over `0..=horizon`, against the
/// largest survival among `states`. With every state listed, the grid
/// minimum is also floored by the long-time limit.
pub fn estimate_a2_chain(chain: &FiniteAbsorbedChain, nu: &Measure, states: &[usize], horizon: u64) -> Result<f64> {
    if nu.len() != chain.n() {
        return Err(Error::SupportMismatch);
    }
    if states.len() == chain.n() {
        return Ok(survival_ratio(chain, nu, horizon)?.value);
    }
    let q = chain.kernel();
    let mut s = nalgebra::DVector::from_element(chain.n(), 1.0);
    let mut best = 1.0f64;
    for _ in 0..horizon {
        s = q * &s;
        let m = states.iter().map(|&z| s[z]).fold(0.0, f64::max);
        let num: f64 = nu.weights().iter().zip(s.iter()).map(|(w, v)| w * v).sum();
        best = best.min(num / m);
        s /= m;
    }
    Ok(best)
}

/// Estimated constants of the minorization condition at one `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionACertificate {
    pub t0: f64,
    pub c1: f64,
    pub nu: Measure,
    pub c2: f64,
    pub c2_conservative: f64,
}

impl ConditionACertificate {
    /// `-ln(1 - c1 c2) / t0`.
    pub fn rate(&self) -> f64 {
        -(1.0 - self.c1 * self.c2).ln() / self.t0
    }

    pub fn conservative_rate(&self) -> f64 {
        -(1.0 - self.c1 * self.c2_conservative).ln() / self.t0
    }
}

/// Exact certificate on a chain: minorization over all states at `t0`
/// steps, survival comparison over `0..=horizon` and its limit.
pub fn certify_condition_a_chain(chain: &FiniteAbsorbedChain, t0: u64, horizon: u64) -> Result<ConditionACertificate> {
    let states: Vec<usize> = (0..chain.n()).collect();
    let a1 = estimate_a1_chain(chain, &states, t0)?;
    let c2 = estimate_a2_chain(chain, &a1.nu, &states, horizon)?;
    Ok(ConditionACertificate { t0: a1.t0, c1: a1.c1, nu: a1.nu, c2, c2_conservative: c2 })
}

/// Scans `t0_grid` and keeps the certificate with the largest `c1 c2`.
pub fn certify_condition_a(
    model: &DiffusionModel,
    grid: &ProbeGrid,
    t0_grid: &[f64],
    bins: &BinGrid,
) -> Result<(ConditionACertificate, Vec<ConditionACertificate>)> {
    let mut scan = Vec::new();
    for &t0 in t0_grid {
        let a1 = match estimate_a1(model, grid, t0, bins) {
            Ok(a) => a,
            Err(Error::NoMinorization) | Err(Error::ZeroSurvivors { .. }) => continue,
            Err(e) => return Err(e),
        };
        let a2 = estimate_a2(model, &a1.nu, grid)?;
        scan.push(ConditionACertificate {
            t0,
            c1: a1.c1,
            nu: a1.nu,
            c2: a2.c2,
            c2_conservative: a2.c2_conservative,
        });
    }
    let best = scan
        .iter()
        .max_by(|a, b| (a.c1 * a.c2).total_cmp(&(b.c1 * b.c2)))
        .cloned()
        .ok_or(Error::NoMinorization)?;
    Ok((best, scan))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{Domain, McConfig};
    use crate::finite::infimum_measure;

    #[test]
    fn minorize_examples() {
        let h = [0.2, 0.3, 0.5];
        let (c1, nu) = minorize(&[&h, &h]).unwrap();
        assert!((c1 - 1.0).abs() < 1e-15);
        assert_eq!(nu, h.to_vec());
        assert_eq!(minorize(&[&[1.0, 0.0][..], &[0.0, 1.0][..]]), Err(Error::NoMinorization));
    }

    #[test]
    fn chain_path_matches_exact_rows() {
        let c = FiniteAbsorbedChain::from_rows(&[
            vec![0.3, 0.2, 0.1],
            vec![0.1, 0.5, 0.2],
            vec![0.25, 0.25, 0.3],
        ])
        .unwrap();
        let est = estimate_a1_chain(&c, &[0, 1], 2).unwrap();
        let p = c.power(2);
        let r0: Vec<f64> = (0..3).map(|y| p[(0, y)] / p.row(0).sum()).collect();
        let r1: Vec<f64> = (0..3).map(|y| p[(1, y)] / p.row(1).sum()).collect();
        let m: Vec<f64> = r0.iter().zip(&r1).map(|(a, b)| a.min(*b)).collect();
        let c1: f64 = m.iter().sum();
        assert!((est.c1 - c1).abs() < 1e-12);
        for (a, b) in est.nu.weights().iter().zip(&m) {
            assert!((a - b / c1).abs() < 1e-12);
        }
        // unconditioned infimum differs from the conditioned one only by row masses
        assert!(infimum_measure(&c, 0, 1, 2).unwrap().mass() <= 1.0);
    }

    #[test]
    fn self_ratio_is_one() {
        let c = FiniteAbsorbedChain::from_rows(&[vec![0.3, 0.2], vec![0.1, 0.6]]).unwrap();
        assert_eq!(estimate_a2_chain(&c, &Measure::dirac(2, 1), &[1], 20).unwrap(), 1.0);
        let exact = survival_ratio(&c, &Measure::uniform(2), 30).unwrap().value;
        assert!((estimate_a2_chain(&c, &Measure::uniform(2), &[0, 1], 30).unwrap() - exact).abs() < 1e-12);
    }

    #[test]
    fn diffusion_self_ratio() {
        let m = DiffusionModel::brownian(Domain::interval(0.0, 1.0).unwrap(), 1.0).unwrap();
        let bins = BinGrid::uniform_1d(0.0, 1.0, 1000).unwrap();
        let mc = McConfig::new(400, 3, 1e-3);
        let g = ProbeGrid::new(m.domain(), vec![vec![0.5]], vec![0.05, 0.1], vec![], mc).unwrap();
        // a narrow bin around the single probe point
        let mut w = vec![0.0; 1000];
        w[500] = 1.0;
        let nu = Measure::new(Support::Bins(bins), w).unwrap();
        let a2 = estimate_a2(&m, &nu, &g).unwrap();
        assert!((a2.c2 - 1.0).abs() < 0.1, "{a2:?}");
        assert!(a2.c2_conservative <= a2.c2);
    }
}
