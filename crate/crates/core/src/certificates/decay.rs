use super::{ConditionACertificate, ProbeGrid};
use crate::diffusion::{survival_curve, DiffusionModel, McConfig};
use crate::error::{Error, Result};
use crate::finite::{survival_ratio, FiniteAbsorbedChain};
use crate::measure::{tv_distance, tv_weights, BinGrid, Measure};
use crate::particle::{conditional_rejection_series, linear_fit};
use crate::report::VerificationReport;

/// Rate constants `(t0, c1, c2)` for the bounds `2 (1 - c1 c2)^{floor(t/t0)}`
/// and its pairwise form; `t0` counted in steps of the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainRate {
    pub t0: u64,
    pub c1: f64,
    pub c2: f64,
}

impl ChainRate {
    pub fn factor(&self) -> f64 {
        1.0 - self.c1 * self.c2
    }

    /// `-ln(1 - c1 c2) / t0`, per step.
    pub fn rate(&self) -> f64 {
        -self.factor().ln() / self.t0 as f64
    }

    pub fn contraction(&self, t: u64) -> f64 {
        self.factor().powi((t / self.t0) as i32)
    }
}

impl From<&crate::finite::TwoSidedCertificate> for ChainRate {
    fn from(c: &crate::finite::TwoSidedCertificate) -> Self {
        Self { t0: c.t0, c1: c.c1, c2: c.c2 }
    }
}

impl From<&crate::finite::CouplingConstants> for ChainRate {
    fn from(c: &crate::finite::CouplingConstants) -> Self {
        Self { t0: c.t0, c1: c.c1, c2: c.c2 }
    }
}

/// Empirical exponential rate from a log-linear fit of the decaying part of a
/// series: points at or below `floor` are dropped, as are all points after
/// the first one dropped. `None` when fewer than two points remain, which
/// also covers series that vanish immediately.
pub fn empirical_rate(times: &[f64], values: &[f64], floor: f64) -> Option<f64> {
    let keep = values.iter().take_while(|v| **v > floor).count();
    if keep < 2 {
        return None;
    }
    let y: Vec<f64> = values[..keep].iter().map(|v| -v.ln()).collect();
    Some(linear_fit(&times[..keep], &y).1)
}

/// Output of a decay comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub times: Vec<f64>,
    /// Worst pairwise distance at each time.
    pub tv: Vec<f64>,
    pub empirical_rate: Option<f64>,
    pub certified_rate: f64,
    pub report: VerificationReport,
}

/// Exact comparison on a chain. For every pair and every `t <= horizon`
/// checks `TV(t) <= 2 (1 - c1 c2)^{floor(t/t0)}` and the pairwise contraction
/// `TV(t) <= (1 - c1 c2)^{floor(t/t0)} ||pi1 - pi2|| / max(c(pi1), c(pi2))`,
/// where `c(pi)` is the survival ratio of `pi`.
pub fn decay_report_chain(
    chain: &FiniteAbsorbedChain,
    rate: ChainRate,
    pairs: &[(Measure, Measure)],
    horizon: u64,
    tol: f64,
) -> Result<DecayReport> {
    if rate.t0 == 0 {
        return Err(Error::InvalidArgument("t0 must be at least one step".into()));
    }
    let mut uniform = Vec::new();
    let mut pairwise = Vec::new();
    let mut worst = vec![0.0f64; horizon as usize + 1];
    let ratio_horizon = horizon.max(1);
    let mut weakest_gain = f64::INFINITY;
    for (k, (p1, p2)) in pairs.iter().enumerate() {
        let a = chain.conditioned_path(p1, horizon)?;
        let b = chain.conditioned_path(p2, horizon)?;
        let initial = tv_distance(p1, p2)?;
        let c1 = survival_ratio(chain, p1, ratio_horizon)?.value;
        let c2 = survival_ratio(chain, p2, ratio_horizon)?.value;
        let denom = c1.max(c2);
        weakest_gain = weakest_gain.min(denom / c1.min(c2));
        for t in 0..=horizon {
            let d = tv_distance(&a[t as usize], &b[t as usize])?;
            worst[t as usize] = worst[t as usize].max(d);
            uniform.push((d, 2.0 * rate.contraction(t), format!("pair {k} t={t}")));
            pairwise.push((d, rate.contraction(t) * initial / denom, format!("pair {k} t={t}")));
        }
    }
    let mut report = VerificationReport::new();
    crate::finite::verify::worst_at_most(&mut report, "tv_uniform_bound", uniform, tol);
    crate::finite::verify::worst_at_most(&mut report, "tv_pairwise_contraction", pairwise, tol);
    let times: Vec<f64> = (0..=horizon).map(|t| t as f64 * chain.dt()).collect();
    let empirical = empirical_rate(&times, &worst, 1e-10);
    let certified = rate.rate() / chain.dt();
    report.info("certified_rate", certified);
    match empirical {
        Some(g) => {
            report.at_least("empirical_rate_vs_certified", g, certified, 1e-6 * certified);
        }
        None => report.note("conditioned laws merged within the first step; empirical rate not fitted"),
    }
    if weakest_gain.is_finite() {
        report.info("survival_ratio_max_over_min", weakest_gain);
    }
    Ok(DecayReport { times, tv: worst, empirical_rate: empirical, certified_rate: certified, report })
}

/// Distance between the conditioned laws from two start points, with a
/// Monte Carlo tolerance of `3 sum_b sqrt(p_b (1 - p_b) / n_x + q_b (1 - q_b) / n_y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TvSeries {
    pub times: Vec<f64>,
    pub tv: Vec<f64>,
    pub tolerance: Vec<f64>,
    /// Surviving paths from each start at each time.
    pub survivors: Vec<(u64, u64)>,
}

pub fn conditioned_tv_series(
    model: &DiffusionModel,
    x: &[f64],
    y: &[f64],
    times: &[f64],
    bins: &BinGrid,
    mc: &McConfig,
) -> Result<TvSeries> {
    let a = conditional_rejection_series(model, x, times, bins, mc)?;
    let b = conditional_rejection_series(model, y, times, bins, &mc.clone().with_seed(mc.seed.wrapping_add(1)))?;
    let mut out = TvSeries { times: times.to_vec(), tv: Vec::new(), tolerance: Vec::new(), survivors: Vec::new() };
    for (ra, rb) in a.iter().zip(&b) {
        if ra.survivors == 0 || rb.survivors == 0 {
            return Err(Error::ZeroSurvivors { paths: mc.paths as usize, t: out.times[out.tv.len()] });
        }
        let (wa, wb) = (ra.histogram.weights(), rb.histogram.weights());
        let (na, nb) = (ra.survivors as f64, rb.survivors as f64);
        let spread: f64 = wa.iter().zip(&wb).map(|(p, q)| (p * (1.0 - p) / na + q * (1.0 - q) / nb).sqrt()).sum();
        out.tv.push(tv_weights(&wa, &wb));
        out.tolerance.push(3.0 * spread);
        out.survivors.push((ra.survivors, rb.survivors));
    }
    Ok(out)
}

/// Monte Carlo comparison on a diffusion. For each pair of start points the
/// conditioned laws are binned on `bins`; the uniform bound
/// `2 (1 - c1 c2)^{floor(t/t0)}` is checked within the Monte Carlo tolerance.
/// The pairwise form uses `c(delta_x)` estimated as the smallest ratio over
/// `times` of the survival from `x` to the largest survival among the probe
/// points, and reports `a = min_x c(delta_x) / rho(x)`.
pub fn decay_report_diffusion(
    model: &DiffusionModel,
    cert: &ConditionACertificate,
    pairs: &[(Vec<f64>, Vec<f64>)],
    times: &[f64],
    bins: &BinGrid,
    probes: &ProbeGrid,
) -> Result<DecayReport> {
    let factor = 1.0 - cert.c1 * cert.c2;
    let contraction = |t: f64| factor.powi((t / cert.t0 + 1e-9).floor() as i32);

    let mut sup_survival = vec![0.0f64; times.len()];
    for (i, z) in probes.points.iter().enumerate() {
        let curve = survival_curve(model, z, times, &probes.probe_mc(i as u64))?;
        for (s, e) in sup_survival.iter_mut().zip(curve) {
            *s = s.max(e.value);
        }
    }
    let mut starts: Vec<&Vec<f64>> = Vec::new();
    for (x, y) in pairs {
        for p in [x, y] {
            if !starts.contains(&p) {
                starts.push(p);
            }
        }
    }
    let mut ratio_of = Vec::with_capacity(starts.len());
    for (i, x) in starts.iter().enumerate() {
        let curve = survival_curve(model, x, times, &probes.probe_mc(1_000_000 + i as u64))?;
        for (s, e) in sup_survival.iter_mut().zip(&curve) {
            *s = s.max(e.value);
        }
        ratio_of.push(curve);
    }
    let c_of: Vec<f64> = ratio_of
        .iter()
        .map(|curve| curve.iter().zip(&sup_survival).map(|(e, s)| e.value / s).fold(1.0, f64::min))
        .collect();
    let lookup = |p: &Vec<f64>| c_of[starts.iter().position(|s| *s == p).expect("start listed")];

    let mut report = VerificationReport::new();
    let mut worst = vec![0.0f64; times.len()];
    let mut uniform = Vec::new();
    let mut pairwise = Vec::new();
    for (k, (x, y)) in pairs.iter().enumerate() {
        let series = conditioned_tv_series(model, x, y, times, bins, &probes.probe_mc(2_000_000 + k as u64))?;
        let denom = lookup(x).max(lookup(y));
        for (j, &t) in times.iter().enumerate() {
            let (d, tol) = (series.tv[j], series.tolerance[j]);
            worst[j] = worst[j].max(d);
            uniform.push((d - tol, 2.0 * contraction(t), format!("pair {k} t={t} tv={d} mc_tol={tol}")));
            pairwise.push((d - tol, contraction(t) * 2.0 / denom, format!("pair {k} t={t} tv={d} mc_tol={tol}")));
        }
    }
    crate::finite::verify::worst_at_most(&mut report, "tv_uniform_bound_minus_mc_tol", uniform, 0.0);
    crate::finite::verify::worst_at_most(&mut report, "tv_pairwise_contraction_minus_mc_tol", pairwise, 0.0);

    let domain = model.domain();
    let a = starts
        .iter()
        .zip(&c_of)
        .map(|(x, c)| c / domain.boundary_distance(x))
        .fold(f64::INFINITY, f64::min);
    report.info("survival_ratio_over_boundary_distance", a);
    let empirical = empirical_rate(times, &worst, 0.0);
    report.info("certified_rate", cert.rate());
    if let Some(g) = empirical {
        report.info("empirical_rate", g);
    }
    report.note("probe grids relax the infimum over the state space; Monte Carlo tolerance is three binomial standard errors per bin");
    Ok(DecayReport { times: times.to_vec(), tv: worst, empirical_rate: empirical, certified_rate: cert.rate(), report })
}
