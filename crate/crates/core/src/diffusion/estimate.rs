use rand::Rng;
use rayon::prelude::*;

use super::path::{aux_rng, steps_for, PathRng, Stepper, TargetSet};
use super::DiffusionModel;
use crate::error::{Error, Result};

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub n: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, se: 0.0, n: 0 }
    }

    /// Proportion of `hits` among `n` trials with binomial standard error.
    pub fn proportion(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self { value: p, se: (p * (1.0 - p) / n as f64).sqrt(), n }
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Self { value: mean, se: (var / n).sqrt(), n: xs.len() as u64 }
    }

    pub fn lower(&self, z: f64) -> f64 {
        self.value - z * self.se
    }

    pub fn upper(&self, z: f64) -> f64 {
        self.value + z * self.se
    }

    /// Lower end of the Wilson score interval, positive whenever a success was seen.
    pub fn wilson_lower(&self, z: f64) -> f64 {
        let n = self.n as f64;
        if n == 0.0 {
            return self.value;
        }
        let p = self.value;
        let z2 = z * z;
        let centre = p + z2 / (2.0 * n);
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        ((centre - half) / (1.0 + z2 / n)).max(0.0)
    }

    pub fn wilson_upper(&self, z: f64) -> f64 {
        let n = self.n as f64;
        if n == 0.0 {
            return self.value;
        }
        let p = self.value;
        let z2 = z * z;
        let centre = p + z2 / (2.0 * n);
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        ((centre + half) / (1.0 + z2 / n)).min(1.0)
    }
}

/// Monte Carlo budget and discretisation.
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub paths: u64,
    pub seed: u64,
    pub dt: f64,
    pub bridge_correction: bool,
}

impl McConfig {
    pub fn new(paths: u64, seed: u64, dt: f64) -> Self {
        Self { paths, seed, dt, bridge_correction: true }
    }

    pub fn with_bridge(mut self, on: bool) -> Self {
        self.bridge_correction = on;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_paths(mut self, paths: u64) -> Self {
        self.paths = paths;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths < 100 {
            return Err(Error::InvalidArgument(format!("{} paths requested, at least 100 required", self.paths)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt = {} must be positive", self.dt)));
        }
        Ok(())
    }
}

/// Runs `f(index)` for every path in parallel; results are in index order.
pub(crate) fn par_paths<T, F>(n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

fn check_start(model: &DiffusionModel, x: &[f64]) -> Result<()> {
    if model.domain().contains(x) {
        Ok(())
    } else {
        Err(Error::OutsideDomain(x.to_vec()))
    }
}

/// Number of checkpoints in `times` survived by one path (times sorted).
fn survived_checkpoints(
    model: &DiffusionModel,
    x: &[f64],
    steps: &[u64],
    mc: &McConfig,
    index: u64,
) -> Result<usize> {
    let mut stepper = Stepper::new(model, mc.dt, mc.bridge_correction)?;
    let mut rng = PathRng::new(mc.seed, index);
    let mut pos = x.to_vec();
    let last = steps.last().copied().unwrap_or(0);
    let absorbed = stepper.run(&mut pos, &mut rng, last, |_, _| true)?;
    Ok(match absorbed {
        None => steps.len(),
        Some(k) => steps.iter().take_while(|&&s| s < k).count(),
    })
}

/// `P_x(t < tau)` with binomial standard error.
pub fn survival_probability(model: &DiffusionModel, x: &[f64], t: f64, mc: &McConfig) -> Result<Estimate> {
    Ok(survival_curve(model, x, &[t], mc)?[0])
}

/// `P_x(t < tau)` at every `t` in `times` from one set of paths, so the curve
/// is monotone in `t`.
pub fn survival_curve(model: &DiffusionModel, x: &[f64], times: &[f64], mc: &McConfig) -> Result<Vec<Estimate>> {
    mc.validate()?;
    check_start(model, x)?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| *t < 0.0) {
        return Err(Error::InvalidArgument("times must be nonnegative and sorted".into()));
    }
    let steps: Vec<u64> = times.iter().map(|&t| steps_for(t, mc.dt)).collect();
    let counts = par_paths(mc.paths, |i| survived_checkpoints(model, x, &steps, mc, i))?;
    let mut alive = vec![0u64; times.len()];
    for c in counts {
        for a in alive.iter_mut().take(c) {
            *a += 1;
        }
    }
    Ok(steps
        .iter()
        .zip(alive)
        .map(|(&s, a)| if s == 0 { Estimate { value: 1.0, se: 0.0, n: mc.paths } } else { Estimate::proportion(a, mc.paths) })
        .collect())
}

/// Survival curve when path `i` starts at `starts[i % starts.len()]`.
pub fn survival_curve_from_cloud(
    model: &DiffusionModel,
    starts: &[Vec<f64>],
    times: &[f64],
    mc: &McConfig,
) -> Result<Vec<Estimate>> {
    mc.validate()?;
    if starts.is_empty() {
        return Err(Error::InvalidArgument("empty start cloud".into()));
    }
    for x in starts {
        check_start(model, x)?;
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| *t < 0.0) {
        return Err(Error::InvalidArgument("times must be nonnegative and sorted".into()));
    }
    let steps: Vec<u64> = times.iter().map(|&t| steps_for(t, mc.dt)).collect();
    let counts =
        par_paths(mc.paths, |i| survived_checkpoints(model, &starts[i as usize % starts.len()], &steps, mc, i))?;
    let mut alive = vec![0u64; times.len()];
    for c in counts {
        for a in alive.iter_mut().take(c) {
            *a += 1;
        }
    }
    Ok(steps
        .iter()
        .zip(alive)
        .map(|(&s, a)| if s == 0 { Estimate { value: 1.0, se: 0.0, n: mc.paths } } else { Estimate::proportion(a, mc.paths) })
        .collect())
}

/// `P_x(T_K <= t1 < tau)`.
pub fn hitting_before(
    model: &DiffusionModel,
    x: &[f64],
    target: &TargetSet,
    t1: f64,
    mc: &McConfig,
) -> Result<Estimate> {
    mc.validate()?;
    check_start(model, x)?;
    let steps = steps_for(t1, mc.dt);
    let domain = model.domain();
    let start_inside = target.contains(domain, x);
    let hits = par_paths(mc.paths, |i| {
        let mut stepper = Stepper::new(model, mc.dt, mc.bridge_correction)?;
        let mut rng = PathRng::new(mc.seed, i);
        let mut pos = x.to_vec();
        let mut hit = start_inside;
        let absorbed = stepper.run(&mut pos, &mut rng, steps, |_, y| {
            hit = hit || target.contains(domain, y);
            true
        })?;
        Ok(hit && absorbed.is_none())
    })?;
    Ok(Estimate::proportion(hits.iter().filter(|h| **h).count() as u64, mc.paths))
}

/// `P_x(X_s in B(y, r) for all sampled s in [t1, 2 t1])`, where absorbed paths
/// count as leaving the ball.
pub fn tube_probability(
    model: &DiffusionModel,
    x: &[f64],
    center: &[f64],
    radius: f64,
    t1: f64,
    mc: &McConfig,
) -> Result<Estimate> {
    mc.validate()?;
    check_start(model, x)?;
    let first = steps_for(t1, mc.dt);
    let last = steps_for(2.0 * t1, mc.dt);
    let ball = TargetSet::Ball { center: center.to_vec(), radius };
    let domain = model.domain();
    let hits = par_paths(mc.paths, |i| {
        let mut stepper = Stepper::new(model, mc.dt, mc.bridge_correction)?;
        let mut rng = PathRng::new(mc.seed, i);
        let mut pos = x.to_vec();
        let mut inside = first > 0 || ball.contains(domain, x);
        let absorbed = stepper.run(&mut pos, &mut rng, last, |k, y| {
            if k >= first && !ball.contains(domain, y) {
                inside = false;
            }
            inside
        })?;
        Ok(inside && absorbed.is_none())
    })?;
    Ok(Estimate::proportion(hits.iter().filter(|h| **h).count() as u64, mc.paths))
}

/// Positions at time `t` of every path, `None` for absorbed ones.
pub fn terminal_positions(model: &DiffusionModel, x: &[f64], t: f64, mc: &McConfig) -> Result<Vec<Option<Vec<f64>>>> {
    mc.validate()?;
    check_start(model, x)?;
    let steps = steps_for(t, mc.dt);
    par_paths(mc.paths, |i| {
        let mut stepper = Stepper::new(model, mc.dt, mc.bridge_correction)?;
        let mut rng = PathRng::new(mc.seed, i);
        let mut pos = x.to_vec();
        let absorbed = stepper.run(&mut pos, &mut rng, steps, |_, _| true)?;
        Ok(absorbed.is_none().then_some(pos))
    })
}

/// Survival estimates at the end of each stage of a splitting scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct StagedSurvival {
    pub times: Vec<f64>,
    pub estimates: Vec<Estimate>,
}

/// Estimates `P_x(t < tau)` down to very small values by splitting: the cloud
/// is advanced one stage at a time, the surviving fraction is recorded, and
/// survivors are resampled uniformly back to the full budget. The estimate
/// at a stage end is the product of the fractions so far; its standard error
/// uses the independent-stage approximation `sum (1 - p_k) / (N p_k)`.
pub fn staged_survival(
    model: &DiffusionModel,
    x: &[f64],
    stage: f64,
    stages: usize,
    mc: &McConfig,
) -> Result<StagedSurvival> {
    mc.validate()?;
    check_start(model, x)?;
    let n = mc.paths;
    let steps = steps_for(stage, mc.dt);
    let mut cloud: Vec<Vec<f64>> = vec![x.to_vec(); n as usize];
    let mut resample = aux_rng(mc.seed, 0);
    let mut log_p = 0.0;
    let mut rel_var = 0.0;
    let mut out = StagedSurvival { times: Vec::new(), estimates: Vec::new() };
    for s in 0..stages {
        let moved = par_paths(n, |i| {
            let mut stepper = Stepper::new(model, mc.dt, mc.bridge_correction)?;
            let mut rng = PathRng::new(mc.seed, s as u64 * n + i);
            let mut pos = cloud[i as usize].clone();
            let absorbed = stepper.run(&mut pos, &mut rng, steps, |_, _| true)?;
            Ok(absorbed.is_none().then_some(pos))
        })?;
        let alive: Vec<Vec<f64>> = moved.into_iter().flatten().collect();
        if alive.is_empty() {
            return Err(Error::ZeroSurvivors { paths: n as usize, t: (s + 1) as f64 * stage });
        }
        let p = alive.len() as f64 / n as f64;
        log_p += p.ln();
        rel_var += (1.0 - p) / (n as f64 * p);
        let value = log_p.exp();
        out.times.push((s + 1) as f64 * steps as f64 * mc.dt);
        out.estimates.push(Estimate { value, se: value * rel_var.sqrt(), n });
        cloud = (0..n).map(|_| alive[resample.random_range(0..alive.len())].clone()).collect();
    }
    Ok(out)
}
