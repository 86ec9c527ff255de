use rand::Rng;
use rayon::prelude::*;

use super::HistogramMeasure;
use crate::diffusion::{aux_rng, steps_for, DiffusionModel, PathRng, Stepper};
use crate::error::{Error, Result};
use crate::measure::BinGrid;

/// Initial cloud.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialLaw {
    /// Every particle at one point.
    Point(Vec<f64>),
    /// Particle `i` at `points[i % len]`.
    Points(Vec<Vec<f64>>),
    /// Uniform on `{ rho_boundary >= eps }`, drawn by rejection from the bounding box.
    UniformInner { eps: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FvConfig {
    pub particles: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    /// Start of the occupation average; `horizon / 2` when `None`.
    pub burn_in: Option<f64>,
    /// Occupation is recorded every this many steps.
    pub record_every: u64,
    pub bridge_correction: bool,
    /// Width of the windows used for the rebirth-rate series.
    pub rate_window: f64,
    /// Optional relabelling: particle `i` draws from stream `permutation[i]`.
    pub stream_permutation: Option<Vec<u64>>,
}

impl FvConfig {
    pub fn new(particles: usize, dt: f64, horizon: f64, seed: u64) -> Self {
        Self {
            particles,
            dt,
            horizon,
            seed,
            burn_in: None,
            record_every: 10,
            bridge_correction: true,
            rate_window: 0.5,
            stream_permutation: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.particles < 2 {
            return Err(Error::InvalidArgument("Fleming-Viot needs at least two particles".into()));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(Error::InvalidArgument("need 0 < dt <= horizon".into()));
        }
        if self.record_every == 0 || !(self.rate_window >= self.dt) {
            return Err(Error::InvalidArgument("record_every and rate_window must be positive".into()));
        }
        if let Some(p) = &self.stream_permutation {
            let mut sorted = p.clone();
            sorted.sort_unstable();
            if sorted.len() != self.particles || sorted.iter().enumerate().any(|(i, v)| *v != i as u64) {
                return Err(Error::InvalidArgument("stream permutation must permute 0..particles".into()));
            }
        }
        Ok(())
    }
}

/// Rebirths per particle per unit time over one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateWindow {
    pub start: f64,
    pub end: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FvResult {
    pub terminal: HistogramMeasure,
    pub occupation: HistogramMeasure,
    pub rebirth_series: Vec<RateWindow>,
    pub total_rebirths: u64,
}

fn initial_cloud(model: &DiffusionModel, law: &InitialLaw, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let domain = model.domain();
    match law {
        InitialLaw::Point(x) => {
            if !domain.contains(x) {
                return Err(Error::OutsideDomain(x.clone()));
            }
            Ok(vec![x.clone(); n])
        }
        InitialLaw::Points(pts) => {
            if pts.is_empty() {
                return Err(Error::InvalidArgument("empty initial point list".into()));
            }
            if let Some(p) = pts.iter().find(|p| !domain.contains(p)) {
                return Err(Error::OutsideDomain(p.clone()));
            }
            Ok((0..n).map(|i| pts[i % pts.len()].clone()).collect())
        }
        InitialLaw::UniformInner { eps } => {
            if !(*eps >= 0.0 && *eps < domain.inradius()) {
                return Err(Error::InvalidArgument(format!("eps = {eps} leaves no interior")));
            }
            let (lo, hi) = domain.bounding_box();
            let mut rng = aux_rng(seed, 1);
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let p: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect();
                if domain.contains(&p) && domain.in_inner(&p, *eps) {
                    out.push(p);
                }
            }
            Ok(out)
        }
    }
}

/// Fleming-Viot particle system. Moves are simulated in parallel; every
/// particle absorbed during a step is then restarted, in index order, at the
/// position of a uniformly chosen alive particle (particles already restarted
/// in this step count as alive). Simultaneous deaths are an `O(dt)` artifact.
pub fn fleming_viot_run(model: &DiffusionModel, init: &InitialLaw, grid: &BinGrid, cfg: &FvConfig) -> Result<FvResult> {
    cfg.validate()?;
    let n = cfg.particles;
    let mut pos = initial_cloud(model, init, n, cfg.seed)?;
    let mut rngs: Vec<PathRng> = (0..n)
        .map(|i| PathRng::new(cfg.seed, cfg.stream_permutation.as_ref().map_or(i as u64, |p| p[i])))
        .collect();
    let mut rebirth_rng = aux_rng(cfg.seed, 0);
    let steps = steps_for(cfg.horizon, cfg.dt);
    let burn_step = steps_for(cfg.burn_in.unwrap_or(0.5 * cfg.horizon), cfg.dt);
    let window_steps = steps_for(cfg.rate_window, cfg.dt);

    let mut occupation = HistogramMeasure::new(grid.clone());
    let mut series = Vec::new();
    let mut window_count = 0u64;
    let mut window_start = 0u64;
    let mut total = 0u64;
    let mut alive = vec![true; n];
    let mut alive_idx: Vec<usize> = Vec::with_capacity(n);

    for k in 1..=steps {
        pos.par_iter_mut()
            .zip(rngs.par_iter_mut())
            .zip(alive.par_iter_mut())
            .try_for_each_init(
                || Stepper::new(model, cfg.dt, cfg.bridge_correction),
                |stepper, ((x, rng), a)| -> Result<()> {
                    let stepper = stepper.as_mut().map_err(|e| e.clone())?;
                    *a = stepper.step(x, rng, k)?;
                    Ok(())
                },
            )?;
        alive_idx.clear();
        alive_idx.extend((0..n).filter(|&i| alive[i]));
        if alive_idx.is_empty() {
            return Err(Error::Extinction { step: k });
        }
        for i in 0..n {
            if !alive[i] {
                let j = alive_idx[rebirth_rng.random_range(0..alive_idx.len())];
                let src = pos[j].clone();
                pos[i].copy_from_slice(&src);
                alive[i] = true;
                alive_idx.push(i);
                window_count += 1;
                total += 1;
            }
        }
        if k - window_start == window_steps {
            let span = window_steps as f64 * cfg.dt;
            series.push(RateWindow {
                start: window_start as f64 * cfg.dt,
                end: k as f64 * cfg.dt,
                rate: window_count as f64 / (n as f64 * span),
            });
            window_start = k;
            window_count = 0;
        }
        if k > burn_step && (k - burn_step) % cfg.record_every == 0 {
            for x in &pos {
                occupation.add(x);
            }
        }
    }
    if occupation.total() == 0.0 {
        for x in &pos {
            occupation.add(x);
        }
    }
    let terminal = HistogramMeasure::from_points(grid.clone(), pos.iter().map(Vec::as_slice));
    Ok(FvResult { terminal, occupation, rebirth_series: series, total_rebirths: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{Diffusion, Domain, Drift};

    #[test]
    fn no_absorption_means_no_rebirth() {
        // zero noise, drift pointing to the centre
        let m = DiffusionModel::new(
            Domain::interval(0.0, 1.0).unwrap(),
            Drift::Linear { matrix: vec![vec![-1.0]], offset: vec![0.5] },
            Diffusion::Isotropic(0.0),
        )
        .unwrap();
        let g = BinGrid::uniform_1d(0.0, 1.0, 10).unwrap();
        let mut cfg = FvConfig::new(2, 0.01, 1.0, 3);
        cfg.burn_in = Some(0.0);
        cfg.record_every = 1;
        let r = fleming_viot_run(&m, &InitialLaw::Points(vec![vec![0.05], vec![0.95]]), &g, &cfg).unwrap();
        assert_eq!(r.total_rebirths, 0);
        assert!(r.rebirth_series.iter().all(|w| w.rate == 0.0));
        // x' = 0.5 - x: both flows approach 0.5 from either side
        let w = r.terminal.weights();
        assert_eq!(w[3] + w[6], 1.0);
        assert_eq!(r.occupation.total(), 200.0);
    }

    #[test]
    fn reproducible_and_validated() {
        let m = DiffusionModel::brownian(Domain::interval(0.0, 1.0).unwrap(), 1.0).unwrap();
        let g = BinGrid::uniform_1d(0.0, 1.0, 8).unwrap();
        let cfg = FvConfig::new(50, 1e-3, 0.2, 9);
        let law = InitialLaw::UniformInner { eps: 0.1 };
        let a = fleming_viot_run(&m, &law, &g, &cfg).unwrap();
        let b = fleming_viot_run(&m, &law, &g, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.total_rebirths > 0);
        assert!(fleming_viot_run(&m, &law, &g, &FvConfig::new(1, 1e-3, 0.2, 9)).is_err());
        let mut bad = cfg.clone();
        bad.stream_permutation = Some(vec![0; 50]);
        assert!(fleming_viot_run(&m, &law, &g, &bad).is_err());
    }

    #[test]
    fn tiny_domain_goes_extinct() {
        let m = DiffusionModel::brownian(Domain::interval(0.0, 1e-3).unwrap(), 1.0).unwrap();
        let g = BinGrid::uniform_1d(0.0, 1e-3, 2).unwrap();
        let cfg = FvConfig::new(4, 0.1, 1.0, 1);
        assert_eq!(
            fleming_viot_run(&m, &InitialLaw::Point(vec![5e-4]), &g, &cfg).unwrap_err(),
            Error::Extinction { step: 1 }
        );
    }
}
