use super::HistogramMeasure;
use crate::diffusion::{par_paths, steps_for, terminal_positions, DiffusionModel, Estimate, McConfig, PathRng, Stepper};
use crate::error::{Error, Result};
use crate::measure::BinGrid;

/// Conditioned law at time `t` estimated from the surviving paths.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionSample {
    pub histogram: HistogramMeasure,
    pub survival: Estimate,
    pub survivors: u64,
}

/// Simulates `mc.paths` paths from `x`, discards the absorbed ones and bins the rest.
pub fn conditional_rejection(
    model: &DiffusionModel,
    x: &[f64],
    t: f64,
    grid: &BinGrid,
    mc: &McConfig,
) -> Result<RejectionSample> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t = {t} must be positive")));
    }
    let ends = terminal_positions(model, x, t, mc)?;
    let alive: Vec<&[f64]> = ends.iter().flatten().map(Vec::as_slice).collect();
    if alive.is_empty() {
        return Err(Error::ZeroSurvivors { paths: mc.paths as usize, t });
    }
    let survivors = alive.len() as u64;
    Ok(RejectionSample {
        histogram: HistogramMeasure::from_points(grid.clone(), alive),
        survival: Estimate::proportion(survivors, mc.paths),
        survivors,
    })
}

/// Conditioned laws at every time in `times` from one set of paths.
pub fn conditional_rejection_series(
    model: &DiffusionModel,
    x: &[f64],
    times: &[f64],
    grid: &BinGrid,
    mc: &McConfig,
) -> Result<Vec<RejectionSample>> {
    if times.is_empty() || times[0] <= 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("times must be positive and increasing".into()));
    }
    if !model.domain().contains(x) {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    if mc.paths < 100 {
        return Err(Error::InvalidArgument(format!("{} paths requested, at least 100 required", mc.paths)));
    }
    let steps: Vec<u64> = times.iter().map(|&t| steps_for(t, mc.dt)).collect();
    let last = *steps.last().unwrap_or(&0);
    let bins = par_paths(mc.paths, |i| {
        let mut stepper = Stepper::new(model, mc.dt, mc.bridge_correction)?;
        let mut rng = PathRng::new(mc.seed, i);
        let mut pos = x.to_vec();
        let mut out: Vec<Option<usize>> = Vec::with_capacity(steps.len());
        let mut next = 0;
        stepper.run(&mut pos, &mut rng, last, |k, y| {
            while next < steps.len() && steps[next] == k {
                out.push(grid.index_of(y));
                next += 1;
            }
            true
        })?;
        Ok(out)
    })?;
    let mut hists: Vec<HistogramMeasure> = times.iter().map(|_| HistogramMeasure::new(grid.clone())).collect();
    let mut alive = vec![0u64; times.len()];
    for path in &bins {
        for (j, b) in path.iter().enumerate() {
            alive[j] += 1;
            if let Some(b) = b {
                hists[j].add_to_bin(*b, 1.0);
            }
        }
    }
    let mut out = Vec::with_capacity(times.len());
    for ((h, a), &t) in hists.into_iter().zip(alive).zip(times) {
        if a == 0 {
            return Err(Error::ZeroSurvivors { paths: mc.paths as usize, t });
        }
        out.push(RejectionSample { histogram: h, survival: Estimate::proportion(a, mc.paths), survivors: a });
    }
    Ok(out)
}
