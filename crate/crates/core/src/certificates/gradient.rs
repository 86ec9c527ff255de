use crate::diffusion::{staged_survival, survival_curve, DiffusionModel, Estimate, McConfig};
use crate::error::{Error, Result};
use crate::finite::FiniteAbsorbedChain;
use crate::measure::lipschitz_witness;
use crate::report::VerificationReport;
use crate::space::{Point, StateSpace};

/// How survival probabilities are estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurvivalMethod {
    /// Plain path counting with one `dt` for all times.
    Direct,
    /// Plain path counting with `dt = t / steps`, one simulation per time.
    PerTime { steps: u64 },
    /// Splitting with resampling after every `stage`; for survival far below `1 / paths`.
    Staged { stage: f64 },
}

/// Survival `P_x(t < tau)` at every point and time, `[time][point]`.
pub fn survival_table(
    model: &DiffusionModel,
    points: &[Vec<f64>],
    times: &[f64],
    mc: &McConfig,
    method: SurvivalMethod,
) -> Result<Vec<Vec<Estimate>>> {
    let mut table = vec![Vec::with_capacity(points.len()); times.len()];
    for (i, x) in points.iter().enumerate() {
        let run = mc.clone().with_seed(super::probe_seed(mc.seed, i as u64));
        let column: Vec<Estimate> = match method {
            SurvivalMethod::Direct => survival_curve(model, x, times, &run)?,
            SurvivalMethod::PerTime { steps } => times
                .iter()
                .map(|&t| {
                    let mut per = run.clone();
                    per.dt = t / steps as f64;
                    Ok(survival_curve(model, x, &[t], &per)?[0])
                })
                .collect::<Result<_>>()?,
            SurvivalMethod::Staged { stage } => {
                let last = times.iter().cloned().fold(0.0, f64::max);
                let stages = (last / stage).round() as usize;
                let staged = staged_survival(model, x, stage, stages, &run)?;
                times
                    .iter()
                    .map(|&t| {
                        let k = (t / stage).round() as usize;
                        if k == 0 || ((k as f64) * stage - t).abs() > 1e-9 * t.max(1.0) {
                            return Err(Error::InvalidArgument(format!("time {t} is not a multiple of the stage {stage}")));
                        }
                        Ok(staged.estimates[k - 1])
                    })
                    .collect::<Result<_>>()?
            }
        };
        for (row, e) in table.iter_mut().zip(column) {
            row.push(e);
        }
    }
    Ok(table)
}

/// Lipschitz estimates of `x -> P_x(t < tau)` over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientProfile {
    pub times: Vec<f64>,
    pub lipschitz: Vec<f64>,
    pub max_survival: Vec<f64>,
    /// Witness pair was within Monte Carlo noise (pair SE above 20% of the difference).
    pub inconclusive: Vec<bool>,
    pub survival: Vec<Vec<Estimate>>,
    pub report: VerificationReport,
}

/// Largest ratio over smallest ratio of a positive list; `None` if fewer than two.
fn spread(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    Some(hi / lo)
}

fn shape_checks(
    report: &mut VerificationReport,
    times: &[f64],
    lipschitz: &[f64],
    max_survival: &[f64],
    factor: f64,
) {
    let short: Vec<f64> = times.iter().zip(lipschitz).filter(|(t, _)| **t <= 1.0).map(|(t, l)| l * t.sqrt()).collect();
    match spread(&short) {
        Some(s) => {
            report.at_most("short_time_scaled_gradient_spread", s, factor, 0.0).detail =
                "max/min of L(t) sqrt(t) over t <= 1".into();
        }
        None => report.note("fewer than two times <= 1: short-time shape not checked"),
    }
    let long: Vec<f64> = times
        .iter()
        .zip(lipschitz.iter().zip(max_survival))
        .filter(|(t, _)| **t >= 1.0)
        .map(|(_, (l, m))| l / m)
        .collect();
    match spread(&long) {
        Some(s) => {
            report.at_most("long_time_relative_gradient_spread", s, factor, 0.0).detail =
                "max/min of L(t) / max_x P_x(t < tau) over t >= 1".into();
        }
        None => report.note("fewer than two times >= 1: long-time shape not checked"),
    }
}

/// Diffusion profile. The cemetery is included as a point with survival 0 at
/// distance `rho_boundary(x)` from `x`, and points are compared in the
/// quotient metric of the domain. Besides the two shape checks (spread of
/// `L(t) sqrt(t)` for `t <= 1` and of `L(t) / max P_x(t < tau)` for `t >= 1`,
/// each within `factor`), the report checks `P_x(t < tau) <= L(t) rho_boundary(x)`.
pub fn gradient_profile(
    model: &DiffusionModel,
    times: &[f64],
    points: &[Vec<f64>],
    mc: &McConfig,
    method: SurvivalMethod,
    factor: f64,
) -> Result<GradientProfile> {
    if points.is_empty() || times.is_empty() {
        return Err(Error::InvalidArgument("gradient profile needs points and times".into()));
    }
    let space = StateSpace::euclidean(model.domain().clone());
    let mut pts: Vec<Point> = points.iter().map(|p| Point::Coord(p.clone())).collect();
    pts.push(Point::Cemetery);
    let table = survival_table(model, points, times, mc, method)?;
    let mut out = GradientProfile {
        times: times.to_vec(),
        lipschitz: Vec::new(),
        max_survival: Vec::new(),
        inconclusive: Vec::new(),
        survival: table.clone(),
        report: VerificationReport::new(),
    };
    for (row, &t) in table.iter().zip(times) {
        let mut values: Vec<f64> = row.iter().map(|e| e.value).collect();
        values.push(0.0);
        let (l, i, j) = lipschitz_witness(&pts, &values, |a, b| space.metric(a, b))?;
        let se = |k: usize| row.get(k).map_or(0.0, |e| e.se);
        let diff = (values[i] - values[j]).abs();
        let noisy = (se(i).powi(2) + se(j).powi(2)).sqrt() > 0.2 * diff;
        let max = row.iter().map(|e| e.value).fold(0.0, f64::max);
        let slack = points
            .iter()
            .zip(row)
            .map(|(x, e)| e.value - l * model.domain().boundary_distance(x))
            .fold(f64::NEG_INFINITY, f64::max);
        out.report.at_most(format!("survival_le_lipschitz_times_boundary_distance t={t}"), slack, 0.0, 1e-12);
        let c = out.report.info(format!("lipschitz t={t}"), l);
        if noisy {
            c.detail = "inconclusive: witness difference within Monte Carlo noise".into();
        }
        out.lipschitz.push(l);
        out.max_survival.push(max);
        out.inconclusive.push(noisy);
    }
    shape_checks(&mut out.report, times, &out.lipschitz, &out.max_survival, factor);
    Ok(out)
}

/// Exact chain profile over the states of `space` (the cemetery excluded),
/// at the integer times `steps`.
pub fn gradient_profile_chain(
    chain: &FiniteAbsorbedChain,
    space: &StateSpace,
    steps: &[u64],
    factor: f64,
) -> Result<GradientProfile> {
    let n = chain.n();
    let pts: Vec<Point> = (0..n).map(Point::State).collect();
    let mut out = GradientProfile {
        times: steps.iter().map(|&t| t as f64 * chain.dt()).collect(),
        lipschitz: Vec::new(),
        max_survival: Vec::new(),
        inconclusive: vec![false; steps.len()],
        survival: Vec::new(),
        report: VerificationReport::new(),
    };
    for &t in steps {
        let s = chain.survival_vector(t);
        let l = if n < 2 { 0.0 } else { lipschitz_witness(&pts, &s, |a, b| space.metric(a, b))?.0 };
        out.report.info(format!("lipschitz t={t}"), l);
        out.max_survival.push(s.iter().cloned().fold(0.0, f64::max));
        out.lipschitz.push(l);
        out.survival.push(s.into_iter().map(Estimate::exact).collect());
    }
    let times = out.times.clone();
    let (lip, max) = (out.lipschitz.clone(), out.max_survival.clone());
    shape_checks(&mut out.report, &times, &lip, &max, factor);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{Diffusion, Domain, Drift};

    #[test]
    fn frozen_dynamics_has_zero_gradient_between_states() {
        let m = DiffusionModel::new(Domain::interval(0.0, 1.0).unwrap(), Drift::Zero, Diffusion::Isotropic(0.0)).unwrap();
        let pts = vec![vec![0.3], vec![0.5], vec![0.7]];
        let table = survival_table(&m, &pts, &[0.5, 1.0], &McConfig::new(100, 1, 0.01), SurvivalMethod::Direct).unwrap();
        assert!(table.iter().flatten().all(|e| e.value == 1.0));
        let space = StateSpace::euclidean(m.domain().clone());
        let p: Vec<Point> = pts.iter().map(|x| Point::Coord(x.clone())).collect();
        assert_eq!(crate::measure::lipschitz_constant(&p, &[1.0, 1.0, 1.0], |a, b| space.metric(a, b)).unwrap(), 0.0);
    }

    #[test]
    fn discrete_metric_gives_range_of_survival() {
        let c = FiniteAbsorbedChain::from_rows(&[
            vec![0.5, 0.3, 0.1],
            vec![0.2, 0.2, 0.2],
            vec![0.1, 0.1, 0.7],
        ])
        .unwrap();
        let g = gradient_profile_chain(&c, &StateSpace::finite(3), &[1, 3, 7], 2.0).unwrap();
        for (k, &t) in [1u64, 3, 7].iter().enumerate() {
            let s = c.survival_vector(t);
            let range = s.iter().cloned().fold(0.0, f64::max) - s.iter().cloned().fold(1.0, f64::min);
            assert!((g.lipschitz[k] - range).abs() < 1e-15);
        }
    }

    #[test]
    fn staged_times_must_align() {
        let m = DiffusionModel::brownian(Domain::interval(0.0, 1.0).unwrap(), 1.0).unwrap();
        let mc = McConfig::new(100, 1, 0.01);
        assert!(survival_table(&m, &[vec![0.5]], &[0.3], &mc, SurvivalMethod::Staged { stage: 0.25 }).is_err());
        let ok = survival_table(&m, &[vec![0.5]], &[0.25, 0.5], &mc, SurvivalMethod::Staged { stage: 0.25 }).unwrap();
        assert!(ok[1][0].value <= ok[0][0].value);
    }
}
