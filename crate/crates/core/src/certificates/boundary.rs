use super::gradient::{survival_table, SurvivalMethod};
use super::CI_Z;
use crate::diffusion::{hitting_before, tube_probability, DiffusionModel, Estimate, McConfig, TargetSet};
use crate::error::{Error, Result};
use crate::finite::FiniteAbsorbedChain;
use crate::measure::lipschitz_constant;
use crate::report::VerificationReport;
use crate::space::{Point, StateSpace};

/// One grid point of a boundary-return sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPoint {
    pub x: Vec<f64>,
    pub boundary_distance: f64,
    pub estimate: Estimate,
    /// `estimate / rho_boundary(x)` and its Wilson lower end.
    pub ratio: f64,
    pub ratio_lower: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryReturn {
    pub points: Vec<ReturnPoint>,
    /// `min_x P_x(T_K <= t1 < tau) / rho_boundary(x)`.
    pub constant: f64,
    pub constant_lower: f64,
    pub report: VerificationReport,
}

/// Estimates `C' = min_x P_x(T_K <= t1 < tau) / rho_boundary(x)` over `points`.
/// With a gradient constant `C` supplied, also reports `C' / C` and checks
/// `C' <= C`, since the conditioned hitting probability is at most one.
pub fn boundary_return_constant(
    model: &DiffusionModel,
    target: &TargetSet,
    t1: f64,
    points: &[Vec<f64>],
    mc: &McConfig,
    gradient_constant: Option<f64>,
) -> Result<BoundaryReturn> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("boundary sweep needs points".into()));
    }
    let domain = model.domain();
    let mut out = Vec::with_capacity(points.len());
    for (i, x) in points.iter().enumerate() {
        let e = hitting_before(model, x, target, t1, &mc.clone().with_seed(super::probe_seed(mc.seed, i as u64)))?;
        let rho = domain.boundary_distance(x);
        out.push(ReturnPoint {
            x: x.clone(),
            boundary_distance: rho,
            estimate: e,
            ratio: e.value / rho,
            ratio_lower: e.wilson_lower(CI_Z) / rho,
        });
    }
    let worst = out
        .iter()
        .min_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .expect("nonempty");
    let constant = worst.ratio;
    let constant_lower = out.iter().map(|p| p.ratio_lower).fold(f64::INFINITY, f64::min);
    let mut report = VerificationReport::new();
    let dmin = out.iter().map(|p| p.boundary_distance).fold(f64::INFINITY, f64::min);
    let dmax = out.iter().map(|p| p.boundary_distance).fold(0.0, f64::max);
    if dmax < 10.0 * dmin {
        report.note("boundary distances span less than a decade");
    }
    let c = report.at_least("return_constant_lower_ci_positive", constant_lower, 0.0, 0.0);
    c.pass = constant_lower > 0.0;
    c.detail = if c.pass {
        format!("C'={constant} at x={:?}", worst.x)
    } else {
        "lower confidence end is zero: increase the budget or t1 (resolution limit, not a disproof)".into()
    };
    report.info("return_constant", constant).se = Some(worst.estimate.se / worst.boundary_distance);
    if let Some(cg) = gradient_constant {
        report.info("return_over_gradient_constant", constant / cg);
        report.at_most("return_constant_le_gradient_constant", constant_lower, cg, 0.0);
    }
    Ok(BoundaryReturn { points: out, constant, constant_lower, report })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrreducibilityProbe {
    pub estimate: Estimate,
    pub upper: f64,
    /// No path stayed in the ball; only the upper end is informative.
    pub inconclusive: bool,
}

/// `P_x(X_s in B(y, r) for every sampled s in [t1, 2 t1])`.
pub fn irreducibility_probe(
    model: &DiffusionModel,
    x: &[f64],
    y: &[f64],
    r: f64,
    t1: f64,
    mc: &McConfig,
) -> Result<IrreducibilityProbe> {
    if !model.domain().contains(y) && model.domain().boundary_distance(y) <= -r {
        return Err(Error::InvalidArgument("ball does not meet the domain".into()));
    }
    let estimate = tube_probability(model, x, y, r, t1, mc)?;
    Ok(IrreducibilityProbe { estimate, upper: estimate.wilson_upper(CI_Z), inconclusive: estimate.value == 0.0 })
}

/// Normalised survival profile at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct HtProfile {
    /// `P_x(t < tau) / max_y P_y(t < tau)` over the grid.
    pub h: Vec<f64>,
    /// Grid index of the first maximiser.
    pub argmax: usize,
    pub lipschitz: f64,
    /// Grid indices with `rho_boundary >= 1 / lipschitz`; `None` when the
    /// constant is zero.
    pub core: Option<Vec<usize>>,
    pub degenerate: bool,
    pub report: VerificationReport,
}

fn finish_ht(h: Vec<f64>, lipschitz: f64, rho: &[f64], dist_to_argmax: &[f64]) -> HtProfile {
    let argmax = h.iter().enumerate().fold(0, |best, (i, v)| if *v > h[best] { i } else { best });
    let mut report = VerificationReport::new();
    report.info("lipschitz", lipschitz);
    report.info("argmax_index", argmax as f64);
    if lipschitz == 0.0 {
        report.note("survival is constant over the grid: the Lipschitz constant is zero and the core set is undefined");
        return HtProfile { h, argmax, lipschitz, core: None, degenerate: true, report };
    }
    let radius = 1.0 / lipschitz;
    let core: Vec<usize> = (0..h.len()).filter(|&i| rho[i] >= radius).collect();
    let worst = h
        .iter()
        .zip(dist_to_argmax)
        .enumerate()
        .map(|(i, (v, d))| ((1.0 - lipschitz * d).max(0.0) - v, i))
        .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
    report.at_most("tent_minus_profile", worst.0, 0.0, 1e-12).detail = format!("worst at index {}", worst.1);
    report.at_least("argmax_boundary_distance", rho[argmax], radius, 1e-12);
    report.info("core_size", core.len() as f64);
    HtProfile { h, argmax, lipschitz, core: Some(core), degenerate: false, report }
}

/// Chain profile at step `t`; the Lipschitz constant is taken over states only.
pub fn ht_profile_chain(chain: &FiniteAbsorbedChain, space: &StateSpace, t: u64) -> Result<HtProfile> {
    let s = chain.survival_vector(t);
    let max = s.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::ZeroSurvival);
    }
    let h: Vec<f64> = s.iter().map(|v| v / max).collect();
    let n = chain.n();
    let pts: Vec<Point> = (0..n).map(Point::State).collect();
    let l = if n < 2 { 0.0 } else { lipschitz_constant(&pts, &h, |a, b| space.metric(a, b))? };
    let rho: Vec<f64> = pts.iter().map(|p| space.boundary_distance(p)).collect();
    let argmax = h.iter().enumerate().fold(0, |best, (i, v)| if *v > h[best] { i } else { best });
    let dist: Vec<f64> = pts.iter().map(|p| space.metric(p, &pts[argmax])).collect();
    Ok(finish_ht(h, l, &rho, &dist))
}

/// Diffusion profile at time `t`; the cemetery (value 0) enters the
/// Lipschitz constant through the quotient metric.
pub fn ht_profile(
    model: &DiffusionModel,
    t: f64,
    points: &[Vec<f64>],
    mc: &McConfig,
    method: SurvivalMethod,
) -> Result<HtProfile> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("profile needs points".into()));
    }
    let row = survival_table(model, points, &[t], mc, method)?.remove(0);
    let max = row.iter().map(|e| e.value).fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::ZeroSurvivors { paths: mc.paths as usize, t });
    }
    let h: Vec<f64> = row.iter().map(|e| e.value / max).collect();
    let space = StateSpace::euclidean(model.domain().clone());
    let mut pts: Vec<Point> = points.iter().map(|p| Point::Coord(p.clone())).collect();
    pts.push(Point::Cemetery);
    let mut values = h.clone();
    values.push(0.0);
    let l = lipschitz_constant(&pts, &values, |a, b| space.metric(a, b))?;
    let rho: Vec<f64> = points.iter().map(|p| model.domain().boundary_distance(p)).collect();
    let argmax = h.iter().enumerate().fold(0, |best, (i, v)| if *v > h[best] { i } else { best });
    let dist: Vec<f64> = pts[..points.len()].iter().map(|p| space.metric(p, &pts[argmax])).collect();
    Ok(finish_ht(h, l, &rho, &dist))
}
