//! One-dimensional comparison machinery for a Brownian motion with constant
//! downward drift `a`: its scale function, the speed measure of the process
//! in natural scale, Green-formula exit times, and Monte Carlo checks of the
//! escape and tail inequalities that follow from them.

use crate::certificates::{boundary_return_constant, BoundaryReturn};
use crate::diffusion::{par_paths, steps_for, Diffusion, DiffusionModel, Domain, Drift, Estimate, McConfig, PathRng, Stepper, TargetSet};
use crate::error::{invalid, Result};
use crate::report::VerificationReport;

/// `f(x) = (e^{2ax} - 1) / (2a)`, and `x` when `a = 0`.
pub fn scale_function(a: f64, x: f64) -> f64 {
    if a == 0.0 {
        x
    } else {
        (2.0 * a * x).exp_m1() / (2.0 * a)
    }
}

/// Inverse of [`scale_function`]: `ln(1 + 2ay) / (2a)`.
pub fn inverse_scale(a: f64, y: f64) -> f64 {
    if a == 0.0 {
        y
    } else {
        (2.0 * a * y).ln_1p() / (2.0 * a)
    }
}

/// Density of the speed measure in natural scale, `1 / (1 + 2av)^2`.
pub fn speed_density(a: f64, v: f64) -> f64 {
    (1.0 + 2.0 * a * v).powi(-2)
}

/// `(C, s1)` with `C = 2 int_0^{eps1/2} dv / (1 + 2av)^2 = eps1 / (1 + a eps1)`
/// and `s1 = eps1 C`.
pub fn green_constants(a: f64, eps1: f64) -> (f64, f64) {
    let c = eps1 / (1.0 + a * eps1);
    (c, eps1 * c)
}

/// `int_0^x v / (1 + 2av)^2 dv = g(2ax) / (4a^2)` with
/// `g(y) = ln(1 + y) + 1/(1 + y) - 1`; a power series near `ax = 0`.
fn first_moment(a: f64, x: f64) -> f64 {
    if (2.0 * a * x).abs() < 0.1 {
        first_moment_series(a, x)
    } else {
        first_moment_closed(a, x)
    }
}

/// `x^2 sum_{k>=2} (-1)^k (k-1)/k (2ax)^{k-2}`.
fn first_moment_series(a: f64, x: f64) -> f64 {
    let y = 2.0 * a * x;
    let mut sum = 0.0;
    let mut pow = 1.0;
    for k in 2..80u32 {
        let term = (k - 1) as f64 / k as f64 * pow;
        sum += if k % 2 == 0 { term } else { -term };
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        pow *= y;
    }
    x * x * sum
}

fn first_moment_closed(a: f64, x: f64) -> f64 {
    let y = 2.0 * a * x;
    (y.ln_1p() + 1.0 / (1.0 + y) - 1.0) / (4.0 * a * a)
}

/// `E_u(T_0 ^ T_L)` for the natural-scale process, from the Green formula
/// `2 int_0^L (1 - max(u,v)/L) min(u,v) s(dv)` evaluated in closed form.
pub fn expected_exit_time(a: f64, u: f64, l: f64) -> Result<f64> {
    if !(a >= 0.0 && l > 0.0 && (0.0..=l).contains(&u)) {
        return invalid(format!("need a >= 0 and 0 <= u <= L, got a={a}, u={u}, L={l}"));
    }
    let gu = first_moment(a, u);
    let gl = first_moment(a, l);
    let inner = (l - u) / ((1.0 + 2.0 * a * u) * (1.0 + 2.0 * a * l));
    Ok((2.0 * ((1.0 - u / l) * gu + u * (inner - (gl - gu) / l))).max(0.0))
}

/// Constants of the drifted comparison process built from model bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftedBmParams {
    /// `drift_bound / sigma_lower^2`.
    pub a: f64,
    pub eps0: f64,
    /// `f(eps0)`.
    pub eps1: f64,
    /// `eps1 C`.
    pub s1: f64,
    pub sigma_lower_sq: f64,
    pub sigma_upper_sq: f64,
    pub drift_bound: f64,
}

impl DriftedBmParams {
    pub fn new(drift_bound: f64, sigma_lower_sq: f64, sigma_upper_sq: f64, eps0: f64) -> Result<Self> {
        if !(drift_bound >= 0.0 && sigma_lower_sq > 0.0 && sigma_upper_sq >= sigma_lower_sq && eps0 > 0.0) {
            return invalid("need drift bound >= 0, 0 < sigma_lower^2 <= sigma_upper^2 and eps0 > 0");
        }
        let a = drift_bound / sigma_lower_sq;
        let eps1 = scale_function(a, eps0);
        let (_, s1) = green_constants(a, eps1);
        Ok(Self { a, eps0, eps1, s1, sigma_lower_sq, sigma_upper_sq, drift_bound })
    }

    /// From the declared bounds of a model; `eps0` defaults to half the inradius.
    pub fn from_model(model: &DiffusionModel, eps0: Option<f64>) -> Result<Self> {
        let b = model.bounds();
        let eps0 = eps0.unwrap_or(0.5 * model.domain().inradius());
        Self::new(b.drift_bound, b.sigma_lower_sq, b.sigma_upper_sq, eps0)
    }

    pub fn green_constant(&self) -> f64 {
        green_constants(self.a, self.eps1).0
    }

    /// `f^{-1}(eps1 / 2)`.
    pub fn inner_distance(&self) -> f64 {
        inverse_scale(self.a, 0.5 * self.eps1)
    }

    /// `s1 / sigma_lower^2`.
    pub fn return_time(&self) -> f64 {
        self.s1 / self.sigma_lower_sq
    }

    /// Escape lower-bound constant `1 / eps1`.
    pub fn escape_constant(&self) -> f64 {
        1.0 / self.eps1
    }
}

/// Natural-scale process `dN = (1 + 2aN) dW` on `(0, eps1 / 2)`.
pub fn natural_scale_model(a: f64, eps1: f64) -> Result<DiffusionModel> {
    DiffusionModel::new(
        Domain::interval(0.0, 0.5 * eps1)?,
        Drift::Zero,
        Diffusion::Affine1d { intercept: 1.0, slope: 2.0 * a },
    )
}

/// Outcome of one natural-scale path.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Exit {
    /// Midpoint of the step in which the path left, `None` if still inside at the cap.
    time: Option<f64>,
    top: bool,
}

fn simulate_exits(model: &DiffusionModel, u: f64, cap: f64, mc: &McConfig) -> Result<Vec<Exit>> {
    mc.validate()?;
    let top_edge = model.domain().bounding_box().1[0];
    let steps = steps_for(cap, mc.dt);
    par_paths(mc.paths, |i| {
        let mut stepper = Stepper::new(model, mc.dt, mc.bridge_correction)?;
        let mut rng = PathRng::new(mc.seed, i);
        let mut x = [u];
        let k = stepper.run(&mut x, &mut rng, steps, |_, _| true)?;
        Ok(Exit { time: k.map(|k| (k as f64 - 0.5) * mc.dt), top: x[0] > 0.5 * top_edge })
    })
}

/// Monte Carlo view of the natural-scale exit from one start point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitStatistics {
    pub u: f64,
    /// `P_u(T_{eps1/2} <= s1 ^ T_0)`.
    pub escape: Estimate,
    /// `P_u(s1 <= T_0 ^ T_{eps1/2})`.
    pub tail: Estimate,
    /// Mean exit time; paths still inside at the cap are counted at the cap.
    pub mean_exit: Estimate,
    pub unfinished: u64,
}

/// Simulation horizon: forty decay times of the slowest mode, and at least `s1`.
fn exit_cap(a: f64, eps1: f64) -> f64 {
    let l = 0.5 * eps1;
    let sigma_max = 1.0 + 2.0 * a * l;
    let decay = 2.0 * l * l / (std::f64::consts::PI.powi(2));
    let s1 = green_constants(a, eps1).1;
    (40.0 * decay * sigma_max.powi(2)).max(s1)
}

pub fn exit_statistics(a: f64, eps1: f64, u: f64, mc: &McConfig) -> Result<ExitStatistics> {
    if !(u > 0.0 && u < 0.5 * eps1) {
        return invalid(format!("start u={u} must lie in (0, eps1/2)"));
    }
    let model = natural_scale_model(a, eps1)?;
    let (_, s1) = green_constants(a, eps1);
    let cap = exit_cap(a, eps1);
    let exits = simulate_exits(&model, u, cap, mc)?;
    let n = exits.len() as u64;
    let escape = exits.iter().filter(|e| e.top && e.time.is_some_and(|t| t <= s1)).count() as u64;
    let tail = exits.iter().filter(|e| e.time.is_none_or(|t| t >= s1)).count() as u64;
    let times: Vec<f64> = exits.iter().map(|e| e.time.unwrap_or(cap)).collect();
    Ok(ExitStatistics {
        u,
        escape: Estimate::proportion(escape, n),
        tail: Estimate::proportion(tail, n),
        mean_exit: Estimate::from_samples(&times),
        unfinished: exits.iter().filter(|e| e.time.is_none()).count() as u64,
    })
}

/// Checks over `u_grid`, at `t = s1`, within three standard errors:
/// the escape bound `P_u(T_{eps1/2} <= s1 ^ T_0) >= u / eps1` and the tail
/// bound `P_u(s1 <= T_0 ^ T_{eps1/2}) <= u C / s1`. Mean exit times are
/// reported next to the Green-formula values.
pub fn escape_bounds_check(a: f64, eps1: f64, u_grid: &[f64], mc: &McConfig) -> Result<(VerificationReport, Vec<ExitStatistics>)> {
    if !(a >= 0.0 && eps1 > 0.0) || u_grid.is_empty() {
        return invalid("need a >= 0, eps1 > 0 and a nonempty start grid");
    }
    let (c, s1) = green_constants(a, eps1);
    let mut report = VerificationReport::new();
    let mut stats = Vec::with_capacity(u_grid.len());
    for (i, &u) in u_grid.iter().enumerate() {
        let st = exit_statistics(a, eps1, u, &mc.clone().with_seed(crate::certificates::probe_seed(mc.seed, i as u64)))?;
        report
            .at_least(format!("escape_lower_bound u={u}"), st.escape.value, u / eps1, 3.0 * st.escape.se)
            .se = Some(st.escape.se);
        report.at_most(format!("tail_bound u={u}"), st.tail.value, u * c / s1, 3.0 * st.tail.se).se = Some(st.tail.se);
        let exact = expected_exit_time(a, u, 0.5 * eps1)?;
        let check = report.info(format!("mean_exit_time u={u}"), st.mean_exit.value);
        check.bound = exact;
        check.se = Some(st.mean_exit.se);
        stats.push(st);
    }
    report.note(format!("a={a} eps1={eps1} C={c} s1={s1} escape constant 1/eps1={}", 1.0 / eps1));
    Ok((report, stats))
}

/// Result of the boundary-return sweep with its `(eps, t1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSweep {
    pub eps: f64,
    pub t1: f64,
    pub params: DriftedBmParams,
    pub sweep: BoundaryReturn,
}

/// `min_x P_x(T_eps <= t1 < tau) / rho(x)` over `points` on an interval
/// model, passing when its lower confidence end is positive. Missing
/// `eps` and `t1` default to `f^{-1}(eps1 / 2)` and `s1 / sigma_lower^2`.
pub fn inner_return_verify(
    model: &DiffusionModel,
    eps: Option<f64>,
    t1: Option<f64>,
    eps0: Option<f64>,
    points: &[Vec<f64>],
    mc: &McConfig,
) -> Result<ReturnSweep> {
    if !matches!(model.domain(), Domain::Interval { .. }) {
        return invalid("boundary-return sweep expects an interval model");
    }
    let params = DriftedBmParams::from_model(model, eps0)?;
    let eps = eps.unwrap_or_else(|| params.inner_distance());
    let t1 = t1.unwrap_or_else(|| params.return_time());
    if !(eps > 0.0 && eps < model.domain().inradius() && t1 > 0.0) {
        return invalid(format!("eps={eps} must lie in (0, inradius) and t1={t1} must be positive"));
    }
    let mut sweep = boundary_return_constant(model, &TargetSet::Inner { eps }, t1, points, mc, None)?;
    let inside = points.iter().filter(|x| model.domain().in_inner(x, eps)).count();
    if inside > 0 {
        sweep.report.note(format!("{inside} grid points already lie in the inner set: their ratio is the survival over rho"));
    }
    sweep.report.info("eps", eps);
    sweep.report.info("t1", t1);
    Ok(ReturnSweep { eps, t1, params, sweep })
}
