//! One runner per experiment kind. Each returns a report and named CSV tables;
//! nothing touches the file system until [`write_outcome`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qsd_core::certificates::{
    boundary_return_constant, certify_condition_a, certify_condition_a_chain, decay_report_chain, decay_report_diffusion,
    gradient_profile, gradient_profile_chain, BoundaryReturn, ChainRate, GradientProfile, ProbeGrid, SurvivalMethod,
};
use qsd_core::diffusion::{
    simulate_path, survival_curve, DiffusionModel, Domain, Estimate, McConfig, PathConfig, TargetSet,
};
use qsd_core::finite::{
    check_coupling_condition, fit_two_sided, qsd_spectral, verify_two_sided, ContractionGrid, FiniteAbsorbedChain,
};
use qsd_core::particle::{
    conditional_rejection, fleming_viot_run, lambda0_from_rebirths, read_weights_csv, FvConfig, InitialLaw,
};
use qsd_core::report::fmt_num;
use qsd_core::scale1d::{escape_bounds_check, green_constants, inner_return_verify};
use qsd_core::{Measure, StateSpace, VerificationReport};

use crate::config::{ExperimentConfig, ExperimentKind, Section};
use crate::error::{CliError, CliResult};
use crate::models::{bin_grid, build_model, require_chain, require_diffusion, Model};

/// Report plus CSV tables, in the order they are written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub kind: ExperimentKind,
    pub report: VerificationReport,
    pub tables: Vec<(String, String)>,
}

impl Outcome {
    fn new(kind: ExperimentKind) -> Self {
        Self { kind, report: VerificationReport::new(), tables: Vec::new() }
    }

    pub fn pass(&self) -> bool {
        self.report.all_pass()
    }

    pub fn table(&self, name: &str) -> Option<&str> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t.as_str())
    }

    fn add(&mut self, name: &str, csv: String) {
        self.tables.push((name.to_string(), csv));
    }
}

fn csv<I>(header: &[String], rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn heads(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn coord_heads(d: usize) -> Vec<String> {
    (0..d).map(|k| format!("x_{k}")).collect()
}

fn nums(xs: &[f64]) -> Vec<String> {
    xs.iter().map(|v| fmt_num(*v)).collect()
}

/// `paths`, `dt`, `bridge` and the master seed.
fn mc_config(p: &Section, seed: u64) -> CliResult<McConfig> {
    Ok(McConfig::new(p.req_count("paths")?, seed, p.req_positive("dt")?).with_bridge(p.bool_or("bridge", true)?))
}

const MC_KEYS: [&str; 3] = ["paths", "dt", "bridge"];

fn keys(extra: &[&'static str], mc: bool) -> Vec<&'static str> {
    let mut k = extra.to_vec();
    if mc {
        k.extend(MC_KEYS);
    }
    k
}

fn check_points(p: &Section, key: &str, domain: &Domain, points: &[Vec<f64>]) -> CliResult<()> {
    match points.iter().find(|x| x.len() != domain.dim() || !domain.contains(x)) {
        Some(x) => Err(p.error(key, format!("point {x:?} is not in the open domain"))),
        None => Ok(()),
    }
}

/// Runs the experiment described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let out = match cfg.kind {
        ExperimentKind::FiniteVerify => finite_verify(cfg),
        ExperimentKind::TwoSidedFit => two_sided_fit(cfg),
        ExperimentKind::Simulate => simulate(cfg),
        ExperimentKind::FlemingViot => fleming_viot(cfg),
        ExperimentKind::CertifyA => certify_a(cfg),
        ExperimentKind::Gradient => gradient(cfg),
        ExperimentKind::BoundaryReturn => boundary_return(cfg),
        ExperimentKind::Scale1d => scale1d(cfg),
        ExperimentKind::DecayReport => decay_report(cfg),
    }?;
    Ok(out)
}

fn finite_verify(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let chain = require_chain(cfg)?;
    let p = &cfg.params;
    p.only(&["t0", "horizon", "tol"])?;
    let t0 = p.req_count("t0")?;
    let horizon = p.count_or("horizon", 50)?;
    let tol = p.positive("tol")?.unwrap_or(1e-10);
    let cert = fit_two_sided(&chain, t0)?;
    let mut o = Outcome::new(cfg.kind);
    o.report = verify_two_sided(&chain, &cert, &ContractionGrid::dirac_pairs(chain.n(), horizon), tol)?;
    let spec = qsd_spectral(&chain)?;
    o.report.info("c", cert.c);
    o.report.info("c1", cert.c1);
    o.report.info("c2", cert.c2);
    o.report.info("perron", spec.perron);
    o.report.info("lambda0", spec.lambda0);
    let rows = (0..chain.n()).map(|x| {
        let mut r = vec![x.to_string()];
        r.extend(nums(&[spec.alpha.weights()[x], spec.eta[x], cert.mu.weights()[x], cert.f[x]]));
        r
    });
    o.add("qsd.csv", csv(&heads(&["state", "alpha", "eta", "mu", "f"]), rows));
    Ok(o)
}

fn two_sided_fit(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let chain = require_chain(cfg)?;
    let p = &cfg.params;
    p.only(&["t0", "tol"])?;
    let t0 = p.req_count("t0")?;
    let tol = p.positive("tol")?.unwrap_or(1e-10);
    let cert = fit_two_sided(&chain, t0)?;
    let mut o = Outcome::new(cfg.kind);
    o.report.at_most("certificate_entrywise_violation", cert.max_violation(&chain.power(t0)), 0.0, tol);
    o.report.info("c", cert.c);
    o.report.info("c1", cert.c1);
    o.report.info("c2", cert.c2);
    o.report.info("rate_factor", cert.rate_factor());
    let rows = (0..chain.n()).map(|x| vec![x.to_string(), fmt_num(cert.f[x]), fmt_num(cert.mu.weights()[x])]);
    o.add("certificate.csv", csv(&heads(&["state", "f", "mu"]), rows));
    Ok(o)
}

fn simulate(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let model = require_diffusion(cfg)?;
    let p = &cfg.params;
    p.only(&keys(&["x0", "horizon", "times", "bins", "record_paths"], true))?;
    let x0 = p.req_vec_f64("x0")?;
    check_points(p, "x0", model.domain(), std::slice::from_ref(&x0))?;
    let horizon = p.req_positive("horizon")?;
    let mc = mc_config(p, cfg.seed)?;
    if mc.dt > horizon {
        return Err(p.error("dt", "must not exceed the horizon"));
    }
    let times = if p.contains("times") { p.req_times("times")? } else { vec![horizon] };
    if times.last().is_some_and(|t| *t > horizon) {
        return Err(p.error("times", "times must not exceed the horizon"));
    }
    let mut o = Outcome::new(cfg.kind);
    let curve = survival_curve(&model, &x0, &times, &mc)?;
    for (t, e) in times.iter().zip(&curve) {
        o.report.info(format!("survival t={t}"), e.value).se = Some(e.se);
    }
    let rows = times.iter().zip(&curve).map(|(t, e)| nums(&[*t, e.value, e.se]));
    o.add("survival.csv", csv(&heads(&["t", "survival", "se"]), rows));
    if p.contains("bins") {
        let grid = bin_grid(p, model.domain())?;
        match conditional_rejection(&model, &x0, horizon, &grid, &mc) {
            Ok(s) => o.add("conditioned.csv", s.histogram.to_csv()),
            Err(qsd_core::Error::ZeroSurvivors { .. }) => {
                o.report.note("no path survived to the horizon: conditioned law not written")
            }
            Err(e) => return Err(e.into()),
        }
    }
    let record = p.u64("record_paths")?.unwrap_or(0);
    if record > 0 {
        let pc = PathConfig { dt: mc.dt, horizon, seed: cfg.seed, bridge_correction: mc.bridge_correction };
        let mut header = heads(&["path", "t"]);
        header.extend(coord_heads(model.dim()));
        let mut rows = Vec::new();
        for i in 0..record {
            let path = simulate_path(&model, &x0, &pc, None, i)?;
            for (t, x) in path.times.iter().zip(&path.positions) {
                let mut r = vec![i.to_string(), fmt_num(*t)];
                r.extend(nums(x));
                rows.push(r);
            }
        }
        o.add("paths.csv", csv(&header, rows));
    }
    Ok(o)
}

fn read_reference(cfg: &ExperimentConfig, file: &str) -> CliResult<Vec<f64>> {
    let path = cfg.base_dir.join(file);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
    read_weights_csv(&text).map_err(|e| match e {
        qsd_core::Error::Parse { line, message } => {
            CliError::InFile { path, source: Box::new(CliError::Config { line, message }) }
        }
        other => other.into(),
    })
}

fn fleming_viot(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let model = require_diffusion(cfg)?;
    let p = &cfg.params;
    p.only(&[
        "particles",
        "dt",
        "horizon",
        "bins",
        "x0",
        "init_eps",
        "burn_in",
        "record_every",
        "rate_window",
        "bridge",
        "reference",
        "reference_tol",
        "lambda0_reference",
        "lambda0_tol",
    ])?;
    let mut fv = FvConfig::new(p.req_count("particles")? as usize, p.req_positive("dt")?, p.req_positive("horizon")?, cfg.seed);
    fv.burn_in = p.f64("burn_in")?;
    fv.record_every = p.count_or("record_every", fv.record_every)?;
    fv.rate_window = p.positive("rate_window")?.unwrap_or(fv.rate_window);
    fv.bridge_correction = p.bool_or("bridge", true)?;
    let grid = bin_grid(p, model.domain())?;
    let init = match p.vec_f64("x0")? {
        Some(x) => {
            check_points(p, "x0", model.domain(), std::slice::from_ref(&x))?;
            InitialLaw::Point(x)
        }
        None => InitialLaw::UniformInner { eps: p.f64("init_eps")?.unwrap_or(0.0) },
    };
    let res = fleming_viot_run(&model, &init, &grid, &fv)?;
    let mut o = Outcome::new(cfg.kind);
    let burn = fv.burn_in.unwrap_or(0.5 * fv.horizon);
    let lambda = lambda0_from_rebirths(&res.rebirth_series, burn, fv.horizon)?;
    o.report.info("lambda0", lambda.rate).se = Some(lambda.se);
    o.report.info("total_rebirths", res.total_rebirths as f64);
    if let Some(reference) = p.str("reference")? {
        let r = read_reference(cfg, &reference)?;
        let occ = res.occupation.weights();
        if r.len() != occ.len() {
            return Err(p.error("reference", format!("reference has {} bins, the run has {}", r.len(), occ.len())));
        }
        let tv = qsd_core::tv_distance(&Measure::distribution(occ)?, &Measure::distribution(r)?)?;
        o.report.at_most("occupation_tv_to_reference", tv, p.positive("reference_tol")?.unwrap_or(0.05), 0.0);
    }
    if let Some(l0) = p.positive("lambda0_reference")? {
        let rel = (lambda.rate - l0).abs() / l0;
        o.report.at_most("lambda0_relative_error", rel, p.positive("lambda0_tol")?.unwrap_or(0.1), 0.0);
    }
    o.add("occupation.csv", res.occupation.to_csv());
    o.add("terminal.csv", res.terminal.to_csv());
    let rows = res.rebirth_series.iter().map(|w| nums(&[w.start, w.end, w.rate]));
    o.add("rebirth.csv", csv(&heads(&["start", "end", "rate"]), rows));
    Ok(o)
}

fn weight_rows(weights: &[f64]) -> String {
    csv(&heads(&["state", "weight"]), weights.iter().enumerate().map(|(i, w)| vec![i.to_string(), fmt_num(*w)]))
}

fn positive_product(report: &mut VerificationReport, c1: f64, c2: f64) {
    let prod = c1 * c2;
    report.at_least("c1c2_positive", prod, 0.0, 0.0).pass = prod > 0.0;
}

/// Probe grid from `probe_times`/`times`, `distances` and `interior`, or explicit `points`.
fn probe_grid(p: &Section, model: &DiffusionModel, mc: McConfig, times_key: &str) -> CliResult<ProbeGrid> {
    let points = match p.points("points")? {
        Some(pts) => {
            check_points(p, "points", model.domain(), &pts)?;
            pts
        }
        None => {
            let distances = p.req_vec_f64("distances")?;
            let interior = p.count_or("interior", 3)? as usize;
            ProbeGrid::stratified(model.domain(), &distances, interior)?
        }
    };
    Ok(ProbeGrid::new(model.domain(), points, p.req_times(times_key)?, vec![], mc)?)
}

fn certify_a(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let p = &cfg.params;
    let mut o = Outcome::new(cfg.kind);
    match build_model(cfg)? {
        Model::Chain(chain) => {
            p.only(&["t0", "horizon"])?;
            let cert = certify_condition_a_chain(&chain, p.req_count("t0")?, p.count_or("horizon", 200)?)?;
            o.report.info("c1", cert.c1);
            o.report.info("c2", cert.c2);
            o.report.info("rate", cert.rate());
            positive_product(&mut o.report, cert.c1, cert.c2);
            o.add("nu.csv", weight_rows(cert.nu.weights()));
        }
        Model::Diffusion(model) => {
            p.only(&keys(&["t0_grid", "times", "distances", "interior", "points", "bins"], true))?;
            let grid = probe_grid(p, &model, mc_config(p, cfg.seed)?, "times")?;
            let bins = bin_grid(p, model.domain())?;
            let t0_grid = p.req_times("t0_grid")?;
            let (best, scan) = certify_condition_a(&model, &grid, &t0_grid, &bins)?;
            o.report.info("t0", best.t0);
            o.report.info("c1", best.c1);
            o.report.info("c2", best.c2);
            o.report.info("c2_conservative", best.c2_conservative);
            o.report.info("rate", best.rate());
            o.report.info("conservative_rate", best.conservative_rate());
            positive_product(&mut o.report, best.c1, best.c2);
            let rows = scan.iter().map(|c| nums(&[c.t0, c.c1, c.c2, c.c2_conservative, c.rate()]));
            o.add("scan.csv", csv(&heads(&["t0", "c1", "c2", "c2_conservative", "rate"]), rows));
            o.add("nu.csv", qsd_core::particle::weights_csv(&bins, best.nu.weights()));
        }
    }
    Ok(o)
}

fn survival_method(p: &Section) -> CliResult<SurvivalMethod> {
    let name = p.str("method")?.unwrap_or_else(|| "direct".into());
    Ok(match name.as_str() {
        "direct" => SurvivalMethod::Direct,
        "per-time" => SurvivalMethod::PerTime { steps: p.count_or("method_steps", 1000)? },
        "staged" => SurvivalMethod::Staged { stage: p.req_positive("stage")? },
        other => return Err(p.error("method", format!("unknown method '{other}' (direct, per-time, staged)"))),
    })
}

fn gradient_tables(o: &mut Outcome, g: &GradientProfile, points: &[Vec<f64>]) {
    let rows = (0..g.times.len()).map(|i| {
        let mut r = nums(&[g.times[i], g.lipschitz[i], g.max_survival[i]]);
        r.push(g.inconclusive[i].to_string());
        r
    });
    o.add("gradient.csv", csv(&heads(&["t", "lipschitz", "max_survival", "inconclusive"]), rows));
    let d = points.first().map_or(0, Vec::len);
    let mut header = heads(&["t", "point"]);
    header.extend(coord_heads(d));
    header.extend(heads(&["survival", "se"]));
    let mut rows = Vec::new();
    for (t, row) in g.times.iter().zip(&g.survival) {
        for (i, e) in row.iter().enumerate() {
            let mut r = vec![fmt_num(*t), i.to_string()];
            r.extend(nums(&points[i]));
            r.extend(nums(&[e.value, e.se]));
            rows.push(r);
        }
    }
    o.add("survival.csv", csv(&header, rows));
}

fn gradient(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let p = &cfg.params;
    let mut o = Outcome::new(cfg.kind);
    match build_model(cfg)? {
        Model::Chain(chain) => {
            p.only(&["steps", "factor"])?;
            let steps = p.req_vec_u64("steps")?;
            let g = gradient_profile_chain(&chain, &StateSpace::finite(chain.n()), &steps, p.positive("factor")?.unwrap_or(2.0))?;
            o.report = g.report.clone();
            let states: Vec<Vec<f64>> = (0..chain.n()).map(|_| Vec::new()).collect();
            gradient_tables(&mut o, &g, &states);
        }
        Model::Diffusion(model) => {
            p.only(&keys(&["times", "points", "method", "method_steps", "stage", "factor"], true))?;
            let times = p.req_times("times")?;
            let points = p.req_points("points")?;
            check_points(p, "points", model.domain(), &points)?;
            let mc = mc_config(p, cfg.seed)?;
            let g = gradient_profile(&model, &times, &points, &mc, survival_method(p)?, p.positive("factor")?.unwrap_or(2.0))?;
            o.report = g.report.clone();
            gradient_tables(&mut o, &g, &points);
        }
    }
    Ok(o)
}

fn return_table(r: &BoundaryReturn) -> String {
    let d = r.points.first().map_or(0, |p| p.x.len());
    let mut header = coord_heads(d);
    header.extend(heads(&["boundary_distance", "estimate", "se", "ratio", "ratio_lower"]));
    let rows = r.points.iter().map(|p| {
        let mut row = nums(&p.x);
        row.extend(nums(&[p.boundary_distance, p.estimate.value, p.estimate.se, p.ratio, p.ratio_lower]));
        row
    });
    csv(&header, rows)
}

fn target_set(p: &Section) -> CliResult<TargetSet> {
    if let Some(eps) = p.positive("target_eps")? {
        return Ok(TargetSet::Inner { eps });
    }
    if p.contains("target_lo") || p.contains("target_hi") {
        return Ok(TargetSet::Box { lo: p.req_vec_f64("target_lo")?, hi: p.req_vec_f64("target_hi")? });
    }
    if p.contains("target_center") || p.contains("target_radius") {
        return Ok(TargetSet::Ball { center: p.req_vec_f64("target_center")?, radius: p.req_positive("target_radius")? });
    }
    Err(p.error("target_eps", "need a target: target_eps, target_lo/target_hi or target_center/target_radius"))
}

fn boundary_return(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let model = require_diffusion(cfg)?;
    let p = &cfg.params;
    p.only(&keys(
        &["t1", "points", "target_eps", "target_lo", "target_hi", "target_center", "target_radius", "gradient_constant"],
        true,
    ))?;
    let t1 = p.req_positive("t1")?;
    let points = p.req_points("points")?;
    check_points(p, "points", model.domain(), &points)?;
    let target = target_set(p)?;
    let mc = mc_config(p, cfg.seed)?;
    let r = boundary_return_constant(&model, &target, t1, &points, &mc, p.positive("gradient_constant")?)?;
    let mut o = Outcome::new(cfg.kind);
    o.add("return.csv", return_table(&r));
    o.report = r.report;
    Ok(o)
}

fn scale1d(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let p = &cfg.params;
    let mut o = Outcome::new(cfg.kind);
    match p.req_str("mode")?.as_str() {
        "escape" => {
            p.only(&keys(&["mode", "a", "eps1", "u_grid"], true))?;
            let a = p.req_f64("a")?;
            if a < 0.0 {
                return Err(p.error("a", "must be nonnegative"));
            }
            let eps1 = p.req_positive("eps1")?;
            let u_grid = p.req_vec_f64("u_grid")?;
            if let Some(u) = u_grid.iter().find(|u| !(**u > 0.0 && **u < eps1 / 2.0)) {
                return Err(p.error("u_grid", format!("u = {u} must lie in (0, eps1 / 2)")));
            }
            let (c, s1) = green_constants(a, eps1);
            let (report, stats) = escape_bounds_check(a, eps1, &u_grid, &mc_config(p, cfg.seed)?)?;
            o.report = report;
            o.report.info("green_constant", c);
            o.report.info("s1", s1);
            let est = |e: &Estimate| [e.value, e.se];
            let rows = stats.iter().map(|s| {
                let exact = qsd_core::scale1d::expected_exit_time(a, s.u, eps1 / 2.0).unwrap_or(f64::NAN);
                let mut r = vec![fmt_num(s.u)];
                r.extend(nums(&est(&s.escape)));
                r.extend(nums(&est(&s.tail)));
                r.extend(nums(&est(&s.mean_exit)));
                r.push(fmt_num(exact));
                r.push(s.unfinished.to_string());
                r
            });
            let header =
                heads(&["u", "escape", "escape_se", "tail", "tail_se", "mean_exit", "mean_exit_se", "exact_mean_exit", "unfinished"]);
            o.add("exit.csv", csv(&header, rows));
        }
        "return" => {
            p.only(&keys(&["mode", "points", "eps", "t1", "eps0"], true))?;
            let model = require_diffusion(cfg)?;
            let points = p.req_points("points")?;
            check_points(p, "points", model.domain(), &points)?;
            let mc = mc_config(p, cfg.seed)?;
            let r = inner_return_verify(&model, p.positive("eps")?, p.positive("t1")?, p.positive("eps0")?, &points, &mc)?;
            o.report = r.sweep.report.clone();
            o.report.info("a", r.params.a);
            o.report.info("eps1", r.params.eps1);
            o.report.info("s1", r.params.s1);
            o.add("return.csv", return_table(&r.sweep));
        }
        other => return Err(p.error("mode", format!("unknown mode '{other}' (escape, return)"))),
    }
    Ok(o)
}

fn state_pairs(p: &Section, n: usize) -> CliResult<Vec<(Measure, Measure)>> {
    let Some(m) = p.matrix("pairs")? else {
        return Ok(ContractionGrid::dirac_pairs(n, 0).pairs);
    };
    m.iter()
        .map(|pair| match pair[..] {
            [x, y] if x.fract() == 0.0 && y.fract() == 0.0 && x >= 0.0 && y >= 0.0 && (x as usize) < n && (y as usize) < n => {
                Ok((Measure::dirac(n, x as usize), Measure::dirac(n, y as usize)))
            }
            _ => Err(p.error("pairs", format!("expected pairs of state indices below {n}"))),
        })
        .collect()
}

fn chain_rate(p: &Section, chain: &FiniteAbsorbedChain, horizon: u64, report: &mut VerificationReport) -> CliResult<ChainRate> {
    let source = p.str("rate")?.unwrap_or_else(|| "two-sided".into());
    Ok(match source.as_str() {
        "two-sided" => ChainRate::from(&fit_two_sided(chain, p.req_count("t0")?)?),
        "condition-a" => {
            let c = certify_condition_a_chain(chain, p.req_count("t0")?, horizon.max(1))?;
            ChainRate { t0: c.t0 as u64, c1: c.c1, c2: c.c2 }
        }
        "coupling" => {
            let k: Vec<usize> = match p.vec_u64("k")? {
                Some(k) => k.into_iter().map(|v| v as usize).collect(),
                None => (0..chain.n()).collect(),
            };
            if let Some(s) = k.iter().find(|s| **s >= chain.n()) {
                return Err(p.error("k", format!("state {s} out of range")));
            }
            let consts = check_coupling_condition(chain, &k, p.req_count("t1")?, horizon.max(1))?;
            report.extend(consts.report.clone());
            ChainRate::from(&consts)
        }
        other => return Err(p.error("rate", format!("unknown rate source '{other}' (two-sided, condition-a, coupling)"))),
    })
}

fn decay_report(cfg: &ExperimentConfig) -> CliResult<Outcome> {
    let p = &cfg.params;
    let mut o = Outcome::new(cfg.kind);
    match build_model(cfg)? {
        Model::Chain(chain) => {
            p.only(&["rate", "t0", "t1", "k", "horizon", "pairs", "tol"])?;
            let horizon = p.req_u64("horizon")?;
            let pairs = state_pairs(p, chain.n())?;
            let tol = p.positive("tol")?.unwrap_or(1e-10);
            let mut report = VerificationReport::new();
            let rate = chain_rate(p, &chain, horizon, &mut report)?;
            let d = decay_report_chain(&chain, rate, &pairs, horizon, tol)?;
            report.extend(d.report);
            o.report = report;
            let rows = d.times.iter().zip(&d.tv).enumerate().map(|(t, (time, tv))| {
                nums(&[*time, *tv, 2.0 * rate.contraction(t as u64)])
            });
            o.add("tv.csv", csv(&heads(&["t", "tv", "uniform_bound"]), rows));
        }
        Model::Diffusion(model) => {
            p.only(&keys(
                &["pairs", "times", "bins", "t0_grid", "probe_times", "distances", "interior", "points"],
                true,
            ))?;
            let pairs = p.point_pairs("pairs")?.ok_or_else(|| p.error("pairs", "missing: list the start-point pairs"))?;
            for (x, y) in &pairs {
                check_points(p, "pairs", model.domain(), &[x.clone(), y.clone()])?;
            }
            let times = p.req_times("times")?;
            let bins = bin_grid(p, model.domain())?;
            let grid = probe_grid(p, &model, mc_config(p, cfg.seed)?, "probe_times")?;
            let (cert, _) = certify_condition_a(&model, &grid, &p.req_times("t0_grid")?, &bins)?;
            let d = decay_report_diffusion(&model, &cert, &pairs, &times, &bins, &grid)?;
            o.report.info("t0", cert.t0);
            o.report.info("c1", cert.c1);
            o.report.info("c2", cert.c2);
            o.report.extend(d.report);
            let factor = 1.0 - cert.c1 * cert.c2;
            let rows = d.times.iter().zip(&d.tv).map(|(t, tv)| {
                nums(&[*t, *tv, 2.0 * factor.powi((t / cert.t0 + 1e-9).floor() as i32)])
            });
            o.add("tv.csv", csv(&heads(&["t", "tv", "uniform_bound"]), rows));
        }
    }
    Ok(o)
}

/// Writes `report.txt`, `report.csv` and every table into `dir`, returning the paths.
pub fn write_outcome(o: &Outcome, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |e| CliError::Io { path, source: e }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut text = o.report.to_text();
    let _ = writeln!(text, "# {} all_pass={}", o.kind, o.pass());
    let mut files = vec![("report.txt".to_string(), text), ("report.csv".to_string(), o.report.to_csv())];
    files.extend(o.tables.iter().cloned());
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}
