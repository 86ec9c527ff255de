//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p qsd-cli --test acceptance`. Reference values come
//! from `qsd-oracles` (dense matrix powers, a finite-difference Dirichlet
//! eigensolver, adaptive quadrature), never from the code under test.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use qsd_cli::{run, ExperimentKind};
use qsd_core::certificates::{
    certify_condition_a_chain, conditioned_tv_series, decay_report_chain, gradient_profile, ChainRate, SurvivalMethod,
};
use qsd_core::diffusion::{survival_curve, DiffusionModel, Domain, McConfig};
use qsd_core::finite::{
    check_coupling_condition, fit_two_sided, qsd_spectral, survival_ratio, verify_two_sided, ContractionGrid, FiniteAbsorbedChain,
};
use qsd_core::particle::{conditional_rejection, exponential_rate, lambda0_from_survival, weights_csv};
use qsd_core::scale1d::{escape_bounds_check, expected_exit_time, green_constants, inner_return_verify, speed_density};
use qsd_core::{BinGrid, Measure};
use qsd_oracles::dense::{left_perron_via_svd, row_times, Mat};
use qsd_oracles::dirichlet::DirichletFd;
use qsd_oracles::quad::integrate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SUITE_SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

// ---------------------------------------------------------------- chains

fn random_chains() -> Vec<Mat> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    (0..100)
        .map(|_| {
            (0..5)
                .map(|_| {
                    let row: Vec<f64> = (0..5).map(|_| rng.random_range(1e-3..1.0)).collect();
                    let s: f64 = row.iter().sum();
                    row.iter().map(|v| 0.9 * v / s).collect()
                })
                .collect()
        })
        .collect()
}

fn random_law(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(3)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

fn random_pairs(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<(Measure, Measure)> {
    (0..count)
        .map(|_| {
            let a = Measure::distribution(random_law(rng, n)).unwrap();
            let b = Measure::distribution(random_law(rng, n)).unwrap();
            (a, b)
        })
        .collect()
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// Exact checks of the two-sided estimate on 100 random chains.
fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 1);
    let mut violations = Vec::new();
    let mut worst_alpha: f64 = 0.0;
    for (i, rows) in random_chains().iter().enumerate() {
        let chain = FiniteAbsorbedChain::from_rows(rows).unwrap();
        let cert = fit_two_sided(&chain, 1).unwrap();
        let grid = ContractionGrid { pairs: random_pairs(&mut rng, 5, 10), horizon: 50 };
        let report = verify_two_sided(&chain, &cert, &grid, 1e-10).unwrap();
        violations.extend(report.failures().map(|c| format!("chain {i}: {}", c.name)));
        // independent QSD from a null-space computation
        let (_, alpha) = left_perron_via_svd(rows);
        let core = qsd_spectral(&chain).unwrap().alpha;
        worst_alpha = worst_alpha.max(tv(&alpha, core.weights()));
    }
    let elapsed = start.elapsed();
    let pass = violations.is_empty() && worst_alpha < 1e-9 && elapsed < Duration::from_secs(10);
    verdict(
        pass,
        format!(
            "{} violations over 100 chains (sandwich, A1 form, contraction on 10 pairs x 51 times, eigenvalue bound); \
             QSD vs oracle max TV {worst_alpha:.1e}; {:.2} s (limit 10 s){}",
            violations.len(),
            elapsed.as_secs_f64(),
            violations.first().map(|v| format!("; first: {v}")).unwrap_or_default()
        ),
    )
}

/// Coupling-condition constants with K = E, t1 = 1, tested against conditioned
/// laws computed by repeated oracle vector-matrix products.
fn criterion_2() -> Verdict {
    let mut violations = 0usize;
    let mut checked = 0usize;
    let mut worst_slack = f64::NEG_INFINITY;
    for rows in random_chains() {
        let chain = FiniteAbsorbedChain::from_rows(&rows).unwrap();
        let k: Vec<usize> = (0..5).collect();
        let consts = check_coupling_condition(&chain, &k, 1, 100).unwrap();
        if !consts.report.all_pass() {
            violations += 1;
        }
        let factor = 1.0 - consts.c1 * consts.c2;
        let mut laws: Vec<Vec<f64>> = (0..5).map(|x| (0..5).map(|y| if x == y { 1.0 } else { 0.0 }).collect()).collect();
        for t in 0..=100u64 {
            if t > 0 {
                laws = laws.iter().map(|v| row_times(v, &rows)).collect();
            }
            let cond: Vec<Vec<f64>> = laws.iter().map(|v| normalized(v.clone())).collect();
            let bound = 2.0 * factor.powi((t / 4) as i32);
            for x in 0..5 {
                for y in x + 1..5 {
                    let d = tv(&cond[x], &cond[y]);
                    checked += 1;
                    worst_slack = worst_slack.max(d - bound);
                    if d > bound + 1e-10 {
                        violations += 1;
                    }
                }
            }
        }
    }
    verdict(
        violations == 0,
        format!("{violations} violations in {checked} comparisons TV(t) <= 2(1-c1'c2')^floor(t/4), t <= 100; worst slack {worst_slack:.3e}"),
    )
}

/// Chains whose rows sum to different values in (0.5, 0.95), so killing depends on the state.
fn uneven_killing_chains() -> Vec<Mat> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 33);
    (0..100)
        .map(|_| {
            (0..5)
                .map(|_| {
                    let row: Vec<f64> = (0..5).map(|_| rng.random_range(1e-3..1.0)).collect();
                    let s: f64 = row.iter().sum();
                    let mass = rng.random_range(0.5..0.95);
                    row.iter().map(|v| mass * v / s).collect()
                })
                .collect()
        })
        .collect()
}

/// Pairwise contraction with the larger survival ratio in the denominator.
///
/// On the uniform-killing suite every start has the same survival curve, so
/// the ratio is 1 for every law; strictness is sought on the uneven family.
fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 3);
    let mut violations = 0usize;
    let mut counts = [0usize; 2];
    let mut largest = [1.0f64; 2];
    for (family, chains) in [random_chains(), uneven_killing_chains()].into_iter().enumerate() {
        for rows in chains {
            let chain = FiniteAbsorbedChain::from_rows(&rows).unwrap();
            let pairs = random_pairs(&mut rng, 5, 10);
            let cert = certify_condition_a_chain(&chain, 1, 200).unwrap();
            let two = fit_two_sided(&chain, 1).unwrap();
            for rate in [ChainRate { t0: 1, c1: cert.c1, c2: cert.c2 }, ChainRate::from(&two)] {
                let d = decay_report_chain(&chain, rate, &pairs, 50, 1e-10).unwrap();
                if !d.report.get("tv_pairwise_contraction").unwrap().pass {
                    violations += 1;
                }
            }
            for (p1, p2) in &pairs {
                let c1 = survival_ratio(&chain, p1, 200).unwrap().value;
                let c2 = survival_ratio(&chain, p2, 200).unwrap().value;
                let gain = c1.max(c2) / c1.min(c2);
                largest[family] = largest[family].max(gain);
                if gain > 1.0 + 1e-9 {
                    counts[family] += 1;
                }
            }
        }
    }
    verdict(
        violations == 0 && counts[0] + counts[1] >= 1,
        format!(
            "{violations} violations of TV(t) <= (1-c1c2)^floor(t/t0) ||pi1-pi2|| / max(c(pi1), c(pi2)) over 2 x 100 chains x 2 rates; \
             max > min strictly on {} of 1000 uniform-killing pairs (largest max/min {:.4}) and {} of 1000 uneven-killing pairs (largest {:.4})",
            counts[0], largest[0], counts[1], largest[1]
        ),
    )
}

// ---------------------------------------------------------------- Brownian motion

fn bm(len: f64) -> DiffusionModel {
    DiffusionModel::brownian(Domain::interval(0.0, len).unwrap(), 1.0).unwrap()
}

/// Sin-profile histogram and eigenvalues from a 1024-point Dirichlet solver.
fn dirichlet_oracle(bins: usize) -> (Vec<f64>, f64, f64) {
    let fd = DirichletFd::new(0.0, PI, 1024, 1.0);
    let profile = fd.binned_profile(&fd.eigenvector(0), bins);
    (profile, fd.eigenvalue(0), fd.eigenvalue(1))
}

/// Fleming-Viot through the CLI plus the rejection estimator, both against the oracle QSD.
fn criterion_4(work: &Path) -> Verdict {
    let start = Instant::now();
    let (profile, lambda0, _) = dirichlet_oracle(64);
    let grid = BinGrid::uniform_1d(0.0, PI, 64).unwrap();
    std::fs::write(work.join("sin_profile.csv"), weights_csv(&grid, &profile)).unwrap();
    let config = format!(
        "seed = {SUITE_SEED}\n[model]\ntype = \"diffusion\"\ndomain = \"interval\"\ninterval = [0.0, {PI}]\n\
         [params]\nparticles = 10000\ndt = 1e-4\nhorizon = 10.0\nbins = 64\nx0 = [{}]\n\
         reference = \"sin_profile.csv\"\nreference_tol = 0.05\nlambda0_reference = {lambda0}\nlambda0_tol = 0.1\n",
        PI / 2.0
    );
    std::fs::write(work.join("fv.toml"), config).unwrap();
    let (fv, _) = run(ExperimentKind::FlemingViot, &work.join("fv.toml"), Some(&work.join("fv")), None).unwrap();
    let fv_tv = fv.report.get("occupation_tv_to_reference").unwrap();
    let fv_lambda = fv.report.get("lambda0").unwrap().measured;
    let fv_rel = fv.report.get("lambda0_relative_error").unwrap();

    let model = bm(PI);
    let mc = McConfig::new(100_000, SUITE_SEED, 1e-3);
    let rej = conditional_rejection(&model, &[PI / 2.0], 5.0, &grid, &mc).unwrap();
    let rej_tv = tv(&rej.histogram.weights(), &profile);
    let times: Vec<f64> = (4..=10).map(|k| 0.5 * k as f64).collect();
    let curve = survival_curve(&model, &[PI / 2.0], &times, &mc).unwrap();
    let surv: Vec<f64> = curve.iter().map(|e| e.value).collect();
    let rej_lambda = lambda0_from_survival(&times, &surv).unwrap().rate;
    let rej_rel = (rej_lambda - lambda0).abs() / lambda0;
    let elapsed = start.elapsed();

    let pass = fv_tv.pass && fv_rel.pass && rej_tv <= 0.05 && rej_rel <= 0.1 && elapsed < Duration::from_secs(300);
    verdict(
        pass,
        format!(
            "Fleming-Viot TV {:.4} (<= 0.05), lambda0 {fv_lambda:.4}; rejection t=5 TV {rej_tv:.4} (<= 0.05, {} survivors), \
             lambda0 {rej_lambda:.4}; oracle lambda0 {lambda0:.6}; {:.0} s (limit 300 s)",
            fv_tv.measured,
            rej.survivors,
            elapsed.as_secs_f64()
        ),
    )
}

/// Exponential rate of TV between laws conditioned from pi/4 and 3pi/4.
fn criterion_5() -> Verdict {
    let (_, l0, l1) = dirichlet_oracle(2);
    let gap = l1 - l0;
    let times: Vec<f64> = (2..=12).map(|k| 0.25 * k as f64).collect();
    let bins = BinGrid::uniform_1d(0.0, PI, 2).unwrap();
    let mc = McConfig::new(200_000, SUITE_SEED ^ 5, 1e-3);
    let s = conditioned_tv_series(&bm(PI), &[PI / 4.0], &[3.0 * PI / 4.0], &times, &bins, &mc).unwrap();
    let fit = exponential_rate(&times, &s.tv).unwrap();
    let rel = (fit.rate - gap).abs() / gap;
    verdict(
        rel <= 0.25,
        format!(
            "fitted rate {:.4} +- {:.4} over t in [0.5, 3] vs oracle gap {gap:.4}: relative error {rel:.3} (<= 0.25); TV(0.5) {:.4}, TV(3) {:.4}",
            fit.rate,
            fit.se,
            s.tv[0],
            s.tv[s.tv.len() - 1]
        ),
    )
}

/// Exact Lipschitz constant of the survival function over the same points
/// (cemetery included at distance rho), from the image-sum oracle.
fn exact_lipschitz(points: &[f64], t: f64) -> f64 {
    let s: Vec<f64> = points.iter().map(|x| qsd_oracles::special::interval_survival_images(*x, t, 1.0)).collect();
    let mut l: f64 = 0.0;
    for i in 0..points.len() {
        let rho = points[i].min(1.0 - points[i]);
        l = l.max(s[i] / rho);
        for j in 0..i {
            let d = (points[i] - points[j]).abs().min(rho + points[j].min(1.0 - points[j]));
            l = l.max((s[i] - s[j]).abs() / d);
        }
    }
    l
}

/// Gradient shape on BM(0,1): L(t) sqrt(t) flat for small t, L(t)/max survival flat for large t.
fn criterion_6() -> Verdict {
    let model = bm(1.0);
    let short_pts = [0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5];
    let short_times = [1e-3, 1e-2, 1e-1];
    let pts: Vec<Vec<f64>> = short_pts.iter().map(|x| vec![*x]).collect();
    let mc = McConfig::new(50_000, SUITE_SEED ^ 6, 1e-3);
    let short = gradient_profile(&model, &short_times, &pts, &mc, SurvivalMethod::PerTime { steps: 1000 }, 2.0).unwrap();
    let short_check = short.report.get("short_time_scaled_gradient_spread").unwrap();

    let long_pts = [0.05, 0.1, 0.2, 0.3, 0.5];
    let long_times = [1.0, 2.0, 4.0];
    let pts: Vec<Vec<f64>> = long_pts.iter().map(|x| vec![*x]).collect();
    let mc = McConfig::new(20_000, SUITE_SEED ^ 7, 1e-3);
    let long = gradient_profile(&model, &long_times, &pts, &mc, SurvivalMethod::Staged { stage: 0.25 }, 2.0).unwrap();
    let long_check = long.report.get("long_time_relative_gradient_spread").unwrap();

    let mut detail = String::new();
    for (t, l) in short_times.iter().zip(&short.lipschitz) {
        let _ = write!(detail, "L({t})sqrt(t)={:.3} [exact {:.3}] ", l * t.sqrt(), exact_lipschitz(&short_pts, *t) * t.sqrt());
    }
    let _ = write!(detail, "spread {:.3} (<= 2); ", short_check.measured);
    for (i, t) in long_times.iter().enumerate() {
        let _ = write!(detail, "L/max({t})={:.3} ", long.lipschitz[i] / long.max_survival[i]);
    }
    let _ = write!(detail, "spread {:.3} (<= 2)", long_check.measured);
    verdict(short_check.pass && long_check.pass, detail)
}

/// Boundary return to the inner set on BM(0,1) at 1e5 paths per point.
fn criterion_7() -> Verdict {
    let pts: Vec<Vec<f64>> = (1..=10).map(|i| vec![0.01 * i as f64]).collect();
    let mc = McConfig::new(100_000, SUITE_SEED ^ 8, 1e-4);
    let r = inner_return_verify(&bm(1.0), Some(0.25), Some(0.1), None, &pts, &mc).unwrap();
    let check = r.sweep.report.get("return_constant_lower_ci_positive").unwrap();
    verdict(
        check.pass,
        format!(
            "min_x P_x(T_eps <= t1 < tau)/rho(x) = {:.4}, lower 95% end {:.4} (> 0), eps 0.25, t1 0.1",
            r.sweep.constant, r.sweep.constant_lower
        ),
    )
}

/// Scale/speed formulas against quadrature, plus the escape and tail bounds by simulation.
fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 9);
    let mut green_err: f64 = 0.0;
    for _ in 0..20 {
        let a = rng.random_range(0.0..5.0);
        let eps1 = rng.random_range(0.01..3.0);
        let (c, _) = green_constants(a, eps1);
        let q = 2.0 * integrate(|v| speed_density(a, v), 0.0, eps1 / 2.0, 1e-15);
        green_err = green_err.max((c - q).abs());
    }
    let mut exit_err: f64 = 0.0;
    for _ in 0..20 {
        let l = rng.random_range(0.01..4.0);
        let u = rng.random_range(0.0..l);
        exit_err = exit_err.max((expected_exit_time(0.0, u, l).unwrap() - u * (l - u)).abs());
    }
    let u_grid = [0.05, 0.15, 0.25, 0.35, 0.45];
    let mut mc_fail = Vec::new();
    for (k, a) in [0.0, 0.5].into_iter().enumerate() {
        let mc = McConfig::new(50_000, SUITE_SEED ^ (10 + k as u64), 1e-4);
        let (report, _) = escape_bounds_check(a, 1.0, &u_grid, &mc).unwrap();
        mc_fail.extend(report.failures().map(|c| format!("a={a} {}", c.name)));
    }
    verdict(
        green_err <= 1e-12 && exit_err <= 1e-12 && mc_fail.is_empty(),
        format!(
            "green constant vs quadrature max error {green_err:.1e}; exit time at a=0 vs u(L-u) max error {exit_err:.1e}; \
             escape/tail checks on 5 u-values x 2 drifts: {} failures",
            mc_fail.len()
        ),
    )
}

/// Reruns a set of CLI experiments with the same seed and compares every CSV byte for byte.
fn criterion_9(work: &Path) -> Verdict {
    let bm_pi = format!("[model]\ntype = \"diffusion\"\ndomain = \"interval\"\ninterval = [0.0, {PI}]\n");
    let chain = "[model]\ntype = \"chain\"\nrows = [[0.5, 0.2, 0.1], [0.2, 0.3, 0.3], [0.1, 0.2, 0.5]]\n";
    let runs: Vec<(ExperimentKind, String)> = vec![
        (ExperimentKind::FiniteVerify, format!("{chain}[params]\nt0 = 1\n")),
        (ExperimentKind::DecayReport, format!("{chain}[params]\nrate = \"coupling\"\nt1 = 1\nhorizon = 40\n")),
        (
            ExperimentKind::Simulate,
            format!("{bm_pi}[params]\nx0 = [1.0]\ndt = 1e-3\nhorizon = 2.0\ntimes = [1.0, 2.0]\npaths = 20000\nbins = 16\nrecord_paths = 2\n"),
        ),
        (
            ExperimentKind::FlemingViot,
            format!("{bm_pi}[params]\nparticles = 2000\ndt = 1e-3\nhorizon = 5.0\nbins = 32\nx0 = [1.0]\n"),
        ),
        (
            ExperimentKind::CertifyA,
            format!(
                "{bm_pi}[params]\nt0_grid = [0.5, 1.0]\ntimes = [0.5, 1.0, 2.0]\ndistances = [0.2]\ninterior = 2\nbins = 8\npaths = 4000\ndt = 2e-3\n"
            ),
        ),
        (
            ExperimentKind::Gradient,
            format!(
                "{bm_pi}[params]\ntimes = [0.5, 1.0]\npoints_range = [0.1, 1.5, 5]\nmethod = \"staged\"\nstage = 0.25\npaths = 4000\ndt = 1e-3\n"
            ),
        ),
        (
            ExperimentKind::Scale1d,
            "[params]\nmode = \"escape\"\na = 0.5\neps1 = 1.0\nu_grid = [0.1, 0.3]\npaths = 10000\ndt = 1e-4\n".to_string(),
        ),
    ];
    let mut compared = 0usize;
    let mut differing = Vec::new();
    for (i, (kind, body)) in runs.iter().enumerate() {
        let cfg = work.join(format!("repro{i}.toml"));
        std::fs::write(&cfg, format!("seed = {}\n{body}", SUITE_SEED + i as u64)).unwrap();
        let (a, _) = run(*kind, &cfg, Some(&work.join(format!("repro{i}a"))), None).unwrap();
        run(*kind, &cfg, Some(&work.join(format!("repro{i}b"))), None).unwrap();
        for name in a.tables.iter().map(|(n, _)| n.as_str()).chain(["report.csv"]) {
            let x = std::fs::read(work.join(format!("repro{i}a")).join(name)).unwrap();
            let y = std::fs::read(work.join(format!("repro{i}b")).join(name)).unwrap();
            compared += 1;
            if x != y {
                differing.push(format!("{kind}/{name}"));
            }
        }
    }
    verdict(
        differing.is_empty(),
        format!("{compared} CSV files from {} experiment kinds compared across two runs; {} differ {:?}", runs.len(), differing.len(), differing),
    )
}

fn main() {
    let work = tempfile::tempdir().unwrap();
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Verdict>)> = vec![
        (1, "two-sided estimate exact suite", Box::new(criterion_1)),
        (2, "coupling condition exact suite", Box::new(criterion_2)),
        (3, "max-survival-ratio contraction", Box::new(criterion_3)),
        (4, "Brownian QSD on (0, pi)", Box::new(|| criterion_4(work.path()))),
        (5, "decay-rate shape", Box::new(criterion_5)),
        (6, "gradient-estimate shape", Box::new(criterion_6)),
        (7, "boundary return constant", Box::new(criterion_7)),
        (8, "scale/speed exactness", Box::new(criterion_8)),
        (9, "reproducibility", Box::new(|| criterion_9(work.path()))),
    ];
    let mut failed = 0;
    for (n, name, f) in &criteria {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            verdict(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "acceptance criterion {n} ({name}): {} [{:.1} s] {}",
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
