use std::f64::consts::PI;

use qsd_core::certificates::{
    boundary_return_constant, certify_condition_a, decay_report_diffusion, estimate_a1, estimate_a2, gradient_profile,
    ht_profile, irreducibility_probe, ProbeGrid, SurvivalMethod,
};
use qsd_core::diffusion::{survival_probability, DiffusionModel, Diffusion, Domain, Drift, McConfig, TargetSet};
use qsd_core::BinGrid;

fn bm(len: f64) -> DiffusionModel {
    DiffusionModel::brownian(Domain::interval(0.0, len).unwrap(), 1.0).unwrap()
}

fn near_boundary() -> Vec<Vec<f64>> {
    (1..=10).map(|i| vec![0.01 * i as f64]).collect()
}

#[test]
fn survival_comparison_is_stable_under_budget_doubling() {
    let m = bm(PI);
    let points = ProbeGrid::stratified(m.domain(), &[0.1, 0.4], 3).unwrap();
    let bins = BinGrid::uniform_1d(0.0, PI, 8).unwrap();
    let times = vec![0.5, 1.0, 2.0, 4.0];
    let mut c2 = Vec::new();
    for paths in [4_000, 8_000] {
        let g = ProbeGrid::new(m.domain(), points.clone(), times.clone(), vec![], McConfig::new(paths, 21, 2e-3)).unwrap();
        let a1 = estimate_a1(&m, &g, 1.0, &bins).unwrap();
        assert!(a1.c1 > 0.0 && a1.c1 <= 1.0);
        let a2 = estimate_a2(&m, &a1.nu, &g).unwrap();
        assert!(a2.c2 > 0.0 && a2.c2_conservative <= a2.c2);
        c2.push(a2.c2);
    }
    assert!((c2[1] / c2[0] - 1.0).abs() < 0.2, "{c2:?}");
}

#[test]
fn tube_probe_positive_and_stable() {
    let m = bm(1.0);
    let a = irreducibility_probe(&m, &[0.3], &[0.7], 0.2, 0.05, &McConfig::new(20_000, 4, 1e-3)).unwrap();
    let b = irreducibility_probe(&m, &[0.3], &[0.7], 0.2, 0.05, &McConfig::new(40_000, 5, 1e-3)).unwrap();
    assert!(!a.inconclusive && a.estimate.value > 0.0);
    let se = (a.estimate.se.powi(2) + b.estimate.se.powi(2)).sqrt();
    assert!((a.estimate.value - b.estimate.value).abs() < 4.0 * se);
}

#[test]
fn whole_domain_tube_is_survival() {
    let m = bm(1.0);
    let mc = McConfig::new(5_000, 9, 1e-3);
    let tube = irreducibility_probe(&m, &[0.4], &[0.4], 2.0, 0.05, &mc).unwrap();
    let surv = survival_probability(&m, &[0.4], 0.1, &mc).unwrap();
    assert_eq!(tube.estimate.value, surv.value);
}

#[test]
fn boundary_return_and_gradient_constants_are_ordered() {
    let m = bm(1.0);
    let mc = McConfig::new(20_000, 6, 1e-3);
    let k = TargetSet::Box { lo: vec![0.25], hi: vec![0.75] };
    let grad = gradient_profile(&m, &[0.1], &near_boundary(), &mc, SurvivalMethod::Direct, 2.0).unwrap();
    let r = boundary_return_constant(&m, &k, 0.1, &near_boundary(), &mc, Some(grad.lipschitz[0])).unwrap();
    assert!(r.report.all_pass(), "{}", r.report);
    assert!(r.constant_lower > 0.0);
    let again = boundary_return_constant(&m, &k, 0.1, &near_boundary(), &mc.clone().with_seed(7).with_paths(40_000), None)
        .unwrap();
    assert!((again.constant / r.constant - 1.0).abs() < 0.25);
}

#[test]
fn outward_drift_gives_small_positive_return_constant() {
    let outward = DiffusionModel::new(
        Domain::interval(0.0, 1.0).unwrap(),
        Drift::Linear { matrix: vec![vec![4.0]], offset: vec![-2.0] },
        Diffusion::Isotropic(1.0),
    )
    .unwrap();
    let k = TargetSet::Box { lo: vec![0.25], hi: vec![0.75] };
    let mc = McConfig::new(20_000, 2, 1e-3);
    let plain = boundary_return_constant(&bm(1.0), &k, 0.05, &near_boundary(), &mc, None).unwrap();
    let pushed = boundary_return_constant(&outward, &k, 0.05, &near_boundary(), &mc, None).unwrap();
    assert!(pushed.constant < plain.constant);
    assert!(pushed.constant > 0.0);
}

#[test]
fn normalised_survival_follows_the_ground_state() {
    let m = bm(PI);
    let pts: Vec<Vec<f64>> = (1..20).map(|i| vec![PI * i as f64 / 20.0]).collect();
    let p = ht_profile(&m, 5.0, &pts, &McConfig::new(20_000, 12, 2e-3), SurvivalMethod::Direct).unwrap();
    assert!(p.report.all_pass(), "{}", p.report);
    let z = pts[p.argmax][0];
    assert!((z - PI / 2.0).abs() < 0.5, "argmax at {z}");
    let hs: f64 = p.h.iter().sum();
    let sines: Vec<f64> = pts.iter().map(|x| x[0].sin()).collect();
    let ss: f64 = sines.iter().sum();
    let tv: f64 = p.h.iter().zip(&sines).map(|(h, s)| (h / hs - s / ss).abs()).sum();
    assert!(tv < 0.1, "tv {tv}");
}

#[test]
fn diffusion_decay_report_runs_end_to_end() {
    let m = bm(PI);
    let points = ProbeGrid::stratified(m.domain(), &[0.2], 1).unwrap();
    let g = ProbeGrid::new(m.domain(), points, vec![0.5, 1.0, 2.0], vec![], McConfig::new(2_000, 1, 5e-3)).unwrap();
    let bins = BinGrid::uniform_1d(0.0, PI, 4).unwrap();
    let (cert, scan) = certify_condition_a(&m, &g, &[0.5, 1.0], &bins).unwrap();
    assert_eq!(scan.len(), 2);
    assert!(cert.c1 * cert.c2 > 0.0 && cert.rate() > 0.0);
    let pairs = vec![(vec![PI / 4.0], vec![3.0 * PI / 4.0])];
    let d = decay_report_diffusion(&m, &cert, &pairs, &[0.5, 1.0, 1.5], &bins, &g).unwrap();
    assert!(d.report.get("tv_uniform_bound_minus_mc_tol").unwrap().pass, "{}", d.report);
    assert!(d.tv[2] < d.tv[0]);
}
