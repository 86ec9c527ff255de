use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qsd_cli::{run, ExperimentKind};

const BM_UNIT: &str = "[model]\ntype = \"diffusion\"\ndomain = \"interval\"\ninterval = [0.0, 1.0]\n";

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn qsd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsd")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn repo_config(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn finite_verify_on_sym2_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = qsd(&["finite-verify", "--config", &repo_config("sym2-finite-verify.toml"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.lines().any(|l| l.starts_with("tv_contraction\t<=")));
    assert!(report.ends_with("# finite-verify all_pass=true\n"));
    let qsd_csv = std::fs::read_to_string(out.join("qsd.csv")).unwrap();
    assert_eq!(qsd_csv.lines().next(), Some("state,alpha,eta,mu,f"));
    assert!(qsd_csv.contains("\n0,0.5,"));
}

#[test]
fn missing_dt_is_named_with_its_section_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.toml", &format!("seed = 3\n{BM_UNIT}\n[params]\nx0 = [0.5]\nhorizon = 1.0\npaths = 100\n"));
    let o = qsd(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line 7: [params] is missing `dt`, required by simulate"), "{e}");
    assert!(e.contains("sim.toml"), "{e}");
}

#[test]
fn seed_is_mandatory_and_kinds_are_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[model]\ntype = \"chain\"\nrows = [[0.5]]\n[params]\nt0 = 1\n");
    let o = qsd(&["two-sided-fit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing `seed`"), "{}", stderr(&o));
    let o = qsd(&["not-a-kind", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown experiment kind"), "{}", stderr(&o));
}

#[test]
fn bad_values_and_unknown_keys_are_line_anchored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seed = 1\n[model]\ntype = \"chain\"\nrows = [[0.5]]\n[params]\nt0 = 1\nhorizn = 4\n");
    let e = run(ExperimentKind::FiniteVerify, &cfg, Some(dir.path()), None).unwrap_err().to_string();
    assert!(e.contains("line 7: [params] horizn: unknown key for finite-verify"), "{e}");
    let cfg = write(dir.path(), "d.toml", "seed = 1\n[model]\ntype = \"wormhole\"\n[params]\nt0 = 1\n");
    let e = run(ExperimentKind::FiniteVerify, &cfg, Some(dir.path()), None).unwrap_err().to_string();
    assert!(e.contains("line 3: [model] type: unknown model type 'wormhole'"), "{e}");
}

#[test]
fn chain_file_errors_point_into_the_chain_file() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "q.txt", "2\n0.5 0.2\n0.7 0.6\n");
    let cfg = write(dir.path(), "c.toml", "seed = 1\n[model]\ntype = \"chain\"\nfile = \"q.txt\"\n[params]\nt0 = 1\n");
    let e = run(ExperimentKind::TwoSidedFit, &cfg, Some(dir.path()), None).unwrap_err().to_string();
    assert!(e.contains("q.txt: line 3: row sums to"), "{e}");
}

#[test]
fn failing_check_gives_exit_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "seed = 4\n{BM_UNIT}[params]\nt1 = 0.05\npoints = [0.05, 0.1]\ntarget_lo = [0.25]\ntarget_hi = [0.75]\n\
         gradient_constant = 0.001\npaths = 2000\ndt = 1e-3\n"
    );
    let cfg = write(dir.path(), "b.toml", &body);
    let o = qsd(&["boundary-return", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let report = std::fs::read_to_string(dir.path().join("o/report.csv")).unwrap();
    let row = report.lines().find(|l| l.starts_with("return_constant_le_gradient_constant,")).unwrap();
    assert!(row.contains(",false"), "{row}");
}

#[test]
fn reruns_are_byte_identical_and_seed_override_applies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_config("bm-simulate.toml");
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for d in [&a, &b] {
        assert!(qsd(&["simulate", "--config", &cfg, "--out", d.to_str().unwrap()]).status.success());
    }
    assert!(qsd(&["simulate", "--config", &cfg, "--out", c.to_str().unwrap(), "--seed", "8"]).status.success());
    for name in ["survival.csv", "conditioned.csv", "paths.csv", "report.csv"] {
        let x = std::fs::read(a.join(name)).unwrap();
        assert_eq!(x, std::fs::read(b.join(name)).unwrap(), "{name}");
        assert_ne!(x, std::fs::read(c.join(name)).unwrap(), "{name}");
    }
}

/// Every experiment kind runs on a small budget and writes its tables.
#[test]
fn every_kind_runs() {
    let dir = tempfile::tempdir().unwrap();
    let chain = "[model]\ntype = \"chain\"\nrows = [[0.5, 0.2, 0.1], [0.2, 0.3, 0.3], [0.1, 0.2, 0.5]]\n";
    let bm_pi = "[model]\ntype = \"diffusion\"\ndomain = \"interval\"\ninterval = [0.0, 3.141592653589793]\n";
    let cases: Vec<(ExperimentKind, String, &[&str])> = vec![
        (ExperimentKind::FiniteVerify, format!("{chain}[params]\nt0 = 2\n"), &["qsd.csv"]),
        (ExperimentKind::TwoSidedFit, format!("{chain}[params]\nt0 = 1\n"), &["certificate.csv"]),
        (
            ExperimentKind::Simulate,
            format!("{BM_UNIT}[params]\nx0 = [0.5]\ndt = 1e-3\nhorizon = 0.2\npaths = 500\n"),
            &["survival.csv"],
        ),
        (
            ExperimentKind::FlemingViot,
            format!("{bm_pi}[params]\nparticles = 200\ndt = 1e-3\nhorizon = 2.0\nbins = 8\nx0 = [1.5]\n"),
            &["occupation.csv", "terminal.csv", "rebirth.csv"],
        ),
        (ExperimentKind::CertifyA, format!("{chain}[params]\nt0 = 1\n"), &["nu.csv"]),
        (
            ExperimentKind::CertifyA,
            format!(
                "{bm_pi}[params]\nt0_grid = [0.5, 1.0]\ntimes = [0.5, 1.0]\ndistances = [0.3]\ninterior = 1\n\
                 bins = 4\npaths = 1000\ndt = 5e-3\n"
            ),
            &["scan.csv", "nu.csv"],
        ),
        (ExperimentKind::Gradient, format!("{chain}[params]\nsteps = [1, 2, 4]\n"), &["gradient.csv", "survival.csv"]),
        (
            ExperimentKind::Gradient,
            format!(
                "{BM_UNIT}[params]\ntimes = [0.05, 0.1]\npoints_range = [0.1, 0.5, 3]\nmethod = \"per-time\"\n\
                 method_steps = 50\npaths = 1000\ndt = 1e-3\n"
            ),
            &["gradient.csv", "survival.csv"],
        ),
        (
            ExperimentKind::BoundaryReturn,
            format!("{BM_UNIT}[params]\nt1 = 0.05\npoints = [0.05]\ntarget_eps = 0.25\npaths = 1000\ndt = 1e-3\n"),
            &["return.csv"],
        ),
        (
            ExperimentKind::Scale1d,
            "[params]\nmode = \"escape\"\na = 0.0\neps1 = 1.0\nu_grid = [0.25]\npaths = 500\ndt = 1e-3\n".to_string(),
            &["exit.csv"],
        ),
        (ExperimentKind::DecayReport, format!("{chain}[params]\nt0 = 1\nhorizon = 20\npairs = [[0, 2]]\n"), &["tv.csv"]),
        (
            ExperimentKind::DecayReport,
            format!(
                "{bm_pi}[params]\npairs = [[0.785, 2.356]]\ntimes = [0.5, 1.0]\nbins = 4\nt0_grid = [0.5]\n\
                 probe_times = [0.5, 1.0]\ndistances = [0.3]\ninterior = 1\npaths = 1000\ndt = 5e-3\n"
            ),
            &["tv.csv"],
        ),
    ];
    for (i, (kind, body, tables)) in cases.into_iter().enumerate() {
        let cfg = write(dir.path(), &format!("{i}.toml"), &format!("seed = {i}\n{body}"));
        let out = dir.path().join(format!("out{i}"));
        let (o, _) = run(kind, &cfg, Some(&out), None).unwrap_or_else(|e| panic!("{kind}: {e}"));
        for t in tables.iter().chain(&["report.txt", "report.csv"]) {
            let text = std::fs::read_to_string(out.join(t)).unwrap_or_else(|_| panic!("{kind}: {t} missing"));
            assert!(text.lines().count() >= 2, "{kind}: {t} is empty");
        }
        assert!(o.report.checks().len() > 0, "{kind}: empty report");
    }
}
