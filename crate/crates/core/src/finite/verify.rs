//! Exact verification of the consequences of a two-sided estimate.

use nalgebra::DMatrix;

use super::{qsd_spectral, FiniteAbsorbedChain, TwoSidedCertificate};
use crate::error::{Error, Result};
use crate::measure::{tv_distance, Measure};
use crate::report::{Check, Relation, VerificationReport};

/// Pairs of initial laws and the horizon over which contraction is checked.
#[derive(Debug, Clone)]
pub struct ContractionGrid {
    pub pairs: Vec<(Measure, Measure)>,
    pub horizon: u64,
}

impl ContractionGrid {
    /// Every pair of point masses.
    pub fn dirac_pairs(n: usize, horizon: u64) -> Self {
        let mut pairs = Vec::new();
        for x in 0..n {
            for y in x + 1..n {
                pairs.push((Measure::dirac(n, x), Measure::dirac(n, y)));
            }
        }
        Self { pairs, horizon }
    }
}

/// Adds the worst instance of a family of `measured <= bound` comparisons.
pub(crate) fn worst_at_most<I>(report: &mut VerificationReport, name: &str, items: I, tol: f64)
where
    I: IntoIterator<Item = (f64, f64, String)>,
{
    worst(report, name, Relation::AtMost, items, tol)
}

pub(crate) fn worst_at_least<I>(report: &mut VerificationReport, name: &str, items: I, tol: f64)
where
    I: IntoIterator<Item = (f64, f64, String)>,
{
    worst(report, name, Relation::AtLeast, items, tol)
}

fn worst<I>(report: &mut VerificationReport, name: &str, rel: Relation, items: I, tol: f64)
where
    I: IntoIterator<Item = (f64, f64, String)>,
{
    let mut count = 0usize;
    let mut best: Option<(f64, f64, f64, String)> = None;
    for (measured, bound, detail) in items {
        count += 1;
        let slack = match rel {
            Relation::AtMost => measured - bound,
            _ => bound - measured,
        };
        if best.as_ref().is_none_or(|b| slack > b.0) {
            best = Some((slack, measured, bound, detail));
        }
    }
    if let Some((_, measured, bound, detail)) = best {
        report.push(Check::new(name, rel, measured, bound, tol).with_detail(format!("worst of {count}: {detail}")));
    }
}

/// Checks, exactly, every consequence of the certificate: the QSD sandwich
/// `c^-2 mu <= alpha <= c^2 mu`, the conditioned one-step sandwich at `t0`,
/// the total-variation contraction with rate `1 - c^-5 mu(f)` over `grid`,
/// and the eigenvalue bound `|theta| <= perron^t0 (1 - c^-5 mu(f))` on the
/// non-Perron eigenvalues of `Q^t0`. The last one is the discrete-time form
/// of the generator spectral-gap statement.
pub fn verify_two_sided(
    chain: &FiniteAbsorbedChain,
    cert: &TwoSidedCertificate,
    grid: &ContractionGrid,
    tol: f64,
) -> Result<VerificationReport> {
    let n = chain.n();
    if cert.f.len() != n || cert.mu.len() != n {
        return Err(Error::SupportMismatch);
    }
    let mut report = VerificationReport::new();
    let p = chain.power(cert.t0);
    let mu = cert.mu.weights();
    let c2sq = cert.c * cert.c;

    report.at_most("certificate_entrywise_violation", cert.max_violation(&p), 0.0, tol);
    let prod = cert.c1 * cert.c2;
    report.at_most("c1c2_at_most_one", prod, 1.0, tol);
    report.at_least("c1c2_positive", prod, 0.0, 0.0).pass = prod > 0.0;
    report.at_most("mu_f_le_sup_f", cert.mu_f(), cert.f.iter().cloned().fold(0.0, f64::max), tol);
    report.at_most("sup_f_le_c", cert.f.iter().cloned().fold(0.0, f64::max), cert.c, tol);

    let spec = qsd_spectral(chain)?;
    let alpha = spec.alpha.weights();
    worst_at_least(
        &mut report,
        "qsd_sandwich_lower",
        (0..n).map(|y| (alpha[y], mu[y] / c2sq, format!("state {y}"))),
        tol,
    );
    worst_at_most(
        &mut report,
        "qsd_sandwich_upper",
        (0..n).map(|y| (alpha[y], c2sq * mu[y], format!("state {y}"))),
        tol,
    );

    let rows: Vec<Measure> = (0..n).map(|x| FiniteAbsorbedChain::conditioned_row(&p, x)).collect();
    worst_at_least(
        &mut report,
        "a1_conditioned_lower",
        rows.iter()
            .enumerate()
            .flat_map(|(x, r)| (0..n).map(move |y| (r.weights()[y], mu[y] / c2sq, format!("x={x} y={y}")))),
        tol,
    );
    worst_at_most(
        &mut report,
        "a1_conditioned_upper",
        rows.iter()
            .enumerate()
            .flat_map(|(x, r)| (0..n).map(move |y| (r.weights()[y], c2sq * mu[y], format!("x={x} y={y}")))),
        tol,
    );

    let rate = cert.rate_factor();
    let mut contraction = Vec::new();
    for (k, (p1, p2)) in grid.pairs.iter().enumerate() {
        let path1 = chain.conditioned_path(p1, grid.horizon)?;
        let path2 = chain.conditioned_path(p2, grid.horizon)?;
        let initial = tv_distance(p1, p2)?;
        let denom = p1.integrate(&cert.f).max(p2.integrate(&cert.f));
        for t in 0..=grid.horizon {
            let lhs = tv_distance(&path1[t as usize], &path2[t as usize])?;
            let rhs = cert.c.powi(3) * rate.powi((t / cert.t0) as i32) * initial / denom;
            contraction.push((lhs, rhs, format!("pair {k} t={t}")));
        }
    }
    worst_at_most(&mut report, "tv_contraction", contraction, tol);

    if n <= super::spectral::DENSE_EIGEN_LIMIT {
        let bound = spec.perron.powi(cert.t0 as i32) * rate;
        let second = non_perron_modulus(&p, spec.perron.powi(cert.t0 as i32));
        report
            .at_most("spectral_gap_discrete", second, bound, tol * bound.max(1e-300).max(tol))
            .detail = format!("eigenvalues of Q^{}; rate factor {}", cert.t0, rate);
    } else {
        report.note("spectral check skipped: more than 512 states");
    }
    report.note(
        "spectral_gap_discrete: for eigenvalues theta of Q^t0 other than perron^t0, |theta| <= perron^t0 (1 - c^-5 mu(f)); \
         the discrete-time form of Re(lambda) <= -lambda0 + log(1 - c^-5 mu(f)) / t0",
    );
    Ok(report)
}

fn non_perron_modulus(m: &DMatrix<f64>, perron: f64) -> f64 {
    let eig = m.complex_eigenvalues();
    let skip = eig
        .iter()
        .enumerate()
        .map(|(i, z)| (i, (z - nalgebra::Complex::new(perron, 0.0)).norm()))
        .fold((0, f64::INFINITY), |acc, (i, d)| if d < acc.1 { (i, d) } else { acc })
        .0;
    eig.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, z)| z.norm()).fold(0.0, f64::max)
}
