//! Explicit coupling construction: for each pair of starting states a common
//! probability measure dominated by both conditioned laws at `4 t1`.

use nalgebra::DMatrix;

use super::survival_ratio::ratio_series;
use super::{qsd_spectral, FiniteAbsorbedChain};
use crate::error::{Error, Result};
use crate::measure::{tv_distance, Measure};
use crate::report::VerificationReport;

/// Elementwise minimum of the rows of `Q^t` at `x` and `y`.
pub fn infimum_measure(chain: &FiniteAbsorbedChain, x: usize, y: usize, t: u64) -> Result<Measure> {
    let n = chain.n();
    if x >= n || y >= n {
        return Err(Error::InvalidArgument(format!("state out of range for {n} states")));
    }
    let p = chain.power(t);
    Measure::on_states((0..n).map(|z| p[(x, z)].min(p[(y, z)])).collect())
}

/// Shared ingredients of the construction for a fixed `K` and `t1`.
#[derive(Debug, Clone)]
pub struct CouplingSetup {
    pub t1: u64,
    pub k: Vec<usize>,
    /// `Q^{2 t1}`.
    pub p2: DMatrix<f64>,
    /// Rows of `Q^{2 t1}` conditioned on survival.
    pub conditioned: Vec<Vec<f64>>,
    /// `min_x P_x(X_{2t1} in K | 2t1 < tau)`.
    pub a: f64,
    /// `min_{u,u' in K}` of the infimum-measure mass.
    pub min_overlap_mass: f64,
}

impl CouplingSetup {
    pub fn new(chain: &FiniteAbsorbedChain, k: &[usize], t1: u64) -> Result<Self> {
        let n = chain.n();
        if k.is_empty() {
            return Err(Error::InvalidArgument("K must be nonempty".into()));
        }
        if let Some(&bad) = k.iter().find(|&&u| u >= n) {
            return Err(Error::InvalidArgument(format!("state {bad} in K is out of range")));
        }
        if t1 == 0 {
            return Err(Error::InvalidArgument("t1 must be at least one step".into()));
        }
        let mut k = k.to_vec();
        k.sort_unstable();
        k.dedup();
        let p2 = chain.power(2 * t1);
        let conditioned: Vec<Vec<f64>> = (0..n)
            .map(|x| {
                let mass = p2.row(x).sum();
                if mass > 0.0 {
                    Ok(p2.row(x).iter().map(|v| v / mass).collect())
                } else {
                    Err(Error::ZeroSurvival)
                }
            })
            .collect::<Result<_>>()?;
        let a = conditioned
            .iter()
            .map(|row| k.iter().map(|&u| row[u]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let mut min_overlap_mass = f64::INFINITY;
        for &u in &k {
            for &v in &k {
                let m: f64 = (0..n).map(|z| p2[(u, z)].min(p2[(v, z)])).sum();
                min_overlap_mass = min_overlap_mass.min(m);
            }
        }
        Ok(Self { t1, k, p2, conditioned, a, min_overlap_mass })
    }

    /// The coupling measure for `(x, y)` and its normalising mass.
    pub fn nu(&self, x: usize, y: usize) -> Result<CouplingMeasure> {
        let n = self.p2.nrows();
        let (px, py) = (&self.conditioned[x], &self.conditioned[y]);
        let mut acc = vec![0.0; n];
        for &u in &self.k {
            for &v in &self.k {
                let w = px[u] * py[v];
                if w == 0.0 {
                    continue;
                }
                for (z, a) in acc.iter_mut().enumerate() {
                    *a += w * self.p2[(u, z)].min(self.p2[(v, z)]);
                }
            }
        }
        let mass: f64 = acc.iter().sum();
        if !(mass > 0.0) {
            return Err(Error::EmptyOverlap { x, y });
        }
        let lower = self.a * self.a * self.min_overlap_mass;
        let nu = Measure::distribution(acc.iter().map(|v| v / mass).collect())?;
        Ok(CouplingMeasure { nu, mass, mass_lower_bound: lower, mass_bound_holds: mass >= lower * (1.0 - 1e-12) })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMeasure {
    pub nu: Measure,
    pub mass: f64,
    /// `A^2 min_{u,u'} overlap mass`.
    pub mass_lower_bound: f64,
    pub mass_bound_holds: bool,
}

pub fn build_nu_xy(chain: &FiniteAbsorbedChain, k: &[usize], t1: u64, x: usize, y: usize) -> Result<CouplingMeasure> {
    let n = chain.n();
    if x >= n || y >= n {
        return Err(Error::InvalidArgument(format!("state out of range for {n} states")));
    }
    CouplingSetup::new(chain, k, t1)?.nu(x, y)
}

/// Constants of the pairwise coupling condition, with `t0 = 4 t1`.
#[derive(Debug, Clone)]
pub struct CouplingConstants {
    pub t0: u64,
    /// `min_{x,y} m_{x,y}`.
    pub c1: f64,
    /// `min_{t,x,y,z} P_{nu_xy}(t < tau) / P_z(t < tau)`.
    pub c2: f64,
    pub a: f64,
    pub report: VerificationReport,
}

impl CouplingConstants {
    pub fn rate_factor(&self) -> f64 {
        1.0 - self.c1 * self.c2
    }

    /// `2 (1 - c1 c2)^{floor(t / t0)}`.
    pub fn tv_bound(&self, t: u64) -> f64 {
        2.0 * self.rate_factor().powi((t / self.t0) as i32)
    }
}

/// Builds every `nu_{x,y}`, checks that both conditioned laws at `4 t1`
/// dominate `m_{x,y} nu_{x,y}`, and evaluates the survival comparison
/// constant over `0..=horizon`, floored by its long-time limit.
pub fn check_coupling_condition(
    chain: &FiniteAbsorbedChain,
    k: &[usize],
    t1: u64,
    horizon: u64,
) -> Result<CouplingConstants> {
    if !chain.is_irreducible() {
        return Err(Error::Reducible);
    }
    let n = chain.n();
    let setup = CouplingSetup::new(chain, k, t1)?;
    let t0 = 4 * t1;
    let p4 = chain.power(t0);
    let rows: Vec<Measure> = (0..n).map(|x| FiniteAbsorbedChain::conditioned_row(&p4, x)).collect();
    let spectral = qsd_spectral(chain).ok();

    let mut report = VerificationReport::new();
    let mut c1 = f64::INFINITY;
    let mut c2 = f64::INFINITY;
    let mut worst_dom = f64::NEG_INFINITY;
    let mut all_mass_bounds = true;
    let mut limit_floor = f64::INFINITY;
    for x in 0..n {
        for y in x..n {
            let cm = setup.nu(x, y)?;
            c1 = c1.min(cm.mass);
            all_mass_bounds &= cm.mass_bound_holds;
            for z in [x, y] {
                for (r, v) in rows[z].weights().iter().zip(cm.nu.weights()) {
                    worst_dom = worst_dom.max(cm.mass * v - r);
                }
            }
            let series = ratio_series(chain, cm.nu.weights(), horizon);
            c2 = series.iter().cloned().fold(c2, f64::min);
            if let Some(s) = &spectral {
                limit_floor = limit_floor.min(cm.nu.integrate(&s.eta));
            }
        }
    }
    if spectral.is_some() {
        c2 = c2.min(limit_floor);
    } else {
        report.note("chain not primitive: survival comparison uses the finite grid only");
    }

    report.info("A", setup.a);
    report.info("min_overlap_mass", setup.min_overlap_mass);
    report.at_least("c1_mass_lower_bound", c1, setup.a * setup.a * setup.min_overlap_mass, 1e-12).pass =
        all_mass_bounds;
    report.at_most("coupling_domination_violation", worst_dom.max(0.0), 0.0, 1e-12);
    report.info("c1", c1);
    report.info("c2", c2);
    let rate = 1.0 - c1 * c2;
    report.at_most("rate_factor_below_one", rate, 1.0, 0.0).pass = rate < 1.0;
    Ok(CouplingConstants { t0, c1, c2, a: setup.a, report })
}

/// Compares `||P_x(X_t|.) - P_y(X_t|.)||` against `2 (1 - c1 c2)^{floor(t/t0)}`
/// for every pair of point masses up to `horizon`; returns the worst slack.
pub fn coupling_tv_check(
    chain: &FiniteAbsorbedChain,
    constants: &CouplingConstants,
    horizon: u64,
    tol: f64,
) -> Result<VerificationReport> {
    let n = chain.n();
    let paths: Vec<Vec<Measure>> =
        (0..n).map(|x| chain.conditioned_path(&Measure::dirac(n, x), horizon)).collect::<Result<_>>()?;
    let mut items = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            for t in 0..=horizon {
                let d = tv_distance(&paths[x][t as usize], &paths[y][t as usize])?;
                items.push((d, constants.tv_bound(t), format!("x={x} y={y} t={t}")));
            }
        }
    }
    let mut report = VerificationReport::new();
    super::verify::worst_at_most(&mut report, "coupling_tv_decay", items, tol);
    Ok(report)
}
