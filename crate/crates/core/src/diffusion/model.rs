use nalgebra::{DMatrix, SymmetricEigen};

use super::Domain;
use crate::error::{invalid, Result};
use crate::report::VerificationReport;

/// Drift field `b`.
#[derive(Debug, Clone, PartialEq)]
pub enum Drift {
    Zero,
    Constant(Vec<f64>),
    /// `b(x) = offset + matrix x`.
    Linear { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
}

/// Diffusion coefficient `s`, a `d x r` matrix field.
#[derive(Debug, Clone, PartialEq)]
pub enum Diffusion {
    /// `s = sigma I`.
    Isotropic(f64),
    /// Diagonal `s_kk(x) = base_k + amplitude_k |sin(x_k)|^exponent`, Hölder
    /// continuous with the given exponent in `(0, 1]`.
    DiagonalHolder { base: Vec<f64>, amplitude: Vec<f64>, exponent: f64 },
    /// One-dimensional `s(x) = intercept + slope x`.
    Affine1d { intercept: f64, slope: f64 },
    /// Constant `d x r` matrix, rows are coordinates.
    Matrix(Vec<Vec<f64>>),
}

/// Declared constants: `lower |v|^2 <= v^T s s^T v <= upper |v|^2` and `|b| <= drift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelBounds {
    pub sigma_lower_sq: f64,
    pub sigma_upper_sq: f64,
    pub drift_bound: f64,
}

/// Killed diffusion `dX = s(X) dB + b(X) dt` on a bounded domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionModel {
    domain: Domain,
    drift: Drift,
    diffusion: Diffusion,
    bounds: ModelBounds,
}

impl Drift {
    fn dim(&self) -> Option<usize> {
        match self {
            Drift::Zero => None,
            Drift::Constant(v) => Some(v.len()),
            Drift::Linear { offset, .. } => Some(offset.len()),
        }
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Drift::Zero => out.iter_mut().for_each(|v| *v = 0.0),
            Drift::Constant(c) => out.copy_from_slice(c),
            Drift::Linear { matrix, offset } => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = offset[k] + matrix[k].iter().zip(x).map(|(m, v)| m * v).sum::<f64>();
                }
            }
        }
    }
}

impl Diffusion {
    /// Number of driving Brownian coordinates.
    pub fn noise_dim(&self, d: usize) -> usize {
        match self {
            Diffusion::Isotropic(_) | Diffusion::DiagonalHolder { .. } => d,
            Diffusion::Affine1d { .. } => 1,
            Diffusion::Matrix(m) => m.first().map_or(0, Vec::len),
        }
    }

    fn diagonal(&self, k: usize, x: &[f64]) -> f64 {
        match self {
            Diffusion::Isotropic(s) => *s,
            Diffusion::DiagonalHolder { base, amplitude, exponent } => {
                base[k] + amplitude[k] * x[k].sin().abs().powf(*exponent)
            }
            Diffusion::Affine1d { intercept, slope } => intercept + slope * x[0],
            Diffusion::Matrix(_) => unreachable!(),
        }
    }

    /// `out = s(x) xi`.
    pub fn apply_into(&self, x: &[f64], xi: &[f64], out: &mut [f64]) {
        match self {
            Diffusion::Matrix(m) => {
                for (o, row) in out.iter_mut().zip(m) {
                    *o = row.iter().zip(xi).map(|(a, b)| a * b).sum();
                }
            }
            _ => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = self.diagonal(k, x) * xi[k];
                }
            }
        }
    }

    /// `n^T s s^T n` at `x`.
    pub fn directional_variance(&self, x: &[f64], n: &[f64]) -> f64 {
        match self {
            Diffusion::Matrix(m) => {
                let r = m.first().map_or(0, Vec::len);
                (0..r)
                    .map(|j| {
                        let v: f64 = m.iter().zip(n).map(|(row, nk)| row[j] * nk).sum();
                        v * v
                    })
                    .sum()
            }
            _ => n.iter().enumerate().map(|(k, nk)| (self.diagonal(k, x) * nk).powi(2)).sum(),
        }
    }

    /// Upper bound of `n^T s s^T n` over unit `n` and every `x` in `domain`.
    pub fn variance_cap(&self, domain: &Domain) -> f64 {
        match self {
            Diffusion::Isotropic(s) => s * s,
            Diffusion::DiagonalHolder { base, amplitude, .. } => {
                base.iter().zip(amplitude).map(|(b, a)| (b + a).powi(2)).fold(0.0, f64::max)
            }
            Diffusion::Affine1d { intercept, slope } => {
                let (lo, hi) = domain.bounding_box();
                (intercept + slope * lo[0]).powi(2).max((intercept + slope * hi[0]).powi(2))
            }
            Diffusion::Matrix(_) => self.ellipticity_at(&[]).1,
        }
    }

    /// Extreme eigenvalues of `s s^T` at `x`.
    pub fn ellipticity_at(&self, x: &[f64]) -> (f64, f64) {
        match self {
            Diffusion::Matrix(m) => {
                let d = m.len();
                let r = m.first().map_or(0, Vec::len);
                let s = DMatrix::from_fn(d, r, |i, j| m[i][j]);
                let e = SymmetricEigen::new(&s * s.transpose()).eigenvalues;
                (e.min(), e.max())
            }
            _ => (0..x.len()).map(|k| self.diagonal(k, x).powi(2)).fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            }),
        }
    }
}

impl DiffusionModel {
    /// Builds a model and derives its bounds on a grid of the bounding box.
    pub fn new(domain: Domain, drift: Drift, diffusion: Diffusion) -> Result<Self> {
        let d = domain.dim();
        if let Some(k) = drift.dim() {
            if k != d {
                return invalid(format!("drift has dimension {k}, domain has {d}"));
            }
        }
        match &drift {
            Drift::Linear { matrix, .. } if matrix.len() != d || matrix.iter().any(|r| r.len() != d) => {
                return invalid("linear drift matrix must be d x d");
            }
            _ => {}
        }
        match &diffusion {
            Diffusion::Isotropic(s) if !(s.is_finite() && *s >= 0.0) => {
                return invalid(format!("diffusion scale {s} must be finite and nonnegative"));
            }
            Diffusion::DiagonalHolder { base, amplitude, exponent } => {
                if base.len() != d || amplitude.len() != d {
                    return invalid("Hölder diffusion needs one base and amplitude per axis");
                }
                if !(*exponent > 0.0 && *exponent <= 1.0) {
                    return invalid(format!("Hölder exponent {exponent} must lie in (0, 1]"));
                }
                if base.iter().zip(amplitude).any(|(b, a)| !(*b > 0.0) || !(*a >= 0.0)) {
                    return invalid("Hölder diffusion needs positive base and nonnegative amplitude");
                }
            }
            Diffusion::Affine1d { intercept, slope } => {
                if d != 1 {
                    return invalid("affine diffusion is one-dimensional");
                }
                let Domain::Interval { a, b } = domain else { unreachable!() };
                if intercept + slope * a <= 0.0 || intercept + slope * b <= 0.0 {
                    return invalid("affine diffusion must stay positive on the interval");
                }
            }
            Diffusion::Matrix(m) => {
                if m.len() != d || m.iter().any(|r| r.len() != m[0].len()) || m[0].is_empty() {
                    return invalid("diffusion matrix must have d rows of equal length");
                }
            }
            _ => {}
        }
        let mut model = Self {
            domain,
            drift,
            diffusion,
            bounds: ModelBounds { sigma_lower_sq: 0.0, sigma_upper_sq: 0.0, drift_bound: 0.0 },
        };
        model.bounds = model.sampled_bounds(33);
        Ok(model)
    }

    /// Standard Brownian motion scaled by `sigma` (generator `sigma^2 Δ / 2`).
    pub fn brownian(domain: Domain, sigma: f64) -> Result<Self> {
        Self::new(domain, Drift::Zero, Diffusion::Isotropic(sigma))
    }

    /// Replaces the derived bounds with user-declared ones.
    pub fn with_bounds(mut self, bounds: ModelBounds) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn drift(&self) -> &Drift {
        &self.drift
    }

    pub fn diffusion(&self) -> &Diffusion {
        &self.diffusion
    }

    pub fn bounds(&self) -> ModelBounds {
        self.bounds
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn noise_dim(&self) -> usize {
        self.diffusion.noise_dim(self.dim())
    }

    fn grid_points(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let (lo, hi) = self.domain.bounding_box();
        let d = lo.len();
        let total = per_axis.pow(d as u32);
        (0..total)
            .filter_map(|mut idx| {
                let p: Vec<f64> = (0..d)
                    .map(|k| {
                        let i = idx % per_axis;
                        idx /= per_axis;
                        lo[k] + (hi[k] - lo[k]) * (i as f64 + 0.5) / per_axis as f64
                    })
                    .collect();
                self.domain.contains(&p).then_some(p)
            })
            .collect()
    }

    fn sampled_bounds(&self, per_axis: usize) -> ModelBounds {
        let d = self.dim();
        let mut b = vec![0.0; d];
        let mut out = ModelBounds { sigma_lower_sq: f64::INFINITY, sigma_upper_sq: 0.0, drift_bound: 0.0 };
        for p in self.grid_points(per_axis) {
            let (lo, hi) = self.diffusion.ellipticity_at(&p);
            out.sigma_lower_sq = out.sigma_lower_sq.min(lo);
            out.sigma_upper_sq = out.sigma_upper_sq.max(hi);
            self.drift.eval_into(&p, &mut b);
            out.drift_bound = out.drift_bound.max(b.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
        out
    }

    /// Spot-checks the declared bounds on a regular grid of the domain.
    pub fn check_bounds(&self, per_axis: usize) -> VerificationReport {
        let seen = self.sampled_bounds(per_axis);
        let mut r = VerificationReport::new();
        r.at_least("ellipticity_lower", seen.sigma_lower_sq, self.bounds.sigma_lower_sq, 1e-12);
        r.at_most("ellipticity_upper", seen.sigma_upper_sq, self.bounds.sigma_upper_sq, 1e-12);
        r.at_most("drift_bound", seen.drift_bound, self.bounds.drift_bound, 1e-12);
        r
    }

    /// Variance of the noise in the direction of the nearest boundary normal.
    pub(crate) fn normal_variance(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        self.domain.nearest_normal_into(x, scratch);
        self.diffusion.directional_variance(x, scratch)
    }
}
