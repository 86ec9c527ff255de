//! Finite measures on a list of states or on a bin grid, with the
//! total-variation distance and discrete Lipschitz constants.
//!
//! Total variation follows the `sup_{|f| <= 1} m(f)` convention: the
//! distance between two probability measures is the plain sum of absolute
//! weight differences and ranges over `[0, 2]`. Many libraries halve this.

use crate::error::{Error, Result};

const MASS_RTOL: f64 = 1e-12;

/// Regular product grid of bins over an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct BinGrid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    counts: Vec<usize>,
}

impl BinGrid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.len() != counts.len() {
            return Err(Error::InvalidArgument("bin grid axes have inconsistent lengths".into()));
        }
        for i in 0..lo.len() {
            if !(lo[i].is_finite() && hi[i].is_finite() && lo[i] < hi[i]) || counts[i] == 0 {
                return Err(Error::InvalidArgument(format!("bin grid axis {i} is degenerate")));
            }
        }
        Ok(Self { lo, hi, counts })
    }

    pub fn uniform_1d(a: f64, b: f64, bins: usize) -> Result<Self> {
        Self::new(vec![a], vec![b], vec![bins])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Flat (row-major, last axis fastest) index of the bin containing `x`.
    /// Points on the upper edge belong to the last bin.
    pub fn index_of(&self, x: &[f64]) -> Option<usize> {
        let mut idx = 0;
        for k in 0..self.dim() {
            let (lo, hi, n) = (self.lo[k], self.hi[k], self.counts[k]);
            if !(x[k] >= lo && x[k] <= hi) {
                return None;
            }
            let j = (((x[k] - lo) / (hi - lo)) * n as f64) as usize;
            idx = idx * n + j.min(n - 1);
        }
        Some(idx)
    }

    fn axis_indices(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            out[k] = flat % self.counts[k];
            flat /= self.counts[k];
        }
        out
    }

    /// Lower and upper corners of bin `flat`.
    pub fn bounds(&self, flat: usize) -> (Vec<f64>, Vec<f64>) {
        let ax = self.axis_indices(flat);
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let w = (self.hi[k] - self.lo[k]) / self.counts[k] as f64;
            lo.push(self.lo[k] + ax[k] as f64 * w);
            hi.push(if ax[k] + 1 == self.counts[k] { self.hi[k] } else { self.lo[k] + (ax[k] + 1) as f64 * w });
        }
        (lo, hi)
    }

    pub fn center(&self, flat: usize) -> Vec<f64> {
        let (lo, hi) = self.bounds(flat);
        lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    States(usize),
    Bins(BinGrid),
}

impl Support {
    pub fn len(&self) -> usize {
        match self {
            Support::States(n) => *n,
            Support::Bins(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Nonnegative finite measure. A distribution is a measure of mass 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    support: Support,
    weights: Vec<f64>,
}

impl Measure {
    pub fn new(support: Support, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != support.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} weights for a support of size {}",
                weights.len(),
                support.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidMeasure(format!("weight {i} is {}", weights[i])));
        }
        Ok(Self { support, weights })
    }

    pub fn on_states(weights: Vec<f64>) -> Result<Self> {
        Self::new(Support::States(weights.len()), weights)
    }

    /// Probability measure from weights; fails unless the mass is 1 within 1e-12.
    pub fn distribution(weights: Vec<f64>) -> Result<Self> {
        let m = Self::on_states(weights)?;
        if !m.is_distribution() {
            return Err(Error::InvalidMeasure(format!("mass {} is not 1", m.mass())));
        }
        Ok(m)
    }

    pub fn dirac(n: usize, state: usize) -> Self {
        let mut w = vec![0.0; n];
        w[state] = 1.0;
        Self { support: Support::States(n), weights: w }
    }

    pub fn uniform(n: usize) -> Self {
        Self { support: Support::States(n), weights: vec![1.0 / n as f64; n] }
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_distribution(&self) -> bool {
        (self.mass() - 1.0).abs() <= MASS_RTOL
    }

    /// Rescaled to mass 1; fails on the zero measure.
    pub fn normalized(&self) -> Result<Self> {
        let m = self.mass();
        if m <= 0.0 {
            return Err(Error::InvalidMeasure("cannot normalise the zero measure".into()));
        }
        Ok(Self { support: self.support.clone(), weights: self.weights.iter().map(|w| w / m).collect() })
    }

    /// `m(f) = sum_i w_i f_i`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Elementwise minimum: the largest measure dominated by both.
    pub fn infimum(&self, other: &Measure) -> Result<Measure> {
        if self.support != other.support {
            return Err(Error::SupportMismatch);
        }
        let weights = self.weights.iter().zip(&other.weights).map(|(a, b)| a.min(*b)).collect();
        Ok(Measure { support: self.support.clone(), weights })
    }
}

/// `||a - b||_TV = sum_i |a_i - b_i|`.
pub fn tv_distance(a: &Measure, b: &Measure) -> Result<f64> {
    if a.support != b.support {
        return Err(Error::SupportMismatch);
    }
    Ok(tv_weights(&a.weights, &b.weights))
}

pub(crate) fn tv_weights(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Largest difference quotient `|v(x) - v(y)| / rho(x, y)` over distinct pairs.
pub fn lipschitz_constant<P, M>(points: &[P], values: &[f64], metric: M) -> Result<f64>
where
    M: Fn(&P, &P) -> f64,
{
    Ok(lipschitz_witness(points, values, metric)?.0)
}

/// Like [`lipschitz_constant`] but also returns the maximising pair
/// (`(0, 0)` when every quotient is zero).
pub fn lipschitz_witness<P, M>(points: &[P], values: &[f64], metric: M) -> Result<(f64, usize, usize)>
where
    M: Fn(&P, &P) -> f64,
{
    if points.len() < 2 {
        return Err(Error::InsufficientPoints { needed: 2, got: points.len() });
    }
    if points.len() != values.len() {
        return Err(Error::InvalidArgument("points and values differ in length".into()));
    }
    let mut best = (0.0, 0, 0);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = metric(&points[i], &points[j]);
            if !(d > 0.0) {
                return Err(Error::InvalidArgument(format!("points {i} and {j} are at distance {d}")));
            }
            let q = (values[i] - values[j]).abs() / d;
            if q > best.0 {
                best = (q, i, j);
            }
        }
    }
    Ok(best)
}
