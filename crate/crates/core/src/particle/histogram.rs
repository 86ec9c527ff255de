use crate::error::{Error, Result};
use crate::measure::{BinGrid, Measure, Support};
use crate::report::fmt_num;

/// Weighted counts on a bin grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramMeasure {
    grid: BinGrid,
    counts: Vec<f64>,
}

impl HistogramMeasure {
    pub fn new(grid: BinGrid) -> Self {
        let counts = vec![0.0; grid.len()];
        Self { grid, counts }
    }

    pub fn from_points<'a, I>(grid: BinGrid, points: I) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut h = Self::new(grid);
        for p in points {
            h.add(p);
        }
        h
    }

    /// Adds a unit mass at `x`; points outside the grid are ignored and
    /// reported as `false`.
    pub fn add(&mut self, x: &[f64]) -> bool {
        self.add_weighted(x, 1.0)
    }

    pub fn add_weighted(&mut self, x: &[f64], w: f64) -> bool {
        match self.grid.index_of(x) {
            Some(i) => {
                self.counts[i] += w;
                true
            }
            None => false,
        }
    }

    pub fn add_to_bin(&mut self, bin: usize, w: f64) {
        self.counts[bin] += w;
    }

    pub fn grid(&self) -> &BinGrid {
        &self.grid
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Normalised weights.
    pub fn weights(&self) -> Vec<f64> {
        let t = self.total();
        self.counts.iter().map(|c| if t > 0.0 { c / t } else { 0.0 }).collect()
    }

    /// The normalised histogram as a probability measure on the bins.
    pub fn measure(&self) -> Result<Measure> {
        if !(self.total() > 0.0) {
            return Err(Error::InvalidMeasure("empty histogram".into()));
        }
        Measure::new(Support::Bins(self.grid.clone()), self.weights())
    }

    /// CSV with columns `bin_lo_k..., bin_hi_k..., weight` (normalised weights).
    pub fn to_csv(&self) -> String {
        weights_csv(&self.grid, &self.weights())
    }
}

/// CSV table of weights on a bin grid.
pub fn weights_csv(grid: &BinGrid, weights: &[f64]) -> String {
    let d = grid.dim();
    let mut header: Vec<String> = (0..d).map(|k| format!("bin_lo_{k}")).collect();
    header.extend((0..d).map(|k| format!("bin_hi_{k}")));
    header.push("weight".into());
    let mut out = header.join(",");
    out.push('\n');
    for (i, w) in weights.iter().enumerate() {
        let (lo, hi) = grid.bounds(i);
        let row: Vec<String> = lo.iter().chain(&hi).chain(std::iter::once(w)).map(|v| fmt_num(*v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Reads the weight column of a CSV written by [`weights_csv`].
pub fn read_weights_csv(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Parse { line: 1, message: "missing header".into() })?;
    let col = header
        .split(',')
        .position(|h| h.trim() == "weight")
        .ok_or(Error::Parse { line: 1, message: "no weight column".into() })?;
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.split(',')
                .nth(col)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or(Error::Parse { line: i + 2, message: "bad weight".into() })
        })
        .collect()
}
