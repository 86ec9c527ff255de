use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::measure::Measure;

const ROW_SUM_TOL: f64 = 1e-12;

/// Substochastic one-step kernel on `n` states; the missing row mass is the
/// probability of jumping to the cemetery.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteAbsorbedChain {
    q: DMatrix<f64>,
    dt: f64,
}

/// Law of `X_t` given `t < tau`, with the survival probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedLaw {
    pub law: Measure,
    pub survival: f64,
    pub log_survival: f64,
}

impl FiniteAbsorbedChain {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        Self::with_dt(q, 1.0)
    }

    pub fn with_dt(q: DMatrix<f64>, dt: f64) -> Result<Self> {
        if !q.is_square() || q.nrows() == 0 {
            return Err(Error::InvalidChain("kernel must be a non-empty square matrix".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidChain(format!("step duration {dt} must be positive")));
        }
        for i in 0..q.nrows() {
            let row = q.row(i);
            if let Some(j) = row.iter().position(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidChain(format!("entry ({i}, {j}) = {} is not a nonnegative number", q[(i, j)])));
            }
            let s: f64 = row.iter().sum();
            if s > 1.0 + ROW_SUM_TOL {
                return Err(Error::InvalidChain(format!("row {i} sums to {s} > 1")));
            }
            if s <= 0.0 {
                return Err(Error::InvalidChain(format!("row {i} has zero mass: state {i} is absorbed surely")));
            }
        }
        Ok(Self { q, dt })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidChain("rows must all have length n".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Plain-text kernel: a line holding `n`, then `n` rows of `n`
    /// whitespace-separated nonnegative decimals with row sums at most 1.
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (first, header) = lines.next().ok_or(Error::Parse { line: 1, message: "empty input".into() })?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::Parse { line: first, message: format!("expected the state count, found '{header}'") })?;
        if n == 0 {
            return Err(Error::Parse { line: first, message: "state count must be positive".into() });
        }
        let mut q = DMatrix::zeros(n, n);
        let mut last = first;
        for i in 0..n {
            let (line, body) = lines.next().ok_or(Error::Parse {
                line: last + 1,
                message: format!("expected {n} rows, found {i}"),
            })?;
            last = line;
            let vals: Vec<&str> = body.split_whitespace().collect();
            if vals.len() != n {
                return Err(Error::Parse { line, message: format!("expected {n} entries, found {}", vals.len()) });
            }
            let mut sum = 0.0;
            for (j, tok) in vals.iter().enumerate() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::Parse { line, message: format!("'{tok}' is not a number") })?;
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Parse { line, message: format!("entry {} is negative or not finite", j + 1) });
                }
                q[(i, j)] = v;
                sum += v;
            }
            if sum > 1.0 + ROW_SUM_TOL {
                return Err(Error::Parse { line, message: format!("row sums to {sum} > 1") });
            }
            if sum <= 0.0 {
                return Err(Error::Parse { line, message: "row has zero mass".into() });
            }
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::Parse { line, message: format!("unexpected data after {n} rows") });
        }
        Self::new(q)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n());
        for i in 0..self.n() {
            let row: Vec<String> = self.q.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// `Q^t` by binary exponentiation.
    pub fn power(&self, t: u64) -> DMatrix<f64> {
        let n = self.n();
        let mut result = DMatrix::identity(n, n);
        let mut base = self.q.clone();
        let mut e = t;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// `x -> P_x(t < tau)`, i.e. `Q^t 1`.
    pub fn survival_vector(&self, t: u64) -> Vec<f64> {
        let mut s = DVector::from_element(self.n(), 1.0);
        for _ in 0..t {
            s = &self.q * s;
        }
        s.iter().copied().collect()
    }

    /// Row `x` of `Q^t` conditioned on survival.
    pub fn conditioned_row(power: &DMatrix<f64>, x: usize) -> Measure {
        let row: Vec<f64> = power.row(x).iter().copied().collect();
        let mass: f64 = row.iter().sum();
        Measure::on_states(row.iter().map(|v| v / mass).collect()).expect("kernel rows are nonnegative")
    }

    fn support_graph(&self) -> Vec<Vec<bool>> {
        let n = self.n();
        (0..n).map(|i| (0..n).map(|j| self.q[(i, j)] > 0.0).collect()).collect()
    }

    /// Some power of the kernel is entrywise positive (Wielandt bound).
    pub fn is_primitive(&self) -> bool {
        let n = self.n();
        let target = (n - 1) * (n - 1) + 1;
        let mut b = self.support_graph();
        let mut exp = 1usize;
        while exp < target {
            b = bool_square(&b);
            exp *= 2;
        }
        b.iter().all(|row| row.iter().all(|v| *v))
    }

    /// The support graph is strongly connected.
    pub fn is_irreducible(&self) -> bool {
        let g = self.support_graph();
        let n = self.n();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let edge = if forward { g[i][j] } else { g[j][i] };
                    if edge && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    fn check_distribution(&self, pi: &Measure) -> Result<()> {
        if pi.len() != self.n() || !matches!(pi.support(), crate::measure::Support::States(_)) {
            return Err(Error::SupportMismatch);
        }
        if !pi.is_distribution() {
            return Err(Error::InvalidMeasure(format!("initial law has mass {}", pi.mass())));
        }
        Ok(())
    }

    /// `(pi Q^t / pi Q^t 1, pi Q^t 1)`, renormalised every step so the law
    /// stays accurate after the survival probability underflows.
    pub fn evolve_conditioned(&self, pi: &Measure, t: u64) -> Result<ConditionedLaw> {
        self.check_distribution(pi)?;
        let mut v = DVector::from_column_slice(pi.weights());
        let mut log_survival = 0.0;
        for _ in 0..t {
            v = self.q.tr_mul(&v);
            let s = v.sum();
            if !(s > 0.0) {
                return Err(Error::ZeroSurvival);
            }
            v /= s;
            log_survival += s.ln();
        }
        Ok(ConditionedLaw {
            law: Measure::on_states(v.iter().map(|x| x.max(0.0)).collect())?,
            survival: log_survival.exp(),
            log_survival,
        })
    }

    /// Conditioned laws at every `t = 0..=horizon`.
    pub fn conditioned_path(&self, pi: &Measure, horizon: u64) -> Result<Vec<Measure>> {
        self.check_distribution(pi)?;
        let mut v = DVector::from_column_slice(pi.weights());
        let mut out = Vec::with_capacity(horizon as usize + 1);
        out.push(pi.clone());
        for _ in 0..horizon {
            v = self.q.tr_mul(&v);
            let s = v.sum();
            if !(s > 0.0) {
                return Err(Error::ZeroSurvival);
            }
            v /= s;
            out.push(Measure::on_states(v.iter().map(|x| x.max(0.0)).collect())?);
        }
        Ok(out)
    }
}

fn bool_square(b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = b.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).any(|k| b[i][k] && b[k][j])).collect()).collect()
}
