use super::RateWindow;
use crate::error::{Error, Result};

/// Decay-rate estimate with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    /// Coefficient of determination of the log-linear fit; `None` for rebirth averages.
    pub r_squared: Option<f64>,
    /// Standard error of the rate (regression slope, or mean of window rates).
    pub se: f64,
    pub points: usize,
}

/// Least-squares line `y = a + b t`, returning `(a, b, r^2, se(b))`.
pub fn linear_fit(t: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|v| (v - mt).powi(2)).sum();
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mt;
    let sse: f64 = t.iter().zip(y).map(|(a0, b0)| (b0 - a - b * a0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let se = if n > 2.0 { (sse / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (a, b, r2, se)
}

/// Exponential rate of a decaying positive series: the least-squares slope
/// of `-ln p` against `t`.
pub fn exponential_rate(times: &[f64], values: &[f64]) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(Error::InvalidArgument("times and values differ in length".into()));
    }
    if times.len() < 5 {
        return Err(Error::InsufficientPoints { needed: 5, got: times.len() });
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::InvalidArgument(format!("series value {v} is not positive")));
    }
    let y: Vec<f64> = values.iter().map(|v| -v.ln()).collect();
    let (_, b, r2, se) = linear_fit(times, &y);
    Ok(RateFit { rate: b, r_squared: Some(r2), se, points: times.len() })
}

/// `lambda_0` from survival probabilities `P(t_i < tau)`.
pub fn lambda0_from_survival(times: &[f64], survival: &[f64]) -> Result<RateFit> {
    exponential_rate(times, survival)
}

/// `lambda_0` as the mean rebirth rate per particle over windows lying in `[from, to]`.
pub fn lambda0_from_rebirths(series: &[RateWindow], from: f64, to: f64) -> Result<RateFit> {
    let picked: Vec<f64> = series.iter().filter(|w| w.start >= from - 1e-9 && w.end <= to + 1e-9).map(|w| w.rate).collect();
    if picked.len() < 2 {
        return Err(Error::InsufficientPoints { needed: 2, got: picked.len() });
    }
    let n = picked.len() as f64;
    let mean = picked.iter().sum::<f64>() / n;
    let var = picked.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(RateFit { rate: mean, r_squared: None, se: (var / n).sqrt(), points: picked.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let t: Vec<f64> = (0..10).map(|i| i as f64 * 0.7).collect();
        let p: Vec<f64> = t.iter().map(|t| (-0.5 * t).exp()).collect();
        let f = lambda0_from_survival(&t, &p).unwrap();
        assert!((f.rate - 0.5).abs() < 1e-13);
        assert!((f.r_squared.unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_series() {
        assert!(lambda0_from_survival(&[0.0, 1.0, 2.0], &[1.0, 0.5, 0.2]).is_err());
        assert!(lambda0_from_survival(&[0.0, 1.0, 2.0, 3.0, 4.0], &[1.0, 0.5, 0.0, 0.1, 0.1]).is_err());
    }

    #[test]
    fn rebirth_mean_over_window() {
        let s: Vec<RateWindow> =
            (0..10).map(|i| RateWindow { start: i as f64, end: i as f64 + 1.0, rate: if i < 5 { 3.0 } else { 0.5 } }).collect();
        let f = lambda0_from_rebirths(&s, 5.0, 10.0).unwrap();
        assert_eq!(f.rate, 0.5);
        assert_eq!(f.points, 5);
    }
}
