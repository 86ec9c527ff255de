//! Error function and Brownian survival on an interval.

use std::f64::consts::PI;

/// erf(x), accurate to about 1e-15 absolute.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x < 2.5 {
        // Maclaurin series; alternating terms stay well conditioned here.
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -x2 / n;
            let contrib = term / (2.0 * n + 1.0);
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        2.0 / PI.sqrt() * sum
    } else {
        1.0 - erfc_cf(x)
    }
}

/// erfc(x) for x >= 0 via the Laplace continued fraction (modified Lentz).
fn erfc_cf(x: f64) -> f64 {
    // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...))))
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / PI.sqrt() / f
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// P_x(t < tau) for standard Brownian motion killed outside (0, len),
/// summed by the method of images.
pub fn interval_survival_images(x: f64, t: f64, len: f64) -> f64 {
    if t == 0.0 {
        return if x > 0.0 && x < len { 1.0 } else { 0.0 };
    }
    let s = t.sqrt();
    let mut total = 0.0;
    let terms = 8 + (s / len).ceil() as i64 * 4;
    for n in -terms..=terms {
        let shift = 2.0 * n as f64 * len;
        let direct = normal_cdf((len - x + shift) / s) - normal_cdf((-x + shift) / s);
        let image = normal_cdf((len + x + shift) / s) - normal_cdf((x + shift) / s);
        total += direct - image;
    }
    total
}

/// The same survival probability summed over Dirichlet eigenmodes; only
/// accurate once t is not small compared with len^2.
pub fn interval_survival_modes(x: f64, t: f64, len: f64, modes: usize) -> f64 {
    let mut total = 0.0;
    for k in (1..=modes).step_by(2) {
        let kf = k as f64;
        total += 4.0 / (kf * PI)
            * (kf * PI * x / len).sin()
            * (-kf * kf * PI * PI * t / (2.0 * len * len)).exp();
    }
    total
}
