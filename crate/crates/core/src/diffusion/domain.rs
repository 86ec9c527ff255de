use crate::error::{invalid, Result};

/// Bounded Euclidean domain with an exact signed distance to its boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return invalid(format!("interval ({a}, {b}) is empty"));
        }
        Ok(Domain::Interval { a, b })
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return invalid("box corners must satisfy lo < hi on every axis");
        }
        Ok(Domain::Box { lo, hi })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || !(radius > 0.0) {
            return invalid("ball needs a centre and a positive radius");
        }
        Ok(Domain::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Box { lo, .. } => lo.len(),
            Domain::Ball { center, .. } => center.len(),
        }
    }

    /// Signed distance to the boundary: positive inside, zero on the
    /// boundary, negative outside.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            Domain::Interval { a, b } => (x[0] - a).min(b - x[0]),
            Domain::Box { lo, hi } => {
                let inside = x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| v > l && v < h);
                if inside {
                    x.iter()
                        .zip(lo.iter().zip(hi))
                        .map(|(v, (l, h))| (v - l).min(h - v))
                        .fold(f64::INFINITY, f64::min)
                } else {
                    let sq: f64 = x
                        .iter()
                        .zip(lo.iter().zip(hi))
                        .map(|(v, (l, h))| {
                            let e = if v < l { l - v } else if v > h { v - h } else { 0.0 };
                            e * e
                        })
                        .sum();
                    -sq.sqrt()
                }
            }
            Domain::Ball { center, radius } => radius - norm_diff(x, center),
        }
    }

    /// Membership in the open domain.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().all(|v| v.is_finite()) && self.boundary_distance(x) > 0.0
    }

    /// Membership in `M_eps = { rho_boundary >= eps }`.
    pub fn in_inner(&self, x: &[f64], eps: f64) -> bool {
        self.boundary_distance(x) >= eps
    }

    /// Nearest boundary point and the outward unit normal there.
    pub fn boundary_projection(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Interval { a, b } => {
                if x[0] - a <= b - x[0] {
                    (vec![*a], vec![-1.0])
                } else {
                    (vec![*b], vec![1.0])
                }
            }
            Domain::Box { lo, hi } => {
                let mut best = (f64::INFINITY, 0, false);
                for k in 0..lo.len() {
                    let dl = x[k] - lo[k];
                    let dh = hi[k] - x[k];
                    if dl < best.0 {
                        best = (dl, k, false);
                    }
                    if dh < best.0 {
                        best = (dh, k, true);
                    }
                }
                let (_, k, upper) = best;
                let mut p: Vec<f64> = x.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| v.clamp(*l, *h)).collect();
                let mut n = vec![0.0; lo.len()];
                if upper {
                    p[k] = hi[k];
                    n[k] = 1.0;
                } else {
                    p[k] = lo[k];
                    n[k] = -1.0;
                }
                (p, n)
            }
            Domain::Ball { center, radius } => {
                let r = norm_diff(x, center);
                let dir: Vec<f64> = if r > 0.0 {
                    x.iter().zip(center).map(|(v, c)| (v - c) / r).collect()
                } else {
                    let mut e = vec![0.0; center.len()];
                    e[0] = 1.0;
                    e
                };
                let p = center.iter().zip(&dir).map(|(c, d)| c + radius * d).collect();
                (p, dir)
            }
        }
    }

    /// Writes the outward unit normal of the nearest boundary face into `out`.
    pub(crate) fn nearest_normal_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Domain::Interval { a, b } => out[0] = if x[0] - a <= b - x[0] { -1.0 } else { 1.0 },
            Domain::Box { lo, hi } => {
                let mut best = (f64::INFINITY, 0, -1.0);
                for k in 0..lo.len() {
                    if x[k] - lo[k] < best.0 {
                        best = (x[k] - lo[k], k, -1.0);
                    }
                    if hi[k] - x[k] < best.0 {
                        best = (hi[k] - x[k], k, 1.0);
                    }
                }
                out.iter_mut().for_each(|v| *v = 0.0);
                out[best.1] = best.2;
            }
            Domain::Ball { center, .. } => {
                let r = norm_diff(x, center);
                if r > 0.0 {
                    for ((o, v), c) in out.iter_mut().zip(x).zip(center) {
                        *o = (v - c) / r;
                    }
                } else {
                    out.iter_mut().for_each(|v| *v = 0.0);
                    out[0] = 1.0;
                }
            }
        }
    }

    /// Largest boundary distance attained in the domain.
    pub fn inradius(&self) -> f64 {
        match self {
            Domain::Interval { a, b } => 0.5 * (b - a),
            Domain::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (h - l)).fold(f64::INFINITY, f64::min),
            Domain::Ball { radius, .. } => *radius,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Interval { a, b } => b - a,
            Domain::Box { lo, hi } => norm_diff(lo, hi),
            Domain::Ball { radius, .. } => 2.0 * radius,
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Interval { a, b } => (vec![*a], vec![*b]),
            Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
            Domain::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }
}

pub(crate) fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*state >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn distances_are_one_lipschitz_and_positive_inside() {
        let domains = [
            Domain::interval(0.0, 2.0).unwrap(),
            Domain::boxed(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap(),
            Domain::ball(vec![0.0, 0.0, 0.0], 1.5).unwrap(),
        ];
        let mut s = 7u64;
        for d in &domains {
            let (lo, hi) = d.bounding_box();
            for _ in 0..500 {
                let x: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| l - 0.2 + (h - l + 0.4) * lcg(&mut s)).collect();
                let y: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| l - 0.2 + (h - l + 0.4) * lcg(&mut s)).collect();
                let gap = (d.boundary_distance(&x) - d.boundary_distance(&y)).abs();
                assert!(gap <= norm_diff(&x, &y) + 1e-12);
                assert_eq!(d.contains(&x), d.boundary_distance(&x) > 0.0);
                let (p, _) = d.boundary_projection(&x);
                assert!(d.boundary_distance(&p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn boundary_projection_is_nearest() {
        let d = Domain::boxed(vec![0.0, 0.0], vec![1.0, 3.0]).unwrap();
        let (p, n) = d.boundary_projection(&[0.8, 1.5]);
        assert_eq!(p, vec![1.0, 1.5]);
        assert_eq!(n, vec![1.0, 0.0]);
        assert!((d.boundary_distance(&[0.8, 1.5]) - 0.2).abs() < 1e-15);
        assert_eq!(d.inradius(), 0.5);
    }

    #[test]
    fn rejects_degenerate_domains() {
        assert!(Domain::interval(1.0, 1.0).is_err());
        assert!(Domain::boxed(vec![0.0], vec![0.0]).is_err());
        assert!(Domain::ball(vec![0.0], 0.0).is_err());
    }
}
