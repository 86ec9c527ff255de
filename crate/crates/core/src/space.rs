//! State spaces `E ∪ {∂}` with their metric and boundary distance.

use crate::diffusion::Domain;
use crate::error::{invalid, Result};

/// A point of `E ∪ {∂}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    State(usize),
    Coord(Vec<f64>),
    Cemetery,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceKind {
    /// `n` states; discrete metric unless an embedding is supplied.
    Finite {
        n: usize,
        embedding: Option<Vec<Vec<f64>>>,
        boundary: Vec<f64>,
    },
    /// Open domain with its boundary collapsed to the cemetery point.
    Euclidean(Domain),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    kind: SpaceKind,
}

impl StateSpace {
    /// Discrete metric, every state at distance 1 from `∂`.
    pub fn finite(n: usize) -> Self {
        Self { kind: SpaceKind::Finite { n, embedding: None, boundary: vec![1.0; n] } }
    }

    /// States embedded in R^d with a user-supplied distance to `∂`.
    pub fn finite_embedded(coords: Vec<Vec<f64>>, boundary: Vec<f64>) -> Result<Self> {
        if coords.len() != boundary.len() || boundary.iter().any(|d| !(*d > 0.0)) {
            return invalid("embedding needs one positive boundary distance per state");
        }
        Ok(Self { kind: SpaceKind::Finite { n: coords.len(), embedding: Some(coords), boundary } })
    }

    pub fn euclidean(domain: Domain) -> Self {
        Self { kind: SpaceKind::Euclidean(domain) }
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    /// `rho_∂`; zero at the cemetery and on or outside the boundary.
    pub fn boundary_distance(&self, p: &Point) -> f64 {
        match (&self.kind, p) {
            (_, Point::Cemetery) => 0.0,
            (SpaceKind::Finite { boundary, .. }, Point::State(i)) => boundary[*i],
            (SpaceKind::Euclidean(d), Point::Coord(x)) => d.boundary_distance(x).max(0.0),
            _ => f64::NAN,
        }
    }

    /// Metric on `E ∪ {∂}`. For domains this is the quotient metric
    /// `min(|x - y|, rho_∂(x) + rho_∂(y))`, i.e. the boundary is one point.
    pub fn metric(&self, p: &Point, q: &Point) -> f64 {
        match (p, q) {
            (Point::Cemetery, Point::Cemetery) => 0.0,
            (Point::Cemetery, x) | (x, Point::Cemetery) => self.boundary_distance(x),
            (Point::State(i), Point::State(j)) => match &self.kind {
                SpaceKind::Finite { embedding: None, boundary, .. } => {
                    if i == j {
                        0.0
                    } else {
                        1.0f64.min(boundary[*i] + boundary[*j])
                    }
                }
                SpaceKind::Finite { embedding: Some(e), boundary, .. } => {
                    crate::diffusion::domain::norm_diff(&e[*i], &e[*j]).min(boundary[*i] + boundary[*j])
                }
                _ => f64::NAN,
            },
            (Point::Coord(x), Point::Coord(y)) => {
                let direct = crate::diffusion::domain::norm_diff(x, y);
                direct.min(self.boundary_distance(p) + self.boundary_distance(q))
            }
            _ => f64::NAN,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_defaults() {
        let s = StateSpace::finite(3);
        assert_eq!(s.metric(&Point::State(0), &Point::State(2)), 1.0);
        assert_eq!(s.metric(&Point::State(1), &Point::State(1)), 0.0);
        assert_eq!(s.metric(&Point::State(1), &Point::Cemetery), 1.0);
        assert_eq!(s.boundary_distance(&Point::Cemetery), 0.0);
    }

    #[test]
    fn quotient_metric_satisfies_triangle_inequality() {
        let s = StateSpace::euclidean(Domain::interval(0.0, 1.0).unwrap());
        let pts: Vec<Point> = (0..25)
            .map(|i| Point::Coord(vec![0.01 + 0.98 * i as f64 / 24.0]))
            .chain(std::iter::once(Point::Cemetery))
            .collect();
        for a in &pts {
            for b in &pts {
                assert_eq!(s.metric(a, b), s.metric(b, a));
                for c in &pts {
                    assert!(s.metric(a, b) <= s.metric(a, c) + s.metric(c, b) + 1e-15);
                }
            }
        }
        let near = Point::Coord(vec![0.02]);
        assert!((s.metric(&near, &Point::Cemetery) - 0.02).abs() < 1e-15);
        assert!((s.metric(&near, &Point::Coord(vec![0.97])) - 0.05).abs() < 1e-12);
    }
}
