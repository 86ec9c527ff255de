use crate::diffusion::{Domain, McConfig};
use crate::error::{Error, Result};

/// Interior probe points, a time grid, ball radii and a per-probe budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeGrid {
    pub points: Vec<Vec<f64>>,
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    pub mc: McConfig,
}

impl ProbeGrid {
    pub fn new(domain: &Domain, points: Vec<Vec<f64>>, times: Vec<f64>, radii: Vec<f64>, mc: McConfig) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("probe grid has no points".into()));
        }
        if let Some(p) = points.iter().find(|p| !domain.contains(p)) {
            return Err(Error::OutsideDomain(p.clone()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| *t < 0.0) {
            return Err(Error::InvalidArgument("probe times must be nonnegative and increasing".into()));
        }
        Ok(Self { points, times, radii, mc })
    }

    /// Points at the given boundary distances next to every face of an
    /// interval or box (along the axis through the centre), plus `interior`
    /// evenly spaced points on the central axis segment.
    pub fn stratified(domain: &Domain, distances: &[f64], interior: usize) -> Result<Vec<Vec<f64>>> {
        let (lo, hi) = domain.bounding_box();
        let centre: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let mut out = Vec::new();
        for k in 0..lo.len() {
            for &d in distances {
                for (edge, sign) in [(lo[k], 1.0), (hi[k], -1.0)] {
                    let mut p = centre.clone();
                    p[k] = edge + sign * d;
                    if let Domain::Ball { center, radius } = domain {
                        p = center.clone();
                        p[k] += -sign * (radius - d);
                    }
                    if domain.contains(&p) && !out.contains(&p) {
                        out.push(p);
                    }
                }
            }
        }
        for i in 0..interior {
            let mut p = centre.clone();
            let frac = (i as f64 + 1.0) / (interior as f64 + 1.0);
            p[0] = lo[0] + frac * (hi[0] - lo[0]);
            if domain.contains(&p) && !out.contains(&p) {
                out.push(p);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Ok(out)
    }

    /// Budget for probe number `id`, with a seed derived from the master seed.
    pub fn probe_mc(&self, id: u64) -> McConfig {
        self.mc.clone().with_seed(probe_seed(self.mc.seed, id))
    }
}

/// Seed of probe `id` under `master`, via two rounds of SplitMix64 mixing.
pub fn probe_seed(master: u64, id: u64) -> u64 {
    splitmix(master ^ splitmix(id.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stratified_interval() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        let pts = ProbeGrid::stratified(&d, &[0.01, 0.1], 3).unwrap();
        let xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99]);
    }

    #[test]
    fn rejects_exterior_and_unsorted() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        let mc = McConfig::new(100, 1, 1e-3);
        assert!(ProbeGrid::new(&d, vec![vec![1.2]], vec![1.0], vec![], mc.clone()).is_err());
        assert!(ProbeGrid::new(&d, vec![vec![0.2]], vec![1.0, 0.5], vec![], mc).is_err());
    }

    #[test]
    fn probe_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|i| probe_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_ne!(probe_seed(7, 0), probe_seed(8, 0));
    }
}
