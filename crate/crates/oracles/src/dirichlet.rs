//! Finite-difference Dirichlet eigensolver for (sigma^2/2) d^2/dx^2 on an
//! interval, by Sturm-sequence bisection and inverse iteration.

pub struct DirichletFd {
    a: f64,
    b: f64,
    n: usize,
    diag: f64,
    off: f64,
}

impl DirichletFd {
    /// `n` interior points, diffusion coefficient `sigma`.
    pub fn new(a: f64, b: f64, n: usize, sigma: f64) -> Self {
        let h = (b - a) / (n + 1) as f64;
        let s2 = sigma * sigma;
        Self { a, b, n, diag: s2 / (h * h), off: -0.5 * s2 / (h * h) }
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.n + 1) as f64
    }

    /// Number of eigenvalues of the (positive) operator strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = self.diag - x;
        if d < 0.0 {
            count += 1;
        }
        for _ in 1..self.n {
            let prev = if d == 0.0 { 1e-300 } else { d };
            d = self.diag - x - self.off * self.off / prev;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// k-th smallest eigenvalue (k = 0 is the principal one): the killing
    /// rate lambda_k of the continuous problem, up to discretisation error.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let mut lo = 0.0;
        let mut hi = self.diag + 2.0 * self.off.abs();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for the k-th eigenvalue on the interior grid, max-normalised
    /// and positive at its largest entry.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        let lambda = self.eigenvalue(k);
        let shift = lambda - 1e-9 * lambda.abs().max(1.0);
        let mut v: Vec<f64> = (0..self.n).map(|i| 1.0 + 0.1 * (i as f64).sin()).collect();
        for _ in 0..8 {
            v = self.solve_shifted(shift, &v);
            let m = v.iter().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { *x } else { acc });
            v.iter_mut().for_each(|x| *x /= m);
        }
        v
    }

    fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        // Thomas algorithm on the constant tridiagonal (off, diag - shift, off).
        let n = self.n;
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let b0 = self.diag - shift;
        c[0] = self.off / b0;
        d[0] = rhs[0] / b0;
        for i in 1..n {
            let m = b0 - self.off * c[i - 1];
            c[i] = self.off / m;
            d[i] = (rhs[i] - self.off * d[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }

    /// Grid coordinates of the interior points.
    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (1..=self.n).map(|i| self.a + i as f64 * h).collect()
    }

    /// Integrates the piecewise-linear interpolant of `values` (zero at both
    /// ends) over each cell of a uniform grid with `bins` cells, normalised
    /// to total mass 1.
    pub fn binned_profile(&self, values: &[f64], bins: usize) -> Vec<f64> {
        let h = self.spacing();
        let mut nodes = Vec::with_capacity(self.n + 2);
        nodes.push((self.a, 0.0));
        for (i, v) in values.iter().enumerate() {
            nodes.push((self.a + (i + 1) as f64 * h, *v));
        }
        nodes.push((self.b, 0.0));
        let width = (self.b - self.a) / bins as f64;
        let mut out = vec![0.0; bins];
        for (j, slot) in out.iter_mut().enumerate() {
            let lo = self.a + j as f64 * width;
            let hi = if j + 1 == bins { self.b } else { lo + width };
            *slot = integrate_linear(&nodes, lo, hi);
        }
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|w| *w /= total);
        out
    }
}

fn integrate_linear(nodes: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    let mut total = 0.0;
    for w in nodes.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        let a = x0.max(lo);
        let b = x1.min(hi);
        if b <= a {
            continue;
        }
        let at = |x: f64| y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        total += 0.5 * (at(a) + at(b)) * (b - a);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn brownian_motion_on_zero_pi() {
        let fd = DirichletFd::new(0.0, PI, 1024, 1.0);
        assert!((fd.eigenvalue(0) - 0.5).abs() < 1e-5);
        assert!((fd.eigenvalue(1) - 2.0).abs() < 1e-4);
        let v = fd.eigenvector(0);
        let pts = fd.points();
        for (x, y) in pts.iter().zip(&v).step_by(97) {
            assert!((y - x.sin()).abs() < 1e-5, "{x} {y}");
        }
        let prof = fd.binned_profile(&v, 64);
        let exact_first = 0.5 * (1.0 - (PI / 64.0).cos());
        assert!((prof[0] - exact_first).abs() < 1e-6);
    }
}
