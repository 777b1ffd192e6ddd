//! Uniform node grid on `[0, 1]` and the quadratures used throughout.

use crate::{Error, Result};

/// Smallest admissible node count.
pub const MIN_NODES: usize = 16;

/// Uniform grid `x_j = j h`, `h = 1 / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::Domain(format!(
                "grid needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Composite trapezoid weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.h();
        let mut w = vec![h; self.n];
        w[0] = 0.5 * h;
        w[self.n - 1] = 0.5 * h;
        w
    }

    /// Composite trapezoid rule over the grid.
    pub fn trapezoid(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n);
        let inner: f64 = f[1..self.n - 1].iter().sum();
        self.h() * (inner + 0.5 * (f[0] + f[self.n - 1]))
    }

    /// Trapezoid rule of a pointwise product.
    pub fn trapezoid_product(&self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n);
        debug_assert_eq!(g.len(), self.n);
        let n = self.n;
        let inner: f64 = f[1..n - 1].iter().zip(&g[1..n - 1]).map(|(a, b)| a * b).sum();
        self.h() * (inner + 0.5 * (f[0] * g[0] + f[n - 1] * g[n - 1]))
    }

    /// Sample a function of `x` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|j| f(self.x(j))).collect()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n {
            Ok(())
        } else {
            Err(Error::GridMismatch { expected: self.n, found: len })
        }
    }
}

/// Maximum norm.
pub fn sup_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Maximum norm of a difference.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coarse_grids() {
        assert!(Grid::new(15).is_err());
        assert!(Grid::new(16).is_ok());
    }

    #[test]
    fn trapezoid_exact_on_linear() {
        let g = Grid::new(33).unwrap();
        let f = g.sample(|x| 3.0 * x + 1.0);
        assert!((g.trapezoid(&f) - 2.5).abs() < 1e-14);
        let w = g.trapezoid_weights();
        let s: f64 = w.iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_second_order() {
        let exact = 1.0 - (-1.0_f64).exp();
        let err = |n| {
            let g = Grid::new(n).unwrap();
            (g.trapezoid(&g.sample(|x| (-x).exp())) - exact).abs()
        };
        let rate = (err(51) / err(101)).log2();
        assert!(rate > 1.95 && rate < 2.05, "rate {rate}");
    }
}
