//! Tridiagonal matrices and the Thomas algorithm.
//!
//! Row `i` reads `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`;
//! `lower[0]` and `upper[n-1]` are ignored.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() != n || upper.len() != n {
            return Err(Error::Domain(format!(
                "tridiagonal bands must share a nonzero length (lower {}, diag {}, upper {})",
                lower.len(),
                n,
                upper.len()
            )));
        }
        Ok(Self { lower, diag, upper })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        debug_assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    /// `shift I + scale A`.
    pub fn affine(&self, shift: f64, scale: f64) -> Self {
        Self {
            lower: self.lower.iter().map(|a| scale * a).collect(),
            diag: self.diag.iter().map(|a| shift + scale * a).collect(),
            upper: self.upper.iter().map(|a| scale * a).collect(),
        }
    }

    /// Induced max norm (largest absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.lower[i].abs();
                }
                if i + 1 < n {
                    s += self.upper[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// LU factorization without pivoting.
    pub fn factor(&self) -> Result<TridiagonalLu> {
        let n = self.len();
        let mut c_prime = vec![0.0; n];
        let mut inv_denom = vec![0.0; n];
        let mut denom = self.diag[0];
        for i in 0..n {
            if i > 0 {
                denom = self.diag[i] - self.lower[i] * c_prime[i - 1];
            }
            if !denom.is_finite() || denom.abs() <= f64::EPSILON * self.diag[i].abs().max(1e-300) {
                return Err(Error::LinearSolve(format!("zero pivot at row {i}")));
            }
            inv_denom[i] = 1.0 / denom;
            if i + 1 < n {
                c_prime[i] = self.upper[i] * inv_denom[i];
            }
        }
        Ok(TridiagonalLu {
            lower: self.lower.clone(),
            c_prime,
            inv_denom,
        })
    }

    /// Solve `A x = rhs` with a fresh factorization.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = rhs.to_vec();
        self.factor()?.solve_in_place(&mut x)?;
        Ok(x)
    }
}

/// Reusable Thomas factorization.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    c_prime: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl TridiagonalLu {
    pub fn len(&self) -> usize {
        self.inv_denom.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_denom.is_empty()
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        let n = self.len();
        if x.len() != n {
            return Err(Error::GridMismatch { expected: n, found: x.len() });
        }
        x[0] *= self.inv_denom[0];
        for i in 1..n {
            x[i] = (x[i] - self.lower[i] * x[i - 1]) * self.inv_denom[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.c_prime[i] * x[i + 1];
        }
        if x.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::LinearSolve("non-finite solution".into()))
        }
    }
}
