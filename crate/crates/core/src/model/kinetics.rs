//! Closed descriptor families for growth and flocculation rates.

use crate::{Error, Result};

/// Per-capita growth rate as a function of substrate concentration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthRate {
    /// `a S / (b + S)`.
    Monod { a: f64, b: f64 },
    /// `a S / (b + S + c S^2)`.
    Haldane { a: f64, b: f64, c: f64 },
    Zero,
}

impl GrowthRate {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            GrowthRate::Monod { a, b } => a >= 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
            GrowthRate::Haldane { a, b, c } => {
                a >= 0.0 && b > 0.0 && c >= 0.0 && a.is_finite() && b.is_finite() && c.is_finite()
            }
            GrowthRate::Zero => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidKinetics(format!(
                "{self:?}: need a >= 0, b > 0, c >= 0"
            )))
        }
    }

    /// Evaluate at `s >= 0`.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("substrate must be nonnegative, got {s}")));
        }
        Ok(self.eval_unchecked(s))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, s: f64) -> f64 {
        match *self {
            GrowthRate::Monod { a, b } => a * s / (b + s),
            GrowthRate::Haldane { a, b, c } => a * s / (b + s + c * s * s),
            GrowthRate::Zero => 0.0,
        }
    }

    /// Supremum over `S >= 0`.
    pub fn supremum(&self) -> f64 {
        match *self {
            GrowthRate::Monod { a, .. } => a,
            GrowthRate::Haldane { a, .. } if a == 0.0 => 0.0,
            GrowthRate::Haldane { a, b, c } => {
                if c == 0.0 {
                    a
                } else {
                    let s = (b / c).sqrt();
                    a * s / (b + s + c * s * s)
                }
            }
            GrowthRate::Zero => 0.0,
        }
    }

    /// Nondecreasing on `[0, upper]`.
    pub fn nondecreasing_on(&self, upper: f64) -> bool {
        match *self {
            GrowthRate::Monod { .. } | GrowthRate::Zero => true,
            GrowthRate::Haldane { b, c, .. } => c == 0.0 || (b / c).sqrt() >= upper,
        }
    }
}

/// Flocculation or deflocculation rate as a function of the isolated and
/// attached biomass vectors. Every family depends on them only through the
/// totals `U = sum u_j` and `V = sum v_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlocRate {
    Constant(f64),
    /// `c (U + V)`.
    LinearSum(f64),
    /// `(U + V) V`.
    PaperAlpha,
    /// `(1 + V)(U + V)`.
    PaperBeta,
    /// `c (U + V)^l`.
    PolynomialSum { c: f64, l: f64 },
}

impl FlocRate {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            FlocRate::Constant(c) | FlocRate::LinearSum(c) => c >= 0.0 && c.is_finite(),
            FlocRate::PaperAlpha | FlocRate::PaperBeta => true,
            FlocRate::PolynomialSum { c, l } => c >= 0.0 && l >= 0.0 && c.is_finite() && l.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidKinetics(format!("{self:?}: coefficients must be nonnegative")))
        }
    }

    pub fn eval(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        if let Some(x) = u.iter().chain(v).find(|x| !(**x >= 0.0)) {
            return Err(Error::Domain(format!("biomass must be nonnegative, got {x}")));
        }
        Ok(self.eval_totals(u.iter().sum(), v.iter().sum()))
    }

    #[inline]
    pub(crate) fn eval_totals(&self, su: f64, sv: f64) -> f64 {
        match *self {
            FlocRate::Constant(c) => c,
            FlocRate::LinearSum(c) => c * (su + sv),
            FlocRate::PaperAlpha => (su + sv) * sv,
            FlocRate::PaperBeta => (1.0 + sv) * (su + sv),
            FlocRate::PolynomialSum { c, l } => {
                if l == 0.0 {
                    c
                } else {
                    c * (su + sv).powf(l)
                }
            }
        }
    }

    /// Polynomial degree in the biomass totals.
    pub fn degree(&self) -> f64 {
        match *self {
            FlocRate::Constant(_) => 0.0,
            FlocRate::LinearSum(_) => 1.0,
            FlocRate::PaperAlpha | FlocRate::PaperBeta => 2.0,
            FlocRate::PolynomialSum { l, .. } => l,
        }
    }

    /// Global upper bound, when the rate is bounded.
    pub fn bound(&self) -> Option<f64> {
        match *self {
            FlocRate::Constant(c) => Some(c),
            FlocRate::LinearSum(c) if c == 0.0 => Some(0.0),
            FlocRate::PolynomialSum { c, l } if l == 0.0 || c == 0.0 => Some(c),
            _ => None,
        }
    }

    /// Vanishes whenever `V = 0`, i.e. `rate(u, 0) = 0`.
    pub fn vanishes_without_attached(&self) -> bool {
        match *self {
            FlocRate::PaperAlpha => true,
            FlocRate::Constant(c) | FlocRate::LinearSum(c) => c == 0.0,
            FlocRate::PolynomialSum { c, .. } => c == 0.0,
            FlocRate::PaperBeta => false,
        }
    }

    /// Vanishes whenever `U = 0`, i.e. `rate(0, v) = 0`.
    pub fn vanishes_without_isolated(&self) -> bool {
        match *self {
            FlocRate::Constant(c) | FlocRate::LinearSum(c) => c == 0.0,
            FlocRate::PolynomialSum { c, .. } => c == 0.0,
            FlocRate::PaperAlpha | FlocRate::PaperBeta => false,
        }
    }

    /// Strictly positive on the whole nonnegative orthant.
    pub fn strictly_positive(&self) -> bool {
        matches!(*self, FlocRate::Constant(c) if c > 0.0)
    }
}

/// Kinetic descriptors of every species.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticsSpec {
    growth_f: Vec<GrowthRate>,
    growth_g: Vec<GrowthRate>,
    floc_alpha: Vec<FlocRate>,
    floc_beta: Vec<FlocRate>,
}

impl KineticsSpec {
    pub fn new(
        growth_f: Vec<GrowthRate>,
        growth_g: Vec<GrowthRate>,
        floc_alpha: Vec<FlocRate>,
        floc_beta: Vec<FlocRate>,
    ) -> Result<Self> {
        let m = growth_f.len();
        if m == 0 || growth_g.len() != m || floc_alpha.len() != m || floc_beta.len() != m {
            return Err(Error::InvalidKinetics(format!(
                "descriptor lists must share one nonzero length (f {}, g {}, alpha {}, beta {})",
                m,
                growth_g.len(),
                floc_alpha.len(),
                floc_beta.len()
            )));
        }
        for g in growth_f.iter().chain(&growth_g) {
            g.validate()?;
        }
        for r in floc_alpha.iter().chain(&floc_beta) {
            r.validate()?;
        }
        Ok(Self { growth_f, growth_g, floc_alpha, floc_beta })
    }

    /// Single-species kinetics.
    pub fn single(f: GrowthRate, g: GrowthRate, alpha: FlocRate, beta: FlocRate) -> Result<Self> {
        Self::new(vec![f], vec![g], vec![alpha], vec![beta])
    }

    pub fn m(&self) -> usize {
        self.growth_f.len()
    }

    pub fn f(&self, i: usize) -> &GrowthRate {
        &self.growth_f[i]
    }

    pub fn g(&self, i: usize) -> &GrowthRate {
        &self.growth_g[i]
    }

    pub fn alpha(&self, i: usize) -> &FlocRate {
        &self.floc_alpha[i]
    }

    pub fn beta(&self, i: usize) -> &FlocRate {
        &self.floc_beta[i]
    }

    pub fn growth_f(&self) -> &[GrowthRate] {
        &self.growth_f
    }

    pub fn growth_g(&self) -> &[GrowthRate] {
        &self.growth_g
    }

    pub fn floc_alpha(&self) -> &[FlocRate] {
        &self.floc_alpha
    }

    pub fn floc_beta(&self) -> &[FlocRate] {
        &self.floc_beta
    }
}
