//! Principal eigenpairs of `-d phi'' +- phi' = lambda phi` on `(0, 1)`.
//!
//! Both variants are discretized with the stencils of [`crate::operator`] and
//! solved by shifted inverse iteration. The shift `1/(4d)` is a lower bound of
//! the principal eigenvalue (writing `phi = e^{x/(2d)} psi` turns the problem
//! into `-d psi'' = (lambda - 1/(4d)) psi`), which keeps the convergence ratio
//! bounded away from one as `d -> 0`.

use std::f64::consts::PI;

use crate::operator::transport_matrix;
use crate::{Error, Grid, Result};

pub const DEFAULT_GRID_N: usize = 401;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Boundary conditions of the eigenproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryVariant {
    /// `-d phi'' + phi'`, `-d phi'(0) + phi(0) = 0`, `phi'(1) = 0`.
    InflowRobin,
    /// `-d phi'' - phi'`, `phi'(0) = 0`, `d phi'(1) + phi(1) = 0`.
    OutflowRobin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenControls {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for EigenControls {
    fn default() -> Self {
        Self { max_iter: DEFAULT_MAX_ITER, tol: DEFAULT_TOL }
    }
}

/// Converged principal eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    d: f64,
    variant: BoundaryVariant,
    lambda: f64,
    phi: Vec<f64>,
    grid: Grid,
    residual: f64,
    iterations: usize,
}

impl EigenPair {
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn variant(&self) -> BoundaryVariant {
        self.variant
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn grid_n(&self) -> usize {
        self.grid.n()
    }

    /// Relative residual `||A phi - lambda phi|| / (||A|| ||phi||)` at convergence.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Recompute the relative residual of the current `phi`.
    pub fn recompute_residual(&self) -> Result<f64> {
        let a = transport_matrix(self.d, self.variant, &self.grid)?;
        Ok(relative_residual(&a.apply(&self.phi), &self.phi, self.lambda, a.norm_inf()))
    }

    pub fn into_phi(self) -> Vec<f64> {
        self.phi
    }
}

/// Principal eigenpair on `grid_n` nodes with default controls.
pub fn solve_principal(d: f64, variant: BoundaryVariant, grid_n: usize) -> Result<EigenPair> {
    solve_principal_with(d, variant, &Grid::new(grid_n)?, EigenControls::default())
}

pub fn solve_principal_with(
    d: f64,
    variant: BoundaryVariant,
    grid: &Grid,
    controls: EigenControls,
) -> Result<EigenPair> {
    let a = transport_matrix(d, variant, grid)?;
    let norm = a.norm_inf();
    let n = grid.n();
    let shift = 1.0 / (4.0 * d);
    let lu = match a.affine(-shift, 1.0).factor() {
        Ok(lu) => lu,
        // the shift hit an eigenvalue to working precision
        Err(_) => a.affine(-shift * (1.0 - 1e-6), 1.0).factor()?,
    };

    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut lambda = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 1..=controls.max_iter {
        y.copy_from_slice(&x);
        lu.solve_in_place(&mut y)?;
        let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let yy: f64 = y.iter().map(|b| b * b).sum();
        let lambda_new = shift + xy / yy;
        let peak = y.iter().copied().fold(0.0_f64, |m, b| if b.abs() > m.abs() { b } else { m });
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / peak;
        }
        residual = relative_residual(&a.apply(&x), &x, lambda_new, norm);
        let settled = (lambda_new - lambda).abs() <= controls.tol * lambda_new.abs();
        lambda = lambda_new;
        if residual < controls.tol && settled {
            if let Some(j) = x.iter().position(|v| *v <= 0.0) {
                return Err(Error::LinearSolve(format!(
                    "principal eigenvector not positive at node {j} (d = {d}); refine the grid"
                )));
            }
            return Ok(EigenPair {
                d,
                variant,
                lambda,
                phi: x,
                grid: grid.clone(),
                residual,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence { iterations: controls.max_iter, residual })
}

fn relative_residual(ax: &[f64], x: &[f64], lambda: f64, norm: f64) -> f64 {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let r = ax.iter().zip(x).fold(0.0_f64, |m, (a, b)| m.max((a - lambda * b).abs()));
    r / (norm * scale)
}

/// Analytic enclosure of the principal eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bracket {
    /// `1/(4d) + pi^2 d / 4 < lambda < 1/(4d) + pi^2 d`, valid for `d < 1/(2 pi)`.
    Bounded { lower: f64, upper: f64 },
    /// Only `lambda > 1` is available.
    Asymptote,
}

impl Bracket {
    pub fn lower(&self) -> f64 {
        match self {
            Bracket::Bounded { lower, .. } => *lower,
            Bracket::Asymptote => 1.0,
        }
    }

    pub fn upper(&self) -> f64 {
        match self {
            Bracket::Bounded { upper, .. } => *upper,
            Bracket::Asymptote => f64::INFINITY,
        }
    }

    /// Open-interval membership.
    pub fn contains(&self, lambda: f64) -> bool {
        lambda > self.lower() && lambda < self.upper()
    }
}

pub fn lambda_bracket(d: f64) -> Result<Bracket> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!("diffusivity must be positive, got {d}")));
    }
    if d < 1.0 / (2.0 * PI) {
        let base = 1.0 / (4.0 * d);
        Ok(Bracket::Bounded {
            lower: base + PI * PI * d / 4.0,
            upper: base + PI * PI * d,
        })
    } else {
        Ok(Bracket::Asymptote)
    }
}

/// Pointwise normalization requests for [`rescale_eigenfunction`].
#[derive(Debug, Clone, Copy)]
pub enum Rescale<'a> {
    /// `max phi = 1`.
    MaxOne,
    /// Largest scaling with `phi <= factor * other.phi` at every node.
    DominatedBy { other: &'a EigenPair, factor: f64 },
    /// `min phi = c`.
    MinValue(f64),
    /// `max phi = c`.
    MaxValue(f64),
}

/// Multiply `phi` by the largest positive constant meeting `mode`.
pub fn rescale_eigenfunction(pair: &EigenPair, mode: Rescale<'_>) -> Result<EigenPair> {
    let positive = |c: f64, what: &str| {
        if c > 0.0 && c.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} must be positive, got {c}")))
        }
    };
    let max = pair.phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = pair.phi.iter().copied().fold(f64::INFINITY, f64::min);
    let c = match mode {
        Rescale::MaxOne => 1.0 / max,
        Rescale::MaxValue(c) => {
            positive(c, "target maximum")?;
            c / max
        }
        Rescale::MinValue(c) => {
            positive(c, "target minimum")?;
            c / min
        }
        Rescale::DominatedBy { other, factor } => {
            positive(factor, "domination factor")?;
            if other.grid != pair.grid {
                return Err(Error::GridMismatch { expected: pair.grid.n(), found: other.grid.n() });
            }
            pair.phi
                .iter()
                .zip(&other.phi)
                .map(|(p, q)| factor * q / p)
                .fold(f64::INFINITY, f64::min)
        }
    };
    let mut out = pair.clone();
    for p in &mut out.phi {
        *p *= c;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_examples() {
        let b = lambda_bracket(0.1).unwrap();
        assert!((b.lower() - 2.74674).abs() < 1e-5);
        assert!((b.upper() - 3.48696).abs() < 1e-5);
        let b = lambda_bracket(0.05).unwrap();
        assert!((b.lower() - 5.12337).abs() < 1e-5);
        assert!((b.upper() - 5.49348).abs() < 1e-5);
        assert_eq!(lambda_bracket(1.0).unwrap(), Bracket::Asymptote);
        assert!(lambda_bracket(0.0).is_err());
    }

    #[test]
    fn eigenpair_is_positive_and_normalised() {
        for variant in [BoundaryVariant::InflowRobin, BoundaryVariant::OutflowRobin] {
            let p = solve_principal(0.3, variant, 101).unwrap();
            assert!(p.lambda() > 1.0);
            assert!(p.phi().iter().all(|v| *v > 0.0));
            let max = p.phi().iter().copied().fold(0.0, f64::max);
            assert!((max - 1.0).abs() < 1e-15);
            assert!(p.residual() < 1e-10);
        }
    }

    #[test]
    fn variants_share_spectrum() {
        let a = solve_principal(0.2, BoundaryVariant::InflowRobin, 201).unwrap();
        let b = solve_principal(0.2, BoundaryVariant::OutflowRobin, 201).unwrap();
        assert!((a.lambda() - b.lambda()).abs() < 1e-9 * a.lambda());
        // inflow eigenfunction increases, outflow decreases
        assert!(a.phi()[0] < a.phi()[200]);
        assert!(b.phi()[0] > b.phi()[200]);
    }

    #[test]
    fn rescaling_modes() {
        let a = solve_principal(0.5, BoundaryVariant::InflowRobin, 65).unwrap();
        let b = solve_principal(2.0, BoundaryVariant::InflowRobin, 65).unwrap();
        let r = rescale_eigenfunction(&a, Rescale::DominatedBy { other: &b, factor: 0.7 }).unwrap();
        let slack: Vec<f64> = r.phi().iter().zip(b.phi()).map(|(p, q)| 0.7 * q - p).collect();
        assert!(slack.iter().all(|s| *s >= -1e-15));
        assert!(slack.iter().any(|s| s.abs() < 1e-15));
        assert_eq!(r.lambda(), a.lambda());
        assert!((r.recompute_residual().unwrap() - a.recompute_residual().unwrap()).abs() < 1e-12);

        let m = rescale_eigenfunction(&r, Rescale::MinValue(0.25)).unwrap();
        let min = m.phi().iter().copied().fold(f64::INFINITY, f64::min);
        assert!((min - 0.25).abs() < 1e-15);
        let one = rescale_eigenfunction(&m, Rescale::MaxOne).unwrap();
        assert!((one.phi().iter().copied().fold(0.0, f64::max) - 1.0).abs() < 1e-15);

        let c = solve_principal(0.5, BoundaryVariant::InflowRobin, 33).unwrap();
        assert!(matches!(
            rescale_eigenfunction(&a, Rescale::DominatedBy { other: &c, factor: 1.0 }),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let g = Grid::new(101).unwrap();
        let e = solve_principal_with(0.05, BoundaryVariant::InflowRobin, &g, EigenControls {
            max_iter: 2,
            tol: 1e-14,
        })
        .unwrap_err();
        assert!(matches!(e, Error::NonConvergence { iterations: 2, residual } if residual.is_finite()));
    }
}
