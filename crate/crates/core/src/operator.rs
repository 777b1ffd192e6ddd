//! Finite-difference stencils of the advection-diffusion operator.
//!
//! The inflow variant discretizes `L w = -d w'' + w'` with
//! `-d w'(0) + w(0) = 0`, `w'(1) = 0`; the outflow variant discretizes the
//! formal adjoint `L* w = -d w'' - w'` with `w'(0) = 0`, `d w'(1) + w(1) = 0`.
//! Boundary rows eliminate a ghost node through the centred second-order
//! approximation of the boundary derivative, so both matrices stay tridiagonal
//! and second-order accurate.

use crate::eigen::BoundaryVariant;
use crate::tridiag::Tridiagonal;
use crate::{Error, Grid, Result};

/// Assemble the transport matrix for diffusivity `d` on `grid`.
pub fn transport_matrix(d: f64, variant: BoundaryVariant, grid: &Grid) -> Result<Tridiagonal> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!("diffusivity must be positive, got {d}")));
    }
    let n = grid.n();
    let h = grid.h();
    let diff = d / (h * h);
    let adv = 1.0 / (2.0 * h);
    let mut lower = vec![0.0; n];
    let mut diag = vec![2.0 * diff; n];
    let mut upper = vec![0.0; n];
    // advection sign: +w' for inflow, -w' for outflow
    let sign = match variant {
        BoundaryVariant::InflowRobin => 1.0,
        BoundaryVariant::OutflowRobin => -1.0,
    };
    for j in 1..n - 1 {
        lower[j] = -diff - sign * adv;
        upper[j] = -diff + sign * adv;
    }
    let robin = 2.0 / h + 1.0 / d;
    match variant {
        BoundaryVariant::InflowRobin => {
            diag[0] = 2.0 * diff + robin;
            upper[0] = -2.0 * diff;
            lower[n - 1] = -2.0 * diff;
        }
        BoundaryVariant::OutflowRobin => {
            upper[0] = -2.0 * diff;
            lower[n - 1] = -2.0 * diff;
            diag[n - 1] = 2.0 * diff + robin;
        }
    }
    Tridiagonal::new(lower, diag, upper)
}

/// Source entry of row 0 produced by the inhomogeneous inflow condition
/// `-d w'(0) + w(0) = feed`.
#[inline]
pub fn inflow_source(d: f64, feed: f64, grid: &Grid) -> f64 {
    feed * (2.0 / grid.h() + 1.0 / d)
}

/// Largest cell Péclet number `h / (2 d)` among the given diffusivities.
pub fn peclet(grid: &Grid, diffusivities: impl IntoIterator<Item = f64>) -> f64 {
    diffusivities
        .into_iter()
        .map(|d| grid.h() / (2.0 * d))
        .fold(0.0, f64::max)
}
