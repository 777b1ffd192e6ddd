//! Order intervals between rescaled eigenfunctions.

use super::{apply_operator, SteadyOperator, Triple};
use crate::eigen::{rescale_eigenfunction, solve_principal_with, BoundaryVariant, EigenControls, EigenPair, Rescale};
use crate::{Error, Grid, KineticsSpec, ModelParams, Result};

/// Strictness margin for `max phi_{d0} < k`.
const STRICT: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeKind {
    /// `0 <= S~ <= phi_0`, `c <= u <= phi_1`, `v = 0`.
    ExtinctionAttached,
    /// `0 <= S~ <= phi_0`, `C <= v <= phi_2`, `u = 0`.
    ExtinctionIsolated,
    /// `0 <= S~ <= phi_0`, `phi_1/lambda_1 <= u <= phi_1`, `phi_2/lambda_2 <= v <= phi_2`.
    Coexistence,
}

impl ConeKind {
    pub fn operator(&self) -> SteadyOperator {
        match self {
            ConeKind::ExtinctionAttached => SteadyOperator::ExtinctionAttached,
            ConeKind::ExtinctionIsolated => SteadyOperator::ExtinctionIsolated,
            ConeKind::Coexistence => SteadyOperator::Coexistence,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Envelope {
    fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if let Some(j) = lower.iter().zip(&upper).position(|(l, u)| l > u) {
            return Err(Error::Domain(format!("cone envelope crosses at node {j}")));
        }
        Ok(Self { lower, upper })
    }

    fn zero(n: usize) -> Self {
        Self { lower: vec![0.0; n], upper: vec![0.0; n] }
    }

    /// Largest distance of `x` outside the envelope.
    pub fn excess(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(x, (l, u))| (l - x).max(x - u).max(0.0))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    pub kind: ConeKind,
    pub grid: Grid,
    pub s: Envelope,
    pub u: Envelope,
    pub v: Envelope,
    /// Normalization margins; `k_prime` only for the coexistence cone.
    pub k: f64,
    pub k_prime: Option<f64>,
    /// `min phi_1` (attached-extinction cone) or `min phi_2` (isolated one).
    pub c: Option<f64>,
    pub big_c: Option<f64>,
    pub theta: Option<f64>,
    pub rho: Option<f64>,
    /// Rescaled eigenpairs `(phi_0, phi_1, phi_2)` that built the envelopes.
    pub phi0: EigenPair,
    pub phi1: Option<EigenPair>,
    pub phi2: Option<EigenPair>,
}

fn pair(d: f64, grid: &Grid) -> Result<EigenPair> {
    solve_principal_with(d, BoundaryVariant::InflowRobin, grid, EigenControls::default())
}

fn check_margin(name: &str, k: f64) -> Result<()> {
    if k > 0.0 && k < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {k}")))
    }
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

impl ConeSpec {
    /// Cone for the attached-extinction operator with margin `k`:
    /// `max phi_0 < k` and `phi_1 <= lambda_0 / f(gamma_S) phi_0`.
    pub fn extinction_attached(
        params: &ModelParams,
        kin: &KineticsSpec,
        grid: Grid,
        k: f64,
    ) -> Result<Self> {
        Self::extinction(params, kin, grid, k, ConeKind::ExtinctionAttached)
    }

    pub fn extinction_isolated(
        params: &ModelParams,
        kin: &KineticsSpec,
        grid: Grid,
        k: f64,
    ) -> Result<Self> {
        Self::extinction(params, kin, grid, k, ConeKind::ExtinctionIsolated)
    }

    fn extinction(
        params: &ModelParams,
        kin: &KineticsSpec,
        grid: Grid,
        k: f64,
        kind: ConeKind,
    ) -> Result<Self> {
        check_margin("k", k)?;
        let (rate, d) = match kind {
            ConeKind::ExtinctionAttached => (kin.f(0).eval(params.gamma_s())?, params.du()[0]),
            _ => (kin.g(0).eval(params.gamma_s())?, params.dv()[0]),
        };
        if rate <= 0.0 {
            return Err(Error::Domain("growth at the feed must be positive to build the cone".into()));
        }
        let phi0 = rescale_eigenfunction(&pair(params.d0(), &grid)?, Rescale::MaxValue(k * STRICT))?;
        let factor = phi0.lambda() / rate;
        let phi = rescale_eigenfunction(&pair(d, &grid)?, Rescale::DominatedBy { other: &phi0, factor })?;
        let floor = min_of(phi.phi());
        let n = grid.n();
        let s = Envelope::new(vec![0.0; n], phi0.phi().to_vec())?;
        let biomass = Envelope::new(vec![floor; n], phi.phi().to_vec())?;
        let (u, v, c, big_c, phi1, phi2) = match kind {
            ConeKind::ExtinctionAttached => (biomass, Envelope::zero(n), Some(floor), None, Some(phi), None),
            _ => (Envelope::zero(n), biomass, None, Some(floor), None, Some(phi)),
        };
        Ok(Self {
            kind,
            grid,
            s,
            u,
            v,
            k,
            k_prime: None,
            c,
            big_c,
            theta: None,
            rho: None,
            phi0,
            phi1,
            phi2,
        })
    }

    /// Coexistence cone with `max phi_0 < min(k, k')` and
    /// `phi_2 <= phi_1 <= lambda_0 / (f + g)(gamma_S) phi_0`.
    #[allow(clippy::too_many_arguments)]
    pub fn coexistence(
        params: &ModelParams,
        kin: &KineticsSpec,
        grid: Grid,
        k: f64,
        k_prime: f64,
        theta: Option<f64>,
        rho: Option<f64>,
    ) -> Result<Self> {
        check_margin("k", k)?;
        check_margin("k'", k_prime)?;
        let gs = params.gamma_s();
        let rate = kin.f(0).eval(gs)? + kin.g(0).eval(gs)?;
        if rate <= 0.0 {
            return Err(Error::Domain("growth at the feed must be positive to build the cone".into()));
        }
        let phi0 = rescale_eigenfunction(
            &pair(params.d0(), &grid)?,
            Rescale::MaxValue(k.min(k_prime) * STRICT),
        )?;
        let phi1 = rescale_eigenfunction(
            &pair(params.du()[0], &grid)?,
            Rescale::DominatedBy { other: &phi0, factor: phi0.lambda() / rate },
        )?;
        let phi2 = rescale_eigenfunction(
            &pair(params.dv()[0], &grid)?,
            Rescale::DominatedBy { other: &phi1, factor: 1.0 },
        )?;
        let n = grid.n();
        let scaled = |p: &EigenPair| p.phi().iter().map(|x| x / p.lambda()).collect::<Vec<_>>();
        Ok(Self {
            kind: ConeKind::Coexistence,
            grid,
            s: Envelope::new(vec![0.0; n], phi0.phi().to_vec())?,
            u: Envelope::new(scaled(&phi1), phi1.phi().to_vec())?,
            v: Envelope::new(scaled(&phi2), phi2.phi().to_vec())?,
            k,
            k_prime: Some(k_prime),
            c: None,
            big_c: None,
            theta,
            rho,
            phi0,
            phi1: Some(phi1),
            phi2: Some(phi2),
        })
    }

    /// Lower envelope as a triple.
    pub fn lower(&self) -> Triple {
        Triple {
            grid: self.grid,
            s: self.s.lower.clone(),
            u: self.u.lower.clone(),
            v: self.v.lower.clone(),
        }
    }

    pub fn upper(&self) -> Triple {
        Triple {
            grid: self.grid,
            s: self.s.upper.clone(),
            u: self.u.upper.clone(),
            v: self.v.upper.clone(),
        }
    }

    /// Largest envelope excess of `t`.
    pub fn excess(&self, t: &Triple) -> f64 {
        self.s.excess(&t.s).max(self.u.excess(&t.u)).max(self.v.excess(&t.v))
    }

    pub fn contains(&self, t: &Triple, tol: f64) -> bool {
        t.grid == self.grid && self.excess(t) <= tol
    }

    /// Pointwise interpolation `lower + tau (upper - lower)` per component.
    pub fn interpolate(&self, tau: [&[f64]; 3]) -> Triple {
        let mix = |e: &Envelope, t: &[f64]| {
            e.lower
                .iter()
                .zip(&e.upper)
                .zip(t)
                .map(|((l, u), t)| l + t * (u - l))
                .collect::<Vec<_>>()
        };
        Triple {
            grid: self.grid,
            s: mix(&self.s, tau[0]),
            u: mix(&self.u, tau[1]),
            v: mix(&self.v, tau[2]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub samples: usize,
    /// Samples whose image leaves the cone by more than the tolerance.
    pub violations: usize,
    pub worst_excess: f64,
    pub worst_sample: usize,
    pub tol: f64,
}

impl InvarianceReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Apply the cone's operator to `samples` deterministic cone elements and
/// record how far the images leave the cone.
///
/// Sample 0 is the lower envelope, sample 1 the upper one; the rest mix the
/// envelopes with cosine profiles whose frequencies and phases follow the
/// golden-ratio sequence.
pub fn certify_cone_invariance(
    cone: &ConeSpec,
    params: &ModelParams,
    kin: &KineticsSpec,
    samples: usize,
) -> Result<InvarianceReport> {
    let grid = cone.grid;
    let scale = [&cone.s.upper, &cone.u.upper, &cone.v.upper]
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    let tol = 1e-10 * (1.0 + scale);
    let golden = 0.618_033_988_749_894_9_f64;
    let mut report = InvarianceReport { samples, violations: 0, worst_excess: 0.0, worst_sample: 0, tol };
    for k in 0..samples {
        let profile = |c: usize| -> Vec<f64> {
            match k {
                0 => vec![0.0; grid.n()],
                1 => vec![1.0; grid.n()],
                _ => {
                    let z = (k * 3 + c) as f64 * golden;
                    let freq = 1.0 + (z.fract() * 4.0).floor();
                    let phase = (z * 7.0).fract();
                    grid.sample(|x| 0.5 + 0.5 * (std::f64::consts::PI * (freq * x + phase)).cos())
                }
            }
        };
        let (a, b, c) = (profile(0), profile(1), profile(2));
        let t = cone.interpolate([&a, &b, &c]);
        let image = apply_operator(cone.kind.operator(), &t, params, kin)?;
        let excess = cone.excess(&image);
        if excess > tol {
            report.violations += 1;
        }
        if excess > report.worst_excess {
            report.worst_excess = excess;
            report.worst_sample = k;
        }
    }
    Ok(report)
}
