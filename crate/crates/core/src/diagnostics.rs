//! Reproductive numbers, the blow-up functional, `L^p` energies and the
//! weighted mass.

use crate::eigen::{solve_principal, BoundaryVariant, EigenPair};
use crate::model::YMaxReading;
use crate::pde::StateField;
use crate::{Error, KineticsSpec, ModelParams, Result};

/// Distance from 1 inside which a reproductive number counts as critical.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Node count used for eigenvalues entering the reproductive numbers: the
/// default, raised so that the cell Péclet number `h/(2d)` stays below 1/2.
pub fn eigen_grid_for(d: f64) -> usize {
    let resolving = (1.0 / d).ceil() as usize + 1;
    crate::eigen::DEFAULT_GRID_N.max(resolving)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WashoutClass {
    Stable,
    Unstable,
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproductiveNumbers {
    pub ru: f64,
    pub rv: f64,
    pub lambda_d1: f64,
    pub lambda_d2: f64,
    /// Net growth at the feed, `f(gamma_S) - alpha(0,0)/y_u`, before flooring.
    pub net_u: f64,
    /// `g(gamma_S) - beta(0,0)/y_v`.
    pub net_v: f64,
    pub classification: WashoutClass,
}

impl ReproductiveNumbers {
    /// Signed margins `lambda_{d1} - net_u` and `lambda_{d2} - net_v`; both
    /// positive means washout is stable.
    pub fn washout_margins(&self) -> (f64, f64) {
        (self.lambda_d1 - self.net_u, self.lambda_d2 - self.net_v)
    }
}

pub fn reproductive_numbers(params: &ModelParams, kin: &KineticsSpec) -> Result<ReproductiveNumbers> {
    if params.m() != 1 {
        return Err(Error::Unsupported(format!(
            "reproductive numbers are defined for one species, got m = {}",
            params.m()
        )));
    }
    params.check_kinetics(kin)?;
    let (d1, d2) = (params.du()[0], params.dv()[0]);
    let l1 = solve_principal(d1, BoundaryVariant::InflowRobin, eigen_grid_for(d1))?.lambda();
    let l2 = solve_principal(d2, BoundaryVariant::InflowRobin, eigen_grid_for(d2))?.lambda();
    reproductive_numbers_from(params, kin, l1, l2)
}

/// Reproductive numbers with externally supplied eigenvalues.
pub fn reproductive_numbers_from(
    params: &ModelParams,
    kin: &KineticsSpec,
    lambda_d1: f64,
    lambda_d2: f64,
) -> Result<ReproductiveNumbers> {
    let gs = params.gamma_s();
    let net_u = kin.f(0).eval(gs)? - kin.alpha(0).eval(&[0.0], &[0.0])? / params.yu()[0];
    let net_v = kin.g(0).eval(gs)? - kin.beta(0).eval(&[0.0], &[0.0])? / params.yv()[0];
    let ru = net_u.max(0.0) / lambda_d1;
    let rv = net_v.max(0.0) / lambda_d2;
    let classification = if ru > 1.0 + BOUNDARY_TOL || rv > 1.0 + BOUNDARY_TOL {
        WashoutClass::Unstable
    } else if ru < 1.0 - BOUNDARY_TOL && rv < 1.0 - BOUNDARY_TOL {
        WashoutClass::Stable
    } else {
        WashoutClass::Boundary
    };
    Ok(ReproductiveNumbers { ru, rv, lambda_d1, lambda_d2, net_u, net_v, classification })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupFunctional {
    pub y: f64,
    pub z: f64,
    pub q: f64,
}

/// `Y = int u phi`, `Z = int v phi`, `Q = (y_u + 1) Y + (y_v + 1) Z` for
/// species 0, with `phi` an outflow eigenfunction scaled into `(0, 1]`.
pub fn blowup_functional(
    state: &StateField,
    pair: &EigenPair,
    yu: f64,
    yv: f64,
) -> Result<BlowupFunctional> {
    if pair.grid() != state.grid() {
        return Err(Error::GridMismatch { expected: state.grid().n(), found: pair.grid_n() });
    }
    let peak = pair.phi().iter().copied().fold(0.0, f64::max);
    if peak > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("eigenfunction must be scaled into (0, 1], max is {peak}")));
    }
    let grid = state.grid();
    let y = grid.trapezoid_product(state.u(0), pair.phi());
    let z = grid.trapezoid_product(state.v(0), pair.phi());
    Ok(BlowupFunctional { y, z, q: (yu + 1.0) * y + (yv + 1.0) * z })
}

/// Exponent and weight of the `L^p` energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConfig {
    p: u32,
    a: f64,
}

impl EnergyConfig {
    pub fn new(p: u32, a: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::Domain(format!("energy exponent must be >= 2, got {p}")));
        }
        if !(a >= 1.0 && a.is_finite()) {
            return Err(Error::Domain(format!("energy weight must be >= 1, got {a}")));
        }
        Ok(Self { p, a })
    }

    /// Smallest admissible weight for species `i`:
    /// `max{1, y_u, (d_u + d_v) / (2 sqrt(d_u d_v))}`.
    pub fn lower_bound(params: &ModelParams, i: usize) -> f64 {
        let (du, dv) = (params.du()[i], params.dv()[i]);
        1.0_f64.max(params.yu()[i]).max((du + dv) / (2.0 * (du * dv).sqrt()))
    }

    pub fn minimal(params: &ModelParams, i: usize, p: u32) -> Result<Self> {
        Self::new(p, Self::lower_bound(params, i))
    }

    /// Reject weights below the lower bound of any species.
    pub fn validate_for(&self, params: &ModelParams) -> Result<()> {
        for i in 0..params.m() {
            let lb = Self::lower_bound(params, i);
            if self.a < lb {
                return Err(Error::Domain(format!(
                    "energy weight {} below the bound {lb} of species {i}",
                    self.a
                )));
            }
        }
        Ok(())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn a(&self) -> f64 {
        self.a
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Energy {
    pub pointwise: Vec<f64>,
    pub integral: f64,
}

/// `H_p = sum_b C(p, b) a^{b^2} u^b v^{p-b}` at every node and its integral.
pub fn hp_energy(u: &[f64], v: &[f64], grid: &crate::Grid, cfg: &EnergyConfig) -> Result<Energy> {
    grid.check_len(u.len())?;
    grid.check_len(v.len())?;
    if let Some(x) = u.iter().chain(v).find(|x| !(**x >= 0.0)) {
        return Err(Error::Domain(format!("energy needs nonnegative inputs, got {x}")));
    }
    let p = cfg.p as i32;
    let coeffs: Vec<f64> = (0..=p)
        .map(|b| binomial(p as u32, b as u32) * cfg.a.powi(b * b))
        .collect();
    let pointwise: Vec<f64> = u
        .iter()
        .zip(v)
        .map(|(&uu, &vv)| (0..=p).map(|b| coeffs[b as usize] * uu.powi(b) * vv.powi(p - b)).sum())
        .collect();
    let integral = grid.trapezoid(&pointwise);
    Ok(Energy { pointwise, integral })
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `int weights . w dx` with the default `y_max` reading.
pub fn weighted_mass(state: &StateField, params: &ModelParams) -> f64 {
    weighted_mass_with(state, params, YMaxReading::default())
}

pub fn weighted_mass_with(state: &StateField, params: &ModelParams, reading: YMaxReading) -> f64 {
    let weights = reading.weights(params);
    let grid = state.grid();
    weights
        .iter()
        .zip(state.components())
        .map(|(a, c)| a * grid.trapezoid(c))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{FlocRate, GrowthRate, Grid};

    #[test]
    fn critical_reproductive_number() {
        let p = ModelParams::single(1.0, 0.5, 0.5, 1.0, 1.0, 1.0).unwrap();
        let lambda = solve_principal(0.5, BoundaryVariant::InflowRobin, 401).unwrap().lambda();
        let k = KineticsSpec::single(
            GrowthRate::Monod { a: 2.0 * lambda, b: 1.0 },
            GrowthRate::Zero,
            FlocRate::PaperAlpha,
            FlocRate::PaperBeta,
        )
        .unwrap();
        let r = reproductive_numbers(&p, &k).unwrap();
        assert!((r.ru - 1.0).abs() < 1e-12);
        assert_eq!(r.rv, 0.0);
        assert_eq!(r.classification, WashoutClass::Boundary);
    }

    #[test]
    fn no_growth_is_stable() {
        let p = ModelParams::single(1.0, 0.5, 0.5, 1.0, 1.0, 1.0).unwrap();
        let k = KineticsSpec::single(
            GrowthRate::Zero,
            GrowthRate::Zero,
            FlocRate::PaperAlpha,
            FlocRate::Constant(1.0),
        )
        .unwrap();
        let r = reproductive_numbers(&p, &k).unwrap();
        assert_eq!((r.ru, r.rv), (0.0, 0.0));
        assert_eq!(r.net_v, -1.0);
        assert_eq!(r.classification, WashoutClass::Stable);
    }

    #[test]
    fn multi_species_unsupported() {
        let p = ModelParams::new(1.0, vec![1.0; 2], vec![1.0; 2], vec![1.0; 2], vec![1.0; 2], 1.0, vec![0.0; 2], vec![0.0; 2])
            .unwrap();
        let k = KineticsSpec::new(
            vec![GrowthRate::Zero; 2],
            vec![GrowthRate::Zero; 2],
            vec![FlocRate::Constant(0.0); 2],
            vec![FlocRate::Constant(0.0); 2],
        )
        .unwrap();
        assert!(matches!(reproductive_numbers(&p, &k), Err(Error::Unsupported(_))));
    }

    #[test]
    fn energy_examples() {
        let g = Grid::new(17).unwrap();
        let one = vec![1.0; 17];
        let e = hp_energy(&one, &one, &g, &EnergyConfig::new(2, 2.0).unwrap()).unwrap();
        assert!(e.pointwise.iter().all(|h| (*h - 21.0).abs() < 1e-12));
        assert!((e.integral - 21.0).abs() < 1e-12);
        assert!(EnergyConfig::new(1, 2.0).is_err());
        assert!(EnergyConfig::new(2, 0.5).is_err());
    }

    #[test]
    fn energy_weight_bound() {
        let p = ModelParams::single(1.0, 1.0, 4.0, 0.5, 0.5, 1.0).unwrap();
        // (1 + 4) / (2 * 2) = 1.25
        assert!((EnergyConfig::lower_bound(&p, 0) - 1.25).abs() < 1e-15);
        assert!(EnergyConfig::new(2, 1.0).unwrap().validate_for(&p).is_err());
        assert!(EnergyConfig::minimal(&p, 0, 3).unwrap().validate_for(&p).is_ok());
    }

    #[test]
    fn mass_readings() {
        let g = Grid::new(16).unwrap();
        let p = ModelParams::single(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let s = StateField::constant(g, &[1.0, 1.0, 1.0]).unwrap();
        assert!((weighted_mass(&s, &p) - 5.0).abs() < 1e-12);
        assert!((weighted_mass_with(&s, &p, YMaxReading::Product) - 5.0).abs() < 1e-12);
        let q = ModelParams::single(1.0, 1.0, 1.0, 2.0, 2.0, 1.0).unwrap();
        // list: 2 + 3 + 3 ; product: 4 + 3 + 3
        assert!((weighted_mass(&s, &q) - 8.0).abs() < 1e-12);
        assert!((weighted_mass_with(&s, &q, YMaxReading::Product) - 10.0).abs() < 1e-12);
        let zero = StateField::constant(g, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(weighted_mass(&zero, &q), 0.0);
    }

    #[test]
    fn blowup_functional_scaling() {
        let g = Grid::new(101).unwrap();
        let pair = solve_principal(1.0, BoundaryVariant::OutflowRobin, 101).unwrap();
        let s = StateField::constant(g, &[1.0, 0.5, 2.0]).unwrap();
        let b = blowup_functional(&s, &pair, 2.0, 3.0).unwrap();
        let s2 = StateField::constant(g, &[1.0, 1.5, 6.0]).unwrap();
        let b2 = blowup_functional(&s2, &pair, 2.0, 3.0).unwrap();
        assert!((b2.q - 3.0 * b.q).abs() < 1e-12 * b2.q);
        let zero = StateField::constant(g, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(blowup_functional(&zero, &pair, 2.0, 3.0).unwrap().q, 0.0);
        let other = StateField::constant(Grid::new(51).unwrap(), &[1.0, 0.0, 0.0]).unwrap();
        assert!(blowup_functional(&other, &pair, 2.0, 3.0).is_err());
    }
}
