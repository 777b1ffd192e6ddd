//! Hypothesis checkers for the nontrivial steady-state results.
//!
//! Growth rates are evaluated at the feed `gamma_S`, which is the value `1`
//! of the normalized problem.

use super::cone::ConeSpec;
use crate::diagnostics::eigen_grid_for;
use crate::eigen::{solve_principal, BoundaryVariant};
use crate::model::GrowthRate;
use crate::{Error, Grid, KineticsSpec, ModelParams, Result};

pub const THETA_GRID_MIN: f64 = 1e-4;
pub const THETA_GRID_MAX: f64 = 1.0;
pub const THETA_GRID_POINTS: usize = 64;
/// Margin used to build the coexistence cone when a growth clause fails and
/// no admissible margin exists.
const FALLBACK_MARGIN: f64 = 0.5;

/// One inequality of a hypothesis, as a signed margin (`>= 0` or `> 0` holds).
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub name: &'static str,
    /// `None` for structural clauses without a numeric margin.
    pub margin: Option<f64>,
    pub holds: bool,
}

impl Clause {
    fn strict(name: &'static str, margin: f64) -> Self {
        Self { name, margin: Some(margin), holds: margin > 0.0 }
    }

    fn weak(name: &'static str, margin: f64) -> Self {
        Self { name, margin: Some(margin), holds: margin >= 0.0 }
    }

    fn structural(name: &'static str, holds: bool) -> Self {
        Self { name, margin: None, holds }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtinctionTarget {
    /// `(S, u, 0)`: needs `alpha(., 0) = 0` and `e^{1/d_1} < f(1) <= lambda_{d_1}`.
    Attached,
    /// `(S, 0, v)`: needs `beta(0, .) = 0` and `e^{1/d_2} < g(1) <= lambda_{d_2}`.
    Isolated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtinctionReport {
    pub target: ExtinctionTarget,
    pub d: f64,
    pub growth_at_feed: f64,
    pub exp_inv_d: f64,
    pub lambda_d: f64,
    /// `growth - e^{1/d} > 0`.
    pub lower: Clause,
    /// `lambda_d - growth >= 0`.
    pub upper: Clause,
    pub structural: Clause,
    pub monotone: Clause,
    /// `k` with `f(1 - k) > e^{1/d}`, half the bisected supremum.
    pub k: Option<f64>,
    /// `lambda_d - e^{1/d}`: width of the admissible window for the growth rate.
    pub window: f64,
}

impl ExtinctionReport {
    pub fn passes(&self) -> bool {
        [&self.lower, &self.upper, &self.structural, &self.monotone].iter().all(|c| c.holds)
    }

    pub fn clauses(&self) -> [&Clause; 4] {
        [&self.lower, &self.upper, &self.structural, &self.monotone]
    }
}

fn require_single(params: &ModelParams, kin: &KineticsSpec) -> Result<()> {
    params.check_kinetics(kin)?;
    if params.m() != 1 {
        return Err(Error::Unsupported(format!(
            "steady-state hypotheses are stated for one species, got m = {}",
            params.m()
        )));
    }
    Ok(())
}

fn lambda(d: f64) -> Result<f64> {
    Ok(solve_principal(d, BoundaryVariant::InflowRobin, eigen_grid_for(d))?.lambda())
}

/// Supremum of `k in (0, min(1, gamma_S)]` with `rate(gamma_S - k) > target`
/// by bisection; `None` when even `k -> 0` fails.
fn bisect_margin(rate: &GrowthRate, gamma_s: f64, target: f64, strict: bool) -> Option<f64> {
    let ok = |k: f64| {
        let r = rate.eval_unchecked((gamma_s - k).max(0.0));
        if strict { r > target } else { r >= target }
    };
    if !ok(0.0) {
        return None;
    }
    let hi0 = gamma_s.min(1.0);
    if ok(hi0) {
        return Some(hi0);
    }
    let (mut lo, mut hi) = (0.0, hi0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

fn half_margin(sup: Option<f64>) -> Option<f64> {
    sup.map(|k| 0.5 * k).filter(|k| *k > 0.0 && *k < 1.0)
}

pub fn check_extinction_hypotheses(
    params: &ModelParams,
    kin: &KineticsSpec,
    which: ExtinctionTarget,
) -> Result<ExtinctionReport> {
    require_single(params, kin)?;
    let gs = params.gamma_s();
    let (rate, d, structural) = match which {
        ExtinctionTarget::Attached => (
            kin.f(0),
            params.du()[0],
            Clause::structural("alpha(., 0) = 0", kin.alpha(0).vanishes_without_attached()),
        ),
        ExtinctionTarget::Isolated => (
            kin.g(0),
            params.dv()[0],
            Clause::structural("beta(0, .) = 0", kin.beta(0).vanishes_without_isolated()),
        ),
    };
    let growth = rate.eval(gs)?;
    let exp_inv_d = (1.0 / d).exp();
    let lambda_d = lambda(d)?;
    let k = half_margin(bisect_margin(rate, gs, exp_inv_d, true));
    Ok(ExtinctionReport {
        target: which,
        d,
        growth_at_feed: growth,
        exp_inv_d,
        lambda_d,
        lower: Clause::strict("e^(1/d) < growth", growth - exp_inv_d),
        upper: Clause::weak("growth <= lambda_d", lambda_d - growth),
        structural,
        monotone: Clause::structural("growth nondecreasing", rate.nondecreasing_on(gs)),
        k,
        window: lambda_d - exp_inv_d,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoexistenceReport {
    pub lambda_d0: f64,
    pub lambda_d1: f64,
    pub lambda_d2: f64,
    pub f_feed: f64,
    pub g_feed: f64,
    pub alpha11: f64,
    pub beta11: f64,
    /// `alpha`, `beta` positive and nondecreasing.
    pub rates: Clause,
    /// `f(1) - lambda_1 (1 + alpha(1,1)/y_u) > 0`.
    pub growth_u: Clause,
    /// `g(1) - lambda_2 (1 + beta(1,1)/y_v) > 0`.
    pub growth_v: Clause,
    /// `lambda_1 + theta/(y_u lambda_1) - f(1) - beta(1,1) >= 0` at the best `theta`.
    pub a2: Clause,
    /// `lambda_2 + rho/(y_v lambda_2) - g(1) - alpha(1,1)/theta >= 0` at the best pair.
    pub a4: Clause,
    /// `min(phi_2 - theta phi_1, inf alpha - theta, inf beta - rho) >= 0`.
    pub selection: Clause,
    pub theta: f64,
    pub rho: f64,
    /// Every grid pair at which all five inequalities hold.
    pub feasible: Vec<(f64, f64)>,
    /// Clause with the smallest margin at the best pair.
    pub binding: &'static str,
    pub k: Option<f64>,
    pub k_prime: Option<f64>,
    pub grid_n: usize,
}

impl CoexistenceReport {
    pub fn is_feasible(&self) -> bool {
        self.rates.holds && !self.feasible.is_empty()
    }

    /// The five displayed inequalities.
    pub fn margins(&self) -> [&Clause; 5] {
        [&self.growth_u, &self.growth_v, &self.a2, &self.a4, &self.selection]
    }
}

/// Logarithmic grid of `THETA_GRID_POINTS` values on `[1e-4, 1]`.
pub fn theta_grid() -> Vec<f64> {
    let (a, b) = (THETA_GRID_MIN.ln(), THETA_GRID_MAX.ln());
    (0..THETA_GRID_POINTS)
        .map(|i| (a + (b - a) * i as f64 / (THETA_GRID_POINTS - 1) as f64).exp())
        .collect()
}

/// Evaluate every clause of the coexistence result and search `(theta, rho)`.
///
/// The cone entering the selection clause is built on `grid_n` nodes with the
/// admissible margins `k`, `k'` (half their bisected suprema) when they exist.
pub fn check_coexistence_hypotheses(
    params: &ModelParams,
    kin: &KineticsSpec,
    grid_n: usize,
) -> Result<CoexistenceReport> {
    require_single(params, kin)?;
    let grid = Grid::new(grid_n)?;
    let gs = params.gamma_s();
    let (yu, yv) = (params.yu()[0], params.yv()[0]);
    let (alpha, beta) = (kin.alpha(0), kin.beta(0));
    let rates = Clause::structural(
        "alpha, beta positive and nondecreasing",
        alpha.strictly_positive() && beta.strictly_positive(),
    );
    let l0 = lambda(params.d0())?;
    let l1 = lambda(params.du()[0])?;
    let l2 = lambda(params.dv()[0])?;
    let f1 = kin.f(0).eval(gs)?;
    let g1 = kin.g(0).eval(gs)?;
    let a11 = alpha.eval(&[1.0], &[1.0])?;
    let b11 = beta.eval(&[1.0], &[1.0])?;
    let growth_u = Clause::strict("f(1) > lambda_1 (1 + alpha(1,1)/y_u)", f1 - l1 * (1.0 + a11 / yu));
    let growth_v = Clause::strict("g(1) > lambda_2 (1 + beta(1,1)/y_v)", g1 - l2 * (1.0 + b11 / yv));

    let k = half_margin(bisect_margin(kin.f(0), gs, l1 * (1.0 + a11 / yu), false));
    let k_prime = half_margin(bisect_margin(kin.g(0), gs, l2 * (1.0 + b11 / yv), false));
    let cone = ConeSpec::coexistence(
        params,
        kin,
        grid,
        k.unwrap_or(FALLBACK_MARGIN),
        k_prime.unwrap_or(FALLBACK_MARGIN),
        None,
        None,
    )?;
    let phi1 = cone.u.upper.clone();
    let phi2 = cone.v.upper.clone();
    // rates are nondecreasing, so their infimum over the cone sits on the lower envelope
    let inf_on_cone = |r: &crate::FlocRate| {
        cone.u
            .lower
            .iter()
            .zip(&cone.v.lower)
            .map(|(u, v)| r.eval_totals(*u, *v))
            .fold(f64::INFINITY, f64::min)
    };
    let inf_alpha = inf_on_cone(alpha);
    let inf_beta = inf_on_cone(beta);

    let thetas = theta_grid();
    let mut best: Option<(f64, f64, f64, [f64; 3])> = None;
    let mut feasible = Vec::new();
    for &theta in &thetas {
        let sel_theta = phi1
            .iter()
            .zip(&phi2)
            .map(|(p1, p2)| p2 - theta * p1)
            .fold(f64::INFINITY, f64::min)
            .min(inf_alpha - theta);
        let a2 = l1 + theta / (yu * l1) - f1 - b11;
        for &rho in &thetas {
            let a4 = l2 + rho / (yv * l2) - g1 - a11 / theta;
            let sel = sel_theta.min(inf_beta - rho);
            let worst = [a2, a4, sel, growth_u.margin.unwrap(), growth_v.margin.unwrap()]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            if a2 >= 0.0 && a4 >= 0.0 && sel >= 0.0 && growth_u.holds && growth_v.holds {
                feasible.push((theta, rho));
            }
            if best.is_none_or(|b| worst > b.2) {
                best = Some((theta, rho, worst, [a2, a4, sel]));
            }
        }
    }
    let (theta, rho, _, [a2, a4, sel]) = best.expect("theta grid is not empty");
    let a2 = Clause::weak("f(1) + beta(1,1) <= lambda_1 + theta/(y_u lambda_1)", a2);
    let a4 = Clause::weak("g(1) + alpha(1,1)/theta <= lambda_2 + rho/(y_v lambda_2)", a4);
    let selection = Clause::weak("theta phi_1 <= phi_2, theta <= alpha, rho <= beta on the cone", sel);
    let mut clauses = [&growth_u, &growth_v, &a2, &a4, &selection];
    clauses.sort_by(|a, b| a.margin.unwrap().total_cmp(&b.margin.unwrap()));
    let binding = clauses[0].name;
    Ok(CoexistenceReport {
        lambda_d0: l0,
        lambda_d1: l1,
        lambda_d2: l2,
        f_feed: f1,
        g_feed: g1,
        alpha11: a11,
        beta11: b11,
        rates,
        growth_u,
        growth_v,
        a2,
        a4,
        selection,
        theta,
        rho,
        feasible,
        binding,
        k,
        k_prime,
        grid_n,
    })
}
