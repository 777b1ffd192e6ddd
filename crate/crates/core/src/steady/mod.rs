//! Steady states through the Green's kernel of the inflow operator.
//!
//! `K(d, x, s) = exp((min(x, s) - s) / d)` inverts `-d w'' + w'` under
//! `-d w'(0) + w(0) = 0`, `w'(1) = 0`, so a steady state is a fixed point of
//! `w = gamma + int K(d, x, s) rho(w)(s) ds` component by component. The
//! substrate is carried as the shift `S~ = gamma_S - S`, which has a
//! homogeneous inflow condition.

mod cone;
mod hypotheses;

pub use cone::{certify_cone_invariance, ConeKind, ConeSpec, Envelope, InvarianceReport};
pub use hypotheses::{
    check_coexistence_hypotheses, check_extinction_hypotheses, Clause, CoexistenceReport,
    ExtinctionReport, ExtinctionTarget, theta_grid, THETA_GRID_MAX, THETA_GRID_MIN, THETA_GRID_POINTS,
};

use crate::grid::sup_distance;
use crate::model::KineticsSpec;
use crate::pde::StateField;
use crate::{Error, Grid, ModelParams, Result};

/// Kernel value at `(x, s)`.
pub fn kernel_eval(d: f64, x: f64, s: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!("diffusivity must be positive, got {d}")));
    }
    for (name, z) in [("x", x), ("s", s)] {
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::Domain(format!("{name} = {z} lies outside [0, 1]")));
        }
    }
    Ok(((x.min(s) - s) / d).exp())
}

/// Trapezoid quadrature of `x -> int K(d, x, s) rho(s) ds` at every node.
///
/// Runs in `O(n)`: the part `s <= x` is a prefix sum and the part `s > x`
/// obeys `B_i = e^{-h/d} (w_{i+1} rho_{i+1} + B_{i+1})`.
pub fn kernel_apply(d: f64, rho: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!("diffusivity must be positive, got {d}")));
    }
    grid.check_len(rho.len())?;
    let n = grid.n();
    let w = grid.trapezoid_weights();
    let decay = (-grid.h() / d).exp();
    let mut out = vec![0.0; n];
    let mut tail = 0.0;
    for i in (0..n).rev() {
        out[i] = tail;
        tail = decay * (w[i] * rho[i] + tail);
    }
    let mut prefix = 0.0;
    for i in 0..n {
        prefix += w[i] * rho[i];
        out[i] += prefix;
    }
    Ok(out)
}

/// Residuals of `-d w'' + w' = rho` and its boundary conditions
/// `-d w'(0) + w(0) = feed`, `w'(1) = 0`, by second-order differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferentialResidual {
    pub interior: f64,
    pub inflow: f64,
    pub outflow: f64,
}

impl DifferentialResidual {
    pub fn max(&self) -> f64 {
        self.interior.max(self.inflow).max(self.outflow)
    }
}

pub fn differential_residual(
    d: f64,
    feed: f64,
    w: &[f64],
    rho: &[f64],
    grid: &Grid,
) -> Result<DifferentialResidual> {
    grid.check_len(w.len())?;
    grid.check_len(rho.len())?;
    let n = grid.n();
    let h = grid.h();
    let interior = (1..n - 1)
        .map(|j| {
            let second = (w[j + 1] - 2.0 * w[j] + w[j - 1]) / (h * h);
            let first = (w[j + 1] - w[j - 1]) / (2.0 * h);
            (-d * second + first - rho[j]).abs()
        })
        .fold(0.0, f64::max);
    let left = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
    let right = (3.0 * w[n - 1] - 4.0 * w[n - 2] + w[n - 3]) / (2.0 * h);
    Ok(DifferentialResidual {
        interior,
        inflow: (-d * left + w[0] - feed).abs(),
        outflow: right.abs(),
    })
}

/// `(S~, u, v)` for a single species on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Triple {
    pub grid: Grid,
    /// Shifted substrate `gamma_S - S`.
    pub s: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Triple {
    pub fn new(grid: Grid, s: Vec<f64>, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        for c in [&s, &u, &v] {
            grid.check_len(c.len())?;
        }
        Ok(Self { grid, s, u, v })
    }

    pub fn constant(grid: Grid, s: f64, u: f64, v: f64) -> Self {
        let n = grid.n();
        Self { grid, s: vec![s; n], u: vec![u; n], v: vec![v; n] }
    }

    pub fn zero(grid: Grid) -> Self {
        Self::constant(grid, 0.0, 0.0, 0.0)
    }

    /// Transient state with `S = (gamma_S - S~)_+`.
    pub fn to_state(&self, params: &ModelParams) -> Result<StateField> {
        let gs = params.gamma_s();
        let s = self.s.iter().map(|x| (gs - x).max(0.0)).collect();
        let pos = |c: &[f64]| c.iter().map(|x| x.max(0.0)).collect::<Vec<_>>();
        StateField::new(self.grid, vec![s, pos(&self.u), pos(&self.v)], 0.0)
    }

    pub fn from_state(state: &StateField, params: &ModelParams) -> Result<Self> {
        if state.m() != 1 {
            return Err(Error::Unsupported("steady triples hold one species".into()));
        }
        let gs = params.gamma_s();
        Self::new(
            *state.grid(),
            state.s().iter().map(|x| gs - x).collect(),
            state.u(0).to_vec(),
            state.v(0).to_vec(),
        )
    }

    pub fn sup_distance(&self, other: &Triple) -> f64 {
        sup_distance(&self.s, &other.s)
            .max(sup_distance(&self.u, &other.u))
            .max(sup_distance(&self.v, &other.v))
    }

    fn components_mut(&mut self) -> [&mut Vec<f64>; 3] {
        [&mut self.s, &mut self.u, &mut self.v]
    }
}

/// Which fixed-point operator to iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SteadyOperator {
    /// Full three-component operator.
    #[default]
    Coexistence,
    /// `(S~, u)` only, `v = 0`: `S~ = K_0[f u]`, `u = K_1[f u]`.
    ExtinctionAttached,
    /// `(S~, v)` only, `u = 0`: `S~ = K_0[g v]`, `v = K_2[g v]`.
    ExtinctionIsolated,
}

fn check_single(params: &ModelParams, kin: &KineticsSpec) -> Result<()> {
    params.check_kinetics(kin)?;
    if params.m() != 1 {
        return Err(Error::Unsupported(format!(
            "steady-state theory covers one species, got m = {}",
            params.m()
        )));
    }
    Ok(())
}

/// Integrands `(rho_S, rho_u, rho_v)` of the chosen operator.
fn densities(
    op: SteadyOperator,
    t: &Triple,
    params: &ModelParams,
    kin: &KineticsSpec,
) -> Result<[Vec<f64>; 3]> {
    let n = t.grid.n();
    if let Some(x) = t.u.iter().chain(&t.v).find(|x| !(**x >= 0.0)) {
        return Err(Error::Domain(format!("steady operator needs nonnegative biomass, got {x}")));
    }
    let gs = params.gamma_s();
    let (yu, yv) = (params.yu()[0], params.yv()[0]);
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for j in 0..n {
        let s = (gs - t.s[j]).max(0.0);
        let f = kin.f(0).eval_unchecked(s);
        let g = kin.g(0).eval_unchecked(s);
        let (u, v) = (t.u[j], t.v[j]);
        match op {
            SteadyOperator::Coexistence => {
                let alpha = kin.alpha(0).eval_totals(u, v);
                let beta = kin.beta(0).eval_totals(u, v);
                out[0][j] = f * u + g * v;
                out[1][j] = f * u + beta * v - alpha * u / yu;
                out[2][j] = g * v + alpha * u - beta * v / yv;
            }
            SteadyOperator::ExtinctionAttached => {
                out[0][j] = f * u;
                out[1][j] = f * u;
            }
            SteadyOperator::ExtinctionIsolated => {
                out[0][j] = g * v;
                out[2][j] = g * v;
            }
        }
    }
    Ok(out)
}

/// Feeds of `(S~, u, v)`, zero for components an operator removes.
fn feeds(op: SteadyOperator, params: &ModelParams) -> [f64; 3] {
    let (gu, gv) = (params.gamma_u()[0], params.gamma_v()[0]);
    match op {
        SteadyOperator::Coexistence => [0.0, gu, gv],
        SteadyOperator::ExtinctionAttached => [0.0, gu, 0.0],
        SteadyOperator::ExtinctionIsolated => [0.0, 0.0, gv],
    }
}

/// Apply one of the fixed-point operators.
pub fn apply_operator(
    op: SteadyOperator,
    t: &Triple,
    params: &ModelParams,
    kin: &KineticsSpec,
) -> Result<Triple> {
    check_single(params, kin)?;
    let rho = densities(op, t, params, kin)?;
    let feed = feeds(op, params);
    let mut out = Triple::zero(t.grid);
    let dims = [params.d0(), params.du()[0], params.dv()[0]];
    let active = match op {
        SteadyOperator::Coexistence => [true, true, true],
        SteadyOperator::ExtinctionAttached => [true, true, false],
        SteadyOperator::ExtinctionIsolated => [true, false, true],
    };
    for (k, comp) in out.components_mut().into_iter().enumerate() {
        if active[k] {
            *comp = kernel_apply(dims[k], &rho[k], &t.grid)?;
            for x in comp.iter_mut() {
                *x += feed[k];
            }
        }
    }
    Ok(out)
}

/// The coexistence operator.
pub fn apply_g(t: &Triple, params: &ModelParams, kin: &KineticsSpec) -> Result<Triple> {
    apply_operator(SteadyOperator::Coexistence, t, params, kin)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyControls {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    /// Used when no cone is given; a cone fixes the operator through its kind.
    pub operator: SteadyOperator,
}

impl Default for SteadyControls {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 20_000, damping: 0.5, operator: SteadyOperator::Coexistence }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub triple: Triple,
    pub operator: SteadyOperator,
    /// `||Op(x) - x||_inf` at the returned iterate.
    pub residual: f64,
    /// Largest finite-difference defect of the differential form.
    pub pde_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Projection size at the last iteration and its maximum over the run.
    pub projection: f64,
    pub max_projection: f64,
    /// Successive-change history, one entry per iteration.
    pub history: Vec<f64>,
}

impl SteadyState {
    pub fn grid(&self) -> &Grid {
        &self.triple.grid
    }

    /// `S~(1)`. Integrating the substrate equation with `v = 0` gives
    /// `S~(1) = int f u`, so a vanishing value forces `u = 0`.
    pub fn shifted_substrate_at_outlet(&self) -> f64 {
        *self.triple.s.last().unwrap()
    }
}

/// Damped fixed-point iteration `x <- P((1 - w) x + w Op(x))`.
///
/// `P` clamps onto the cone envelopes when a cone is given, and onto the
/// nonnegative orthant otherwise. Running out of iterations is reported
/// through `converged = false`, not as an error.
pub fn fixed_point_solve(
    init: &Triple,
    params: &ModelParams,
    kin: &KineticsSpec,
    cone: Option<&ConeSpec>,
    controls: SteadyControls,
) -> Result<SteadyState> {
    check_single(params, kin)?;
    let w = controls.damping;
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::Domain(format!("damping must lie in (0, 1], got {w}")));
    }
    let op = cone.map(|c| c.kind.operator()).unwrap_or(controls.operator);
    if let Some(c) = cone {
        if c.grid != init.grid {
            return Err(Error::GridMismatch { expected: init.grid.n(), found: c.grid.n() });
        }
        if !c.contains(init, 1e-12) {
            return Err(Error::Domain("initial iterate lies outside the cone".into()));
        }
    }
    let mut x = init.clone();
    let mut projection = project(&mut x, cone);
    let mut max_projection = projection;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=controls.max_iter {
        iterations = it;
        let gx = apply_operator(op, &x, params, kin)?;
        let mut next = x.clone();
        for (a, b) in next.components_mut().into_iter().zip([&gx.s, &gx.u, &gx.v]) {
            for (ai, bi) in a.iter_mut().zip(b) {
                *ai = (1.0 - w) * *ai + w * bi;
            }
        }
        projection = project(&mut next, cone);
        max_projection = max_projection.max(projection);
        let change = next.sup_distance(&x);
        x = next;
        history.push(change);
        if !change.is_finite() {
            break;
        }
        if change < controls.tol {
            converged = true;
            break;
        }
    }
    let gx = apply_operator(op, &x, params, kin)?;
    let residual = gx.sup_distance(&x);
    let pde_residual = pde_residual(op, &x, params, kin)?;
    Ok(SteadyState {
        triple: x,
        operator: op,
        residual,
        pde_residual,
        iterations,
        converged,
        projection,
        max_projection,
        history,
    })
}

/// Largest differential-form defect over the active components.
pub fn pde_residual(
    op: SteadyOperator,
    t: &Triple,
    params: &ModelParams,
    kin: &KineticsSpec,
) -> Result<f64> {
    let rho = densities(op, t, params, kin)?;
    let feed = feeds(op, params);
    let dims = [params.d0(), params.du()[0], params.dv()[0]];
    let comps = [&t.s, &t.u, &t.v];
    let mut worst = 0.0_f64;
    for k in 0..3 {
        let r = differential_residual(dims[k], feed[k], comps[k], &rho[k], &t.grid)?;
        worst = worst.max(r.max());
    }
    Ok(worst)
}

fn project(t: &mut Triple, cone: Option<&ConeSpec>) -> f64 {
    let mut worst = 0.0_f64;
    match cone {
        Some(c) => {
            for (comp, env) in t.components_mut().into_iter().zip([&c.s, &c.u, &c.v]) {
                for ((x, lo), hi) in comp.iter_mut().zip(&env.lower).zip(&env.upper) {
                    let clamped = x.clamp(*lo, *hi);
                    worst = worst.max((clamped - *x).abs());
                    *x = clamped;
                }
            }
        }
        None => {
            for comp in t.components_mut() {
                for x in comp.iter_mut() {
                    if *x < 0.0 {
                        worst = worst.max(-*x);
                        *x = 0.0;
                    }
                }
            }
        }
    }
    worst
}
