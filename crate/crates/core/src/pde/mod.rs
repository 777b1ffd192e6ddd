//! IMEX transient solver.
//!
//! Each component `w_k` solves `(I + dt A_k) w_k^{n+1} = w_k^n + dt (F_k(w^n) + b_k)`
//! where `A_k` is the inflow transport matrix of diffusivity `d_k` and `b_k`
//! carries the inhomogeneous Robin feed. A step is rejected when the explicit
//! reaction is too stiff for positivity (`dt * sigma > 1`, with `sigma` the
//! largest per-unit decay rate) or when the update overshoots below the clamp
//! tolerance.

mod monitor;

pub use monitor::{monitor_bounds, BoundReport, GrowthClass, MonitorRow};

use crate::diagnostics::{blowup_functional, hp_energy, weighted_mass_with, EnergyConfig};
use crate::eigen::{solve_principal_with, BoundaryVariant, EigenControls, EigenPair};
use crate::grid::sup_norm;
use crate::model::{reaction_into, YMaxReading};
use crate::operator::{inflow_source, transport_matrix};
use crate::tridiag::TridiagonalLu;
use crate::{Error, Grid, KineticsSpec, ModelParams, Result};

/// Values below `-CLAMP_TOL` after a step reject it.
pub const CLAMP_TOL: f64 = 1e-12;
/// Accepted steps between attempts to double `dt`.
pub const GROWTH_STREAK: usize = 20;

/// Grid functions `(S, u_1, v_1, ..., u_m, v_m)` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    grid: Grid,
    comps: Vec<Vec<f64>>,
    t: f64,
}

impl StateField {
    /// Components in interleaved order; all values finite and nonnegative.
    pub fn new(grid: Grid, comps: Vec<Vec<f64>>, t: f64) -> Result<Self> {
        if comps.len() < 3 || comps.len() % 2 == 0 {
            return Err(Error::Domain(format!(
                "state needs 2m + 1 components, got {}",
                comps.len()
            )));
        }
        for c in &comps {
            grid.check_len(c.len())?;
            if let Some(x) = c.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
                return Err(Error::Domain(format!("state values must be finite and >= 0, got {x}")));
            }
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
        }
        Ok(Self { grid, comps, t })
    }

    /// Spatially constant components.
    pub fn constant(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|v| vec![*v; grid.n()]).collect(), 0.0)
    }

    /// `S = gamma_S`, no biomass.
    pub fn washout(params: &ModelParams, grid: Grid) -> Result<Self> {
        let mut values = vec![0.0; params.dim()];
        values[0] = params.gamma_s();
        Self::constant(grid, &values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn m(&self) -> usize {
        (self.comps.len() - 1) / 2
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn s(&self) -> &[f64] {
        &self.comps[0]
    }

    pub fn u(&self, i: usize) -> &[f64] {
        &self.comps[2 * i + 1]
    }

    pub fn v(&self, i: usize) -> &[f64] {
        &self.comps[2 * i + 2]
    }

    /// Interleaved component `k`.
    pub fn component(&self, k: usize) -> &[f64] {
        &self.comps[k]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    /// Interleaved values at node `j`.
    pub fn point(&self, j: usize) -> Vec<f64> {
        self.comps.iter().map(|c| c[j]).collect()
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// Largest nodewise difference over all components.
    pub fn sup_distance(&self, other: &StateField) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| crate::grid::sup_distance(a, b))
            .fold(0.0, f64::max)
    }
}

/// Time-stepping controls.
#[derive(Debug, Clone, PartialEq)]
pub struct Controls {
    pub t_end: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub sup_threshold: f64,
    /// Keep every `stride`-th accepted step; `None` picks one from `t_end / dt_init`.
    pub snapshot_stride: Option<usize>,
    pub max_snapshots: usize,
    /// Exponents `p` of the `L^p` energies to monitor.
    pub energy_p: Vec<u32>,
    pub y_max_reading: YMaxReading,
}

impl Default for Controls {
    fn default() -> Self {
        Self {
            t_end: 100.0,
            dt_init: 1e-2,
            dt_min: 1e-8,
            sup_threshold: 1e8,
            snapshot_stride: None,
            max_snapshots: 200,
            energy_p: Vec::new(),
            y_max_reading: YMaxReading::List,
        }
    }
}

impl Controls {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, x) in [
            ("t_end", self.t_end),
            ("dt_init", self.dt_init),
            ("dt_min", self.dt_min),
            ("sup_threshold", self.sup_threshold),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                problems.push(format!("{name} must be positive, got {x}"));
            }
        }
        if self.dt_min > self.dt_init {
            problems.push(format!("dt_min {} exceeds dt_init {}", self.dt_min, self.dt_init));
        }
        if self.snapshot_stride == Some(0) {
            problems.push("snapshot_stride must be at least 1".into());
        }
        if self.max_snapshots < 2 {
            problems.push("max_snapshots must be at least 2".into());
        }
        if let Some(p) = self.energy_p.iter().find(|p| **p < 2) {
            problems.push(format!("energy exponent must be >= 2, got {p}"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(problems.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowUpReason {
    SupThreshold,
    DtCollapse,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Completed { t_end: f64 },
    BlowUp { t_detect: f64, reason: BlowUpReason },
}

impl Verdict {
    pub fn is_blow_up(&self) -> bool {
        matches!(self, Verdict::BlowUp { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    /// One row at `t = 0` and one per accepted step.
    pub monitors: Vec<MonitorRow>,
    pub snapshots: Vec<StateField>,
    pub final_state: StateField,
    pub verdict: Verdict,
    pub accepted: usize,
    pub rejected: usize,
}

impl SimulationResult {
    pub fn initial(&self) -> &MonitorRow {
        &self.monitors[0]
    }

    pub fn last(&self) -> &MonitorRow {
        self.monitors.last().expect("monitor series is never empty")
    }
}

/// Outcome of a single [`advance`].
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub state: StateField,
    /// Largest magnitude zeroed by the clamp.
    pub clamp: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Attempt {
    Accepted(Vec<Vec<f64>>, f64),
    Stiff(f64),
    Overshoot(f64),
    NonFinite,
}

/// Transport factorizations for every component, cached per `dt`.
struct Stepper<'a> {
    params: &'a ModelParams,
    kin: &'a KineticsSpec,
    grid: Grid,
    matrices: Vec<crate::tridiag::Tridiagonal>,
    sources: Vec<f64>,
    cache: Vec<(u64, Vec<TridiagonalLu>)>,
    field: Vec<f64>,
    point: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(params: &'a ModelParams, kin: &'a KineticsSpec, grid: Grid) -> Result<Self> {
        params.check_kinetics(kin)?;
        let dim = params.dim();
        let mut matrices = Vec::with_capacity(dim);
        let mut sources = Vec::with_capacity(dim);
        for k in 0..dim {
            let d = params.diffusivity(k);
            matrices.push(transport_matrix(d, BoundaryVariant::InflowRobin, &grid)?);
            sources.push(inflow_source(d, params.feed(k), &grid));
        }
        Ok(Self {
            params,
            kin,
            grid,
            matrices,
            sources,
            cache: Vec::new(),
            field: vec![0.0; dim * grid.n()],
            point: vec![0.0; dim],
        })
    }

    fn factors(&mut self, dt: f64) -> Result<usize> {
        let key = dt.to_bits();
        if let Some(pos) = self.cache.iter().position(|(k, _)| *k == key) {
            return Ok(pos);
        }
        let lus = self
            .matrices
            .iter()
            .map(|a| a.affine(1.0, dt).factor())
            .collect::<Result<Vec<_>>>()?;
        if self.cache.len() >= 64 {
            self.cache.remove(0);
        }
        self.cache.push((key, lus));
        Ok(self.cache.len() - 1)
    }

    fn attempt(&mut self, comps: &[Vec<f64>], dt: f64) -> Result<Attempt> {
        let n = self.grid.n();
        let dim = comps.len();
        let mut sigma = 0.0_f64;
        let mut out = vec![0.0; dim];
        for j in 0..n {
            for k in 0..dim {
                self.point[k] = comps[k][j];
            }
            reaction_into(self.params, self.kin, &self.point, &mut out);
            for k in 0..dim {
                let fk = out[k];
                if !fk.is_finite() {
                    return Ok(Attempt::NonFinite);
                }
                if fk < 0.0 && self.point[k] > 0.0 {
                    sigma = sigma.max(-fk / self.point[k]);
                }
                self.field[k * n + j] = fk;
            }
        }
        if dt * sigma > 1.0 {
            return Ok(Attempt::Stiff(sigma));
        }
        let pos = self.factors(dt)?;
        let mut next = Vec::with_capacity(dim);
        let mut clamp = 0.0_f64;
        for k in 0..dim {
            let mut rhs: Vec<f64> =
                (0..n).map(|j| comps[k][j] + dt * self.field[k * n + j]).collect();
            rhs[0] += dt * self.sources[k];
            if self.cache[pos].1[k].solve_in_place(&mut rhs).is_err() {
                return Ok(Attempt::NonFinite);
            }
            for x in rhs.iter_mut() {
                if *x < 0.0 {
                    if *x < -CLAMP_TOL {
                        return Ok(Attempt::Overshoot(*x));
                    }
                    clamp = clamp.max(-*x);
                    *x = 0.0;
                }
            }
            next.push(rhs);
        }
        Ok(Attempt::Accepted(next, clamp))
    }
}

/// One IMEX step of size `dt`.
///
/// Returns an error when the step would be rejected by [`simulate`] (stiff
/// reaction, overshoot) or produces non-finite values.
pub fn advance(
    state: &StateField,
    params: &ModelParams,
    kin: &KineticsSpec,
    dt: f64,
) -> Result<Step> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    check_state(state, params)?;
    let mut stepper = Stepper::new(params, kin, *state.grid())?;
    match stepper.attempt(&state.comps, dt)? {
        Attempt::Accepted(comps, clamp) => Ok(Step {
            state: StateField { grid: state.grid, comps, t: state.t + dt },
            clamp,
        }),
        Attempt::Stiff(sigma) => Err(Error::Domain(format!(
            "reaction too stiff for dt = {dt}: decay rate {sigma:e}"
        ))),
        Attempt::Overshoot(x) => Err(Error::Domain(format!("negative overshoot {x:e}"))),
        Attempt::NonFinite => Err(Error::NonFinite { t: state.t + dt }),
    }
}

fn check_state(state: &StateField, params: &ModelParams) -> Result<()> {
    if state.dim() != params.dim() {
        return Err(Error::Domain(format!(
            "state has {} components, parameters describe {}",
            state.dim(),
            params.dim()
        )));
    }
    Ok(())
}

/// Everything needed to fill a [`MonitorRow`].
struct MonitorContext {
    q_pair: Option<EigenPair>,
    energies: Vec<Vec<EnergyConfig>>,
    reading: YMaxReading,
}

impl MonitorContext {
    fn new(params: &ModelParams, grid: &Grid, controls: &Controls) -> Result<Self> {
        let q_pair = solve_principal_with(
            params.du()[0],
            BoundaryVariant::OutflowRobin,
            grid,
            EigenControls::default(),
        )
        .ok();
        let energies = controls
            .energy_p
            .iter()
            .map(|&p| {
                (0..params.m())
                    .map(|i| EnergyConfig::minimal(params, i, p))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { q_pair, energies, reading: controls.y_max_reading })
    }

    fn row(&self, state: &StateField, params: &ModelParams, dt: f64, clamp: f64) -> MonitorRow {
        let grid = state.grid();
        let sup = state.comps.iter().map(|c| sup_norm(c)).collect();
        let l1 = state.comps.iter().map(|c| grid.trapezoid(c)).collect();
        let mass = weighted_mass_with(state, params, self.reading);
        let q = match &self.q_pair {
            Some(pair) => blowup_functional(state, pair, params.yu()[0], params.yv()[0])
                .map(|b| b.q)
                .unwrap_or(f64::NAN),
            None => f64::NAN,
        };
        let energies = self
            .energies
            .iter()
            .map(|cfgs| {
                cfgs.iter()
                    .enumerate()
                    .map(|(i, cfg)| {
                        hp_energy(state.u(i), state.v(i), grid, cfg).map(|e| e.integral).unwrap_or(f64::NAN)
                    })
                    .sum()
            })
            .collect();
        MonitorRow { t: state.t, dt, sup, l1, mass, q, energies, clamp }
    }
}

/// Adaptive IMEX integration from `initial` to `controls.t_end`.
pub fn simulate(
    initial: &StateField,
    params: &ModelParams,
    kin: &KineticsSpec,
    controls: &Controls,
) -> Result<SimulationResult> {
    controls.validate()?;
    check_state(initial, params)?;
    let initial_sup = initial.comps.iter().map(|c| sup_norm(c)).fold(0.0, f64::max);
    if initial_sup >= controls.sup_threshold {
        return Err(Error::Domain(format!(
            "sup_threshold {} does not exceed the initial sup norm {initial_sup}",
            controls.sup_threshold
        )));
    }
    let grid = *initial.grid();
    let mut stepper = Stepper::new(params, kin, grid)?;
    let ctx = MonitorContext::new(params, &grid, controls)?;

    let t0 = initial.t;
    let t_final = t0 + controls.t_end;
    let mut stride = controls.snapshot_stride.unwrap_or_else(|| {
        let steps = (controls.t_end / controls.dt_init).ceil().max(1.0) as usize;
        steps.div_ceil(controls.max_snapshots - 1).max(1)
    });

    let mut state = initial.clone();
    let mut monitors = vec![ctx.row(&state, params, 0.0, 0.0)];
    let mut snapshots = vec![(0usize, state.clone())];
    let mut dt = controls.dt_init;
    let mut streak = 0usize;
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let end_slack = 1e-12 * t_final.max(1.0);

    let verdict = loop {
        let remaining = t_final - state.t;
        if remaining <= end_slack {
            break Verdict::Completed { t_end: state.t };
        }
        if dt < controls.dt_min {
            break Verdict::BlowUp { t_detect: state.t, reason: BlowUpReason::DtCollapse };
        }
        let step = dt.min(remaining);
        match stepper.attempt(&state.comps, step)? {
            Attempt::Accepted(comps, clamp) => {
                let t = if remaining - step <= end_slack { t_final } else { state.t + step };
                state = StateField { grid, comps, t };
                accepted += 1;
                let row = ctx.row(&state, params, step, clamp);
                let peak = row.sup.iter().copied().fold(0.0, f64::max);
                monitors.push(row);
                if accepted % stride == 0 {
                    snapshots.push((accepted, state.clone()));
                    if snapshots.len() > controls.max_snapshots {
                        stride *= 2;
                        snapshots.retain(|(k, _)| k % stride == 0);
                    }
                }
                if peak > controls.sup_threshold {
                    break Verdict::BlowUp { t_detect: state.t, reason: BlowUpReason::SupThreshold };
                }
                streak += 1;
                if streak >= GROWTH_STREAK && dt < controls.dt_init {
                    dt = (2.0 * dt).min(controls.dt_init);
                    streak = 0;
                }
            }
            Attempt::Stiff(_) | Attempt::Overshoot(_) => {
                rejected += 1;
                dt *= 0.5;
                streak = 0;
            }
            Attempt::NonFinite => {
                break Verdict::BlowUp { t_detect: state.t, reason: BlowUpReason::NonFinite };
            }
        }
    };

    if snapshots.last().map(|(_, s)| s.t) != Some(state.t) {
        snapshots.push((accepted, state.clone()));
        if snapshots.len() > controls.max_snapshots {
            // drop the oldest interior snapshot, keep the initial one
            snapshots.remove(1);
        }
    }
    Ok(SimulationResult {
        monitors,
        snapshots: snapshots.into_iter().map(|(_, s)| s).collect(),
        final_state: state,
        verdict,
        accepted,
        rejected,
    })
}
