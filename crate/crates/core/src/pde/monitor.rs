//! Monitor rows and the a priori bound report.

use super::SimulationResult;
use crate::ModelParams;

/// Slack allowed on the substrate maximum principle.
pub const S_BOUND_SLACK: f64 = 1e-3;
/// Relative per-step tolerance for the "nonincreasing" L1 classification.
pub const L1_STEP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorRow {
    pub t: f64,
    /// Step that produced this row; 0 for the initial row.
    pub dt: f64,
    /// Sup norm per interleaved component.
    pub sup: Vec<f64>,
    /// Trapezoid L1 norm per interleaved component.
    pub l1: Vec<f64>,
    /// Weighted total mass.
    pub mass: f64,
    /// Blow-up functional of species 0 (NaN when its eigenpair is unavailable).
    pub q: f64,
    /// Summed `L^p` energies, one per requested exponent.
    pub energies: Vec<f64>,
    pub clamp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthClass {
    Bounded,
    Linear,
    Exponential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// `max_t ||S||_inf`.
    pub s_max: f64,
    /// `max{gamma_S, ||S_0||_inf}`.
    pub s_bound: f64,
    pub s_ok: bool,
    pub mass_class: GrowthClass,
    /// Per interleaved component: L1 norm never increased by more than the
    /// per-step tolerance.
    pub l1_nonincreasing: Vec<bool>,
    pub max_clamp: f64,
}

/// Compare the monitor series against the maximum principle and classify
/// the growth of the weighted mass.
pub fn monitor_bounds(result: &SimulationResult, params: &ModelParams) -> BoundReport {
    let rows = &result.monitors;
    let s_max = rows.iter().map(|r| r.sup[0]).fold(0.0, f64::max);
    let s_bound = params.gamma_s().max(rows[0].sup[0]);
    let dim = rows[0].l1.len();
    let l1_nonincreasing = (0..dim)
        .map(|k| {
            rows.windows(2)
                .all(|w| w[1].l1[k] <= w[0].l1[k] * (1.0 + L1_STEP_TOL) + 1e-300)
        })
        .collect();
    let times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let mass: Vec<f64> = rows.iter().map(|r| r.mass).collect();
    BoundReport {
        s_max,
        s_bound,
        s_ok: s_max <= s_bound + S_BOUND_SLACK,
        mass_class: classify_growth(&times, &mass),
        l1_nonincreasing,
        max_clamp: rows.iter().map(|r| r.clamp).fold(0.0, f64::max),
    }
}

/// Bounded when the late-half maximum stays within 10% of the early-half
/// maximum; otherwise exponential when the increment over the last third
/// exceeds 1.5 times the increment over the middle third, else linear.
pub fn classify_growth(times: &[f64], values: &[f64]) -> GrowthClass {
    let (t0, t1) = (times[0], *times.last().unwrap());
    let span = t1 - t0;
    if values.len() < 4 || span <= 0.0 {
        return GrowthClass::Bounded;
    }
    let mid = t0 + 0.5 * span;
    let mut early = f64::NEG_INFINITY;
    let mut late = f64::NEG_INFINITY;
    for (t, v) in times.iter().zip(values) {
        if *t <= mid {
            early = early.max(*v);
        } else {
            late = late.max(*v);
        }
    }
    if late <= 1.1 * early.max(0.0) + 1e-12 {
        return GrowthClass::Bounded;
    }
    let at = |frac: f64| {
        let target = t0 + frac * span;
        let idx = times.partition_point(|t| *t < target).min(times.len() - 1);
        values[idx]
    };
    let (a, b, c) = (at(1.0 / 3.0), at(2.0 / 3.0), at(1.0));
    let (mid_inc, late_inc) = (b - a, c - b);
    if mid_inc > 0.0 && late_inc > 1.5 * mid_inc {
        GrowthClass::Exponential
    } else {
        GrowthClass::Linear
    }
}
