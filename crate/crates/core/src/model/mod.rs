//! Model parameters, kinetics and the reaction vector field.
//!
//! State vectors use the interleaved ordering `w = (S, u_1, v_1, ..., u_m, v_m)`
//! of length `2m + 1`. For species `i`, `u_i` sits at index `2i + 1` and `v_i`
//! at index `2i + 2`.

mod conditions;
mod kinetics;

pub use conditions::{
    check_structural_conditions, ConditionReport, DissWeights, GrowthBound, SamplingBox,
    SpeciesBranch, Verdict, YieldClass, YMaxReading,
};
pub use kinetics::{FlocRate, GrowthRate, KineticsSpec};

use crate::{Error, Result};

/// Index of `u_i` in the interleaved state vector.
#[inline]
pub const fn u_index(i: usize) -> usize {
    2 * i + 1
}

/// Index of `v_i` in the interleaved state vector.
#[inline]
pub const fn v_index(i: usize) -> usize {
    2 * i + 2
}

/// Scalar constants of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    d0: f64,
    du: Vec<f64>,
    dv: Vec<f64>,
    yu: Vec<f64>,
    yv: Vec<f64>,
    gamma_s: f64,
    gamma_u: Vec<f64>,
    gamma_v: Vec<f64>,
}

impl ModelParams {
    /// Validated construction. Diffusivities and yields must be strictly
    /// positive, feeds nonnegative, and every per-species list of one length.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d0: f64,
        du: Vec<f64>,
        dv: Vec<f64>,
        yu: Vec<f64>,
        yv: Vec<f64>,
        gamma_s: f64,
        gamma_u: Vec<f64>,
        gamma_v: Vec<f64>,
    ) -> Result<Self> {
        let m = du.len();
        let mut problems = Vec::new();
        if m == 0 {
            problems.push("species count m must be at least 1".to_string());
        }
        for (name, list) in [
            ("dv", &dv),
            ("yu", &yu),
            ("yv", &yv),
            ("gamma_u", &gamma_u),
            ("gamma_v", &gamma_v),
        ] {
            if list.len() != m {
                problems.push(format!("{name} has {} entries, expected m = {m}", list.len()));
            }
        }
        let positive = |name: &str, x: f64, problems: &mut Vec<String>| {
            if !(x > 0.0 && x.is_finite()) {
                problems.push(format!("{name} must be strictly positive, got {x}"));
            }
        };
        let nonneg = |name: &str, x: f64, problems: &mut Vec<String>| {
            if !(x >= 0.0 && x.is_finite()) {
                problems.push(format!("{name} must be nonnegative, got {x}"));
            }
        };
        positive("d0", d0, &mut problems);
        nonneg("gamma_s", gamma_s, &mut problems);
        for (name, list) in [("du", &du), ("dv", &dv), ("yu", &yu), ("yv", &yv)] {
            for (i, &x) in list.iter().enumerate() {
                positive(&format!("{name}[{i}]"), x, &mut problems);
            }
        }
        for (name, list) in [("gamma_u", &gamma_u), ("gamma_v", &gamma_v)] {
            for (i, &x) in list.iter().enumerate() {
                nonneg(&format!("{name}[{i}]"), x, &mut problems);
            }
        }
        if !problems.is_empty() {
            return Err(Error::InvalidParams(problems.join("; ")));
        }
        Ok(Self { d0, du, dv, yu, yv, gamma_s, gamma_u, gamma_v })
    }

    /// Single species with no biomass in the feed.
    pub fn single(d0: f64, du: f64, dv: f64, yu: f64, yv: f64, gamma_s: f64) -> Result<Self> {
        Self::new(d0, vec![du], vec![dv], vec![yu], vec![yv], gamma_s, vec![0.0], vec![0.0])
    }

    pub fn m(&self) -> usize {
        self.du.len()
    }

    /// Number of state components, `2m + 1`.
    pub fn dim(&self) -> usize {
        2 * self.m() + 1
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn du(&self) -> &[f64] {
        &self.du
    }

    pub fn dv(&self) -> &[f64] {
        &self.dv
    }

    pub fn yu(&self) -> &[f64] {
        &self.yu
    }

    pub fn yv(&self) -> &[f64] {
        &self.yv
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }

    pub fn gamma_u(&self) -> &[f64] {
        &self.gamma_u
    }

    pub fn gamma_v(&self) -> &[f64] {
        &self.gamma_v
    }

    /// Diffusivity of interleaved component `k`.
    pub fn diffusivity(&self, k: usize) -> f64 {
        match k {
            0 => self.d0,
            k if k % 2 == 1 => self.du[(k - 1) / 2],
            k => self.dv[(k - 2) / 2],
        }
    }

    /// Inflow feed of interleaved component `k`.
    pub fn feed(&self, k: usize) -> f64 {
        match k {
            0 => self.gamma_s,
            k if k % 2 == 1 => self.gamma_u[(k - 1) / 2],
            k => self.gamma_v[(k - 2) / 2],
        }
    }

    /// Yield products `y_{u,i} y_{v,i}`.
    pub fn yield_products(&self) -> Vec<f64> {
        self.yu.iter().zip(&self.yv).map(|(a, b)| a * b).collect()
    }

    pub(crate) fn check_kinetics(&self, kin: &KineticsSpec) -> Result<()> {
        if kin.m() != self.m() {
            return Err(Error::InvalidKinetics(format!(
                "kinetics describe {} species, parameters {}",
                kin.m(),
                self.m()
            )));
        }
        Ok(())
    }
}

/// Evaluate `F(w)` for a nonnegative interleaved point.
///
/// The substrate component is `-sum_i (f_i(S) u_i + g_i(S) v_i)`.
pub fn reaction_field(params: &ModelParams, kin: &KineticsSpec, point: &[f64]) -> Result<Vec<f64>> {
    params.check_kinetics(kin)?;
    if point.len() != params.dim() {
        return Err(Error::Domain(format!(
            "point has {} components, expected {}",
            point.len(),
            params.dim()
        )));
    }
    if let Some(x) = point.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!("reaction field needs a nonnegative point, got {x}")));
    }
    let mut out = vec![0.0; point.len()];
    reaction_into(params, kin, point, &mut out);
    Ok(out)
}

/// Unchecked kernel of [`reaction_field`].
#[inline]
pub(crate) fn reaction_into(params: &ModelParams, kin: &KineticsSpec, w: &[f64], out: &mut [f64]) {
    let m = params.m();
    let s = w[0];
    let (mut su, mut sv) = (0.0, 0.0);
    for i in 0..m {
        su += w[u_index(i)];
        sv += w[v_index(i)];
    }
    let mut substrate = 0.0;
    for i in 0..m {
        let u = w[u_index(i)];
        let v = w[v_index(i)];
        let f = kin.f(i).eval_unchecked(s);
        let g = kin.g(i).eval_unchecked(s);
        let alpha = kin.alpha(i).eval_totals(su, sv);
        let beta = kin.beta(i).eval_totals(su, sv);
        substrate += f * u + g * v;
        out[u_index(i)] = f * u - alpha * u / params.yu[i] + beta * v;
        out[v_index(i)] = g * v + alpha * u - beta * v / params.yv[i];
    }
    out[0] = -substrate;
}
