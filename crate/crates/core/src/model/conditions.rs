//! Sampled certification of the structural conditions on the reaction field.
//!
//! Every check is exhaustive over a tensor grid of the box `[0, upper_k]`.
//! Sampling can refute a condition but never prove it, so `Satisfied` means
//! "no counterexample among the sampled points". Growth-type bounds
//! (`alpha, beta <= h (sum (u+v)^l + 1)` and the sub-cubic branch bound) are
//! tested at two scales: the bound is calibrated on the inner half box and a
//! point of the full box exceeding one and a half times that calibration is a
//! witness of super-exponent growth.

use super::{reaction_into, u_index, v_index, KineticsSpec, ModelParams};
use crate::{Error, Result};

/// Hard cap on the number of sampled points; per-axis resolution is reduced
/// to fit when the state dimension is large.
pub const MAX_SAMPLE_POINTS: usize = 1 << 20;

const GROWTH_FACTOR: f64 = 1.5;
const DELTA_DECAY: f64 = 0.75;

/// Interpretation of `y_max` in the mass-dissipation weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum YMaxReading {
    /// `max_i {y_{u,i}, y_{v,i}, 1}`.
    #[default]
    List,
    /// `max_i {y_{u,i} y_{v,i}, 1}`.
    Product,
}

impl YMaxReading {
    pub fn y_max(&self, params: &ModelParams) -> f64 {
        let pairs = params.yu().iter().zip(params.yv());
        match self {
            YMaxReading::List => pairs.fold(1.0_f64, |m, (a, b)| m.max(*a).max(*b)),
            YMaxReading::Product => pairs.fold(1.0_f64, |m, (a, b)| m.max(a * b)),
        }
    }

    /// `(y_max, 1 + y_{u,1}, 1 + y_{v,1}, ..., 1 + y_{u,m}, 1 + y_{v,m})`.
    pub fn weights(&self, params: &ModelParams) -> Vec<f64> {
        let mut w = Vec::with_capacity(params.dim());
        w.push(self.y_max(params));
        for i in 0..params.m() {
            w.push(1.0 + params.yu()[i]);
            w.push(1.0 + params.yv()[i]);
        }
        w
    }
}

/// Sampling box `[0, upper_k]` in interleaved coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingBox {
    upper: Vec<f64>,
    resolution: usize,
}

impl SamplingBox {
    pub fn new(upper: Vec<f64>, resolution: usize) -> Result<Self> {
        if upper.is_empty() || resolution < 2 {
            return Err(Error::Domain("sampling box needs a coordinate and resolution >= 2".into()));
        }
        if let Some(x) = upper.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(Error::Domain(format!("sampling box has empty extent {x}")));
        }
        Ok(Self { upper, resolution })
    }

    pub fn uniform(dim: usize, upper: f64, resolution: usize) -> Result<Self> {
        Self::new(vec![upper; dim], resolution)
    }

    /// 64 points per axis on `[0, 10]`.
    pub fn default_for(params: &ModelParams) -> Self {
        Self { upper: vec![10.0; params.dim()], resolution: 64 }
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    fn effective_resolution(&self) -> usize {
        let dim = self.upper.len() as u32;
        let mut r = self.resolution;
        while r > 2 && (r as u128).pow(dim) > MAX_SAMPLE_POINTS as u128 {
            r -= 1;
        }
        r
    }
}

/// Outcome of one sampled check.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// No sampled counterexample.
    Satisfied,
    /// Counterexample at `witness` (interleaved coordinates).
    Violated { witness: Vec<f64>, detail: String },
    NotApplicable { reason: String },
}

impl Verdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, Verdict::Satisfied)
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YieldClass {
    AllBelowOne,
    AtMostOneWithEquality,
    SomeAboveOne,
}

impl YieldClass {
    pub fn of(params: &ModelParams) -> Self {
        let products = params.yield_products();
        if products.iter().any(|p| *p > 1.0) {
            YieldClass::SomeAboveOne
        } else if products.iter().any(|p| *p == 1.0) {
            YieldClass::AtMostOneWithEquality
        } else {
            YieldClass::AllBelowOne
        }
    }
}

/// Weights and affine constants of `sum a_k F_k <= K1 sum w_k + K2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DissWeights {
    pub weights: Vec<f64>,
    /// `None` when an unbounded rate enters with a positive coefficient.
    pub k1: Option<f64>,
    pub k2: f64,
    pub reading: YMaxReading,
}

/// Exponent and sampled constant of a growth bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBound {
    pub exponent: f64,
    pub constant: f64,
}

/// Which alternative of the sub-cubic bound a species satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeciesBranch {
    /// `-alpha u / y_u + beta v`.
    Isolated,
    /// `alpha u - beta v / y_v`.
    Attached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct A6Params {
    /// Largest sampled constant over species.
    pub k: f64,
    /// Largest declared exponent over species.
    pub r: f64,
    pub branches: Vec<Option<SpeciesBranch>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub qp_ok: Verdict,
    pub diss_ok: Verdict,
    pub a5_ok: Verdict,
    pub a6_ok: Verdict,
    pub a7_ok: Verdict,
    pub diss_weights: DissWeights,
    pub a5_params: GrowthBound,
    pub a6_params: A6Params,
    pub a7_delta: Option<f64>,
    pub yuyv_class: YieldClass,
    pub points_sampled: usize,
    pub effective_resolution: usize,
}

#[derive(Debug, Clone)]
struct MaxTracker {
    full: f64,
    half: f64,
    arg: Vec<f64>,
}

impl MaxTracker {
    fn new() -> Self {
        Self { full: f64::NEG_INFINITY, half: f64::NEG_INFINITY, arg: Vec::new() }
    }

    fn push(&mut self, value: f64, inner: bool, w: &[f64]) {
        if value > self.full {
            self.full = value;
            self.arg = w.to_vec();
        }
        if inner && value > self.half {
            self.half = value;
        }
    }

    /// Growth test: the full-box maximum may exceed the inner one by at most
    /// [`GROWTH_FACTOR`].
    fn passes(&self) -> bool {
        self.full <= GROWTH_FACTOR * self.half.max(0.0) + 1e-12
    }
}

/// Run every structural check on `sampling`.
pub fn check_structural_conditions(
    params: &ModelParams,
    kin: &KineticsSpec,
    sampling: &SamplingBox,
    reading: YMaxReading,
) -> Result<ConditionReport> {
    params.check_kinetics(kin)?;
    let dim = params.dim();
    if sampling.upper.len() != dim {
        return Err(Error::Domain(format!(
            "sampling box has {} coordinates, state has {dim}",
            sampling.upper.len()
        )));
    }
    let m = params.m();
    let res = sampling.effective_resolution();

    let weights = reading.weights(params);
    let y_max = weights[0];
    let diss_k1 = diss_constant(params, kin, y_max);
    let k1_check = diss_k1.unwrap_or_else(|| diss_constant_bounded_part(params, kin, y_max));

    let l_declared = (0..m)
        .flat_map(|i| [kin.alpha(i).degree(), kin.beta(i).degree()])
        .fold(1.0_f64, f64::max);
    // declared exponents of the two branches: (isolated, attached)
    let r_declared: Vec<(f64, f64)> = (0..m)
        .map(|i| ((kin.beta(i).degree() + 1.0).max(1.0), (kin.alpha(i).degree() + 1.0).max(1.0)))
        .collect();

    let mut qp_witness: Option<(Vec<f64>, usize, f64)> = None;
    let mut diss_worst: Option<(Vec<f64>, f64)> = None;
    let mut a5 = MaxTracker::new();
    let mut a6: Vec<[MaxTracker; 2]> = (0..m).map(|_| [MaxTracker::new(), MaxTracker::new()]).collect();
    let mut a7_min_full = f64::INFINITY;
    let mut a7_min_half = f64::INFINITY;
    let mut a7_arg = Vec::new();

    let mut idx = vec![0usize; dim];
    let mut w = vec![0.0; dim];
    let mut f = vec![0.0; dim];
    let mut points = 0usize;
    loop {
        for k in 0..dim {
            w[k] = sampling.upper[k] * idx[k] as f64 / (res - 1) as f64;
        }
        let inner = (0..dim).all(|k| 2 * idx[k] <= res - 1);
        reaction_into(params, kin, &w, &mut f);
        points += 1;

        let scale = 1.0 + f.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for k in 0..dim {
            if w[k] == 0.0 && f[k] < -1e-12 * scale && qp_witness.is_none() {
                qp_witness = Some((w.clone(), k, f[k]));
            }
        }

        let lhs: f64 = weights.iter().zip(&f).map(|(a, b)| a * b).sum();
        let total: f64 = w.iter().sum();
        let rhs = k1_check * total;
        let excess = lhs - rhs;
        if excess > 1e-10 * (1.0 + lhs.abs() + rhs.abs())
            && diss_worst.as_ref().is_none_or(|(_, e)| excess > *e)
        {
            diss_worst = Some((w.clone(), excess));
        }

        let (mut su, mut sv) = (0.0, 0.0);
        for i in 0..m {
            su += w[u_index(i)];
            sv += w[v_index(i)];
        }
        let pair_pow = |e: f64| -> f64 {
            (0..m).map(|j| (w[u_index(j)] + w[v_index(j)]).powf(e)).sum::<f64>()
        };
        let p_l = pair_pow(l_declared);
        let mut sum_exchange = 0.0;
        for i in 0..m {
            let alpha = kin.alpha(i).eval_totals(su, sv);
            let beta = kin.beta(i).eval_totals(su, sv);
            a5.push(alpha.max(beta) / (p_l + 1.0), inner, &w);
            let u = w[u_index(i)];
            let v = w[v_index(i)];
            let branch_iso = -alpha * u / params.yu()[i] + beta * v;
            let branch_att = alpha * u - beta * v / params.yv()[i];
            let (r_iso, r_att) = r_declared[i];
            a6[i][0].push(branch_iso / (pair_pow(r_iso) + 1.0), inner, &w);
            a6[i][1].push(branch_att / (pair_pow(r_att) + 1.0), inner, &w);
            sum_exchange += alpha * u + beta * v;
        }
        if su + sv > 0.0 {
            let ratio = (sum_exchange + 1.0) / (su + sv);
            if ratio < a7_min_full {
                a7_min_full = ratio;
                a7_arg = w.clone();
            }
            if inner {
                a7_min_half = a7_min_half.min(ratio);
            }
        }

        // mixed-radix increment
        let mut k = 0;
        loop {
            if k == dim {
                break;
            }
            idx[k] += 1;
            if idx[k] < res {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == dim {
            break;
        }
    }

    let qp_ok = match qp_witness {
        None => Verdict::Satisfied,
        Some((witness, k, value)) => Verdict::Violated {
            witness,
            detail: format!("component {k} vanishes but F_{k} = {value:e} < 0"),
        },
    };

    let diss_ok = match (diss_worst, diss_k1) {
        (Some((witness, excess)), _) => Verdict::Violated {
            witness,
            detail: format!("weighted sum exceeds K1 sum(w) + K2 by {excess:e} (K1 = {k1_check})"),
        },
        (None, Some(_)) => Verdict::Satisfied,
        (None, None) => Verdict::NotApplicable {
            reason: "an unbounded rate enters with a positive weight; no affine bound constructed"
                .into(),
        },
    };

    let a5_ok = if a5.passes() {
        Verdict::Satisfied
    } else {
        Verdict::Violated {
            witness: a5.arg.clone(),
            detail: format!(
                "rate / (sum (u+v)^{l_declared} + 1) reaches {:.6e} against inner calibration {:.6e}",
                a5.full, a5.half
            ),
        }
    };
    let a5_params = GrowthBound { exponent: l_declared, constant: a5.full.max(0.0) };

    let mut branches = Vec::with_capacity(m);
    let mut a6_ok = Verdict::Satisfied;
    let mut a6_k = 0.0_f64;
    let mut a6_r = 1.0_f64;
    for i in 0..m {
        let (r_iso, r_att) = r_declared[i];
        let mut candidates = vec![
            (SpeciesBranch::Isolated, r_iso, &a6[i][0]),
            (SpeciesBranch::Attached, r_att, &a6[i][1]),
        ];
        candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
        let admissible: Vec<_> = candidates.iter().filter(|c| c.1 < 3.0).collect();
        if admissible.is_empty() {
            branches.push(None);
            if a6_ok.is_satisfied() {
                a6_ok = Verdict::NotApplicable {
                    reason: format!(
                        "species {i}: both branches have declared growth exponent >= 3 (isolated {r_iso}, attached {r_att})"
                    ),
                };
            }
            continue;
        }
        match admissible.iter().find(|c| c.2.passes()) {
            Some(c) => {
                branches.push(Some(c.0));
                a6_k = a6_k.max(c.2.full.max(0.0));
                a6_r = a6_r.max(c.1);
            }
            None => {
                branches.push(None);
                let c = admissible[0];
                if !a6_ok.is_violated() {
                    a6_ok = Verdict::Violated {
                        witness: c.2.arg.clone(),
                        detail: format!(
                            "species {i}: {:?} branch outgrows exponent {} ({:.6e} vs inner {:.6e})",
                            c.0, c.1, c.2.full, c.2.half
                        ),
                    };
                }
            }
        }
    }

    let yuyv_class = YieldClass::of(params);
    let (a7_ok, a7_delta) = if yuyv_class != YieldClass::AllBelowOne {
        (
            Verdict::NotApplicable { reason: "requires y_u y_v < 1 for every species".into() },
            None,
        )
    } else if a7_min_full < DELTA_DECAY * a7_min_half {
        (
            Verdict::Violated {
                witness: a7_arg,
                detail: format!(
                    "exchange-to-mass ratio falls to {a7_min_full:.6e} from inner {a7_min_half:.6e}"
                ),
            },
            None,
        )
    } else {
        (Verdict::Satisfied, Some(a7_min_full))
    };

    Ok(ConditionReport {
        qp_ok,
        diss_ok,
        a5_ok,
        a6_ok,
        a7_ok,
        diss_weights: DissWeights { weights, k1: diss_k1, k2: 0.0, reading },
        a5_params,
        a6_params: A6Params { k: a6_k, r: a6_r, branches },
        a7_delta,
        yuyv_class,
        points_sampled: points,
        effective_resolution: res,
    })
}

/// Per-species coefficients of `u_i` and `v_i` in `weights . F`:
/// `(1 + y_u - y_max) f + (y_v - 1/y_u) alpha` and
/// `(1 + y_v - y_max) g + (y_u - 1/y_v) beta`.
fn coefficient_bounds(
    params: &ModelParams,
    kin: &KineticsSpec,
    y_max: f64,
    include_unbounded: bool,
) -> Option<f64> {
    let mut k1 = 0.0_f64;
    for i in 0..params.m() {
        let (yu, yv) = (params.yu()[i], params.yv()[i]);
        let mut cu = (1.0 + yu - y_max).max(0.0) * kin.f(i).supremum();
        let mut cv = (1.0 + yv - y_max).max(0.0) * kin.g(i).supremum();
        let ca = yv - 1.0 / yu;
        let cb = yu - 1.0 / yv;
        if ca > 0.0 {
            match kin.alpha(i).bound() {
                Some(b) => cu += ca * b,
                None if include_unbounded => return None,
                None => {}
            }
        }
        if cb > 0.0 {
            match kin.beta(i).bound() {
                Some(b) => cv += cb * b,
                None if include_unbounded => return None,
                None => {}
            }
        }
        k1 = k1.max(cu).max(cv);
    }
    Some(k1)
}

fn diss_constant(params: &ModelParams, kin: &KineticsSpec, y_max: f64) -> Option<f64> {
    coefficient_bounds(params, kin, y_max, true)
}

fn diss_constant_bounded_part(params: &ModelParams, kin: &KineticsSpec, y_max: f64) -> f64 {
    coefficient_bounds(params, kin, y_max, false).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FlocRate, GrowthRate};

    fn linear_case(y: f64) -> (ModelParams, KineticsSpec) {
        let p = ModelParams::single(1.0, 1.0, 1.0, y, y, 1.0).unwrap();
        let k = KineticsSpec::single(
            GrowthRate::Monod { a: 4.0, b: 1.0 },
            GrowthRate::Monod { a: 5.0, b: 1.0 },
            FlocRate::LinearSum(1.0),
            FlocRate::LinearSum(1.0),
        )
        .unwrap();
        (p, k)
    }

    #[test]
    fn linear_rates_half_yields() {
        let (p, k) = linear_case(0.5);
        let r = check_structural_conditions(&p, &k, &SamplingBox::default_for(&p), YMaxReading::List)
            .unwrap();
        assert_eq!(r.qp_ok, Verdict::Satisfied);
        assert_eq!(r.diss_ok, Verdict::Satisfied);
        assert_eq!(r.a5_ok, Verdict::Satisfied);
        assert_eq!(r.a5_params.exponent, 1.0);
        assert_eq!(r.a6_ok, Verdict::Satisfied);
        assert_eq!(r.a6_params.r, 2.0);
        assert_eq!(r.a7_ok, Verdict::Satisfied);
        assert_eq!(r.yuyv_class, YieldClass::AllBelowOne);
        assert_eq!(r.points_sampled, 64 * 64 * 64);
        // (U+V)^2 + 1 >= 2 (U+V)
        assert!((r.a7_delta.unwrap() - 2.0).abs() < 0.05);
    }

    #[test]
    fn large_yields_break_dissipation() {
        let (p, k) = linear_case(2.0);
        let r = check_structural_conditions(&p, &k, &SamplingBox::default_for(&p), YMaxReading::List)
            .unwrap();
        assert_eq!(r.yuyv_class, YieldClass::SomeAboveOne);
        assert!(matches!(r.a7_ok, Verdict::NotApplicable { .. } | Verdict::Violated { .. }));
        assert_eq!(r.qp_ok, Verdict::Satisfied);
        match &r.diss_ok {
            Verdict::Violated { witness, .. } => {
                // the witness really violates the affine bound
                let f = crate::model::reaction_field(&p, &k, witness).unwrap();
                let lhs: f64 = r.diss_weights.weights.iter().zip(&f).map(|(a, b)| a * b).sum();
                assert!(lhs > 0.0);
            }
            other => panic!("expected a DISS violation, got {other:?}"),
        }
    }

    #[test]
    fn reference_rates_are_outside_subcubic_range() {
        let p = ModelParams::single(1.0, 1.0, 10.0, 0.1, 0.1, 1.0).unwrap();
        let k = KineticsSpec::single(
            GrowthRate::Monod { a: 4.0, b: 1.0 },
            GrowthRate::Monod { a: 5.0, b: 1.0 },
            FlocRate::PaperAlpha,
            FlocRate::PaperBeta,
        )
        .unwrap();
        let r = check_structural_conditions(&p, &k, &SamplingBox::default_for(&p), YMaxReading::List)
            .unwrap();
        assert_eq!(r.a5_ok, Verdict::Satisfied);
        assert_eq!(r.a5_params.exponent, 2.0);
        assert!(matches!(r.a6_ok, Verdict::NotApplicable { .. }));
        assert_eq!(r.diss_ok, Verdict::Satisfied);
    }

    #[test]
    fn vanishing_exchange_refutes_a7() {
        let p = ModelParams::single(1.0, 1.0, 1.0, 0.5, 0.5, 1.0).unwrap();
        let k = KineticsSpec::single(
            GrowthRate::Zero,
            GrowthRate::Zero,
            FlocRate::Constant(0.0),
            FlocRate::Constant(0.0),
        )
        .unwrap();
        let r = check_structural_conditions(&p, &k, &SamplingBox::default_for(&p), YMaxReading::List)
            .unwrap();
        assert!(r.a7_ok.is_violated());
    }

    #[test]
    fn understated_exponent_is_caught() {
        // exponent 4 rate: A5 holds with l = 4 (declared), but the attached
        // branch has degree 5 and the isolated one too, so A6 is out of range
        let p = ModelParams::single(1.0, 1.0, 1.0, 0.5, 0.5, 1.0).unwrap();
        let k = KineticsSpec::single(
            GrowthRate::Zero,
            GrowthRate::Zero,
            FlocRate::PolynomialSum { c: 1.0, l: 4.0 },
            FlocRate::Constant(1.0),
        )
        .unwrap();
        let r = check_structural_conditions(&p, &k, &SamplingBox::default_for(&p), YMaxReading::List)
            .unwrap();
        assert_eq!(r.a5_params.exponent, 4.0);
        assert_eq!(r.a5_ok, Verdict::Satisfied);
        // isolated branch -alpha u/y_u + v has degree 1 -> r = 1
        assert_eq!(r.a6_ok, Verdict::Satisfied);
        assert_eq!(r.a6_params.branches, vec![Some(SpeciesBranch::Isolated)]);
    }

    #[test]
    fn empty_box_rejected() {
        assert!(SamplingBox::new(vec![10.0, 0.0, 10.0], 64).is_err());
        assert!(SamplingBox::new(vec![], 64).is_err());
        assert!(SamplingBox::uniform(3, 10.0, 1).is_err());
        let (p, k) = linear_case(0.5);
        let wrong = SamplingBox::uniform(5, 10.0, 8).unwrap();
        assert!(check_structural_conditions(&p, &k, &wrong, YMaxReading::List).is_err());
    }

    #[test]
    fn deterministic_reports() {
        let (p, k) = linear_case(2.0);
        let b = SamplingBox::uniform(3, 10.0, 24).unwrap();
        let a = check_structural_conditions(&p, &k, &b, YMaxReading::Product).unwrap();
        let c = check_structural_conditions(&p, &k, &b, YMaxReading::Product).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn resolution_reduced_for_many_species() {
        let p = ModelParams::new(
            1.0,
            vec![1.0; 3],
            vec![1.0; 3],
            vec![0.5; 3],
            vec![0.5; 3],
            1.0,
            vec![0.0; 3],
            vec![0.0; 3],
        )
        .unwrap();
        let k = KineticsSpec::new(
            vec![GrowthRate::Monod { a: 1.0, b: 1.0 }; 3],
            vec![GrowthRate::Monod { a: 1.0, b: 1.0 }; 3],
            vec![FlocRate::LinearSum(1.0); 3],
            vec![FlocRate::LinearSum(1.0); 3],
        )
        .unwrap();
        let r = check_structural_conditions(&p, &k, &SamplingBox::default_for(&p), YMaxReading::List)
            .unwrap();
        assert!(r.points_sampled <= MAX_SAMPLE_POINTS);
        assert_eq!(r.points_sampled, r.effective_resolution.pow(7));
        assert!(r.qp_ok.is_satisfied() && r.diss_ok.is_satisfied());
    }

    #[test]
    fn y_max_readings_differ() {
        let p = ModelParams::single(1.0, 1.0, 1.0, 2.0, 2.0, 1.0).unwrap();
        assert_eq!(YMaxReading::List.y_max(&p), 2.0);
        assert_eq!(YMaxReading::Product.y_max(&p), 4.0);
        let q = ModelParams::single(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(YMaxReading::List.weights(&q), vec![1.0, 2.0, 2.0]);
        assert_eq!(YMaxReading::Product.weights(&q), vec![1.0, 2.0, 2.0]);
    }
}
