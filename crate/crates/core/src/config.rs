//! Run configuration files.
//!
//! A configuration is a TOML document with the sections `[model]`,
//! `[kinetics]`, `[initial]`, `[controls]` and `[outputs]`, plus optional
//! top-level `name` and `description` strings. Per-species quantities are
//! arrays of length `m`. Kinetic descriptors are inline tables tagged by
//! `kind`:
//!
//! ```toml
//! [kinetics]
//! growth_f = [{ kind = "haldane", a = 3.0, b = 1.0, c = 1.0 }]
//! growth_g = [{ kind = "monod", a = 5.0, b = 1.0 }]
//! floc_alpha = [{ kind = "paper_alpha" }]
//! floc_beta = [{ kind = "polynomial_sum", c = 1.0, l = 2.0 }]
//! ```
//!
//! Initial profiles are either numbers or tables `{ x = [...], values = [...] }`
//! interpolated linearly between the listed abscissae.
//!
//! Parsing collects every problem (unknown keys, missing keys, type errors,
//! parameter violations) into a single [`Error::Config`].

use toml::{Table, Value};

use crate::model::YMaxReading;
use crate::pde::{Controls, StateField};
use crate::steady::{SteadyControls, SteadyOperator};
use crate::{Error, FlocRate, Grid, GrowthRate, KineticsSpec, ModelParams, Result};

/// Default extinction thresholds of the run verdict.
pub const DEFAULT_EXTINCT_ABS: f64 = 1e-2;
pub const DEFAULT_EXTINCT_REL: f64 = 0.1;
pub const DEFAULT_GRID_N: usize = 201;

/// Initial profile of one component.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// Piecewise-linear through `(x_k, values_k)`, constant beyond the ends.
    Table { x: Vec<f64>, values: Vec<f64> },
}

impl Profile {
    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        match self {
            Profile::Constant(c) => vec![*c; grid.n()],
            Profile::Table { x, values } => grid.sample(|z| {
                let k = x.partition_point(|xk| *xk <= z);
                if k == 0 {
                    values[0]
                } else if k == x.len() {
                    values[x.len() - 1]
                } else {
                    let t = (z - x[k - 1]) / (x[k] - x[k - 1]);
                    values[k - 1] + t * (values[k] - values[k - 1])
                }
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub s: Profile,
    pub u: Vec<Profile>,
    pub v: Vec<Profile>,
}

impl InitialData {
    pub fn to_state(&self, grid: Grid) -> Result<StateField> {
        let mut comps = vec![self.s.sample(&grid)];
        for (u, v) in self.u.iter().zip(&self.v) {
            comps.push(u.sample(&grid));
            comps.push(v.sample(&grid));
        }
        StateField::new(grid, comps, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunControls {
    pub grid_n: usize,
    pub t_end: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub sup_threshold: f64,
    pub snapshot_stride: Option<usize>,
    /// Also solve for a steady state with this operator.
    pub steady: Option<SteadyOperator>,
    pub steady_tol: f64,
    pub steady_max_iter: usize,
    pub steady_damping: f64,
}

impl Default for RunControls {
    fn default() -> Self {
        let c = Controls::default();
        let s = SteadyControls::default();
        Self {
            grid_n: DEFAULT_GRID_N,
            t_end: c.t_end,
            dt_init: c.dt_init,
            dt_min: c.dt_min,
            sup_threshold: c.sup_threshold,
            snapshot_stride: None,
            steady: None,
            steady_tol: s.tol,
            steady_max_iter: s.max_iter,
            steady_damping: s.damping,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub energy_p: Vec<u32>,
    pub max_snapshots: usize,
    pub write_snapshots: bool,
    pub y_max_reading: YMaxReading,
    pub extinct_abs: f64,
    pub extinct_rel: f64,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            energy_p: Vec::new(),
            max_snapshots: 200,
            write_snapshots: true,
            y_max_reading: YMaxReading::List,
            extinct_abs: DEFAULT_EXTINCT_ABS,
            extinct_rel: DEFAULT_EXTINCT_REL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: Option<String>,
    pub description: Option<String>,
    pub params: ModelParams,
    pub kin: KineticsSpec,
    pub initial: InitialData,
    pub controls: RunControls,
    pub outputs: Outputs,
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.controls.grid_n)
    }

    pub fn initial_state(&self) -> Result<StateField> {
        self.initial.to_state(self.grid()?)
    }

    pub fn sim_controls(&self) -> Controls {
        Controls {
            t_end: self.controls.t_end,
            dt_init: self.controls.dt_init,
            dt_min: self.controls.dt_min,
            sup_threshold: self.controls.sup_threshold,
            snapshot_stride: self.controls.snapshot_stride,
            max_snapshots: self.outputs.max_snapshots,
            energy_p: self.outputs.energy_p.clone(),
            y_max_reading: self.outputs.y_max_reading,
        }
    }

    pub fn steady_controls(&self) -> SteadyControls {
        SteadyControls {
            tol: self.controls.steady_tol,
            max_iter: self.controls.steady_max_iter,
            damping: self.controls.steady_damping,
            operator: self.controls.steady.unwrap_or_default(),
        }
    }

    /// Canonical TOML rendering; [`parse_config`] reads it back unchanged.
    pub fn to_toml(&self) -> String {
        render(self)
    }
}

/// Collects problems while walking the document.
struct Walker {
    problems: Vec<String>,
}

impl Walker {
    fn section<'a>(&mut self, root: &'a Table, name: &str, required: bool) -> Option<&'a Table> {
        match root.get(name) {
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.problems.push(format!("[{name}] must be a table"));
                None
            }
            None => {
                if required {
                    self.problems.push(format!("missing section [{name}]"));
                }
                None
            }
        }
    }

    fn unknown(&mut self, table: &Table, section: &str, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                let at = if section.is_empty() { key.clone() } else { format!("{section}.{key}") };
                self.problems.push(format!("unknown key {at}"));
            }
        }
    }

    fn number(&mut self, v: &Value, at: &str) -> Option<f64> {
        match v {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.problems.push(format!("{at} must be a number"));
                None
            }
        }
    }

    fn req_number(&mut self, t: &Table, section: &str, key: &str) -> Option<f64> {
        let at = format!("{section}.{key}");
        match t.get(key) {
            Some(v) => self.number(v, &at),
            None => {
                self.problems.push(format!("missing key {at}"));
                None
            }
        }
    }

    fn opt_number(&mut self, t: &Table, section: &str, key: &str) -> Option<Option<f64>> {
        match t.get(key) {
            Some(v) => self.number(v, &format!("{section}.{key}")).map(Some),
            None => Some(None),
        }
    }

    fn opt_count(&mut self, t: &Table, section: &str, key: &str) -> Option<Option<usize>> {
        match t.get(key) {
            Some(Value::Integer(i)) if *i >= 0 => Some(Some(*i as usize)),
            Some(_) => {
                self.problems.push(format!("{section}.{key} must be a nonnegative integer"));
                None
            }
            None => Some(None),
        }
    }

    fn numbers(&mut self, v: &Value, at: &str) -> Option<Vec<f64>> {
        match v {
            Value::Array(a) => {
                let out: Vec<Option<f64>> =
                    a.iter().enumerate().map(|(i, x)| self.number(x, &format!("{at}[{i}]"))).collect();
                out.into_iter().collect()
            }
            _ => {
                self.problems.push(format!("{at} must be an array of numbers"));
                None
            }
        }
    }

    fn list<'a>(&mut self, t: &'a Table, section: &str, key: &str, required: bool) -> Option<&'a [Value]> {
        match t.get(key) {
            Some(Value::Array(a)) => Some(a.as_slice()),
            Some(_) => {
                self.problems.push(format!("{section}.{key} must be an array"));
                None
            }
            None => {
                if required {
                    self.problems.push(format!("missing key {section}.{key}"));
                }
                None
            }
        }
    }

    fn descriptor<'a>(&mut self, v: &'a Value, at: &str) -> Option<(&'a str, &'a Table)> {
        let Value::Table(t) = v else {
            self.problems.push(format!("{at} must be a table with a `kind`"));
            return None;
        };
        match t.get("kind") {
            Some(Value::String(k)) => Some((k.as_str(), t)),
            _ => {
                self.problems.push(format!("{at}.kind must be a string"));
                None
            }
        }
    }

    fn growth(&mut self, v: &Value, at: &str) -> Option<GrowthRate> {
        let (kind, t) = self.descriptor(v, at)?;
        let get = |w: &mut Self, key: &str| w.req_number(t, at, key);
        match kind {
            "monod" => {
                self.unknown(t, at, &["kind", "a", "b"]);
                Some(GrowthRate::Monod { a: get(self, "a")?, b: get(self, "b")? })
            }
            "haldane" => {
                self.unknown(t, at, &["kind", "a", "b", "c"]);
                let (a, b, c) = (get(self, "a"), get(self, "b"), get(self, "c"));
                Some(GrowthRate::Haldane { a: a?, b: b?, c: c? })
            }
            "zero" => {
                self.unknown(t, at, &["kind"]);
                Some(GrowthRate::Zero)
            }
            other => {
                self.problems.push(format!(
                    "{at}.kind = \"{other}\" is not one of monod, haldane, zero"
                ));
                None
            }
        }
    }

    fn floc(&mut self, v: &Value, at: &str) -> Option<FlocRate> {
        let (kind, t) = self.descriptor(v, at)?;
        match kind {
            "constant" | "linear_sum" => {
                self.unknown(t, at, &["kind", "c"]);
                let c = self.req_number(t, at, "c")?;
                Some(if kind == "constant" { FlocRate::Constant(c) } else { FlocRate::LinearSum(c) })
            }
            "paper_alpha" => {
                self.unknown(t, at, &["kind"]);
                Some(FlocRate::PaperAlpha)
            }
            "paper_beta" => {
                self.unknown(t, at, &["kind"]);
                Some(FlocRate::PaperBeta)
            }
            "polynomial_sum" => {
                self.unknown(t, at, &["kind", "c", "l"]);
                let (c, l) = (self.req_number(t, at, "c"), self.req_number(t, at, "l"));
                Some(FlocRate::PolynomialSum { c: c?, l: l? })
            }
            other => {
                self.problems.push(format!(
                    "{at}.kind = \"{other}\" is not one of constant, linear_sum, paper_alpha, paper_beta, polynomial_sum"
                ));
                None
            }
        }
    }

    fn profile(&mut self, v: &Value, at: &str) -> Option<Profile> {
        match v {
            Value::Float(_) | Value::Integer(_) => self.number(v, at).map(Profile::Constant),
            Value::Table(t) => {
                self.unknown(t, at, &["x", "values"]);
                let x = t.get("x").and_then(|x| self.numbers(x, &format!("{at}.x")));
                let values = t.get("values").and_then(|x| self.numbers(x, &format!("{at}.values")));
                let (x, values) = match (x, values) {
                    (Some(x), Some(v)) => (x, v),
                    _ => {
                        self.problems.push(format!("{at} needs numeric arrays x and values"));
                        return None;
                    }
                };
                if x.is_empty() || x.len() != values.len() {
                    self.problems.push(format!("{at}: x and values must be nonempty and of equal length"));
                    return None;
                }
                if x.windows(2).any(|w| w[1] <= w[0]) || x[0] < 0.0 || x[x.len() - 1] > 1.0 {
                    self.problems.push(format!("{at}.x must increase strictly within [0, 1]"));
                    return None;
                }
                if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    self.problems.push(format!("{at}.values must be finite and nonnegative"));
                    return None;
                }
                Some(Profile::Table { x, values })
            }
            _ => {
                self.problems.push(format!("{at} must be a number or a table {{ x, values }}"));
                None
            }
        }
    }

    fn string<'a>(&mut self, t: &'a Table, section: &str, key: &str) -> Option<Option<&'a str>> {
        match t.get(key) {
            Some(Value::String(s)) => Some(Some(s.as_str())),
            Some(_) => {
                self.problems.push(format!("{section}.{key} must be a string"));
                None
            }
            None => Some(None),
        }
    }
}

const MODEL_KEYS: &[&str] = &["m", "d0", "du", "dv", "yu", "yv", "gamma_s", "gamma_u", "gamma_v"];
const KINETICS_KEYS: &[&str] = &["growth_f", "growth_g", "floc_alpha", "floc_beta"];
const INITIAL_KEYS: &[&str] = &["S", "u", "v"];
const CONTROL_KEYS: &[&str] = &[
    "grid_n",
    "t_end",
    "dt_init",
    "dt_min",
    "sup_threshold",
    "snapshot_stride",
    "steady",
    "steady_tol",
    "steady_max_iter",
    "steady_damping",
];
const OUTPUT_KEYS: &[&str] = &[
    "energy_p",
    "max_snapshots",
    "write_snapshots",
    "y_max_reading",
    "extinct_abs",
    "extinct_rel",
];

fn steady_name(op: SteadyOperator) -> &'static str {
    match op {
        SteadyOperator::Coexistence => "coexistence",
        SteadyOperator::ExtinctionAttached => "extinction_attached",
        SteadyOperator::ExtinctionIsolated => "extinction_isolated",
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![format!("malformed document: {e}")]))?;
    let mut w = Walker { problems: Vec::new() };
    w.unknown(&root, "", &["name", "description", "model", "kinetics", "initial", "controls", "outputs"]);
    let name = w.string(&root, "", "name").flatten().map(str::to_string);
    let description = w.string(&root, "", "description").flatten().map(str::to_string);

    let empty = Table::new();
    let model = w.section(&root, "model", true);
    let kinetics = w.section(&root, "kinetics", true);
    let initial = w.section(&root, "initial", true);
    let controls = w.section(&root, "controls", false).unwrap_or(&empty);
    let outputs = w.section(&root, "outputs", false).unwrap_or(&empty);
    let model_t = model.unwrap_or(&empty);
    let kin_t = kinetics.unwrap_or(&empty);
    let init_t = initial.unwrap_or(&empty);
    w.unknown(model_t, "model", MODEL_KEYS);
    w.unknown(kin_t, "kinetics", KINETICS_KEYS);
    w.unknown(init_t, "initial", INITIAL_KEYS);
    w.unknown(controls, "controls", CONTROL_KEYS);
    w.unknown(outputs, "outputs", OUTPUT_KEYS);

    // [model]
    let m = match model_t.get("m") {
        Some(Value::Integer(i)) if *i >= 1 => Some(*i as usize),
        Some(_) => {
            w.problems.push("model.m must be a positive integer".into());
            None
        }
        None => {
            w.problems.push("missing key model.m".into());
            None
        }
    };
    let d0 = w.req_number(model_t, "model", "d0");
    let gamma_s = w.req_number(model_t, "model", "gamma_s");
    let per_species = |w: &mut Walker, key: &str, required: bool| -> Option<Vec<f64>> {
        let at = format!("model.{key}");
        match model_t.get(key) {
            Some(v) => {
                let xs = w.numbers(v, &at)?;
                if let Some(m) = m {
                    if xs.len() != m {
                        w.problems.push(format!("{at} has {} entries, expected m = {m}", xs.len()));
                        return None;
                    }
                }
                Some(xs)
            }
            None if required => {
                w.problems.push(format!("missing key {at}"));
                None
            }
            None => m.map(|m| vec![0.0; m]),
        }
    };
    let du = per_species(&mut w, "du", true);
    let dv = per_species(&mut w, "dv", true);
    let yu = per_species(&mut w, "yu", true);
    let yv = per_species(&mut w, "yv", true);
    let gamma_u = per_species(&mut w, "gamma_u", false);
    let gamma_v = per_species(&mut w, "gamma_v", false);

    // [kinetics]
    let descriptors = |w: &mut Walker, key: &str| -> Option<&[Value]> {
        let items = w.list(kin_t, "kinetics", key, true)?;
        if let Some(m) = m {
            if items.len() != m {
                w.problems.push(format!("kinetics.{key} has {} entries, expected m = {m}", items.len()));
                return None;
            }
        }
        Some(items)
    };
    let growth = |w: &mut Walker, items: Option<&[Value]>, key: &str| -> Option<Vec<GrowthRate>> {
        let out: Vec<_> = items?
            .iter()
            .enumerate()
            .map(|(i, v)| w.growth(v, &format!("kinetics.{key}[{i}]")))
            .collect();
        out.into_iter().collect()
    };
    let flocs = |w: &mut Walker, items: Option<&[Value]>, key: &str| -> Option<Vec<FlocRate>> {
        let out: Vec<_> = items?
            .iter()
            .enumerate()
            .map(|(i, v)| w.floc(v, &format!("kinetics.{key}[{i}]")))
            .collect();
        out.into_iter().collect()
    };
    let items_f = descriptors(&mut w, "growth_f");
    let items_g = descriptors(&mut w, "growth_g");
    let items_a = descriptors(&mut w, "floc_alpha");
    let items_b = descriptors(&mut w, "floc_beta");
    let growth_f = growth(&mut w, items_f, "growth_f");
    let growth_g = growth(&mut w, items_g, "growth_g");
    let floc_alpha = flocs(&mut w, items_a, "floc_alpha");
    let floc_beta = flocs(&mut w, items_b, "floc_beta");

    // [initial]
    let s0 = match init_t.get("S") {
        Some(v) => w.profile(v, "initial.S"),
        None => {
            w.problems.push("missing key initial.S".into());
            None
        }
    };
    let profiles = |w: &mut Walker, key: &str| -> Option<Vec<Profile>> {
        let items = w.list(init_t, "initial", key, true)?;
        if let Some(m) = m {
            if items.len() != m {
                w.problems.push(format!("initial.{key} has {} entries, expected m = {m}", items.len()));
                return None;
            }
        }
        let out: Vec<_> = items
            .iter()
            .enumerate()
            .map(|(i, v)| w.profile(v, &format!("initial.{key}[{i}]")))
            .collect();
        out.into_iter().collect()
    };
    let u0 = profiles(&mut w, "u");
    let v0 = profiles(&mut w, "v");
    if let Some(Profile::Constant(c)) = &s0 {
        if !(*c >= 0.0 && c.is_finite()) {
            w.problems.push(format!("initial.S must be finite and nonnegative, got {c}"));
        }
    }
    for (key, list) in [("u", &u0), ("v", &v0)] {
        for (i, p) in list.iter().flatten().enumerate() {
            if let Profile::Constant(c) = p {
                if !(*c >= 0.0 && c.is_finite()) {
                    w.problems.push(format!("initial.{key}[{i}] must be finite and nonnegative, got {c}"));
                }
            }
        }
    }

    // [controls]
    let mut rc = RunControls::default();
    if let Some(Some(n)) = w.opt_count(controls, "controls", "grid_n") {
        rc.grid_n = n;
    }
    for (key, slot) in [
        ("t_end", &mut rc.t_end),
        ("dt_init", &mut rc.dt_init),
        ("dt_min", &mut rc.dt_min),
        ("sup_threshold", &mut rc.sup_threshold),
        ("steady_tol", &mut rc.steady_tol),
        ("steady_damping", &mut rc.steady_damping),
    ] {
        if let Some(Some(x)) = w.opt_number(controls, "controls", key) {
            *slot = x;
        }
    }
    if let Some(s) = w.opt_count(controls, "controls", "snapshot_stride") {
        rc.snapshot_stride = s;
    }
    if let Some(Some(n)) = w.opt_count(controls, "controls", "steady_max_iter") {
        rc.steady_max_iter = n;
    }
    if let Some(Some(s)) = w.string(controls, "controls", "steady") {
        rc.steady = match s {
            "none" => None,
            "coexistence" => Some(SteadyOperator::Coexistence),
            "extinction_attached" => Some(SteadyOperator::ExtinctionAttached),
            "extinction_isolated" => Some(SteadyOperator::ExtinctionIsolated),
            other => {
                w.problems.push(format!(
                    "controls.steady = \"{other}\" is not one of none, coexistence, extinction_attached, extinction_isolated"
                ));
                None
            }
        };
    }
    if rc.grid_n < crate::grid::MIN_NODES {
        w.problems.push(format!("controls.grid_n must be at least {}", crate::grid::MIN_NODES));
    }
    let sim = Controls {
        t_end: rc.t_end,
        dt_init: rc.dt_init,
        dt_min: rc.dt_min,
        sup_threshold: rc.sup_threshold,
        snapshot_stride: rc.snapshot_stride,
        ..Controls::default()
    };
    if let Err(Error::Domain(msg)) = sim.validate() {
        w.problems.push(format!("controls: {msg}"));
    }
    if !(rc.steady_damping > 0.0 && rc.steady_damping <= 1.0) {
        w.problems.push("controls.steady_damping must lie in (0, 1]".into());
    }
    if !(rc.steady_tol > 0.0) {
        w.problems.push("controls.steady_tol must be positive".into());
    }

    // [outputs]
    let mut out = Outputs::default();
    if let Some(v) = outputs.get("energy_p") {
        match v {
            Value::Array(a) if a.iter().all(|x| matches!(x, Value::Integer(i) if *i >= 2)) => {
                out.energy_p = a.iter().map(|x| x.as_integer().unwrap() as u32).collect();
            }
            _ => w.problems.push("outputs.energy_p must be an array of integers >= 2".into()),
        }
    }
    if let Some(Some(n)) = w.opt_count(outputs, "outputs", "max_snapshots") {
        if n < 2 {
            w.problems.push("outputs.max_snapshots must be at least 2".into());
        }
        out.max_snapshots = n;
    }
    match outputs.get("write_snapshots") {
        Some(Value::Boolean(b)) => out.write_snapshots = *b,
        Some(_) => w.problems.push("outputs.write_snapshots must be a boolean".into()),
        None => {}
    }
    if let Some(Some(s)) = w.string(outputs, "outputs", "y_max_reading") {
        match s {
            "list" => out.y_max_reading = YMaxReading::List,
            "product" => out.y_max_reading = YMaxReading::Product,
            other => w.problems.push(format!("outputs.y_max_reading = \"{other}\" is not list or product")),
        }
    }
    for (key, slot) in [("extinct_abs", &mut out.extinct_abs), ("extinct_rel", &mut out.extinct_rel)] {
        if let Some(Some(x)) = w.opt_number(outputs, "outputs", key) {
            if !(x > 0.0 && x.is_finite()) {
                w.problems.push(format!("outputs.{key} must be positive"));
            }
            *slot = x;
        }
    }

    let mut problems = w.problems;
    let params = match (d0, du, dv, yu, yv, gamma_s, gamma_u, gamma_v) {
        (Some(d0), Some(du), Some(dv), Some(yu), Some(yv), Some(gs), Some(gu), Some(gv)) => {
            match ModelParams::new(d0, du, dv, yu, yv, gs, gu, gv) {
                Ok(p) => Some(p),
                Err(e) => {
                    problems.push(format!("model: {e}"));
                    None
                }
            }
        }
        _ => None,
    };
    let kin = match (growth_f, growth_g, floc_alpha, floc_beta) {
        (Some(f), Some(g), Some(a), Some(b)) => match KineticsSpec::new(f, g, a, b) {
            Ok(k) => Some(k),
            Err(e) => {
                problems.push(format!("kinetics: {e}"));
                None
            }
        },
        _ => None,
    };
    match (params, kin, s0, u0, v0) {
        (Some(params), Some(kin), Some(s), Some(u), Some(v)) if problems.is_empty() => Ok(RunConfig {
            name,
            description,
            params,
            kin,
            initial: InitialData { s, u, v },
            controls: rc,
            outputs: out,
        }),
        _ => {
            if problems.is_empty() {
                problems.push("configuration incomplete".into());
            }
            Err(Error::Config(problems))
        }
    }
}

fn float(x: f64) -> Value {
    Value::Float(x)
}

fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| float(*x)).collect())
}

fn tagged(kind: &str, fields: &[(&str, f64)]) -> Value {
    let mut t = Table::new();
    t.insert("kind".into(), Value::String(kind.into()));
    for (k, v) in fields {
        t.insert((*k).into(), float(*v));
    }
    Value::Table(t)
}

fn growth_value(g: &GrowthRate) -> Value {
    match g {
        GrowthRate::Monod { a, b } => tagged("monod", &[("a", *a), ("b", *b)]),
        GrowthRate::Haldane { a, b, c } => tagged("haldane", &[("a", *a), ("b", *b), ("c", *c)]),
        GrowthRate::Zero => tagged("zero", &[]),
    }
}

fn floc_value(f: &FlocRate) -> Value {
    match f {
        FlocRate::Constant(c) => tagged("constant", &[("c", *c)]),
        FlocRate::LinearSum(c) => tagged("linear_sum", &[("c", *c)]),
        FlocRate::PaperAlpha => tagged("paper_alpha", &[]),
        FlocRate::PaperBeta => tagged("paper_beta", &[]),
        FlocRate::PolynomialSum { c, l } => tagged("polynomial_sum", &[("c", *c), ("l", *l)]),
    }
}

fn profile_value(p: &Profile) -> Value {
    match p {
        Profile::Constant(c) => float(*c),
        Profile::Table { x, values } => {
            let mut t = Table::new();
            t.insert("x".into(), floats(x));
            t.insert("values".into(), floats(values));
            Value::Table(t)
        }
    }
}

fn render(cfg: &RunConfig) -> String {
    let p = &cfg.params;
    let k = &cfg.kin;
    let mut root = Table::new();
    if let Some(n) = &cfg.name {
        root.insert("name".into(), Value::String(n.clone()));
    }
    if let Some(d) = &cfg.description {
        root.insert("description".into(), Value::String(d.clone()));
    }
    let mut model = Table::new();
    model.insert("m".into(), Value::Integer(p.m() as i64));
    model.insert("d0".into(), float(p.d0()));
    model.insert("du".into(), floats(p.du()));
    model.insert("dv".into(), floats(p.dv()));
    model.insert("yu".into(), floats(p.yu()));
    model.insert("yv".into(), floats(p.yv()));
    model.insert("gamma_s".into(), float(p.gamma_s()));
    model.insert("gamma_u".into(), floats(p.gamma_u()));
    model.insert("gamma_v".into(), floats(p.gamma_v()));
    root.insert("model".into(), Value::Table(model));

    let mut kin = Table::new();
    kin.insert("growth_f".into(), Value::Array(k.growth_f().iter().map(growth_value).collect()));
    kin.insert("growth_g".into(), Value::Array(k.growth_g().iter().map(growth_value).collect()));
    kin.insert("floc_alpha".into(), Value::Array(k.floc_alpha().iter().map(floc_value).collect()));
    kin.insert("floc_beta".into(), Value::Array(k.floc_beta().iter().map(floc_value).collect()));
    root.insert("kinetics".into(), Value::Table(kin));

    let mut init = Table::new();
    init.insert("S".into(), profile_value(&cfg.initial.s));
    init.insert("u".into(), Value::Array(cfg.initial.u.iter().map(profile_value).collect()));
    init.insert("v".into(), Value::Array(cfg.initial.v.iter().map(profile_value).collect()));
    root.insert("initial".into(), Value::Table(init));

    let c = &cfg.controls;
    let mut ctl = Table::new();
    ctl.insert("grid_n".into(), Value::Integer(c.grid_n as i64));
    ctl.insert("t_end".into(), float(c.t_end));
    ctl.insert("dt_init".into(), float(c.dt_init));
    ctl.insert("dt_min".into(), float(c.dt_min));
    ctl.insert("sup_threshold".into(), float(c.sup_threshold));
    if let Some(s) = c.snapshot_stride {
        ctl.insert("snapshot_stride".into(), Value::Integer(s as i64));
    }
    let steady = c.steady.map(steady_name).unwrap_or("none");
    ctl.insert("steady".into(), Value::String(steady.into()));
    ctl.insert("steady_tol".into(), float(c.steady_tol));
    ctl.insert("steady_max_iter".into(), Value::Integer(c.steady_max_iter as i64));
    ctl.insert("steady_damping".into(), float(c.steady_damping));
    root.insert("controls".into(), Value::Table(ctl));

    let o = &cfg.outputs;
    let mut out = Table::new();
    out.insert(
        "energy_p".into(),
        Value::Array(o.energy_p.iter().map(|p| Value::Integer(*p as i64)).collect()),
    );
    out.insert("max_snapshots".into(), Value::Integer(o.max_snapshots as i64));
    out.insert("write_snapshots".into(), Value::Boolean(o.write_snapshots));
    let reading = match o.y_max_reading {
        YMaxReading::List => "list",
        YMaxReading::Product => "product",
    };
    out.insert("y_max_reading".into(), Value::String(reading.into()));
    out.insert("extinct_abs".into(), float(o.extinct_abs));
    out.insert("extinct_rel".into(), float(o.extinct_rel));
    root.insert("outputs".into(), Value::Table(out));
    root.to_string()
}

/// Replace the value at `path` (`section.key` or `section.key[i]`) in a
/// parsed document. Used by sweeps.
pub fn set_path(root: &mut Table, path: &str, value: f64) -> Result<()> {
    let bad = || Error::Config(vec![format!("axis path {path:?} does not name a numeric key")]);
    let (section, rest) = path.split_once('.').ok_or_else(bad)?;
    let (key, index) = match rest.split_once('[') {
        Some((k, idx)) => {
            let idx = idx.strip_suffix(']').ok_or_else(bad)?;
            (k, Some(idx.parse::<usize>().map_err(|_| bad())?))
        }
        None => (rest, None),
    };
    let table = root.get_mut(section).and_then(Value::as_table_mut).ok_or_else(bad)?;
    let slot = table.get_mut(key).ok_or_else(bad)?;
    let target = match index {
        Some(i) => slot.as_array_mut().and_then(|a| a.get_mut(i)).ok_or_else(bad)?,
        None => slot,
    };
    *target = match target {
        Value::Integer(_) if value.fract() == 0.0 => Value::Integer(value as i64),
        Value::Float(_) | Value::Integer(_) => Value::Float(value),
        _ => return Err(bad()),
    };
    Ok(())
}

/// Copy of `cfg` with `value` written at every path.
pub fn with_values(cfg: &RunConfig, paths: &[String], value: f64) -> Result<RunConfig> {
    let mut root: Table = cfg
        .to_toml()
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
    for p in paths {
        set_path(&mut root, p, value)?;
    }
    parse_config(&root.to_string())
}
