//! Presets, experiment runs, sweeps and CSV output.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::config::{parse_config, with_values, Profile, RunConfig};
use crate::diagnostics::{reproductive_numbers, ReproductiveNumbers};
use crate::pde::{simulate, SimulationResult, Verdict};
use crate::steady::{fixed_point_solve, SteadyState, Triple};
use crate::{Error, Result};

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../presets/", $name, ".toml")))),*]
    };
}

/// Shipped preset documents, by name.
pub const PRESETS: &[(&str, &str)] = presets!(
    "fig1a", "fig1b", "fig2a", "fig2b", "fig3a", "fig3b", "fig4d", "fig4e", "fig4f", "fig4g",
    "fig5h", "fig5i", "fig5j", "fig5k", "fig5l", "fig5m", "fig6n", "fig6o", "fig6p",
    "blowup_demo", "washout_demo",
);

/// Short names. `figN` picks the variant started from the prose initial data
/// `(0.1, 1, 1)`; `fig6` picks sub-case (p), whose `d_1 = 1` matches the
/// other single-case figures.
pub const ALIASES: &[(&str, &str)] = &[("fig1", "fig1b"), ("fig2", "fig2b"), ("fig3", "fig3b"), ("fig6", "fig6p")];

pub fn resolve_preset(name: &str) -> Option<&'static str> {
    let target = ALIASES.iter().find(|(a, _)| *a == name).map(|(_, t)| *t).unwrap_or(name);
    PRESETS.iter().find(|(n, _)| *n == target).map(|(_, text)| *text)
}

pub fn load_preset(name: &str) -> Result<RunConfig> {
    let text = resolve_preset(name).ok_or_else(|| {
        let known: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
        Error::Config(vec![format!("unknown preset {name:?}; known: {}", known.join(", "))])
    })?;
    parse_config(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunVerdict {
    Coexistence,
    ExtinctionU,
    ExtinctionV,
    Washout,
    BlowUp,
}

impl fmt::Display for RunVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunVerdict::Coexistence => "coexistence",
            RunVerdict::ExtinctionU => "extinction-u",
            RunVerdict::ExtinctionV => "extinction-v",
            RunVerdict::Washout => "washout",
            RunVerdict::BlowUp => "blow-up",
        })
    }
}

/// Verdict at the end of a run. A component is extinct when its final sup
/// norm is below `abs` and at most `rel` times its initial sup norm; a form
/// (isolated or attached) is extinct when every species' component is.
pub fn classify(result: &SimulationResult, abs: f64, rel: f64) -> RunVerdict {
    if result.verdict.is_blow_up() {
        return RunVerdict::BlowUp;
    }
    let first = &result.initial().sup;
    let last = &result.last().sup;
    let m = result.final_state.m();
    let extinct = |k: usize| last[k] < abs && last[k] <= rel * first[k];
    let u_gone = (0..m).all(|i| extinct(2 * i + 1));
    let v_gone = (0..m).all(|i| extinct(2 * i + 2));
    match (u_gone, v_gone) {
        (true, true) => RunVerdict::Washout,
        (true, false) => RunVerdict::ExtinctionU,
        (false, true) => RunVerdict::ExtinctionV,
        (false, false) => RunVerdict::Coexistence,
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub result: SimulationResult,
    pub verdict: RunVerdict,
    /// Fixed point started from the final transient state, when requested.
    pub steady: Option<SteadyState>,
    /// Single-species runs only.
    pub reproductive: Option<ReproductiveNumbers>,
}

impl RunOutcome {
    pub fn t_final(&self) -> f64 {
        match self.result.verdict {
            Verdict::Completed { t_end } => t_end,
            Verdict::BlowUp { t_detect, .. } => t_detect,
        }
    }

    /// One-line human summary.
    pub fn verdict_line(&self) -> String {
        let name = self.config.name.as_deref().unwrap_or("run");
        match self.result.verdict {
            Verdict::BlowUp { t_detect, reason } => {
                format!("{name}: {} at t = {t_detect:.6} ({reason:?})", self.verdict)
            }
            Verdict::Completed { t_end } => format!("{name}: {} at t = {t_end}", self.verdict),
        }
    }
}

pub fn run_config(cfg: &RunConfig) -> Result<RunOutcome> {
    let initial = cfg.initial_state()?;
    let result = simulate(&initial, &cfg.params, &cfg.kin, &cfg.sim_controls())?;
    let verdict = classify(&result, cfg.outputs.extinct_abs, cfg.outputs.extinct_rel);
    let reproductive = if cfg.params.m() == 1 { reproductive_numbers(&cfg.params, &cfg.kin).ok() } else { None };
    let steady = match cfg.controls.steady {
        Some(_) if !result.verdict.is_blow_up() => {
            let init = Triple::from_state(&result.final_state, &cfg.params)?;
            Some(fixed_point_solve(&init, &cfg.params, &cfg.kin, None, cfg.steady_controls())?)
        }
        _ => None,
    };
    Ok(RunOutcome { config: cfg.clone(), result, verdict, steady, reproductive })
}

/// Raise the constant initial biomass `u_i = v_i = M` from `start` by
/// doubling until the run blows up. Returns the first blowing-up `M` and
/// its outcome.
pub fn doubling_search(base: &RunConfig, start: f64, max_doublings: usize) -> Result<Option<(f64, RunOutcome)>> {
    let mut magnitude = start;
    for _ in 0..=max_doublings {
        let mut cfg = base.clone();
        for p in cfg.initial.u.iter_mut().chain(cfg.initial.v.iter_mut()) {
            *p = Profile::Constant(magnitude);
        }
        let out = run_config(&cfg)?;
        if out.verdict == RunVerdict::BlowUp {
            return Ok(Some((magnitude, out)));
        }
        magnitude *= 2.0;
    }
    Ok(None)
}

fn species_headers(prefix: &str, m: usize) -> Vec<String> {
    let mut h = vec![format!("{prefix}S")];
    h.extend((1..=m).map(|i| format!("{prefix}u{i}")));
    h.extend((1..=m).map(|i| format!("{prefix}v{i}")));
    h
}

/// Interleaved `(S, u1, v1, ...)` reordered to `(S, u1.., v1..)`.
fn grouped(values: &[f64], m: usize) -> impl Iterator<Item = f64> + '_ {
    std::iter::once(values[0])
        .chain((0..m).map(move |i| values[2 * i + 1]))
        .chain((0..m).map(move |i| values[2 * i + 2]))
}

/// Shortest round-trip decimal, switching to exponent form for extreme
/// magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt_f64).collect::<Vec<_>>().join(",")
}

pub fn monitors_csv(outcome: &RunOutcome) -> String {
    let m = outcome.config.params.m();
    let mut header = species_headers("sup_", m);
    header.extend(species_headers("l1_", m));
    header.extend(["mass", "Q", "dt", "clamp"].map(String::from));
    header.extend(outcome.config.outputs.energy_p.iter().map(|p| format!("L_{p}")));
    let mut out = format!("t,{}\n", header.join(","));
    for row in &outcome.result.monitors {
        let values = std::iter::once(row.t)
            .chain(grouped(&row.sup, m))
            .chain(grouped(&row.l1, m))
            .chain([row.mass, row.q, row.dt, row.clamp])
            .chain(row.energies.iter().copied());
        out.push_str(&join(values));
        out.push('\n');
    }
    out
}

fn profile_csv(grid: &crate::Grid, comps: &[&[f64]], m: usize) -> String {
    let mut out = format!("x,{}\n", species_headers("", m).join(","));
    for j in 0..grid.n() {
        let point: Vec<f64> = comps.iter().map(|c| c[j]).collect();
        out.push_str(&join(std::iter::once(grid.x(j)).chain(grouped(&point, m))));
        out.push('\n');
    }
    out
}

pub fn snapshot_csv(state: &crate::pde::StateField) -> String {
    let comps: Vec<&[f64]> = state.components().iter().map(Vec::as_slice).collect();
    profile_csv(state.grid(), &comps, state.m())
}

/// Header of [`summary_row`].
pub fn summary_header(m: usize) -> String {
    let mut h = vec!["label".to_string(), "verdict".into(), "t_final".into()];
    h.extend(species_headers("sup_", m));
    h.extend(["R_u", "R_v", "accepted", "rejected", "steady_residual", "error"].map(String::from));
    h.join(",")
}

/// Summary row of one run, or of a failed sweep point.
pub fn summary_row(label: &str, m: usize, outcome: &std::result::Result<RunOutcome, String>) -> String {
    match outcome {
        Ok(o) => {
            let (ru, rv) = o.reproductive.as_ref().map(|r| (r.ru, r.rv)).unwrap_or((f64::NAN, f64::NAN));
            let steady = o.steady.as_ref().map(|s| s.residual).unwrap_or(f64::NAN);
            format!(
                "{label},{},{},{},{},{},{},{},{},",
                o.verdict,
                fmt_f64(o.t_final()),
                join(grouped(&o.result.last().sup, m)),
                fmt_f64(ru),
                fmt_f64(rv),
                o.result.accepted,
                o.result.rejected,
                fmt_f64(steady)
            )
        }
        Err(e) => {
            let blanks = vec![""; 2 * m + 1 + 5].join(",");
            format!("{label},error,{blanks},\"{}\"", e.replace('"', "'").replace('\n', " "))
        }
    }
}

/// Write `monitors.csv`, snapshots, `steady.csv` (when solved) and a one-row
/// `summary.csv` into `dir`.
pub fn write_outputs(dir: &Path, outcome: &RunOutcome) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("monitors.csv"), monitors_csv(outcome))?;
    if outcome.config.outputs.write_snapshots {
        let mut index = fs::File::create(dir.join("snapshots.csv"))?;
        writeln!(index, "k,t")?;
        for (k, snap) in outcome.result.snapshots.iter().enumerate() {
            writeln!(index, "{k},{}", fmt_f64(snap.t()))?;
            fs::write(dir.join(format!("snapshot_{k}.csv")), snapshot_csv(snap))?;
        }
    }
    if let Some(s) = &outcome.steady {
        let t = &s.triple;
        let gs = outcome.config.params.gamma_s();
        let substrate: Vec<f64> = t.s.iter().map(|x| gs - x).collect();
        fs::write(dir.join("steady.csv"), profile_csv(&t.grid, &[&substrate, &t.u, &t.v], 1))?;
    }
    let m = outcome.config.params.m();
    let label = outcome.config.name.as_deref().unwrap_or("run");
    let summary = format!("{}\n{}\n", summary_header(m), summary_row(label, m, &Ok(outcome.clone())));
    fs::write(dir.join("summary.csv"), summary)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: std::result::Result<RunOutcome, String>,
}

/// Run `base` with every `paths` entry set to each value in turn. Points run
/// concurrently; a failing point is recorded and the sweep continues. When
/// `out_dir` is given each point writes into `point_<k>`.
pub fn sweep(base: &RunConfig, paths: &[String], values: &[f64], out_dir: Option<&Path>) -> Vec<SweepPoint> {
    values
        .par_iter()
        .enumerate()
        .map(|(k, &value)| {
            let outcome = with_values(base, paths, value).and_then(|cfg| {
                let out = run_config(&cfg)?;
                if let Some(dir) = out_dir {
                    write_outputs(&dir.join(format!("point_{k}")), &out)?;
                }
                Ok(out)
            });
            SweepPoint { value, outcome: outcome.map_err(|e| e.to_string()) }
        })
        .collect()
}

pub fn sweep_summary(m: usize, points: &[SweepPoint]) -> String {
    let mut out = summary_header(m);
    out.push('\n');
    for p in points {
        out.push_str(&summary_row(&fmt_f64(p.value), m, &p.outcome));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_round_trips() {
        for (name, text) in PRESETS {
            let cfg = parse_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.name.as_deref(), Some(*name));
            assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg, "{name}");
        }
    }

    #[test]
    fn aliases_resolve() {
        for (alias, target) in ALIASES {
            assert_eq!(resolve_preset(alias), resolve_preset(target));
            assert!(resolve_preset(target).is_some());
        }
        assert!(matches!(load_preset("fig7"), Err(Error::Config(_))));
    }

    #[test]
    fn fig1_caption_parameters() {
        let c = load_preset("fig1a").unwrap();
        assert_eq!((c.params.d0(), c.params.du()[0], c.params.dv()[0]), (1.0, 1.0, 10.0));
        assert_eq!(c.kin.f(0), &crate::GrowthRate::Haldane { a: 3.0, b: 1.0, c: 1.0 });
        assert_eq!(c.kin.g(0), &crate::GrowthRate::Monod { a: 5.0, b: 1.0 });
        assert_eq!(c.initial.s, Profile::Constant(1.0));
        assert_eq!(c.initial.u, vec![Profile::Constant(0.1)]);
        assert_eq!(load_preset("fig1b").unwrap().initial.s, Profile::Constant(0.1));
    }

    #[test]
    fn monitor_columns_match_header() {
        let mut cfg = load_preset("fig2a").unwrap();
        cfg.controls.t_end = 0.05;
        cfg.controls.grid_n = 33;
        cfg.controls.steady = None;
        cfg.outputs.energy_p = vec![2, 3];
        let out = run_config(&cfg).unwrap();
        let csv = monitors_csv(&out);
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(header, "t,sup_S,sup_u1,sup_v1,l1_S,l1_u1,l1_v1,mass,Q,dt,clamp,L_2,L_3");
        for l in lines {
            assert_eq!(l.split(',').count(), 13);
        }
        let snap = snapshot_csv(&out.result.final_state);
        assert!(snap.starts_with("x,S,u1,v1\n0,"));
        assert_eq!(snap.lines().count(), 34);
    }
}
