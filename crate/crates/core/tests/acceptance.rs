//! Acceptance criteria 1-10. Prints one line per criterion and exits
//! non-zero when any fails.

mod common;

use std::time::{Duration, Instant};

use common::{lambda_transcendental, order};
use flocsim::config::{parse_config, Profile, RunConfig};
use flocsim::diagnostics::{hp_energy, reproductive_numbers, EnergyConfig};
use flocsim::eigen::{lambda_bracket, solve_principal, BoundaryVariant};
use flocsim::experiment::{doubling_search, load_preset, run_config, RunVerdict, PRESETS};
use flocsim::model::{check_structural_conditions, reaction_field, SamplingBox, YMaxReading};
use flocsim::pde::{monitor_bounds, simulate, Controls, GrowthClass, SimulationResult};
use flocsim::steady::{differential_residual, fixed_point_solve, kernel_apply, SteadyControls, SteadyOperator, Triple};
use flocsim::{Grid, ModelParams};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

/// Outcome of one criterion.
struct Check {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: String) -> Check {
    Check { ok, detail }
}

fn timed(limit: Duration, f: impl FnOnce() -> Check) -> Check {
    let start = Instant::now();
    let mut c = f();
    let took = start.elapsed();
    if took >= limit {
        c.ok = false;
    }
    c.detail = format!("{}; {:.2?} (limit {:?})", c.detail, took, limit);
    c
}

fn c1_bracket() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [0.02, 0.05, 0.1, 0.15] {
        let l = solve_principal(d, BoundaryVariant::InflowRobin, 401).unwrap().lambda();
        let b = lambda_bracket(d).unwrap();
        let oracle = lambda_transcendental(d);
        // Second-order discretization error at n = 401 stays below 0.2%.
        let close = (l - oracle).abs() < 2e-3 * oracle;
        ok &= b.contains(l) && close;
        parts.push(format!("d={d}: {:.5} < {l:.5} < {:.5} (oracle {oracle:.5})", b.lower(), b.upper()));
    }
    check(ok, parts.join(", "))
}

fn c2_monotone() -> Check {
    let ds = [0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 100.0, 1000.0];
    let ls: Vec<f64> =
        ds.iter().map(|&d| solve_principal(d, BoundaryVariant::InflowRobin, 401).unwrap().lambda()).collect();
    let decreasing = ls.windows(2).all(|w| w[0] > w[1]);
    let last = *ls.last().unwrap();
    check(
        decreasing && last > 1.0 && last < 1.01,
        format!("strictly decreasing: {decreasing}; lambda_1000 = {last:.7}"),
    )
}

fn c3_kernel() -> Check {
    let densities: [(&str, fn(f64) -> f64); 4] = [
        ("1", |_| 1.0),
        ("s", |s| s),
        ("s^2", |s| s * s),
        ("sin(pi s)", |s| (std::f64::consts::PI * s).sin()),
    ];
    let mut worst = f64::INFINITY;
    let mut worst_at = String::new();
    for d in [0.1, 1.0, 10.0] {
        for (name, rho) in densities {
            let res = |n: usize| {
                let g = Grid::new(n).unwrap();
                let r = g.sample(rho);
                let w = kernel_apply(d, &r, &g).unwrap();
                differential_residual(d, 0.0, &w, &r, &g).unwrap().max()
            };
            let p = order(res(101), res(401), 0.01, 0.0025);
            if p < worst {
                worst = p;
                worst_at = format!("d={d}, rho={name}");
            }
        }
    }
    check(worst >= 1.9, format!("minimum observed order {worst:.3} at {worst_at}"))
}

fn preset_run(name: &str, n: usize) -> (RunConfig, SimulationResult) {
    let mut cfg = load_preset(name).unwrap();
    cfg.controls.grid_n = cfg.controls.grid_n.max(n);
    let init = cfg.initial_state().unwrap();
    let r = simulate(&init, &cfg.params, &cfg.kin, &cfg.sim_controls()).unwrap();
    (cfg, r)
}

fn c4_max_principle() -> Check {
    let mut worst = f64::NEG_INFINITY;
    let mut worst_name = "";
    let mut ok = true;
    for (name, _) in PRESETS {
        // Presets needing finer grids for the cell Peclet number keep them.
        let (cfg, r) = preset_run(name, 201);
        let b = monitor_bounds(&r, &cfg.params);
        let excess = b.s_max - b.s_bound;
        ok &= excess <= 1e-3;
        if excess > worst {
            worst = excess;
            worst_name = name;
        }
    }
    check(ok, format!("{} presets; worst max S - bound = {worst:.3e} ({worst_name})", PRESETS.len()))
}

fn with_yields(base: &RunConfig, y: f64) -> RunConfig {
    let mut cfg = base.clone();
    let p = &base.params;
    cfg.params = ModelParams::single(p.d0(), 1.0, 1.0, y, y, p.gamma_s()).unwrap();
    cfg.controls.grid_n = 201;
    cfg.controls.t_end = 20.0;
    cfg
}

fn c5_dichotomy() -> Check {
    let base = load_preset("blowup_demo").unwrap();
    let above = with_yields(&base, 1.5);
    let Some((m, blown)) = doubling_search(&above, 1.0, 12).unwrap() else {
        return check(false, "no blow-up found up to M = 4096".into());
    };
    let mut below = with_yields(&base, 0.9);
    below.initial.u = vec![Profile::Constant(m)];
    below.initial.v = vec![Profile::Constant(m)];
    let calm = run_config(&below).unwrap();
    let bounds = monitor_bounds(&calm.result, &below.params);
    let sup_max = calm.result.monitors.iter().flat_map(|r| r.sup.iter().copied()).fold(0.0, f64::max);
    let bounded = !calm.result.verdict.is_blow_up() && bounds.mass_class == GrowthClass::Bounded && sup_max < below.controls.sup_threshold;
    check(
        blown.verdict == RunVerdict::BlowUp && bounded,
        format!(
            "M = {m}: y=1.5 -> {} ; y=0.9 -> {} with max sup {sup_max:.4}, mass {:?}",
            blown.verdict_line(),
            calm.verdict_line(),
            bounds.mass_class
        ),
    )
}

fn washout_config(d1: f64, d2: f64) -> RunConfig {
    let mut cfg = load_preset("fig4d").unwrap();
    let text = cfg.to_toml().replace("du = [0.1]", &format!("du = [{d1:?}]")).replace("dv = [0.1]", &format!("dv = [{d2:?}]"));
    cfg = parse_config(&text).unwrap();
    cfg.initial.s = Profile::Constant(cfg.params.gamma_s());
    cfg.initial.u = vec![Profile::Constant(0.01)];
    cfg.initial.v = vec![Profile::Constant(0.01)];
    cfg.controls.grid_n = 201;
    cfg.controls.t_end = 200.0;
    cfg
}

fn c6_washout() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut cases: Vec<(String, RunConfig, bool)> = [(0.1, 0.1), (0.1, 0.05), (0.05, 0.05)]
        .iter()
        .map(|&(a, b)| (format!("d=({a},{b})"), washout_config(a, b), true))
        .collect();
    let mut persistent = load_preset("fig2b").unwrap();
    persistent.initial.s = Profile::Constant(1.0);
    persistent.initial.u = vec![Profile::Constant(0.01)];
    persistent.initial.v = vec![Profile::Constant(0.01)];
    persistent.controls.t_end = 200.0;
    persistent.controls.steady = None;
    cases.push(("fig2".into(), persistent, false));
    for (label, cfg, expect_washout) in cases {
        let r = reproductive_numbers(&cfg.params, &cfg.kin).unwrap();
        // Rigorous side: net growth below the bracket's lower end.
        let below_bracket = |net: f64, d: f64| net < lambda_bracket(d).unwrap().lower();
        let (d1, d2) = (cfg.params.du()[0], cfg.params.dv()[0]);
        let predicted = r.ru < 1.0 && r.rv < 1.0;
        let certified = below_bracket(r.net_u, d1) && below_bracket(r.net_v, d2);
        let out = run_config(&cfg).unwrap();
        let sup = out.result.last().sup[1] + out.result.last().sup[2];
        let washed = sup < 1e-4;
        let case_ok = if expect_washout { predicted && certified && washed } else { r.ru > 1.0 && !washed };
        ok &= case_ok;
        parts.push(format!("{label}: R=({:.3},{:.3}) |u|+|v| = {sup:.2e}", r.ru, r.rv));
    }
    check(ok, parts.join(", "))
}

fn c7_figures() -> Check {
    let expected = [
        ("fig1", RunVerdict::Coexistence),
        ("fig2", RunVerdict::ExtinctionV),
        ("fig3", RunVerdict::Coexistence),
        ("fig6", RunVerdict::ExtinctionV),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, want) in expected {
        let mut cfg = load_preset(name).unwrap();
        cfg.controls.grid_n = 201;
        cfg.controls.t_end = 100.0;
        let out = run_config(&cfg).unwrap();
        ok &= out.verdict == want;
        parts.push(format!("{} -> {}", cfg.name.as_deref().unwrap(), out.verdict));
    }
    check(ok, parts.join(", "))
}

fn c8_steady_transient() -> Check {
    let cfg = load_preset("fig2a").unwrap();
    let (p, k) = (&cfg.params, &cfg.kin);
    let g = Grid::new(401).unwrap();
    let controls = SteadyControls { operator: SteadyOperator::ExtinctionAttached, tol: 1e-12, ..Default::default() };
    let s = fixed_point_solve(&Triple::constant(g, 0.5, 0.5, 0.0), p, k, None, controls).unwrap();
    let state = s.triple.to_state(p).unwrap();
    let r = simulate(&state, p, k, &Controls { t_end: 10.0, ..Controls::default() }).unwrap();
    let drift = r.final_state.sup_distance(&state);
    check(
        s.converged && s.residual < 1e-6 && !r.verdict.is_blow_up() && drift < 1e-5,
        format!("attached-extinction fixed point: residual {:.2e} in {} iterations; drift over T=10 {drift:.2e}", s.residual, s.iterations),
    )
}

fn c9_energy() -> Check {
    let mut runner = TestRunner::deterministic();
    let fixture = (0.0f64..20.0).prop_flat_map(|top| proptest::collection::vec(0.0..=top, 2 * 257));
    let mut worst = 0.0_f64;
    let g = Grid::new(257).unwrap();
    for _ in 0..50 {
        let values = fixture.new_tree(&mut runner).unwrap().current();
        let (u, v) = values.split_at(257);
        for p in [2u32, 3, 4] {
            let e = hp_energy(u, v, &g, &EnergyConfig::new(p, 1.0).unwrap()).unwrap();
            for j in 0..257 {
                let exact = (u[j] + v[j]).powi(p as i32);
                let rel = if exact == 0.0 { e.pointwise[j].abs() } else { (e.pointwise[j] - exact).abs() / exact };
                worst = worst.max(rel);
            }
        }
    }
    check(worst <= 1e-12, format!("50 fixtures x 257 nodes x p in {{2,3,4}}: max relative error {worst:.2e}"))
}

fn c10_properties() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;

    // (QP): every component is nonnegative where its own variable vanishes.
    let mut runner = TestRunner::deterministic();
    let mut qp_points = 0;
    let mut qp_ok = true;
    for (_, text) in PRESETS {
        let cfg = parse_config(text).unwrap();
        let dim = cfg.params.dim();
        for _ in 0..200 {
            let mut w = proptest::collection::vec(0.0f64..10.0, dim).new_tree(&mut runner).unwrap().current();
            let face = qp_points % dim;
            w[face] = 0.0;
            qp_ok &= reaction_field(&cfg.params, &cfg.kin, &w).unwrap()[face] >= 0.0;
            qp_points += 1;
        }
    }
    ok &= qp_ok;
    notes.push(format!("QP {qp_ok} on {qp_points} face points"));

    // (DISS) on the default box for presets with every y_u y_v <= 1.
    let mut diss = 0;
    let mut diss_ok = true;
    for (_, text) in PRESETS {
        let cfg = parse_config(text).unwrap();
        if cfg.params.yield_products().iter().all(|y| *y <= 1.0) {
            let r = check_structural_conditions(&cfg.params, &cfg.kin, &SamplingBox::default_for(&cfg.params), YMaxReading::List)
                .unwrap();
            diss_ok &= r.diss_ok.is_satisfied();
            diss += 1;
        }
    }
    ok &= diss_ok;
    notes.push(format!("DISS {diss_ok} on {diss} presets"));

    // Trapezoid refinement on a smooth integrand.
    let err = |n: usize| {
        let g = Grid::new(n).unwrap();
        let exact = (1f64.exp() * (2f64.cos() + 2.0 * 2f64.sin()) - 1.0) / 5.0;
        (g.trapezoid(&g.sample(|x| (2.0 * x).cos() * x.exp())) - exact).abs()
    };
    let q = order(err(101), err(401), 0.01, 0.0025);
    ok &= (1.95..2.05).contains(&q);
    notes.push(format!("quadrature order {q:.3}"));

    // Bitwise determinism.
    let run = || {
        let (_, r) = preset_run("fig1b", 201);
        r.monitors.iter().flat_map(|m| m.sup.iter().chain(&m.l1).chain([&m.mass, &m.q])).map(|x| x.to_bits()).collect::<Vec<u64>>()
    };
    let same = run() == run();
    ok &= same;
    notes.push(format!("repeat runs identical {same}"));
    check(ok, notes.join("; "))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Check); 10] = [
        ("eigenvalue bracket", Duration::from_secs(1), c1_bracket),
        ("eigenvalue monotonicity and asymptote", Duration::from_secs(1), c2_monotone),
        ("kernel oracle", Duration::from_secs(1), c3_kernel),
        ("maximum principle", Duration::from_secs(120), c4_max_principle),
        ("global versus blow-up dichotomy", Duration::from_secs(60), c5_dichotomy),
        ("washout classification", Duration::from_secs(120), c6_washout),
        ("figure verdicts", Duration::from_secs(180), c7_figures),
        ("steady/transient consistency", Duration::from_secs(30), c8_steady_transient),
        ("energy identity", Duration::from_secs(1), c9_energy),
        ("property suites", Duration::from_secs(60), c10_properties),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let c = timed(*limit, f);
        if !c.ok {
            failed += 1;
        }
        println!("criterion {:>2} {}: {} ({})", i + 1, if c.ok { "PASS" } else { "FAIL" }, name, c.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
