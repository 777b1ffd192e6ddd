use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use flocsim::config::{parse_config, RunConfig};
use flocsim::diagnostics::{eigen_grid_for, reproductive_numbers};
use flocsim::eigen::{lambda_bracket, solve_principal, BoundaryVariant, Bracket};
use flocsim::experiment::{load_preset, run_config, sweep, sweep_summary, write_outputs, RunVerdict, PRESETS};
use flocsim::model::{check_structural_conditions, SamplingBox, Verdict};
use flocsim::steady::{
    check_coexistence_hypotheses, check_extinction_hypotheses, fixed_point_solve, Clause, ExtinctionTarget,
    SteadyOperator, Triple,
};
use flocsim::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;
const EXIT_BLOWUP: u8 = 4;

#[derive(Parser)]
#[command(name = "flocsim", version, about = "Flocculation chemostat simulator")]
struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped preset name (see `flocsim presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Override `controls.grid_n`.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Override `controls.t_end`.
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and write CSV output.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a configuration over a list of values of one or more parameters.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Comma-separated parameter paths set together, e.g. `model.dv[0]`.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Principal eigenvalue and its analytic bracket.
    Eigen {
        /// Diffusivities; taken from the configuration when omitted.
        #[arg(long, value_delimiter = ',')]
        d: Vec<f64>,
        #[arg(long, value_enum, default_value = "inflow")]
        variant: Variant,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
    },
    /// Fixed-point solve and hypothesis reports.
    Steady {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum)]
        operator: Option<Operator>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Structural conditions and reproductive numbers.
    Check {
        #[command(flatten)]
        source: Source,
    },
    /// List shipped presets.
    Presets,
}

#[derive(ValueEnum, Clone, Copy)]
enum Variant {
    Inflow,
    Outflow,
}

#[derive(ValueEnum, Clone, Copy)]
enum Operator {
    Coexistence,
    ExtinctionAttached,
    ExtinctionIsolated,
}

impl From<Operator> for SteadyOperator {
    fn from(o: Operator) -> Self {
        match o {
            Operator::Coexistence => SteadyOperator::Coexistence,
            Operator::ExtinctionAttached => SteadyOperator::ExtinctionAttached,
            Operator::ExtinctionIsolated => SteadyOperator::ExtinctionIsolated,
        }
    }
}

fn load(config: Option<&Path>, preset: Option<&str>) -> flocsim::Result<RunConfig> {
    match (config, preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
            parse_config(&text)
        }
        (None, Some(name)) => load_preset(name),
        (None, None) => Err(Error::Config(vec!["one of --config or --preset is required".into()])),
    }
}

impl Source {
    fn load(&self) -> flocsim::Result<RunConfig> {
        let mut cfg = load(self.config.as_deref(), self.preset.as_deref())?;
        if let Some(n) = self.grid_n {
            cfg.controls.grid_n = n;
        }
        if let Some(t) = self.t_end {
            cfg.controls.t_end = t;
        }
        // Re-validate the overrides.
        parse_config(&cfg.to_toml())
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParams(_) | Error::InvalidKinetics(_) | Error::Io(_) => EXIT_CONFIG,
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        _ => 1,
    }
}

fn clause_line(c: &Clause) -> String {
    let margin = c.margin.map(|m| format!(" (margin {m:.6e})")).unwrap_or_default();
    format!("  [{}] {}{margin}", if c.holds { "ok" } else { "no" }, c.name)
}

fn verdict_line(name: &str, v: &Verdict) -> String {
    match v {
        Verdict::Satisfied => format!("  {name}: satisfied"),
        Verdict::Violated { witness, detail } => format!("  {name}: violated at {witness:?}: {detail}"),
        Verdict::NotApplicable { reason } => format!("  {name}: not applicable ({reason})"),
    }
}

fn cmd_run(source: &Source, out: &Path) -> flocsim::Result<u8> {
    let cfg = source.load()?;
    let outcome = run_config(&cfg)?;
    write_outputs(out, &outcome)?;
    println!("{}", outcome.verdict_line());
    if let Some(s) = &outcome.steady {
        println!(
            "steady {:?}: residual {:.3e} after {} iterations{}",
            s.operator,
            s.residual,
            s.iterations,
            if s.converged { "" } else { " (not converged)" }
        );
        if !s.converged {
            return Ok(EXIT_NONCONVERGENCE);
        }
    }
    Ok(if outcome.verdict == RunVerdict::BlowUp { EXIT_BLOWUP } else { 0 })
}

fn cmd_sweep(source: &Source, axis: &str, values: &[f64], out: &Path) -> flocsim::Result<u8> {
    let cfg = source.load()?;
    let paths: Vec<String> = axis.split(',').map(|s| s.trim().to_string()).collect();
    let points = sweep(&cfg, &paths, values, Some(out));
    let summary = sweep_summary(cfg.params.m(), &points);
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("summary.csv"), &summary)?;
    print!("{summary}");
    Ok(0)
}

fn cmd_eigen(
    ds: &[f64],
    variant: Variant,
    grid_n: Option<usize>,
    config: Option<&Path>,
    preset: Option<&str>,
) -> flocsim::Result<u8> {
    let ds = if ds.is_empty() {
        let cfg = load(config, preset)?;
        let p = &cfg.params;
        let mut ds = vec![p.d0()];
        ds.extend_from_slice(p.du());
        ds.extend_from_slice(p.dv());
        ds
    } else {
        ds.to_vec()
    };
    let variant = match variant {
        Variant::Inflow => BoundaryVariant::InflowRobin,
        Variant::Outflow => BoundaryVariant::OutflowRobin,
    };
    println!("d,grid_n,lambda,bracket_lower,bracket_upper,residual,iterations");
    for d in ds {
        let n = grid_n.unwrap_or_else(|| eigen_grid_for(d));
        let pair = solve_principal(d, variant, n)?;
        let (lo, hi) = match lambda_bracket(d)? {
            Bracket::Bounded { lower, upper } => (lower.to_string(), upper.to_string()),
            Bracket::Asymptote => ("1".into(), "inf".into()),
        };
        println!("{d},{n},{},{lo},{hi},{:e},{}", pair.lambda(), pair.residual(), pair.iterations());
    }
    Ok(0)
}

fn cmd_steady(source: &Source, operator: Option<Operator>, out: Option<&Path>) -> flocsim::Result<u8> {
    let cfg = source.load()?;
    let (p, k) = (&cfg.params, &cfg.kin);
    for target in [ExtinctionTarget::Attached, ExtinctionTarget::Isolated] {
        let r = check_extinction_hypotheses(p, k, target)?;
        println!(
            "extinction {target:?}: {} (growth {:.6}, e^(1/d) {:.6e}, lambda {:.6}, window {:.6e})",
            if r.passes() { "hypotheses hold" } else { "hypotheses fail" },
            r.growth_at_feed,
            r.exp_inv_d,
            r.lambda_d,
            r.window
        );
        for c in r.clauses() {
            println!("{}", clause_line(c));
        }
    }
    let co = check_coexistence_hypotheses(p, k, cfg.controls.grid_n)?;
    println!(
        "coexistence: {} (best theta {:.4e}, rho {:.4e}, binding {})",
        if co.is_feasible() { "hypotheses hold" } else { "hypotheses fail" },
        co.theta,
        co.rho,
        co.binding
    );
    for c in co.margins() {
        println!("{}", clause_line(c));
    }
    let mut controls = cfg.steady_controls();
    if let Some(op) = operator {
        controls.operator = op.into();
    }
    let init = Triple::from_state(&cfg.initial_state()?, p)?;
    let s = fixed_point_solve(&init, p, k, None, controls)?;
    println!(
        "fixed point {:?}: residual {:.3e}, differential residual {:.3e}, {} iterations, {}",
        s.operator,
        s.residual,
        s.pde_residual,
        s.iterations,
        if s.converged { "converged" } else { "not converged" }
    );
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let t = &s.triple;
        let mut csv = String::from("x,S,u1,v1\n");
        for j in 0..t.grid.n() {
            csv.push_str(&format!("{},{},{},{}\n", t.grid.x(j), p.gamma_s() - t.s[j], t.u[j], t.v[j]));
        }
        std::fs::write(dir.join("steady.csv"), csv)?;
    }
    Ok(if s.converged { 0 } else { EXIT_NONCONVERGENCE })
}

fn cmd_check(source: &Source) -> flocsim::Result<u8> {
    let cfg = source.load()?;
    let (p, k) = (&cfg.params, &cfg.kin);
    let r = check_structural_conditions(p, k, &SamplingBox::default_for(p), cfg.outputs.y_max_reading)?;
    println!("structural conditions ({} points, resolution {}):", r.points_sampled, r.effective_resolution);
    for (name, v) in [
        ("quasi-positivity", &r.qp_ok),
        ("mass dissipation", &r.diss_ok),
        ("A5", &r.a5_ok),
        ("A6", &r.a6_ok),
        ("A7", &r.a7_ok),
    ] {
        println!("{}", verdict_line(name, v));
    }
    println!("  yield products: {:?}", r.yuyv_class);
    if p.m() == 1 {
        let rn = reproductive_numbers(p, k)?;
        println!(
            "R_u = {:.6} (lambda {:.6}), R_v = {:.6} (lambda {:.6}), washout {:?}",
            rn.ru, rn.lambda_d1, rn.rv, rn.lambda_d2, rn.classification
        );
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure thread pool: {e}");
        }
    }
    let status = match &cli.command {
        Command::Run { source, out } => cmd_run(source, out),
        Command::Sweep { source, axis, values, out } => cmd_sweep(source, axis, values, out),
        Command::Eigen { d, variant, grid_n, config, preset } => {
            cmd_eigen(d, *variant, *grid_n, config.as_deref(), preset.as_deref())
        }
        Command::Steady { source, operator, out } => cmd_steady(source, *operator, out.as_deref()),
        Command::Check { source } => cmd_check(source),
        Command::Presets => {
            let mut out = std::io::stdout().lock();
            for (name, text) in PRESETS {
                let desc = parse_config(text).ok().and_then(|c| c.description).unwrap_or_default();
                // a closed pipe (`| head`) just ends the listing
                if writeln!(out, "{name}\t{desc}").is_err() {
                    break;
                }
            }
            Ok(0)
        }
    };
    match status {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
