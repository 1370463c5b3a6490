//! `ebdg` command line: run built-in cases or Gmsh meshes, print the
//! entropy-bounded CFL table, and drive mesh-refinement studies.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ebdg_core::cases::{self, Case};
use ebdg_core::cfl::{CflTable, StepController};
use ebdg_core::config::{self, BoundSpec, RunConfig};
use ebdg_core::dg::{Discretization, FluxModel};
use ebdg_core::driver::{self, RunSettings};
use ebdg_core::geometry::gmsh;
use ebdg_core::limiter::BoundStrategy;
use ebdg_core::output;
use ebdg_core::quadrature::Shape;
use ebdg_core::timeint::Scheme;
use ebdg_core::{GasModel, State};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ebdg",
    about = "Entropy-bounded discontinuous Galerkin solver for the compressible Euler equations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a built-in case or a Gmsh mesh to the final time.
    Run(RunArgs),
    /// Print the entropy-bounded CFL numbers per element type and order.
    CflTable(CflArgs),
    /// Mesh-refinement study on the smooth advection case.
    Convergence(ConvArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in case: advect1d | shock1d[:Ma] | dmr | cylinder.
    #[arg(long)]
    case: Option<String>,
    /// Gmsh MSH 2.2 mesh file (alternative to --case).
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Polynomial order.
    #[arg(long)]
    p: Option<usize>,
    /// Nominal element size, decimal or fraction ("1/40").
    #[arg(long)]
    h: Option<String>,
    /// Time scheme: euler | ssprk33 | rk4_classic.
    #[arg(long)]
    scheme: Option<String>,
    /// CFL safety factor in (0, 1].
    #[arg(long)]
    safety: Option<f64>,
    /// Final time (default: the case's own).
    #[arg(long)]
    t_end: Option<f64>,
    /// Entropy-bound strategy: "local" or a global bound value.
    #[arg(long)]
    bound: Option<String>,
    /// Disable the entropy limiter (admissibility still enforced).
    #[arg(long)]
    no_limiter: bool,
    /// Per-element CFL optimization instead of the reference-table route.
    #[arg(long)]
    per_element_cfl: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Steps between field writes (0 = final state only).
    #[arg(long)]
    output_every: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Worker threads (env EBDG_WORKERS overrides).
    #[arg(long)]
    workers: Option<usize>,
    /// Constant initial primitive state "rho,u[,v],p" for mesh runs.
    #[arg(long)]
    initial: Option<String>,
    /// Boundary condition for a mesh tag, as tag=spec; repeatable.
    #[arg(long = "bc")]
    bcs: Vec<String>,
}

#[derive(Args)]
struct CflArgs {
    /// Comma list: line,quad,triangle.
    #[arg(long, default_value = "line,quad,triangle")]
    shapes: String,
    /// Orders, "1..4" (inclusive) or comma list.
    #[arg(long, default_value = "1..4")]
    orders: String,
    /// Also write the CSV here (always printed to stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConvArgs {
    #[arg(long, default_value = "advect1d")]
    case: String,
    #[arg(long, default_value = "1..4")]
    orders: String,
    /// Number of uniformly refined levels.
    #[arg(long, default_value_t = 5)]
    levels: usize,
    /// Coarsest element size.
    #[arg(long, default_value = "1/10")]
    h0: String,
    #[arg(long, default_value = "rk4_classic")]
    scheme: String,
    #[arg(long, default_value_t = 0.8)]
    safety: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::CflTable(args) => cmd_cfl_table(args),
        Command::Convergence(args) => cmd_convergence(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn parse_orders(text: &str) -> Result<Vec<usize>> {
    let t = text.trim();
    let span = |a: &str, b: &str| -> Result<Vec<usize>> {
        let lo: usize = a.trim().parse().context("bad order range")?;
        let hi: usize = b.trim().parse().context("bad order range")?;
        if lo > hi {
            bail!("empty order range '{text}'");
        }
        Ok((lo..=hi).collect())
    };
    if let Some((a, b)) = t.split_once("..=") {
        span(a, b)
    } else if let Some((a, b)) = t.split_once("..") {
        span(a, b) // "1..4" reads as the inclusive list 1,2,3,4
    } else {
        t.split(',')
            .map(|s| s.trim().parse::<usize>().context("bad order list"))
            .collect()
    }
}

fn parse_shapes(text: &str) -> Result<Vec<Shape>> {
    text.split(',')
        .map(|s| match s.trim() {
            "line" => Ok(Shape::Line),
            "quad" => Ok(Shape::Quad),
            "triangle" | "tri" => Ok(Shape::Tri),
            other => Err(anyhow!("unknown shape '{other}' (line | quad | triangle)")),
        })
        .collect()
}

fn merged_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if args.config.is_none() && args.case.is_none() && args.mesh.is_none() {
        bail!("one of --config, --case, or --mesh is required");
    }
    if let Some(c) = &args.case {
        cfg.case = Some(c.clone());
        cfg.mesh = None;
    }
    if let Some(m) = &args.mesh {
        cfg.mesh = Some(m.clone());
        cfg.case = None;
    }
    if let Some(p) = args.p {
        cfg.p = p;
    }
    if let Some(h) = &args.h {
        cfg.h = config::parse_size(h)?;
    }
    if let Some(s) = &args.scheme {
        cfg.scheme = Scheme::parse(s)?;
    }
    if let Some(s) = args.safety {
        cfg.safety = s;
    }
    if args.t_end.is_some() {
        cfg.t_end = args.t_end;
    }
    if let Some(b) = &args.bound {
        cfg.bound = if b == "local" {
            BoundSpec::Local
        } else {
            BoundSpec::Global(b.parse().context("--bound wants 'local' or a number")?)
        };
    }
    if args.no_limiter {
        cfg.limiter = false;
    }
    if args.per_element_cfl {
        cfg.per_element_cfl = true;
    }
    if let Some(d) = &args.output_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(n) = args.output_every {
        cfg.output_every = n;
    }
    if let Some(n) = args.max_steps {
        cfg.max_steps = n;
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    if args.initial.is_some() {
        cfg.initial = args.initial.clone();
    }
    for entry in &args.bcs {
        let (tag, spec) = entry
            .split_once('=')
            .ok_or_else(|| anyhow!("--bc wants tag=spec, got '{entry}'"))?;
        cfg.bcs.push((tag.trim().to_string(), spec.trim().to_string()));
    }
    Ok(cfg)
}

/// Problem assembled from config: discretization, initial coefficients,
/// run settings, and an optional exact-solution case for error reporting.
struct Prepared {
    disc: Discretization,
    u: Vec<f64>,
    settings: RunSettings,
    case: Option<Case>,
    label: String,
}

fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    if let Some(name) = &cfg.case {
        let case = Case::by_name(name)?;
        let disc = case.build(cfg.p, cfg.h)?;
        let u = case.initialize(&disc);
        let mut settings = case.settings(cfg.scheme, cfg.safety);
        settings.strategy = match cfg.bound {
            BoundSpec::CaseDefault => settings.strategy,
            BoundSpec::Local => BoundStrategy::Local,
            BoundSpec::Global(v) => BoundStrategy::Global(v),
        };
        if let Some(t) = cfg.t_end {
            settings.t_end = t;
        }
        settings.limiter_enabled = cfg.limiter;
        settings.per_element_lp = cfg.per_element_cfl;
        settings.max_steps = cfg.max_steps;
        if cfg.steady_tol.is_some() {
            settings.steady_tol = cfg.steady_tol;
        }
        Ok(Prepared {
            label: format!("case {}", case.name()),
            disc,
            u,
            settings,
            case: Some(case),
        })
    } else {
        let path = cfg.mesh.as_ref().expect("validated");
        let gas = GasModel::new(cfg.gamma, cfg.s_ref);
        let mesh = gmsh::load_mesh(path)?;
        let bcs = config::build_bcs(&cfg.bcs, &gas)?;
        let disc = Discretization::new(mesh, cfg.p, gas, FluxModel::Euler, &bcs)?;
        let init = cfg.initial.as_ref().expect("validated");
        let state = State::from_primitive(&config::parse_primitive(init)?, &gas);
        let u = disc.project(|_| state);
        let settings = RunSettings {
            scheme: cfg.scheme,
            safety: cfg.safety,
            t_end: cfg.t_end.unwrap_or(1.0),
            max_steps: cfg.max_steps,
            strategy: match cfg.bound {
                BoundSpec::CaseDefault | BoundSpec::Local => BoundStrategy::Local,
                BoundSpec::Global(v) => BoundStrategy::Global(v),
            },
            limiter_enabled: cfg.limiter,
            per_element_lp: cfg.per_element_cfl,
            steady_tol: cfg.steady_tol,
        };
        Ok(Prepared {
            label: format!("mesh {}", path.display()),
            disc,
            u,
            settings,
            case: None,
        })
    }
}

fn controller_for(disc: &Discretization, cfg: &RunConfig) -> Result<StepController> {
    let shapes: Vec<Shape> = disc.refs.keys().copied().collect();
    let table = CflTable::compute(&shapes, &[cfg.p])?;
    let ctrl = StepController::new(table, cfg.safety);
    if cfg.per_element_cfl {
        Ok(ctrl.with_per_element(disc)?)
    } else {
        Ok(ctrl)
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let cfg = merged_config(&args)?;
    config::init_workers(config::worker_count(cfg.workers));
    let mut prep = prepare(&cfg)?;
    let ctrl = controller_for(&prep.disc, &cfg)?;
    let dir = cfg.output_dir.clone();
    let every = cfg.output_every;

    let u0 = std::mem::take(&mut prep.u);
    let disc = &prep.disc;
    let outcome = driver::run(disc, u0, &ctrl, &prep.settings, |rec, u, bounds, report| {
        if every > 0 && rec.step % every == 0 {
            let path = dir.join(format!("solution_{:06}.vtk", rec.step));
            output::write_vtk(&path, disc, u, &bounds.current, &report.eps)?;
        }
        Ok(())
    })?;

    output::write_history_csv(&dir.join("history.csv"), disc.nd, &outcome.history)?;
    output::write_vtk(
        &dir.join("solution_final.vtk"),
        disc,
        &outcome.u,
        &outcome.bounds.current,
        &outcome.report.eps,
    )?;

    let error = prep
        .case
        .as_ref()
        .and_then(|c| c.error_norm(disc, &outcome.u, outcome.t));
    write_summary(&dir.join("summary.csv"), &cfg, &prep, &outcome, error)?;

    let last = outcome.history.last().expect("at least step 0");
    print!(
        "{} p={} : {} steps to t={:.6}, min entropy {:.6}",
        prep.label, cfg.p, outcome.steps, outcome.t, last.min_entropy
    );
    if let Some(e) = error {
        print!(", L2 density error {e:.6e}");
    }
    if outcome.steady {
        print!(", reached steady state");
    }
    println!();
    println!("wrote {}", dir.join("history.csv").display());
    println!("wrote {}", dir.join("solution_final.vtk").display());
    println!("wrote {}", dir.join("summary.csv").display());
    Ok(())
}

fn write_summary(
    path: &Path,
    cfg: &RunConfig,
    prep: &Prepared,
    outcome: &driver::RunOutcome,
    error: Option<f64>,
) -> Result<()> {
    let mut text = String::from("problem,p,h,scheme,t_final,steps,l2_density_error\n");
    let err = error.map(output::fmt17).unwrap_or_default();
    text.push_str(&format!(
        "{},{},{},{},{},{},{}\n",
        prep.label.replace(',', ";"),
        cfg.p,
        output::fmt17(cfg.h),
        prep.settings.scheme.name(),
        output::fmt17(outcome.t),
        outcome.steps,
        err
    ));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn cmd_cfl_table(args: CflArgs) -> Result<()> {
    let shapes = parse_shapes(&args.shapes)?;
    let orders = parse_orders(&args.orders)?;
    let table = CflTable::compute(&shapes, &orders)?;
    let csv = output::cfl_csv_text(&table);
    print!("{csv}");
    if let Some(path) = &args.output {
        output::write_cfl_csv(path, &table)?;
    }
    Ok(())
}

fn cmd_convergence(args: ConvArgs) -> Result<()> {
    config::init_workers(config::worker_count(args.workers));
    if args.case != "advect1d" {
        bail!("convergence study supports the smooth case only (advect1d)");
    }
    let orders = parse_orders(&args.orders)?;
    let scheme = Scheme::parse(&args.scheme)?;
    let h0 = config::parse_size(&args.h0)?;
    let case = Case::advect1d();

    let mut sections = Vec::new();
    println!("{:>3} {:>12} {:>16} {:>8}", "p", "h", "L2(rho) error", "rate");
    for &p in &orders {
        let mut hs = Vec::new();
        let mut errors = Vec::new();
        for level in 0..args.levels {
            let h = h0 / 2f64.powi(level as i32);
            let disc = case.build(p, h)?;
            let u = case.initialize(&disc);
            let shapes: Vec<Shape> = disc.refs.keys().copied().collect();
            let ctrl = StepController::new(CflTable::compute(&shapes, &[p])?, args.safety);
            let settings = case.settings(scheme, args.safety);
            let outcome = driver::run(&disc, u, &ctrl, &settings, |_, _, _, _| Ok(()))?;
            let err = case
                .error_norm(&disc, &outcome.u, outcome.t)
                .expect("advect1d has an exact solution");
            hs.push(h);
            errors.push(err);
        }
        let rows = cases::rates_from_errors(&hs, &errors);
        for r in &rows {
            match r.rate {
                Some(rate) => {
                    println!("{:>3} {:>12.6} {:>16.6e} {:>8.3}", p, r.h, r.error, rate)
                }
                None => println!("{:>3} {:>12.6} {:>16.6e} {:>8}", p, r.h, r.error, "-"),
            }
        }
        sections.push((p, rows));
    }
    if let Some(path) = &args.output {
        output::write_convergence_csv(path, &sections)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
