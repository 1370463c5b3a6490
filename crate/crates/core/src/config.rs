//! Run configuration: a flat key-value TOML subset (strings, numbers,
//! booleans, plus single-level tables for boundary conditions). Validation
//! reports every offending key at once.

use crate::dg::BoundaryCondition;
use crate::error::{Error, Result};
use crate::euler::{GasModel, Primitive, State};
use crate::limiter::BoundStrategy;
use crate::timeint::Scheme;
use std::collections::HashMap;
use std::path::PathBuf;

/// Entropy-bound strategy before case defaults are applied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundSpec {
    CaseDefault,
    Local,
    Global(f64),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Built-in case name, or none when running from a mesh file.
    pub case: Option<String>,
    /// Gmsh MSH 2.2 mesh path (alternative to `case`).
    pub mesh: Option<PathBuf>,
    pub p: usize,
    /// Nominal element size for the built-in meshed cases.
    pub h: f64,
    pub scheme: Scheme,
    pub safety: f64,
    /// Final time; none means the case default.
    pub t_end: Option<f64>,
    pub bound: BoundSpec,
    pub limiter: bool,
    /// Solve the per-element decomposition instead of CFL table * L_e.
    pub per_element_cfl: bool,
    pub gamma: f64,
    /// Reference entropy offset for mesh-file runs (cases set their own).
    pub s_ref: f64,
    pub output_dir: PathBuf,
    /// Steps between field writes; 0 writes only the final state.
    pub output_every: usize,
    pub max_steps: usize,
    /// Stop early when the relative density-residual drops below this.
    pub steady_tol: Option<f64>,
    /// Worker threads; none = all cores. Env `EBDG_WORKERS` overrides.
    pub workers: Option<usize>,
    /// Boundary tag -> condition spec string (mesh-file runs).
    pub bcs: Vec<(String, String)>,
    /// Constant initial primitive state "rho, u, v, p" (mesh-file runs).
    pub initial: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            case: None,
            mesh: None,
            p: 2,
            h: 1.0 / 40.0,
            scheme: Scheme::Ssprk33,
            safety: 0.8,
            t_end: None,
            bound: BoundSpec::CaseDefault,
            limiter: true,
            per_element_cfl: false,
            gamma: 1.4,
            s_ref: 0.0,
            output_dir: PathBuf::from("out"),
            output_every: 0,
            max_steps: 2_000_000,
            steady_tol: None,
            workers: None,
            bcs: Vec::new(),
            initial: None,
        }
    }
}

/// Parse "a/b" fractions or plain decimals ("1/40" -> 0.025).
pub fn parse_size(text: &str) -> Result<f64> {
    let t = text.trim();
    let v = if let Some((num, den)) = t.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad size '{text}'")))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad size '{text}'")))?;
        n / d
    } else {
        t.parse()
            .map_err(|_| Error::Config(format!("bad size '{text}'")))?
    };
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Config(format!("size '{text}' must be positive")))
    }
}

/// Parse "rho, u[, v], p" into a primitive state (v optional in 1D).
pub fn parse_primitive(text: &str) -> Result<Primitive> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("bad state list '{text}' (want rho,u[,v],p)")))?;
    let (rho, vel, p) = match parts.len() {
        3 => (parts[0], [parts[1], 0.0], parts[2]),
        4 => (parts[0], [parts[1], parts[2]], parts[3]),
        n => {
            return Err(Error::Config(format!(
                "state list '{text}' has {n} entries, want 3 or 4"
            )))
        }
    };
    if rho <= 0.0 || p <= 0.0 {
        return Err(Error::Config(format!(
            "state '{text}' not admissible (rho, p must be positive)"
        )));
    }
    Ok(Primitive { rho, vel, p })
}

/// Parse a boundary-condition spec string:
/// `slip_wall` | `outflow` | `supersonic_inflow: rho,u[,v],p` |
/// `farfield: rho,u[,v],p`.
pub fn parse_bc(text: &str, gas: &GasModel) -> Result<BoundaryCondition> {
    let (head, rest) = match text.split_once(':') {
        Some((h, r)) => (h.trim(), Some(r)),
        None => (text.trim(), None),
    };
    let state = |rest: Option<&str>| -> Result<State> {
        let list = rest.ok_or_else(|| {
            Error::Config(format!("'{head}' needs a state list: '{head}: rho,u[,v],p'"))
        })?;
        Ok(State::from_primitive(&parse_primitive(list)?, gas))
    };
    match head {
        "slip_wall" | "wall" => Ok(BoundaryCondition::SlipWall),
        "outflow" => Ok(BoundaryCondition::OutflowExtrapolate),
        "supersonic_inflow" => Ok(BoundaryCondition::SupersonicInflow(state(rest)?)),
        "farfield" => Ok(BoundaryCondition::Farfield(state(rest)?)),
        "periodic" => Err(Error::Config(
            "periodic boundaries come from mesh periodic pairs, not a bc entry".into(),
        )),
        other => Err(Error::Config(format!(
            "unknown boundary condition '{other}' \
             (slip_wall | outflow | supersonic_inflow | farfield)"
        ))),
    }
}

/// Build the boundary-condition map from the config's (tag, spec) list.
pub fn build_bcs(
    entries: &[(String, String)],
    gas: &GasModel,
) -> Result<HashMap<String, BoundaryCondition>> {
    let mut map = HashMap::new();
    for (tag, spec) in entries {
        map.insert(tag.clone(), parse_bc(spec, gas)?);
    }
    Ok(map)
}

const KNOWN_KEYS: &[&str] = &[
    "case",
    "mesh",
    "p",
    "h",
    "scheme",
    "safety",
    "t_end",
    "bound",
    "limiter",
    "per_element_cfl",
    "gamma",
    "s_ref",
    "output_dir",
    "output_every",
    "max_steps",
    "steady_tol",
    "workers",
    "initial",
];

impl RunConfig {
    /// Parse and validate config text, collecting every bad key before
    /// reporting.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("config is not valid TOML: {e}")))?;
        let mut cfg = RunConfig::default();
        let mut bad: Vec<String> = Vec::new();

        let take_f64 = |v: &toml::Value, key: &str, bad: &mut Vec<String>| -> Option<f64> {
            match v {
                toml::Value::Float(x) => Some(*x),
                toml::Value::Integer(i) => Some(*i as f64),
                _ => {
                    bad.push(format!("{key}: expected a number"));
                    None
                }
            }
        };

        for (key, value) in &table {
            match key.as_str() {
                "bc" => {
                    match value {
                        toml::Value::Table(t) => {
                            for (tag, spec) in t {
                                match spec {
                                    toml::Value::String(s) => {
                                        cfg.bcs.push((tag.clone(), s.clone()));
                                    }
                                    _ => bad.push(format!("bc.{tag}: expected a string")),
                                }
                            }
                        }
                        _ => bad.push("bc: expected a table of tag = \"spec\"".into()),
                    }
                    continue;
                }
                k if !KNOWN_KEYS.contains(&k) => {
                    bad.push(format!("unknown key '{k}'"));
                    continue;
                }
                _ => {}
            }
            match (key.as_str(), value) {
                ("case", toml::Value::String(s)) => cfg.case = Some(s.clone()),
                ("mesh", toml::Value::String(s)) => cfg.mesh = Some(PathBuf::from(s)),
                ("p", toml::Value::Integer(i)) if (0..=8).contains(i) => cfg.p = *i as usize,
                ("p", _) => bad.push("p: expected an integer in 0..=8".into()),
                ("h", v) => match v {
                    toml::Value::String(s) => match parse_size(s) {
                        Ok(x) => cfg.h = x,
                        Err(e) => bad.push(format!("h: {e}")),
                    },
                    other => match take_f64(other, "h", &mut bad) {
                        Some(x) if x > 0.0 => cfg.h = x,
                        Some(_) => bad.push("h: must be positive".into()),
                        None => {}
                    },
                },
                ("scheme", toml::Value::String(s)) => match Scheme::parse(s) {
                    Ok(sc) => cfg.scheme = sc,
                    Err(e) => bad.push(format!("scheme: {e}")),
                },
                ("scheme", _) => bad.push("scheme: expected a string".into()),
                ("safety", v) => {
                    if let Some(x) = take_f64(v, "safety", &mut bad) {
                        if x > 0.0 && x <= 1.0 {
                            cfg.safety = x;
                        } else {
                            bad.push("safety: must lie in (0, 1]".into());
                        }
                    }
                }
                ("t_end", v) => {
                    if let Some(x) = take_f64(v, "t_end", &mut bad) {
                        cfg.t_end = Some(x);
                    }
                }
                ("bound", toml::Value::String(s)) if s == "local" => {
                    cfg.bound = BoundSpec::Local;
                }
                ("bound", v) => match take_f64(v, "bound (\"local\" or a number)", &mut bad) {
                    Some(x) => cfg.bound = BoundSpec::Global(x),
                    None => {}
                },
                ("limiter", toml::Value::Boolean(b)) => cfg.limiter = *b,
                ("limiter", _) => bad.push("limiter: expected a boolean".into()),
                ("per_element_cfl", toml::Value::Boolean(b)) => cfg.per_element_cfl = *b,
                ("per_element_cfl", _) => {
                    bad.push("per_element_cfl: expected a boolean".into())
                }
                ("gamma", v) => {
                    if let Some(x) = take_f64(v, "gamma", &mut bad) {
                        if x > 1.0 {
                            cfg.gamma = x;
                        } else {
                            bad.push("gamma: must exceed 1".into());
                        }
                    }
                }
                ("s_ref", v) => {
                    if let Some(x) = take_f64(v, "s_ref", &mut bad) {
                        cfg.s_ref = x;
                    }
                }
                ("output_dir", toml::Value::String(s)) => cfg.output_dir = PathBuf::from(s),
                ("output_dir", _) => bad.push("output_dir: expected a string".into()),
                ("output_every", toml::Value::Integer(i)) if *i >= 0 => {
                    cfg.output_every = *i as usize;
                }
                ("output_every", _) => {
                    bad.push("output_every: expected a nonnegative integer".into())
                }
                ("max_steps", toml::Value::Integer(i)) if *i > 0 => {
                    cfg.max_steps = *i as usize;
                }
                ("max_steps", _) => bad.push("max_steps: expected a positive integer".into()),
                ("steady_tol", v) => {
                    if let Some(x) = take_f64(v, "steady_tol", &mut bad) {
                        cfg.steady_tol = if x > 0.0 { Some(x) } else { None };
                    }
                }
                ("workers", toml::Value::Integer(i)) if *i >= 0 => {
                    cfg.workers = if *i == 0 { None } else { Some(*i as usize) };
                }
                ("workers", _) => bad.push("workers: expected a nonnegative integer".into()),
                ("initial", toml::Value::String(s)) => cfg.initial = Some(s.clone()),
                ("initial", _) => bad.push("initial: expected a string".into()),
                ("case", _) => bad.push("case: expected a string".into()),
                ("mesh", _) => bad.push("mesh: expected a string".into()),
                _ => unreachable!("key filtered above"),
            }
        }

        if cfg.case.is_some() && cfg.mesh.is_some() {
            bad.push("case and mesh are mutually exclusive".into());
        }
        if cfg.case.is_none() && cfg.mesh.is_none() {
            bad.push("one of 'case' or 'mesh' is required".into());
        }
        if cfg.mesh.is_some() && cfg.initial.is_none() {
            bad.push("mesh runs need 'initial' (constant primitive state)".into());
        }

        if bad.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }

    pub fn strategy_or(&self, default: BoundStrategy) -> BoundStrategy {
        match self.bound {
            BoundSpec::CaseDefault => default,
            BoundSpec::Local => BoundStrategy::Local,
            BoundSpec::Global(v) => BoundStrategy::Global(v),
        }
    }
}

/// Worker-thread count: env `EBDG_WORKERS` wins over the config value.
pub fn worker_count(cfg_workers: Option<usize>) -> Option<usize> {
    match std::env::var("EBDG_WORKERS") {
        Ok(v) => v.trim().parse::<usize>().ok().filter(|&n| n > 0),
        Err(_) => cfg_workers,
    }
}

/// Size the global worker pool (no-op if already initialized or `None`).
pub fn init_workers(requested: Option<usize>) {
    if let Some(n) = requested {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
