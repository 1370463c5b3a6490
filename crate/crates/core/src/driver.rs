//! End-to-end solver loop: bound estimation, step-size control, RK
//! advancement with per-stage limiting, monitors, and termination.

use crate::cfl::StepController;
use crate::dg::Discretization;
use crate::error::{Error, Result};
use crate::euler::State;
use crate::limiter::{self, BoundStrategy, EntropyBounds, LimiterReport};
use crate::timeint::{self, Scheme};
use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct RunSettings {
    pub scheme: Scheme,
    pub safety: f64,
    pub t_end: f64,
    pub max_steps: usize,
    pub strategy: BoundStrategy,
    pub limiter_enabled: bool,
    /// Solve the physical per-element decomposition instead of table * L_e.
    pub per_element_lp: bool,
    /// Stop when the density update norm drops below this relative level.
    pub steady_tol: Option<f64>,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            scheme: Scheme::Ssprk33,
            safety: 0.8,
            t_end: 1.0,
            max_steps: 2_000_000,
            strategy: BoundStrategy::Local,
            limiter_enabled: true,
            per_element_lp: false,
            steady_tol: None,
        }
    }
}

/// Per-step monitor record.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    /// Domain integrals of the conserved fields.
    pub totals: Vec<f64>,
    /// Minimum pointwise entropy over all quadrature points.
    pub min_entropy: f64,
    /// min_e [ s(mean_e at t+dt) - s_e^0(t) ]; >= -1e-10 is the mean
    /// entropy-boundedness guarantee.
    pub mean_bound_margin: f64,
    /// Elements with a positive limiter scaling in the last stage.
    pub eps_active: usize,
    pub eps_max: f64,
}

pub struct RunOutcome {
    pub u: Vec<f64>,
    pub t: f64,
    pub steps: usize,
    pub history: Vec<StepRecord>,
    pub bounds: EntropyBounds,
    pub report: LimiterReport,
    pub steady: bool,
}

/// Execute the main loop from a projected initial condition. `on_step` is
/// called after every accepted step (and once at step 0) for output cadence.
pub fn run(
    disc: &Discretization,
    mut u: Vec<f64>,
    controller: &StepController,
    settings: &RunSettings,
    mut on_step: impl FnMut(&StepRecord, &[f64], &EntropyBounds, &LimiterReport) -> Result<()>,
) -> Result<RunOutcome> {
    let nelem = disc.mesh.elements.len();
    let mut ws = disc.workspace();
    let mut bounds = EntropyBounds::new(nelem);
    let mut report = LimiterReport::new(nelem);
    let mut history = Vec::new();

    // Sanitize the projected initial condition: positivity-only limiting
    // guards against projection undershoot at discontinuities.
    if settings.limiter_enabled {
        limiter::limit_solution(disc, &mut u, &bounds, &mut report, 0)
            .map_err(|e| attach_dump(disc, &u, e))?;
    }

    disc.compute_traces(&u, &mut ws.traces);
    limiter::estimate_bounds(
        disc,
        &u,
        &ws.traces,
        0.0,
        settings.strategy,
        true,
        &mut bounds,
    );

    let mut t = 0.0;
    let mut step = 0usize;
    let rec0 = make_record(disc, &u, &ws.traces, &bounds, &report, step, t, 0.0);
    on_step(&rec0, &u, &bounds, &report)?;
    history.push(rec0);

    let mut steady = false;
    let mut first_update_norm: Option<f64> = None;
    let mut u_prev = if settings.steady_tol.is_some() {
        u.clone()
    } else {
        Vec::new()
    };

    while t < settings.t_end - 1e-14 && step < settings.max_steps {
        let (dt_raw, _lambda) = controller.time_step(disc, &ws.traces, t)?;
        let dt = dt_raw.min(settings.t_end - t);

        report.reset();
        timeint::advance(
            disc,
            settings.scheme,
            t,
            dt,
            &mut u,
            &bounds,
            &mut report,
            &mut ws,
            settings.limiter_enabled,
            step + 1,
        )
        .map_err(|e| attach_dump(disc, &u, e))?;

        t += dt;
        step += 1;

        if let Some(e) = find_nonfinite(disc, &u) {
            return Err(attach_dump(
                disc,
                &u,
                Error::Fatal {
                    step,
                    element: e,
                    reason: "non-finite coefficients after step".into(),
                },
            ));
        }

        // Mean entropy-boundedness margin against the step's bounds.
        let means = disc.element_means(&u);
        let mut margin = f64::INFINITY;
        for (e, m) in means.iter().enumerate() {
            if bounds.current[e].is_finite() {
                margin = margin.min(m.entropy(&disc.gas) - bounds.current[e]);
            }
        }

        // Fresh traces for monitors and the next step's bounds.
        disc.compute_traces(&u, &mut ws.traces);
        bounds.rotate();
        limiter::estimate_bounds(
            disc,
            &u,
            &ws.traces,
            t,
            settings.strategy,
            false,
            &mut bounds,
        );

        let mut rec = make_record(disc, &u, &ws.traces, &bounds, &report, step, t, dt);
        rec.mean_bound_margin = margin;
        on_step(&rec, &u, &bounds, &report)?;
        history.push(rec);

        if let Some(tol) = settings.steady_tol {
            let norm = density_update_norm(disc, &u, &u_prev) / dt;
            match first_update_norm {
                None => first_update_norm = Some(norm),
                Some(n0) => {
                    if norm <= tol * n0 {
                        steady = true;
                    }
                }
            }
            u_prev.copy_from_slice(&u);
            if steady {
                break;
            }
        }
    }

    Ok(RunOutcome {
        u,
        t,
        steps: step,
        history,
        bounds,
        report,
        steady,
    })
}

#[allow(clippy::too_many_arguments)]
fn make_record(
    disc: &Discretization,
    u: &[f64],
    traces: &crate::dg::Traces,
    bounds: &EntropyBounds,
    report: &LimiterReport,
    step: usize,
    t: f64,
    dt: f64,
) -> StepRecord {
    let _ = bounds;
    StepRecord {
        step,
        t,
        dt,
        totals: disc.conserved_totals(u),
        min_entropy: min_point_entropy(disc, u, traces),
        mean_bound_margin: f64::INFINITY,
        // elements limited in any stage of this step
        eps_active: report.eps.iter().filter(|&&e| e > 0.0).count(),
        eps_max: report.eps.iter().cloned().fold(0.0, f64::max),
    }
}

/// Minimum entropy over every volume and surface quadrature point.
pub fn min_point_entropy(disc: &Discretization, u: &[f64], traces: &crate::dg::Traces) -> f64 {
    (0..disc.mesh.elements.len())
        .into_par_iter()
        .map(|e| {
            let el = &disc.mesh.elements[e];
            let re = &disc.refs[&el.shape];
            let mut states = Vec::new();
            disc.volume_states(u, e, &mut states);
            let mut smin = f64::INFINITY;
            for s in &states {
                smin = smin.min(s.entropy(&disc.gas));
            }
            let nq = re.surf.edges[0].param.len();
            for k in 0..el.shape.nedges() {
                for q in 0..nq {
                    let s = State::from_fields(disc.nd, traces.get(e, k, q));
                    smin = smin.min(s.entropy(&disc.gas));
                }
            }
            smin
        })
        .reduce(|| f64::INFINITY, f64::min)
}

fn find_nonfinite(disc: &Discretization, u: &[f64]) -> Option<usize> {
    for e in 0..disc.mesh.elements.len() {
        if disc.coeffs(u, e).iter().any(|x| !x.is_finite()) {
            return Some(e);
        }
    }
    None
}

fn density_update_norm(disc: &Discretization, u: &[f64], u_prev: &[f64]) -> f64 {
    let mut acc = 0.0;
    for e in 0..disc.mesh.elements.len() {
        let np = disc.np(e);
        let off = disc.offsets[e];
        for m in 0..np {
            let d = u[off + m] - u_prev[off + m];
            acc += d * d;
        }
    }
    acc.sqrt()
}

/// Append the offending element's coefficients to fatal diagnostics so the
/// failure state survives for postmortem.
fn attach_dump(disc: &Discretization, u: &[f64], err: Error) -> Error {
    match err {
        Error::Fatal {
            step,
            element,
            reason,
        } => {
            let c = disc.coeffs(u, element);
            let dump: Vec<String> = c.iter().map(|x| format!("{x:.17e}")).collect();
            Error::Fatal {
                step,
                element,
                reason: format!("{reason}; coefficients: [{}]", dump.join(", ")),
            }
        }
        other => other,
    }
}
