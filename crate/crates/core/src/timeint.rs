//! Explicit Runge-Kutta steppers with per-stage positivity/entropy limiting.

use crate::dg::{Discretization, Workspace};
use crate::error::{Error, Result};
use crate::limiter::{self, EntropyBounds, LimiterReport};

/// Time integration scheme. The SSP scheme keeps every stage a convex
/// combination of limited Euler sub-steps (the entropy guarantee's form);
/// the classical fourth-order scheme is provided for convergence studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    ForwardEuler,
    Ssprk33,
    Rk4Classic,
}

impl Scheme {
    pub fn parse(s: &str) -> Result<Scheme> {
        match s {
            "euler" | "forward_euler" => Ok(Scheme::ForwardEuler),
            "ssprk33" | "ssp" => Ok(Scheme::Ssprk33),
            "rk4" | "rk4_classic" => Ok(Scheme::Rk4Classic),
            other => Err(Error::Config(format!(
                "unknown scheme '{other}' (euler | ssprk33 | rk4)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::ForwardEuler => "forward_euler",
            Scheme::Ssprk33 => "ssprk33",
            Scheme::Rk4Classic => "rk4_classic",
        }
    }
}

/// One full step u(t) -> u(t + dt) with limiting after every stage.
#[allow(clippy::too_many_arguments)]
pub fn advance(
    disc: &Discretization,
    scheme: Scheme,
    t: f64,
    dt: f64,
    u: &mut Vec<f64>,
    bounds: &EntropyBounds,
    report: &mut LimiterReport,
    ws: &mut Workspace,
    limiter_on: bool,
    step: usize,
) -> Result<()> {
    let n = u.len();
    let mut stage = 0usize;
    let mut limit = |v: &mut Vec<f64>, stage: usize| -> Result<()> {
        if limiter_on {
            limiter::limit_solution(disc, v, bounds, report, step).map_err(|e| match e {
                Error::Fatal {
                    step,
                    element,
                    reason,
                } => Error::Fatal {
                    step,
                    element,
                    reason: format!("stage {stage}: {reason}"),
                },
                other => other,
            })?;
        }
        Ok(())
    };
    let rhs = |v: &Vec<f64>, tt: f64, out: &mut Vec<f64>, ws: &mut Workspace| {
        disc.compute_traces(v, &mut ws.traces);
        disc.residual(tt, v, ws, out);
    };

    match scheme {
        Scheme::ForwardEuler => {
            let mut r = vec![0.0; n];
            rhs(u, t, &mut r, ws);
            for (ui, ri) in u.iter_mut().zip(&r) {
                *ui += dt * ri;
            }
            stage += 1;
            limit(u, stage)?;
        }
        Scheme::Ssprk33 => {
            // Shu-Osher form: every stage is an Euler sub-step followed by
            // a convex combination, limited afterwards.
            let mut r = vec![0.0; n];
            let u0 = u.clone();

            rhs(u, t, &mut r, ws);
            let mut u1: Vec<f64> = u0.iter().zip(&r).map(|(a, b)| a + dt * b).collect();
            stage += 1;
            limit(&mut u1, stage)?;

            rhs(&u1, t + dt, &mut r, ws);
            let mut u2: Vec<f64> = u0
                .iter()
                .zip(u1.iter().zip(&r))
                .map(|(a, (b, c))| 0.75 * a + 0.25 * (b + dt * c))
                .collect();
            stage += 1;
            limit(&mut u2, stage)?;

            rhs(&u2, t + 0.5 * dt, &mut r, ws);
            for (ui, (a, (b, c))) in u
                .iter_mut()
                .zip(u0.iter().zip(u2.iter().zip(&r)))
            {
                *ui = (a + 2.0 * (b + dt * c)) / 3.0;
            }
            stage += 1;
            limit(u, stage)?;
        }
        Scheme::Rk4Classic => {
            let u0 = u.clone();
            let mut k1 = vec![0.0; n];
            let mut k2 = vec![0.0; n];
            let mut k3 = vec![0.0; n];
            let mut k4 = vec![0.0; n];

            rhs(&u0, t, &mut k1, ws);
            let mut s = axpy(&u0, 0.5 * dt, &k1);
            stage += 1;
            limit(&mut s, stage)?;

            rhs(&s, t + 0.5 * dt, &mut k2, ws);
            let mut s = axpy(&u0, 0.5 * dt, &k2);
            stage += 1;
            limit(&mut s, stage)?;

            rhs(&s, t + 0.5 * dt, &mut k3, ws);
            let mut s = axpy(&u0, dt, &k3);
            stage += 1;
            limit(&mut s, stage)?;

            rhs(&s, t + dt, &mut k4, ws);
            for i in 0..n {
                u[i] = u0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            stage += 1;
            limit(u, stage)?;
        }
    }
    Ok(())
}

fn axpy(u: &[f64], a: f64, r: &[f64]) -> Vec<f64> {
    u.iter().zip(r).map(|(x, y)| x + a * y).collect()
}
