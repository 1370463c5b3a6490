//! Built-in verification cases: smooth 1D advection, 1D moving shocks,
//! double Mach reflection, and subsonic flow over a cylinder.

use crate::dg::{BoundaryCondition, Discretization, FluxModel};
use crate::driver::RunSettings;
use crate::error::{Error, Result};
use crate::euler::{GasModel, Primitive, State};
use crate::geometry::builders;
use crate::limiter::BoundStrategy;
use crate::timeint::Scheme;
use std::collections::HashMap;
use std::sync::Arc;

/// Which verification problem, with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CaseKind {
    /// Translating density wave, periodic unit interval.
    Advect1d,
    /// Moving normal shock of the given Mach number on [-0.1, 1.1].
    Shock1d { mach: f64 },
    /// Mach-10 double Mach reflection on [0,4]x[0,1].
    Dmr,
    /// Mach-0.38 flow over a unit cylinder, curved O-mesh.
    Cylinder,
}

#[derive(Clone, Debug)]
pub struct Case {
    pub kind: CaseKind,
    pub gas: GasModel,
    pub strategy: BoundStrategy,
    pub t_end: f64,
    pub steady_tol: Option<f64>,
}

/// Entropy offset making the quoted minimum initial entropy come out for
/// the state (rho*, p*) with the smallest ln p - gamma ln rho.
fn s_ref_for(s0: f64, gamma: f64, rho_star: f64, p_star: f64) -> f64 {
    s0 + gamma * rho_star.ln() - p_star.ln()
}

/// Post-shock primitive state of a normal shock moving at Mach `ma` into a
/// resting pre-state (Rankine-Hugoniot).
pub fn normal_shock_post(gas: &GasModel, pre: &Primitive, ma: f64) -> Primitive {
    let g = gas.gamma;
    let c1 = (g * pre.p / pre.rho).sqrt();
    let m2 = ma * ma;
    let rho2 = pre.rho * ((g + 1.0) * m2) / ((g - 1.0) * m2 + 2.0);
    let p2 = pre.p * (2.0 * g * m2 - (g - 1.0)) / (g + 1.0);
    let u2 = 2.0 * (m2 - 1.0) / ((g + 1.0) * ma) * c1;
    Primitive {
        rho: rho2,
        vel: [pre.vel[0] + u2, pre.vel[1]],
        p: p2,
    }
}

impl Case {
    pub fn advect1d() -> Case {
        let gamma = 1.4;
        let gas = GasModel::new(gamma, s_ref_for(0.874, gamma, 1.1, 1.0));
        Case {
            kind: CaseKind::Advect1d,
            gas,
            strategy: BoundStrategy::Global(0.874),
            t_end: 1.0,
            steady_tol: None,
        }
    }

    pub fn shock1d(mach: f64) -> Case {
        assert!(mach > 1.0);
        let gamma = 1.4;
        let gas = GasModel::new(gamma, s_ref_for(0.620, gamma, 1.4, 1.0));
        Case {
            kind: CaseKind::Shock1d { mach },
            gas,
            strategy: BoundStrategy::Local,
            // the exact front (speed Ma * c1, c1 = 1) reaches x = 1
            t_end: 1.0 / mach,
            steady_tol: None,
        }
    }

    pub fn dmr() -> Case {
        let gamma = 1.4;
        let gas = GasModel::new(gamma, s_ref_for(0.620, gamma, 1.4, 1.0));
        Case {
            kind: CaseKind::Dmr,
            gas,
            strategy: BoundStrategy::Global(0.620),
            t_end: 0.25,
            steady_tol: None,
        }
    }

    pub fn cylinder() -> Case {
        let gamma = 1.4;
        let gas = GasModel::new(gamma, s_ref_for(0.620, gamma, 1.4, 1.0));
        Case {
            kind: CaseKind::Cylinder,
            gas,
            strategy: BoundStrategy::Global(0.620),
            t_end: 50.0,
            steady_tol: Some(1e-8),
        }
    }

    pub fn by_name(name: &str) -> Result<Case> {
        match name {
            "advect1d" => Ok(Case::advect1d()),
            "dmr" => Ok(Case::dmr()),
            "cylinder" => Ok(Case::cylinder()),
            _ => {
                if let Some(rest) = name.strip_prefix("shock1d") {
                    let ma = if rest.is_empty() {
                        2.0
                    } else {
                        rest.trim_start_matches(':')
                            .trim_start_matches('@')
                            .parse()
                            .map_err(|_| {
                                Error::Config(format!("bad shock1d Mach suffix in '{name}'"))
                            })?
                    };
                    Ok(Case::shock1d(ma))
                } else {
                    Err(Error::Config(format!(
                        "unknown case '{name}' (advect1d | shock1d[:Ma] | dmr | cylinder)"
                    )))
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            CaseKind::Advect1d => "advect1d".into(),
            CaseKind::Shock1d { mach } => format!("shock1d:{mach}"),
            CaseKind::Dmr => "dmr".into(),
            CaseKind::Cylinder => "cylinder".into(),
        }
    }

    /// Pre/post primitive states for the shock-bearing cases.
    fn shock_states(&self, mach: f64) -> (Primitive, Primitive) {
        let pre = Primitive {
            rho: 1.4,
            vel: [0.0, 0.0],
            p: 1.0,
        };
        let post = normal_shock_post(&self.gas, &pre, mach);
        (pre, post)
    }

    /// DMR pre/post conserved states (incident shock at 60 degrees).
    fn dmr_states(&self) -> (State, State) {
        let (pre, post1d) = self.shock_states(10.0);
        // rotate the post-shock velocity onto the shock normal
        let u2 = post1d.vel[0];
        let n = [(60f64).to_radians().sin(), -(60f64).to_radians().cos()];
        let post = Primitive {
            rho: post1d.rho,
            vel: [u2 * n[0], u2 * n[1]],
            p: post1d.p,
        };
        (
            State::from_primitive(&pre, &self.gas),
            State::from_primitive(&post, &self.gas),
        )
    }

    /// Shock x-position on the top boundary (y = 1) of the DMR domain.
    pub fn dmr_top_front(t: f64) -> f64 {
        1.0 / 6.0 + (1.0 + 20.0 * t) / 3f64.sqrt()
    }

    /// Initial conserved state at a physical point.
    pub fn initial_state(&self, x: [f64; 2]) -> State {
        match self.kind {
            CaseKind::Advect1d => {
                let rho = 1.0 + 0.1 * (2.0 * std::f64::consts::PI * x[0]).sin();
                State::from_primitive(
                    &Primitive {
                        rho,
                        vel: [1.0, 0.0],
                        p: 1.0,
                    },
                    &self.gas,
                )
            }
            CaseKind::Shock1d { mach } => {
                let (pre, post) = self.shock_states(mach);
                let prim = if x[0] < 0.0 { post } else { pre };
                State::from_primitive(&prim, &self.gas)
            }
            CaseKind::Dmr => {
                let (pre, post) = self.dmr_states();
                // incident shock through (1/6, 0) at 60 degrees
                if x[0] < 1.0 / 6.0 + x[1] / 3f64.sqrt() {
                    post
                } else {
                    pre
                }
            }
            CaseKind::Cylinder => State::from_primitive(&self.free_stream(), &self.gas),
        }
    }

    pub fn free_stream(&self) -> Primitive {
        // Ma 0.38 with c_inf = sqrt(gamma p / rho) = 1
        Primitive {
            rho: 1.4,
            vel: [0.38, 0.0],
            p: 1.0,
        }
    }

    /// Build the discretization (mesh + boundary conditions) for this case.
    /// `h` is the nominal element size for the meshed cases and ignored for
    /// the cylinder (fixed coarse O-mesh).
    pub fn build(&self, p: usize, h: f64) -> Result<Discretization> {
        let gas = self.gas;
        match self.kind {
            CaseKind::Advect1d => {
                let n = (1.0 / h).round() as usize;
                let mesh = builders::interval_mesh(0.0, 1.0, n, true)?;
                Discretization::new(mesh, p, gas, FluxModel::Euler, &HashMap::new())
            }
            CaseKind::Shock1d { mach } => {
                let n = (1.2 / h).round() as usize;
                let mesh = builders::interval_mesh(-0.1, 1.1, n, false)?;
                let (pre, post) = self.shock_states(mach);
                let mut bcs = HashMap::new();
                bcs.insert(
                    "left".to_string(),
                    BoundaryCondition::Farfield(State::from_primitive(&post, &gas)),
                );
                bcs.insert(
                    "right".to_string(),
                    BoundaryCondition::Farfield(State::from_primitive(&pre, &gas)),
                );
                Discretization::new(mesh, p, gas, FluxModel::Euler, &bcs)
            }
            CaseKind::Dmr => {
                let mesh = builders::dmr_mesh(h)?;
                let (pre, post) = self.dmr_states();
                let mut bcs = HashMap::new();
                bcs.insert("inflow".to_string(), BoundaryCondition::SupersonicInflow(post));
                bcs.insert(
                    "bottom_post".to_string(),
                    BoundaryCondition::SupersonicInflow(post),
                );
                bcs.insert("wall".to_string(), BoundaryCondition::SlipWall);
                bcs.insert("outflow".to_string(), BoundaryCondition::OutflowExtrapolate);
                let top = BoundaryCondition::Prescribed(Arc::new(move |x: [f64; 2], t: f64| {
                    if x[0] < Case::dmr_top_front(t) {
                        post
                    } else {
                        pre
                    }
                }));
                bcs.insert("top".to_string(), top);
                Discretization::new(mesh, p, gas, FluxModel::Euler, &bcs)
            }
            CaseKind::Cylinder => {
                let radii = builders::geometric_radii(1.0, 20.0, 4);
                let mesh = builders::cylinder_mesh(&radii, 16)?;
                let far = State::from_primitive(&self.free_stream(), &gas);
                let mut bcs = HashMap::new();
                bcs.insert("cylinder".to_string(), BoundaryCondition::SlipWall);
                bcs.insert("farfield".to_string(), BoundaryCondition::Farfield(far));
                Discretization::new(mesh, p, gas, FluxModel::Euler, &bcs)
            }
        }
    }

    /// L2-projected initial condition.
    pub fn initialize(&self, disc: &Discretization) -> Vec<f64> {
        disc.project(|x| self.initial_state(x))
    }

    pub fn settings(&self, scheme: Scheme, safety: f64) -> RunSettings {
        RunSettings {
            scheme,
            safety,
            t_end: self.t_end,
            strategy: self.strategy,
            steady_tol: self.steady_tol,
            ..Default::default()
        }
    }

    /// Exact density where an exact solution exists.
    pub fn exact_density(&self, x: [f64; 2], t: f64) -> Option<f64> {
        match self.kind {
            CaseKind::Advect1d => {
                Some(1.0 + 0.1 * (2.0 * std::f64::consts::PI * (x[0] - t)).sin())
            }
            CaseKind::Shock1d { mach } => {
                let (pre, post) = self.shock_states(mach);
                let front = mach * t; // c1 = 1
                Some(if x[0] < front { post.rho } else { pre.rho })
            }
            _ => None,
        }
    }

    /// Case error functional: density L2 against the exact solution
    /// (advection), or entropy L2 deviation from free stream (cylinder).
    pub fn error_norm(&self, disc: &Discretization, u: &[f64], t: f64) -> Option<f64> {
        match self.kind {
            CaseKind::Advect1d => {
                Some(disc.density_l2_error(u, |x| self.exact_density(x, t).unwrap()))
            }
            CaseKind::Cylinder => {
                let s_inf = State::from_primitive(&self.free_stream(), &self.gas)
                    .entropy(&self.gas);
                Some(entropy_l2_error(disc, u, s_inf))
            }
            _ => None,
        }
    }
}

/// L2 norm of s(U) - s_ref over the domain.
pub fn entropy_l2_error(disc: &Discretization, u: &[f64], s_ref: f64) -> f64 {
    let mut acc = 0.0;
    let mut states = Vec::new();
    for e in 0..disc.mesh.elements.len() {
        let re = &disc.refs[&disc.mesh.elements[e].shape];
        let g = &disc.geom.geoms[e];
        disc.volume_states(u, e, &mut states);
        for (v, s) in states.iter().enumerate() {
            let d = s.entropy(&disc.gas) - s_ref;
            acc += re.vol.weights[v] * g.detj_vol[v] * d * d;
        }
    }
    acc.sqrt()
}

/// Front location in a 1D run: centroid of the steepest-density-gradient cell,
/// measured by adjacent mean differences sorted along x.
pub fn detect_front(disc: &Discretization, u: &[f64]) -> f64 {
    let mut cells: Vec<(f64, f64)> = (0..disc.mesh.elements.len())
        .map(|e| (disc.geom.geoms[e].centroid[0], disc.element_mean(u, e).rho))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut front = cells[0].0;
    let mut steepest = 0.0;
    for w in cells.windows(2) {
        let slope = ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs();
        if slope > steepest {
            steepest = slope;
            front = 0.5 * (w[0].0 + w[1].0);
        }
    }
    front
}

/// One row of a mesh-refinement study.
#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub h: f64,
    pub error: f64,
    pub rate: Option<f64>,
}

/// Successive-halving convergence rates: rate_i = log2(err_{i-1}/err_i).
pub fn rates_from_errors(hs: &[f64], errors: &[f64]) -> Vec<ConvergenceRow> {
    let mut rows = Vec::new();
    for (i, (&h, &e)) in hs.iter().zip(errors).enumerate() {
        let rate = if i == 0 {
            None
        } else {
            Some((errors[i - 1] / e).log2() / (hs[i - 1] / h).log2())
        };
        rows.push(ConvergenceRow { h, error: e, rate });
    }
    rows
}
