//! Entropy machinery: per-element entropy-bound estimation, density
//! positivity pre-scaling, and the entropy-bounding scaling operator.
//!
//! The operator replaces U by U + eps (Ubar - U) with the smallest eps that
//! restores p - exp(s0 - s_ref) rho^gamma >= 0 at every quadrature point;
//! concavity of that functional makes the closed-form eps sufficient. The
//! bound s_e^0 is estimated from quadrature-point entropies (a guarded
//! downward extrapolation) and relaxed by the previous step's neighborhood
//! bounds.

use crate::dg::{BoundaryCondition, Discretization, Traces, MAX_FIELDS};
use crate::error::{Error, Result};
use crate::euler::{GasModel, State, ADMISSIBILITY_FLOOR};
use rayon::prelude::*;

/// How the per-element entropy bound is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundStrategy {
    /// Fixed user-supplied bound everywhere (NEG_INFINITY reduces the
    /// limiter to pure positivity preservation).
    Global(f64),
    /// Estimated bounds: extrapolation at startup, neighborhood-relaxed
    /// updates afterwards.
    Local,
}

/// Double-buffered per-element bounds.
#[derive(Clone, Debug)]
pub struct EntropyBounds {
    pub current: Vec<f64>,
    pub previous: Vec<f64>,
}

impl EntropyBounds {
    pub fn new(n: usize) -> Self {
        EntropyBounds {
            current: vec![f64::NEG_INFINITY; n],
            previous: vec![f64::NEG_INFINITY; n],
        }
    }

    /// Make the current bounds the previous ones for the next step.
    pub fn rotate(&mut self) {
        std::mem::swap(&mut self.current, &mut self.previous);
    }
}

/// Per-step limiter activity, exported with field output.
#[derive(Clone, Debug, Default)]
pub struct LimiterReport {
    /// Max scaling factor per element over the step's stages.
    pub eps: Vec<f64>,
    /// Elements with eps > 0 in the latest stage.
    pub active: usize,
    /// Elements whose density needed positivity scaling.
    pub rho_scaled: usize,
}

impl LimiterReport {
    pub fn new(n: usize) -> Self {
        LimiterReport {
            eps: vec![0.0; n],
            active: 0,
            rho_scaled: 0,
        }
    }

    pub fn reset(&mut self) {
        self.eps.fill(0.0);
        self.active = 0;
        self.rho_scaled = 0;
    }
}

/// Guarded downward extrapolation of the minimum interior entropy:
/// min over exterior traces and s_m - (d_near/|x_m - x_n|)(s_n - s_m),
/// with s_m/s_n the min/max interior entropies at x_m/x_n.
pub fn estimate_entropy_bound(interior: &[(f64, [f64; 2])], exterior: &[f64]) -> f64 {
    assert!(!interior.is_empty());
    let mut m = 0usize;
    let mut n = 0usize;
    for (i, (s, _)) in interior.iter().enumerate() {
        if *s < interior[m].0 {
            m = i;
        }
        if *s > interior[n].0 {
            n = i;
        }
    }
    let (s_m, x_m) = interior[m];
    let (s_n, x_n) = interior[n];
    let extrap = if s_n - s_m <= 0.0 {
        s_m // constant field: nothing to extrapolate
    } else {
        let dmn = dist(x_m, x_n);
        let mut dnear = f64::INFINITY;
        for (i, (_, x)) in interior.iter().enumerate() {
            if i != m {
                dnear = dnear.min(dist(x_m, *x));
            }
        }
        debug_assert!(dmn > 0.0 && dnear.is_finite());
        s_m - (dnear / dmn) * (s_n - s_m)
    };
    exterior.iter().fold(extrap, |acc, &s| acc.min(s))
}

#[inline]
fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Fill `bounds.current` for this step. `traces` must hold traces of `u`.
/// On the first step only the extrapolation estimate is used; afterwards it
/// is relaxed by the smallest neighborhood bound of the previous step.
pub fn estimate_bounds(
    disc: &Discretization,
    u: &[f64],
    traces: &Traces,
    t: f64,
    strategy: BoundStrategy,
    first_step: bool,
    bounds: &mut EntropyBounds,
) {
    let nelem = disc.mesh.elements.len();
    match strategy {
        BoundStrategy::Global(s0) => {
            bounds.current.iter_mut().for_each(|b| *b = s0);
        }
        BoundStrategy::Local => {
            let prev = &bounds.previous;
            let estimates: Vec<f64> = (0..nelem)
                .into_par_iter()
                .map(|e| {
                    let raw = element_estimate(disc, u, traces, t, e);
                    // Relative slack below the estimate: near-constant data
                    // would otherwise sit exactly on its bound and trip the
                    // limiter on noise-level entropy dips.
                    let est = raw - 5e-9 * raw.abs().max(1.0);
                    if first_step {
                        est
                    } else {
                        let mut floor = prev[e];
                        for &k in &disc.mesh.neighbors[e] {
                            floor = floor.min(prev[k]);
                        }
                        est.max(floor)
                    }
                })
                .collect();
            bounds.current.copy_from_slice(&estimates);
        }
    }
}

/// Interior/exterior entropy collection and extrapolation for one element.
fn element_estimate(
    disc: &Discretization,
    u: &[f64],
    traces: &Traces,
    t: f64,
    e: usize,
) -> f64 {
    let el = &disc.mesh.elements[e];
    let re = &disc.refs[&el.shape];
    let g = &disc.geom.geoms[e];
    let gas = &disc.gas;
    let nd = disc.nd;

    let mut interior: Vec<(f64, [f64; 2])> =
        Vec::with_capacity(re.vol.len() + el.shape.nedges() * re.surf.edges[0].param.len());
    let mut states = Vec::new();
    disc.volume_states(u, e, &mut states);
    for (v, s) in states.iter().enumerate() {
        interior.push((s.entropy(gas), g.x_vol[v]));
    }
    let nq = re.surf.edges[0].param.len();
    for k in 0..el.shape.nedges() {
        for q in 0..nq {
            let s = State::from_fields(nd, traces.get(e, k, q));
            interior.push((s.entropy(gas), g.x_surf[k][q]));
        }
    }

    // Exterior traces: neighbor values across interior faces; ghost states
    // at inflow-type boundaries (walls/outflow mirror interior entropy and
    // are skipped).
    let mut exterior = Vec::new();
    for k in 0..el.shape.nedges() {
        let (fid, is_left) = disc.mesh.elem_faces[e][k];
        let face = &disc.mesh.faces[fid];
        match face.right {
            Some((re_, rk)) => {
                let (oe, ok) = if is_left { (re_, rk) } else { face.left };
                for q in 0..nq {
                    let oq = if is_left {
                        face.perm[q]
                    } else {
                        face.perm.iter().position(|&r| r == q).unwrap()
                    };
                    let s = State::from_fields(nd, traces.get(oe, ok, oq));
                    exterior.push(s.entropy(gas));
                }
            }
            None => {
                let bc = &disc.bcs[face.bc_tag.unwrap()];
                let include = matches!(
                    bc,
                    BoundaryCondition::SupersonicInflow(_)
                        | BoundaryCondition::Farfield(_)
                        | BoundaryCondition::Prescribed(_)
                );
                if include {
                    for q in 0..nq {
                        let ul = State::from_fields(nd, traces.get(e, k, q));
                        let ghost =
                            disc.ghost_state(bc, &ul, g.normal[k][q], g.x_surf[k][q], t);
                        exterior.push(ghost.entropy(gas));
                    }
                }
            }
        }
    }

    // Degenerate data (negative pressure or density) has non-finite entropy.
    // Fall back to the positivity-only sentinel; the limiter's mean check and
    // the step controller's trace check turn that into a clean diagnostic.
    if interior.iter().any(|(s, _)| !s.is_finite()) || exterior.iter().any(|s| !s.is_finite())
    {
        return f64::NEG_INFINITY;
    }

    estimate_entropy_bound(&interior, &exterior)
}

/// Scale the density field toward its mean so rho >= floor at the given
/// points. Returns the scaling factor theta (1 = untouched). `point_rho`
/// is updated in place.
pub fn enforce_density_positivity(
    coeffs: &mut [f64],
    np: usize,
    phi0: f64,
    mean_rho: f64,
    point_rho: &mut [f64],
) -> f64 {
    let floor = ADMISSIBILITY_FLOOR;
    let rho_min = point_rho.iter().cloned().fold(f64::INFINITY, f64::min);
    if rho_min >= floor {
        return 1.0;
    }
    // mean admissibility (mean_rho > floor) is checked by the caller
    let theta = ((mean_rho - floor) / (mean_rho - rho_min)).clamp(0.0, 1.0);
    let c_rho = &mut coeffs[0..np];
    c_rho[0] = theta * c_rho[0] + (1.0 - theta) * mean_rho / phi0;
    for c in c_rho.iter_mut().skip(1) {
        *c *= theta;
    }
    for r in point_rho.iter_mut() {
        *r = mean_rho + theta * (*r - mean_rho);
    }
    theta
}

/// Entropy-feasibility functional g(U) = p - exp(s0 - s_ref) rho^gamma;
/// g >= 0 iff s(U) >= s0 (given rho > 0).
#[inline]
pub fn entropy_gap(s: &State, s0: f64, gas: &GasModel) -> f64 {
    let thresh = (s0 - gas.s_ref).exp();
    s.pressure(gas) - thresh * s.rho.powf(gas.gamma)
}

/// Scale the whole state toward its mean so g >= 0 at all given points.
/// Returns eps in [0,1). The mean must itself satisfy g(mean) > 0.
pub fn apply_entropy_limiter(
    coeffs: &mut [f64],
    np: usize,
    nfields: usize,
    phi0: f64,
    mean: &State,
    nd: usize,
    points: &[State],
    s0: f64,
    gas: &GasModel,
) -> Result<f64> {
    let mut tau = 0.0f64;
    for s in points {
        tau = tau.min(entropy_gap(s, s0, gas));
    }
    // g is a difference of two pressure-scaled terms; elements sitting
    // exactly on their bound produce roundoff-negative gaps.
    let thresh = (s0 - gas.s_ref).exp();
    let gap_tol = 1e-12 * (mean.pressure(gas).abs() + thresh * mean.rho.powf(gas.gamma));
    if tau >= -gap_tol {
        return Ok(0.0);
    }
    let gap_mean = entropy_gap(mean, s0, gas);
    if gap_mean < -gap_tol {
        return Err(Error::Inadmissible {
            context: format!(
                "element mean violates its entropy bound (gap {gap_mean:.3e}, s0 {s0:.6}); \
                 time step too large for the bound"
            ),
            rho: mean.rho,
            p: mean.pressure(gas),
        });
    }
    let eps = if gap_mean <= 0.0 {
        1.0 // mean obeys the bound only to roundoff: collapse to the mean
    } else {
        tau / (tau - gap_mean)
    };
    debug_assert!((0.0..=1.0).contains(&eps));
    let mut mean_fields = [0.0; MAX_FIELDS];
    mean.write_fields(nd, &mut mean_fields[..nfields]);
    for f in 0..nfields {
        let c = &mut coeffs[f * np..(f + 1) * np];
        c[0] = (1.0 - eps) * c[0] + eps * mean_fields[f] / phi0;
        for cm in c.iter_mut().skip(1) {
            *cm *= 1.0 - eps;
        }
    }
    Ok(eps)
}

/// Apply positivity and entropy limiting to every element of `u` with the
/// step's bounds; records per-element eps and activity in `report`.
pub fn limit_solution(
    disc: &Discretization,
    u: &mut [f64],
    bounds: &EntropyBounds,
    report: &mut LimiterReport,
    step: usize,
) -> Result<()> {
    let nf = disc.nfields;
    let nd = disc.nd;
    let gas = disc.gas;

    // Split the solution into per-element chunks for parallel mutation.
    let nelem = disc.mesh.elements.len();
    let mut chunks: Vec<&mut [f64]> = Vec::with_capacity(nelem);
    let mut rest = &mut u[..];
    for e in 0..nelem {
        let n = disc.np(e) * nf;
        let (chunk, tail) = rest.split_at_mut(n);
        chunks.push(chunk);
        rest = tail;
    }

    let results: Vec<Result<(f64, f64)>> = chunks
        .par_iter_mut()
        .enumerate()
        .map(|(e, c)| limit_element(disc, c, e, bounds.current[e], &gas, nd, nf, step))
        .collect();

    let mut active = 0usize;
    let mut rho_scaled = 0usize;
    for (e, r) in results.into_iter().enumerate() {
        let (theta, eps) = r?;
        if theta < 1.0 {
            rho_scaled += 1;
        }
        if eps > 0.0 {
            active += 1;
        }
        report.eps[e] = report.eps[e].max(eps);
    }
    report.active = active;
    report.rho_scaled = rho_scaled;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn limit_element(
    disc: &Discretization,
    coeffs: &mut [f64],
    e: usize,
    s0: f64,
    gas: &GasModel,
    nd: usize,
    nf: usize,
    step: usize,
) -> Result<(f64, f64)> {
    let el = &disc.mesh.elements[e];
    let re = &disc.refs[&el.shape];
    let np = re.np;
    let phi0 = re.phi_vol[0][0];

    // Volume-weighted mean (exact for the polynomial on curved elements).
    let g = &disc.geom.geoms[e];
    let mut mean_fields = [0.0; MAX_FIELDS];
    for v in 0..re.vol.len() {
        let w = re.vol.weights[v] * g.detj_vol[v];
        for f in 0..nf {
            let mut s = 0.0;
            for m in 0..np {
                s += coeffs[f * np + m] * re.phi_vol[v][m];
            }
            mean_fields[f] += w * s;
        }
    }
    for mf in mean_fields.iter_mut() {
        *mf /= g.volume;
    }
    let mean = State::from_fields(nd, &mean_fields[..nf]);
    if !mean.admissible(gas) {
        return Err(Error::Fatal {
            step,
            element: e,
            reason: format!(
                "inadmissible element mean (rho {:.3e}, p {:.3e})",
                mean.rho,
                mean.pressure(gas)
            ),
        });
    }

    // States at all volume + surface quadrature points.
    let nq = re.surf.edges[0].param.len();
    let ndpts = re.vol.len() + el.shape.nedges() * nq;
    let mut pts: Vec<State> = Vec::with_capacity(ndpts);
    let eval_at = |phi: &[f64], pts: &mut Vec<State>| {
        let mut fields = [0.0; MAX_FIELDS];
        for (f, fld) in fields.iter_mut().take(nf).enumerate() {
            let mut s = 0.0;
            for m in 0..np {
                s += coeffs[f * np + m] * phi[m];
            }
            *fld = s;
        }
        pts.push(State::from_fields(nd, &fields[..nf]));
    };
    for v in 0..re.vol.len() {
        eval_at(&re.phi_vol[v], &mut pts);
    }
    for k in 0..el.shape.nedges() {
        for q in 0..nq {
            eval_at(&re.phi_surf[k][q], &mut pts);
        }
    }

    // Density positivity first; p at each point changes with rho.
    let mut rho_pts: Vec<f64> = pts.iter().map(|s| s.rho).collect();
    let theta = enforce_density_positivity(coeffs, np, phi0, mean.rho, &mut rho_pts);
    if theta < 1.0 {
        for (s, &r) in pts.iter_mut().zip(&rho_pts) {
            s.rho = r;
        }
    }

    let eps = apply_entropy_limiter(coeffs, np, nf, phi0, &mean, nd, &pts, s0, gas)
        .map_err(|err| match err {
            Error::Inadmissible { context, rho, p } => Error::Fatal {
                step,
                element: e,
                reason: format!("{context} (rho {rho:.3e}, p {p:.3e})"),
            },
            other => other,
        })?;
    Ok((theta, eps))
}
