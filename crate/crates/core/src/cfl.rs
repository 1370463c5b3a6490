//! Entropy-boundedness time-step machinery.
//!
//! The element mean after one forward-Euler step can be written as a convex
//! combination of volume-point values (weights theta_v) and upwind-modified
//! surface-point values (weights theta_{k,q}) provided the combined weights
//! integrate every basis function of the solution space exactly. Maximizing
//! min theta_{k,q}/zeta_{k,q} over that feasible set — zeta_{k,q} being the
//! surface fraction |J^d| w_q / V of a unit-measure reference element — is a
//! small linear program whose optimum is the largest provably
//! entropy-bounded CFL number for the (shape, order) pair. Physical element
//! geometry then enters only through the characteristic length L_e.
//!
//! The LP is solved by bisection on the objective with a phase-1 simplex
//! feasibility test at each level (tiny dense problems; robustness over
//! speed).

use crate::basis::RefElement;
use crate::dg::{Discretization, Traces};
use crate::error::{Error, Result};
use crate::euler::{self, State};
use crate::quadrature::Shape;
use rayon::prelude::*;
use std::collections::HashMap;

/// A feasible convex-decomposition certificate for one element type.
#[derive(Clone, Debug)]
pub struct ThetaDecomposition {
    pub theta_volume: Vec<f64>,
    /// theta_surface[k][q]
    pub theta_surface: Vec<Vec<f64>>,
    /// zeta[k][q] on the unit-measure reference shape
    pub zeta: Vec<Vec<f64>>,
    /// optimal min theta_{k,q} / zeta_{k,q}
    pub t: f64,
}

/// CFL^EB per (shape, polynomial order).
#[derive(Clone, Debug, Default)]
pub struct CflTable {
    map: HashMap<(Shape, usize), f64>,
}

impl CflTable {
    /// Solve the optimization for every shape/order pair.
    pub fn compute(shapes: &[Shape], orders: &[usize]) -> Result<CflTable> {
        let mut map = HashMap::new();
        for &shape in shapes {
            for &p in orders {
                let (t, _) = optimize_cfl_eb(shape, p)?;
                map.insert((shape, p), t);
            }
        }
        Ok(CflTable { map })
    }

    pub fn get(&self, shape: Shape, p: usize) -> Result<f64> {
        self.map.get(&(shape, p)).copied().ok_or_else(|| {
            Error::Internal(format!("CFL table has no entry for {shape:?} p={p}"))
        })
    }

    pub fn insert(&mut self, shape: Shape, p: usize, value: f64) {
        self.map.insert((shape, p), value);
    }

    /// Rows sorted by (shape, order) for reporting.
    pub fn rows(&self) -> Vec<(Shape, usize, f64)> {
        let mut rows: Vec<_> = self.map.iter().map(|(&(s, p), &v)| (s, p, v)).collect();
        rows.sort_by_key(|&(s, p, _)| (shape_rank(s), p));
        rows
    }
}

fn shape_rank(s: Shape) -> usize {
    match s {
        Shape::Line => 0,
        Shape::Quad => 1,
        Shape::Tri => 2,
    }
}

/// Surface fraction zeta_{k,q} of the unit-measure instance of a shape:
/// unit interval (point faces), unit square, unit right triangle.
pub fn unit_zeta(shape: Shape, k: usize, w_q: f64) -> f64 {
    let pm = shape.edge_param_measure(k);
    match shape {
        Shape::Line => 1.0,
        Shape::Quad => w_q / pm, // edge length 1, volume 1
        Shape::Tri => {
            let len = [1.0, std::f64::consts::SQRT_2, 1.0][k];
            len * (w_q / pm) / 0.5
        }
    }
}

/// Optimal CFL^EB for a shape/order pair on the pinned quadrature rules.
pub fn optimize_cfl_eb(shape: Shape, p: usize) -> Result<(f64, ThetaDecomposition)> {
    let re = RefElement::new(shape, p)?;
    optimize_cfl_eb_on(&re)
}

/// Same optimization on an explicitly constructed reference element
/// (used to probe alternative quadrature rules).
pub fn optimize_cfl_eb_on(re: &RefElement) -> Result<(f64, ThetaDecomposition)> {
    let shape = re.shape;
    let vref = shape.ref_volume();
    // moment targets from the volume rule itself
    let wtilde: Vec<f64> = re.vol.weights.iter().map(|w| w / vref).collect();

    let mut zeta_flat = Vec::new();
    let mut phi_surf_flat: Vec<&[f64]> = Vec::new();
    for (k, edge) in re.surf.edges.iter().enumerate() {
        for (q, &w) in edge.weights.iter().enumerate() {
            zeta_flat.push(unit_zeta(shape, k, w));
            phi_surf_flat.push(&re.phi_surf[k][q]);
        }
    }
    let phi_vol: Vec<&[f64]> = re.phi_vol.iter().map(|v| v.as_slice()).collect();

    let (t, theta_v, theta_s) =
        maximize_surface_ratio(&phi_vol, &phi_surf_flat, &wtilde, &zeta_flat)?;

    // certificate: moments reconstructed within 1e-10, weights feasible
    let np = re.np;
    for m in 0..np {
        let mut lhs = 0.0;
        for (v, ph) in phi_vol.iter().enumerate() {
            lhs += theta_v[v] * ph[m];
        }
        for (j, ph) in phi_surf_flat.iter().enumerate() {
            lhs += theta_s[j] * ph[m];
        }
        let rhs: f64 = phi_vol
            .iter()
            .zip(&wtilde)
            .map(|(ph, w)| w * ph[m])
            .sum();
        if (lhs - rhs).abs() > 1e-10 {
            return Err(Error::Internal(format!(
                "decomposition certificate failed: moment {m} residual {:.3e}",
                lhs - rhs
            )));
        }
    }
    if theta_v.iter().any(|&x| x < -1e-12) {
        return Err(Error::Internal("negative volume weight in certificate".into()));
    }
    for (j, &th) in theta_s.iter().enumerate() {
        if th < t * zeta_flat[j] - 1e-10 {
            return Err(Error::Internal("surface weight below ratio bound".into()));
        }
    }

    let mut theta_surface = Vec::new();
    let mut zeta = Vec::new();
    let mut j = 0;
    for edge in &re.surf.edges {
        let nq = edge.weights.len();
        theta_surface.push(theta_s[j..j + nq].to_vec());
        zeta.push(zeta_flat[j..j + nq].to_vec());
        j += nq;
    }
    Ok((
        t,
        ThetaDecomposition {
            theta_volume: theta_v,
            theta_surface,
            zeta,
            t,
        },
    ))
}

/// Per-element variant on the physical geometry (curved elements): moment
/// targets and surface fractions use the element's Jacobians. Returns a
/// length-dimensioned step bound (already includes L_e's role).
pub fn optimize_cfl_element(disc: &Discretization, e: usize) -> Result<f64> {
    let el = &disc.mesh.elements[e];
    let re = &disc.refs[&el.shape];
    let g = &disc.geom.geoms[e];
    let wtilde: Vec<f64> = re
        .vol
        .weights
        .iter()
        .zip(&g.detj_vol)
        .map(|(w, d)| w * d / g.volume)
        .collect();
    let mut zeta_flat = Vec::new();
    let mut phi_surf_flat: Vec<&[f64]> = Vec::new();
    for (k, zk) in g.zeta.iter().enumerate() {
        for (q, &z) in zk.iter().enumerate() {
            zeta_flat.push(z);
            phi_surf_flat.push(&re.phi_surf[k][q]);
        }
    }
    let phi_vol: Vec<&[f64]> = re.phi_vol.iter().map(|v| v.as_slice()).collect();
    let (t, _, _) = maximize_surface_ratio(&phi_vol, &phi_surf_flat, &wtilde, &zeta_flat)?;
    Ok(t)
}

/// maximize t s.t. sum_v theta_v phi_m(r_v) + sum_j theta_j phi_m(g_j) = b_m,
/// theta_v >= 0, theta_j >= t zeta_j; b_m = sum_v wtilde_v phi_m(r_v).
fn maximize_surface_ratio(
    phi_vol: &[&[f64]],
    phi_surf: &[&[f64]],
    wtilde: &[f64],
    zeta: &[f64],
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let np = phi_vol[0].len();
    let nv = phi_vol.len();
    let ns = phi_surf.len();

    let b: Vec<f64> = (0..np)
        .map(|m| phi_vol.iter().zip(wtilde).map(|(ph, w)| w * ph[m]).sum())
        .collect();

    // t = 0 is always feasible (theta_v = wtilde, theta_j = 0); an upper
    // bound follows from partition of unity: t * sum zeta <= 1.
    let zsum: f64 = zeta.iter().sum();
    let mut lo = 0.0f64;
    let mut hi = 1.0 / zsum + 1e-6;

    let feasibility = |t: f64| -> Option<(Vec<f64>, Vec<f64>)> {
        // substitute theta_j = t zeta_j + sigma_j, sigma_j >= 0
        let mut rhs = b.clone();
        for (j, ph) in phi_surf.iter().enumerate() {
            for m in 0..np {
                rhs[m] -= t * zeta[j] * ph[m];
            }
        }
        let mut a = vec![0.0; np * (nv + ns)];
        for m in 0..np {
            for (v, ph) in phi_vol.iter().enumerate() {
                a[m * (nv + ns) + v] = ph[m];
            }
            for (j, ph) in phi_surf.iter().enumerate() {
                a[m * (nv + ns) + nv + j] = ph[m];
            }
        }
        phase1_simplex(&a, &rhs, np, nv + ns).map(|x| {
            let theta_v = x[..nv].to_vec();
            let theta_s: Vec<f64> = (0..ns).map(|j| x[nv + j] + t * zeta[j]).collect();
            (theta_v, theta_s)
        })
    };

    let mut best = feasibility(0.0)
        .ok_or_else(|| Error::Internal("decomposition infeasible at t = 0".into()))?;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        match feasibility(mid) {
            Some(sol) => {
                lo = mid;
                best = sol;
            }
            None => hi = mid,
        }
    }
    Ok((lo, best.0, best.1))
}

/// Phase-1 simplex: find x >= 0 with A x = b (dense row-major A, m rows,
/// n cols). Returns None when infeasible. Bland's rule; suited to the tiny
/// systems here. The returned vertex is re-solved on its basic columns by
/// least squares so the equality residual reaches machine precision instead
/// of the simplex's accumulated roundoff.
fn phase1_simplex(a: &[f64], b: &[f64], m: usize, n: usize) -> Option<Vec<f64>> {
    const ENTER_TOL: f64 = 1e-12;
    const PIVOT_TOL: f64 = 1e-11;
    let cols = n + m; // original + artificial
    let mut t = vec![0.0; m * (cols + 1)];
    let width = cols + 1;
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i * width + j] = flip * a[i * n + j];
        }
        t[i * width + n + i] = 1.0;
        t[i * width + cols] = flip * b[i];
    }
    // cost row: minimize sum of artificials; reduced costs start as the
    // negated column sums (artificial basis).
    let mut cost = vec![0.0; width];
    for j in 0..n {
        let mut s = 0.0;
        for i in 0..m {
            s += t[i * width + j];
        }
        cost[j] = -s;
    }
    let mut obj = 0.0;
    for i in 0..m {
        obj -= t[i * width + cols];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    for _iter in 0..10_000 {
        // Bland: first column with negative reduced cost that also admits a
        // pivot row. Phase-1 is never truly unbounded, so a column without a
        // positive entry is roundoff noise — skip it rather than bail.
        let mut step = None;
        'columns: for (je, &c) in cost.iter().take(cols).enumerate() {
            if c >= -ENTER_TOL {
                continue;
            }
            // ratio test; Bland ties by smallest basis variable index
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let aij = t[i * width + je];
                if aij > PIVOT_TOL {
                    let ratio = t[i * width + cols] / aij;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-15
                                || ((ratio - lr).abs() <= 1e-15 && basis[i] < basis[li])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            if let Some((li, _)) = leave {
                step = Some((je, li));
                break 'columns;
            }
        }
        let Some((je, li)) = step else { break };
        // pivot
        let piv = t[li * width + je];
        for j in 0..width {
            t[li * width + j] /= piv;
        }
        for i in 0..m {
            if i != li {
                let f = t[i * width + je];
                if f != 0.0 {
                    for j in 0..width {
                        t[i * width + j] -= f * t[li * width + j];
                    }
                }
            }
        }
        let f = cost[je];
        if f != 0.0 {
            for j in 0..width {
                let delta = f * t[li * width + j];
                if j < cols {
                    cost[j] -= delta;
                } else {
                    obj -= delta;
                }
            }
        }
        basis[li] = je;
    }

    // feasible iff all artificials drove the objective to zero
    if obj.abs() > 1e-10 {
        return None;
    }
    let mut x = vec![0.0; n];
    for (i, &bi) in basis.iter().enumerate() {
        if bi < n {
            x[bi] = t[i * width + cols];
        } else if t[i * width + cols].abs() > 1e-10 {
            return None; // artificial stuck in basis at a nonzero level
        }
    }

    // Polish: exact least-squares solve restricted to the basic columns.
    let support: Vec<usize> = basis.iter().copied().filter(|&bi| bi < n).collect();
    if !support.is_empty() {
        let amat =
            nalgebra::DMatrix::from_fn(m, support.len(), |i, k| a[i * n + support[k]]);
        let bvec = nalgebra::DVector::from_column_slice(b);
        let current_res = equality_residual(a, b, m, n, &x);
        if let Some(y) = amat.svd(true, true).solve(&bvec, 1e-13).ok() {
            let mut xr = vec![0.0; n];
            for (k, &j) in support.iter().enumerate() {
                xr[j] = y[k];
            }
            let refined_res = equality_residual(a, b, m, n, &xr);
            if refined_res <= current_res && xr.iter().all(|&v| v >= -1e-11) {
                x = xr;
            }
        }
    }

    // clamp tiny negatives from roundoff (degenerate basics are truly zero)
    for xi in x.iter_mut() {
        if *xi < 0.0 && *xi > -1e-11 {
            *xi = 0.0;
        }
    }
    Some(x)
}

fn equality_residual(a: &[f64], b: &[f64], m: usize, n: usize, x: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m {
        let mut r = -b[i];
        for j in 0..n {
            r += a[i * n + j] * x[j];
        }
        worst = worst.max(r.abs());
    }
    worst
}

/// Per-step time-step controller.
#[derive(Clone, Debug)]
pub struct StepController {
    pub safety: f64,
    pub table: CflTable,
    /// Per-element length-dimensioned bounds from the physical LP route
    /// (replaces CFL^EB * L_e when present).
    pub per_element: Option<Vec<f64>>,
}

impl StepController {
    pub fn new(table: CflTable, safety: f64) -> Self {
        StepController {
            safety,
            table,
            per_element: None,
        }
    }

    /// Enable the per-element physical LP route (curved meshes).
    pub fn with_per_element(mut self, disc: &Discretization) -> Result<Self> {
        let vals: Vec<f64> = (0..disc.mesh.elements.len())
            .map(|e| optimize_cfl_element(disc, e))
            .collect::<Result<_>>()?;
        self.per_element = Some(vals);
        Ok(self)
    }

    /// Largest entropy-bounded step: safety * min_e [ 1/2 CFL^EB L_e /
    /// lambda_e ], lambda_e the tau-scaled maximum wave speed over all
    /// interior and exterior trace states on the element surface.
    /// Also returns per-element lambda.
    pub fn time_step(
        &self,
        disc: &Discretization,
        traces: &Traces,
        t: f64,
    ) -> Result<(f64, Vec<f64>)> {
        let tau = euler::tau_factor(disc.nd, &disc.gas);
        let nelem = disc.mesh.elements.len();

        let lambdas: Vec<Result<f64>> = (0..nelem)
            .into_par_iter()
            .map(|e| {
                let el = &disc.mesh.elements[e];
                let re = &disc.refs[&el.shape];
                let g = &disc.geom.geoms[e];
                let nq = re.surf.edges[0].param.len();
                let mut numax = 0.0f64;
                for k in 0..el.shape.nedges() {
                    let (fid, is_left) = disc.mesh.elem_faces[e][k];
                    let face = &disc.mesh.faces[fid];
                    for q in 0..nq {
                        let ul = State::from_fields(disc.nd, traces.get(e, k, q));
                        let ul = ul.checked(&disc.gas, || {
                            format!("trace state, element {e} edge {k} point {q}")
                        })?;
                        numax = numax.max(ul.max_wave_speed(&disc.gas));
                        let ur = match face.right {
                            Some((oe, ok)) => {
                                let oq = if is_left {
                                    face.perm[q]
                                } else {
                                    face.perm.iter().position(|&r| r == q).unwrap()
                                };
                                let (oe, ok) = if is_left { (oe, ok) } else { face.left };
                                State::from_fields(disc.nd, traces.get(oe, ok, oq))
                            }
                            None => {
                                let bc = &disc.bcs[face.bc_tag.unwrap()];
                                disc.ghost_state(bc, &ul, g.normal[k][q], g.x_surf[k][q], t)
                            }
                        };
                        let ur = ur.checked(&disc.gas, || {
                            format!("exterior trace, element {e} edge {k} point {q}")
                        })?;
                        numax = numax.max(ur.max_wave_speed(&disc.gas));
                    }
                }
                Ok(tau * numax)
            })
            .collect();

        let mut dt = f64::INFINITY;
        let mut lam = Vec::with_capacity(nelem);
        for (e, lr) in lambdas.into_iter().enumerate() {
            let l = lr?;
            lam.push(l);
            let shape = disc.mesh.elements[e].shape;
            let bound = match &self.per_element {
                Some(v) => v[e],
                None => self.table.get(shape, disc.p)? * disc.geom.geoms[e].l_char,
            };
            dt = dt.min(0.5 * bound / l);
        }
        let dt = self.safety * dt;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Internal(format!("non-positive time step {dt:.3e}")));
        }
        Ok((dt, lam))
    }
}

