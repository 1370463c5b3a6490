//! Discontinuous Galerkin spatial discretization.
//!
//! Solutions are stored as modal coefficients per element (orthonormal
//! reference bases), fields laid out as [rho, rho*u, (rho*v,) rho*e].
//! The semi-discrete form is dU/dt = M^{-1} (volume flux - surface flux)
//! with a local Lax-Friedrichs interface flux.

use crate::basis::RefElement;
use crate::error::{Error, Result};
use crate::euler::{self, GasModel, State};
use crate::geometry::{GeometryCache, Mesh};
use crate::quadrature::Shape;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Arc;

pub const MAX_FIELDS: usize = 4;

/// Boundary treatment, bound to a mesh boundary tag.
#[derive(Clone)]
pub enum BoundaryCondition {
    /// Fused at the mesh level; setup fails if a face still carries it.
    Periodic,
    /// Fixed exterior state (all characteristics entering).
    SupersonicInflow(State),
    /// Exterior state copies the interior trace.
    OutflowExtrapolate,
    /// Mirror the normal momentum component.
    SlipWall,
    /// Fixed exterior state, flux upwinded pointwise.
    Farfield(State),
    /// Time- and position-dependent exterior state.
    Prescribed(Arc<dyn Fn([f64; 2], f64) -> State + Send + Sync>),
}

impl std::fmt::Debug for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Periodic => write!(f, "Periodic"),
            Self::SupersonicInflow(s) => write!(f, "SupersonicInflow({s:?})"),
            Self::OutflowExtrapolate => write!(f, "OutflowExtrapolate"),
            Self::SlipWall => write!(f, "SlipWall"),
            Self::Farfield(s) => write!(f, "Farfield({s:?})"),
            Self::Prescribed(_) => write!(f, "Prescribed(fn)"),
        }
    }
}

/// Physical flux choice: compressible Euler, or frozen-velocity linear
/// advection of every field (a test device for verifying discrete
/// exactness on smooth solutions).
#[derive(Clone, Debug)]
pub enum FluxModel {
    Euler,
    Advection([f64; 2]),
}

/// Mass matrix per element: |J| is constant on affine elements so the
/// orthonormal basis keeps it diagonal; curved elements get a dense inverse.
#[derive(Clone, Debug)]
pub enum MassMatrix {
    Diagonal(f64),
    DenseInverse(DMatrix<f64>),
}

/// Trace values of all fields at every surface quadrature point.
pub struct Traces {
    pub vals: Vec<f64>,
    elem_off: Vec<usize>,
    edge_stride: Vec<usize>, // per element: points per edge * nfields
    nfields: usize,
}

impl Traces {
    #[inline]
    pub fn get(&self, e: usize, k: usize, q: usize) -> &[f64] {
        let off = self.elem_off[e] + k * self.edge_stride[e] + q * self.nfields;
        &self.vals[off..off + self.nfields]
    }
}

/// Everything needed to evaluate the semi-discrete operator on one mesh.
pub struct Discretization {
    pub mesh: Mesh,
    pub geom: GeometryCache,
    pub refs: HashMap<Shape, RefElement>,
    pub p: usize,
    pub nd: usize,
    pub nfields: usize,
    /// Coefficient offset of each element in a solution vector.
    pub offsets: Vec<usize>,
    pub total_dofs: usize,
    pub mass: Vec<MassMatrix>,
    /// Boundary condition per mesh boundary tag.
    pub bcs: Vec<BoundaryCondition>,
    pub flux: FluxModel,
    pub gas: GasModel,
}

/// Scratch buffers reused across residual evaluations.
pub struct Workspace {
    pub traces: Traces,
    face_flux: Vec<f64>,
    face_off: Vec<usize>,
}

impl Discretization {
    pub fn new(
        mut mesh: Mesh,
        p: usize,
        gas: GasModel,
        flux: FluxModel,
        bcs: &HashMap<String, BoundaryCondition>,
    ) -> Result<Discretization> {
        let nd = mesh.nd;
        let nfields = euler::nfields(nd);

        let mut refs = HashMap::new();
        for el in &mesh.elements {
            if !refs.contains_key(&el.shape) {
                refs.insert(el.shape, RefElement::new(el.shape, p)?);
            }
        }

        let geom = GeometryCache::build(&mut mesh, &refs)?;

        // Bind boundary conditions; every tag still referenced by an unfused
        // face must be covered (periodic fusion can retire tags entirely).
        let mut used = vec![false; mesh.boundary_tags.len()];
        for face in &mesh.faces {
            if face.right.is_none() {
                used[face.bc_tag.expect("boundary face carries a tag")] = true;
            }
        }
        let mut bound = Vec::new();
        let mut missing = Vec::new();
        for (k, tag) in mesh.boundary_tags.iter().enumerate() {
            match bcs.get(tag) {
                Some(bc) => bound.push(bc.clone()),
                None if used[k] => {
                    missing.push(tag.clone());
                    bound.push(BoundaryCondition::Periodic);
                }
                // unreferenced tag: placeholder, never consulted
                None => bound.push(BoundaryCondition::Periodic),
            }
        }
        if !missing.is_empty() {
            return Err(Error::Config(format!(
                "no boundary condition for tags: {}",
                missing.join(", ")
            )));
        }
        for (f, face) in mesh.faces.iter().enumerate() {
            if face.right.is_none() {
                if let BoundaryCondition::Periodic = bound[face.bc_tag.unwrap()] {
                    return Err(Error::Config(format!(
                        "face {f} tagged periodic but not fused by the mesh"
                    )));
                }
            }
        }

        let mut offsets = Vec::with_capacity(mesh.elements.len());
        let mut total = 0usize;
        for el in &mesh.elements {
            offsets.push(total);
            total += refs[&el.shape].np * nfields;
        }

        let mut mass = Vec::with_capacity(mesh.elements.len());
        for (e, el) in mesh.elements.iter().enumerate() {
            let re = &refs[&el.shape];
            let g = &geom.geoms[e];
            if g.affine {
                mass.push(MassMatrix::Diagonal(g.detj_vol[0]));
            } else {
                let np = re.np;
                let mut m = DMatrix::zeros(np, np);
                for v in 0..re.vol.len() {
                    let w = re.vol.weights[v] * g.detj_vol[v];
                    for i in 0..np {
                        for j in 0..np {
                            m[(i, j)] += w * re.phi_vol[v][i] * re.phi_vol[v][j];
                        }
                    }
                }
                let inv = m.try_inverse().ok_or_else(|| {
                    Error::Mesh(format!("element {e}: singular mass matrix"))
                })?;
                mass.push(MassMatrix::DenseInverse(inv));
            }
        }

        Ok(Discretization {
            mesh,
            geom,
            refs,
            p,
            nd,
            nfields,
            offsets,
            total_dofs: total,
            mass,
            bcs: bound,
            flux,
            gas,
        })
    }

    #[inline]
    pub fn np(&self, e: usize) -> usize {
        self.refs[&self.mesh.elements[e].shape].np
    }

    #[inline]
    pub fn coeffs<'a>(&self, u: &'a [f64], e: usize) -> &'a [f64] {
        let n = self.np(e) * self.nfields;
        &u[self.offsets[e]..self.offsets[e] + n]
    }

    #[inline]
    pub fn coeffs_mut<'a>(&self, u: &'a mut [f64], e: usize) -> &'a mut [f64] {
        let n = self.np(e) * self.nfields;
        &mut u[self.offsets[e]..self.offsets[e] + n]
    }

    pub fn workspace(&self) -> Workspace {
        let nf = self.nfields;
        let mut elem_off = Vec::with_capacity(self.mesh.elements.len());
        let mut edge_stride = Vec::with_capacity(self.mesh.elements.len());
        let mut total = 0usize;
        for el in &self.mesh.elements {
            let re = &self.refs[&el.shape];
            let nq = re.surf.edges[0].param.len();
            elem_off.push(total);
            edge_stride.push(nq * nf);
            total += el.shape.nedges() * nq * nf;
        }
        let traces = Traces {
            vals: vec![0.0; total],
            elem_off,
            edge_stride,
            nfields: nf,
        };
        let mut face_off = Vec::with_capacity(self.mesh.faces.len());
        let mut ftotal = 0usize;
        for f in &self.mesh.faces {
            let (e, k) = f.left;
            face_off.push(ftotal);
            ftotal += self.geom.geoms[e].x_surf[k].len() * nf;
        }
        Workspace {
            traces,
            face_flux: vec![0.0; ftotal],
            face_off,
        }
    }

    /// Evaluate all surface-point trace values of `u`.
    pub fn compute_traces(&self, u: &[f64], traces: &mut Traces) {
        let nf = self.nfields;
        // Split the flat buffer into per-element chunks for parallel writes.
        let bounds: Vec<(usize, usize)> = (0..self.mesh.elements.len())
            .map(|e| {
                let start = traces.elem_off[e];
                let end = start + self.mesh.elements[e].shape.nedges() * traces.edge_stride[e];
                (start, end)
            })
            .collect();
        let mut chunks: Vec<&mut [f64]> = Vec::with_capacity(bounds.len());
        let mut rest = traces.vals.as_mut_slice();
        let mut cursor = 0usize;
        for &(start, end) in &bounds {
            debug_assert_eq!(start, cursor);
            let (chunk, tail) = rest.split_at_mut(end - start);
            chunks.push(chunk);
            rest = tail;
            cursor = end;
        }
        chunks.par_iter_mut().enumerate().for_each(|(e, chunk)| {
            let el = &self.mesh.elements[e];
            let re = &self.refs[&el.shape];
            let c = self.coeffs(u, e);
            let np = re.np;
            let nq = re.surf.edges[0].param.len();
            for k in 0..el.shape.nedges() {
                for q in 0..nq {
                    let phi = &re.phi_surf[k][q];
                    let out = &mut chunk[(k * nq + q) * nf..(k * nq + q + 1) * nf];
                    for f in 0..nf {
                        let mut s = 0.0;
                        for m in 0..np {
                            s += c[f * np + m] * phi[m];
                        }
                        out[f] = s;
                    }
                }
            }
        });
    }

    /// Exterior state at a boundary surface point.
    pub fn ghost_state(
        &self,
        bc: &BoundaryCondition,
        interior: &State,
        n: [f64; 2],
        x: [f64; 2],
        t: f64,
    ) -> State {
        match bc {
            BoundaryCondition::Periodic => unreachable!("periodic faces are fused"),
            BoundaryCondition::SupersonicInflow(s) | BoundaryCondition::Farfield(s) => *s,
            BoundaryCondition::OutflowExtrapolate => *interior,
            BoundaryCondition::SlipWall => {
                let mn = interior.mom[0] * n[0] + interior.mom[1] * n[1];
                State {
                    rho: interior.rho,
                    mom: [
                        interior.mom[0] - 2.0 * mn * n[0],
                        interior.mom[1] - 2.0 * mn * n[1],
                    ],
                    e: interior.e,
                }
            }
            BoundaryCondition::Prescribed(f) => f(x, t),
        }
    }

    /// Pointwise flux rows in field layout: out[f] = F[f] . n would be
    /// flux_dot_n; here we need the full tensor for the volume term.
    #[inline]
    fn flux_tensor(&self, s: &State, out: &mut [[f64; 2]; MAX_FIELDS]) {
        match &self.flux {
            FluxModel::Euler => {
                let f = euler::flux(s, &self.gas);
                if self.nd == 1 {
                    out[0] = [f[0][0], 0.0];
                    out[1] = [f[0][1], 0.0];
                    out[2] = [f[0][3], 0.0];
                } else {
                    for i in 0..4 {
                        out[i] = [f[0][i], f[1][i]];
                    }
                }
            }
            FluxModel::Advection(c) => {
                let fields = [s.rho, s.mom[0], if self.nd == 1 { s.e } else { s.mom[1] }, s.e];
                for f in 0..self.nfields {
                    out[f] = [c[0] * fields[f], c[1] * fields[f]];
                }
            }
        }
    }

    #[inline]
    fn wave_speed(&self, s: &State) -> f64 {
        match &self.flux {
            FluxModel::Euler => s.max_wave_speed(&self.gas),
            FluxModel::Advection(c) => (c[0] * c[0] + c[1] * c[1]).sqrt(),
        }
    }

    #[inline]
    fn numerical_flux(
        &self,
        ul: &State,
        ur: &State,
        n: [f64; 2],
        out: &mut [f64; MAX_FIELDS],
    ) {
        match &self.flux {
            FluxModel::Euler => {
                let lambda = self.wave_speed(ul).max(self.wave_speed(ur));
                let f = euler::lax_friedrichs_flux(ul, ur, n, lambda, &self.gas);
                if self.nd == 1 {
                    out[0] = f[0];
                    out[1] = f[1];
                    out[2] = f[3];
                } else {
                    out[..4].copy_from_slice(&f);
                }
            }
            FluxModel::Advection(c) => {
                let cn = c[0] * n[0] + c[1] * n[1];
                let fl = [ul.rho, ul.mom[0], if self.nd == 1 { ul.e } else { ul.mom[1] }, ul.e];
                let fr = [ur.rho, ur.mom[0], if self.nd == 1 { ur.e } else { ur.mom[1] }, ur.e];
                for f in 0..self.nfields {
                    out[f] = 0.5 * (cn * (fl[f] + fr[f]) - cn.abs() * (fr[f] - fl[f]));
                }
            }
        }
    }

    /// Semi-discrete right-hand side dU/dt. `ws.traces` must already hold
    /// the traces of `u` (see `compute_traces`).
    pub fn residual(&self, t: f64, u: &[f64], ws: &mut Workspace, out: &mut [f64]) {
        let nf = self.nfields;
        let nd = self.nd;

        // Interface fluxes, one buffer slot per face point (left orientation).
        let face_flux = &mut ws.face_flux;
        let face_off = &ws.face_off;
        let traces = &ws.traces;
        let face_ranges: Vec<(usize, usize)> = (0..self.mesh.faces.len())
            .map(|fi| {
                let f = &self.mesh.faces[fi];
                let nq = self.geom.geoms[f.left.0].x_surf[f.left.1].len();
                (ws.face_off[fi], ws.face_off[fi] + nq * nf)
            })
            .collect();
        let mut chunks: Vec<&mut [f64]> = Vec::with_capacity(face_ranges.len());
        let mut rest = face_flux.as_mut_slice();
        for &(start, end) in &face_ranges {
            let (chunk, tail) = rest.split_at_mut(end - start);
            let _ = start;
            chunks.push(chunk);
            rest = tail;
        }
        chunks.par_iter_mut().enumerate().for_each(|(fi, chunk)| {
            let face = &self.mesh.faces[fi];
            let (le, lk) = face.left;
            let g = &self.geom.geoms[le];
            let nq = g.x_surf[lk].len();
            let mut fhat = [0.0; MAX_FIELDS];
            for q in 0..nq {
                let n = g.normal[lk][q];
                let ul = State::from_fields(nd, traces.get(le, lk, q));
                let ur = match face.right {
                    Some((re, rk)) => State::from_fields(nd, traces.get(re, rk, face.perm[q])),
                    None => {
                        let bc = &self.bcs[face.bc_tag.unwrap()];
                        self.ghost_state(bc, &ul, n, g.x_surf[lk][q], t)
                    }
                };
                self.numerical_flux(&ul, &ur, n, &mut fhat);
                chunk[q * nf..(q + 1) * nf].copy_from_slice(&fhat[..nf]);
            }
        });

        // Volume term, surface scatter, mass solve — independent per element.
        let out_ranges: Vec<(usize, usize)> = (0..self.mesh.elements.len())
            .map(|e| (self.offsets[e], self.offsets[e] + self.np(e) * nf))
            .collect();
        let mut out_chunks: Vec<&mut [f64]> = Vec::with_capacity(out_ranges.len());
        let mut rest = &mut out[..];
        for &(start, end) in &out_ranges {
            let (chunk, tail) = rest.split_at_mut(end - start);
            let _ = start;
            out_chunks.push(chunk);
            rest = tail;
        }
        let face_flux = &*face_flux;
        out_chunks.par_iter_mut().enumerate().for_each(|(e, res)| {
            let el = &self.mesh.elements[e];
            let re = &self.refs[&el.shape];
            let g = &self.geom.geoms[e];
            let c = self.coeffs(u, e);
            let np = re.np;
            res.fill(0.0);

            // volume: sum_v w detJ (J^{-T} grad phi_m) . F(u_v)
            let mut ftens = [[0.0; 2]; MAX_FIELDS];
            for v in 0..re.vol.len() {
                let mut uv = [0.0; MAX_FIELDS];
                let phi = &re.phi_vol[v];
                for f in 0..nf {
                    let mut s = 0.0;
                    for m in 0..np {
                        s += c[f * np + m] * phi[m];
                    }
                    uv[f] = s;
                }
                let sv = State::from_fields(nd, &uv[..nf]);
                self.flux_tensor(&sv, &mut ftens);
                let w = re.vol.weights[v] * g.detj_vol[v];
                let jt = &g.jinvt_vol[v];
                for m in 0..np {
                    let gr = re.grad_vol[v][m];
                    let gx = jt[0][0] * gr[0] + jt[0][1] * gr[1];
                    let gy = jt[1][0] * gr[0] + jt[1][1] * gr[1];
                    for f in 0..nf {
                        res[f * np + m] += w * (gx * ftens[f][0] + gy * ftens[f][1]);
                    }
                }
            }

            // surface: subtract sum w |J^d| phi_m Fhat
            let nq = re.surf.edges[0].param.len();
            for k in 0..el.shape.nedges() {
                let (fid, is_left) = self.mesh.elem_faces[e][k];
                let face = &self.mesh.faces[fid];
                let base = face_off[fid];
                for q in 0..nq {
                    let w = re.surf.edges[k].weights[q] * g.jsurf[k][q];
                    let phi = &re.phi_surf[k][q];
                    let (slot, sign) = if is_left {
                        (q, 1.0)
                    } else {
                        (inv_perm(face, q), -1.0)
                    };
                    let fh = &face_flux[base + slot * nf..base + (slot + 1) * nf];
                    for f in 0..nf {
                        let contrib = sign * w * fh[f];
                        for m in 0..np {
                            res[f * np + m] -= contrib * phi[m];
                        }
                    }
                }
            }

            // mass solve
            match &self.mass[e] {
                MassMatrix::Diagonal(d) => {
                    for r in res.iter_mut() {
                        *r /= *d;
                    }
                }
                MassMatrix::DenseInverse(inv) => {
                    let mut tmp = vec![0.0; np];
                    for f in 0..nf {
                        let b = &res[f * np..(f + 1) * np];
                        for (i, ti) in tmp.iter_mut().enumerate() {
                            let mut s = 0.0;
                            for (j, bj) in b.iter().enumerate() {
                                s += inv[(i, j)] * bj;
                            }
                            *ti = s;
                        }
                        res[f * np..(f + 1) * np].copy_from_slice(&tmp);
                    }
                }
            }
        });
    }

    /// Conserved mean of each element (volume-weighted).
    pub fn element_means(&self, u: &[f64]) -> Vec<State> {
        (0..self.mesh.elements.len())
            .into_par_iter()
            .map(|e| self.element_mean(u, e))
            .collect()
    }

    pub fn element_mean(&self, u: &[f64], e: usize) -> State {
        let el = &self.mesh.elements[e];
        let re = &self.refs[&el.shape];
        let g = &self.geom.geoms[e];
        let c = self.coeffs(u, e);
        let np = re.np;
        let nf = self.nfields;
        let mut acc = [0.0; MAX_FIELDS];
        for v in 0..re.vol.len() {
            let w = re.vol.weights[v] * g.detj_vol[v];
            let phi = &re.phi_vol[v];
            for f in 0..nf {
                let mut s = 0.0;
                for m in 0..np {
                    s += c[f * np + m] * phi[m];
                }
                acc[f] += w * s;
            }
        }
        for a in acc.iter_mut() {
            *a /= g.volume;
        }
        State::from_fields(self.nd, &acc[..nf])
    }

    /// Integral of every conserved field over the domain.
    pub fn conserved_totals(&self, u: &[f64]) -> Vec<f64> {
        let nf = self.nfields;
        let mut tot = vec![0.0; nf];
        for e in 0..self.mesh.elements.len() {
            let mean = self.element_mean(u, e);
            let mut fields = [0.0; MAX_FIELDS];
            mean.write_fields(self.nd, &mut fields[..nf]);
            let v = self.geom.geoms[e].volume;
            for f in 0..nf {
                tot[f] += v * fields[f];
            }
        }
        tot
    }

    /// L2 projection of a pointwise state function onto the broken space.
    pub fn project(&self, f: impl Fn([f64; 2]) -> State + Sync) -> Vec<f64> {
        let nf = self.nfields;
        let mut u = vec![0.0; self.total_dofs];
        let ranges: Vec<(usize, usize)> = (0..self.mesh.elements.len())
            .map(|e| (self.offsets[e], self.offsets[e] + self.np(e) * nf))
            .collect();
        let mut chunks: Vec<&mut [f64]> = Vec::with_capacity(ranges.len());
        let mut rest = u.as_mut_slice();
        for &(start, end) in &ranges {
            let (chunk, tail) = rest.split_at_mut(end - start);
            let _ = start;
            chunks.push(chunk);
            rest = tail;
        }
        chunks.par_iter_mut().enumerate().for_each(|(e, c)| {
            let el = &self.mesh.elements[e];
            let re = &self.refs[&el.shape];
            let g = &self.geom.geoms[e];
            let np = re.np;
            let mut fields = [0.0; MAX_FIELDS];
            for v in 0..re.vol.len() {
                let s = f(g.x_vol[v]);
                s.write_fields(self.nd, &mut fields[..nf]);
                let w = re.vol.weights[v] * g.detj_vol[v];
                for fi in 0..nf {
                    for m in 0..np {
                        c[fi * np + m] += w * fields[fi] * re.phi_vol[v][m];
                    }
                }
            }
            match &self.mass[e] {
                MassMatrix::Diagonal(d) => {
                    for x in c.iter_mut() {
                        *x /= *d;
                    }
                }
                MassMatrix::DenseInverse(inv) => {
                    let mut tmp = vec![0.0; np];
                    for fi in 0..nf {
                        let b = &c[fi * np..(fi + 1) * np];
                        for (i, ti) in tmp.iter_mut().enumerate() {
                            let mut sum = 0.0;
                            for (j, bj) in b.iter().enumerate() {
                                sum += inv[(i, j)] * bj;
                            }
                            *ti = sum;
                        }
                        c[fi * np..(fi + 1) * np].copy_from_slice(&tmp);
                    }
                }
            }
        });
        u
    }

    /// Solution state at a reference point of an element.
    pub fn eval_state(&self, u: &[f64], e: usize, r: [f64; 2]) -> State {
        let el = &self.mesh.elements[e];
        let re = &self.refs[&el.shape];
        let phi = crate::basis::eval_basis(el.shape, self.p, r);
        let c = self.coeffs(u, e);
        let np = re.np;
        let nf = self.nfields;
        let mut fields = [0.0; MAX_FIELDS];
        for (f, fld) in fields.iter_mut().take(nf).enumerate() {
            let mut s = 0.0;
            for m in 0..np {
                s += c[f * np + m] * phi[m];
            }
            *fld = s;
        }
        State::from_fields(self.nd, &fields[..nf])
    }

    /// Values of `u` at all volume quadrature points of element `e`,
    /// written as states.
    pub fn volume_states(&self, u: &[f64], e: usize, out: &mut Vec<State>) {
        let el = &self.mesh.elements[e];
        let re = &self.refs[&el.shape];
        let c = self.coeffs(u, e);
        let np = re.np;
        let nf = self.nfields;
        out.clear();
        let mut fields = [0.0; MAX_FIELDS];
        for v in 0..re.vol.len() {
            let phi = &re.phi_vol[v];
            for (f, fld) in fields.iter_mut().take(nf).enumerate() {
                let mut s = 0.0;
                for m in 0..np {
                    s += c[f * np + m] * phi[m];
                }
                *fld = s;
            }
            out.push(State::from_fields(self.nd, &fields[..nf]));
        }
    }

    /// L2 norm of the difference to a reference state function, field-wise
    /// over density only (the convergence metric for smooth advection).
    pub fn density_l2_error(&self, u: &[f64], exact: impl Fn([f64; 2]) -> f64 + Sync) -> f64 {
        let total: f64 = (0..self.mesh.elements.len())
            .into_par_iter()
            .map(|e| {
                let el = &self.mesh.elements[e];
                let re = &self.refs[&el.shape];
                let g = &self.geom.geoms[e];
                let c = self.coeffs(u, e);
                let np = re.np;
                let mut acc = 0.0;
                for v in 0..re.vol.len() {
                    let mut rho = 0.0;
                    for m in 0..np {
                        rho += c[m] * re.phi_vol[v][m];
                    }
                    let d = rho - exact(g.x_vol[v]);
                    acc += re.vol.weights[v] * g.detj_vol[v] * d * d;
                }
                acc
            })
            .sum();
        total.sqrt()
    }
}

#[inline]
fn inv_perm(face: &crate::geometry::Face, q: usize) -> usize {
    // perm maps left index -> right index; find the left slot feeding q.
    face.perm.iter().position(|&r| r == q).expect("face perm is a bijection")
}
