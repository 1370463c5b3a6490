//! Orthonormal modal bases on the reference elements and the modal<->nodal
//! conversion machinery.
//!
//! Line/quad use (tensor) Legendre polynomials, the triangle a Dubiner-style
//! basis in collapsed coordinates; all are orthonormal under the plain
//! reference-element measure, so affine elements get diagonal mass matrices.

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureRule, Shape, SurfaceQuadratureSet};
use nalgebra::DMatrix;

/// Jacobi polynomial P_n^{(alpha,beta)} at x.
pub fn jacobi(n: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = 0.5 * ((alpha + beta + 2.0) * x + alpha - beta);
    for k in 2..=n {
        let kf = k as f64;
        let ab = alpha + beta;
        let c1 = 2.0 * kf * (kf + ab) * (2.0 * kf + ab - 2.0);
        let c2 = (2.0 * kf + ab - 1.0) * (alpha * alpha - beta * beta);
        let c3 = (2.0 * kf + ab - 1.0) * (2.0 * kf + ab) * (2.0 * kf + ab - 2.0);
        let c4 = 2.0 * (kf + alpha - 1.0) * (kf + beta - 1.0) * (2.0 * kf + ab);
        let p2 = ((c2 + c3 * x) * p1 - c4 * p0) / c1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// d/dx P_n^{(alpha,beta)}(x) = (n+alpha+beta+1)/2 * P_{n-1}^{(alpha+1,beta+1)}(x).
pub fn jacobi_derivative(n: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        0.5 * (n as f64 + alpha + beta + 1.0) * jacobi(n - 1, alpha + 1.0, beta + 1.0, x)
    }
}

/// Orthonormal Legendre on [-1,1]: sqrt((2i+1)/2) P_i.
fn legendre_on(i: usize, x: f64) -> f64 {
    ((2 * i + 1) as f64 / 2.0).sqrt() * jacobi(i, 0.0, 0.0, x)
}

fn legendre_on_deriv(i: usize, x: f64) -> f64 {
    ((2 * i + 1) as f64 / 2.0).sqrt() * jacobi_derivative(i, 0.0, 0.0, x)
}

/// Modal index pairs for the triangle: total degree d = 0..=p, within a
/// degree the a-index i runs 0..=d and the b-index is d-i.
fn tri_index_pairs(p: usize) -> Vec<(usize, usize)> {
    let mut idx = Vec::new();
    for d in 0..=p {
        for i in 0..=d {
            idx.push((i, d - i));
        }
    }
    idx
}

/// Collapsed coordinates of the unit triangle: (x,y) -> (a,b) with
/// a = 2(1+xi)/(1-eta) - 1, b = eta, where (xi,eta) = (2x-1, 2y-1).
/// At the apex b -> 1 the limit a = -1 is used.
fn tri_collapsed(r: [f64; 2]) -> (f64, f64) {
    let xi = 2.0 * r[0] - 1.0;
    let eta = 2.0 * r[1] - 1.0;
    let a = if (1.0 - eta).abs() > 1e-13 {
        2.0 * (1.0 + xi) / (1.0 - eta) - 1.0
    } else {
        -1.0
    };
    (a, eta)
}

fn tri_norm(i: usize, j: usize) -> f64 {
    (2.0 * (2 * i + 1) as f64 * (i + j + 1) as f64).sqrt()
}

/// All N_p orthonormal basis values at a reference point.
pub fn eval_basis(shape: Shape, p: usize, r: [f64; 2]) -> Vec<f64> {
    let np = shape.basis_count(p);
    let mut out = vec![0.0; np];
    match shape {
        Shape::Line => {
            for (m, o) in out.iter_mut().enumerate() {
                *o = legendre_on(m, r[0]);
            }
        }
        Shape::Quad => {
            let mut m = 0;
            for j in 0..=p {
                for i in 0..=p {
                    out[m] = legendre_on(i, r[0]) * legendre_on(j, r[1]);
                    m += 1;
                }
            }
        }
        Shape::Tri => {
            let (a, b) = tri_collapsed(r);
            for (m, &(i, j)) in tri_index_pairs(p).iter().enumerate() {
                let fa = jacobi(i, 0.0, 0.0, a);
                let gb = jacobi(j, 2.0 * i as f64 + 1.0, 0.0, b);
                let q = (0.5 * (1.0 - b)).powi(i as i32);
                out[m] = tri_norm(i, j) * fa * gb * q;
            }
        }
    }
    out
}

/// Reference-space gradients of all N_p basis functions at r.
pub fn eval_basis_grad(shape: Shape, p: usize, r: [f64; 2]) -> Vec<[f64; 2]> {
    let np = shape.basis_count(p);
    let mut out = vec![[0.0, 0.0]; np];
    match shape {
        Shape::Line => {
            for (m, o) in out.iter_mut().enumerate() {
                o[0] = legendre_on_deriv(m, r[0]);
            }
        }
        Shape::Quad => {
            let mut m = 0;
            for j in 0..=p {
                for i in 0..=p {
                    out[m] = [
                        legendre_on_deriv(i, r[0]) * legendre_on(j, r[1]),
                        legendre_on(i, r[0]) * legendre_on_deriv(j, r[1]),
                    ];
                    m += 1;
                }
            }
        }
        Shape::Tri => {
            let (a, b) = tri_collapsed(r);
            for (m, &(i, j)) in tri_index_pairs(p).iter().enumerate() {
                let al = 2.0 * i as f64 + 1.0;
                let fa = jacobi(i, 0.0, 0.0, a);
                let dfa = jacobi_derivative(i, 0.0, 0.0, a);
                let gb = jacobi(j, al, 0.0, b);
                let dgb = jacobi_derivative(j, al, 0.0, b);
                let half = 0.5 * (1.0 - b);
                // d/dxi with the (1-b)/2 power folded in; zero for i = 0.
                let qm1 = if i >= 1 {
                    half.powi(i as i32 - 1)
                } else {
                    0.0
                };
                let dpsi_dxi = dfa * gb * qm1;
                let mut dpsi_deta = fa * (dgb * half.powi(i as i32)
                    - 0.5 * i as f64 * gb * qm1);
                if i >= 1 {
                    dpsi_deta += dfa * gb * 0.5 * (1.0 + a) * qm1;
                }
                // unit triangle: xi = 2x-1, eta = 2y-1
                let n = tri_norm(i, j);
                out[m] = [2.0 * n * dpsi_dxi, 2.0 * n * dpsi_deta];
            }
        }
    }
    out
}

/// Reference element: quadrature + basis tables + the nodal conversion.
pub struct RefElement {
    pub shape: Shape,
    pub p: usize,
    pub np: usize,
    pub vol: QuadratureRule,
    pub surf: SurfaceQuadratureSet,
    /// Basis values at volume points, `phi_vol[v][m]`.
    pub phi_vol: Vec<Vec<f64>>,
    /// Reference gradients at volume points, `grad_vol[v][m]`.
    pub grad_vol: Vec<Vec<[f64; 2]>>,
    /// Basis values at surface points, `phi_surf[k][q][m]`.
    pub phi_surf: Vec<Vec<Vec<f64>>>,
    /// Reference coordinates of surface points, `surf_points[k][q]`.
    pub surf_points: Vec<Vec<[f64; 2]>>,
    /// Reference gradients at surface points, `grad_surf[k][q][m]`.
    pub grad_surf: Vec<Vec<Vec<[f64; 2]>>>,
    /// Indices into `vol.points` of the N_p interpolation points.
    pub interp_idx: Vec<usize>,
    /// Modal coefficients -> values at the interpolation points.
    pub to_points: DMatrix<f64>,
    /// Values at the interpolation points -> modal coefficients.
    pub from_points: DMatrix<f64>,
}

impl RefElement {
    pub fn new(shape: Shape, p: usize) -> Result<Self> {
        if p == 0 || p > 4 {
            return Err(Error::Internal(format!("unsupported order p={p}")));
        }
        let (vol_order, surf_order) = quadrature::standard_orders(shape, p);
        Self::with_orders(shape, p, vol_order, surf_order)
    }

    pub fn with_orders(
        shape: Shape,
        p: usize,
        vol_order: usize,
        surf_order: usize,
    ) -> Result<Self> {
        let np = shape.basis_count(p);
        let vol = quadrature::volume_rule(shape, vol_order)?;
        let surf = quadrature::surface_rules(shape, surf_order)?;

        let phi_vol: Vec<Vec<f64>> = vol
            .points
            .iter()
            .map(|&r| eval_basis(shape, p, r))
            .collect();
        let grad_vol: Vec<Vec<[f64; 2]>> = vol
            .points
            .iter()
            .map(|&r| eval_basis_grad(shape, p, r))
            .collect();

        let mut phi_surf = Vec::new();
        let mut grad_surf = Vec::new();
        let mut surf_points = Vec::new();
        for (k, edge) in surf.edges.iter().enumerate() {
            let pts: Vec<[f64; 2]> = edge.param.iter().map(|&t| shape.edge_point(k, t)).collect();
            phi_surf.push(pts.iter().map(|&r| eval_basis(shape, p, r)).collect());
            grad_surf.push(pts.iter().map(|&r| eval_basis_grad(shape, p, r)).collect());
            surf_points.push(pts);
        }

        let interp_idx = choose_interpolation_subset(np, &phi_vol)?;
        let mut v = DMatrix::zeros(np, np);
        for (row, &vi) in interp_idx.iter().enumerate() {
            for m in 0..np {
                v[(row, m)] = phi_vol[vi][m];
            }
        }
        let from_points = v.clone().try_inverse().ok_or_else(|| {
            Error::Internal("interpolation subset produced a singular Vandermonde".into())
        })?;

        Ok(RefElement {
            shape,
            p,
            np,
            vol,
            surf,
            phi_vol,
            grad_vol,
            phi_surf,
            surf_points,
            grad_surf,
            interp_idx,
            to_points: v,
            from_points,
        })
    }

    /// Values of the expansion at the interpolation points.
    pub fn to_point_values(&self, coeffs: &[f64]) -> Vec<f64> {
        (0..self.np)
            .map(|row| {
                (0..self.np)
                    .map(|m| self.to_points[(row, m)] * coeffs[m])
                    .sum()
            })
            .collect()
    }

    /// Modal coefficients from values at the interpolation points.
    pub fn from_point_values(&self, values: &[f64]) -> Vec<f64> {
        (0..self.np)
            .map(|m| {
                (0..self.np)
                    .map(|row| self.from_points[(m, row)] * values[row])
                    .sum()
            })
            .collect()
    }

    /// Evaluate an expansion at an arbitrary reference point.
    pub fn eval(&self, coeffs: &[f64], r: [f64; 2]) -> f64 {
        eval_basis(self.shape, self.p, r)
            .iter()
            .zip(coeffs)
            .map(|(phi, c)| phi * c)
            .sum()
    }
}

/// Pick N_p volume points whose Vandermonde is invertible: the first N_p by
/// rule order when well conditioned, otherwise a greedy pivoted selection.
fn choose_interpolation_subset(np: usize, phi_vol: &[Vec<f64>]) -> Result<Vec<usize>> {
    let nq = phi_vol.len();
    if nq < np {
        return Err(Error::Internal(format!(
            "volume rule has {nq} points, need at least {np}"
        )));
    }
    let first: Vec<usize> = (0..np).collect();
    if subset_well_conditioned(np, phi_vol, &first) {
        return Ok(first);
    }
    // Greedy: repeatedly take the row with the largest component orthogonal
    // to the span of the rows already taken.
    let mut chosen: Vec<usize> = Vec::with_capacity(np);
    let mut basis_rows: Vec<Vec<f64>> = Vec::with_capacity(np);
    let mut taken = vec![false; nq];
    for _ in 0..np {
        let mut best = None;
        let mut best_norm = -1.0;
        for cand in 0..nq {
            if taken[cand] {
                continue;
            }
            let mut row = phi_vol[cand].clone();
            for b in &basis_rows {
                let dot: f64 = row.iter().zip(b).map(|(a, c)| a * c).sum();
                for (ri, bi) in row.iter_mut().zip(b) {
                    *ri -= dot * bi;
                }
            }
            let norm: f64 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > best_norm {
                best_norm = norm;
                best = Some((cand, row, norm));
            }
        }
        let (cand, mut row, norm) = best.ok_or_else(|| {
            Error::Internal("interpolation subset selection exhausted points".into())
        })?;
        if norm < 1e-10 {
            return Err(Error::Internal(
                "volume quadrature points are not unisolvent for the basis".into(),
            ));
        }
        for ri in row.iter_mut() {
            *ri /= norm;
        }
        taken[cand] = true;
        chosen.push(cand);
        basis_rows.push(row);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

fn subset_well_conditioned(np: usize, phi_vol: &[Vec<f64>], idx: &[usize]) -> bool {
    let mut m = DMatrix::zeros(np, np);
    for (row, &vi) in idx.iter().enumerate() {
        for c in 0..np {
            m[(row, c)] = phi_vol[vi][c];
        }
    }
    let svd = m.svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    smin > 1e-8 * smax.max(1.0)
}
