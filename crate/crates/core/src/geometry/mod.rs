//! Meshes, geometric mappings, Jacobian/normal caches, and connectivity.
//!
//! Elements map the reference shape through x(r) = sum_m x~_m phi^g_m(r)
//! where phi^g is the modal basis of the element's geometric order; the
//! coefficients are solved from node positions at canonical node layouts
//! (Gmsh ordering). Straight and curved (up to cubic) elements share the
//! same code path.

pub mod builders;
pub mod gmsh;

use crate::basis::{self, RefElement};
use crate::error::{Error, Result};
use crate::quadrature::Shape;
use nalgebra::DMatrix;
use std::collections::HashMap;

/// A volume element: shape, geometric order, node ids, mapping coefficients.
#[derive(Clone, Debug)]
pub struct Element {
    pub shape: Shape,
    pub geo_order: usize,
    pub nodes: Vec<usize>,
    /// Modal coefficients of the mapping, one [x,y] per geometric basis mode.
    pub map_coeffs: Vec<[f64; 2]>,
}

impl Element {
    /// Physical coordinates of a reference point.
    pub fn map_point(&self, r: [f64; 2]) -> [f64; 2] {
        let phi = basis::eval_basis(self.shape, self.geo_order, r);
        let mut x = [0.0, 0.0];
        for (c, ph) in self.map_coeffs.iter().zip(&phi) {
            x[0] += c[0] * ph;
            x[1] += c[1] * ph;
        }
        x
    }

    /// Jacobian matrix dx/dr at a reference point.
    pub fn jacobian(&self, r: [f64; 2]) -> [[f64; 2]; 2] {
        let grad = basis::eval_basis_grad(self.shape, self.geo_order, r);
        let mut j = [[0.0; 2]; 2];
        for (c, g) in self.map_coeffs.iter().zip(&grad) {
            for d in 0..2 {
                j[0][d] += c[0] * g[d];
                j[1][d] += c[1] * g[d];
            }
        }
        if self.shape == Shape::Line {
            j[1][1] = 1.0; // embed the 1D map as [dx/dr, 0; 0, 1]
        }
        j
    }
}

/// Whether a face side is another element or a tagged boundary.
#[derive(Clone, Debug)]
pub struct Face {
    /// (element, local edge) owning the face.
    pub left: (usize, usize),
    /// Matching (element, local edge) for interior (incl. periodic) faces.
    pub right: Option<(usize, usize)>,
    /// Boundary tag index when `right` is None.
    pub bc_tag: Option<usize>,
    /// Right-side surface point index matched to each left point.
    pub perm: Vec<usize>,
}

/// Per-element geometric tables at the discretization's quadrature points.
#[derive(Clone, Debug)]
pub struct ElemGeom {
    /// |J| at volume points.
    pub detj_vol: Vec<f64>,
    /// J^{-T} at volume points (gradient transform).
    pub jinvt_vol: Vec<[[f64; 2]; 2]>,
    /// Physical coordinates of volume points.
    pub x_vol: Vec<[f64; 2]>,
    /// Physical coordinates of surface points, per edge.
    pub x_surf: Vec<Vec<[f64; 2]>>,
    /// Surface Jacobian |dx/dt| per edge point (1 for 1D endpoints).
    pub jsurf: Vec<Vec<f64>>,
    /// Outward unit normals per edge point.
    pub normal: Vec<Vec<[f64; 2]>>,
    /// zeta_{k,q} = |J^d_k(g_q)| w_q / V_e.
    pub zeta: Vec<Vec<f64>>,
    pub volume: f64,
    /// V_e / max effective edge length (see `characteristic_length`).
    pub l_char: f64,
    pub centroid: [f64; 2],
    /// True when J is constant over the element (diagonal mass fast path).
    pub affine: bool,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub nd: usize,
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<Element>,
    pub faces: Vec<Face>,
    /// Per element, per local edge: (face index, element is left side).
    pub elem_faces: Vec<Vec<(usize, bool)>>,
    /// Neighbor element ids sharing a face (periodic included).
    pub neighbors: Vec<Vec<usize>>,
    pub boundary_tags: Vec<String>,
}

/// Raw pre-connectivity mesh produced by readers/builders.
#[derive(Clone, Debug, Default)]
pub struct RawMesh {
    pub nodes: Vec<[f64; 2]>,
    /// (shape, geometric order, node ids in canonical layout order)
    pub elements: Vec<(Shape, usize, Vec<usize>)>,
    /// (tag name, corner node ids of the boundary face)
    pub boundary_faces: Vec<(String, Vec<usize>)>,
    /// Pairs of boundary-face corner keys to fuse as periodic interior faces.
    pub periodic_pairs: Vec<(Vec<usize>, Vec<usize>)>,
}

/// Canonical reference coordinates of the node layout for (shape, order),
/// matching Gmsh element-node ordering.
pub fn node_layout(shape: Shape, g: usize) -> Result<Vec<[f64; 2]>> {
    let bad = || Error::Mesh(format!("unsupported geometric order {g} for {shape:?}"));
    Ok(match (shape, g) {
        (Shape::Line, 1) => vec![[-1.0, 0.0], [1.0, 0.0]],
        (Shape::Line, 2) => vec![[-1.0, 0.0], [1.0, 0.0], [0.0, 0.0]],
        (Shape::Line, 3) => vec![
            [-1.0, 0.0],
            [1.0, 0.0],
            [-1.0 / 3.0, 0.0],
            [1.0 / 3.0, 0.0],
        ],
        (Shape::Tri, 1) => vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        (Shape::Tri, 2) => vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [0.0, 1.0],
            [0.5, 0.0],
            [0.5, 0.5],
            [0.0, 0.5],
        ],
        (Shape::Tri, 3) => {
            let t = 1.0 / 3.0;
            vec![
                [0.0, 0.0],
                [1.0, 0.0],
                [0.0, 1.0],
                [t, 0.0],
                [2.0 * t, 0.0],
                [2.0 * t, t],
                [t, 2.0 * t],
                [0.0, 2.0 * t],
                [0.0, t],
                [t, t],
            ]
        }
        (Shape::Quad, 1) => vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]],
        // 9-node quad: vertices, edge midpoints, center.
        (Shape::Quad, 2) => vec![
            [-1.0, -1.0],
            [1.0, -1.0],
            [1.0, 1.0],
            [-1.0, 1.0],
            [0.0, -1.0],
            [1.0, 0.0],
            [0.0, 1.0],
            [-1.0, 0.0],
            [0.0, 0.0],
        ],
        (Shape::Quad, 3) => {
            let t = 1.0 / 3.0;
            vec![
                [-1.0, -1.0],
                [1.0, -1.0],
                [1.0, 1.0],
                [-1.0, 1.0],
                [-t, -1.0],
                [t, -1.0],
                [1.0, -t],
                [1.0, t],
                [t, 1.0],
                [-t, 1.0],
                [-1.0, t],
                [-1.0, -t],
                [-t, -t],
                [t, -t],
                [t, t],
                [-t, t],
            ]
        }
        _ => return Err(bad()),
    })
}

/// Solve mapping coefficients from node positions for one element.
fn solve_map_coeffs(
    shape: Shape,
    g: usize,
    layout: &[[f64; 2]],
    coords: &[[f64; 2]],
) -> Result<Vec<[f64; 2]>> {
    let np = shape.basis_count(g);
    if layout.len() != np || coords.len() != np {
        return Err(Error::Mesh(format!(
            "node layout mismatch for {shape:?} order {g}: {} nodes, basis {np}",
            coords.len()
        )));
    }
    let mut v = DMatrix::zeros(np, np);
    for (n, &r) in layout.iter().enumerate() {
        let phi = basis::eval_basis(shape, g, r);
        for m in 0..np {
            v[(n, m)] = phi[m];
        }
    }
    let lu = v.lu();
    let mut rhs = DMatrix::zeros(np, 2);
    for (n, &x) in coords.iter().enumerate() {
        rhs[(n, 0)] = x[0];
        rhs[(n, 1)] = x[1];
    }
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Mesh("singular geometric Vandermonde".into()))?;
    Ok((0..np).map(|m| [sol[(m, 0)], sol[(m, 1)]]).collect())
}

/// Sorted corner node ids identifying local edge k (a single node in 1D).
fn corner_key(shape: Shape, nodes: &[usize], k: usize) -> Vec<usize> {
    let (a, b) = shape.edge_vertices(k);
    let mut key = if shape == Shape::Line {
        vec![nodes[a]]
    } else {
        vec![nodes[a], nodes[b]]
    };
    key.sort_unstable();
    key
}

impl Mesh {
    /// Build connectivity and mapping coefficients from a raw mesh.
    pub fn finalize(raw: RawMesh) -> Result<Mesh> {
        if raw.elements.is_empty() {
            return Err(Error::Mesh("mesh has no volume elements".into()));
        }
        let nd = raw.elements[0].0.ndim();
        if raw.elements.iter().any(|e| e.0.ndim() != nd) {
            return Err(Error::Mesh("mixed 1D/2D elements".into()));
        }

        let mut elements = Vec::with_capacity(raw.elements.len());
        for (ei, (shape, g, node_ids)) in raw.elements.iter().enumerate() {
            let layout = node_layout(*shape, *g)?;
            let coords: Vec<[f64; 2]> = node_ids.iter().map(|&n| raw.nodes[n]).collect();
            let map_coeffs = solve_map_coeffs(*shape, *g, &layout, &coords)
                .map_err(|e| Error::Mesh(format!("element {ei}: {e}")))?;
            elements.push(Element {
                shape: *shape,
                geo_order: *g,
                nodes: node_ids.clone(),
                map_coeffs,
            });
        }

        // Invertibility: |J| > 0 sampled on a probe rule.
        for (ei, el) in elements.iter().enumerate() {
            let probe = crate::quadrature::volume_rule(el.shape, 2 * el.geo_order + 1)?;
            for &r in &probe.points {
                let j = el.jacobian(r);
                let det = if el.shape == Shape::Line {
                    j[0][0]
                } else {
                    j[0][0] * j[1][1] - j[0][1] * j[1][0]
                };
                if det <= 0.0 {
                    return Err(Error::Mesh(format!(
                        "inverted element {ei}: |J| = {det:.3e} at r = {r:?}"
                    )));
                }
            }
        }

        // Face matching by sorted corner node ids.
        let mut face_map: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
        for (ei, el) in elements.iter().enumerate() {
            for k in 0..el.shape.nedges() {
                face_map
                    .entry(corner_key(el.shape, &el.nodes, k))
                    .or_default()
                    .push((ei, k));
            }
        }

        let mut boundary_tags: Vec<String> = Vec::new();
        let tag_of = |name: &str, tags: &mut Vec<String>| -> usize {
            if let Some(i) = tags.iter().position(|t| t == name) {
                i
            } else {
                tags.push(name.to_string());
                tags.len() - 1
            }
        };
        let mut bc_by_key: HashMap<Vec<usize>, usize> = HashMap::new();
        for (name, corners) in &raw.boundary_faces {
            let mut key = corners.clone();
            key.sort_unstable();
            let tag = tag_of(name, &mut boundary_tags);
            bc_by_key.insert(key, tag);
        }

        // Periodic fusion: map each paired key to its partner.
        let mut periodic_partner: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for (a, b) in &raw.periodic_pairs {
            let (mut ka, mut kb) = (a.clone(), b.clone());
            ka.sort_unstable();
            kb.sort_unstable();
            periodic_partner.insert(ka.clone(), kb.clone());
            periodic_partner.insert(kb, ka);
        }

        let mut faces: Vec<Face> = Vec::new();
        let mut elem_faces: Vec<Vec<(usize, bool)>> =
            elements.iter().map(|e| vec![(usize::MAX, false); e.shape.nedges()]).collect();
        let mut visited: HashMap<Vec<usize>, ()> = HashMap::new();

        let keys: Vec<Vec<usize>> = face_map.keys().cloned().collect();
        let mut sorted_keys = keys;
        sorted_keys.sort_unstable();
        for key in &sorted_keys {
            if visited.contains_key(key) {
                continue;
            }
            let sides = &face_map[key];
            match sides.len() {
                2 => {
                    let (l, r) = (sides[0], sides[1]);
                    visited.insert(key.clone(), ());
                    let fid = faces.len();
                    faces.push(Face {
                        left: l,
                        right: Some(r),
                        bc_tag: None,
                        perm: Vec::new(),
                    });
                    elem_faces[l.0][l.1] = (fid, true);
                    elem_faces[r.0][r.1] = (fid, false);
                }
                1 => {
                    let l = sides[0];
                    if let Some(pkey) = periodic_partner.get(key) {
                        if visited.contains_key(pkey) {
                            continue; // handled from the partner side
                        }
                        let other = face_map.get(pkey).ok_or_else(|| {
                            Error::Mesh("periodic partner face not found".into())
                        })?;
                        if other.len() != 1 {
                            return Err(Error::Mesh(
                                "periodic partner is not a boundary face".into(),
                            ));
                        }
                        let r = other[0];
                        visited.insert(key.clone(), ());
                        visited.insert(pkey.clone(), ());
                        let fid = faces.len();
                        faces.push(Face {
                            left: l,
                            right: Some(r),
                            bc_tag: None,
                            perm: Vec::new(),
                        });
                        elem_faces[l.0][l.1] = (fid, true);
                        elem_faces[r.0][r.1] = (fid, false);
                    } else {
                        let tag = bc_by_key.get(key).copied().unwrap_or_else(|| {
                            tag_of("boundary", &mut boundary_tags)
                        });
                        visited.insert(key.clone(), ());
                        let fid = faces.len();
                        faces.push(Face {
                            left: l,
                            right: None,
                            bc_tag: Some(tag),
                            perm: Vec::new(),
                        });
                        elem_faces[l.0][l.1] = (fid, true);
                    }
                }
                n => {
                    return Err(Error::Mesh(format!(
                        "face shared by {n} elements (non-conforming mesh)"
                    )))
                }
            }
        }

        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); elements.len()];
        for f in &faces {
            if let Some(r) = f.right {
                neighbors[f.left.0].push(r.0);
                neighbors[r.0].push(f.left.0);
            }
        }
        for n in neighbors.iter_mut() {
            n.sort_unstable();
            n.dedup();
        }

        Ok(Mesh {
            nd,
            nodes: raw.nodes,
            elements,
            faces,
            elem_faces,
            neighbors,
            boundary_tags,
        })
    }

    pub fn tag_index(&self, name: &str) -> Option<usize> {
        self.boundary_tags.iter().position(|t| t == name)
    }
}

/// Geometric tables for every element at a discretization's quadrature
/// points, plus face point matching.
pub struct GeometryCache {
    pub geoms: Vec<ElemGeom>,
}

impl GeometryCache {
    pub fn build(mesh: &mut Mesh, refs: &HashMap<Shape, RefElement>) -> Result<GeometryCache> {
        let mut geoms = Vec::with_capacity(mesh.elements.len());
        for (ei, el) in mesh.elements.iter().enumerate() {
            let re = refs
                .get(&el.shape)
                .ok_or_else(|| Error::Internal(format!("no reference element for {:?}", el.shape)))?;
            geoms.push(build_elem_geom(ei, el, re)?);
        }

        // Face point matching: right-side index for each left point, with an
        // optional translation for periodic pairs.
        let faces_snapshot: Vec<Face> = mesh.faces.clone();
        for (fi, f) in faces_snapshot.iter().enumerate() {
            let (le, lk) = f.left;
            let lx = &geoms[le].x_surf[lk];
            let perm = match f.right {
                None => (0..lx.len()).collect::<Vec<_>>(),
                Some((re_, rk)) => {
                    let rx = &geoms[re_].x_surf[rk];
                    if rx.len() != lx.len() {
                        return Err(Error::Mesh(format!(
                            "face {fi}: point count mismatch {} vs {}",
                            lx.len(),
                            rx.len()
                        )));
                    }
                    // Translation between face centroids (zero for conforming
                    // interior faces, the period for periodic pairs).
                    let n = lx.len() as f64;
                    let mut shift = [0.0, 0.0];
                    for (l, r) in lx.iter().zip(rx.iter()) {
                        shift[0] += (r[0] - l[0]) / n;
                        shift[1] += (r[1] - l[1]) / n;
                    }
                    let scale = geoms[le].l_char.max(geoms[re_].l_char).max(1e-30);
                    let mut perm = vec![usize::MAX; lx.len()];
                    let mut used = vec![false; lx.len()];
                    for (qi, l) in lx.iter().enumerate() {
                        let target = [l[0] + shift[0], l[1] + shift[1]];
                        let mut best = (f64::INFINITY, usize::MAX);
                        for (qj, r) in rx.iter().enumerate() {
                            if used[qj] {
                                continue;
                            }
                            let d = ((r[0] - target[0]).powi(2) + (r[1] - target[1]).powi(2))
                                .sqrt();
                            if d < best.0 {
                                best = (d, qj);
                            }
                        }
                        if best.0 > 1e-8 * scale {
                            return Err(Error::Mesh(format!(
                                "face {fi}: surface points do not match (gap {:.3e})",
                                best.0
                            )));
                        }
                        used[best.1] = true;
                        perm[qi] = best.1;
                    }
                    perm
                }
            };
            mesh.faces[fi].perm = perm;
        }

        Ok(GeometryCache { geoms })
    }
}

fn build_elem_geom(ei: usize, el: &Element, re: &RefElement) -> Result<ElemGeom> {
    let is_line = el.shape == Shape::Line;
    let nv = re.vol.len();
    let mut detj_vol = Vec::with_capacity(nv);
    let mut jinvt_vol = Vec::with_capacity(nv);
    let mut x_vol = Vec::with_capacity(nv);
    let mut j_samples: Vec<[[f64; 2]; 2]> = Vec::with_capacity(nv);

    for &r in &re.vol.points {
        let j = el.jacobian(r);
        let det = if is_line {
            j[0][0]
        } else {
            j[0][0] * j[1][1] - j[0][1] * j[1][0]
        };
        if det <= 0.0 {
            return Err(Error::Mesh(format!(
                "element {ei}: non-positive |J| = {det:.3e}"
            )));
        }
        let jinvt = if is_line {
            [[1.0 / j[0][0], 0.0], [0.0, 1.0]]
        } else {
            // inverse-transpose of [[a,b],[c,d]] is 1/det [[d,-c],[-b,a]]
            [
                [j[1][1] / det, -j[1][0] / det],
                [-j[0][1] / det, j[0][0] / det],
            ]
        };
        detj_vol.push(det);
        jinvt_vol.push(jinvt);
        x_vol.push(el.map_point(r));
        j_samples.push(j);
    }

    let volume: f64 = detj_vol
        .iter()
        .zip(&re.vol.weights)
        .map(|(d, w)| d * w)
        .sum();

    let jscale = j_samples[0]
        .iter()
        .flatten()
        .fold(0.0f64, |a, &b| a.max(b.abs()));
    let affine = j_samples.iter().all(|j| {
        (0..2).all(|r| (0..2).all(|c| (j[r][c] - j_samples[0][r][c]).abs() <= 1e-12 * jscale.max(1.0)))
    });

    let mut x_surf = Vec::new();
    let mut jsurf = Vec::new();
    let mut normal = Vec::new();
    let mut zeta = Vec::new();
    let centroid = {
        // quadrature centroid: sum w |J| x / V
        let mut c = [0.0, 0.0];
        for ((x, d), w) in x_vol.iter().zip(&detj_vol).zip(&re.vol.weights) {
            c[0] += x[0] * d * w;
            c[1] += x[1] * d * w;
        }
        [c[0] / volume, c[1] / volume]
    };

    let mut max_edge_len = 0.0f64;
    for (k, edge) in re.surf.edges.iter().enumerate() {
        let mut xk = Vec::with_capacity(edge.param.len());
        let mut jk = Vec::with_capacity(edge.param.len());
        let mut nk = Vec::with_capacity(edge.param.len());
        let mut zk = Vec::with_capacity(edge.param.len());
        let pmeasure = el.shape.edge_param_measure(k);
        for (q, (&t, &w)) in edge.param.iter().zip(&edge.weights).enumerate() {
            let r = el.shape.edge_point(k, t);
            let x = el.map_point(r);
            if is_line {
                let n = el.shape.edge_normal(k);
                xk.push(x);
                jk.push(1.0);
                nk.push(n);
                zk.push(w / volume);
                max_edge_len = max_edge_len.max(1.0);
                continue;
            }
            // tangent dx/dt = J * dr/dt with dr/dt the reference edge direction
            let dr = ref_edge_direction(el.shape, k);
            let j = el.jacobian(r);
            let tx = j[0][0] * dr[0] + j[0][1] * dr[1];
            let ty = j[1][0] * dr[0] + j[1][1] * dr[1];
            let jd = (tx * tx + ty * ty).sqrt();
            if jd < 1e-14 {
                return Err(Error::Mesh(format!(
                    "element {ei}: degenerate edge {k} (|J^d| = {jd:.3e})"
                )));
            }
            // CCW elements: outward normal is the tangent rotated by -90 deg.
            let n = [ty / jd, -tx / jd];
            let out = (x[0] - centroid[0]) * n[0] + (x[1] - centroid[1]) * n[1];
            if out < 0.0 && q == edge.param.len() / 2 {
                return Err(Error::Mesh(format!(
                    "element {ei}: inward normal on edge {k} (orientation error)"
                )));
            }
            xk.push(x);
            jk.push(jd);
            nk.push(n);
            zk.push(jd * w / volume);
            max_edge_len = max_edge_len.max(pmeasure * jd);
        }
        x_surf.push(xk);
        jsurf.push(jk);
        normal.push(nk);
        zeta.push(zk);
    }

    let l_char = volume / max_edge_len;

    Ok(ElemGeom {
        detj_vol,
        jinvt_vol,
        x_vol,
        x_surf,
        jsurf,
        normal,
        zeta,
        volume,
        l_char,
        centroid,
        affine,
    })
}

/// Direction of d(edge point)/dt in reference coordinates.
fn ref_edge_direction(shape: Shape, k: usize) -> [f64; 2] {
    match shape {
        Shape::Line => [0.0, 0.0],
        Shape::Quad => [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]][k],
        Shape::Tri => {
            let (a, b) = shape.edge_vertices(k);
            let (va, vb) = (shape.vertices()[a], shape.vertices()[b]);
            [vb[0] - va[0], vb[1] - va[1]]
        }
    }
}
