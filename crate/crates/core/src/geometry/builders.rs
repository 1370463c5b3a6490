//! Programmatic mesh construction: 1D intervals, mapped quad/tri grids,
//! and the curved fixtures used by the 2D cases.

use super::{Mesh, RawMesh};
use crate::error::Result;
use crate::quadrature::Shape;

/// Uniform 1D interval mesh with `n` elements; ends tagged "left"/"right",
/// or fused periodically.
pub fn interval_mesh(x0: f64, x1: f64, n: usize, periodic: bool) -> Result<Mesh> {
    assert!(n >= 1 && x1 > x0);
    let mut raw = RawMesh::default();
    for i in 0..=n {
        let x = x0 + (x1 - x0) * i as f64 / n as f64;
        raw.nodes.push([x, 0.0]);
    }
    for i in 0..n {
        raw.elements.push((Shape::Line, 1, vec![i, i + 1]));
    }
    raw.boundary_faces.push(("left".into(), vec![0]));
    raw.boundary_faces.push(("right".into(), vec![n]));
    if periodic {
        raw.periodic_pairs.push((vec![0], vec![n]));
    }
    Mesh::finalize(raw)
}

/// Side of the logical rectangle a boundary face lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RectSide {
    Bottom,
    Right,
    Top,
    Left,
}

/// Grid of quads over the logical unit square, pushed through `map`.
pub struct GridSpec {
    pub nu: usize,
    pub nv: usize,
    /// Geometric order of the elements (1..=3).
    pub geo_order: usize,
    /// Share the u = 0 and u = 1 node columns (coincident coordinates).
    pub wrap_u: bool,
    /// Fuse opposite sides as translation-periodic pairs.
    pub periodic_u: bool,
    pub periodic_v: bool,
    /// Split each quad into two straight triangles (requires geo_order 1).
    pub split_tris: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nu: 1,
            nv: 1,
            geo_order: 1,
            wrap_u: false,
            periodic_u: false,
            periodic_v: false,
            split_tris: false,
        }
    }
}

/// Build a mapped structured grid. `map` takes logical (u,v) in [0,1]^2;
/// `tag` names each boundary face from its side and physical centroid.
pub fn mapped_grid(
    spec: &GridSpec,
    map: impl Fn(f64, f64) -> [f64; 2],
    tag: impl Fn(RectSide, [f64; 2]) -> String,
) -> Result<Mesh> {
    let g = spec.geo_order;
    assert!((1..=3).contains(&g), "geometric order 1..=3");
    assert!(!(spec.split_tris && g != 1), "triangles must be straight");
    assert!(!(spec.wrap_u && spec.periodic_u), "wrap_u already joins the seam");
    let (nu, nv) = (spec.nu, spec.nv);
    let cols = g * nu; // lattice intervals along u
    let rows = g * nv;
    let ncols = if spec.wrap_u { cols } else { cols + 1 };

    let mut raw = RawMesh::default();
    let node_id = |iu: usize, iv: usize| -> usize {
        let iu = if spec.wrap_u { iu % cols } else { iu };
        iv * ncols + iu
    };
    for iv in 0..=rows {
        for iu in 0..ncols {
            let u = iu as f64 / cols as f64;
            let v = iv as f64 / rows as f64;
            raw.nodes.push(map(u, v));
        }
    }

    let layout = super::node_layout(Shape::Quad, g)?;
    for ev in 0..nv {
        for eu in 0..nu {
            if spec.split_tris {
                let n00 = node_id(eu, ev);
                let n10 = node_id(eu + 1, ev);
                let n11 = node_id(eu + 1, ev + 1);
                let n01 = node_id(eu, ev + 1);
                raw.elements.push((Shape::Tri, 1, vec![n00, n10, n11]));
                raw.elements.push((Shape::Tri, 1, vec![n00, n11, n01]));
            } else {
                let mut ids = Vec::with_capacity(layout.len());
                for &[xi, eta] in &layout {
                    let di = ((xi + 1.0) / 2.0 * g as f64).round() as usize;
                    let dj = ((eta + 1.0) / 2.0 * g as f64).round() as usize;
                    ids.push(node_id(g * eu + di, g * ev + dj));
                }
                raw.elements.push((Shape::Quad, g, ids));
            }
        }
    }

    // Boundary faces on the four logical sides (u seam skipped when wrapped).
    let mut side_face = |side: RectSide, a: usize, b: usize| {
        let ca = raw.nodes[a];
        let cb = raw.nodes[b];
        let c = [(ca[0] + cb[0]) / 2.0, (ca[1] + cb[1]) / 2.0];
        raw.boundary_faces.push((tag(side, c), vec![a, b]));
    };
    for eu in 0..nu {
        side_face(RectSide::Bottom, node_id(g * eu, 0), node_id(g * (eu + 1), 0));
        side_face(
            RectSide::Top,
            node_id(g * eu, rows),
            node_id(g * (eu + 1), rows),
        );
    }
    if !spec.wrap_u {
        for ev in 0..nv {
            side_face(RectSide::Left, node_id(0, g * ev), node_id(0, g * (ev + 1)));
            side_face(
                RectSide::Right,
                node_id(cols, g * ev),
                node_id(cols, g * (ev + 1)),
            );
        }
    }
    if spec.periodic_u {
        for ev in 0..nv {
            raw.periodic_pairs.push((
                vec![node_id(0, g * ev), node_id(0, g * (ev + 1))],
                vec![node_id(cols, g * ev), node_id(cols, g * (ev + 1))],
            ));
        }
    }
    if spec.periodic_v {
        for eu in 0..nu {
            raw.periodic_pairs.push((
                vec![node_id(g * eu, 0), node_id(g * (eu + 1), 0)],
                vec![node_id(g * eu, rows), node_id(g * (eu + 1), rows)],
            ));
        }
    }

    Mesh::finalize(raw)
}

/// Axis-aligned rectangle of straight quads (or split triangles).
#[allow(clippy::too_many_arguments)]
pub fn rect_mesh(
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    nx: usize,
    ny: usize,
    split_tris: bool,
    tag: impl Fn(RectSide, [f64; 2]) -> String,
) -> Result<Mesh> {
    let spec = GridSpec {
        nu: nx,
        nv: ny,
        split_tris,
        ..Default::default()
    };
    mapped_grid(
        &spec,
        |u, v| [x0 + (x1 - x0) * u, y0 + (y1 - y0) * v],
        tag,
    )
}

/// [0,4]x[0,1] quad mesh for the double Mach reflection problem.
/// Bottom is "bottom_post" ahead of x0 = 1/6 and "wall" after it; the other
/// sides are "inflow" (left), "outflow" (right), "top".
pub fn dmr_mesh(h: f64) -> Result<Mesh> {
    let nx = (4.0 / h).round() as usize;
    let ny = (1.0 / h).round() as usize;
    rect_mesh(0.0, 0.0, 4.0, 1.0, nx, ny, false, |side, c| {
        match side {
            RectSide::Bottom => {
                if c[0] < 1.0 / 6.0 {
                    "bottom_post".into()
                } else {
                    "wall".into()
                }
            }
            RectSide::Left => "inflow".into(),
            RectSide::Right => "outflow".into(),
            RectSide::Top => "top".into(),
        }
    })
}

/// Annular O-mesh of cubic curved quads around a cylinder of radius
/// `radii[0]`; `radii` lists the element-boundary radii outward. Inner
/// boundary tagged "cylinder", outer "farfield"; closed in the angular
/// direction.
pub fn cylinder_mesh(radii: &[f64], n_theta: usize) -> Result<Mesh> {
    assert!(radii.len() >= 2 && n_theta >= 3);
    let n_r = radii.len() - 1;
    let radii = radii.to_vec();
    let spec = GridSpec {
        nu: n_theta,
        nv: n_r,
        geo_order: 3,
        wrap_u: true,
        ..Default::default()
    };
    mapped_grid(
        &spec,
        move |u, v| {
            // piecewise-linear radial distribution through the given radii
            let s = v * n_r as f64;
            let k = (s.floor() as usize).min(n_r - 1);
            let f = s - k as f64;
            let r = radii[k] * (1.0 - f) + radii[k + 1] * f;
            // clockwise in u so the (u=angular, v=radial) chart stays right-handed
            let th = -2.0 * std::f64::consts::PI * u;
            [r * th.cos(), r * th.sin()]
        },
        |side, _| match side {
            RectSide::Bottom => "cylinder".into(),
            RectSide::Top => "farfield".into(),
            _ => "seam".into(),
        },
    )
}

/// Geometric radial distribution from r_in to r_out with `n` elements.
pub fn geometric_radii(r_in: f64, r_out: f64, n: usize) -> Vec<f64> {
    let ratio = (r_out / r_in).powf(1.0 / n as f64);
    (0..=n).map(|k| r_in * ratio.powi(k as i32)).collect()
}

/// Unit square of cubic curved quads: interior smoothly warped, boundary
/// exactly straight. All boundary faces tagged "farfield".
pub fn curved_fixture_mesh(n: usize, amp: f64) -> Result<Mesh> {
    let spec = GridSpec {
        nu: n,
        nv: n,
        geo_order: 3,
        ..Default::default()
    };
    let s = std::f64::consts::PI * 2.0;
    mapped_grid(
        &spec,
        move |u, v| {
            [
                u + amp * (s * u).sin() * (s * v).sin(),
                v - amp * (s * v).sin() * (s * u).sin(),
            ]
        },
        |_, _| "farfield".into(),
    )
}
