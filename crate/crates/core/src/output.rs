//! Artifact writers: legacy VTK ASCII (unstructured grid with per-element
//! sub-cell lattices) and CSV summaries printed with 17 significant digits.

use crate::cases::ConvergenceRow;
use crate::cfl::CflTable;
use crate::dg::Discretization;
use crate::driver::StepRecord;
use crate::error::{Error, Result};
use crate::quadrature::Shape;
use std::fmt::Write as _;
use std::path::Path;

/// Round-trip-exact float formatting (17 significant digits).
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(path, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Sub-cell plotting lattice on the reference element: points and the
/// sub-cells (with a VTK cell type) connecting them. Resolution grows with p.
fn plot_lattice(shape: Shape, p: usize) -> (Vec<[f64; 2]>, Vec<Vec<usize>>, u8) {
    let n = p + 1;
    let coord = |k: usize| -> f64 { -1.0 + 2.0 * k as f64 / n as f64 };
    match shape {
        Shape::Line => {
            let pts = (0..=n).map(|k| [coord(k), 0.0]).collect();
            let cells = (0..n).map(|k| vec![k, k + 1]).collect();
            (pts, cells, 3) // VTK_LINE
        }
        Shape::Quad => {
            let mut pts = Vec::with_capacity((n + 1) * (n + 1));
            for j in 0..=n {
                for i in 0..=n {
                    pts.push([coord(i), coord(j)]);
                }
            }
            let id = |i: usize, j: usize| j * (n + 1) + i;
            let mut cells = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..n {
                    cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
                }
            }
            (pts, cells, 9) // VTK_QUAD
        }
        Shape::Tri => {
            let mut pts = Vec::new();
            let mut index = vec![vec![usize::MAX; n + 1]; n + 1];
            for j in 0..=n {
                for i in 0..=(n - j) {
                    index[i][j] = pts.len();
                    pts.push([coord(i), coord(j)]);
                }
            }
            let mut cells = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..(n - j) {
                    cells.push(vec![index[i][j], index[i + 1][j], index[i][j + 1]]);
                    if i + j + 2 <= n {
                        cells.push(vec![
                            index[i + 1][j],
                            index[i + 1][j + 1],
                            index[i][j + 1],
                        ]);
                    }
                }
            }
            (pts, cells, 5) // VTK_TRIANGLE
        }
    }
}

fn safe_ln(x: f64) -> f64 {
    x.max(1e-300).ln()
}

/// Write the solution as a legacy ASCII VTK unstructured grid. Each element
/// contributes its own sub-cell lattice (fields stay discontinuous across
/// element boundaries). Cell data carries element-mean quantities plus the
/// limiter scaling and the entropy bound; point data carries sampled fields.
pub fn write_vtk(
    path: &Path,
    disc: &Discretization,
    u: &[f64],
    s_bound: &[f64],
    eps: &[f64],
) -> Result<()> {
    let gas = disc.gas;
    let nelem = disc.mesh.elements.len();
    let mut npts = 0usize;
    let mut ncells = 0usize;
    let mut nconn = 0usize;
    let mut lattices = std::collections::HashMap::new();
    for el in &disc.mesh.elements {
        let lat = lattices
            .entry(el.shape)
            .or_insert_with(|| plot_lattice(el.shape, disc.p));
        npts += lat.0.len();
        ncells += lat.1.len();
        nconn += lat.1.iter().map(|c| c.len() + 1).sum::<usize>();
    }

    let mut out = String::with_capacity(64 * npts);
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("ebdg solution\n");
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");

    // Points: per-element lattice mapped to physical space.
    let _ = writeln!(out, "POINTS {npts} double");
    let mut base = Vec::with_capacity(nelem);
    let mut acc = 0usize;
    for (e, el) in disc.mesh.elements.iter().enumerate() {
        base.push(acc);
        let (pts, _, _) = &lattices[&el.shape];
        for &r in pts {
            let x = el.map_point(r);
            let _ = writeln!(out, "{} {} 0", fmt17(x[0]), fmt17(x[1]));
        }
        acc += pts.len();
        let _ = e;
    }

    let _ = writeln!(out, "CELLS {ncells} {nconn}");
    for (e, el) in disc.mesh.elements.iter().enumerate() {
        let (_, cells, _) = &lattices[&el.shape];
        for c in cells {
            let _ = write!(out, "{}", c.len());
            for &i in c {
                let _ = write!(out, " {}", base[e] + i);
            }
            out.push('\n');
        }
    }
    let _ = writeln!(out, "CELL_TYPES {ncells}");
    for el in &disc.mesh.elements {
        let (_, cells, vtk_type) = &lattices[&el.shape];
        for _ in cells {
            let _ = writeln!(out, "{vtk_type}");
        }
    }

    // Cell data: one value per sub-cell, repeated from the parent element.
    let means: Vec<_> = (0..nelem).map(|e| disc.element_mean(u, e)).collect();
    let per_cell = |out: &mut String, name: &str, f: &dyn Fn(usize) -> f64| {
        let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for (e, el) in disc.mesh.elements.iter().enumerate() {
            let v = f(e);
            let line = format!("{}\n", fmt17(v));
            for _ in 0..lattices[&el.shape].1.len() {
                out.push_str(&line);
            }
        }
    };
    let _ = writeln!(out, "CELL_DATA {ncells}");
    per_cell(&mut out, "rho_mean", &|e| means[e].rho);
    per_cell(&mut out, "u_mean", &|e| means[e].velocity()[0]);
    per_cell(&mut out, "v_mean", &|e| means[e].velocity()[1]);
    per_cell(&mut out, "p_mean", &|e| means[e].pressure(&gas));
    per_cell(&mut out, "mach_mean", &|e| {
        let v = means[e].velocity();
        (v[0] * v[0] + v[1] * v[1]).sqrt()
            / (gas.gamma * means[e].pressure(&gas).max(1e-300) / means[e].rho.max(1e-300)).sqrt()
    });
    per_cell(&mut out, "s_mean", &|e| {
        safe_ln(means[e].pressure(&gas)) - gas.gamma * safe_ln(means[e].rho) + gas.s_ref
    });
    per_cell(&mut out, "eps", &|e| eps.get(e).copied().unwrap_or(0.0));
    per_cell(&mut out, "s_bound", &|e| {
        let b = s_bound.get(e).copied().unwrap_or(f64::NEG_INFINITY);
        if b.is_finite() {
            b
        } else {
            -1e30 // VTK readers choke on "-inf"
        }
    });

    // Point data: fields sampled on the lattice.
    let _ = writeln!(out, "POINT_DATA {npts}");
    let mut samples = Vec::with_capacity(npts);
    for (e, el) in disc.mesh.elements.iter().enumerate() {
        let (pts, _, _) = &lattices[&el.shape];
        for &r in pts {
            samples.push(disc.eval_state(u, e, r));
        }
    }
    let per_point = |out: &mut String, name: &str, f: &dyn Fn(&crate::euler::State) -> f64| {
        let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for s in &samples {
            let _ = writeln!(out, "{}", fmt17(f(s)));
        }
    };
    per_point(&mut out, "rho", &|s| s.rho);
    per_point(&mut out, "u", &|s| s.velocity()[0]);
    per_point(&mut out, "v", &|s| s.velocity()[1]);
    per_point(&mut out, "p", &|s| s.pressure(&gas));
    per_point(&mut out, "mach", &|s| {
        let v = s.velocity();
        (v[0] * v[0] + v[1] * v[1]).sqrt()
            / (gas.gamma * s.pressure(&gas).max(1e-300) / s.rho.max(1e-300)).sqrt()
    });
    per_point(&mut out, "s", &|s| {
        safe_ln(s.pressure(&gas)) - gas.gamma * safe_ln(s.rho) + gas.s_ref
    });

    write_text(path, &out)
}

/// Step-history CSV: time, conserved totals, entropy diagnostics, limiter
/// activity.
pub fn write_history_csv(path: &Path, nd: usize, history: &[StepRecord]) -> Result<()> {
    let mut out = String::new();
    let mom = if nd == 2 {
        "momentum_x,momentum_y"
    } else {
        "momentum_x"
    };
    let _ = writeln!(
        out,
        "step,time,dt,mass,{mom},energy,min_entropy,mean_bound_margin,eps_active,eps_max"
    );
    for r in history {
        let totals: Vec<String> = r.totals.iter().map(|&v| fmt17(v)).collect();
        let margin = if r.mean_bound_margin.is_finite() {
            fmt17(r.mean_bound_margin)
        } else {
            "".into()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.step,
            fmt17(r.t),
            fmt17(r.dt),
            totals.join(","),
            fmt17(r.min_entropy),
            margin,
            r.eps_active,
            fmt17(r.eps_max)
        );
    }
    write_text(path, &out)
}

/// CFL-table CSV: shape, p, CFL^EB.
pub fn write_cfl_csv(path: &Path, table: &CflTable) -> Result<()> {
    write_text(path, &cfl_csv_text(table))
}

pub fn cfl_csv_text(table: &CflTable) -> String {
    let mut out = String::from("shape,p,cfl_eb\n");
    for (shape, p, value) in table.rows() {
        let name = match shape {
            Shape::Line => "line",
            Shape::Quad => "quad",
            Shape::Tri => "triangle",
        };
        let _ = writeln!(out, "{name},{p},{}", fmt17(value));
    }
    out
}

/// Convergence-study CSV: order, h, error, observed rate.
pub fn write_convergence_csv(path: &Path, sections: &[(usize, Vec<ConvergenceRow>)]) -> Result<()> {
    write_text(path, &convergence_csv_text(sections))
}

pub fn convergence_csv_text(sections: &[(usize, Vec<ConvergenceRow>)]) -> String {
    let mut out = String::from("p,h,l2_error,rate\n");
    for (p, rows) in sections {
        for r in rows {
            let rate = r.rate.map(fmt17).unwrap_or_default();
            let _ = writeln!(out, "{p},{},{},{rate}", fmt17(r.h), fmt17(r.error));
        }
    }
    out
}
