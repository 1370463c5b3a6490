//! Gmsh MSH 2.2 ASCII reader.
//!
//! Supported element types: lines (2/3/4-node), triangles (3/6/10-node),
//! quads (4/9/16-node), points. In a 2D mesh, line elements become tagged
//! boundary faces; in a 1D mesh, line elements are the volume elements and
//! points become boundary faces. Physical names tag the boundaries.

use super::{Mesh, RawMesh};
use crate::error::{Error, Result};
use crate::quadrature::Shape;
use std::collections::HashMap;
use std::path::Path;

struct RawElem {
    etype: u32,
    phys: i64,
    nodes: Vec<usize>, // mesh node indices (already remapped)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::GmshParse {
        line,
        msg: msg.into(),
    }
}

/// (shape, geometric order, node count) for a volume-capable element type.
fn type_info(etype: u32) -> Option<(Shape, usize, usize)> {
    match etype {
        1 => Some((Shape::Line, 1, 2)),
        8 => Some((Shape::Line, 2, 3)),
        26 => Some((Shape::Line, 3, 4)),
        2 => Some((Shape::Tri, 1, 3)),
        9 => Some((Shape::Tri, 2, 6)),
        21 => Some((Shape::Tri, 3, 10)),
        3 => Some((Shape::Quad, 1, 4)),
        10 => Some((Shape::Quad, 2, 9)),
        36 => Some((Shape::Quad, 3, 16)),
        _ => None,
    }
}

pub fn load_gmsh(path: &Path) -> Result<RawMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gmsh(&text)
}

/// Parse MSH 2.2 text into a raw mesh.
pub fn parse_gmsh(text: &str) -> Result<RawMesh> {
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0usize;
    let mut node_index: HashMap<u64, usize> = HashMap::new();
    let mut nodes: Vec<[f64; 2]> = Vec::new();
    let mut phys_names: HashMap<i64, String> = HashMap::new();
    let mut elems: Vec<RawElem> = Vec::new();
    let mut format_seen = false;

    while i < lines.len() {
        let line = lines[i].trim();
        match line {
            "$MeshFormat" => {
                let l = lines
                    .get(i + 1)
                    .ok_or_else(|| parse_err(i + 2, "truncated $MeshFormat"))?
                    .trim();
                let mut it = l.split_whitespace();
                let ver = it.next().unwrap_or("");
                let ftype = it.next().unwrap_or("");
                if !ver.starts_with("2.2") {
                    return Err(parse_err(i + 2, format!("unsupported MSH version {ver} (need 2.2)")));
                }
                if ftype != "0" {
                    return Err(parse_err(i + 2, "binary MSH not supported"));
                }
                format_seen = true;
                i = skip_section(&lines, i, "$EndMeshFormat")?;
            }
            "$PhysicalNames" => {
                let n: usize = lines
                    .get(i + 1)
                    .and_then(|l| l.trim().parse().ok())
                    .ok_or_else(|| parse_err(i + 2, "bad $PhysicalNames count"))?;
                for k in 0..n {
                    let l = lines
                        .get(i + 2 + k)
                        .ok_or_else(|| parse_err(i + 3 + k, "truncated $PhysicalNames"))?
                        .trim();
                    let mut it = l.splitn(3, ' ');
                    let _dim: i32 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| parse_err(i + 3 + k, "bad physical name dim"))?;
                    let id: i64 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| parse_err(i + 3 + k, "bad physical name id"))?;
                    let name = it
                        .next()
                        .map(|s| s.trim().trim_matches('"').to_string())
                        .ok_or_else(|| parse_err(i + 3 + k, "missing physical name"))?;
                    phys_names.insert(id, name);
                }
                i = skip_section(&lines, i, "$EndPhysicalNames")?;
            }
            "$Nodes" => {
                let n: usize = lines
                    .get(i + 1)
                    .and_then(|l| l.trim().parse().ok())
                    .ok_or_else(|| parse_err(i + 2, "bad $Nodes count"))?;
                for k in 0..n {
                    let l = lines
                        .get(i + 2 + k)
                        .ok_or_else(|| parse_err(i + 3 + k, "truncated $Nodes"))?
                        .trim();
                    let mut it = l.split_whitespace();
                    let id: u64 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| parse_err(i + 3 + k, "bad node id"))?;
                    let x: f64 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| parse_err(i + 3 + k, "bad node x"))?;
                    let y: f64 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| parse_err(i + 3 + k, "bad node y"))?;
                    node_index.insert(id, nodes.len());
                    nodes.push([x, y]);
                }
                i = skip_section(&lines, i, "$EndNodes")?;
            }
            "$Elements" => {
                let n: usize = lines
                    .get(i + 1)
                    .and_then(|l| l.trim().parse().ok())
                    .ok_or_else(|| parse_err(i + 2, "bad $Elements count"))?;
                for k in 0..n {
                    let lineno = i + 3 + k;
                    let l = lines
                        .get(i + 2 + k)
                        .ok_or_else(|| parse_err(lineno, "truncated $Elements"))?
                        .trim();
                    let fields: Vec<&str> = l.split_whitespace().collect();
                    if fields.len() < 3 {
                        return Err(parse_err(lineno, "short element record"));
                    }
                    let etype: u32 = fields[1]
                        .parse()
                        .map_err(|_| parse_err(lineno, "bad element type"))?;
                    let ntags: usize = fields[2]
                        .parse()
                        .map_err(|_| parse_err(lineno, "bad tag count"))?;
                    let phys: i64 = if ntags >= 1 {
                        fields
                            .get(3)
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| parse_err(lineno, "bad physical tag"))?
                    } else {
                        0
                    };
                    let node_fields = &fields[3 + ntags..];
                    if etype == 15 {
                        let ids = remap(node_fields, &node_index, lineno)?;
                        elems.push(RawElem { etype, phys, nodes: ids });
                        continue;
                    }
                    let (_, _, want) = type_info(etype).ok_or_else(|| {
                        parse_err(lineno, format!("unsupported element type {etype}"))
                    })?;
                    if node_fields.len() != want {
                        return Err(parse_err(
                            lineno,
                            format!("type {etype} expects {want} nodes, got {}", node_fields.len()),
                        ));
                    }
                    let ids = remap(node_fields, &node_index, lineno)?;
                    elems.push(RawElem { etype, phys, nodes: ids });
                }
                i = skip_section(&lines, i, "$EndElements")?;
            }
            s if s.starts_with('$') && !s.starts_with("$End") => {
                let end = format!("$End{}", &s[1..]);
                i = skip_section(&lines, i, &end)?;
            }
            _ => i += 1,
        }
    }

    if !format_seen {
        return Err(parse_err(1, "missing $MeshFormat section"));
    }
    if nodes.is_empty() {
        return Err(parse_err(1, "missing $Nodes section"));
    }

    // 2D if any triangle/quad exists, else 1D.
    let any_2d = elems.iter().any(|e| {
        matches!(type_info(e.etype), Some((Shape::Tri | Shape::Quad, _, _)))
    });

    let tag_name = |phys: i64| -> String {
        phys_names
            .get(&phys)
            .cloned()
            .unwrap_or_else(|| format!("tag{phys}"))
    };

    let mut raw = RawMesh {
        nodes,
        ..Default::default()
    };
    for e in &elems {
        match (type_info(e.etype), any_2d) {
            (Some((Shape::Line, g, _)), false) => {
                raw.elements.push((Shape::Line, g, e.nodes.clone()));
            }
            (Some((Shape::Line, _, _)), true) => {
                // boundary face keyed by its two corner nodes
                raw.boundary_faces
                    .push((tag_name(e.phys), vec![e.nodes[0], e.nodes[1]]));
            }
            (Some((shape, g, _)), true) => {
                raw.elements.push((shape, g, e.nodes.clone()));
            }
            (Some(_), false) => {
                return Err(Error::Mesh(
                    "2D element in a mesh classified as 1D".into(),
                ));
            }
            (None, _) if e.etype == 15 => {
                if !any_2d {
                    raw.boundary_faces
                        .push((tag_name(e.phys), vec![e.nodes[0]]));
                }
            }
            (None, _) => unreachable!("filtered during parse"),
        }
    }

    if raw.elements.is_empty() {
        return Err(Error::Mesh("mesh contains no volume elements".into()));
    }
    Ok(raw)
}

/// Load and finalize a mesh from an MSH 2.2 file.
pub fn load_mesh(path: &Path) -> Result<Mesh> {
    Mesh::finalize(load_gmsh(path)?)
}

fn remap(
    fields: &[&str],
    index: &HashMap<u64, usize>,
    lineno: usize,
) -> Result<Vec<usize>> {
    fields
        .iter()
        .map(|s| {
            let id: u64 = s
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad node ref {s}")))?;
            index
                .get(&id)
                .copied()
                .ok_or_else(|| parse_err(lineno, format!("unknown node id {id}")))
        })
        .collect()
}

fn skip_section(lines: &[&str], start: usize, end: &str) -> Result<usize> {
    for (j, l) in lines.iter().enumerate().skip(start + 1) {
        if l.trim() == end {
            return Ok(j + 1);
        }
    }
    Err(parse_err(start + 1, format!("missing {end}")))
}
