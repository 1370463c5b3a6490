use ebdg_core::basis::RefElement;
use ebdg_core::geometry::builders::{
    curved_fixture_mesh, cylinder_mesh, dmr_mesh, geometric_radii, interval_mesh, rect_mesh,
    RectSide,
};
use ebdg_core::geometry::gmsh::parse_gmsh;
use ebdg_core::geometry::{node_layout, GeometryCache, Mesh};
use ebdg_core::quadrature::Shape;
use std::collections::HashMap;

fn build_cache(mesh: &mut Mesh, p: usize) -> GeometryCache {
    let mut refs = HashMap::new();
    for el in &mesh.elements {
        refs.entry(el.shape)
            .or_insert_with(|| RefElement::new(el.shape, p).unwrap());
    }
    GeometryCache::build(mesh, &refs).unwrap()
}

#[test]
fn interval_mesh_connectivity() {
    let open = interval_mesh(0.0, 1.0, 4, false).unwrap();
    assert_eq!(open.nd, 1);
    assert_eq!(open.elements.len(), 4);
    assert_eq!(open.faces.len(), 5);
    let nbound = open.faces.iter().filter(|f| f.right.is_none()).count();
    assert_eq!(nbound, 2);

    let per = interval_mesh(0.0, 1.0, 4, true).unwrap();
    assert_eq!(per.faces.len(), 4);
    assert!(per.faces.iter().all(|f| f.right.is_some()));
    // wrap-around neighborhood: each element touches two others
    assert!(per.neighbors.iter().all(|n| n.len() == 2));
    assert!(per.neighbors[0].contains(&3) && per.neighbors[0].contains(&1));
}

#[test]
fn rect_mesh_connectivity_and_tags() {
    let mut mesh = rect_mesh(0.0, 0.0, 2.0, 1.0, 2, 2, false, |side, _| {
        format!("{side:?}").to_lowercase()
    })
    .unwrap();
    assert_eq!(mesh.nd, 2);
    assert_eq!(mesh.elements.len(), 4);
    // 2x2 grid: 4 interior faces + 8 boundary faces
    assert_eq!(mesh.faces.len(), 12);
    assert_eq!(mesh.faces.iter().filter(|f| f.right.is_none()).count(), 8);
    for name in ["bottom", "right", "top", "left"] {
        assert!(mesh.tag_index(name).is_some(), "missing tag {name}");
    }

    let cache = build_cache(&mut mesh, 2);
    for g in &cache.geoms {
        assert!((g.volume - 0.5).abs() < 1e-14);
        assert!((g.l_char - 0.5).abs() < 1e-14); // V/max edge = 0.5/1.0
        assert!(g.affine);
    }
}

#[test]
fn split_triangles_cover_the_rectangle() {
    let mut mesh = rect_mesh(0.0, 0.0, 1.0, 1.0, 2, 2, true, |_, _| "b".into()).unwrap();
    assert_eq!(mesh.elements.len(), 8);
    assert!(mesh.elements.iter().all(|e| e.shape == Shape::Tri));
    let cache = build_cache(&mut mesh, 2);
    let total: f64 = cache.geoms.iter().map(|g| g.volume).sum();
    assert!((total - 1.0).abs() < 1e-13);
}

#[test]
fn dmr_mesh_tags() {
    let mesh = dmr_mesh(1.0 / 6.0).unwrap();
    assert_eq!(mesh.elements.len(), 24 * 6);
    for name in ["inflow", "outflow", "top", "wall", "bottom_post"] {
        assert!(mesh.tag_index(name).is_some(), "missing tag {name}");
    }
}

#[test]
fn closed_element_surfaces_have_zero_normal_sum() {
    // sum_k sum_q w_q |J_surf| n = integral of n over the element boundary,
    // which vanishes for any closed surface, curved included
    let mut meshes = vec![
        rect_mesh(0.0, 0.0, 1.0, 1.0, 3, 2, true, |_, _| "b".into()).unwrap(),
        cylinder_mesh(&geometric_radii(1.0, 20.0, 4), 16).unwrap(),
        curved_fixture_mesh(3, 0.04).unwrap(),
    ];
    for mesh in &mut meshes {
        let cache = build_cache(mesh, 3);
        let mut refs = HashMap::new();
        for el in &mesh.elements {
            refs.entry(el.shape)
                .or_insert_with(|| RefElement::new(el.shape, 3).unwrap());
        }
        for (e, g) in cache.geoms.iter().enumerate() {
            let re = &refs[&mesh.elements[e].shape];
            let mut sum = [0.0f64; 2];
            for (k, edge) in re.surf.edges.iter().enumerate() {
                for (q, &w) in edge.weights.iter().enumerate() {
                    sum[0] += w * g.jsurf[k][q] * g.normal[k][q][0];
                    sum[1] += w * g.jsurf[k][q] * g.normal[k][q][1];
                }
            }
            let scale = g.volume / g.l_char; // ~ perimeter scale
            assert!(
                sum[0].abs() < 1e-12 * scale && sum[1].abs() < 1e-12 * scale,
                "element {e}: boundary normal sum {sum:?}"
            );
        }
    }
}

#[test]
fn cylinder_mesh_geometry() {
    let radii = geometric_radii(1.0, 20.0, 4);
    assert_eq!(radii.len(), 5);
    assert!((radii[0] - 1.0).abs() < 1e-15 && (radii[4] - 20.0).abs() < 1e-12);
    // geometric progression: constant ratio
    let r = radii[1] / radii[0];
    for k in 1..4 {
        assert!((radii[k + 1] / radii[k] - r).abs() < 1e-12);
    }

    let mut mesh = cylinder_mesh(&radii, 16).unwrap();
    assert_eq!(mesh.elements.len(), 64);
    assert!(mesh.tag_index("cylinder").is_some());
    assert!(mesh.tag_index("farfield").is_some());
    // angular direction is fused: no "seam" boundary faces survive
    assert_eq!(
        mesh.faces.iter().filter(|f| f.right.is_none()).count(),
        2 * 16
    );

    let cache = build_cache(&mut mesh, 3);
    let total: f64 = cache.geoms.iter().map(|g| g.volume).sum();
    let annulus = std::f64::consts::PI * (400.0 - 1.0);
    assert!(
        (total - annulus).abs() / annulus < 2e-3,
        "cubic boundary representation should track the annulus area: {total} vs {annulus}"
    );
    // all inner-boundary faces sit on the unit circle to cubic accuracy
    for face in mesh.faces.iter().filter(|f| f.right.is_none()) {
        if mesh.boundary_tags[face.bc_tag.unwrap()] != "cylinder" {
            continue;
        }
        let (e, k) = face.left;
        for x in &cache.geoms[e].x_surf[k] {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            assert!((r - 1.0).abs() < 2e-4, "cylinder face point at radius {r}");
        }
    }
}

#[test]
fn gmsh_quad_mesh_round_trip() {
    // two unit quads side by side, all four sides named
    let text = r#"$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
5
1 1 "bottom"
1 2 "right"
1 3 "top"
1 4 "left"
2 10 "fluid"
$EndPhysicalNames
$Nodes
6
1 0 0 0
2 1 0 0
3 2 0 0
4 0 1 0
5 1 1 0
6 2 1 0
$EndNodes
$Elements
8
1 1 2 1 1 1 2
2 1 2 1 1 2 3
3 1 2 2 2 3 6
4 1 2 3 3 6 5
5 1 2 3 3 5 4
6 1 2 4 4 4 1
7 3 2 10 1 1 2 5 4
8 3 2 10 1 2 3 6 5
$EndElements
"#;
    let raw = parse_gmsh(text).unwrap();
    let mut mesh = Mesh::finalize(raw).unwrap();
    assert_eq!(mesh.nd, 2);
    assert_eq!(mesh.elements.len(), 2);
    assert_eq!(mesh.faces.len(), 7);
    assert_eq!(mesh.faces.iter().filter(|f| f.right.is_some()).count(), 1);
    for name in ["bottom", "right", "top", "left"] {
        assert!(mesh.tag_index(name).is_some());
    }
    let cache = build_cache(&mut mesh, 2);
    assert!((cache.geoms[0].volume - 1.0).abs() < 1e-14);
    assert!((cache.geoms[1].volume - 1.0).abs() < 1e-14);
}

#[test]
fn gmsh_one_dimensional_mesh() {
    let text = r#"$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
3
0 1 "left"
0 2 "right"
1 10 "domain"
$EndPhysicalNames
$Nodes
4
1 0 0 0
2 0.25 0 0
3 0.625 0 0
4 1 0 0
$EndNodes
$Elements
5
1 15 2 1 1 1
2 15 2 2 2 4
3 1 2 10 1 1 2
4 1 2 10 1 2 3
5 1 2 10 1 3 4
$EndElements
"#;
    let mut mesh = Mesh::finalize(parse_gmsh(text).unwrap()).unwrap();
    assert_eq!(mesh.nd, 1);
    assert_eq!(mesh.elements.len(), 3);
    assert_eq!(mesh.faces.len(), 4);
    assert!(mesh.tag_index("left").is_some() && mesh.tag_index("right").is_some());
    let cache = build_cache(&mut mesh, 2);
    let total: f64 = cache.geoms.iter().map(|g| g.volume).sum();
    assert!((total - 1.0).abs() < 1e-14);
    // nonuniform spacing: characteristic length equals the element width
    assert!((cache.geoms[0].l_char - 0.25).abs() < 1e-14);
    assert!((cache.geoms[1].l_char - 0.375).abs() < 1e-14);
}

#[test]
fn gmsh_curved_quad9() {
    // one quadratic quad with bulged edge midpoints (type 10; corner,
    // midside, center ordering)
    let text = r#"$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
1 1 "wall"
2 10 "fluid"
$EndPhysicalNames
$Nodes
9
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
5 0.5 -0.08 0
6 1.08 0.5 0
7 0.5 1.08 0
8 -0.08 0.5 0
9 0.5 0.5 0
$EndNodes
$Elements
5
1 8 2 1 1 1 2 5
2 8 2 1 1 2 3 6
3 8 2 1 1 3 4 7
4 8 2 1 1 4 1 8
5 10 2 10 1 1 2 3 4 5 6 7 8 9
$EndElements
"#;
    let mut mesh = Mesh::finalize(parse_gmsh(text).unwrap()).unwrap();
    assert_eq!(mesh.elements.len(), 1);
    let el = &mesh.elements[0];
    assert_eq!(el.geo_order, 2);
    // the quadratic map interpolates the bulged midside node
    let mid = el.map_point([0.0, -1.0]);
    assert!((mid[0] - 0.5).abs() < 1e-13 && (mid[1] + 0.08).abs() < 1e-13);
    let center = el.map_point([0.0, 0.0]);
    assert!((center[0] - 0.5).abs() < 1e-13 && (center[1] - 0.5).abs() < 1e-13);

    let cache = build_cache(&mut mesh, 2);
    assert!(!cache.geoms[0].affine);
    assert!(cache.geoms[0].detj_vol.iter().all(|&d| d > 0.0));
}

#[test]
fn gmsh_rejects_malformed_input() {
    let bad_version = "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n";
    let err = parse_gmsh(bad_version).unwrap_err().to_string();
    assert!(err.contains("4.1"), "{err}");

    let binary = "$MeshFormat\n2.2 1 8\n$EndMeshFormat\n";
    let err = parse_gmsh(binary).unwrap_err().to_string();
    assert!(err.to_lowercase().contains("binary"), "{err}");

    let no_format = "$Nodes\n0\n$EndNodes\n";
    assert!(parse_gmsh(no_format).is_err());

    let unknown_type = r#"$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
1
1 0 0 0
$EndNodes
$Elements
1
1 7 2 1 1 1 1 1 1 1
$EndElements
"#;
    let err = parse_gmsh(unknown_type).unwrap_err().to_string();
    assert!(err.contains("7"), "{err}");

    let wrong_count = r#"$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
3
1 0 0 0
2 1 0 0
3 0 1 0
$EndNodes
$Elements
1
1 2 2 1 1 1 2
$EndElements
"#;
    let err = parse_gmsh(wrong_count).unwrap_err().to_string();
    assert!(err.contains("3 nodes"), "{err}");
}

#[test]
fn inverted_element_is_rejected() {
    // clockwise quad -> negative Jacobian
    let text = r#"$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
1
1 3 2 1 1 1 4 3 2
$EndElements
"#;
    let raw = parse_gmsh(text).unwrap();
    let err = match Mesh::finalize(raw) {
        Err(e) => e.to_string(),
        Ok(mut mesh) => {
            // not caught at finalize: the geometry pass must reject it
            let mut refs = HashMap::new();
            refs.insert(Shape::Quad, RefElement::new(Shape::Quad, 2).unwrap());
            match GeometryCache::build(&mut mesh, &refs) {
                Err(e) => e.to_string(),
                Ok(_) => panic!("clockwise quad was accepted"),
            }
        }
    };
    assert!(err.contains("inverted"), "{err}");
}

#[test]
fn node_layouts_are_canonical() {
    let q2 = node_layout(Shape::Quad, 2).unwrap();
    assert_eq!(q2.len(), 9);
    assert_eq!(q2[0], [-1.0, -1.0]);
    assert_eq!(q2[4], [0.0, -1.0]); // first midside follows the corners
    assert_eq!(q2[8], [0.0, 0.0]); // center last

    let t3 = node_layout(Shape::Tri, 3).unwrap();
    assert_eq!(t3.len(), 10);
    assert_eq!(t3[9], [1.0 / 3.0, 1.0 / 3.0]); // interior node last

    assert!(node_layout(Shape::Quad, 5).is_err());
}

#[test]
fn rect_side_tagging_sees_face_centers() {
    let mesh = rect_mesh(0.0, 0.0, 1.0, 1.0, 2, 1, false, |side, c| {
        // every bottom face center must have y=0, etc.
        match side {
            RectSide::Bottom => assert!(c[1].abs() < 1e-15),
            RectSide::Top => assert!((c[1] - 1.0).abs() < 1e-15),
            RectSide::Left => assert!(c[0].abs() < 1e-15),
            RectSide::Right => assert!((c[0] - 1.0).abs() < 1e-15),
        }
        "b".into()
    })
    .unwrap();
    assert_eq!(mesh.elements.len(), 2);
}
