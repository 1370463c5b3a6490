use ebdg_core::quadrature::{
    gauss_legendre, standard_orders, surface_rules, volume_rule, Shape,
};

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[test]
fn gauss_legendre_small_rules_match_closed_forms() {
    let (x1, w1) = gauss_legendre(1).unwrap();
    assert!((x1[0]).abs() < 1e-15 && (w1[0] - 2.0).abs() < 1e-15);

    let (x2, w2) = gauss_legendre(2).unwrap();
    let r = 1.0 / 3f64.sqrt();
    assert!((x2[0] + r).abs() < 1e-15 && (x2[1] - r).abs() < 1e-15);
    assert!((w2[0] - 1.0).abs() < 1e-15 && (w2[1] - 1.0).abs() < 1e-15);

    let (x3, w3) = gauss_legendre(3).unwrap();
    let r3 = (3.0f64 / 5.0).sqrt();
    assert!((x3[0] + r3).abs() < 1e-14 && x3[1].abs() < 1e-15 && (x3[2] - r3).abs() < 1e-14);
    assert!((w3[0] - 5.0 / 9.0).abs() < 1e-14 && (w3[1] - 8.0 / 9.0).abs() < 1e-14);
}

#[test]
fn gauss_legendre_degree_exactness() {
    // n points integrate monomials of degree <= 2n-1 on [-1,1] exactly
    for n in 1..=8 {
        let (x, w) = gauss_legendre(n).unwrap();
        assert!(w.iter().all(|&wi| wi > 0.0));
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for d in 0..=(2 * n - 1) {
            let num: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(d as i32)).sum();
            let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
            assert!(
                (num - exact).abs() < 1e-13,
                "n={n} degree {d}: {num} vs {exact}"
            );
        }
        // and the first even degree beyond must NOT integrate exactly
        let d = 2 * n;
        let num: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(d as i32)).sum();
        assert!((num - 2.0 / (d as f64 + 1.0)).abs() > 1e-10, "n={n} claims too much");
    }
}

#[test]
fn volume_rules_integrate_monomials() {
    // reference domains: line [-1,1], quad [-1,1]^2, unit right triangle
    // {(x,y): x,y >= 0, x+y <= 1}; exact triangle moments are a! b! / (a+b+2)!
    for shape in [Shape::Line, Shape::Quad, Shape::Tri] {
        for order in 1..=9 {
            let rule = match volume_rule(shape, order) {
                Ok(r) => r,
                Err(_) => continue, // order beyond the shipped tables
            };
            assert!(rule.weights.iter().all(|&w| w > 0.0), "{shape:?} order {order}");
            assert!(rule.exact_degree >= order);
            let vol: f64 = rule.weights.iter().sum();
            assert!((vol - shape.ref_volume()).abs() < 1e-13);

            for a in 0..=rule.exact_degree {
                for b in 0..=(rule.exact_degree - a) {
                    if shape == Shape::Line && b > 0 {
                        continue;
                    }
                    let num = rule.integrate(|r| r[0].powi(a as i32) * r[1].powi(b as i32));
                    let exact = match shape {
                        Shape::Line => {
                            if a % 2 == 1 {
                                0.0
                            } else {
                                2.0 / (a as f64 + 1.0)
                            }
                        }
                        Shape::Quad => {
                            if a % 2 == 1 || b % 2 == 1 {
                                0.0
                            } else {
                                4.0 / ((a as f64 + 1.0) * (b as f64 + 1.0))
                            }
                        }
                        Shape::Tri => factorial(a) * factorial(b) / factorial(a + b + 2),
                    };
                    assert!(
                        (num - exact).abs() < 2e-13,
                        "{shape:?} order {order} x^{a} y^{b}: {num} vs {exact}"
                    );
                }
            }
        }
    }
}

#[test]
fn surface_rules_cover_every_edge() {
    // edge parameter domains: quad [-1,1] (measure 2), tri [0,1] (measure 1)
    for shape in [Shape::Quad, Shape::Tri] {
        let set = surface_rules(shape, 5).unwrap();
        assert_eq!(set.edges.len(), shape.nedges());
        for (k, edge) in set.edges.iter().enumerate() {
            assert!(edge.weights.iter().all(|&w| w > 0.0));
            let measure = shape.edge_param_measure(k);
            assert!((edge.weights.iter().sum::<f64>() - measure).abs() < 1e-14);
            for d in 0..=edge.exact_degree {
                let num: f64 = edge
                    .param
                    .iter()
                    .zip(&edge.weights)
                    .map(|(&t, &w)| w * t.powi(d as i32))
                    .sum();
                let exact = match shape {
                    Shape::Quad => {
                        if d % 2 == 1 {
                            0.0
                        } else {
                            2.0 / (d as f64 + 1.0)
                        }
                    }
                    _ => 1.0 / (d as f64 + 1.0),
                };
                assert!(
                    (num - exact).abs() < 1e-13,
                    "{shape:?} edge {k} t^{d}: {num} vs {exact}"
                );
            }
        }
    }
    // a line's "surface" is its two endpoints with unit weight
    let line = surface_rules(Shape::Line, 3).unwrap();
    for edge in &line.edges {
        assert_eq!(edge.param.len(), 1);
        assert!((edge.weights[0] - 1.0).abs() < 1e-15);
    }
}

#[test]
fn edge_geometry_tables_are_consistent() {
    for shape in [Shape::Quad, Shape::Tri] {
        let verts = shape.vertices();
        let (t0, t1, tmid) = if shape == Shape::Quad {
            (-1.0, 1.0, 0.0)
        } else {
            (0.0, 1.0, 0.5)
        };
        for k in 0..shape.nedges() {
            let (a, b) = shape.edge_vertices(k);
            let pa = shape.edge_point(k, t0);
            let pb = shape.edge_point(k, t1);
            assert!((pa[0] - verts[a][0]).abs() < 1e-15 && (pa[1] - verts[a][1]).abs() < 1e-15);
            assert!((pb[0] - verts[b][0]).abs() < 1e-15 && (pb[1] - verts[b][1]).abs() < 1e-15);

            // outward normal is orthogonal to the edge direction and unit length
            let n = shape.edge_normal(k);
            let d = [verts[b][0] - verts[a][0], verts[b][1] - verts[a][1]];
            assert!((n[0] * d[0] + n[1] * d[1]).abs() < 1e-14);
            assert!((n[0] * n[0] + n[1] * n[1] - 1.0).abs() < 1e-14);

            // and points away from the centroid
            let c = match shape {
                Shape::Quad => [0.0, 0.0],
                Shape::Tri => [1.0 / 3.0, 1.0 / 3.0],
                Shape::Line => unreachable!(),
            };
            let mid = shape.edge_point(k, tmid);
            assert!((mid[0] - c[0]) * n[0] + (mid[1] - c[1]) * n[1] > 0.0);
        }
    }
}

#[test]
fn standard_orders_resolve_the_basis() {
    for shape in [Shape::Line, Shape::Quad, Shape::Tri] {
        for p in 1..=4 {
            let (vol, surf) = standard_orders(shape, p);
            // products of two basis functions must be integrated exactly
            assert!(vol >= 2 * p, "{shape:?} p={p}");
            assert!(surf >= 2 * p);
            let rule = volume_rule(shape, vol).unwrap();
            assert!(rule.len() >= shape.basis_count(p));
        }
    }
}
