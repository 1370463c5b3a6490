use ebdg_core::basis::RefElement;
use ebdg_core::cfl::{
    optimize_cfl_eb, optimize_cfl_element, unit_zeta, CflTable, StepController,
};
use ebdg_core::dg::{BoundaryCondition, Discretization, FluxModel};
use ebdg_core::euler::{GasModel, Primitive, State};
use ebdg_core::geometry::builders::rect_mesh;
use ebdg_core::quadrature::Shape;
use std::collections::HashMap;

/// Entropy-bounded CFL numbers, frozen from an independent run of the
/// convex decomposition at bisection tolerance 1e-10.
const REFERENCE: &[(Shape, usize, f64)] = &[
    (Shape::Line, 1, 0.5),
    (Shape::Line, 2, 0.166666666666667),
    (Shape::Line, 3, 0.123102131254305),
    (Shape::Line, 4, 0.072776671089013),
    (Shape::Quad, 1, 0.25),
    (Shape::Quad, 2, 0.083333333333333),
    (Shape::Quad, 3, 0.061551065627153),
    (Shape::Quad, 4, 0.036388335544506),
    (Shape::Tri, 1, 0.135143491857733),
    (Shape::Tri, 2, 0.066933293063149),
    (Shape::Tri, 3, 0.058928797072783),
    (Shape::Tri, 4, 0.034517893701762),
];

#[test]
fn reference_bounds_match_frozen_values() {
    let table = CflTable::compute(
        &[Shape::Line, Shape::Quad, Shape::Tri],
        &[1, 2, 3, 4],
    )
    .unwrap();
    println!("{:>8} {:>3} {:>18} {:>18}", "shape", "p", "computed", "frozen");
    for &(shape, p, want) in REFERENCE {
        let got = table.get(shape, p).unwrap();
        println!("{shape:>8?} {p:>3} {got:>18.12} {want:>18.12}");
        assert!(
            (got - want).abs() < 2e-6,
            "{shape:?} p={p}: {got} vs {want}"
        );
    }
}

#[test]
fn quad_bounds_are_half_the_line_bounds() {
    // tensor-product structure: the square's decomposition is the line's in
    // each direction, halving the admissible surface fraction
    for p in 1..=4 {
        let (tl, _) = optimize_cfl_eb(Shape::Line, p).unwrap();
        let (tq, _) = optimize_cfl_eb(Shape::Quad, p).unwrap();
        assert!(
            (tq - 0.5 * tl).abs() < 1e-9,
            "p={p}: quad {tq} vs line/2 {}",
            0.5 * tl
        );
    }
}

#[test]
fn bounds_decrease_with_order() {
    for shape in [Shape::Line, Shape::Quad, Shape::Tri] {
        let mut prev = f64::INFINITY;
        for p in 1..=4 {
            let (t, _) = optimize_cfl_eb(shape, p).unwrap();
            assert!(t > 0.0 && t < prev, "{shape:?} p={p}: {t} !< {prev}");
            prev = t;
        }
    }
}

#[test]
fn first_order_bounds_saturate_the_surface_partition() {
    // p = 1 on line and quad reaches the absolute ceiling 1 / sum(zeta)
    for shape in [Shape::Line, Shape::Quad] {
        let re = RefElement::new(shape, 1).unwrap();
        let mut zsum = 0.0;
        for (k, edge) in re.surf.edges.iter().enumerate() {
            for &w in &edge.weights {
                zsum += unit_zeta(shape, k, w);
            }
        }
        let (t, _) = optimize_cfl_eb(shape, 1).unwrap();
        assert!((t - 1.0 / zsum).abs() < 1e-9, "{shape:?}: {t} vs {}", 1.0 / zsum);
    }
}

#[test]
fn decomposition_certificate_is_independently_verifiable() {
    for (shape, p) in [(Shape::Line, 3), (Shape::Quad, 2), (Shape::Tri, 3)] {
        let re = RefElement::new(shape, p).unwrap();
        let (t, dec) = optimize_cfl_eb(shape, p).unwrap();
        assert_eq!(dec.t, t);

        // stored zeta match the unit-measure definition
        for (k, edge) in re.surf.edges.iter().enumerate() {
            for (q, &w) in edge.weights.iter().enumerate() {
                assert_eq!(dec.zeta[k][q], unit_zeta(shape, k, w));
            }
        }

        // weights nonnegative / above the ratio bound
        for th in &dec.theta_volume {
            assert!(*th >= -1e-12);
        }
        for (k, edge) in dec.theta_surface.iter().enumerate() {
            for (q, th) in edge.iter().enumerate() {
                assert!(*th >= t * dec.zeta[k][q] - 1e-10);
            }
        }

        // moment exactness against the volume rule, rechecked from scratch
        let vref = shape.ref_volume();
        for m in 0..re.np {
            let mut lhs = 0.0;
            for (v, phi) in re.phi_vol.iter().enumerate() {
                lhs += dec.theta_volume[v] * phi[m];
            }
            for k in 0..dec.theta_surface.len() {
                for (q, th) in dec.theta_surface[k].iter().enumerate() {
                    lhs += th * re.phi_surf[k][q][m];
                }
            }
            let rhs: f64 = re
                .phi_vol
                .iter()
                .zip(&re.vol.weights)
                .map(|(phi, w)| (w / vref) * phi[m])
                .sum();
            assert!(
                (lhs - rhs).abs() < 1e-9,
                "{shape:?} p={p} moment {m}: residual {}",
                lhs - rhs
            );
        }
    }
}

#[test]
fn optimization_is_deterministic() {
    let (a, _) = optimize_cfl_eb(Shape::Tri, 4).unwrap();
    let (b, _) = optimize_cfl_eb(Shape::Tri, 4).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn table_lookup_reports_missing_entries() {
    let mut table = CflTable::compute(&[Shape::Line], &[1, 2]).unwrap();
    assert!(table.get(Shape::Line, 1).is_ok());
    let err = table.get(Shape::Quad, 1).unwrap_err().to_string();
    assert!(err.contains("Quad") && err.contains("p=1"), "{err}");

    table.insert(Shape::Quad, 1, 0.25);
    assert_eq!(table.get(Shape::Quad, 1).unwrap(), 0.25);

    let rows = table.rows();
    assert_eq!(rows.len(), 3);
    // line rows first, sorted by order, then quad
    assert_eq!((rows[0].0, rows[0].1), (Shape::Line, 1));
    assert_eq!((rows[1].0, rows[1].1), (Shape::Line, 2));
    assert_eq!((rows[2].0, rows[2].1), (Shape::Quad, 1));
}

#[test]
fn per_element_optimization_scales_with_element_size() {
    // on affine squares of side h the physical decomposition is the
    // reference one with zeta scaled by 1/h, so the optimum is t_ref * h
    let gas = GasModel::air();
    let state = State::from_primitive(
        &Primitive {
            rho: 1.4,
            vel: [0.35, -0.2],
            p: 1.0,
        },
        &gas,
    );
    let mesh = rect_mesh(0.0, 0.0, 1.0, 1.0, 4, 4, false, |_, _| "ff".into()).unwrap();
    let mut bcs = HashMap::new();
    bcs.insert("ff".to_string(), BoundaryCondition::Farfield(state));
    let disc = Discretization::new(mesh, 2, gas, FluxModel::Euler, &bcs).unwrap();

    let (t_ref, _) = optimize_cfl_eb(Shape::Quad, 2).unwrap();
    for e in 0..16 {
        let t_e = optimize_cfl_element(&disc, e).unwrap();
        assert!(
            (t_e - t_ref * 0.25).abs() < 1e-8,
            "element {e}: {t_e} vs {}",
            t_ref * 0.25
        );
    }

    // the controller's two routes agree on affine squares
    let u = disc.project(|_| state);
    let mut ws = disc.workspace();
    disc.compute_traces(&u, &mut ws.traces);
    let table = CflTable::compute(&[Shape::Quad], &[2]).unwrap();
    let plain = StepController::new(table.clone(), 0.9);
    let (dt_table, _) = plain.time_step(&disc, &ws.traces, 0.0).unwrap();
    let per_elem = StepController::new(table, 0.9)
        .with_per_element(&disc)
        .unwrap();
    let (dt_elem, _) = per_elem.time_step(&disc, &ws.traces, 0.0).unwrap();
    assert!(
        ((dt_table - dt_elem) / dt_table).abs() < 1e-8,
        "{dt_table} vs {dt_elem}"
    );
}
