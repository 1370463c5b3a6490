use ebdg_core::basis::{eval_basis, eval_basis_grad, jacobi, RefElement};
use ebdg_core::quadrature::{volume_rule, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(shape: Shape, rng: &mut ChaCha8Rng) -> [f64; 2] {
    match shape {
        Shape::Line => [rng.gen_range(-1.0..1.0), 0.0],
        Shape::Quad => [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        Shape::Tri => loop {
            let x = rng.gen_range(0.0..1.0);
            let y = rng.gen_range(0.0..1.0);
            if x + y < 1.0 {
                break [x, y];
            }
        },
    }
}

#[test]
fn jacobi_reduces_to_legendre() {
    // P_0..P_3 at a few abscissae
    for &x in &[-0.9, -0.3, 0.0, 0.4, 1.0] {
        assert!((jacobi(0, 0.0, 0.0, x) - 1.0).abs() < 1e-15);
        assert!((jacobi(1, 0.0, 0.0, x) - x).abs() < 1e-15);
        assert!((jacobi(2, 0.0, 0.0, x) - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-14);
        assert!((jacobi(3, 0.0, 0.0, x) - 0.5 * (5.0 * x * x * x - 3.0 * x)).abs() < 1e-14);
    }
}

#[test]
fn bases_are_orthonormal_under_quadrature() {
    for shape in [Shape::Line, Shape::Quad, Shape::Tri] {
        for p in 1..=4 {
            let np = shape.basis_count(p);
            let rule = volume_rule(shape, 2 * p).unwrap();
            let phi: Vec<Vec<f64>> = rule.points.iter().map(|&r| eval_basis(shape, p, r)).collect();
            for i in 0..np {
                for j in 0..np {
                    let g: f64 = rule
                        .weights
                        .iter()
                        .enumerate()
                        .map(|(q, &w)| w * phi[q][i] * phi[q][j])
                        .sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (g - expect).abs() < 1e-12,
                        "{shape:?} p={p} <phi_{i}, phi_{j}> = {g}"
                    );
                }
            }
        }
    }
}

#[test]
fn first_mode_is_constant() {
    // phi_0 = 1/sqrt(ref volume), so the mean of the expansion is c_0 * phi_0
    for shape in [Shape::Line, Shape::Quad, Shape::Tri] {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let expect = 1.0 / shape.ref_volume().sqrt();
        for _ in 0..20 {
            let r = random_point(shape, &mut rng);
            let phi = eval_basis(shape, 3, r);
            assert!((phi[0] - expect).abs() < 1e-14);
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    let h = 1e-6;
    for shape in [Shape::Line, Shape::Quad, Shape::Tri] {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for p in 1..=4 {
            let np = shape.basis_count(p);
            for _ in 0..10 {
                let mut r = random_point(shape, &mut rng);
                // keep the stencil inside the reference domain
                r[0] = r[0].clamp(-0.9, 0.9).abs().min(0.45).copysign(r[0]);
                if shape == Shape::Tri {
                    r = [0.2 + 0.2 * r[0], 0.2 + 0.2 * r[1]];
                }
                let grad = eval_basis_grad(shape, p, r);
                for d in 0..shape.ndim() {
                    let mut rp = r;
                    let mut rm = r;
                    rp[d] += h;
                    rm[d] -= h;
                    let fp = eval_basis(shape, p, rp);
                    let fm = eval_basis(shape, p, rm);
                    for m in 0..np {
                        let fd = (fp[m] - fm[m]) / (2.0 * h);
                        assert!(
                            (grad[m][d] - fd).abs() < 5e-8 * (1.0 + fd.abs()),
                            "{shape:?} p={p} mode {m} dir {d}: {} vs fd {fd}",
                            grad[m][d]
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn modal_nodal_round_trip() {
    for shape in [Shape::Line, Shape::Quad, Shape::Tri] {
        for p in 1..=4 {
            let re = RefElement::new(shape, p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(42 + p as u64);
            let coeffs: Vec<f64> = (0..re.np).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let vals = re.to_point_values(&coeffs);
            let back = re.from_point_values(&vals);
            for (a, b) in coeffs.iter().zip(&back) {
                assert!((a - b).abs() < 1e-11, "{shape:?} p={p}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn expansion_reproduces_polynomials() {
    // project x and x*y (where in span) through the nodal interface and
    // evaluate at random points
    for shape in [Shape::Line, Shape::Quad, Shape::Tri] {
        let p = 2;
        let re = RefElement::new(shape, p).unwrap();
        let f = |r: [f64; 2]| 0.3 + 0.7 * r[0] - 0.2 * r[1] + if shape == Shape::Line { 0.0 } else { 0.5 * r[0] * r[1] };
        // tri p=2 contains xy; quad p=2 contains xy; line ignores y
        let vals: Vec<f64> = re
            .interp_idx
            .iter()
            .map(|&vi| f(re.vol.points[vi]))
            .collect();
        let coeffs = re.from_point_values(&vals);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..30 {
            let r = random_point(shape, &mut rng);
            let got = re.eval(&coeffs, r);
            assert!(
                (got - f(r)).abs() < 1e-11,
                "{shape:?} at {r:?}: {got} vs {}",
                f(r)
            );
        }
    }
}

#[test]
fn ref_element_tables_are_consistent() {
    for shape in [Shape::Line, Shape::Quad, Shape::Tri] {
        for p in 1..=4 {
            let re = RefElement::new(shape, p).unwrap();
            assert_eq!(re.np, shape.basis_count(p));
            assert_eq!(re.phi_vol.len(), re.vol.len());
            assert_eq!(re.phi_surf.len(), shape.nedges());
            for k in 0..shape.nedges() {
                assert_eq!(re.phi_surf[k].len(), re.surf.edges[k].param.len());
                // surface tables must equal a direct basis evaluation
                for (q, &rq) in re.surf_points[k].iter().enumerate() {
                    let direct = eval_basis(shape, p, rq);
                    for m in 0..re.np {
                        assert!((re.phi_surf[k][q][m] - direct[m]).abs() < 1e-14);
                    }
                }
            }
            assert_eq!(re.interp_idx.len(), re.np);
        }
    }
}
