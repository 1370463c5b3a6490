use ebdg_core::euler::{
    combined_speed_bound, flux, flux_dot_n, lax_friedrichs_flux, nfields, tau_factor, GasModel,
    Primitive, State,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(rng: &mut ChaCha8Rng) -> State {
    let pr = Primitive {
        rho: rng.gen_range(0.1..5.0),
        vel: [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)],
        p: rng.gen_range(0.05..10.0),
    };
    State::from_primitive(&pr, &GasModel::air())
}

#[test]
fn primitive_round_trip_and_closed_forms() {
    let gas = GasModel::new(1.4, 0.25);
    let pr = Primitive {
        rho: 1.2,
        vel: [0.3, -0.4],
        p: 0.9,
    };
    let u = State::from_primitive(&pr, &gas);

    // e = p/(gamma-1) + rho |v|^2 / 2
    let e_expect = 0.9 / 0.4 + 0.5 * 1.2 * (0.09 + 0.16);
    assert!((u.e - e_expect).abs() < 1e-15);
    assert!((u.pressure(&gas) - 0.9).abs() < 1e-14);
    assert!((u.speed_of_sound(&gas) - (1.4 * 0.9 / 1.2f64).sqrt()).abs() < 1e-14);
    assert!((u.max_wave_speed(&gas) - (0.5 + (1.4 * 0.9 / 1.2f64).sqrt())).abs() < 1e-14);

    // s = ln p - gamma ln rho + s_ref
    let s_expect = 0.9f64.ln() - 1.4 * 1.2f64.ln() + 0.25;
    assert!((u.entropy(&gas) - s_expect).abs() < 1e-14);
    let (eta, q) = u.entropy_pair(&gas);
    assert!((eta + 1.2 * s_expect).abs() < 1e-14);
    assert!((q[0] + 1.2 * s_expect * 0.3).abs() < 1e-14);
    assert!((q[1] + 1.2 * s_expect * (-0.4)).abs() < 1e-14);

    let back = u.primitive(&gas);
    assert!((back.rho - pr.rho).abs() < 1e-15);
    assert!((back.vel[0] - pr.vel[0]).abs() < 1e-15);
    assert!((back.vel[1] - pr.vel[1]).abs() < 1e-15);
    assert!((back.p - pr.p).abs() < 1e-14);
}

#[test]
fn field_layout_round_trip() {
    assert_eq!(nfields(1), 3);
    assert_eq!(nfields(2), 4);

    let u = State::new(1.5, [0.2, -0.7], 3.1);
    let mut f2 = [0.0; 4];
    u.write_fields(2, &mut f2);
    assert_eq!(f2, [1.5, 0.2, -0.7, 3.1]);
    let v = State::from_fields(2, &f2);
    assert_eq!((v.rho, v.mom, v.e), (u.rho, u.mom, u.e));

    // 1D layout drops the transverse momentum
    let mut f1 = [0.0; 3];
    u.write_fields(1, &mut f1);
    assert_eq!(f1, [1.5, 0.2, 3.1]);
    let w = State::from_fields(1, &f1);
    assert_eq!(w.mom[1], 0.0);
}

#[test]
fn flux_projection_matches_directional_flux() {
    let gas = GasModel::air();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let u = random_state(&mut rng);
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let n = [th.cos(), th.sin()];
        let fn_ = flux_dot_n(&u, n, &gas);
        let f = flux(&u, &gas); // direction-major: f[d][i]
        for i in 0..4 {
            let proj = f[0][i] * n[0] + f[1][i] * n[1];
            assert!((fn_[i] - proj).abs() < 1e-12 * (1.0 + proj.abs()));
        }
    }
}

#[test]
fn flux_closed_form_1d() {
    // rho=1, u=2, p=3: F = (rho u, rho u^2 + p, u (e + p))
    let gas = GasModel::air();
    let u = State::from_primitive(
        &Primitive {
            rho: 1.0,
            vel: [2.0, 0.0],
            p: 3.0,
        },
        &gas,
    );
    let f = flux_dot_n(&u, [1.0, 0.0], &gas);
    let e = 3.0 / 0.4 + 0.5 * 4.0;
    assert!((f[0] - 2.0).abs() < 1e-14);
    assert!((f[1] - 7.0).abs() < 1e-14);
    assert!((f[3] - 2.0 * (e + 3.0)).abs() < 1e-13);
}

#[test]
fn lax_friedrichs_consistency_and_conservation() {
    let gas = GasModel::air();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let a = random_state(&mut rng);
        let b = random_state(&mut rng);
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let n = [th.cos(), th.sin()];
        let lam = a.max_wave_speed(&gas).max(b.max_wave_speed(&gas));

        // consistency: equal states reduce to the physical flux
        let same = lax_friedrichs_flux(&a, &a, n, lam, &gas);
        let phys = flux_dot_n(&a, n, &gas);
        for i in 0..4 {
            assert!((same[i] - phys[i]).abs() < 1e-12 * (1.0 + phys[i].abs()));
        }

        // conservation: swapping sides and flipping the normal negates the flux
        let fwd = lax_friedrichs_flux(&a, &b, n, lam, &gas);
        let rev = lax_friedrichs_flux(&b, &a, [-n[0], -n[1]], lam, &gas);
        for i in 0..4 {
            assert!((fwd[i] + rev[i]).abs() < 1e-12 * (1.0 + fwd[i].abs()));
        }
    }
}

#[test]
fn convex_combinations_stay_below_speed_bound() {
    let gas = GasModel::air();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..500 {
        let k = rng.gen_range(2..6);
        let states: Vec<State> = (0..k).map(|_| random_state(&mut rng)).collect();
        let mut w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
        let tot: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= tot);

        let mix = states.iter().zip(&w).fold(State::new(0.0, [0.0; 2], 0.0), |acc, (s, &wi)| {
            State::new(
                acc.rho + wi * s.rho,
                [acc.mom[0] + wi * s.mom[0], acc.mom[1] + wi * s.mom[1]],
                acc.e + wi * s.e,
            )
        });
        let bound = combined_speed_bound(&states, &w, &gas);
        assert!(
            mix.max_wave_speed(&gas) <= bound + 1e-12,
            "mixture speed {} exceeds bound {}",
            mix.max_wave_speed(&gas),
            bound
        );
    }
}

#[test]
fn admissibility_and_checked() {
    let gas = GasModel::air();
    let ok = State::from_primitive(
        &Primitive {
            rho: 1.0,
            vel: [0.0, 0.0],
            p: 1.0,
        },
        &gas,
    );
    assert!(ok.admissible(&gas));
    assert!(ok.checked(&gas, || "ctx".into()).is_ok());

    let vacuum = State::new(-1.0, [0.0, 0.0], 1.0);
    assert!(!vacuum.admissible(&gas));
    assert!(vacuum.checked(&gas, || "ctx".into()).is_err());

    let cold = State::new(1.0, [2.0, 0.0], 1.0); // e < kinetic -> negative p
    assert!(!cold.admissible(&gas));
}

#[test]
fn tau_factor_values() {
    let gas = GasModel::air();
    assert_eq!(tau_factor(1, &gas), 1.0);
    // gamma > 1 makes sqrt(2 + gamma(gamma-1)) >= sqrt(2), so it wins in 2D
    let expect = (2.0 + 1.4 * 0.4f64).sqrt();
    assert!((tau_factor(2, &gas) - expect).abs() < 1e-15);
}
