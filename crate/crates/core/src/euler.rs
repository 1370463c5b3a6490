//! Point-wise compressible-Euler physics: state algebra, fluxes, entropy,
//! wave speeds, and the local Lax-Friedrichs flux.
//!
//! States carry a fixed-size momentum `[f64; 2]`; 1D runs keep `mom[1] == 0`
//! so the same kernels serve both dimensions. Field layout in coefficient
//! arrays is `[rho, mom_x, (mom_y,) total_energy]` with `nfields(nd) = nd + 2`.

use crate::error::{Error, Result};

/// Admissibility floor for density and pressure (nondimensional units).
pub const ADMISSIBILITY_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GasModel {
    /// Ratio of specific heats, > 1.
    pub gamma: f64,
    /// Reference entropy s0 in s = ln p - gamma ln rho + s0.
    pub s_ref: f64,
}

impl GasModel {
    pub fn new(gamma: f64, s_ref: f64) -> Self {
        assert!(gamma > 1.0, "gamma must exceed 1");
        GasModel { gamma, s_ref }
    }

    /// Diatomic ideal gas, zero reference entropy.
    pub fn air() -> Self {
        GasModel {
            gamma: 1.4,
            s_ref: 0.0,
        }
    }
}

impl Default for GasModel {
    fn default() -> Self {
        GasModel::air()
    }
}

/// Conserved variables at a point: density, momentum, total energy rho*e.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct State {
    pub rho: f64,
    pub mom: [f64; 2],
    pub e: f64,
}

/// Primitive variables at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub vel: [f64; 2],
    pub p: f64,
}

pub fn nfields(nd: usize) -> usize {
    nd + 2
}

impl State {
    pub fn new(rho: f64, mom: [f64; 2], e: f64) -> Self {
        State { rho, mom, e }
    }

    /// Build from a field slice laid out as [rho, mom_x, (mom_y,) e].
    pub fn from_fields(nd: usize, f: &[f64]) -> Self {
        debug_assert_eq!(f.len(), nfields(nd));
        match nd {
            1 => State::new(f[0], [f[1], 0.0], f[2]),
            2 => State::new(f[0], [f[1], f[2]], f[3]),
            _ => unreachable!("only 1D/2D supported"),
        }
    }

    pub fn write_fields(&self, nd: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), nfields(nd));
        out[0] = self.rho;
        out[1] = self.mom[0];
        if nd == 2 {
            out[2] = self.mom[1];
            out[3] = self.e;
        } else {
            out[2] = self.e;
        }
    }

    pub fn from_primitive(pr: &Primitive, gas: &GasModel) -> Self {
        let ke = 0.5 * pr.rho * (pr.vel[0] * pr.vel[0] + pr.vel[1] * pr.vel[1]);
        State {
            rho: pr.rho,
            mom: [pr.rho * pr.vel[0], pr.rho * pr.vel[1]],
            e: pr.p / (gas.gamma - 1.0) + ke,
        }
    }

    pub fn velocity(&self) -> [f64; 2] {
        [self.mom[0] / self.rho, self.mom[1] / self.rho]
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * (self.mom[0] * self.mom[0] + self.mom[1] * self.mom[1]) / self.rho
    }

    /// p = (gamma - 1)(rho e - rho |u|^2 / 2).
    pub fn pressure(&self, gas: &GasModel) -> f64 {
        (gas.gamma - 1.0) * (self.e - self.kinetic_energy())
    }

    pub fn primitive(&self, gas: &GasModel) -> Primitive {
        Primitive {
            rho: self.rho,
            vel: self.velocity(),
            p: self.pressure(gas),
        }
    }

    pub fn speed_of_sound(&self, gas: &GasModel) -> f64 {
        (gas.gamma * self.pressure(gas) / self.rho).sqrt()
    }

    /// Local maximum characteristic speed nu = |u| + c.
    pub fn max_wave_speed(&self, gas: &GasModel) -> f64 {
        let u = self.velocity();
        (u[0] * u[0] + u[1] * u[1]).sqrt() + self.speed_of_sound(gas)
    }

    /// Specific entropy s = ln p - gamma ln rho + s0.
    pub fn entropy(&self, gas: &GasModel) -> f64 {
        self.pressure(gas).ln() - gas.gamma * self.rho.ln() + gas.s_ref
    }

    /// Entropy pair (U, F) = (-rho s, -rho s u).
    pub fn entropy_pair(&self, gas: &GasModel) -> (f64, [f64; 2]) {
        let s = self.entropy(gas);
        let u = self.velocity();
        (-self.rho * s, [-self.rho * s * u[0], -self.rho * s * u[1]])
    }

    pub fn admissible(&self, gas: &GasModel) -> bool {
        self.rho > ADMISSIBILITY_FLOOR && self.pressure(gas) > ADMISSIBILITY_FLOOR
    }

    /// Admissibility check that names its call site on failure.
    pub fn checked(&self, gas: &GasModel, context: impl Fn() -> String) -> Result<State> {
        if self.admissible(gas) {
            Ok(*self)
        } else {
            Err(Error::Inadmissible {
                context: context(),
                rho: self.rho,
                p: self.pressure(gas),
            })
        }
    }
}

/// Directional flux F(U)·n for the Euler system, n need not be unit here.
pub fn flux_dot_n(u: &State, n: [f64; 2], gas: &GasModel) -> [f64; 4] {
    let p = u.pressure(gas);
    let vel = u.velocity();
    let un = vel[0] * n[0] + vel[1] * n[1];
    [
        u.rho * un,
        u.mom[0] * un + p * n[0],
        u.mom[1] * un + p * n[1],
        (u.e + p) * un,
    ]
}

/// Cartesian flux tensor: column d is the flux in direction d.
pub fn flux(u: &State, gas: &GasModel) -> [[f64; 4]; 2] {
    [
        flux_dot_n(u, [1.0, 0.0], gas),
        flux_dot_n(u, [0.0, 1.0], gas),
    ]
}

/// Local Lax-Friedrichs flux: 1/2 (F(UL)+F(UR))·n - lambda/2 (UR - UL).
/// Caller must supply lambda >= max(nu(UL), nu(UR)).
pub fn lax_friedrichs_flux(
    ul: &State,
    ur: &State,
    n: [f64; 2],
    lambda: f64,
    gas: &GasModel,
) -> [f64; 4] {
    let fl = flux_dot_n(ul, n, gas);
    let fr = flux_dot_n(ur, n, gas);
    let jump = [
        ur.rho - ul.rho,
        ur.mom[0] - ul.mom[0],
        ur.mom[1] - ul.mom[1],
        ur.e - ul.e,
    ];
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = 0.5 * (fl[i] + fr[i]) - 0.5 * lambda * jump[i];
    }
    out
}

/// Guaranteed upper bound on the wave speed of any convex combination of the
/// given states: sqrt(2 + gamma (gamma - 1)) * max_k nu(U_k).
pub fn combined_speed_bound(states: &[State], weights: &[f64], gas: &GasModel) -> f64 {
    debug_assert_eq!(states.len(), weights.len());
    debug_assert!(weights.iter().all(|&w| w >= -1e-14));
    debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    let factor = (2.0 + gas.gamma * (gas.gamma - 1.0)).sqrt();
    let numax = states
        .iter()
        .map(|u| u.max_wave_speed(gas))
        .fold(0.0, f64::max);
    factor * numax
}

/// Inflation factor for the time-step wave speed: 1 in 1D, otherwise
/// max{sqrt(N_d), sqrt(2 + gamma (gamma - 1))}.
pub fn tau_factor(nd: usize, gas: &GasModel) -> f64 {
    if nd == 1 {
        1.0
    } else {
        (nd as f64).sqrt().max((2.0 + gas.gamma * (gas.gamma - 1.0)).sqrt())
    }
}
