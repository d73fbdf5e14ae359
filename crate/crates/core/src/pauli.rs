//! Momentum-space Pauli equation, with and without the relativistic
//! spin-density term.
//!
//! Each momentum `n hbar k` carries a two-component spinor `(up, down)`.
//! The vector-potential squared couples `n` to `n +- 2` (ponderomotive term),
//! the magnetic Zeeman term couples `n` to `n +- 1`. The relativistic variant
//! adds `-q^2/(8 m^2 c^2) sigma . (E x A + A x E)`, a `sigma_x` coupling to
//! `n +- 2` proportional to the photonic spin density.

use num_complex::Complex64 as C64;

use crate::constants::CODATA_2018;
use crate::dirac::MomentumLattice;
use crate::fields::{window, LaserConfig, ScaledUnits};
use crate::integrator::{CouplingOp, ModeSystem};

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Number of grid points used for density profiles.
pub const DENSITY_POINTS: usize = 512;

/// Amplitudes `c_n^s` over the lattice, mode-major with `(up, down)` pairs,
/// plus a time stamp in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliModeState {
    pub lattice: MomentumLattice,
    pub amps: Vec<C64>,
    pub t: f64,
}

impl PauliModeState {
    pub fn zeros(lattice: MomentumLattice) -> Self {
        Self {
            lattice,
            amps: vec![ZERO; 2 * lattice.modes()],
            t: 0.0,
        }
    }

    /// Electron at rest with spin up.
    pub fn at_rest_spin_up(lattice: MomentumLattice) -> Self {
        let mut s = Self::zeros(lattice);
        s.amps[2 * lattice.slot(0)] = ONE;
        s
    }

    /// `c_n^up` (`down = false`) or `c_n^down`.
    pub fn amp(&self, n: i64, down: bool) -> C64 {
        self.amps[2 * self.lattice.slot(n) + down as usize]
    }

    pub fn amp_mut(&mut self, n: i64, down: bool) -> &mut C64 {
        let i = 2 * self.lattice.slot(n) + down as usize;
        &mut self.amps[i]
    }
}

/// Which Pauli Hamiltonian to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliVariant {
    /// Includes the spin-density coupling.
    Relativistic,
    NonRelativistic,
}

/// Pauli ladder as a propagatable system.
#[derive(Debug, Clone)]
pub struct PauliSystem {
    lattice: MomentumLattice,
    units: ScaledUnits,
    eta: f64,
    variant: PauliVariant,
    free: Vec<f64>,
}

impl PauliSystem {
    pub fn new(
        lattice: MomentumLattice,
        units: ScaledUnits,
        eta: f64,
        variant: PauliVariant,
    ) -> Self {
        let kappa = units.kappa;
        let free = lattice
            .iter()
            .flat_map(|n| {
                let e = 0.5 * (n as f64 * kappa).powi(2);
                [e, e]
            })
            .collect();
        Self {
            lattice,
            units,
            eta,
            variant,
            free,
        }
    }

    pub fn for_config(cfg: &LaserConfig, n_max: usize, variant: PauliVariant) -> Self {
        Self::new(
            MomentumLattice::for_config(cfg, n_max),
            ScaledUnits::new(cfg),
            cfg.eta,
            variant,
        )
    }

    pub fn lattice(&self) -> &MomentumLattice {
        &self.lattice
    }
}

/// Coefficients of the Pauli interaction at one instant, in `m c^2`.
pub struct PauliCoupling {
    /// Scalar ponderomotive weight on `c_{n-2} + 2 c_n + c_{n+2}`.
    pond: f64,
    /// `sigma_x` weight on the same combination.
    spin: f64,
    /// Zeeman block `B` acting on `c_{n-1} - c_{n+1}`, row-major.
    zeeman: [[C64; 2]; 2],
}

impl CouplingOp for PauliCoupling {
    fn apply(&self, c: &[C64], out: &mut [C64]) {
        let modes = c.len() / 2;
        let get = |j: isize| -> [C64; 2] {
            if j < 0 || j as usize >= modes {
                [ZERO; 2]
            } else {
                let j = j as usize;
                [c[2 * j], c[2 * j + 1]]
            }
        };
        let b = &self.zeeman;
        for i in 0..modes {
            let j = i as isize;
            let (m2, m1, p1, p2) = (get(j - 2), get(j - 1), get(j + 1), get(j + 2));
            let own = [c[2 * i], c[2 * i + 1]];
            let s = [m2[0] + own[0] * 2.0 + p2[0], m2[1] + own[1] * 2.0 + p2[1]];
            let d = [m1[0] - p1[0], m1[1] - p1[1]];
            out[2 * i] = s[0] * self.pond + s[1] * self.spin + b[0][0] * d[0] + b[0][1] * d[1];
            out[2 * i + 1] = s[1] * self.pond + s[0] * self.spin + b[1][0] * d[0] + b[1][1] * d[1];
        }
    }
}

impl ModeSystem for PauliSystem {
    type Coupling = PauliCoupling;

    fn dim(&self) -> usize {
        self.free.len()
    }

    fn units(&self) -> &ScaledUnits {
        &self.units
    }

    fn free_energies(&self) -> &[f64] {
        &self.free
    }

    fn coupling(&self, phase: f64, w: f64) -> PauliCoupling {
        let ScaledUnits { kappa, xi, .. } = self.units;
        let w2 = w * w;
        let pond =
            0.5 * w2 * (xi * kappa).powi(2) * (1.0 - self.eta.cos() * (2.0 * phase - self.eta).cos());
        let spin = match self.variant {
            PauliVariant::Relativistic => 0.25 * w2 * xi * xi * kappa.powi(3) * self.eta.sin(),
            PauliVariant::NonRelativistic => 0.0,
        };
        // i sgn(q) (xi kappa^2 / 2) w (-sigma_y sin(phase - eta) + sigma_z sin(phase));
        // the electron charge is negative.
        let b = -0.5 * xi * kappa * kappa * w;
        let (sa, sb) = (phase.sin(), (phase - self.eta).sin());
        let zeeman = [
            [I * (b * sa), C64::from(-b * sb)],
            [C64::from(b * sb), -I * (b * sa)],
        ];
        PauliCoupling { pond, spin, zeeman }
    }

    fn initial_state(&self) -> Vec<C64> {
        PauliModeState::at_rest_spin_up(self.lattice).amps
    }

    fn spin_z(&self, c: &[C64]) -> f64 {
        spin_z_of(c)
    }

    fn density_quarter(&self, c: &[C64]) -> Option<f64> {
        Some(scaled_density(c, self.lattice.n_max, 0.25))
    }
}

fn spin_z_of(amps: &[C64]) -> f64 {
    let s: f64 = amps
        .chunks_exact(2)
        .map(|p| p[0].norm_sqr() - p[1].norm_sqr())
        .sum();
    0.5 * s
}

/// `lambda * rho` at `x = frac * lambda`.
fn scaled_density(amps: &[C64], n_max: usize, frac: f64) -> f64 {
    let mut up = ZERO;
    let mut down = ZERO;
    for (i, p) in amps.chunks_exact(2).enumerate() {
        let n = i as f64 - n_max as f64;
        let ph = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * n * frac);
        up += p[0] * ph;
        down += p[1] * ph;
    }
    up.norm_sqr() + down.norm_sqr()
}

fn rhs(sys: &PauliSystem, state: &PauliModeState, t: f64, cfg: &LaserConfig) -> PauliModeState {
    let mut h = vec![ZERO; state.amps.len()];
    sys.coupling(cfg.omega() * t, window(t, cfg))
        .apply(&state.amps, &mut h);
    let mc2_over_hbar = CODATA_2018.rest_energy() / CODATA_2018.hbar;
    let amps = h
        .iter()
        .zip(sys.free_energies())
        .zip(&state.amps)
        .map(|((v, e), c)| -I * (v + c * e) * mc2_over_hbar)
        .collect();
    PauliModeState {
        lattice: state.lattice,
        amps,
        t: state.t,
    }
}

/// Time derivative `dc/dt` (1/s) under the relativistic Pauli Hamiltonian.
pub fn pauli_rel_rhs(state: &PauliModeState, t: f64, cfg: &LaserConfig) -> PauliModeState {
    let sys = PauliSystem::new(
        state.lattice,
        ScaledUnits::new(cfg),
        cfg.eta,
        PauliVariant::Relativistic,
    );
    rhs(&sys, state, t, cfg)
}

/// Time derivative `dc/dt` (1/s) without the spin-density term.
pub fn pauli_nonrel_rhs(state: &PauliModeState, t: f64, cfg: &LaserConfig) -> PauliModeState {
    let sys = PauliSystem::new(
        state.lattice,
        ScaledUnits::new(cfg),
        cfg.eta,
        PauliVariant::NonRelativistic,
    );
    rhs(&sys, state, t, cfg)
}

/// `s_z` in units of `hbar`.
pub fn pauli_spin_z(state: &PauliModeState) -> f64 {
    spin_z_of(&state.amps)
}

/// Position density `rho(x)` in 1/m, for a wave packet periodic in `lambda`.
pub fn position_density(state: &PauliModeState, x: f64) -> f64 {
    let lambda = 2.0 * std::f64::consts::PI / state.lattice.k;
    scaled_density(&state.amps, state.lattice.n_max, x / lambda) / lambda
}

/// `lambda * rho` on `points` equally spaced positions in `[0, lambda)`.
pub fn density_profile(state: &PauliModeState, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| scaled_density(&state.amps, state.lattice.n_max, i as f64 / points as f64))
        .collect()
}
