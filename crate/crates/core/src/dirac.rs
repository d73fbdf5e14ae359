//! Momentum-space Dirac equation on a truncated ladder of plane-wave modes.
//!
//! Each momentum `n hbar k` carries four amplitudes, ordered
//! `(+up, +down, -up, -down)` where `+`/`-` is the sign of the free energy
//! and up/down the spin label of the bispinor. Neighbouring momenta are
//! coupled by single-photon absorption/emission; the ladder is cut hard at
//! `|n| = n_max`.
//!
//! Internally energies are measured in `m c^2` and time in laser cycles.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;

use crate::constants::CODATA_2018;
use crate::fields::{window, LaserConfig, ScaledUnits};
use crate::integrator::{CouplingOp, ModeSystem};

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Symmetric ladder of momenta `n hbar k`, `n` in `-n_max..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MomentumLattice {
    /// Wave number, 1/m.
    pub k: f64,
    pub n_max: usize,
}

impl MomentumLattice {
    pub fn new(k: f64, n_max: usize) -> Self {
        assert!(n_max >= 4, "momentum lattice needs n_max >= 4, got {n_max}");
        assert!(k > 0.0 && k.is_finite());
        Self { k, n_max }
    }

    pub fn for_config(cfg: &LaserConfig, n_max: usize) -> Self {
        Self::new(cfg.k(), n_max)
    }

    pub fn modes(&self) -> usize {
        2 * self.n_max + 1
    }

    pub fn contains(&self, n: i64) -> bool {
        n.unsigned_abs() as usize <= self.n_max
    }

    /// Position of mode `n` in a mode-major amplitude vector.
    pub fn slot(&self, n: i64) -> usize {
        assert!(self.contains(n), "mode {n} outside lattice of order {}", self.n_max);
        (n + self.n_max as i64) as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        let m = self.n_max as i64;
        -m..=m
    }

    /// Photon momentum in Compton units.
    pub fn kappa(&self) -> f64 {
        let k = CODATA_2018;
        k.hbar * self.k / (k.m_e * k.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergySign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

/// Label `(n, zeta, s)` of one Dirac basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DiracModeLabel {
    pub n: i64,
    pub zeta: EnergySign,
    pub s: Spin,
}

impl DiracModeLabel {
    pub fn new(n: i64, zeta: EnergySign, s: Spin) -> Self {
        Self { n, zeta, s }
    }

    /// Index of `(zeta, s)` within the four-tuple of a momentum mode.
    pub fn gamma(&self) -> usize {
        gamma_index(self.zeta, self.s)
    }
}

pub fn gamma_index(zeta: EnergySign, s: Spin) -> usize {
    match (zeta, s) {
        (EnergySign::Positive, Spin::Up) => 0,
        (EnergySign::Positive, Spin::Down) => 1,
        (EnergySign::Negative, Spin::Up) => 2,
        (EnergySign::Negative, Spin::Down) => 3,
    }
}

/// Dirac matrix `alpha_y` in the standard representation.
pub fn alpha_y() -> Matrix4<C64> {
    let mut a = Matrix4::zeros();
    // off-diagonal sigma_y blocks
    a[(0, 3)] = -I;
    a[(1, 2)] = I;
    a[(2, 1)] = -I;
    a[(3, 0)] = I;
    a
}

/// Dirac matrix `alpha_z` in the standard representation.
pub fn alpha_z() -> Matrix4<C64> {
    let mut a = Matrix4::zeros();
    a[(0, 2)] = ONE;
    a[(1, 3)] = -ONE;
    a[(2, 0)] = ONE;
    a[(3, 1)] = -ONE;
    a
}

/// Energy of mode `n`, in joules.
pub fn mode_energy(n: i64, lattice: &MomentumLattice) -> f64 {
    assert!(lattice.contains(n), "mode {n} outside lattice");
    let k = CODATA_2018;
    let mc2 = k.rest_energy();
    let p = n as f64 * k.c * lattice.k * k.hbar;
    (mc2 * mc2 + p * p).sqrt()
}

/// Bispinors, energies and neighbour couplings for a lattice. Immutable
/// once built.
#[derive(Debug, Clone)]
pub struct SpinorTable {
    lattice: MomentumLattice,
    kappa: f64,
    energy: Vec<f64>,
    d_plus: Vec<f64>,
    d_minus: Vec<f64>,
    /// Columns are `u_n^gamma` in tuple order.
    spinors: Vec<Matrix4<C64>>,
    /// `u_n^dag alpha_y u_{n+1}` for `n` in `-n_max..n_max`.
    vy_up: Vec<Matrix4<C64>>,
    vz_up: Vec<Matrix4<C64>>,
    /// Row-major copies of the above; `alpha_y` blocks are imaginary and
    /// `alpha_z` blocks real, so one complex array holds both.
    packed_up: Vec<[C64; 16]>,
}

pub fn build_spinor_table(lattice: &MomentumLattice) -> SpinorTable {
    let kappa = lattice.kappa();
    let mut energy = Vec::with_capacity(lattice.modes());
    let mut d_plus = Vec::with_capacity(lattice.modes());
    let mut d_minus = Vec::with_capacity(lattice.modes());
    let mut spinors = Vec::with_capacity(lattice.modes());
    for n in lattice.iter() {
        let p = n as f64 * kappa;
        let e = (1.0 + p * p).sqrt();
        energy.push(e);
        d_plus.push(((1.0 + 1.0 / e) / 2.0).sqrt());
        d_minus.push(signum(n) * ((1.0 - 1.0 / e) / 2.0).sqrt());

        let norm = ((e + 1.0) / (2.0 * e)).sqrt();
        let f = p / (e + 1.0);
        // sigma_x swaps the spin components.
        let mut u = Matrix4::zeros();
        u[(0, 0)] = C64::from(norm);
        u[(3, 0)] = C64::from(norm * f);
        u[(1, 1)] = C64::from(norm);
        u[(2, 1)] = C64::from(norm * f);
        u[(1, 2)] = C64::from(-norm * f);
        u[(2, 2)] = C64::from(norm);
        u[(0, 3)] = C64::from(-norm * f);
        u[(3, 3)] = C64::from(norm);
        spinors.push(u);
    }
    let (ay, az) = (alpha_y(), alpha_z());
    let mut vy_up = Vec::with_capacity(lattice.modes() - 1);
    let mut vz_up = Vec::with_capacity(lattice.modes() - 1);
    for i in 0..lattice.modes() - 1 {
        let ud = spinors[i].adjoint();
        vy_up.push(ud * ay * spinors[i + 1]);
        vz_up.push(ud * az * spinors[i + 1]);
    }
    let packed_up = vy_up
        .iter()
        .zip(&vz_up)
        .map(|(y, z)| std::array::from_fn(|i| C64::new(z[(i / 4, i % 4)].re, y[(i / 4, i % 4)].im)))
        .collect();
    SpinorTable {
        packed_up,
        lattice: *lattice,
        kappa,
        energy,
        d_plus,
        d_minus,
        spinors,
        vy_up,
        vz_up,
    }
}

fn signum(n: i64) -> f64 {
    match n.cmp(&0) {
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Greater => 1.0,
    }
}

impl SpinorTable {
    pub fn lattice(&self) -> &MomentumLattice {
        &self.lattice
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `E_n / (m c^2)`.
    pub fn energy_scaled(&self, n: i64) -> f64 {
        self.energy[self.lattice.slot(n)]
    }

    /// `E_n` in joules.
    pub fn energy(&self, n: i64) -> f64 {
        self.energy_scaled(n) * CODATA_2018.rest_energy()
    }

    pub fn d_plus(&self, n: i64) -> f64 {
        self.d_plus[self.lattice.slot(n)]
    }

    pub fn d_minus(&self, n: i64) -> f64 {
        self.d_minus[self.lattice.slot(n)]
    }

    pub fn t_coef(&self, n: i64, m: i64) -> f64 {
        self.d_plus(n) * self.d_plus(m) + self.d_minus(n) * self.d_minus(m)
    }

    pub fn r_coef(&self, n: i64, m: i64) -> f64 {
        self.d_minus(n) * self.d_plus(m) - self.d_plus(n) * self.d_minus(m)
    }

    /// Bispinor `u_n^gamma`.
    pub fn spinor(&self, n: i64, gamma: usize) -> Vector4<C64> {
        self.spinors[self.lattice.slot(n)].column(gamma).into_owned()
    }

    /// All four bispinors of mode `n` as matrix columns.
    pub fn spinor_matrix(&self, n: i64) -> &Matrix4<C64> {
        &self.spinors[self.lattice.slot(n)]
    }

    /// `(u_n^dag alpha_y u_m, u_n^dag alpha_z u_m)` for `|n - m| = 1`.
    pub fn alpha_blocks(&self, n: i64, m: i64) -> (Matrix4<C64>, Matrix4<C64>) {
        assert_eq!((n - m).abs(), 1, "alpha blocks are only stored for neighbours");
        if m == n + 1 {
            let i = self.lattice.slot(n);
            (self.vy_up[i], self.vz_up[i])
        } else {
            let i = self.lattice.slot(m);
            (self.vy_up[i].adjoint(), self.vz_up[i].adjoint())
        }
    }
}

/// One element `V_{n,n'}^{gamma,gamma'}(t)` of the interaction Hamiltonian, J.
pub fn interaction_element(
    n: i64,
    n_prime: i64,
    gamma: usize,
    gamma_prime: usize,
    t: f64,
    cfg: &LaserConfig,
    table: &SpinorTable,
) -> C64 {
    if (n - n_prime).abs() != 1 {
        return ZERO;
    }
    let k = CODATA_2018;
    let (vy, vz) = table.alpha_blocks(n, n_prime);
    let wt = cfg.omega() * t;
    let amp = window(t, cfg) * k.electron_charge() * cfg.e_hat / cfg.k();
    (vy[(gamma, gamma_prime)] * wt.sin() + vz[(gamma, gamma_prime)] * (wt - cfg.eta).sin()) * amp
}

/// Amplitudes `c_n^gamma` over the lattice, mode-major, plus a time stamp in
/// seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracModeState {
    pub lattice: MomentumLattice,
    pub amps: Vec<C64>,
    pub t: f64,
}

impl DiracModeState {
    pub fn zeros(lattice: MomentumLattice) -> Self {
        Self {
            lattice,
            amps: vec![ZERO; 4 * lattice.modes()],
            t: 0.0,
        }
    }

    /// Electron at rest with spin up: `c_0^{+up} = 1`.
    pub fn at_rest_spin_up(lattice: MomentumLattice) -> Self {
        let mut s = Self::zeros(lattice);
        *s.amp_mut(DiracModeLabel::new(0, EnergySign::Positive, Spin::Up)) = ONE;
        s
    }

    pub fn index(&self, label: DiracModeLabel) -> usize {
        4 * self.lattice.slot(label.n) + label.gamma()
    }

    pub fn amp(&self, label: DiracModeLabel) -> C64 {
        self.amps[self.index(label)]
    }

    pub fn amp_mut(&mut self, label: DiracModeLabel) -> &mut C64 {
        let i = self.index(label);
        &mut self.amps[i]
    }
}

/// Time derivative `dc/dt` (1/s) of a Dirac state at time `t` (s).
pub fn dirac_rhs(
    state: &DiracModeState,
    t: f64,
    cfg: &LaserConfig,
    table: &SpinorTable,
) -> DiracModeState {
    let sys = DiracSystem::new(table.clone(), ScaledUnits::new(cfg), cfg.eta);
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
    DiracModeState {
        lattice: state.lattice,
        amps,
        t: state.t,
    }
}

/// `s_z` in units of `hbar`.
pub fn dirac_spin_z(state: &DiracModeState) -> f64 {
    spin_z_of(&state.amps)
}

fn spin_z_of(amps: &[C64]) -> f64 {
    let mut s = 0.0;
    for quad in amps.chunks_exact(4) {
        s += quad[0].norm_sqr() + quad[2].norm_sqr() - quad[1].norm_sqr() - quad[3].norm_sqr();
    }
    0.5 * s
}

/// Dirac ladder as a propagatable system.
#[derive(Debug, Clone)]
pub struct DiracSystem {
    table: SpinorTable,
    units: ScaledUnits,
    eta: f64,
    free: Vec<f64>,
}

impl DiracSystem {
    pub fn new(table: SpinorTable, units: ScaledUnits, eta: f64) -> Self {
        let free = table
            .energy
            .iter()
            .flat_map(|&e| [e, e, -e, -e])
            .collect();
        Self {
            table,
            units,
            eta,
            free,
        }
    }

    pub fn for_config(cfg: &LaserConfig, n_max: usize) -> Self {
        let lattice = MomentumLattice::for_config(cfg, n_max);
        Self::new(build_spinor_table(&lattice), ScaledUnits::new(cfg), cfg.eta)
    }

    pub fn table(&self) -> &SpinorTable {
        &self.table
    }
}

/// Neighbour blocks `V_{n,n+1}(t)` for one instant, in `m c^2`, row-major.
pub struct DiracCoupling {
    up: Vec<[C64; 16]>,
}

impl CouplingOp for DiracCoupling {
    fn apply(&self, c: &[C64], out: &mut [C64]) {
        out.fill(ZERO);
        for (i, m) in self.up.iter().enumerate() {
            let lo = 4 * i;
            let cl: [C64; 4] = c[lo..lo + 4].try_into().unwrap();
            let ch: [C64; 4] = c[lo + 4..lo + 8].try_into().unwrap();
            let mut acc_lo = [ZERO; 4];
            let mut acc_hi = [ZERO; 4];
            for r in 0..4 {
                for s in 0..4 {
                    let v = m[4 * r + s];
                    acc_lo[r] += v * ch[s];
                    acc_hi[s] += v.conj() * cl[r];
                }
            }
            for r in 0..4 {
                out[lo + r] += acc_lo[r];
                out[lo + 4 + r] += acc_hi[r];
            }
        }
    }
}

impl ModeSystem for DiracSystem {
    type Coupling = DiracCoupling;

    fn dim(&self) -> usize {
        self.free.len()
    }

    fn units(&self) -> &ScaledUnits {
        &self.units
    }

    fn free_energies(&self) -> &[f64] {
        &self.free
    }

    fn coupling(&self, phase: f64, w: f64) -> DiracCoupling {
        let g = self.units.coupling() * w;
        let (a, b) = (g * phase.sin(), g * (phase - self.eta).sin());
        let up = self
            .table
            .packed_up
            .iter()
            .map(|p| p.map(|v| C64::new(b * v.re, a * v.im)))
            .collect();
        DiracCoupling { up }
    }

    fn initial_state(&self) -> Vec<C64> {
        DiracModeState::at_rest_spin_up(self.table.lattice).amps
    }

    fn spin_z(&self, c: &[C64]) -> f64 {
        spin_z_of(c)
    }
}
