//! Time-dependent perturbation theory for the rest electron, and the closed
//! forms it reduces to.
//!
//! The interaction is expanded into photon terms `e^{i eta omega t}`,
//! `eta = +-1`. A Dyson term grows linearly in time (a secular term) exactly
//! when its photon indices sum to zero; bounded oscillating remainders are
//! dropped. Energies in the sums are measured in `m c^2`; results are
//! converted to rad/s at the end.

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::constants::CODATA_2018;
use crate::dirac::SpinorTable;
use crate::fields::{intensity, photonic_spin_density, LaserConfig, ScaledUnits};

const I: C64 = C64::new(0.0, 1.0);

/// Denominators closer to zero than this (in `m c^2`) are treated as a
/// multiphoton resonance.
pub const RESONANCE_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PerturbationError {
    #[error("energy denominator {denominator:e} mc^2 vanishes for term {term}")]
    Resonance { term: String, denominator: f64 },
}

/// Pauli basis.
pub fn sigma() -> [Matrix2<C64>; 4] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    [
        Matrix2::new(l, o, o, l),
        Matrix2::new(o, l, l, o),
        Matrix2::new(o, -I, I, o),
        Matrix2::new(l, o, o, -l),
    ]
}

/// Components `(m_1, m_x, m_y, m_z)` of `M = m_1 + m . sigma`.
pub fn pauli_components(m: &Matrix2<C64>) -> [C64; 4] {
    sigma().map(|p| (p * m).trace() / 2.0)
}

/// Closed-form rates for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbativeSummary {
    /// Dirac spin precession, rad/s.
    pub omega: f64,
    /// Global phase rate, rad/s.
    pub omega_phi: f64,
    /// Nonrelativistic Pauli precession, rad/s.
    pub omega_p: f64,
    pub xi: f64,
    /// Field bounds for the given cycle budget, V/m.
    pub e_min: f64,
    pub e_max: f64,
}

impl PerturbativeSummary {
    pub fn new(cfg: &LaserConfig, cycles: f64) -> Self {
        let b = perturbative_bounds(cfg.lambda, cycles);
        Self {
            omega: omega_dirac(cfg),
            omega_phi: omega_phase(cfg),
            omega_p: omega_pauli(cfg),
            xi: harmonicity_ratio(cfg).xi,
            e_min: b.e_min,
            e_max: b.e_max,
        }
    }
}

/// Dirac precession frequency `q^4 E^4 lambda^5 / ((2 pi)^5 hbar^2 m^2 c^5)`
/// for circular polarization, rad/s.
pub fn omega_dirac(cfg: &LaserConfig) -> f64 {
    let k = CODATA_2018;
    let om = (k.q_e * cfg.e_hat).powi(4) * cfg.lambda.powi(5)
        / ((2.0 * PI).powi(5) * (k.hbar * k.m_e).powi(2) * k.c.powi(5));
    let alt = omega_dirac_spin_density(&cfg.with_eta(FRAC_PI_2));
    assert!(
        (om - alt).abs() <= 1e-10 * om.max(f64::MIN_POSITIVE),
        "closed form {om} and spin-density form {alt} disagree"
    );
    om
}

/// The same frequency written through the photonic spin density,
/// `rho_sigma I lambda^4 alpha^2 / (2 pi^2 m^2 c^3)`. Carries the `sin eta`
/// of the spin density.
pub fn omega_dirac_spin_density(cfg: &LaserConfig) -> f64 {
    let k = CODATA_2018;
    let alpha = k.derived_alpha();
    photonic_spin_density(cfg).x * intensity(cfg) * cfg.lambda.powi(4) * alpha * alpha
        / (2.0 * PI * PI * k.m_e * k.m_e * k.c.powi(3))
}

/// Global phase rate `q^4 E^4 lambda^6 / ((2 pi)^6 hbar^3 m c^4)`, rad/s.
pub fn omega_phase(cfg: &LaserConfig) -> f64 {
    let k = CODATA_2018;
    (k.q_e * cfg.e_hat).powi(4) * cfg.lambda.powi(6)
        / ((2.0 * PI).powi(6) * k.hbar.powi(3) * k.m_e * k.c.powi(4))
}

/// Nonrelativistic Pauli precession `q^2 E^2 lambda / (2 pi m^2 c^3)`, rad/s.
pub fn omega_pauli(cfg: &LaserConfig) -> f64 {
    let k = CODATA_2018;
    (k.q_e * cfg.e_hat).powi(2) * cfg.lambda / (2.0 * PI * k.m_e * k.m_e * k.c.powi(3))
}

/// `m c^2 / hbar`: converts rates in `m c^2` to rad/s.
fn rest_rate() -> f64 {
    CODATA_2018.rest_energy() / CODATA_2018.hbar
}

/// 2x2 block `(zeta, zeta')` of the photon-`eta` interaction between modes
/// `n` and `m`, in units of `q E / (2k)`: the interaction is
/// `sum_eta (q E / 2k) X_eta e^{i eta omega t}`.
fn photon_block(
    table: &SpinorTable,
    eta_phase: f64,
    photon: i8,
    n: i64,
    m: i64,
    zeta: i8,
    zeta_m: i8,
) -> Matrix2<C64> {
    let (vy, vz) = table.alpha_blocks(n, m);
    let e = photon as f64;
    let x = (vy + vz * C64::from_polar(1.0, -e * eta_phase)) * (-I * e);
    let r = if zeta > 0 { 0 } else { 2 };
    let c = if zeta_m > 0 { 0 } else { 2 };
    x.fixed_view::<2, 2>(r, c).into_owned()
}

/// Secular coefficient of the second-order propagator, rad/s:
/// `U_2 ~ C e^{-i E_0 t / hbar} t`. Built from the eight `(n, zeta, eta)`
/// fractions in `r`/`t` coefficient form.
pub fn u2_dirac_coefficient(cfg: &LaserConfig, table: &SpinorTable) -> Matrix2<C64> {
    let units = ScaledUnits::new(cfg);
    let kappa = units.kappa;
    let [one, sx, _, _] = sigma();
    let mut c = Matrix2::zeros();
    for n in [1i64, -1] {
        let e = table.energy_scaled(n);
        let tt = table.t_coef(0, n) * table.t_coef(n, 0);
        let rr = table.r_coef(0, n) * table.r_coef(n, 0);
        for photon in [1.0, -1.0] {
            let num = one + sx * C64::from(photon);
            c += num * C64::from(tt / (1.0 + e - photon * kappa));
            c -= num * C64::from(rr / (1.0 - e - photon * kappa));
        }
    }
    // prefactor (q E / 2k)^2 * 2, the 2 from the two sigma products per sign
    let a = units.coupling() / 2.0;
    c * (-I * 2.0 * a * a * rest_rate())
}

/// Simplified second-order coefficient `-i q^2 E^2 / (k^2 m c^2 hbar)`, rad/s.
pub fn u2_dirac_simplified(cfg: &LaserConfig) -> C64 {
    let k = CODATA_2018;
    let wk = cfg.k();
    -I * (k.q_e * cfg.e_hat).powi(2) / (wk * wk * k.rest_energy() * k.hbar)
}

/// Second-order Dirac propagator block `U_2^{++}_{00}(t)` (secular part).
pub fn u2_dirac(t: f64, cfg: &LaserConfig, table: &SpinorTable) -> Matrix2<C64> {
    let phase = C64::from_polar(1.0, -rest_rate() * t);
    u2_dirac_coefficient(cfg, table) * (phase * t)
}

/// One entry of the fourth-order Dyson sum.
#[derive(Debug, Clone, PartialEq)]
pub struct FourthOrderTerm {
    /// Intermediate momenta `(n1, n2, n3)`.
    pub n: [i64; 3],
    /// Intermediate energy signs.
    pub zeta: [i8; 3],
    /// Photon indices, first absorbed/emitted first.
    pub eta: [i8; 4],
    /// Photon indices sum to zero.
    pub secular: bool,
    /// Intermediate state after two photons is the initial state itself;
    /// such terms factorize into lower orders and are excluded.
    pub disconnected: bool,
    /// Contribution to `M` (rad/s); zero unless secular and connected.
    pub coefficient: Matrix2<C64>,
}

/// The six momentum paths `0 -> n1 -> n2 -> n3 -> 0`.
pub const MOMENTUM_PATHS: [[i64; 3]; 6] = [
    [1, 2, 1],
    [1, 0, 1],
    [1, 0, -1],
    [-1, -2, -1],
    [-1, 0, -1],
    [-1, 0, 1],
];

fn signs<const N: usize>(bits: usize) -> [i8; N] {
    std::array::from_fn(|i| if bits >> (N - 1 - i) & 1 == 0 { 1 } else { -1 })
}

/// Enumerates all `6 x 8 x 16` fourth-order terms.
pub fn fourth_order_terms(
    cfg: &LaserConfig,
    table: &SpinorTable,
) -> Result<Vec<FourthOrderTerm>, PerturbationError> {
    assert!(table.lattice().n_max >= 2);
    let units = ScaledUnits::new(cfg);
    let kappa = units.kappa;
    let a = units.coupling() / 2.0;
    let prefactor = a.powi(4) * rest_rate();
    let mut out = Vec::with_capacity(768);
    for path in MOMENTUM_PATHS {
        for zb in 0..8 {
            let zeta: [i8; 3] = signs(zb);
            for eb in 0..16 {
                let eta: [i8; 4] = signs(eb);
                let secular = eta.iter().map(|&e| e as i32).sum::<i32>() == 0;
                let disconnected = path[1] == 0 && zeta[1] == 1 && eta[0] + eta[1] == 0;
                let mut term = FourthOrderTerm {
                    n: path,
                    zeta,
                    eta,
                    secular,
                    disconnected,
                    coefficient: Matrix2::zeros(),
                };
                if secular && !disconnected {
                    let mut acc = 0.0;
                    let mut prod = C64::new(1.0, 0.0);
                    for j in 0..3 {
                        acc += eta[j] as f64;
                        let e = table.energy_scaled(path[j]);
                        let den = 1.0 - zeta[j] as f64 * e - acc * kappa;
                        if den.abs() < RESONANCE_GUARD {
                            return Err(PerturbationError::Resonance {
                                term: format!("n={path:?} zeta={zeta:?} eta={eta:?}"),
                                denominator: den,
                            });
                        }
                        prod *= I / den;
                    }
                    let (n1, n2, n3) = (path[0], path[1], path[2]);
                    let b = |p: i8, n, m, z, zm| photon_block(table, cfg.eta, p, n, m, z, zm);
                    let chain = b(eta[3], 0, n3, 1, zeta[2])
                        * b(eta[2], n3, n2, zeta[2], zeta[1])
                        * b(eta[1], n2, n1, zeta[1], zeta[0])
                        * b(eta[0], n1, 0, zeta[0], 1);
                    // U_4 ~ i M t, so M = chain * prod / i
                    term.coefficient = chain * (prod * -I * prefactor);
                }
                out.push(term);
            }
        }
    }
    Ok(out)
}

/// Secular fourth-order coefficient `M` (rad/s) with
/// `U_4^{++}_{00} ~ i M e^{-i E_0 t / hbar} t`.
pub fn u4_dirac_secular(
    cfg: &LaserConfig,
    table: &SpinorTable,
) -> Result<Matrix2<C64>, PerturbationError> {
    Ok(fourth_order_terms(cfg, table)?
        .iter()
        .map(|t| t.coefficient)
        .sum())
}

/// Second-order nonrelativistic Pauli propagator, exact in `k` and in its
/// small-`k` limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliSecondOrder {
    pub exact: Matrix2<C64>,
    pub limit: Matrix2<C64>,
}

/// Secular coefficients (rad/s) of `U_2 ~ C t` for the nonrelativistic
/// Pauli equation: `(exact, small-k limit)`.
pub fn u2_pauli_coefficients(cfg: &LaserConfig) -> (Matrix2<C64>, Matrix2<C64>) {
    let units = ScaledUnits::new(cfg);
    let kappa = units.kappa;
    let g = units.xi * kappa;
    let omega = cfg.omega();
    let [one, sx, _, _] = sigma();
    // kinetic energy of one photon recoil and the photon energy, m c^2
    let kin = 0.5 * kappa * kappa;
    let exact = (one * C64::from(kin) + sx * C64::from(kappa))
        * (-I * 0.5 * g * g * kappa * omega / (kin * kin - kappa * kappa));
    let op = omega_pauli(cfg);
    let limit = (one * C64::from(op * kappa / 4.0) + sx * C64::from(op / 2.0)) * I;
    (exact, limit)
}

pub fn u2_pauli(t: f64, cfg: &LaserConfig) -> PauliSecondOrder {
    let (exact, limit) = u2_pauli_coefficients(cfg);
    PauliSecondOrder {
        exact: exact * C64::from(t),
        limit: limit * C64::from(t),
    }
}

/// Long-time spin-flip probability `sin^2(Omega t / 2)`.
pub fn spin_flip_probability(t: f64, omega: f64) -> f64 {
    assert!(omega >= 0.0 && t >= 0.0);
    (0.5 * omega * t).sin().powi(2)
}

/// Short-time expansion `Omega^2 t^2 / 4` of [`spin_flip_probability`].
pub fn spin_flip_probability_short(t: f64, omega: f64) -> f64 {
    0.25 * (omega * t).powi(2)
}

/// Range of peak fields for which the precession is harmonic and completes
/// within a cycle budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldBounds {
    pub e_min: f64,
    pub e_max: f64,
    pub nonempty: bool,
}

/// `E_max = (2 pi)^2 c hbar / (|q| lambda^2)` keeps `xi <= 1`;
/// `E_min = ((2 pi)^6 c^6 hbar^2 m^2 / (2 N q^4 lambda^6))^(1/4)` lets a half
/// precession fit into `N` cycles.
pub fn perturbative_bounds(lambda: f64, cycles: f64) -> FieldBounds {
    assert!(lambda > 0.0 && cycles >= 1.0);
    let k = CODATA_2018;
    let tp = 2.0 * PI;
    let e_max = tp * tp * k.c * k.hbar / (k.q_e * lambda * lambda);
    let e_min = (tp.powi(6) * k.c.powi(6) * (k.hbar * k.m_e).powi(2)
        / (2.0 * cycles * k.q_e.powi(4) * lambda.powi(6)))
    .powf(0.25);
    FieldBounds {
        e_min,
        e_max,
        nonempty: e_min <= e_max,
    }
}

/// Wavelength at which `E_min = E_max` for a cycle budget; longer
/// wavelengths have an empty window.
pub fn closing_wavelength(cycles: f64) -> f64 {
    let k = CODATA_2018;
    2.0 * PI * k.hbar / (k.m_e * k.c) * (2.0 * cycles).sqrt()
}

/// Perturbation parameters of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Harmonicity {
    /// `|q| E / (k^2 hbar c)`; precession is sinusoidal for `xi < 1`.
    pub xi: f64,
    /// `|q| E / (2 k m c^2)`, interaction over rest energy.
    pub secondary: f64,
    pub perturbative: bool,
}

pub fn harmonicity_ratio(cfg: &LaserConfig) -> Harmonicity {
    let k = CODATA_2018;
    let xi = ScaledUnits::new(cfg).xi;
    let secondary = k.q_e * cfg.e_hat / (2.0 * cfg.k() * k.rest_energy());
    Harmonicity {
        xi,
        secondary,
        perturbative: xi < 1.0 && secondary < 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::{build_spinor_table, MomentumLattice};
    use proptest::prelude::*;

    fn cfg(e: f64) -> LaserConfig {
        LaserConfig::from_cycles(0.159e-9, e, FRAC_PI_2, 0.0, 1000.0).unwrap()
    }

    fn table(c: &LaserConfig) -> SpinorTable {
        build_spinor_table(&MomentumLattice::for_config(c, 4))
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn reference_values() {
        let c = cfg(2.057e14);
        assert!(rel(omega_dirac(&c), 5.478e14) < 2e-3, "{}", omega_dirac(&c));
        assert!(rel(omega_pauli(&c), 1.229e15) < 2e-3, "{}", omega_pauli(&c));
        assert!((omega_pauli(&c) / omega_dirac(&c) - 2.244).abs() < 0.01);
        assert!((harmonicity_ratio(&c).xi - 0.6675).abs() < 1e-3);
        assert!((harmonicity_ratio(&cfg(3.09e14)).xi - 1.0).abs() < 0.01);
        assert_eq!(omega_phase(&cfg(0.0)), 0.0);
    }

    #[test]
    fn power_laws() {
        let (a, b) = (cfg(1e14), cfg(2e14));
        assert!(rel(omega_dirac(&b), 16.0 * omega_dirac(&a)) < 1e-14);
        assert!(rel(omega_phase(&b), 16.0 * omega_phase(&a)) < 1e-14);
        assert!(rel(omega_pauli(&b), 4.0 * omega_pauli(&a)) < 1e-14);
    }

    proptest! {
        #[test]
        fn closed_form_identities(lambda in 0.05e-9..2e-9f64, e in 1e12..1e15f64) {
            let c = LaserConfig::from_cycles(lambda, e, FRAC_PI_2, 0.0, 10.0).unwrap();
            let u = ScaledUnits::new(&c);
            let w = c.omega();
            prop_assert!(rel(omega_dirac(&c) / w, u.xi.powi(4) * u.kappa.powi(2)) < 1e-12);
            prop_assert!(rel(omega_pauli(&c) / w, (u.xi * u.kappa).powi(2)) < 1e-12);
            prop_assert!(rel(omega_dirac(&c) / omega_pauli(&c), u.xi * u.xi) < 1e-12);
            prop_assert!(rel(omega_phase(&c) / omega_dirac(&c), 1.0 / u.kappa) < 1e-12);
            prop_assert!(rel(omega_dirac_spin_density(&c), omega_dirac(&c)) < 1e-12);
        }

        #[test]
        fn flip_probability_bounded_and_periodic(t in 0.0..1e-12f64, om in 1e12..1e16f64) {
            let p = spin_flip_probability(t, om);
            prop_assert!((0.0..=1.0).contains(&p));
            let q = spin_flip_probability(t + 2.0 * PI / om, om);
            prop_assert!((p - q).abs() < 1e-6);
        }
    }

    #[test]
    fn flip_probability_examples() {
        let om = 5e14;
        assert_eq!(spin_flip_probability(0.0, om), 0.0);
        assert!((spin_flip_probability(PI / om, om) - 1.0).abs() < 1e-15);
        for t in [1e-18, 1e-17, 1e-16] {
            let d = (spin_flip_probability(t, om) - spin_flip_probability_short(t, om)).abs();
            assert!(d <= (om * t).powi(4) / 48.0 + 1e-30);
        }
    }

    #[test]
    fn second_order_dirac_is_diagonal() {
        let c = cfg(2.057e14);
        let t = table(&c);
        let m = u2_dirac_coefficient(&c, &t);
        let [one, x, y, z] = pauli_components(&m);
        assert!(x.norm() < 1e-12 * one.norm());
        assert!(y.norm() == 0.0 && z.norm() == 0.0);
        let s = u2_dirac_simplified(&c);
        assert!((one - s).norm() < 1e-10 * s.norm());
        // ponderomotive energy q^2 E^2 / (k^2 m c^2), averaged over space and time
        let k = CODATA_2018;
        let pond = (k.q_e * c.e_hat / c.k()).powi(2) / k.rest_energy();
        assert!(rel(s.norm(), pond / k.hbar) < 1e-12);
        let u = u2_dirac(3e-17, &c, &t);
        assert!(u[(0, 1)].norm() < 1e-12 * u[(0, 0)].norm());
    }

    #[test]
    fn fourth_order_enumeration() {
        let c = cfg(2.057e14);
        let terms = fourth_order_terms(&c, &table(&c)).unwrap();
        assert_eq!(terms.len(), 768);
        let mut paths: Vec<_> = terms.iter().map(|t| (t.n, t.zeta)).collect();
        paths.dedup();
        assert_eq!(paths.len(), 48);
        assert_eq!(terms.iter().filter(|t| t.secular).count(), 6 * 8 * 6);
        assert_eq!(terms.iter().filter(|t| t.secular && t.disconnected).count(), 4 * 4 * 4);
    }

    #[test]
    fn fourth_order_precession() {
        let c = cfg(2.057e14);
        let m = u4_dirac_secular(&c, &table(&c)).unwrap();
        let [one, x, y, z] = pauli_components(&m);
        let om = omega_dirac(&c);
        assert!(rel(x.re, om / 2.0) < 1e-2, "{x} vs {}", om / 2.0);
        assert!(x.im.abs() < 1e-10 * x.re);
        assert!(y.norm() < 1e-10 * x.norm() && z.norm() < 1e-10 * x.norm());
        // the identity part is a quarter of the closed-form phase rate
        assert!(rel(one.re, omega_phase(&c) / 4.0) < 1e-2);
        let gen = (m - m.adjoint()) * (I / 2.0);
        let [_, _, gy, gz] = pauli_components(&gen);
        assert!(gy.norm() < 1e-10 * x.norm() && gz.norm() < 1e-10 * x.norm());
    }

    #[test]
    fn pauli_second_order() {
        let c = cfg(2.057e14);
        let (exact, limit) = u2_pauli_coefficients(&c);
        let [_, ex, _, _] = pauli_components(&exact);
        let [_, lx, _, _] = pauli_components(&limit);
        let op = omega_pauli(&c);
        assert!((lx - I * op / 2.0).norm() < 1e-12 * op);
        let kappa = ScaledUnits::new(&c).kappa;
        assert!((ex - lx).norm() / lx.norm() < kappa * kappa);
        assert!((ex - lx).norm() / lx.norm() < 1e-3);
        let z = u2_pauli(1e-15, &cfg(0.0));
        assert_eq!(z.exact, Matrix2::zeros());
        assert_eq!(z.limit, Matrix2::zeros());
    }

    #[test]
    fn bounds() {
        let b = perturbative_bounds(0.159e-9, 5000.0);
        assert!(rel(b.e_max, 3.08e14) < 5e-3, "{}", b.e_max);
        assert!(b.nonempty);
        assert!(b.e_min > 2.0e14 && b.e_min < b.e_max, "{}", b.e_min);
        let c = perturbative_bounds(0.159e-9, 5000.0 * 16.0);
        assert!(rel(c.e_min, b.e_min / 2.0) < 1e-14);
        assert_eq!(c.e_max, b.e_max);
        let lc = closing_wavelength(5000.0);
        let at = perturbative_bounds(lc, 5000.0);
        assert!(rel(at.e_min, at.e_max) < 1e-12);
        assert!(!perturbative_bounds(lc * 1.01, 5000.0).nonempty);
        assert!(perturbative_bounds(lc * 0.99, 5000.0).nonempty);
    }

    #[test]
    fn harmonicity_scaling() {
        let h1 = harmonicity_ratio(&cfg(1e14));
        let h2 = harmonicity_ratio(&cfg(2e14));
        assert!(rel(h2.xi, 2.0 * h1.xi) < 1e-14);
        let long = LaserConfig::from_cycles(0.318e-9, 1e14, FRAC_PI_2, 0.0, 10.0).unwrap();
        assert!(rel(harmonicity_ratio(&long).xi, 4.0 * h1.xi) < 1e-14);
        assert!(h1.secondary < 1.0 && h1.perturbative);
    }
}
