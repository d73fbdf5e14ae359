//! Laser configuration, unit scaling and the electromagnetic fields of two
//! counterpropagating elliptically polarized beams of opposite helicity.
//!
//! Everything here takes SI inputs. The dynamics modules only ever see the
//! dimensionless pair [`ScaledUnits`] (`kappa`, `xi`), so this is the one
//! place where SI magnitudes are converted.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;
use thiserror::Error;

use crate::constants::{PhysicalConstants, CODATA_2018};

/// Rejected laser or run parameter. The message always names the field.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Cartesian 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// The full experiment definition, SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaserConfig {
    /// Wavelength, m.
    pub lambda: f64,
    /// Peak electric field of each beam, V/m.
    pub e_hat: f64,
    /// Ellipticity phase, rad, in (-pi, pi].
    pub eta: f64,
    /// Turn-on (and turn-off) duration, s.
    pub delta_t: f64,
    /// Total interaction time, s.
    pub t_total: f64,
}

impl LaserConfig {
    pub fn new(
        lambda: f64,
        e_hat: f64,
        eta: f64,
        delta_t: f64,
        t_total: f64,
    ) -> Result<Self, ConfigError> {
        let cfg = Self {
            lambda,
            e_hat,
            eta,
            delta_t,
            t_total,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds a configuration with ramp and total time given in laser cycles.
    pub fn from_cycles(
        lambda: f64,
        e_hat: f64,
        eta: f64,
        delta_t_cycles: f64,
        t_cycles: f64,
    ) -> Result<Self, ConfigError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(ConfigError::new("lambda", "must be positive and finite"));
        }
        let period = lambda / CODATA_2018.c;
        Self::new(
            lambda,
            e_hat,
            eta,
            delta_t_cycles * period,
            t_cycles * period,
        )
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(ConfigError::new("lambda", "must be positive and finite"));
        }
        if !(self.e_hat.is_finite() && self.e_hat >= 0.0) {
            return Err(ConfigError::new("E_hat", "must be finite and >= 0"));
        }
        if !(self.eta.is_finite() && self.eta > -PI && self.eta <= PI) {
            return Err(ConfigError::new(
                "eta",
                format!("{} is outside the range (-pi, pi]", self.eta),
            ));
        }
        if !(self.delta_t.is_finite() && self.delta_t >= 0.0) {
            return Err(ConfigError::new("delta_T", "must be finite and >= 0"));
        }
        if !(self.t_total.is_finite() && self.t_total > 0.0) {
            return Err(ConfigError::new("T_total", "must be positive and finite"));
        }
        if 2.0 * self.delta_t > self.t_total * (1.0 + 1e-12) {
            return Err(ConfigError::new(
                "delta_T",
                "turn-on plus turn-off (2 delta_T) exceeds T_total",
            ));
        }
        Ok(())
    }

    /// Wave number `k = 2 pi / lambda`, 1/m.
    pub fn k(&self) -> f64 {
        2.0 * PI / self.lambda
    }

    /// Angular frequency `omega = k c`, rad/s.
    pub fn omega(&self) -> f64 {
        self.k() * CODATA_2018.c
    }

    /// One laser period, s.
    pub fn period(&self) -> f64 {
        self.lambda / CODATA_2018.c
    }

    pub fn delta_t_cycles(&self) -> f64 {
        self.delta_t / self.period()
    }

    pub fn t_cycles(&self) -> f64 {
        self.t_total / self.period()
    }

    /// Same configuration with a different peak field.
    pub fn with_e_hat(&self, e_hat: f64) -> Self {
        Self { e_hat, ..*self }
    }

    /// Same configuration with a different ellipticity.
    pub fn with_eta(&self, eta: f64) -> Self {
        Self { eta, ..*self }
    }

    /// Same configuration with a different total time (in cycles).
    pub fn with_t_cycles(&self, t_cycles: f64) -> Self {
        Self {
            t_total: t_cycles * self.period(),
            ..*self
        }
    }
}

/// Dimensionless description of a laser configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledUnits {
    /// Photon momentum in Compton units, `hbar k / (m c)`.
    pub kappa: f64,
    /// Harmonicity ratio `|q| E_hat / (k^2 hbar c)`.
    pub xi: f64,
    /// One laser period, s.
    pub time_unit: f64,
}

impl ScaledUnits {
    pub fn new(cfg: &LaserConfig) -> Self {
        Self::with_constants(cfg, &CODATA_2018)
    }

    pub fn with_constants(cfg: &LaserConfig, k: &PhysicalConstants) -> Self {
        let wk = cfg.k();
        Self {
            kappa: k.hbar * wk / (k.m_e * k.c),
            xi: k.q_e * cfg.e_hat / (wk * wk * k.hbar * k.c),
            time_unit: 2.0 * PI / (wk * k.c),
        }
    }

    /// Recovers `(lambda, E_hat)` from `(kappa, xi)`.
    pub fn to_lambda_e_hat(&self) -> (f64, f64) {
        let k = CODATA_2018;
        let wk = self.kappa * k.m_e * k.c / k.hbar;
        (2.0 * PI / wk, self.xi * wk * wk * k.hbar * k.c / k.q_e)
    }

    /// Photon energy `hbar omega` in units of `m c^2`. Equal to `kappa`.
    pub fn photon_energy(&self) -> f64 {
        self.kappa
    }

    /// Signed single-photon coupling `q E_hat / k` in units of `m c^2`.
    pub fn coupling(&self) -> f64 {
        -self.xi * self.kappa
    }

    /// Converts an energy in `m c^2` to an angular frequency in rad per
    /// laser cycle.
    pub fn energy_to_rate(&self) -> f64 {
        2.0 * PI / self.kappa
    }
}

/// Smooth sin^2 turn-on/turn-off envelope in whatever time unit `ramp` and
/// `total` share.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub ramp: f64,
    pub total: f64,
}

impl Window {
    pub fn at(&self, t: f64) -> f64 {
        if !(0.0..=self.total).contains(&t) {
            return 0.0;
        }
        if self.ramp <= 0.0 {
            return if t > 0.0 && t < self.total { 1.0 } else { 0.0 };
        }
        if t < self.ramp {
            (FRAC_PI_2 * t / self.ramp).sin().powi(2)
        } else if t <= self.total - self.ramp {
            1.0
        } else {
            (FRAC_PI_2 * (self.total - t) / self.ramp).sin().powi(2)
        }
    }

    /// True when the envelope is identically one on `[a, b]`.
    pub fn is_flat_on(&self, a: f64, b: f64) -> bool {
        if self.ramp <= 0.0 {
            a > 0.0 && b < self.total
        } else {
            a >= self.ramp && b <= self.total - self.ramp
        }
    }
}

/// Envelope `w(t)` with `t` in seconds; zero outside `[0, T_total]`.
pub fn window(t: f64, cfg: &LaserConfig) -> f64 {
    Window {
        ramp: cfg.delta_t,
        total: cfg.t_total,
    }
    .at(t)
}

/// Total electric (V/m) and magnetic (T) field of the standing wave.
pub fn standing_fields(x: f64, t: f64, cfg: &LaserConfig) -> (Vec3, Vec3) {
    let c = CODATA_2018.c;
    let (kx, wt) = (cfg.k() * x, cfg.omega() * t);
    let e = Vec3::new(0.0, wt.cos(), (wt - cfg.eta).cos()) * (2.0 * cfg.e_hat * kx.cos());
    let b = Vec3::new(0.0, -(wt - cfg.eta).sin(), wt.sin()) * (2.0 * cfg.e_hat / c * kx.sin());
    (e, b)
}

/// Electric and magnetic field of a single beam; `beam` is 1 (travelling
/// towards +x) or 2 (towards -x).
pub fn beam_fields(beam: u8, x: f64, t: f64, cfg: &LaserConfig) -> (Vec3, Vec3) {
    let s = beam_sign(beam);
    let c = CODATA_2018.c;
    let ph = cfg.k() * x - s * cfg.omega() * t;
    let e = Vec3::new(0.0, ph.cos(), (ph + s * cfg.eta).cos()) * cfg.e_hat;
    let b = Vec3::new(0.0, -s * (ph + s * cfg.eta).cos(), s * ph.cos()) * (cfg.e_hat / c);
    (e, b)
}

/// Coulomb-gauge magnetic (`a*`) and electric (`c*`) vector potentials of
/// the two beams, V s/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPotentials {
    pub a1: Vec3,
    pub a2: Vec3,
    pub c1: Vec3,
    pub c2: Vec3,
}

fn beam_sign(beam: u8) -> f64 {
    match beam {
        1 => 1.0,
        2 => -1.0,
        _ => panic!("beam index must be 1 or 2, got {beam}"),
    }
}

fn beam_a(s: f64, x: f64, t: f64, cfg: &LaserConfig) -> Vec3 {
    let ph = cfg.k() * x - s * cfg.omega() * t;
    Vec3::new(0.0, -s * ph.sin(), -s * (ph + s * cfg.eta).sin()) * (-cfg.e_hat / cfg.omega())
}

fn beam_c(s: f64, x: f64, t: f64, cfg: &LaserConfig) -> Vec3 {
    let ph = cfg.k() * x - s * cfg.omega() * t;
    Vec3::new(0.0, (ph + s * cfg.eta).sin(), -ph.sin()) * (-cfg.e_hat / cfg.omega())
}

pub fn beam_potentials(x: f64, t: f64, cfg: &LaserConfig) -> BeamPotentials {
    BeamPotentials {
        a1: beam_a(1.0, x, t, cfg),
        a2: beam_a(-1.0, x, t, cfg),
        c1: beam_c(1.0, x, t, cfg),
        c2: beam_c(-1.0, x, t, cfg),
    }
}

/// Ramped vector potential of the standing wave.
pub fn combined_potential_a(x: f64, t: f64, cfg: &LaserConfig) -> Vec3 {
    let wt = cfg.omega() * t;
    let amp = -2.0 * window(t, cfg) * cfg.e_hat / cfg.omega() * (cfg.k() * x).cos();
    Vec3::new(0.0, wt.sin(), (wt - cfg.eta).sin()) * amp
}

/// Spin density of the whole setup, J s/m^3. Only the x-component is
/// nonzero.
pub fn photonic_spin_density(cfg: &LaserConfig) -> Vec3 {
    let k = CODATA_2018;
    Vec3::new(
        k.eps0 * cfg.e_hat * cfg.e_hat * cfg.lambda * cfg.eta.sin() / (PI * k.c),
        0.0,
        0.0,
    )
}

/// Spin density carried by one beam; half of [`photonic_spin_density`].
pub fn beam_spin_density(cfg: &LaserConfig) -> Vec3 {
    photonic_spin_density(cfg) * 0.5
}

/// Intensity of each beam, W/m^2.
pub fn intensity(cfg: &LaserConfig) -> f64 {
    let k = CODATA_2018;
    k.eps0 * k.c * cfg.e_hat * cfg.e_hat
}
