//! CODATA 2018 values used throughout the crate.

use serde::Serialize;

/// Physical constants in SI units, frozen to CODATA 2018.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// Speed of light in vacuum, m/s.
    pub c: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Electron mass, kg.
    pub m_e: f64,
    /// Elementary charge magnitude, C.
    pub q_e: f64,
    /// Vacuum permittivity, F/m.
    pub eps0: f64,
    /// Fine-structure constant.
    pub alpha_el: f64,
}

/// The single constants table.
pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    c: 299_792_458.0,
    hbar: 1.054_571_817e-34,
    m_e: 9.109_383_701_5e-31,
    q_e: 1.602_176_634e-19,
    eps0: 8.854_187_812_8e-12,
    alpha_el: 7.297_352_569_3e-3,
};

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA_2018
    }
}

impl PhysicalConstants {
    /// Signed electron charge `q = -e`.
    pub fn electron_charge(&self) -> f64 {
        -self.q_e
    }

    /// Electron rest energy `m c^2` in joules.
    pub fn rest_energy(&self) -> f64 {
        self.m_e * self.c * self.c
    }

    /// Fine-structure constant recomputed from the other entries.
    pub fn derived_alpha(&self) -> f64 {
        self.q_e * self.q_e / (4.0 * std::f64::consts::PI * self.eps0 * self.hbar * self.c)
    }

    /// Hex fingerprint over the bit patterns of every constant.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for v in [self.c, self.hbar, self.m_e, self.q_e, self.eps0, self.alpha_el] {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_is_consistent_with_the_other_constants() {
        let k = CODATA_2018;
        let rel = (k.derived_alpha() - k.alpha_el).abs() / k.alpha_el;
        assert!(rel < 1e-9, "relative mismatch {rel}");
    }

    #[test]
    fn all_positive() {
        let k = CODATA_2018;
        for v in [k.c, k.hbar, k.m_e, k.q_e, k.eps0, k.alpha_el] {
            assert!(v > 0.0);
        }
        assert!(k.electron_charge() < 0.0);
    }

    #[test]
    fn fingerprint_is_stable() {
        assert_eq!(CODATA_2018.fingerprint(), CODATA_2018.fingerprint());
        assert_eq!(CODATA_2018.fingerprint().len(), 16);
    }
}
