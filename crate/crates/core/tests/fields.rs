//! Maxwell consistency of the beam fields and potentials, checked by central
//! differences.

use lightspin::constants::CODATA_2018;
use lightspin::fields::{
    beam_fields, beam_potentials, photonic_spin_density, standing_fields, LaserConfig, Vec3,
};
use proptest::prelude::*;

fn cfg(eta: f64) -> LaserConfig {
    LaserConfig::new(0.159e-9, 2.057e14, eta, 0.0, 1e-15).unwrap()
}

/// `d/dx` of a field depending on `x` only, returned as `(0, -dF_z, dF_y)`.
fn curl(f: impl Fn(f64) -> Vec3, x: f64, h: f64) -> Vec3 {
    let d = (f(x + h) - f(x - h)) * (0.5 / h);
    Vec3::new(0.0, -d.z, d.y)
}

fn ddt(f: impl Fn(f64) -> Vec3, t: f64, h: f64) -> Vec3 {
    (f(t + h) - f(t - h)) * (0.5 / h)
}

fn close(a: Vec3, b: Vec3, scale: f64) -> bool {
    (a - b).norm() <= 1e-6 * scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn potentials_generate_fields(eta in -3.1f64..3.1, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let c = cfg(eta);
        let (x, t) = (u * c.lambda, v * c.period());
        let hx = 1e-6 * c.lambda;
        let ht = 1e-6 * c.period();
        let light = CODATA_2018.c;
        for beam in [1u8, 2] {
            let pick = |p: lightspin::fields::BeamPotentials| if beam == 1 { (p.a1, p.c1) } else { (p.a2, p.c2) };
            let (e, b) = beam_fields(beam, x, t, &c);
            let e_scale = c.e_hat;
            let b_scale = c.e_hat / light;
            // E = -dA/dt, B = curl A
            prop_assert!(close(e, ddt(|s| pick(beam_potentials(x, s, &c)).0, t, ht) * -1.0, e_scale));
            prop_assert!(close(b, curl(|y| pick(beam_potentials(y, t, &c)).0, x, hx), b_scale));
            // E = -c curl C, B = -dC/dt / c
            prop_assert!(close(e, curl(|y| pick(beam_potentials(y, t, &c)).1, x, hx) * -light, e_scale));
            prop_assert!(close(b, ddt(|s| pick(beam_potentials(x, s, &c)).1, t, ht) * (-1.0 / light), b_scale));
        }
    }

    #[test]
    fn spin_density_identity_holds_pointwise(eta in -3.1f64..3.1, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let c = cfg(eta);
        let (x, t) = (u * c.lambda, v * c.period());
        let k = CODATA_2018;
        let mut total = Vec3::ZERO;
        for beam in [1u8, 2] {
            let p = beam_potentials(x, t, &c);
            let (a, cc) = if beam == 1 { (p.a1, p.c1) } else { (p.a2, p.c2) };
            let (e, b) = beam_fields(beam, x, t, &c);
            total = total + (e.cross(a) + b.cross(cc) * k.c) * (0.5 * k.eps0);
        }
        let expect = photonic_spin_density(&c);
        let scale = photonic_spin_density(&cfg(std::f64::consts::FRAC_PI_2)).x;
        prop_assert!((total - expect).norm() <= 1e-10 * scale, "{:?} vs {:?}", total, expect);
    }

    #[test]
    fn standing_wave_is_sum_of_beams(eta in -3.1f64..3.1, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let c = cfg(eta);
        let (x, t) = (u * c.lambda, v * c.period());
        let (e1, b1) = beam_fields(1, x, t, &c);
        let (e2, b2) = beam_fields(2, x, t, &c);
        let (e, b) = standing_fields(x, t, &c);
        prop_assert!((e1 + e2 - e).norm() <= 1e-12 * c.e_hat);
        prop_assert!((b1 + b2 - b).norm() <= 1e-12 * c.e_hat / CODATA_2018.c);
    }
}
