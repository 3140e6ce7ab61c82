//! Interval and pull-back invariants over arbitrary accelerations.

use std::f64::consts::PI;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use unruh_core::kinematics::interval_components;
use unruh_core::{catalog, Accel, Complex64, PullbackModel, RegulatorPolicy, WZPoint};

fn config(cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..Config::default() }
}

fn close(x: Complex64, y: Complex64, rel: f64) -> bool {
    (x - y).norm() <= rel * x.norm().max(y.norm()).max(1e-300)
}

proptest! {
    #![proptest_config(config(500))]

    #[test]
    fn interval_is_minkowski(a in 0.05f64..20.0, w in -3.0f64..3.0, zr in -3.0f64..3.0, zi in -6.0f64..6.0) {
        let acc = Accel::new(a).unwrap();
        let p = WZPoint::new(Complex64::new(w / a, 0.0), Complex64::new(zr / a, zi / a));
        let ic = interval_components(acc, p, &RegulatorPolicy::none());
        let m = ic.dx * ic.dx - ic.dt * ic.dt;
        prop_assert!(close(m, ic.dx2, 1e-9), "{} vs {}", m, ic.dx2);
    }

    #[test]
    fn components_rescale_with_acceleration(a in 0.05f64..20.0, w in -3.0f64..3.0, zr in -3.0f64..3.0, zi in -6.0f64..6.0) {
        let one = Accel::new(1.0).unwrap();
        let acc = Accel::new(a).unwrap();
        let scaled = interval_components(acc, WZPoint::new(Complex64::new(w / a, 0.0), Complex64::new(zr / a, zi / a)), &RegulatorPolicy::none());
        let unit = interval_components(one, WZPoint::new(Complex64::new(w, 0.0), Complex64::new(zr, zi)), &RegulatorPolicy::none());
        prop_assert!(close(scaled.dt * a, unit.dt, 1e-12));
        prop_assert!(close(scaled.dx * a, unit.dx, 1e-12));
        prop_assert!(close(scaled.dx2 * (a * a), unit.dx2, 1e-12));
    }

    #[test]
    fn half_period_flips_and_full_period_restores(a in 0.05f64..20.0, w in -3.0f64..3.0, zr in -3.0f64..3.0, zi in -1.0f64..1.0) {
        let acc = Accel::new(a).unwrap();
        let reg = RegulatorPolicy::none();
        let at = |shift: f64| {
            interval_components(acc, WZPoint::new(Complex64::new(w / a, 0.0), Complex64::new(zr / a, (zi + shift) / a)), &reg)
        };
        let (base, half, full) = (at(0.0), at(2.0 * PI), at(4.0 * PI));
        prop_assert!(close(half.dt, -base.dt, 1e-9));
        prop_assert!(close(half.dx2, base.dx2, 1e-9));
        prop_assert!(close(full.dt, base.dt, 1e-9));
    }
}

proptest! {
    #![proptest_config(config(200))]

    /// Every catalog row is a function of `Δt` and `ΔX²`, both 4πi/a-periodic in z.
    #[test]
    fn pullback_is_strip_periodic(row in 0usize..8, a in 0.2f64..5.0, w in -2.0f64..2.0, zr in 0.2f64..2.0, zi in -1.0f64..1.0) {
        let acc = Accel::new(a).unwrap();
        let spec = catalog()[row].clone();
        let model = PullbackModel::deformed(acc, spec).with_reg(RegulatorPolicy::none());
        let p = WZPoint::new(Complex64::new(w / a, 0.0), Complex64::new(zr / a, zi / a));
        let q = WZPoint::new(p.w, p.z + Complex64::new(0.0, 4.0 * PI / a));
        match (model.eval(p), model.eval(q)) {
            (Ok(x), Ok(y)) => prop_assert!(close(x, y, 1e-7), "row {}: {} vs {}", row + 1, x, y),
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "row {}: {:?} vs {:?}", row + 1, x, y),
        }
    }

    /// `W₀` scales as a² at fixed dimensionless arguments.
    #[test]
    fn undeformed_scales_with_acceleration(a in 0.05f64..20.0, w in -3.0f64..3.0, zr in 0.1f64..3.0, zi in -1.0f64..1.0) {
        let one = PullbackModel::undeformed(Accel::new(1.0).unwrap()).with_reg(RegulatorPolicy::none());
        let scaled = PullbackModel::undeformed(Accel::new(a).unwrap()).with_reg(RegulatorPolicy::none());
        let x = scaled.eval(WZPoint::new(Complex64::new(w / a, 0.0), Complex64::new(zr / a, zi / a))).unwrap();
        let y = one.eval(WZPoint::new(Complex64::new(w, 0.0), Complex64::new(zr, zi))).unwrap();
        prop_assert!(close(x, y * (a * a), 1e-10));
    }
}
