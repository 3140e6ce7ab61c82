//! Response-level invariants: thermality of the undeformed field, scaling, the
//! Ω → 0 end, regulator-sign independence and the agreement of both methods.

use std::f64::consts::PI;

use unruh_core::quadrature::richardson;
use unruh_core::response::{
    calibration_constant, response_adiabatic, response_adiabatic_sweep, response_finite_sigma_sweep, AdiabaticConfig,
    Method, QuadConfig, ResponseStatus, SwitchingProfile,
};
use unruh_core::{find_spec, Accel, Complex64, Error, PullbackModel, WSign};

fn accel(a: f64) -> Accel {
    Accel::new(a).unwrap()
}

/// Closed form of the adiabatic residue formula for the undeformed field.
fn thermal(omega: f64, a: f64) -> f64 {
    let x = 2.0 * PI * omega / a;
    omega / (4.0 * PI * x.exp_m1())
}

fn row(id: &str, ell: f64) -> PullbackModel {
    PullbackModel::deformed(accel(1.0), find_spec(id).unwrap().with_ell(ell))
}

#[test]
fn undeformed_matches_closed_form_at_several_accelerations() {
    let cfg = AdiabaticConfig::default();
    for a in [0.5, 1.0, 3.0] {
        let omegas = [-2.0 * a, -0.5 * a, 0.25 * a, a, 2.0 * a];
        let rs = response_adiabatic_sweep(&PullbackModel::undeformed(accel(a)), &omegas, &cfg).unwrap();
        for r in &rs {
            let v = r.converged_value().unwrap();
            let want = thermal(r.omega, a);
            assert!(((v - want) / want).abs() < 1e-5, "a={a} Ω={}: {v} vs {want}", r.omega);
            assert!(r.raw_imag.abs() <= r.abs_error, "imaginary part {} above error {}", r.raw_imag, r.abs_error);
            assert_eq!(r.method, Method::Residue);
            assert_eq!(r.sigma, None);
        }
    }
}

#[test]
fn response_scales_with_acceleration() {
    // 𝓕_a(Ω) = a·𝓕_1(Ω/a) for the massless field.
    let cfg = AdiabaticConfig::default();
    let one = response_adiabatic_sweep(&PullbackModel::undeformed(accel(1.0)), &[-0.7, 0.7], &cfg).unwrap();
    let two = response_adiabatic_sweep(&PullbackModel::undeformed(accel(2.0)), &[-1.4, 1.4], &cfg).unwrap();
    for (x, y) in one.iter().zip(&two) {
        let (x, y) = (x.value.unwrap(), y.value.unwrap());
        assert!((y / (2.0 * x) - 1.0).abs() < 1e-6, "{y} vs 2·{x}");
    }
}

#[test]
fn small_gaps_stay_bounded() {
    let cfg = AdiabaticConfig { allow_small_omega: true, ..AdiabaticConfig::default() };
    let model = PullbackModel::undeformed(accel(1.0));
    let limit = 1.0 / (8.0 * PI * PI);
    for omega in [1e-3, -1e-3, 1e-4, -1e-4] {
        let r = response_adiabatic(&model, omega, &cfg).unwrap();
        let v = r.converged_value().unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(((v - thermal(omega, 1.0)) / thermal(omega, 1.0)).abs() < 1e-3, "Ω={omega}: {v}");
        assert!((v / limit - 1.0).abs() < 0.01, "Ω={omega}: {v} not near {limit}");
    }
    // Without the opt-in the public floor applies.
    let strict = AdiabaticConfig::default();
    assert!(matches!(response_adiabatic(&model, 1e-4, &strict), Err(Error::InvalidParameter(_))));
}

#[test]
fn preserving_rows_are_positive() {
    let cfg = AdiabaticConfig::default();
    for id in ["1", "2", "5", "8"] {
        for r in response_adiabatic_sweep(&row(id, 0.1), &[-1.0, 0.5], &cfg).unwrap() {
            assert_eq!(r.status, ResponseStatus::Converged, "row {id}");
            let v = r.value.unwrap();
            assert!(v >= -r.abs_error, "row {id} Ω={}: {v} ± {}", r.omega, r.abs_error);
        }
    }
}

#[test]
fn regulator_sign_in_w_is_irrelevant() {
    let cfg = AdiabaticConfig::default();
    for id in ["5", "6", "7", "8"] {
        let plus = row(id, 0.1);
        let minus = plus.with_reg(plus.reg.with_w_sign(WSign::Minus));
        let p = response_adiabatic(&plus, 1.0, &cfg).unwrap();
        let m = response_adiabatic(&minus, 1.0, &cfg).unwrap();
        assert_eq!(p.status, m.status, "row {id}");
        let (x, y) = (p.value.unwrap(), m.value.unwrap());
        assert!((x - y).abs() <= 1e-4 * x.abs().max(y.abs()), "row {id}: {x} vs {y}");
    }
}

#[test]
fn methods_agree_up_to_calibration() {
    let c = calibration_constant();
    assert!((c - 2.0).abs() < 1e-3, "calibration {c}");
    let cfg = AdiabaticConfig::default();
    let sw = SwitchingProfile::gaussian(80.0).unwrap();
    let omegas = [0.5, 1.0];
    for model in [PullbackModel::undeformed(accel(1.0)), row("1", 0.1), row("5", 0.1)] {
        let res = response_adiabatic_sweep(&model, &omegas, &cfg).unwrap();
        let quad = response_finite_sigma_sweep(&model, &omegas, &sw, &QuadConfig::default()).unwrap();
        for (r, q) in res.iter().zip(&quad) {
            assert_eq!(q.method, Method::Quadrature);
            let ratio = q.value.unwrap() / (c * r.value.unwrap());
            assert!((ratio - 1.0).abs() < 0.02, "{} Ω={}: ratio {ratio}", model.id(), r.omega);
        }
    }
}

#[test]
fn extrapolated_quadrature_satisfies_detailed_balance() {
    // No calibration enters: the constant cancels in 𝓕(−Ω)/𝓕(Ω).
    let model = PullbackModel::undeformed(accel(1.0));
    let sigmas = [20.0, 40.0, 80.0];
    let mut ladder: Vec<[f64; 2]> = Vec::new();
    for s in sigmas {
        let sw = SwitchingProfile::gaussian(s).unwrap();
        let rs = response_finite_sigma_sweep(&model, &[-1.0, 1.0], &sw, &QuadConfig::default()).unwrap();
        ladder.push([rs[0].value.unwrap(), rs[1].value.unwrap()]);
    }
    let steps: Vec<f64> = sigmas.iter().map(|s| 1.0 / s).collect();
    let extrapolate = |k: usize| richardson(&steps, &ladder.iter().map(|v| Complex64::new(v[k], 0.0)).collect::<Vec<_>>()).0.re;
    let gap = (extrapolate(0) / extrapolate(1)).ln() - 2.0 * PI;
    // Bounded by the quadrature's own relative target.
    assert!(gap.abs() < QuadConfig::default().rel_tol, "gap {gap}");
    // The finite-width gap at σa = 80 is within the coarse bound and shrinks with σ.
    let raw: Vec<f64> = ladder.iter().map(|v| ((v[0] / v[1]).ln() - 2.0 * PI).abs()).collect();
    assert!(raw[2] < 0.01);
    assert!(raw.windows(2).all(|w| w[1] < w[0]), "{raw:?}");
}
