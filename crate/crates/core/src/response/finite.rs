//! Brute-force evaluation of the finite-σ response
//! `𝓕(Ω,σ) = (1/σ)∬ dτ″dτ′ χ(τ″/σ)χ(τ′/σ) W e^{−iΩ(τ″−τ′)}`
//! in `(w, z)` coordinates.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::strip::{pole_map, scan_strip, ScanConfig};
use super::{adiabatic::calibration_constant, check_omega, Method, ResponseResult, ResponseStatus, SwitchingProfile};
use crate::analysis::Pole;
use crate::error::{Error, Result};
use crate::kinematics::WZPoint;
use crate::quadrature::{gl16, graded_panels, integrate_adaptive, Tolerance};
use crate::wightman::PullbackModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Target relative error of the final value.
    pub rel_tol: f64,
    /// The z-integral runs over `|z| ≤ z_extent/a`.
    pub z_extent: f64,
    /// The w-integral runs over `|w| ≤ w_extent·2σ`.
    pub w_extent: f64,
    pub eps_extrapolation: bool,
    pub scan: ScanConfig,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-4, z_extent: 60.0, w_extent: 7.0, eps_extrapolation: true, scan: ScanConfig::default() }
    }
}

/// Breakpoints for the z-integral: the ends, the origin, and a geometric fan
/// around the real part of every pole lying within `1/a` of the real axis.
fn z_breakpoints(poles: &[Pole], zmax: f64, a: f64, eps: f64) -> Vec<f64> {
    let mut pts = vec![-zmax, 0.0, zmax];
    for p in poles.iter().filter(|p| p.position.im.abs() < 1.0 / a) {
        let d = p.position.im.abs().max(eps);
        let x = p.position.re;
        pts.push(x);
        let mut s = d;
        while s < 1.0 / a {
            pts.push(x - s);
            pts.push(x + s);
            s *= 8.0;
        }
    }
    pts.retain(|x| x.abs() <= zmax);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() < 1e-15 * zmax);
    pts
}

/// `G(w) = ∫ dz e^{−z²/4σ²} W(w, z) e^{−iΩz}` for several Ω.
fn z_integral(model: &PullbackModel, w: f64, omegas: &[f64], sigma: f64, breaks: &[f64], tol: &Tolerance) -> Result<Vec<Complex64>> {
    omegas
        .iter()
        .map(|&om| {
            let f = |z: f64| {
                let v = model
                    .eval(WZPoint::real(w, z))
                    .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                v * (Complex64::new(-z * z / (4.0 * sigma * sigma), -om * z)).exp()
            };
            integrate_adaptive(f, breaks, *tol).map(|q| q.value)
        })
        .collect()
}

/// Raw complex `𝓕(Ω,σ)` at the model's regulator.
pub(super) fn finite_raw(model: &PullbackModel, omegas: &[f64], sw: &SwitchingProfile, cfg: &QuadConfig) -> Result<Vec<Complex64>> {
    let a = model.a.get();
    let sigma = sw.sigma;
    let zmax = cfg.z_extent / a;
    // Two orders below the target: tighter inner tolerances run into the roundoff
    // of an integrand peaking at ~1/ε² while the integral cancels to ~e^{−2πΩ/a}.
    let tol = Tolerance { abs: 0.0, rel: cfg.rel_tol * 1e-2, max_intervals: 50_000, min_width: model.reg.eps_z * 1e-6 };
    // χ(y) = π^{−1/4}e^{−y²/2} turns the switching product into π^{−1/2}e^{−(w²+z²)/4σ²};
    // with the Jacobian 1/2 and the prefactor 1/σ the w-integral carries 1/(2σ√π).
    let chi2 = sw.norm * sw.norm * PI.sqrt();
    if model.is_stationary() {
        let poles = scan_strip(model, 0.0, &cfg.scan)?;
        let breaks = z_breakpoints(&poles, zmax, a, model.reg.eps_z);
        let g = z_integral(model, 0.0, omegas, sigma, &breaks, &tol)?;
        // ∫dw e^{−w²/4σ²} = 2σ√π cancels the 1/(2σ√π).
        return Ok(g.into_iter().map(|v| v * chi2).collect());
    }
    let edge = graded_panels(0.5 / a, f64::INFINITY, cfg.w_extent * 2.0 * sigma);
    let mut ws = Vec::new();
    let mut wts = Vec::new();
    for pair in edge.windows(2) {
        for (x, wt) in gl16().mapped(pair[0], pair[1]) {
            ws.push(x);
            wts.push(wt);
            ws.push(-x);
            wts.push(wt);
        }
    }
    let mut order: Vec<usize> = (0..ws.len()).collect();
    order.sort_by(|&i, &j| ws[i].total_cmp(&ws[j]));
    let ws: Vec<f64> = order.iter().map(|&i| ws[i]).collect();
    let wts: Vec<f64> = order.iter().map(|&i| wts[i]).collect();
    let map = pole_map(model, &ws, &cfg.scan)?;
    let per_node: Vec<Vec<Complex64>> = ws
        .par_iter()
        .zip(&map)
        .map(|(&w, poles)| {
            let breaks = z_breakpoints(poles, zmax, a, model.reg.eps_z);
            z_integral(model, w, omegas, sigma, &breaks, &tol)
        })
        .collect::<Result<_>>()?;
    let mut out = vec![Complex64::new(0.0, 0.0); omegas.len()];
    for ((w, wt), g) in ws.iter().zip(&wts).zip(&per_node) {
        let gw = wt * (-w * w / (4.0 * sigma * sigma)).exp();
        for (o, v) in out.iter_mut().zip(g) {
            *o += v * gw;
        }
    }
    let pref = chi2 / (2.0 * sigma * PI.sqrt());
    Ok(out.into_iter().map(|v| v * pref).collect())
}

/// Finite-σ response by direct double quadrature, extrapolated to ε_z → 0 from
/// ε_z and ε_z/2 when enabled.
pub fn response_finite_sigma(model: &PullbackModel, omega: f64, sw: &SwitchingProfile, cfg: &QuadConfig) -> Result<ResponseResult> {
    Ok(response_finite_sigma_sweep(model, &[omega], sw, cfg)?.remove(0))
}

/// [`response_finite_sigma`] for several Ω sharing the pole scans and grids.
pub fn response_finite_sigma_sweep(
    model: &PullbackModel,
    omegas: &[f64],
    sw: &SwitchingProfile,
    cfg: &QuadConfig,
) -> Result<Vec<ResponseResult>> {
    let a = model.a.get();
    for &om in omegas {
        check_omega(om, a)?;
    }
    let sa = sw.sigma * a;
    if !(1.0..=200.0).contains(&sa) {
        return Err(Error::InvalidParameter(format!("σ·a = {sa} outside the supported window [1, 200]")));
    }
    // Δt carries cosh(aw/2), which overflows past aw/2 ≈ 709.
    if !model.is_stationary() && cfg.w_extent * sa > 700.0 {
        return Err(Error::InvalidParameter(format!(
            "σ·a = {sa} needs |w|a up to {:.0}, beyond double range for a w-dependent deformation",
            2.0 * cfg.w_extent * sa
        )));
    }
    let v1 = finite_raw(model, omegas, sw, cfg)?;
    let (vals, eps_err): (Vec<Complex64>, Vec<f64>) = if cfg.eps_extrapolation {
        let half = model.with_reg(model.reg.with_eps_z(0.5 * model.reg.eps_z));
        let v2 = finite_raw(&half, omegas, sw, cfg)?;
        v1.iter()
            .zip(&v2)
            .map(|(x, y)| {
                let d = (y - x).norm();
                (y * 2.0 - x, 2.0 * d * d / y.norm().max(f64::MIN_POSITIVE))
            })
            .unzip()
    } else {
        (v1.clone(), vec![0.0; v1.len()])
    };
    let calibration = calibration_constant();
    Ok(omegas
        .iter()
        .zip(vals)
        .zip(eps_err)
        .map(|((&omega, v), e)| ResponseResult {
            omega,
            value: Some(v.re),
            abs_error: cfg.rel_tol * v.norm() + e + v.im.abs(),
            method: Method::Quadrature,
            sigma: Some(sw.sigma),
            calibration,
            raw_imag: v.im,
            status: ResponseStatus::Converged,
            notes: vec![],
        })
        .collect())
}
