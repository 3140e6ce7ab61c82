//! Adiabatic-limit response from strip residues:
//! `𝓕_ℓ(Ω,∞) = i√π/(1 − e^{4πΩ/a}) · lim_σ (1/σ)∫dw e^{−w²/σ²} Σ Res`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::finite::finite_raw;
use super::strip::{pole_map, strip_residue_sums, strip_residue_sums_shifted, ScanConfig};
use super::{check_omega, Method, QuadConfig, ResponseResult, ResponseStatus, SwitchingProfile};
use crate::analysis::{growth_exponent, GrowthEstimate, GrowthTag, Ray, DEFAULT_R_LADDER};
use crate::error::{Error, Result};
use crate::kinematics::{interval_components, Accel, RegulatorPolicy, WZPoint};
use crate::quadrature::{gl16, graded_panels, richardson};
use crate::wightman::{deformation_eval, DeformationSpec, PullbackModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticConfig {
    /// σ·a values extrapolated to σ → ∞.
    pub sigma_ladder: Vec<f64>,
    pub scan: ScanConfig,
    /// First w-panel width, in units of `1/a`; later panels grow geometrically.
    pub w_first_panel: f64,
    /// The w-grid covers `|w| ≤ w_extent·σ_max`.
    pub w_extent: f64,
    /// Relative tolerance on the σ → ∞ extrapolation.
    pub tol: f64,
    pub eps_extrapolation: bool,
    /// Admit `|Ω|/a` below the public floor (used to probe the Ω → 0 behaviour).
    pub allow_small_omega: bool,
}

impl Default for AdiabaticConfig {
    fn default() -> Self {
        Self {
            sigma_ladder: vec![20.0, 40.0, 80.0],
            scan: ScanConfig::default(),
            w_first_panel: 0.5,
            w_extent: 8.0,
            tol: 1e-3,
            eps_extrapolation: true,
            allow_small_omega: false,
        }
    }
}

/// Symmetric composite Gauss–Legendre grid in w, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct WGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn w_grid(a: Accel, cfg: &AdiabaticConfig) -> WGrid {
    let smax = cfg.sigma_ladder.iter().copied().fold(1.0, f64::max) / a.get();
    let edges = graded_panels(cfg.w_first_panel / a.get(), f64::INFINITY, cfg.w_extent * smax);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for p in edges.windows(2) {
        for (x, wt) in gl16().mapped(p[0], p[1]) {
            pts.push((x, wt));
            pts.push((-x, wt));
        }
    }
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    WGrid { nodes: pts.iter().map(|p| p.0).collect(), weights: pts.iter().map(|p| p.1).collect() }
}

/// Condition 4: growth of `|𝒟|` as `|Δt|` (and with it `|Δx|`) grows, probed by
/// pushing z at w = 0 and pushing w at fixed `z = 1/a`. `None` for the undeformed model.
pub fn falloff_gate(model: &PullbackModel) -> Option<GrowthEstimate> {
    let spec = model.deformation.as_ref()?;
    let a = model.a.get();
    let none = RegulatorPolicy::none();
    let eval = |w: f64, z: f64| -> Complex64 {
        let ic = interval_components(model.a, WZPoint::real(w, z), &none);
        deformation_eval(spec, &ic).unwrap_or(Complex64::new(f64::INFINITY, 0.0))
    };
    let s0 = (0.5f64).sinh();
    // Δt = r along both probes.
    let via_z = |r: Complex64| eval(0.0, (2.0 / a) * (0.5 * a * r.re).asinh());
    let via_w = |r: Complex64| eval((2.0 / a) * (0.5 * a * r.re / s0).max(1.0).acosh(), 1.0 / a);
    let ray = [Ray::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))];
    let ladder: Vec<f64> = DEFAULT_R_LADDER.iter().map(|r| r / a).collect();
    let gz = growth_exponent(&via_z, &ray, &ladder);
    let gw = growth_exponent(&via_w, &ray, &ladder);
    let tag = if gz.tag == GrowthTag::Exponential || gw.tag == GrowthTag::Exponential {
        GrowthTag::Exponential
    } else {
        GrowthTag::Polynomial
    };
    Some(GrowthEstimate { exponent: gz.exponent.max(gw.exponent), tag, per_ray: vec![gz.exponent, gw.exponent] })
}

/// w-averaged residue sums `(1/σ)∫dw e^{−w²/σ²} R(w)` for each Ω (rows) and σ (columns),
/// at the model's regulator and, when requested, at half of it.
struct Averages {
    at_eps: Vec<Vec<Complex64>>,
    at_half: Option<Vec<Vec<Complex64>>>,
}

fn averaged_residues(model: &PullbackModel, omegas: &[f64], cfg: &AdiabaticConfig) -> Result<Averages> {
    let a = model.a.get();
    let sigmas: Vec<f64> = cfg.sigma_ladder.iter().map(|s| s / a).collect();
    let half_eps = 0.5 * model.reg.eps_z;
    let half = model.with_reg(model.reg.with_eps_z(half_eps));
    let shift = Complex64::new(0.0, -half_eps);
    let node_sums = |w: f64, poles: &[crate::analysis::Pole]| -> Result<(Vec<Complex64>, Option<Vec<Complex64>>)> {
        let r1 = strip_residue_sums(model, w, poles, omegas)?;
        let r2 = if cfg.eps_extrapolation {
            Some(strip_residue_sums_shifted(&half, w, poles, shift, omegas)?)
        } else {
            None
        };
        Ok((r1, r2))
    };
    let average = |per_node: &[Vec<Complex64>], grid: &WGrid| -> Vec<Vec<Complex64>> {
        (0..omegas.len())
            .map(|k| {
                sigmas
                    .iter()
                    .map(|&s| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for ((w, wt), r) in grid.nodes.iter().zip(&grid.weights).zip(per_node) {
                            acc += r[k] * (wt * (-(w / s).powi(2)).exp());
                        }
                        acc / s
                    })
                    .collect()
            })
            .collect()
    };
    if model.is_stationary() {
        // R is w-independent and (1/σ)∫e^{−w²/σ²}dw = √π exactly.
        let poles = super::strip::scan_strip(model, 0.0, &cfg.scan)?;
        let (r1, r2) = node_sums(0.0, &poles)?;
        let spread = |r: Vec<Complex64>| -> Vec<Vec<Complex64>> {
            r.into_iter().map(|v| vec![v * PI.sqrt(); sigmas.len()]).collect()
        };
        return Ok(Averages { at_eps: spread(r1), at_half: r2.map(spread) });
    }
    let grid = w_grid(model.a, cfg);
    let map = pole_map(model, &grid.nodes, &cfg.scan)?;
    let sums: Vec<(Vec<Complex64>, Option<Vec<Complex64>>)> =
        grid.nodes.par_iter().zip(&map).map(|(&w, poles)| node_sums(w, poles)).collect::<Result<_>>()?;
    let r1: Vec<Vec<Complex64>> = sums.iter().map(|s| s.0.clone()).collect();
    let at_half = if cfg.eps_extrapolation {
        let r2: Vec<Vec<Complex64>> = sums.iter().map(|s| s.1.clone().expect("computed")).collect();
        Some(average(&r2, &grid))
    } else {
        None
    };
    Ok(Averages { at_eps: average(&r1, &grid), at_half })
}

fn prefactor(omega: f64, a: f64) -> Complex64 {
    Complex64::new(0.0, PI.sqrt()) / (1.0 - (4.0 * PI * omega / a).exp())
}

/// Adiabatic-limit response at one Ω.
pub fn response_adiabatic(model: &PullbackModel, omega: f64, cfg: &AdiabaticConfig) -> Result<ResponseResult> {
    Ok(response_adiabatic_sweep(model, &[omega], cfg)?.remove(0))
}

/// Adiabatic-limit response at several Ω, sharing one pole map.
pub fn response_adiabatic_sweep(model: &PullbackModel, omegas: &[f64], cfg: &AdiabaticConfig) -> Result<Vec<ResponseResult>> {
    let a = model.a.get();
    for &om in omegas {
        if cfg.allow_small_omega {
            if !(om.is_finite() && om != 0.0) {
                return Err(Error::InvalidParameter(format!("Ω must be finite and non-zero, got {om}")));
            }
        } else {
            check_omega(om, a)?;
        }
    }
    if cfg.sigma_ladder.is_empty() || cfg.sigma_ladder.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidParameter("σ ladder must be non-empty and positive".into()));
    }
    let calibration = calibration_constant();
    let blank = |omega: f64, status: ResponseStatus, note: String| ResponseResult {
        omega,
        value: None,
        abs_error: f64::INFINITY,
        method: Method::Residue,
        sigma: None,
        calibration,
        raw_imag: 0.0,
        status,
        notes: vec![note],
    };
    if let Some(g) = falloff_gate(model) {
        if g.tag == GrowthTag::Exponential {
            let note = "deformation is not polynomially bounded in |Δt|, |Δx|; residue formula not applicable".to_string();
            return Ok(omegas.iter().map(|&o| blank(o, ResponseStatus::Indeterminate, note.clone())).collect());
        }
    }
    let avg = averaged_residues(model, omegas, cfg)?;
    let steps: Vec<f64> = cfg.sigma_ladder.iter().map(|s| a / s).collect();
    let mut out = Vec::with_capacity(omegas.len());
    for (k, &omega) in omegas.iter().enumerate() {
        let (v1, e1) = richardson(&steps, &avg.at_eps[k]);
        let (v, e_sigma, e_eps) = match &avg.at_half {
            Some(h) => {
                let (v2, e2) = richardson(&steps, &h[k]);
                let d = (v2 - v1).norm();
                (v2 * 2.0 - v1, e1.max(e2), 2.0 * d * d / v2.norm().max(f64::MIN_POSITIVE))
            }
            None => (v1, e1, 0.0),
        };
        let pref = prefactor(omega, a);
        let f = pref * v;
        let mut notes = Vec::new();
        let finite = f.re.is_finite() && f.im.is_finite() && e_sigma.is_finite();
        let status = if !finite {
            notes.push("σ-ladder produced non-finite values".to_string());
            ResponseStatus::NonConvergent
        } else if cfg.sigma_ladder.len() > 1 && e_sigma > cfg.tol * v.norm() {
            notes.push(format!("σ-extrapolation error {:.3e} exceeds tolerance {:.1e} (relative)", e_sigma / v.norm(), cfg.tol));
            ResponseStatus::NonConvergent
        } else {
            ResponseStatus::Converged
        };
        if cfg.sigma_ladder.len() == 1 {
            notes.push("single σ value: no extrapolation".to_string());
        }
        out.push(ResponseResult {
            omega,
            value: finite.then_some(f.re),
            abs_error: pref.norm() * (e_sigma + e_eps) + f.im.abs(),
            method: Method::Residue,
            sigma: None,
            calibration,
            raw_imag: f.im,
            status,
            notes,
        });
    }
    Ok(out)
}

/// Ratio of the finite-σ quadrature, extrapolated to σ → ∞ from σa ∈ {20, 40, 80},
/// to the residue formula for the undeformed field at a = 1, Ω = 1. Both use the
/// same regulator, so the ratio is free of ε-dependence. Computed once per process.
pub fn calibration_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let a = Accel::new(1.0).expect("valid");
        let model = PullbackModel::undeformed(a);
        let cfg = AdiabaticConfig { eps_extrapolation: false, ..AdiabaticConfig::default() };
        let res = averaged_residues(&model, &[1.0], &cfg).map(|avg| prefactor(1.0, 1.0) * avg.at_eps[0][0]);
        let sigmas = [20.0, 40.0, 80.0];
        let quad: Result<Vec<Complex64>> = sigmas
            .iter()
            .map(|&s| Ok(finite_raw(&model, &[1.0], &SwitchingProfile::gaussian(s)?, &QuadConfig::default())?[0]))
            .collect();
        match (res, quad) {
            (Ok(r), Ok(q)) => {
                let steps: Vec<f64> = sigmas.iter().map(|s| 1.0 / s).collect();
                richardson(&steps, &q).0.re / r.re
            }
            _ => f64::NAN,
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailedBalance {
    pub omega: f64,
    /// `ln[𝓕(−Ω)/𝓕(Ω)] − 2πΩ/a`.
    pub gap: f64,
    pub error: f64,
    pub method: Method,
}

/// Deviation from thermal detailed balance at the Unruh temperature. For the
/// quadrature method the finite width is `quad_sigma` (in units of `1/a`).
pub fn detailed_balance_gap(
    model: &PullbackModel,
    omega: f64,
    method: Method,
    adiabatic: &AdiabaticConfig,
    quad: &QuadConfig,
    quad_sigma: f64,
) -> Result<DetailedBalance> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!("detailed balance needs Ω > 0, got {omega}")));
    }
    let a = model.a.get();
    let rs = match method {
        Method::Residue => response_adiabatic_sweep(model, &[-omega, omega], adiabatic)?,
        Method::Quadrature => {
            let sw = SwitchingProfile::gaussian(quad_sigma / a)?;
            super::response_finite_sigma_sweep(model, &[-omega, omega], &sw, quad)?
        }
    };
    let fm = rs[0].converged_value()?;
    let fp = rs[1].converged_value()?;
    if !(fm > 0.0 && fp > 0.0) {
        return Err(Error::NonConvergent(format!("non-positive response: F(-Ω)={fm}, F(Ω)={fp}")));
    }
    Ok(DetailedBalance {
        omega,
        gap: (fm / fp).ln() - 2.0 * PI * omega / a,
        error: rs[0].abs_error / fm + rs[1].abs_error / fp,
        method,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub ell: f64,
    pub value: Option<f64>,
    #[serde(with = "crate::serde_real")]
    pub abs_error: f64,
    pub status: Option<ResponseStatus>,
    pub deviation: Option<f64>,
    pub rel_deviation: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitVerdict {
    Converging,
    NotConverging,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitStudy {
    pub spec_id: String,
    pub omega: f64,
    pub a: f64,
    pub reference: f64,
    #[serde(with = "crate::serde_real")]
    pub reference_error: f64,
    pub rows: Vec<LimitRow>,
    /// Least-squares slope of `ln|deviation|` against `ln ℓ`.
    pub order: Option<f64>,
    pub monotone: bool,
    pub verdict: LimitVerdict,
}

/// Adiabatic response along a descending ℓ-ladder compared with the undeformed value.
///
/// Converging means: every ℓ converged in σ, and the deviations are either all
/// within three combined error bars of zero, or strictly decreasing with fitted
/// order above 1/2. A length-one ladder cannot establish a trend and is
/// indeterminate unless its deviation is already at the noise floor.
pub fn classical_limit_study(
    spec: &DeformationSpec,
    a: Accel,
    omega: f64,
    ells: &[f64],
    cfg: &AdiabaticConfig,
) -> Result<LimitStudy> {
    if ells.is_empty() || ells.windows(2).any(|w| !(w[1] < w[0])) || ells.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::InvalidParameter("ℓ ladder must be positive and strictly descending".into()));
    }
    let reference = response_adiabatic(&PullbackModel::undeformed(a), omega, cfg)?;
    let f0 = reference.converged_value()?;
    let rows: Vec<LimitRow> = ells
        .iter()
        .map(|&ell| {
            let model = PullbackModel::deformed(a, spec.with_ell(ell));
            match response_adiabatic(&model, omega, cfg) {
                Ok(r) => {
                    let dev = r.value.map(|v| v - f0);
                    LimitRow {
                        ell,
                        value: r.value,
                        abs_error: r.abs_error,
                        status: Some(r.status),
                        deviation: dev,
                        rel_deviation: dev.map(|d| d / f0),
                        error: None,
                    }
                }
                Err(e) => LimitRow {
                    ell,
                    value: None,
                    abs_error: f64::INFINITY,
                    status: None,
                    deviation: None,
                    rel_deviation: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let indeterminate = rows.iter().any(|r| r.status == Some(ResponseStatus::Indeterminate));
    let all_ok = rows.iter().all(|r| r.status == Some(ResponseStatus::Converged) && r.deviation.is_some());
    let devs: Vec<f64> = rows.iter().filter_map(|r| r.deviation.map(f64::abs)).collect();
    let at_floor = all_ok
        && rows.iter().all(|r| r.deviation.expect("checked").abs() <= 3.0 * (r.abs_error + reference.abs_error));
    let monotone = all_ok && devs.windows(2).all(|d| d[1] < d[0]);
    let order = if all_ok && devs.len() >= 2 && devs.iter().all(|d| *d > 0.0) {
        let xs: Vec<f64> = ells.iter().map(|l| l.ln()).collect();
        let ys: Vec<f64> = devs.iter().map(|d| d.ln()).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    let verdict = if indeterminate {
        LimitVerdict::Indeterminate
    } else if !all_ok {
        LimitVerdict::NotConverging
    } else if at_floor {
        LimitVerdict::Converging
    } else if ells.len() == 1 {
        LimitVerdict::Indeterminate
    } else if monotone && order.is_some_and(|o| o > 0.5) {
        LimitVerdict::Converging
    } else {
        LimitVerdict::NotConverging
    };
    Ok(LimitStudy {
        spec_id: spec.id.clone(),
        omega,
        a: a.get(),
        reference: f0,
        reference_error: reference.abs_error,
        rows,
        order,
        monotone,
        verdict,
    })
}
