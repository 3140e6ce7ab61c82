//! Poles of `z ↦ W_ℓ(w, z)` in the fundamental strip and their residue sums.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{boundary_moments, locate_poles_with, refine_pole, LocateOptions, Pole, Rect};
use crate::error::{Error, Result};
use crate::kinematics::{Accel, WZPoint};
use crate::wightman::PullbackModel;

/// Geometry of the pole scan, in units of `1/a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Half-width of the scanned window in `Re z`.
    pub re_half: f64,
    /// Extra height scanned below and above the strip so that poles near its
    /// edges have their neighbours on record.
    pub margin: f64,
    /// Full re-scan period along the w-grid; nodes in between are tracked.
    pub rescan_every: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { re_half: 8.0, margin: 1.1, rescan_every: 8 }
    }
}

impl ScanConfig {
    pub fn region(&self, a: Accel) -> Rect {
        let s = 1.0 / a.get();
        Rect {
            re_min: -self.re_half * s,
            re_max: self.re_half * s,
            im_min: -self.margin * s,
            im_max: a.strip_height() + self.margin * s,
        }
    }
}

/// Resolution scale `min(π/(4a), ℓ/2)`.
pub fn default_min_sep(model: &PullbackModel) -> f64 {
    let cap = PI / (4.0 * model.a.get());
    match model.ell() {
        Some(l) if l > 0.0 => cap.min(l / 2.0),
        _ => cap,
    }
}

/// `0 ≤ Im z ≤ 4π/a`.
pub fn in_strip(a: Accel, z: Complex64) -> bool {
    z.im >= 0.0 && z.im <= a.strip_height()
}

/// Full scan of the (margin-extended) strip at real `w`, without residues.
pub fn scan_strip(model: &PullbackModel, w: f64, cfg: &ScanConfig) -> Result<Vec<Pole>> {
    let mut opts = LocateOptions::new(default_min_sep(model));
    opts.compute_residues = false;
    let f = model.z_slice(w);
    locate_poles_with(&f, &cfg.region(model.a), &opts)
}

/// Isolation radius of each pole: `min(cap, 0.45 × nearest neighbour distance)`.
fn isolation_radii(poles: &[Pole], cap: f64) -> Vec<f64> {
    poles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let nearest = poles
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| (q.position - p.position).norm())
                .fold(f64::INFINITY, f64::min);
            cap.min(0.45 * nearest)
        })
        .collect()
}

/// Poles at one w-node together with the net count of the tracking box around
/// each (zeros of `W` drifting close to a pole are counted too).
#[derive(Debug, Clone)]
struct Tracked {
    poles: Vec<Pole>,
    counts: Vec<i64>,
}

fn boxes(poles: &[Pole], cap: f64) -> Vec<Rect> {
    isolation_radii(poles, cap).into_iter().zip(poles).map(|(r, p)| Rect::centered(p.position, 0.6 * r)).collect()
}

fn net_count(m: &crate::analysis::Moments) -> Option<i64> {
    let n = m.s[0].re.round();
    ((m.s[0].re - n).abs() <= 0.05 && m.s[0].im.abs() <= 0.05).then_some(n as i64)
}

/// Full scan plus the box counts needed to track from it.
fn scan_tracked(model: &PullbackModel, w: f64, cfg: &ScanConfig, cap: f64) -> Result<Tracked> {
    let poles = scan_strip(model, w, cfg)?;
    let f = model.z_slice(w);
    let counts = boxes(&poles, cap)
        .iter()
        .map(|b| boundary_moments(&f, b).ok().and_then(|m| net_count(&m)).unwrap_or(i64::MIN))
        .collect();
    Ok(Tracked { poles, counts })
}

/// Continue `prev` (poles at a nearby `w`) to `w` using box moments. Returns `None`
/// when a box changes its net count or its pole cannot be re-located inside it.
fn track_step(model: &PullbackModel, prev: &Tracked, w: f64, cap: f64) -> Option<Tracked> {
    let f = model.z_slice(w);
    let mut out = Vec::with_capacity(prev.poles.len());
    for ((p, bx), &count) in prev.poles.iter().zip(boxes(&prev.poles, cap)).zip(&prev.counts) {
        let m = boundary_moments(&f, &bx).ok()?;
        if net_count(&m)? != count || count == i64::MIN {
            return None;
        }
        let at = if count == -(p.order_estimate as i64) {
            m.center + m.s[1] / count as f64
        } else {
            refine_pole(&f, p.position, p.order_estimate, &bx, bx.diag())
        };
        if !bx.contains(at) {
            return None;
        }
        out.push(Pole { position: at, ..p.clone() });
    }
    let mut idx: Vec<usize> = (0..out.len()).collect();
    idx.sort_by(|&i, &j| out[i].position.im.total_cmp(&out[j].position.im).then(out[i].position.re.total_cmp(&out[j].position.re)));
    Some(Tracked { poles: idx.iter().map(|&i| out[i].clone()).collect(), counts: idx.iter().map(|&i| prev.counts[i]).collect() })
}

fn same_layout(a: &[Pole], b: &[Pole], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(p, q)| p.order_estimate == q.order_estimate && (p.position - q.position).norm() < tol)
}

/// Poles in the scan region at every node of the ascending grid `ws`.
///
/// Stationary models are scanned once. Otherwise every `rescan_every`-th node is
/// scanned in full and the nodes in between are tracked, with a full scan wherever
/// tracking fails. When a chunk's prediction for the next full scan disagrees with
/// it (a pole entered unseen), the whole chunk is re-scanned node by node.
pub fn pole_map(model: &PullbackModel, ws: &[f64], cfg: &ScanConfig) -> Result<Vec<Vec<Pole>>> {
    if ws.is_empty() {
        return Ok(vec![]);
    }
    if model.is_stationary() {
        let poles = scan_strip(model, 0.0, cfg)?;
        return Ok(vec![poles; ws.len()]);
    }
    let step = cfg.rescan_every.max(1);
    let cap = default_min_sep(model);
    let heads: Vec<usize> = (0..ws.len()).step_by(step).collect();
    let head_scans: Vec<Tracked> =
        heads.par_iter().map(|&i| scan_tracked(model, ws[i], cfg, cap)).collect::<Result<_>>()?;
    let chunks: Vec<Vec<Vec<Pole>>> = heads
        .par_iter()
        .enumerate()
        .map(|(c, &h)| {
            let end = (h + step).min(ws.len());
            let mut seq = vec![head_scans[c].clone()];
            for &w in &ws[h + 1..end] {
                let next = match track_step(model, seq.last().expect("non-empty"), w, cap) {
                    Some(t) => t,
                    None => scan_tracked(model, w, cfg, cap)?,
                };
                seq.push(next);
            }
            let consistent = c + 1 == heads.len()
                || track_step(model, seq.last().expect("non-empty"), ws[end], cap)
                    .is_some_and(|p| same_layout(&p.poles, &head_scans[c + 1].poles, cap / 4.0));
            if consistent {
                return Ok(seq.into_iter().map(|t| t.poles).collect());
            }
            let mut full = vec![head_scans[c].poles.clone()];
            for &w in &ws[h + 1..end] {
                full.push(scan_strip(model, w, cfg)?);
            }
            Ok(full)
        })
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Residues of `f(z)·e^{−iΩz}` on one circle for several Ω, sharing the samples of
/// `f`. Node counts double from 32 until every Ω has converged to 10⁻¹².
pub fn multi_residue<F: Fn(Complex64) -> Complex64>(
    f: &F,
    c: Complex64,
    r: f64,
    omegas: &[f64],
) -> Result<Vec<Complex64>> {
    let tau = 2.0 * PI;
    let mut n = 32usize;
    let mut samples: Vec<(Complex64, Complex64)> = Vec::new(); // (e^{iθ}, f)
    let sum = |samples: &[(Complex64, Complex64)], om: f64| -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for &(e, v) in samples {
            let z = c + e * r;
            s += v * e * (Complex64::new(0.0, -om) * z).exp();
        }
        s * (r / samples.len() as f64)
    };
    let push = |samples: &mut Vec<(Complex64, Complex64)>, k: usize, m: usize| -> Result<f64> {
        let e = Complex64::from_polar(1.0, tau * k as f64 / m as f64);
        let v = f(c + e * r);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Residue(format!("non-finite sample on |z-{c}|={r}")));
        }
        samples.push((e, v));
        Ok(v.norm())
    };
    let mut fmax: f64 = 0.0;
    for k in 0..n {
        fmax = fmax.max(push(&mut samples, k, n)?);
    }
    let mut prev: Vec<Complex64> = omegas.iter().map(|&o| sum(&samples, o)).collect();
    while n < 1 << 15 {
        for k in 0..n {
            fmax = fmax.max(push(&mut samples, 2 * k + 1, 2 * n)?);
        }
        n *= 2;
        let cur: Vec<Complex64> = omegas.iter().map(|&o| sum(&samples, o)).collect();
        let done = cur.iter().zip(&prev).zip(omegas).all(|((a, b), &o)| {
            let phase = (o * (c.im + r)).exp().max((o * (c.im - r)).exp());
            (a - b).norm() <= 1e-12 * a.norm() + 1e-14 * r * fmax * phase
        });
        if done {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Residue(format!("trapezoid rule did not converge on |z-{c}|={r}")))
}

/// `Σ Res[W_ℓ(w, ·)·e^{−iΩz}]` over the poles in the strip, for each Ω. `poles` is
/// the full scan list (strip plus margins), used for isolation radii.
pub fn strip_residue_sums(model: &PullbackModel, w: f64, poles: &[Pole], omegas: &[f64]) -> Result<Vec<Complex64>> {
    strip_residue_sums_shifted(model, w, poles, Complex64::new(0.0, 0.0), omegas)
}

/// As [`strip_residue_sums`], with every circle centre moved by `shift` while strip
/// membership is still decided at the listed positions. Used to re-evaluate the
/// same pole set under a smaller z-regulator, which moves all poles rigidly.
pub fn strip_residue_sums_shifted(
    model: &PullbackModel,
    w: f64,
    poles: &[Pole],
    shift: Complex64,
    omegas: &[f64],
) -> Result<Vec<Complex64>> {
    let cap = default_min_sep(model);
    let radii = isolation_radii(poles, cap);
    let f = model.z_slice(w);
    let mut total = vec![Complex64::new(0.0, 0.0); omegas.len()];
    for (p, r0) in poles.iter().zip(radii) {
        if !in_strip(model.a, p.position) {
            continue;
        }
        let mut r = r0;
        let mut res = None;
        for _ in 0..=6 {
            match multi_residue(&f, p.position + shift, r, omegas) {
                Ok(v) => {
                    res = Some(v);
                    break;
                }
                Err(_) => r *= 0.5,
            }
        }
        let v = res.ok_or_else(|| Error::Residue(format!("no usable circle around {}", p.position)))?;
        for (t, x) in total.iter_mut().zip(v) {
            *t += x;
        }
    }
    Ok(total)
}

/// Residue sum of `f_{ℓ,σ}(z) = e^{−z²/σ²}W_ℓ(w,z)e^{−iΩz}` over the strip at real
/// `w`. With `sigma = None` the window factor is dropped (its σ → ∞ limit).
pub fn residue_sum_at_w(
    model: &PullbackModel,
    omega: f64,
    sigma: Option<f64>,
    w: f64,
    cfg: &ScanConfig,
) -> Result<Complex64> {
    let poles = scan_strip(model, w, cfg)?;
    match sigma {
        None => Ok(strip_residue_sums(model, w, &poles, &[omega])?[0]),
        Some(s) => {
            let windowed = model_window(model, w, s);
            let cap = default_min_sep(model);
            let radii = isolation_radii(&poles, cap);
            let mut total = Complex64::new(0.0, 0.0);
            for (p, r) in poles.iter().zip(radii) {
                if in_strip(model.a, p.position) {
                    total += multi_residue(&windowed, p.position, r, &[omega])?[0];
                }
            }
            Ok(total)
        }
    }
}

fn model_window(model: &PullbackModel, w: f64, sigma: f64) -> impl Fn(Complex64) -> Complex64 + '_ {
    move |z: Complex64| {
        let v = model
            .eval(WZPoint::new(Complex64::new(w, 0.0), z))
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        v * (-(z * z) / (sigma * sigma)).exp()
    }
}
