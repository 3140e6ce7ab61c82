use num_complex::Complex64;

use super::Rect;
use crate::error::{Error, Result};
use crate::quadrature::{gk21_rule, gl16};

const ROOTS8: [(f64, f64); 8] = [
    (1.0, 0.0),
    (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
    (0.0, 1.0),
    (-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
    (-1.0, 0.0),
    (-std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2),
    (0.0, -1.0),
    (std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2),
];

/// `f′/f` at `z`, with `f′` from the 8-point Cauchy rule on the circle of radius `h`
/// (truncation error O(h⁸), so `h` can be a sizeable fraction of the distance to
/// the nearest singularity).
#[inline]
pub fn log_derivative<F: Fn(Complex64) -> Complex64>(f: &F, z: Complex64, h: f64) -> Complex64 {
    let mut d = Complex64::new(0.0, 0.0);
    for (re, im) in ROOTS8 {
        let w = Complex64::new(re, im);
        d += f(z + w * h) * w.conj();
    }
    // Scale by 1/|f| first: complex division squares the divisor's modulus.
    let v = f(z);
    let s = 1.0 / v.norm();
    (d * s) / (8.0 * h) / (v * s)
}

/// A function sampled only through its logarithmic derivative, which is all the
/// argument-principle routines need.
pub trait Meromorphic {
    fn log_derivative(&self, z: Complex64, h: f64) -> Complex64;
}

impl<F: Fn(Complex64) -> Complex64> Meromorphic for F {
    #[inline]
    fn log_derivative(&self, z: Complex64, h: f64) -> Complex64 {
        log_derivative(self, z, h)
    }
}

/// A function given by its logarithm `g = ln f` on any branch, so `f` may overflow
/// or underflow freely. `f′/f = g′` comes from the Cauchy rule applied to the
/// differences `g(z+wh) − g(z)`, each brought back to `|Im| ≤ π`. The radius is
/// reduced until `|g′|h ≤ 1/2`, so that this unwrapping is unambiguous.
pub struct LogForm<G>(pub G);

impl<G: Fn(Complex64) -> Complex64> Meromorphic for LogForm<G> {
    fn log_derivative(&self, z: Complex64, h: f64) -> Complex64 {
        let tau = 2.0 * std::f64::consts::PI;
        let g0 = (self.0)(z);
        let mut h = h;
        let mut d = Complex64::new(f64::NAN, f64::NAN);
        for _ in 0..32 {
            d = Complex64::new(0.0, 0.0);
            for (re, im) in ROOTS8 {
                let w = Complex64::new(re, im);
                let mut dg = (self.0)(z + w * h) - g0;
                dg.im -= tau * (dg.im / tau).round();
                d += dg * w.conj();
            }
            d /= 8.0 * h;
            if !finite(d) || d.norm() * h <= 0.5 {
                break;
            }
            h = 0.25 / d.norm();
        }
        d
    }
}

#[inline]
fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Boundary moments `s_k = (1/2πi) ∮ (z−c)^k f′/f dz`, `k = 0, 1, 2`, about the
/// rectangle centre `c`. For a rectangle holding points `z_j` with signed
/// multiplicities `m_j` (zeros positive, poles negative), `s_k = Σ m_j (z_j−c)^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub center: Complex64,
    pub s: [Complex64; 3],
    pub evaluations: usize,
}

struct EdgeIntegrator<'a, F: ?Sized> {
    f: &'a F,
    center: Complex64,
    h: f64,
    tol: [f64; 3],
    evaluations: usize,
}

impl<F: Meromorphic + ?Sized> EdgeIntegrator<'_, F> {
    /// Kronrod estimates of the three moment integrals on a straight panel, with
    /// the Kronrod–Gauss differences as error estimates.
    fn panel(&mut self, a: Complex64, b: Complex64) -> Result<([Complex64; 3], [f64; 3])> {
        let half = (b - a) * 0.5;
        let mid = (a + b) * 0.5;
        let h = self.h.min(0.05 * half.norm());
        let mut kron = [Complex64::new(0.0, 0.0); 3];
        let mut gauss = [Complex64::new(0.0, 0.0); 3];
        for &(x, wk, wg) in gk21_rule() {
            let z = mid + half * x;
            let g = self.f.log_derivative(z, h);
            if !finite(g) {
                return Err(Error::BoundaryTooClose(format!("non-finite f'/f at {z}")));
            }
            let u = z - self.center;
            let terms = [g * half, g * half * u, g * half * u * u];
            for k in 0..3 {
                kron[k] += terms[k] * wk;
                gauss[k] += terms[k] * wg;
            }
        }
        self.evaluations += 21 * 9;
        Ok((kron, [(kron[0] - gauss[0]).norm(), (kron[1] - gauss[1]).norm(), (kron[2] - gauss[2]).norm()]))
    }

    fn adaptive(&mut self, a: Complex64, b: Complex64, depth: u32) -> Result<[Complex64; 3]> {
        let (val, err) = self.panel(a, b)?;
        let len = (b - a).norm();
        if (0..3).all(|k| err[k] <= self.tol[k] * len) {
            return Ok(val);
        }
        if depth >= 40 {
            return Err(Error::BoundaryTooClose(format!("edge panel [{a}, {b}] does not converge")));
        }
        let m = (a + b) * 0.5;
        let l = self.adaptive(a, m, depth + 1)?;
        let r = self.adaptive(m, b, depth + 1)?;
        Ok([l[0] + r[0], l[1] + r[1], l[2] + r[2]])
    }
}

/// Adaptive Gauss–Kronrod evaluation of the boundary moments. `f′` uses the Cauchy
/// rule with radius `min(diag/10³, panel/40)`.
pub fn boundary_moments<F: Meromorphic + ?Sized>(f: &F, rect: &Rect) -> Result<Moments> {
    let d = rect.diag();
    let center = rect.center();
    let perimeter = 2.0 * (rect.width() + rect.height());
    let tau = 2.0 * std::f64::consts::PI;
    // Per unit length, so the total error stays below ~1e-9·d^k.
    let tol = [1e-9 * tau / perimeter, 1e-9 * tau * d / perimeter, 1e-9 * tau * d * d / perimeter];
    let mut ei = EdgeIntegrator { f, center, h: d * 1e-3, tol, evaluations: 0 };
    let c = rect.corners();
    let mut s = [Complex64::new(0.0, 0.0); 3];
    for k in 0..4 {
        let (a, b) = (c[k], c[(k + 1) % 4]);
        // Start from a handful of panels per edge so no panel is much longer than the
        // rectangle's short side.
        let len = (b - a).norm();
        let n0 = ((2.0 * len / rect.width().min(rect.height())).ceil() as usize).clamp(1, 64);
        for j in 0..n0 {
            let pa = a + (b - a) * (j as f64 / n0 as f64);
            let pb = a + (b - a) * ((j + 1) as f64 / n0 as f64);
            let part = ei.adaptive(pa, pb, 0)?;
            for i in 0..3 {
                s[i] += part[i];
            }
        }
    }
    let norm = Complex64::new(0.0, tau);
    Ok(Moments { center, s: [s[0] / norm, s[1] / norm, s[2] / norm], evaluations: ei.evaluations })
}

/// `(1/2πi) ∮ f′/f dz` over the rectangle boundary, rounded to an integer: the
/// number of zeros minus the number of poles inside.
///
/// `n_samples` boundary nodes (at least 64) are doubled until two successive counts
/// agree and sit within 0.1 of an integer; more than 2¹⁶ nodes is an error.
pub fn winding_count<F: Meromorphic + ?Sized>(f: &F, rect: &Rect, n_samples: usize) -> Result<i64> {
    let h = rect.diag() * 1e-3;
    let c = rect.corners();
    let perimeter = 2.0 * (rect.width() + rect.height());
    let gl = gl16();
    let mut n = n_samples.max(64);
    let mut prev: Option<i64> = None;
    while n <= 1 << 16 {
        let panels_total = (n / 16).max(4);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            let (a, b) = (c[k], c[(k + 1) % 4]);
            let panels = ((panels_total as f64 * (b - a).norm() / perimeter).ceil() as usize).max(1);
            for j in 0..panels {
                let pa = a + (b - a) * (j as f64 / panels as f64);
                let pb = a + (b - a) * ((j + 1) as f64 / panels as f64);
                let half = (pb - pa) * 0.5;
                let mid = (pa + pb) * 0.5;
                for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                    let g = f.log_derivative(mid + half * *x, h.min(0.05 * half.norm()));
                    if finite(g) {
                        acc += g * half * *w;
                    } else {
                        acc = Complex64::new(f64::NAN, f64::NAN);
                    }
                }
            }
        }
        let v = acc / Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        if finite(v) {
            let r = v.re.round();
            let clean = (v.re - r).abs() < 0.1 && v.im.abs() < 0.1;
            if clean {
                if prev == Some(r as i64) {
                    return Ok(r as i64);
                }
                prev = Some(r as i64);
            } else {
                prev = None;
            }
        } else {
            prev = None;
        }
        n *= 2;
    }
    Err(Error::BoundaryTooClose(format!("winding count on {rect:?} did not settle")))
}

/// `(1/2πi) ∮ f dz` on the circle `|z − c| = r` with the `n`-point trapezoid rule.
pub fn circle_integral<F: Fn(Complex64) -> Complex64>(f: &F, c: Complex64, r: f64, n: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
        acc += f(c + e * r) * e;
    }
    acc * (r / n as f64)
}
