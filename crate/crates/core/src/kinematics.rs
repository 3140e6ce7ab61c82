//! Complexified Rindler worldline.
//!
//! The detector follows `t(τ) = sinh(aτ)/a`, `x(τ) = cosh(aτ)/a`. Pairs of proper
//! times are addressed through the sum `w = τ″ + τ′` and difference
//! `z = τ″ − τ′` coordinates; both may be complex. Regulators are applied here and
//! nowhere else.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Proper acceleration, `a > 0` (units of inverse time, `c = 1`).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Accel(f64);

impl Accel {
    pub fn new(a: f64) -> Result<Self> {
        if a.is_finite() && a > 0.0 {
            Ok(Self(a))
        } else {
            Err(Error::InvalidParameter(format!("acceleration must be positive and finite, got {a}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Imaginary period of the pull-back in `z`: `4π/a`.
    #[inline]
    pub fn strip_height(self) -> f64 {
        4.0 * std::f64::consts::PI / self.0
    }

    /// Inverse Unruh temperature `β = 2π/a`.
    #[inline]
    pub fn beta(self) -> f64 {
        2.0 * std::f64::consts::PI / self.0
    }
}

impl TryFrom<f64> for Accel {
    type Error = Error;
    fn try_from(a: f64) -> Result<Self> {
        Self::new(a)
    }
}

impl From<Accel> for f64 {
    fn from(a: Accel) -> f64 {
        a.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WZPoint {
    pub w: Complex64,
    pub z: Complex64,
}

impl WZPoint {
    pub fn new(w: Complex64, z: Complex64) -> Self {
        Self { w, z }
    }

    pub fn real(w: f64, z: f64) -> Self {
        Self { w: Complex64::new(w, 0.0), z: Complex64::new(z, 0.0) }
    }
}

/// Sign of the infinitesimal imaginary shift applied to `w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WSign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl WSign {
    pub fn factor(self) -> f64 {
        match self {
            WSign::Plus => 1.0,
            WSign::Minus => -1.0,
        }
    }
}

/// iε prescription. Evaluation points are shifted to `z − i·eps_z` and
/// `w ± i·eps_w`, which places every real-axis singularity of the pull-back just
/// above the real `z` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegulatorPolicy {
    pub eps_z: f64,
    pub eps_w_sign: WSign,
    pub eps_w: f64,
}

impl RegulatorPolicy {
    pub fn new(eps_z: f64, eps_w_sign: WSign, eps_w: f64) -> Result<Self> {
        if !(eps_z.is_finite() && eps_z >= 0.0 && eps_w.is_finite() && eps_w >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "regulators must be finite and non-negative (eps_z = {eps_z}, eps_w = {eps_w})"
            )));
        }
        Ok(Self { eps_z, eps_w_sign, eps_w })
    }

    /// No shift at all; used when the caller places the complex points itself.
    pub const fn none() -> Self {
        Self { eps_z: 0.0, eps_w_sign: WSign::Plus, eps_w: 0.0 }
    }

    /// Defaults for acceleration `a`: `eps_z = 10⁻³/a`, `eps_w = 10⁻⁵/a`.
    pub fn default_for(a: Accel) -> Self {
        Self { eps_z: 1e-3 / a.get(), eps_w_sign: WSign::Plus, eps_w: 1e-5 / a.get() }
    }

    pub fn with_eps_z(self, eps_z: f64) -> Self {
        Self { eps_z, ..self }
    }

    pub fn with_w_sign(self, eps_w_sign: WSign) -> Self {
        Self { eps_w_sign, ..self }
    }

    #[inline]
    pub fn shift(&self, p: WZPoint) -> WZPoint {
        WZPoint {
            w: p.w + Complex64::new(0.0, self.eps_w_sign.factor() * self.eps_w),
            z: p.z - Complex64::new(0.0, self.eps_z),
        }
    }
}

/// `Δt`, `|Δx|` (signed along the boost axis) and `ΔX² = |Δx|² − Δt²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalComponents {
    pub dt: Complex64,
    pub dx: Complex64,
    pub dx2: Complex64,
}

pub fn tau_from_wz(p: WZPoint) -> (Complex64, Complex64) {
    ((p.w + p.z) * 0.5, (p.w - p.z) * 0.5)
}

/// Interval components between the two worldline points labelled by `p`, with the
/// regulator applied first. `dx2` uses the closed form `−(4/a²) sinh²(az̃/2)`, so it
/// carries no `w` dependence even in floating point.
pub fn interval_components(a: Accel, p: WZPoint, reg: &RegulatorPolicy) -> IntervalComponents {
    let a = a.get();
    let q = reg.shift(p);
    let s = (q.z * (0.5 * a)).sinh();
    let half_w = q.w * (0.5 * a);
    let scale = 2.0 / a;
    IntervalComponents {
        dt: half_w.cosh() * s * scale,
        dx: half_w.sinh() * s * scale,
        dx2: -(s * s) * (scale * scale),
    }
}
