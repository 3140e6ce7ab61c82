//! Detector response: the finite-σ double integral (used as an oracle) and the
//! adiabatic-limit residue formula, plus detailed-balance and ℓ → 0 studies.

mod adiabatic;
mod finite;
mod strip;
mod switching;

pub use adiabatic::{
    calibration_constant, classical_limit_study, detailed_balance_gap, falloff_gate, response_adiabatic,
    response_adiabatic_sweep, w_grid, AdiabaticConfig, DetailedBalance, LimitRow, LimitStudy, LimitVerdict, WGrid,
};
pub use finite::{response_finite_sigma, response_finite_sigma_sweep, QuadConfig};
pub use strip::{
    default_min_sep, in_strip, multi_residue, pole_map, residue_sum_at_w, scan_strip, strip_residue_sums,
    strip_residue_sums_shifted, ScanConfig,
};
pub use switching::SwitchingProfile;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest `|Ω|·a` accepted; the residue prefactor `1/(1 − e^{4πΩ/a})` is
/// singular at Ω = 0.
pub const MIN_ABS_OMEGA_A: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Quadrature,
    Residue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseStatus {
    Converged,
    /// The σ-ladder did not settle; the value is the last extrapolant.
    NonConvergent,
    /// The model fails the fall-off gate; no value is computed.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseResult {
    pub omega: f64,
    pub value: Option<f64>,
    #[serde(with = "crate::serde_real")]
    pub abs_error: f64,
    pub method: Method,
    /// `None` for σ = ∞.
    pub sigma: Option<f64>,
    /// Measured ratio quadrature / residue (see [`calibration_constant`]).
    #[serde(with = "crate::serde_real")]
    pub calibration: f64,
    /// Imaginary part of the raw complex result, folded into `abs_error`.
    pub raw_imag: f64,
    pub status: ResponseStatus,
    pub notes: Vec<String>,
}

impl ResponseResult {
    pub fn is_converged(&self) -> bool {
        self.status == ResponseStatus::Converged
    }

    /// The value, or an error naming why there is none or why it is unreliable.
    pub fn converged_value(&self) -> Result<f64> {
        match (self.status, self.value) {
            (ResponseStatus::Converged, Some(v)) => Ok(v),
            (s, _) => Err(Error::NonConvergent(format!("response at Ω={} is {s:?}: {}", self.omega, self.notes.join("; ")))),
        }
    }
}

pub(crate) fn check_omega(omega: f64, a: f64) -> Result<()> {
    if !omega.is_finite() || omega.abs() / a < MIN_ABS_OMEGA_A {
        return Err(Error::InvalidParameter(format!("|Ω|/a must be at least {MIN_ABS_OMEGA_A}, got Ω={omega}")));
    }
    Ok(())
}
