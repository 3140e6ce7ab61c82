use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gl16, graded_panels};

/// Gaussian switching `χ(y) = C·e^{−y²/2}` applied as `χ(τ/σ)`, with `C` fixed by
/// `∫χ² dy = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingProfile {
    pub sigma: f64,
    pub norm: f64,
}

impl SwitchingProfile {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("switching width must be positive, got {sigma}")));
        }
        let sw = Self { sigma, norm: std::f64::consts::PI.powf(-0.25) };
        let n = sw.norm_integral();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Quadrature(format!("switching normalisation check gave {n}")));
        }
        Ok(sw)
    }

    pub fn chi(&self, y: f64) -> f64 {
        self.norm * (-0.5 * y * y).exp()
    }

    /// `∫χ(y)² dy` by composite Gauss–Legendre on `[−12, 12]`.
    pub fn norm_integral(&self) -> f64 {
        let pts = graded_panels(0.5, 0.5, 12.0);
        let rule = gl16();
        let mut s = 0.0;
        for p in pts.windows(2) {
            for (x, wt) in rule.mapped(p[0], p[1]) {
                s += 2.0 * wt * self.chi(x).powi(2);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalised_and_validated() {
        let sw = SwitchingProfile::gaussian(40.0).unwrap();
        assert!((sw.norm_integral() - 1.0).abs() < 1e-13);
        assert!(SwitchingProfile::gaussian(0.0).is_err());
        assert!(SwitchingProfile::gaussian(f64::NAN).is_err());
    }
}
