use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Half-line `origin + r·direction`, `r ≥ 0`; `direction` is normalised on use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Complex64,
    pub direction: Complex64,
}

impl Ray {
    pub fn new(origin: Complex64, direction: Complex64) -> Self {
        Self { origin, direction: direction / direction.norm() }
    }

    pub fn at(&self, r: f64) -> Complex64 {
        self.origin + self.direction * r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthTag {
    Polynomial,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    /// Largest least-squares slope of `ln|f|` against `ln r` over all rays.
    #[serde(with = "crate::serde_real")]
    pub exponent: f64,
    pub tag: GrowthTag,
    #[serde(with = "crate::serde_real::vec")]
    pub per_ray: Vec<f64>,
}

/// Log-magnitude used for fitting; underflow counts as strong decay.
fn log_mag(v: Complex64) -> Option<f64> {
    let m = v.norm();
    if m.is_nan() || m.is_infinite() || m > 1e300 {
        None
    } else if m < 1e-300 {
        Some(-700.0)
    } else {
        Some(m.ln())
    }
}

/// Polynomial vs. faster-than-polynomial growth of `|f|` along rays.
///
/// A power law has constant local log–log slopes along the ladder. Anything whose
/// local slope keeps climbing (`s_last > 4` and `s_last > 1.5·max(s_first, 0) + 1`)
/// or that overflows is tagged exponential.
pub fn growth_exponent<F: Fn(Complex64) -> Complex64>(f: &F, rays: &[Ray], r_ladder: &[f64]) -> GrowthEstimate {
    assert!(r_ladder.len() >= 3, "need at least three radii");
    let mut per_ray = Vec::with_capacity(rays.len());
    let mut tag = GrowthTag::Polynomial;
    for ray in rays {
        let logs: Option<Vec<f64>> = r_ladder.iter().map(|&r| log_mag(f(ray.at(r)))).collect();
        let Some(logs) = logs else {
            tag = GrowthTag::Exponential;
            per_ray.push(f64::INFINITY);
            continue;
        };
        let lr: Vec<f64> = r_ladder.iter().map(|r| r.ln()).collect();
        let n = lr.len() as f64;
        let mx = lr.iter().sum::<f64>() / n;
        let my = logs.iter().sum::<f64>() / n;
        let sxy: f64 = lr.iter().zip(&logs).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = lr.iter().map(|x| (x - mx).powi(2)).sum();
        per_ray.push(sxy / sxx);
        let local: Vec<f64> = (1..lr.len()).map(|k| (logs[k] - logs[k - 1]) / (lr[k] - lr[k - 1])).collect();
        let (first, last) = (local[0], *local.last().unwrap());
        if last > 4.0 && last > 1.5 * first.max(0.0) + 1.0 {
            tag = GrowthTag::Exponential;
        }
    }
    let exponent = per_ray.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    GrowthEstimate { exponent, tag, per_ray }
}

pub const DEFAULT_R_LADDER: [f64; 4] = [10.0, 20.0, 40.0, 80.0];

#[cfg(test)]
mod tests {
    use super::*;

    fn real_ray() -> Ray {
        Ray::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    #[test]
    fn cubic_is_polynomial() {
        let g = growth_exponent(&|z: Complex64| z.powi(3), &[real_ray()], &DEFAULT_R_LADDER);
        assert!((g.exponent - 3.0).abs() < 0.01);
        assert_eq!(g.tag, GrowthTag::Polynomial);
    }

    #[test]
    fn exponentials_are_flagged() {
        let g = growth_exponent(&|z: Complex64| z.exp(), &[real_ray()], &DEFAULT_R_LADDER);
        assert_eq!(g.tag, GrowthTag::Exponential);
        let g = growth_exponent(&|z: Complex64| (z * 0.5).cosh(), &[real_ray()], &[5.0, 10.0, 20.0, 40.0]);
        assert_eq!(g.tag, GrowthTag::Exponential);
        let g = growth_exponent(&|z: Complex64| (z * z).exp(), &[real_ray()], &DEFAULT_R_LADDER);
        assert_eq!(g.tag, GrowthTag::Exponential);
    }

    #[test]
    fn decay_and_high_powers_are_polynomial() {
        let g = growth_exponent(&|z: Complex64| (-z).exp(), &[real_ray()], &DEFAULT_R_LADDER);
        assert_eq!(g.tag, GrowthTag::Polynomial);
        assert!(g.exponent < 0.0);
        let g = growth_exponent(&|z: Complex64| z.powi(10), &[real_ray()], &DEFAULT_R_LADDER);
        assert_eq!(g.tag, GrowthTag::Polynomial);
    }
}
