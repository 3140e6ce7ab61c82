//! Numerical complex analysis on caller-supplied meromorphic functions: argument
//! principle counts, pole location by rectangle subdivision, residues by contour
//! integration, pole tracking along a parameter, and growth classification.

mod contour;
mod growth;
mod poles;
mod residue;
mod track;

pub use contour::{boundary_moments, circle_integral, log_derivative, winding_count, LogForm, Meromorphic, Moments};
pub use growth::{growth_exponent, GrowthEstimate, GrowthTag, Ray, DEFAULT_R_LADDER};
pub use poles::{locate_poles, locate_poles_log, locate_poles_with, refine_pole, LocateOptions};
pub use residue::{residue_at, residue_sum, residues};
pub use track::{track_poles, PoleEvent, PoleTracks, TrackOptions, Trajectory};

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned rectangle in ℂ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !ok || re_min >= re_max || im_min >= im_max {
            return Err(Error::InvalidParameter(format!(
                "degenerate rectangle [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    pub fn centered(center: Complex64, half: f64) -> Self {
        Self { re_min: center.re - half, re_max: center.re + half, im_min: center.im - half, im_max: center.im + half }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn diag(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Corners in counter-clockwise order starting bottom-left.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    /// Split across the longer side at fraction `t` of its length.
    pub fn split(&self, t: f64) -> (Rect, Rect) {
        if self.width() >= self.height() {
            let x = self.re_min + t * self.width();
            (Rect { re_max: x, ..*self }, Rect { re_min: x, ..*self })
        } else {
            let y = self.im_min + t * self.height();
            (Rect { im_max: y, ..*self }, Rect { im_min: y, ..*self })
        }
    }
}

/// A located pole (or an unresolved cluster of poles, when `order_estimate`
/// aggregates several).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub position: Complex64,
    pub order_estimate: u32,
    pub residue: Complex64,
    /// Label of the reference pole this one continues, when known.
    pub provenance: Option<String>,
    /// Set when the entry stands for structure closer than the scan's separation
    /// scale: position is the centroid and order the net count of the cluster.
    pub cluster_id: Option<usize>,
}

impl Pole {
    pub fn new(position: Complex64, order: u32) -> Self {
        Self { position, order_estimate: order, residue: Complex64::new(0.0, 0.0), provenance: None, cluster_id: None }
    }
}

/// Deterministic ordering used everywhere poles are summed or reported.
pub fn sort_poles(poles: &mut [Pole]) {
    poles.sort_by(|a, b| a.position.im.total_cmp(&b.position.im).then(a.position.re.total_cmp(&b.position.re)));
}

/// Debug dump: `re,im,order,abs_residue`.
pub fn write_pole_csv<W: Write>(mut out: W, poles: &[Pole]) -> std::io::Result<()> {
    writeln!(out, "re,im,order,abs_residue")?;
    for p in poles {
        writeln!(out, "{:.16e},{:.16e},{},{:.16e}", p.position.re, p.position.im, p.order_estimate, p.residue.norm())?;
    }
    Ok(())
}
