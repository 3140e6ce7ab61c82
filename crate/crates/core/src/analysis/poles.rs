//! Pole location by recursive bisection driven by boundary moments of `f′/f`.
//!
//! Every rectangle gets its signed count `s₀` and first two moments. Empty
//! rectangles (all three moments negligible) are dropped; rectangles holding a
//! single point are resolved directly from `s₁/s₀`; everything else is bisected.
//! Pole–zero pairs have `s₀ = 0` but non-zero higher moments, so they are still
//! subdivided until separated.

use num_complex::Complex64;

use super::contour::{boundary_moments, LogForm, Meromorphic};
use super::residue::residues;
use super::{sort_poles, Pole, Rect};
use crate::error::{Error, Result};

/// Deterministic split fractions tried when a bisection line passes too close to
/// a singularity.
const JITTER: [f64; 9] = [0.5371, 0.4529, 0.5713, 0.4183, 0.6093, 0.3723, 0.6459, 0.3379, 0.5];

#[derive(Debug, Clone, Copy)]
pub struct LocateOptions {
    /// Poles closer than this are not guaranteed to be resolved.
    pub min_sep: f64,
    /// Upper bound on the radius of residue circles.
    pub residue_radius: f64,
    pub compute_residues: bool,
}

impl LocateOptions {
    pub fn new(min_sep: f64) -> Self {
        Self { min_sep, residue_radius: min_sep, compute_residues: true }
    }
}

/// All poles of `f` inside `region`, sorted by (Im, Re), with orders and residues.
pub fn locate_poles<F>(f: &F, region: &Rect, min_sep: f64) -> Result<Vec<Pole>>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    locate_poles_with(f, region, &LocateOptions::new(min_sep))
}

pub fn locate_poles_with<F>(f: &F, region: &Rect, opts: &LocateOptions) -> Result<Vec<Pole>>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let mut poles = scan_region(f, region, opts.min_sep)?;
    if opts.compute_residues && !poles.is_empty() {
        let res = residues(f, &poles, opts.residue_radius)?;
        for (p, r) in poles.iter_mut().zip(res) {
            p.residue = r;
        }
    }
    Ok(poles)
}

/// Pole scan of `f = exp(logf)` without residues. For functions whose magnitude
/// spans more than the floating-point range across the region.
pub fn locate_poles_log<G>(logf: &G, region: &Rect, min_sep: f64) -> Result<Vec<Pole>>
where
    G: Fn(Complex64) -> Complex64 + Sync,
{
    scan_region(&LogForm(logf), region, min_sep)
}

fn scan_region<M: Meromorphic + Sync + ?Sized>(f: &M, region: &Rect, min_sep: f64) -> Result<Vec<Pole>> {
    if !(min_sep > 0.0) {
        return Err(Error::InvalidParameter("min_sep must be positive".into()));
    }
    let scanner = Scanner { f, floor: min_sep / 4.0, scale: region.diag() };
    let mut poles = scanner.scan(region, 0).map_err(|e| match e {
        Error::BoundaryTooClose(m) => Error::PoleScan(format!("region boundary: {m}")),
        other => other,
    })?;
    recentre_clusters(&scanner, &mut poles, min_sep);
    sort_poles(&mut poles);
    for (k, p) in poles.iter_mut().filter(|p| p.cluster_id.is_some()).enumerate() {
        p.cluster_id = Some(k);
    }
    Ok(poles)
}

/// A bisection line can cut through a cluster, leaving part of it (a nearby zero,
/// say) in a sibling box and biasing the centroid. Re-measure every cluster on a
/// box of the separation scale that holds no other reported pole.
fn recentre_clusters<M: Meromorphic + Sync + ?Sized>(scanner: &Scanner<'_, M>, poles: &mut [Pole], min_sep: f64) {
    for i in 0..poles.len() {
        if poles[i].cluster_id.is_none() {
            continue;
        }
        let at = poles[i].position;
        for t in JITTER {
            let bx = Rect::centered(at, 0.6 * t * min_sep);
            if poles.iter().enumerate().any(|(j, q)| j != i && bx.contains(q.position)) {
                continue;
            }
            match scanner.classify(&bx) {
                Ok(Content::Point { at: c, count } | Content::Many { count, centroid: Some(c) }) if count < 0 && bx.contains(c) => {
                    poles[i].position = c;
                    poles[i].order_estimate = (-count) as u32;
                    break;
                }
                Err(Error::BoundaryTooClose(_)) => continue,
                _ => break,
            }
        }
    }
}

struct Scanner<'a, F: ?Sized> {
    f: &'a F,
    floor: f64,
    scale: f64,
}

enum Content {
    Empty,
    Point { at: Complex64, count: i64 },
    Many { count: i64, centroid: Option<Complex64> },
}

impl<F> Scanner<'_, F>
where
    F: Meromorphic + Sync + ?Sized,
{
    fn classify(&self, rect: &Rect) -> Result<Content> {
        let m = boundary_moments(self.f, rect)?;
        let n = m.s[0].re.round();
        if (m.s[0].re - n).abs() > 0.05 || m.s[0].im.abs() > 0.05 {
            return Err(Error::BoundaryTooClose(format!("non-integer count {} on {rect:?}", m.s[0])));
        }
        let d = rect.diag();
        let count = n as i64;
        if count == 0 {
            if m.s[1].norm() < 1e-7 * d && m.s[2].norm() < 1e-7 * d * d {
                return Ok(Content::Empty);
            }
            return Ok(Content::Many { count, centroid: None });
        }
        let mu = m.s[1] / n;
        let spread = m.s[2] / n - mu * mu;
        let at = m.center + mu;
        if spread.norm() < 1e-8 * d * d && rect.contains(at) {
            Ok(Content::Point { at, count })
        } else {
            Ok(Content::Many { count, centroid: Some(at) })
        }
    }

    fn scan(&self, rect: &Rect, depth: u32) -> Result<Vec<Pole>> {
        match self.classify(rect)? {
            Content::Empty => Ok(vec![]),
            Content::Point { at, count } => {
                if count > 0 {
                    return Ok(vec![]);
                }
                let order = (-count) as u32;
                Ok(vec![Pole::new(self.refine(at, order, rect), order)])
            }
            Content::Many { count, centroid } => {
                let d = rect.diag();
                if d < self.floor {
                    if let (true, Some(at)) = (count < 0, centroid) {
                        // Unresolved cluster below the separation floor.
                        let mut p = Pole::new(at, (-count) as u32);
                        p.cluster_id = Some(0);
                        return Ok(vec![p]);
                    }
                    if d < self.floor / 256.0 || depth > 200 {
                        return Err(Error::PoleScan(format!(
                            "unresolved singular structure (net count {count}) in {rect:?}"
                        )));
                    }
                }
                self.split(rect, depth)
            }
        }
    }

    fn split(&self, rect: &Rect, depth: u32) -> Result<Vec<Pole>> {
        let mut last = None;
        for t in JITTER {
            let (a, b) = rect.split(t);
            let (ra, rb) = rayon::join(|| self.scan(&a, depth + 1), || self.scan(&b, depth + 1));
            match (ra, rb) {
                (Ok(mut pa), Ok(pb)) => {
                    pa.extend(pb);
                    return Ok(pa);
                }
                (Err(e @ Error::BoundaryTooClose(_)), _) | (_, Err(e @ Error::BoundaryTooClose(_))) => {
                    last = Some(e);
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
        Err(Error::PoleScan(format!(
            "subdivision of {rect:?} failed after {} jitters: {}",
            JITTER.len() - 1,
            last.map(|e| e.to_string()).unwrap_or_default()
        )))
    }

    /// Newton polish of a moment centroid. The centroid is already accurate to a
    /// small fraction of the box, so a large move means Newton was captured by the
    /// holomorphic part of `f′/f`; the centroid is kept then.
    fn refine(&self, start: Complex64, order: u32, rect: &Rect) -> Complex64 {
        let z = refine_pole(self.f, start, order, rect, self.scale);
        if (z - start).norm() <= 1e-2 * rect.diag() {
            z
        } else {
            start
        }
    }
}

/// Newton iteration on `1/f` for a pole of known order, `z ← z + m/(f′/f)`,
/// confined to within one diagonal of `rect` from `start`. `scale` sets the
/// absolute stopping threshold.
pub fn refine_pole<F: Meromorphic + ?Sized>(f: &F, start: Complex64, order: u32, rect: &Rect, scale: f64) -> Complex64 {
    let m = order as f64;
    let mut z = start;
    let mut step_len = rect.diag() * 0.25;
    let tiny = 1e-15 * scale.max(1.0);
    for _ in 0..40 {
        let h = (1e-3 * step_len).max(1e-12 * (1.0 + z.norm()));
        let g = f.log_derivative(z, h);
        if !(g.re.is_finite() && g.im.is_finite()) || g.norm() == 0.0 {
            break;
        }
        let step = m / g;
        if step.norm() > rect.diag() {
            break;
        }
        let next = z + step;
        if (next - start).norm() > rect.diag() {
            break;
        }
        z = next;
        if step.norm() < tiny || step.norm() >= step_len && step_len < 1e-9 * scale {
            break;
        }
        step_len = step.norm().max(tiny);
    }
    z
}
