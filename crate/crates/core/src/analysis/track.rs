//! Pole trajectories along a deformation parameter ℓ.
//!
//! The family is scanned on the ladder plus the reference point ℓ = 0, then
//! consecutive snapshots are joined by greedy nearest-neighbour matching in
//! order of increasing ℓ, so that every trajectory can inherit the label of its
//! ℓ = 0 ancestor. Steps whose matches move by more than half the resolution
//! scale are refined with geometric midpoints.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::poles::{locate_poles_with, LocateOptions};
use super::{Pole, Rect};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct TrackOptions {
    /// Separation scale at ℓ = 0; at ℓ > 0 the scale is `min(min_sep_cap, ℓ/2)`.
    pub min_sep_cap: f64,
    /// Unmatched poles born or absorbed within this distance of a pole in the
    /// neighbouring snapshot count as a split or merge of that pole.
    pub cluster_radius: f64,
    pub max_insertions: usize,
    /// Reverse the tie-break among equidistant candidates. The output must not
    /// depend on it; exposed for testing that claim.
    pub reverse_ties: bool,
}

impl TrackOptions {
    pub fn new(min_sep_cap: f64, cluster_radius: f64) -> Self {
        Self { min_sep_cap, cluster_radius, max_insertions: 96, reverse_ties: false }
    }

    pub fn min_sep(&self, ell: f64) -> f64 {
        if ell > 0.0 {
            self.min_sep_cap.min(ell / 2.0)
        } else {
            self.min_sep_cap
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PoleEvent {
    /// A pole with no predecessor appeared at `ell`.
    EnteredRegion { ell: f64, position: Complex64 },
    /// A pole present at the smaller neighbour `ell_below` has no successor at `ell`.
    LeftRegion { ell: f64, position: Complex64 },
    /// A new pole at `ell` was born next to `parent` (a pole of the smaller-ℓ snapshot).
    Split { ell: f64, parent: Complex64, child: Complex64 },
    /// A pole of the smaller-ℓ snapshot disappeared next to `into`.
    Merged { ell: f64, absorbed: Complex64, into: Complex64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Label of the ℓ = 0 ancestor (`"p0"`, `"p1"`, … in (Im, Re) order), or `None`
    /// for a pole with no ℓ = 0 ancestor.
    pub provenance: Option<String>,
    /// True when the trajectory started by splitting off an existing pole; its
    /// provenance is then inherited from the parent.
    pub split_born: bool,
    /// `(ℓ, position, order)` in increasing ℓ.
    pub points: Vec<(f64, Complex64, u32)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoleTracks {
    /// Ladder after refinement, increasing, starting at 0.
    pub ells: Vec<f64>,
    pub snapshots: Vec<Vec<Pole>>,
    pub trajectories: Vec<Trajectory>,
    pub events: Vec<PoleEvent>,
}

impl PoleTracks {
    /// Poles of the snapshot at `ell` (exact ladder value).
    pub fn at(&self, ell: f64) -> Option<&[Pole]> {
        self.ells.iter().position(|&e| e == ell).map(|k| self.snapshots[k].as_slice())
    }
}

/// Track the poles of `family(ℓ, ·)` in `region` along a strictly decreasing,
/// positive `ell_ladder`; `family(0, ·)` must be the undeformed reference.
pub fn track_poles<F>(family: &F, ell_ladder: &[f64], region: &Rect, opts: &TrackOptions) -> Result<PoleTracks>
where
    F: Fn(f64, Complex64) -> Complex64 + Sync,
{
    if ell_ladder.is_empty() {
        return Err(Error::InvalidParameter("empty ell ladder".into()));
    }
    if ell_ladder.windows(2).any(|w| !(w[1] < w[0])) || ell_ladder.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter("ell ladder must be positive and strictly decreasing".into()));
    }
    let mut ells: Vec<f64> = std::iter::once(0.0).chain(ell_ladder.iter().rev().copied()).collect();
    let mut snaps: Vec<Vec<Pole>> = ells.par_iter().map(|&e| scan(family, e, region, opts)).collect::<Result<_>>()?;

    let mut inserted = 0;
    let mut links: Vec<Vec<Option<usize>>> = Vec::new();
    let mut k = 0;
    while k + 1 < ells.len() {
        let step = match_step(&snaps[k], &snaps[k + 1], ells[k], ells[k + 1], opts);
        if step.needs_refinement && inserted < opts.max_insertions && ells[k + 1] / ells[k].max(1e-300) > 1.0005 {
            let mid = if ells[k] > 0.0 { (ells[k] * ells[k + 1]).sqrt() } else { 0.5 * ells[k + 1] };
            snaps.insert(k + 1, scan(family, mid, region, opts)?);
            ells.insert(k + 1, mid);
            inserted += 1;
            continue;
        }
        if step.needs_refinement && step.forced {
            return Err(Error::Tracking(format!(
                "ambiguous matching between ell={} and ell={} after {inserted} ladder insertions: {:?} vs {:?}",
                ells[k],
                ells[k + 1],
                positions(&snaps[k]),
                positions(&snaps[k + 1])
            )));
        }
        links.push(step.forward);
        k += 1;
    }

    let (trajectories, events) = assemble(&ells, &snaps, &links, opts);
    Ok(PoleTracks { ells, snapshots: snaps, trajectories, events })
}

fn positions(ps: &[Pole]) -> Vec<Complex64> {
    ps.iter().map(|p| p.position).collect()
}

fn scan<F>(family: &F, ell: f64, region: &Rect, opts: &TrackOptions) -> Result<Vec<Pole>>
where
    F: Fn(f64, Complex64) -> Complex64 + Sync,
{
    let mut lo = LocateOptions::new(opts.min_sep(ell));
    lo.compute_residues = false;
    locate_poles_with(&|z| family(ell, z), region, &lo)
        .map_err(|e| Error::Tracking(format!("pole scan failed at ell={ell}: {e}")))
}

struct Step {
    /// `forward[i]` = index in the larger-ℓ snapshot continuing pole `i`.
    forward: Vec<Option<usize>>,
    needs_refinement: bool,
    /// Refinement is required for correctness, not merely helpful.
    forced: bool,
}

fn match_step(lo: &[Pole], hi: &[Pole], ell_lo: f64, ell_hi: f64, opts: &TrackOptions) -> Step {
    let sep = opts.min_sep(ell_hi);
    let reach = sep;
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in lo.iter().enumerate() {
        for (j, q) in hi.iter().enumerate() {
            let d = (p.position - q.position).norm();
            if d < reach {
                pairs.push((d, i, j));
            }
        }
    }
    // Snapshots are (Im, Re)-sorted, so index order is a deterministic tie-break.
    pairs.sort_by(|a, b| {
        let t = a.0.total_cmp(&b.0);
        if opts.reverse_ties {
            t.then(b.1.cmp(&a.1)).then(b.2.cmp(&a.2))
        } else {
            t.then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
        }
    });
    let tie_tol = 1e-9 * sep;
    let mut forward = vec![None; lo.len()];
    let mut taken = vec![false; hi.len()];
    let mut needs = false;
    let mut forced = false;
    for (idx, &(d, i, j)) in pairs.iter().enumerate() {
        if forward[i].is_some() || taken[j] {
            continue;
        }
        // Another still-open candidate at the same distance sharing a pole makes
        // the choice tie-break dependent.
        let tied = pairs[idx + 1..].iter().take_while(|c| c.0 - d <= tie_tol).any(|&(_, i2, j2)| {
            (i2 == i && !taken[j2]) || (j2 == j && forward[i2].is_none())
        });
        if tied && d > 0.0 {
            needs = true;
            forced = true;
        }
        forward[i] = Some(j);
        taken[j] = true;
        if d >= sep / 2.0 {
            needs = true;
            forced = true;
        }
    }
    if ell_lo > 0.0 {
        // Unmatched poles with a nearby counterpart may just have moved too far.
        let near = |z: Complex64, set: &[Pole]| set.iter().any(|q| (q.position - z).norm() < 3.0 * reach);
        let lost = lo.iter().enumerate().any(|(i, p)| forward[i].is_none() && near(p.position, hi));
        let fresh = hi.iter().enumerate().any(|(j, q)| !taken[j] && near(q.position, lo));
        needs |= lost || fresh;
    }
    Step { forward, needs_refinement: needs, forced }
}

fn assemble(
    ells: &[f64],
    snaps: &[Vec<Pole>],
    links: &[Vec<Option<usize>>],
    opts: &TrackOptions,
) -> (Vec<Trajectory>, Vec<PoleEvent>) {
    let mut trajectories: Vec<Trajectory> = Vec::new();
    let mut events = Vec::new();
    // owner[j] = trajectory index of pole j in the current snapshot.
    let mut owner: Vec<usize> = Vec::new();
    for (j, p) in snaps[0].iter().enumerate() {
        trajectories.push(Trajectory {
            provenance: Some(format!("p{j}")),
            split_born: false,
            points: vec![(0.0, p.position, p.order_estimate)],
        });
        owner.push(j);
    }
    for (k, fwd) in links.iter().enumerate() {
        let (lo, hi, ell) = (&snaps[k], &snaps[k + 1], ells[k + 1]);
        let mut next_owner = vec![usize::MAX; hi.len()];
        for (i, m) in fwd.iter().enumerate() {
            if let Some(j) = *m {
                next_owner[j] = owner[i];
                trajectories[owner[i]].points.push((ell, hi[j].position, hi[j].order_estimate));
            }
        }
        let nearest = |z: Complex64, set: &[Pole]| {
            set.iter()
                .enumerate()
                .map(|(n, q)| ((q.position - z).norm(), n))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .filter(|(d, _)| *d <= opts.cluster_radius)
                .map(|(_, n)| n)
        };
        for (i, m) in fwd.iter().enumerate() {
            if m.is_none() {
                let z = lo[i].position;
                events.push(match nearest(z, hi) {
                    Some(n) => PoleEvent::Merged { ell, absorbed: z, into: hi[n].position },
                    None => PoleEvent::LeftRegion { ell, position: z },
                });
            }
        }
        for (j, q) in hi.iter().enumerate() {
            if next_owner[j] != usize::MAX {
                continue;
            }
            let z = q.position;
            let (provenance, split_born) = match nearest(z, lo) {
                Some(n) => {
                    events.push(PoleEvent::Split { ell, parent: lo[n].position, child: z });
                    (trajectories[owner[n]].provenance.clone(), true)
                }
                None => {
                    events.push(PoleEvent::EnteredRegion { ell, position: z });
                    (None, false)
                }
            };
            next_owner[j] = trajectories.len();
            trajectories.push(Trajectory { provenance, split_born, points: vec![(ell, z, q.order_estimate)] });
        }
        owner = next_owner;
    }
    (trajectories, events)
}
