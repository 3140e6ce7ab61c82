//! Verdict engine: the four KMS sub-conditions, the three preservation
//! conditions, and the assembled comparison table.

mod conditions;
mod kms;

pub use conditions::{check_condition_a, check_condition_b, check_condition_c, ClusterRow, ConditionA, ConditionB, ConditionC};
pub use kms::{
    check_holomorphicity, check_imaginary_periodicity, check_polynomial_bound, check_stationarity, HolomorphicityCheck,
    PolynomialCheck, SymmetryCheck,
};

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{GrowthEstimate, GrowthTag};
use crate::error::{Error, Result};
use crate::kinematics::Accel;
use crate::response::{detailed_balance_gap, falloff_gate, AdiabaticConfig, DetailedBalance, Method, QuadConfig};
use crate::wightman::{DeformationSpec, ExpectedVerdicts, PullbackModel, Verdict};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub a: f64,
    pub omega: f64,
    /// Descending ℓ-ladder for conditions A and C.
    pub ell_ladder: Vec<f64>,
    /// Points per axis of the (w, z) grid of the symmetry checks.
    pub kms_grid: usize,
    /// The symmetry grid covers `[−h/a, h/a]²`.
    pub kms_half_width: f64,
    /// `|w|·a` values probed by condition B.
    pub b_ladder: Vec<f64>,
    /// `w·a` values at which condition C tracks poles.
    pub c_w_values: Vec<f64>,
    pub symmetry_tol: f64,
    pub convergence_tol: f64,
    pub adiabatic: AdiabaticConfig,
    pub detailed_balance: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            omega: 1.0,
            ell_ladder: vec![0.1, 0.03, 0.01],
            kms_grid: 32,
            kms_half_width: 4.0,
            b_ladder: vec![5.0, 10.0, 20.0, 40.0],
            c_w_values: vec![0.0, 2.0],
            symmetry_tol: 1e-8,
            convergence_tol: 1e-4,
            adiabatic: AdiabaticConfig::default(),
            detailed_balance: true,
        }
    }
}

fn densify(xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * xs.len());
    for w in xs.windows(2) {
        out.push(w[0]);
        out.push(if w[0] > 0.0 && w[1] > 0.0 { (w[0] * w[1]).sqrt() } else { 0.5 * (w[0] + w[1]) });
    }
    out.extend(xs.last());
    out
}

impl DiagnosticsConfig {
    /// Every grid and ladder refined by a factor of two.
    pub fn refined(&self) -> Self {
        let mut sigma = densify(&self.adiabatic.sigma_ladder);
        sigma.dedup();
        Self {
            ell_ladder: densify(&self.ell_ladder),
            kms_grid: 2 * self.kms_grid,
            b_ladder: densify(&self.b_ladder),
            c_w_values: densify(&self.c_w_values),
            adiabatic: AdiabaticConfig {
                sigma_ladder: sigma,
                scan: crate::response::ScanConfig { rescan_every: (self.adiabatic.scan.rescan_every / 2).max(1), ..self.adiabatic.scan },
                w_first_panel: 0.5 * self.adiabatic.w_first_panel,
                ..self.adiabatic.clone()
            },
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad("acceleration must be positive");
        }
        if self.ell_ladder.is_empty() || self.ell_ladder.windows(2).any(|w| !(w[1] < w[0])) || self.ell_ladder.iter().any(|l| !(*l > 0.0)) {
            return bad("ℓ ladder must be positive and strictly descending");
        }
        if self.kms_grid < 2 || !(self.kms_half_width > 0.0) {
            return bad("symmetry grid needs at least 2 points per axis and positive extent");
        }
        if self.b_ladder.len() < 2 || self.b_ladder.windows(2).any(|w| !(w[1] > w[0])) || self.b_ladder[0] <= 0.0 {
            return bad("w ladder must be positive and strictly ascending");
        }
        if !(self.symmetry_tol > 0.0 && self.convergence_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }
}

/// Tri-state verdict with the evidence that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check<T> {
    pub verdict: Verdict,
    pub evidence: Option<T>,
    pub note: Option<String>,
}

impl<T> Check<T> {
    fn skipped(note: &str) -> Self {
        Self { verdict: Verdict::Indeterminate, evidence: None, note: Some(note.to_string()) }
    }

    fn failed(e: Error) -> Self {
        Self { verdict: Verdict::Indeterminate, evidence: None, note: Some(e.to_string()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub symmetry: f64,
    pub convergence: f64,
    pub sigma_extrapolation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub schema_version: u32,
    pub spec_id: String,
    pub name: String,
    pub a: f64,
    pub ell: Option<f64>,
    pub omega: f64,
    pub thresholds: Thresholds,
    pub kms_imaginary_periodicity: SymmetryCheck,
    pub kms_stationarity: SymmetryCheck,
    pub kms_holomorphicity: HolomorphicityCheck,
    pub kms_polynomial_bound: PolynomialCheck,
    /// Growth of `𝒟` with `|Δt|`. Exponential growth voids the residue formula and
    /// with it every response-based field below.
    pub falloff: Option<GrowthEstimate>,
    pub cond_a: Check<ConditionA>,
    pub cond_b: Check<ConditionB>,
    pub cond_c: Check<ConditionC>,
    pub detailed_balance_gap: Check<DetailedBalance>,
    pub preservation: Verdict,
}

impl VerdictReport {
    pub fn verdicts(&self) -> ExpectedVerdicts {
        ExpectedVerdicts {
            imaginary_periodicity: self.kms_imaginary_periodicity.verdict,
            stationarity: self.kms_stationarity.verdict,
            holomorphicity: self.kms_holomorphicity.verdict,
            polynomial_bound: self.kms_polynomial_bound.verdict,
            preservation: self.preservation,
        }
    }

    pub fn kms_all_yes(&self) -> bool {
        self.verdicts().as_array()[..4].iter().all(|v| *v == Verdict::Yes)
    }
}

/// Conjunction in three-valued logic: any No wins, then any Indeterminate.
pub fn conjunction(vs: &[Verdict]) -> Verdict {
    if vs.contains(&Verdict::No) {
        Verdict::No
    } else if vs.contains(&Verdict::Indeterminate) {
        Verdict::Indeterminate
    } else {
        Verdict::Yes
    }
}

/// Run every check on `model`. Failures are recorded per field and never abort the report.
pub fn classify(model: &PullbackModel, cfg: &DiagnosticsConfig) -> VerdictReport {
    let (n, h, tol) = (cfg.kms_grid, cfg.kms_half_width, cfg.symmetry_tol);
    let (((periodicity, stationarity), (holomorphicity, polynomial)), falloff) = rayon::join(
        || {
            rayon::join(
                || rayon::join(|| check_imaginary_periodicity(model, n, h, tol), || check_stationarity(model, n, h, tol)),
                || rayon::join(|| check_holomorphicity(model), || check_polynomial_bound(model)),
            )
        },
        || falloff_gate(model),
    );
    let gate_open = falloff.as_ref().is_none_or(|g| g.tag == GrowthTag::Polynomial);
    let (cond_a, cond_b, cond_c, balance) = if gate_open {
        let ((a, b), (c, db)) = rayon::join(
            || {
                rayon::join(
                    || match check_condition_a(model, cfg.omega, &cfg.ell_ladder, &cfg.adiabatic, cfg.convergence_tol) {
                        Ok(r) => Check { verdict: r.verdict, note: r.note.clone(), evidence: Some(r) },
                        Err(e) => Check::failed(e),
                    },
                    || {
                        let r = check_condition_b(model, cfg.omega, &cfg.b_ladder, &cfg.adiabatic);
                        Check { verdict: r.verdict, note: r.note.clone(), evidence: Some(r) }
                    },
                )
            },
            || {
                rayon::join(
                    || {
                        let r = check_condition_c(model, &cfg.ell_ladder, &cfg.c_w_values, &cfg.adiabatic);
                        Check { verdict: r.verdict, note: r.note.clone(), evidence: Some(r) }
                    },
                    || {
                        if !cfg.detailed_balance {
                            return Check::skipped("not requested");
                        }
                        match detailed_balance_gap(model, cfg.omega.abs(), Method::Residue, &cfg.adiabatic, &QuadConfig::default(), 80.0) {
                            Ok(d) => Check { verdict: Verdict::from_bool(d.gap.abs() <= 3.0 * d.error.max(cfg.convergence_tol)), evidence: Some(d), note: None },
                            Err(e) => Check::failed(e),
                        }
                    },
                )
            },
        );
        (a, b, c, db)
    } else {
        let why = "deformation grows exponentially in |Δt|; residue formula not applicable";
        (Check::skipped(why), Check::skipped(why), Check::skipped(why), Check::skipped(why))
    };
    let preservation = if gate_open {
        conjunction(&[cond_a.verdict, cond_b.verdict, cond_c.verdict])
    } else {
        Verdict::Indeterminate
    };
    VerdictReport {
        schema_version: SCHEMA_VERSION,
        spec_id: model.id().to_string(),
        name: model.deformation.as_ref().map_or("undeformed".to_string(), |d| d.name.clone()),
        a: model.a.get(),
        ell: model.ell(),
        omega: cfg.omega,
        thresholds: Thresholds {
            symmetry: cfg.symmetry_tol,
            convergence: cfg.convergence_tol,
            sigma_extrapolation: cfg.adiabatic.tol,
        },
        kms_imaginary_periodicity: periodicity,
        kms_stationarity: stationarity,
        kms_holomorphicity: holomorphicity,
        kms_polynomial_bound: polynomial,
        falloff,
        cond_a,
        cond_b,
        cond_c,
        detailed_balance_gap: balance,
        preservation,
    }
}

/// [`classify`] for a catalog entry at the configured acceleration.
pub fn classify_spec(spec: &DeformationSpec, cfg: &DiagnosticsConfig) -> Result<VerdictReport> {
    cfg.validate()?;
    let a = Accel::new(cfg.a)?;
    Ok(classify(&PullbackModel::deformed(a, spec.clone()), cfg))
}

pub const COLUMNS: [&str; 5] = ["imaginary_periodicity", "stationarity", "holomorphicity", "polynomial_bound", "preservation"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMismatch {
    pub spec_id: String,
    pub column: String,
    pub expected: Verdict,
    pub computed: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictTable {
    pub schema_version: u32,
    pub rows: Vec<VerdictReport>,
    pub mismatches: Vec<CellMismatch>,
}

impl VerdictTable {
    pub fn matches(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Classify every entry and compare with its expected verdicts. Rows are computed
/// in parallel and assembled in input order.
pub fn verdict_table(specs: &[DeformationSpec], cfg: &DiagnosticsConfig) -> Result<VerdictTable> {
    cfg.validate()?;
    let rows: Vec<VerdictReport> = specs.par_iter().map(|s| classify_spec(s, cfg)).collect::<Result<_>>()?;
    let mut mismatches = Vec::new();
    for (spec, row) in specs.iter().zip(&rows) {
        let got = row.verdicts().as_array();
        for ((col, e), c) in COLUMNS.iter().zip(spec.expected_verdicts.as_array()).zip(got) {
            if e != c {
                mismatches.push(CellMismatch { spec_id: spec.id.clone(), column: col.to_string(), expected: e, computed: c });
            }
        }
    }
    Ok(VerdictTable { schema_version: SCHEMA_VERSION, rows, mismatches })
}

/// One line per row: id, name, the five verdicts, and the detailed-balance gap with its error.
pub fn write_table_csv<W: Write>(mut out: W, rows: &[VerdictReport]) -> std::io::Result<()> {
    writeln!(out, "spec_id,name,{},detailed_balance_gap,detailed_balance_error", COLUMNS.join(","))?;
    for r in rows {
        let v = r.verdicts().as_array().map(|v| v.symbol());
        let (gap, err) = match &r.detailed_balance_gap.evidence {
            Some(d) => (format!("{:.16e}", d.gap), format!("{:.16e}", d.error)),
            None => (String::new(), String::new()),
        };
        writeln!(out, "{},{},{},{gap},{err}", r.spec_id, r.name, v.join(","))?;
    }
    Ok(())
}

/// Plain-text summary of one report.
pub fn summary(r: &VerdictReport) -> String {
    let ell = r.ell.map_or("-".to_string(), |l| l.to_string());
    let mut s = format!("spec {} ({}), a = {}, ℓ = {ell}, Ω = {}\n", r.spec_id, r.name, r.a, r.omega);
    s += &format!("  imaginary periodicity  {:>3}  max deviation {:.3e}\n", r.kms_imaginary_periodicity.verdict.symbol(), r.kms_imaginary_periodicity.max_deviation);
    s += &format!("  stationarity           {:>3}  max deviation {:.3e}\n", r.kms_stationarity.verdict.symbol(), r.kms_stationarity.max_deviation);
    s += &format!("  holomorphicity         {:>3}  {} interior poles\n", r.kms_holomorphicity.verdict.symbol(), r.kms_holomorphicity.offending.len());
    s += &format!("  polynomial bound       {:>3}  exponent {:.3}\n", r.kms_polynomial_bound.verdict.symbol(), r.kms_polynomial_bound.exponent);
    for (label, v, note) in [
        ("condition A", r.cond_a.verdict, &r.cond_a.note),
        ("condition B", r.cond_b.verdict, &r.cond_b.note),
        ("condition C", r.cond_c.verdict, &r.cond_c.note),
    ] {
        s += &format!("  {label:<22} {:>3}", v.symbol());
        if let Some(n) = note {
            s += &format!("  ({n})");
        }
        s.push('\n');
    }
    match &r.detailed_balance_gap.evidence {
        Some(d) => s += &format!("  detailed balance gap   {:.3e} ± {:.1e}\n", d.gap, d.error),
        None => s += "  detailed balance gap   n/a\n",
    }
    s += &format!("  preservation           {:>3}\n", r.preservation.symbol());
    s
}
