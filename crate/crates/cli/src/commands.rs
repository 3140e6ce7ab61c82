use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use anyhow::anyhow;
use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use unruh_core::analysis::{residues, track_poles, Pole, PoleTracks, TrackOptions};
use unruh_core::diagnostics::{
    check_holomorphicity, check_imaginary_periodicity, check_polynomial_bound, check_stationarity, classify, summary,
    verdict_table, write_table_csv, DiagnosticsConfig, HolomorphicityCheck, PolynomialCheck, SymmetryCheck,
    VerdictTable,
};
use unruh_core::response::{
    default_min_sep, in_strip, response_adiabatic_sweep, response_finite_sigma_sweep, scan_strip, AdiabaticConfig, QuadConfig,
    ResponseResult, ResponseStatus, ScanConfig, SwitchingProfile, MIN_ABS_OMEGA_A,
};
use unruh_core::{catalog, find_spec, Accel, Complex64, PullbackModel, WSign, WZPoint};

use crate::cache::{Cache, Lookup, RunRecord};
use crate::config::{MethodChoice, RunConfig, Runtime};
use crate::output::{ensure_dir, field, gnuplot_script, num, opt_num, write_dat, write_json, write_text};

/// Why a command stopped; each kind has its own exit code.
#[derive(Debug)]
pub enum Failure {
    Validation(anyhow::Error),
    Mismatch(String),
    Numerical(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Mismatch(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(e) => write!(f, "invalid input: {e:#}"),
            Failure::Mismatch(m) => write!(f, "{m}"),
            Failure::Numerical(e) => write!(f, "numerical failure: {e:#}"),
        }
    }
}

impl From<unruh_core::Error> for Failure {
    fn from(e: unruh_core::Error) -> Self {
        use unruh_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::UnknownSpec(_) => Failure::Validation(e.into()),
            _ => Failure::Numerical(e.into()),
        }
    }
}

/// I/O trouble while writing results is reported as a numerical-stage failure:
/// the inputs were valid but the run did not complete.
fn io(e: anyhow::Error) -> Failure {
    Failure::Numerical(e)
}

type Outcome<T> = std::result::Result<T, Failure>;

fn accel(cfg: &RunConfig) -> Outcome<Accel> {
    Ok(Accel::new(cfg.a)?)
}

/// Model for one `--spec` entry with the ℓ and regulator overrides applied.
fn build_model(key: &str, cfg: &RunConfig) -> Outcome<PullbackModel> {
    let a = accel(cfg)?;
    let mut model = if key == "none" {
        PullbackModel::undeformed(a)
    } else {
        let mut spec = find_spec(key)?;
        if let Some(l) = cfg.ell {
            spec = spec.with_ell(l);
        }
        PullbackModel::deformed(a, spec)
    };
    let mut reg = model.reg;
    if let Some(e) = cfg.eps {
        reg = reg.with_eps_z(e / cfg.a);
    }
    reg = reg.with_w_sign(if cfg.eps_w_sign < 0 { WSign::Minus } else { WSign::Plus });
    model = model.with_reg(reg);
    Ok(model)
}

fn models(cfg: &RunConfig) -> Outcome<Vec<PullbackModel>> {
    cfg.spec.iter().map(|k| build_model(k, cfg)).collect()
}

fn adiabatic_config(cfg: &RunConfig) -> AdiabaticConfig {
    AdiabaticConfig {
        sigma_ladder: cfg.sigma.clone(),
        scan: ScanConfig { re_half: cfg.re_half, ..ScanConfig::default() },
        tol: cfg.tol,
        ..AdiabaticConfig::default()
    }
}

/// Serve from the cache when possible, otherwise compute and store.
fn cached<T, F>(rt: &Runtime, command: &str, cfg: &RunConfig, compute: F) -> Outcome<RunRecord<T>>
where
    T: Serialize + DeserializeOwned,
    F: FnOnce() -> Outcome<T>,
{
    let cache = Cache::new(&rt.out);
    if !rt.force {
        if let Lookup::Hit(r) = cache.load::<T>(command, cfg).map_err(io)? {
            log::info!("{command}: cached result {}", r.key);
            return Ok(*r);
        }
    }
    let t0 = Instant::now();
    let payload = compute()?;
    cache.store(command, cfg, payload, t0.elapsed().as_secs_f64()).map_err(io)
}

fn command_dir(rt: &Runtime, command: &str) -> Outcome<std::path::PathBuf> {
    let dir = rt.out.join(command);
    ensure_dir(&dir).map_err(io)?;
    Ok(dir)
}

fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

// ---------------------------------------------------------------- respond

/// Thermal response of the undeformed field at the Unruh temperature.
pub fn planck(omega: f64, a: f64) -> f64 {
    if omega == 0.0 {
        return a / (8.0 * PI * PI);
    }
    omega / (4.0 * PI * (2.0 * PI * omega / a).exp_m1())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RespondRow {
    pub spec_id: String,
    pub method: String,
    /// σ·a for the quadrature method; absent for the adiabatic limit.
    pub sigma: Option<f64>,
    pub omega: f64,
    pub value: Option<f64>,
    #[serde(with = "unruh_core::serde_real")]
    pub abs_error: f64,
    pub status: String,
    pub planck: f64,
    /// `value / planck`; quadrature values are first divided by the calibration constant.
    pub ratio: Option<f64>,
    pub notes: Vec<String>,
}

fn status_label(s: ResponseStatus) -> &'static str {
    match s {
        ResponseStatus::Converged => "converged",
        ResponseStatus::NonConvergent => "non_convergent",
        ResponseStatus::Indeterminate => "indeterminate",
    }
}

fn respond_rows(model: &PullbackModel, cfg: &RunConfig) -> Outcome<Vec<RespondRow>> {
    let a = cfg.a;
    let (ok, low): (Vec<f64>, Vec<f64>) = cfg.omega.iter().partition(|o| o.abs() / a >= MIN_ABS_OMEGA_A);
    let row = |r: &ResponseResult, method: &str, sigma: Option<f64>, scale: f64| {
        let p = planck(r.omega, a);
        RespondRow {
            spec_id: model.id().to_string(),
            method: method.to_string(),
            sigma,
            omega: r.omega,
            value: r.value,
            abs_error: r.abs_error,
            status: status_label(r.status).to_string(),
            planck: p,
            ratio: r.value.map(|v| v / (scale * p)),
            notes: r.notes.clone(),
        }
    };
    let mut rows = Vec::new();
    let residue = matches!(cfg.method, MethodChoice::Residue | MethodChoice::Both);
    let quadrature = matches!(cfg.method, MethodChoice::Quadrature | MethodChoice::Both);
    if !ok.is_empty() {
        if residue {
            for r in response_adiabatic_sweep(model, &ok, &adiabatic_config(cfg))? {
                rows.push(row(&r, "residue", None, 1.0));
            }
        }
        if quadrature {
            let per_sigma: Vec<Vec<ResponseResult>> = cfg
                .sigma
                .par_iter()
                .map(|&s| {
                    let sw = SwitchingProfile::gaussian(s / a)?;
                    let q = QuadConfig { scan: ScanConfig { re_half: cfg.re_half, ..ScanConfig::default() }, ..QuadConfig::default() };
                    response_finite_sigma_sweep(model, &ok, &sw, &q)
                })
                .collect::<unruh_core::Result<_>>()?;
            for (s, rs) in cfg.sigma.iter().zip(per_sigma) {
                for r in rs {
                    rows.push(row(&r, "quadrature", Some(*s), r.calibration));
                }
            }
        }
    }
    for &o in &low {
        rows.push(RespondRow {
            spec_id: model.id().to_string(),
            method: "-".into(),
            sigma: None,
            omega: o,
            value: None,
            abs_error: 0.0,
            status: "below_floor".into(),
            planck: planck(o, a),
            ratio: None,
            notes: vec![format!("|Ω|/a below {MIN_ABS_OMEGA_A}; not evaluated")],
        });
    }
    Ok(rows)
}

pub fn respond(cfg: &RunConfig, rt: &Runtime) -> Outcome<String> {
    let models = models(cfg)?;
    let record = cached(rt, "respond", cfg, || {
        let per: Vec<Vec<RespondRow>> = models.par_iter().map(|m| respond_rows(m, cfg)).collect::<Outcome<_>>()?;
        Ok(per.into_iter().flatten().collect::<Vec<_>>())
    })?;
    let rows = &record.payload;
    let dir = command_dir(rt, "respond")?;
    write_json(&dir.join("respond.json"), &record).map_err(io)?;

    let mut csv = String::from("spec_id,method,sigma,omega,value,abs_error,status,planck,ratio,notes\n");
    for r in rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            field(&r.spec_id),
            r.method,
            opt_num(r.sigma),
            num(r.omega),
            opt_num(r.value),
            num(r.abs_error),
            r.status,
            num(r.planck),
            opt_num(r.ratio),
            field(&r.notes.join("; "))
        );
    }
    write_text(&dir.join("respond.csv"), &csv).map_err(io)?;

    // One data file per curve, plus the thermal reference.
    // (file stem, legend title, points)
    type Curve = (String, String, Vec<(f64, f64)>);
    let mut curves: Vec<Curve> = Vec::new();
    for r in rows.iter().filter(|r| r.status == "converged") {
        let label = match r.sigma {
            Some(s) => format!("{}_{}_s{}", slug(&r.spec_id), r.method, s),
            None => format!("{}_{}", slug(&r.spec_id), r.method),
        };
        let v = r.value.unwrap_or(f64::NAN);
        match curves.iter_mut().find(|c| c.0 == label) {
            Some(c) => c.2.push((r.omega, v)),
            None => curves.push((label.clone(), label, vec![(r.omega, v)])),
        }
    }
    let mut thermal: Vec<(f64, f64)> = cfg.omega.iter().filter(|o| o.abs() / cfg.a >= MIN_ABS_OMEGA_A).map(|&o| (o, planck(o, cfg.a))).collect();
    thermal.sort_by(|x, y| x.0.total_cmp(&y.0));
    curves.push(("thermal".into(), "thermal (Unruh temperature)".into(), thermal));
    let mut files = Vec::new();
    for (label, title, mut pts) in curves {
        pts.sort_by(|x, y| x.0.total_cmp(&y.0));
        let name = format!("response_{label}.dat");
        write_dat(&dir.join(&name), &[format!("{title}, a = {}", cfg.a), "omega response".into()], &pts).map_err(io)?;
        files.push((name, title));
    }
    write_text(&dir.join("respond.gp"), &gnuplot_script("Detector response", "Omega", "F(Omega)", true, &files)).map_err(io)?;

    let mut out = format!("{:>6} {:>10} {:>8} {:>14} {:>10} {:>14} {:>12}  status\n", "spec", "method", "sigma", "omega", "value", "abs_error", "ratio");
    for r in rows {
        let _ = writeln!(
            out,
            "{:>6} {:>10} {:>8} {:>14.6} {:>10} {:>14.3e} {:>12}  {}",
            r.spec_id,
            r.method,
            r.sigma.map(|s| s.to_string()).unwrap_or_else(|| "inf".into()),
            r.omega,
            r.value.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into()),
            r.abs_error,
            r.ratio.map(|v| format!("{v:.8}")).unwrap_or_else(|| "-".into()),
            r.status
        );
    }
    let _ = writeln!(out, "wrote {}", dir.display());
    Ok(out)
}

// ---------------------------------------------------------------- poles

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoleSnapshot {
    pub spec_id: String,
    /// Real `w` (not scaled).
    pub w: f64,
    pub poles: Vec<Pole>,
    pub in_strip: Vec<bool>,
    /// False when some residue circle could not be closed; residues are then zero.
    pub residues_ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrackRecord {
    pub spec_id: String,
    pub w: f64,
    pub tracks: PoleTracks,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolesPayload {
    pub snapshots: Vec<PoleSnapshot>,
    pub tracks: Vec<TrackRecord>,
}

fn snapshot(model: &PullbackModel, w: f64, cfg: &RunConfig) -> Outcome<PoleSnapshot> {
    let scan = ScanConfig { re_half: cfg.re_half, ..ScanConfig::default() };
    let mut poles = scan_strip(model, w, &scan)?;
    let f = model.z_slice(w);
    let residues_ok = match residues(&f, &poles, default_min_sep(model)) {
        Ok(rs) => {
            for (p, r) in poles.iter_mut().zip(rs) {
                p.residue = r;
            }
            true
        }
        Err(e) => {
            log::warn!("spec {} at w = {w}: {e}; residues omitted", model.id());
            false
        }
    };
    let in_strip = poles.iter().map(|p| in_strip(model.a, p.position)).collect();
    Ok(PoleSnapshot { spec_id: model.id().to_string(), w, poles, in_strip, residues_ok })
}

fn track(model: &PullbackModel, w: f64, cfg: &RunConfig) -> Outcome<TrackRecord> {
    if model.deformation.is_none() {
        return Err(Failure::Validation(anyhow!("pole tracking needs a deformation; `none` has no ℓ")));
    }
    let a = cfg.a;
    let opts = TrackOptions::new(PI / (4.0 * a), PI / (2.0 * a));
    let region = ScanConfig { re_half: cfg.re_half, ..ScanConfig::default() }.region(model.a);
    let family = |ell: f64, z: Complex64| {
        model.eval_at_ell(ell, WZPoint::new(Complex64::new(w, 0.0), z)).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    };
    let tracks = track_poles(&family, &cfg.ell_ladder, &region, &opts)?;
    Ok(TrackRecord { spec_id: model.id().to_string(), w, tracks })
}

pub fn poles(cfg: &RunConfig, rt: &Runtime) -> Outcome<String> {
    let models = models(cfg)?;
    let jobs: Vec<(&PullbackModel, f64)> = models.iter().flat_map(|m| cfg.w.iter().map(move |&w| (m, w / cfg.a))).collect();
    let record = cached(rt, "poles", cfg, || {
        let snapshots = jobs.par_iter().map(|(m, w)| snapshot(m, *w, cfg)).collect::<Outcome<Vec<_>>>()?;
        let tracks = if cfg.track { jobs.par_iter().map(|(m, w)| track(m, *w, cfg)).collect::<Outcome<Vec<_>>>()? } else { Vec::new() };
        Ok(PolesPayload { snapshots, tracks })
    })?;
    let dir = command_dir(rt, "poles")?;
    write_json(&dir.join("poles.json"), &record).map_err(io)?;
    let mut out = String::new();
    for (i, s) in record.payload.snapshots.iter().enumerate() {
        let mut csv = String::from("re,im,order,residue_re,residue_im,in_strip\n");
        for (p, inside) in s.poles.iter().zip(&s.in_strip) {
            let _ = writeln!(csv, "{},{},{},{},{},{}", num(p.position.re), num(p.position.im), p.order_estimate, num(p.residue.re), num(p.residue.im), inside);
        }
        let name = format!("poles_{}_w{i}.csv", slug(&s.spec_id));
        write_text(&dir.join(&name), &csv).map_err(io)?;
        let inside = s.in_strip.iter().filter(|b| **b).count();
        let _ = writeln!(out, "spec {:>4}  w = {:<10}  {} poles, {} in the strip  -> {name}", s.spec_id, s.w, s.poles.len(), inside);
    }
    for (i, t) in record.payload.tracks.iter().enumerate() {
        let mut csv = String::from("trajectory,provenance,split_born,ell,re,im,order\n");
        for (k, tr) in t.tracks.trajectories.iter().enumerate() {
            for (ell, z, order) in &tr.points {
                let _ = writeln!(
                    csv,
                    "{k},{},{},{},{},{},{order}",
                    tr.provenance.as_deref().unwrap_or(""),
                    tr.split_born,
                    num(*ell),
                    num(z.re),
                    num(z.im)
                );
            }
        }
        let name = format!("tracks_{}_w{i}.csv", slug(&t.spec_id));
        write_text(&dir.join(&name), &csv).map_err(io)?;
        let _ = writeln!(out, "spec {:>4}  w = {:<10}  {} trajectories, {} events  -> {name}", t.spec_id, t.w, t.tracks.trajectories.len(), t.tracks.events.len());
    }
    let _ = writeln!(out, "wrote {}", dir.display());
    Ok(out)
}

// ---------------------------------------------------------------- kms

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KmsRow {
    pub spec_id: String,
    pub a: f64,
    pub ell: Option<f64>,
    pub imaginary_periodicity: SymmetryCheck,
    pub stationarity: SymmetryCheck,
    pub holomorphicity: HolomorphicityCheck,
    pub polynomial_bound: PolynomialCheck,
}

fn kms_row(model: &PullbackModel, cfg: &RunConfig) -> KmsRow {
    let d = DiagnosticsConfig::default();
    let (n, h, tol) = (cfg.kms_grid, d.kms_half_width, d.symmetry_tol);
    let ((p, s), (hol, poly)) = rayon::join(
        || rayon::join(|| check_imaginary_periodicity(model, n, h, tol), || check_stationarity(model, n, h, tol)),
        || rayon::join(|| check_holomorphicity(model), || check_polynomial_bound(model)),
    );
    KmsRow {
        spec_id: model.id().to_string(),
        a: cfg.a,
        ell: model.ell(),
        imaginary_periodicity: p,
        stationarity: s,
        holomorphicity: hol,
        polynomial_bound: poly,
    }
}

pub fn kms(cfg: &RunConfig, rt: &Runtime) -> Outcome<String> {
    let models = models(cfg)?;
    let record = cached(rt, "kms", cfg, || Ok(models.par_iter().map(|m| kms_row(m, cfg)).collect::<Vec<_>>()))?;
    let dir = command_dir(rt, "kms")?;
    write_json(&dir.join("kms.json"), &record).map_err(io)?;
    let mut csv = String::from("spec_id,imaginary_periodicity,periodicity_deviation,stationarity,stationarity_deviation,holomorphicity,interior_poles,polynomial_bound,growth_exponent\n");
    let mut out = format!("{:>6} {:>12} {:>12} {:>12} {:>12}\n", "spec", "periodicity", "stationarity", "holomorphic", "poly bound");
    for r in &record.payload {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            field(&r.spec_id),
            r.imaginary_periodicity.verdict.symbol(),
            num(r.imaginary_periodicity.max_deviation),
            r.stationarity.verdict.symbol(),
            num(r.stationarity.max_deviation),
            r.holomorphicity.verdict.symbol(),
            r.holomorphicity.offending.len(),
            r.polynomial_bound.verdict.symbol(),
            num(r.polynomial_bound.exponent)
        );
        let _ = writeln!(
            out,
            "{:>6} {:>12} {:>12} {:>12} {:>12}",
            r.spec_id,
            r.imaginary_periodicity.verdict.symbol(),
            r.stationarity.verdict.symbol(),
            r.holomorphicity.verdict.symbol(),
            r.polynomial_bound.verdict.symbol()
        );
    }
    write_text(&dir.join("kms.csv"), &csv).map_err(io)?;
    let _ = writeln!(out, "wrote {}", dir.display());
    Ok(out)
}

// ---------------------------------------------------------------- preserve

fn diagnostics_config(cfg: &RunConfig, omega: f64) -> DiagnosticsConfig {
    DiagnosticsConfig {
        a: cfg.a,
        omega,
        ell_ladder: cfg.ell_ladder.clone(),
        kms_grid: cfg.kms_grid,
        adiabatic: adiabatic_config(cfg),
        ..DiagnosticsConfig::default()
    }
}

pub fn preserve(cfg: &RunConfig, rt: &Runtime) -> Outcome<String> {
    let models = models(cfg)?;
    for &o in &cfg.omega {
        if o.abs() / cfg.a < MIN_ABS_OMEGA_A {
            return Err(Failure::Validation(anyhow!("|Ω|/a must be at least {MIN_ABS_OMEGA_A}, got Ω = {o}")));
        }
        diagnostics_config(cfg, o).validate()?;
    }
    let jobs: Vec<(&PullbackModel, f64)> = models.iter().flat_map(|m| cfg.omega.iter().map(move |&o| (m, o))).collect();
    let record = cached(rt, "preserve", cfg, || Ok(jobs.par_iter().map(|(m, o)| classify(m, &diagnostics_config(cfg, *o))).collect::<Vec<_>>()))?;
    let dir = command_dir(rt, "preserve")?;
    write_json(&dir.join("preserve.json"), &record).map_err(io)?;
    let mut csv = Vec::new();
    write_table_csv(&mut csv, &record.payload).map_err(|e| io(e.into()))?;
    write_text(&dir.join("preserve.csv"), &String::from_utf8_lossy(&csv)).map_err(io)?;
    let mut out: String = record.payload.iter().map(summary).collect::<Vec<_>>().join("\n");
    let _ = writeln!(out, "wrote {}", dir.display());
    Ok(out)
}

// ---------------------------------------------------------------- table1

fn render_table(t: &VerdictTable, expected: &[unruh_core::ExpectedVerdicts]) -> String {
    let mut s = format!("{:>3}  {:<22}", "id", "deformation");
    for c in ["periodic", "stationary", "holomorphic", "poly bound", "preserved"] {
        let _ = write!(s, " {c:>12}");
    }
    let _ = writeln!(s, " {:>14}", "balance gap");
    for (r, e) in t.rows.iter().zip(expected) {
        let _ = write!(s, "{:>3}  {:<22}", r.spec_id, r.name);
        for (c, x) in r.verdicts().as_array().iter().zip(e.as_array()) {
            let cell = if *c == x { c.symbol().to_string() } else { format!("{} (exp {})", c.symbol(), x.symbol()) };
            let _ = write!(s, " {cell:>12}");
        }
        let gap = r.detailed_balance_gap.evidence.as_ref().map(|d| format!("{:.2e}", d.gap)).unwrap_or_else(|| "-".into());
        let _ = writeln!(s, " {gap:>14}");
    }
    s
}

pub fn table1(cfg: &RunConfig, rt: &Runtime) -> Outcome<String> {
    let mut specs = catalog();
    if !cfg.only.is_empty() {
        for k in &cfg.only {
            find_spec(k)?;
        }
        specs.retain(|s| cfg.only.iter().any(|k| *k == s.id || *k == s.name));
    }
    if let Some(l) = cfg.ell {
        specs = specs.iter().map(|s| s.with_ell(l)).collect();
    }
    let omega = cfg.omega[0];
    if cfg.omega.len() > 1 {
        log::warn!("table1 uses a single Ω; taking {omega}");
    }
    let dcfg = diagnostics_config(cfg, omega);
    dcfg.validate()?;
    let record = cached(rt, "table1", cfg, || Ok(verdict_table(&specs, &dcfg)?))?;
    let table = &record.payload;
    let dir = command_dir(rt, "table1")?;
    write_json(&dir.join("table1.json"), &record).map_err(io)?;
    let mut csv = Vec::new();
    write_table_csv(&mut csv, &table.rows).map_err(|e| io(e.into()))?;
    write_text(&dir.join("table1.csv"), &String::from_utf8_lossy(&csv)).map_err(io)?;
    let expected: Vec<_> = specs.iter().map(|s| s.expected_verdicts).collect();
    let rendered = render_table(table, &expected);
    write_text(&dir.join("table1.txt"), &rendered).map_err(io)?;
    let mut out = rendered;
    let _ = writeln!(out, "wrote {}", dir.display());
    if table.matches() {
        Ok(out)
    } else {
        print!("{out}");
        let cells: Vec<String> = table
            .mismatches
            .iter()
            .map(|m| format!("row {} {}: expected {}, computed {}", m.spec_id, m.column, m.expected.symbol(), m.computed.symbol()))
            .collect();
        Err(Failure::Mismatch(format!("{} cell(s) disagree with the reference table:\n  {}", cells.len(), cells.join("\n  "))))
    }
}
