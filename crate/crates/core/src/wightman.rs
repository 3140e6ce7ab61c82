//! Vacuum pull-back of the massless scalar Wightman function and the catalog of
//! multiplicative deformations `W_ℓ = W₀ (1 + 𝒟_ℓ)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalError, Result};
use crate::kinematics::{interval_components, Accel, IntervalComponents, RegulatorPolicy, WZPoint};

/// Denominators smaller than this fraction of their natural scale are treated as
/// sitting on the singular locus.
pub const SINGULAR_REL: f64 = 1e-12;

/// Three-valued verdict. `Indeterminate` prints as `?`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Indeterminate,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Indeterminate => "?",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One row of the comparison table: four KMS sub-conditions and preservation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedVerdicts {
    pub imaginary_periodicity: Verdict,
    pub stationarity: Verdict,
    pub holomorphicity: Verdict,
    pub polynomial_bound: Verdict,
    pub preservation: Verdict,
}

impl ExpectedVerdicts {
    pub fn as_array(&self) -> [Verdict; 5] {
        [
            self.imaginary_periodicity,
            self.stationarity,
            self.holomorphicity,
            self.polynomial_bound,
            self.preservation,
        ]
    }

    pub fn from_array(v: [Verdict; 5]) -> Self {
        Self {
            imaginary_periodicity: v[0],
            stationarity: v[1],
            holomorphicity: v[2],
            polynomial_bound: v[3],
            preservation: v[4],
        }
    }
}

/// Hook for hand-written deformations beyond the built-in catalog.
pub trait CustomDeformation: Send + Sync + fmt::Debug {
    fn eval(&self, ell: f64, ic: &IntervalComponents) -> std::result::Result<Complex64, EvalError>;
    fn display(&self) -> String;
    fn lorentz_invariant(&self) -> bool;
}

#[derive(Debug, Clone)]
pub enum DeformationForm {
    /// `ℓ²/(ΔX²+ℓ²)`
    Lorentzian,
    /// `−β ℓ²/(ΔX²+ℓ²)`, β read from `extra_params["beta"]`
    ScaledLorentzian,
    /// `−ℓ²/(ΔX²−ℓ²)`
    AntiLorentzian,
    /// `−exp(−ΔX²/ℓ²)`
    Gaussian,
    /// `ℓ²/Δt²`
    InverseTimeSquared,
    /// `ℓ/(Δt−ℓ)`
    ShiftedTimePole,
    /// `iℓΔt/ΔX²`
    TimeOverInterval,
    /// `iℓ/Δt`
    InverseTime,
    Custom(Arc<dyn CustomDeformation>),
}

impl DeformationForm {
    pub fn display(&self) -> String {
        match self {
            DeformationForm::Lorentzian => "ℓ²/(ΔX²+ℓ²)".into(),
            DeformationForm::ScaledLorentzian => "−βℓ²/(ΔX²+ℓ²)".into(),
            DeformationForm::AntiLorentzian => "−ℓ²/(ΔX²−ℓ²)".into(),
            DeformationForm::Gaussian => "−exp(−ΔX²/ℓ²)".into(),
            DeformationForm::InverseTimeSquared => "ℓ²/Δt²".into(),
            DeformationForm::ShiftedTimePole => "ℓ/(Δt−ℓ)".into(),
            DeformationForm::TimeOverInterval => "iℓΔt/ΔX²".into(),
            DeformationForm::InverseTime => "iℓ/Δt".into(),
            DeformationForm::Custom(c) => c.display(),
        }
    }

    fn lorentz_invariant(&self) -> bool {
        match self {
            DeformationForm::Lorentzian
            | DeformationForm::ScaledLorentzian
            | DeformationForm::AntiLorentzian
            | DeformationForm::Gaussian => true,
            DeformationForm::Custom(c) => c.lorentz_invariant(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeformationSpec {
    pub id: String,
    pub name: String,
    pub ell: f64,
    pub form: DeformationForm,
    pub extra_params: BTreeMap<String, f64>,
    /// `𝒟` depends on `ΔX²` only.
    pub lorentz_invariant: bool,
    /// `false` when the deformed Wightman function is known to grow faster than any
    /// polynomial in `|Δt|`, `|Δx|`; the residue formula is then not applicable.
    pub falloff_ok: bool,
    pub expected_verdicts: ExpectedVerdicts,
}

/// Serializable catalog row.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CatalogEntry {
    pub id: String,
    pub name: String,
    pub form: String,
    pub ell: f64,
    pub extra_params: BTreeMap<String, f64>,
    pub lorentz_invariant: bool,
    pub falloff_ok: bool,
    pub expected_verdicts: ExpectedVerdicts,
}

impl DeformationSpec {
    pub fn custom(id: &str, ell: f64, form: Arc<dyn CustomDeformation>, expected: ExpectedVerdicts) -> Self {
        let lorentz_invariant = form.lorentz_invariant();
        Self {
            id: id.to_string(),
            name: id.to_string(),
            ell,
            form: DeformationForm::Custom(form),
            extra_params: BTreeMap::new(),
            lorentz_invariant,
            falloff_ok: true,
            expected_verdicts: expected,
        }
    }

    pub fn with_ell(&self, ell: f64) -> Self {
        Self { ell, ..self.clone() }
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.extra_params.get(key).copied()
    }

    pub fn entry(&self) -> CatalogEntry {
        CatalogEntry {
            id: self.id.clone(),
            name: self.name.clone(),
            form: self.form.display(),
            ell: self.ell,
            extra_params: self.extra_params.clone(),
            lorentz_invariant: self.lorentz_invariant,
            falloff_ok: self.falloff_ok,
            expected_verdicts: self.expected_verdicts,
        }
    }
}

pub const DEFAULT_ELL: f64 = 0.05;

/// The eight table rows, in order.
pub fn catalog() -> Vec<DeformationSpec> {
    use Verdict::{Indeterminate as Q, No as N, Yes as Y};
    let row = |id: &str, name: &str, form: DeformationForm, v: [Verdict; 5]| {
        let lorentz_invariant = form.lorentz_invariant();
        DeformationSpec {
            id: id.to_string(),
            name: name.to_string(),
            ell: DEFAULT_ELL,
            falloff_ok: !matches!(form, DeformationForm::Gaussian),
            form,
            extra_params: BTreeMap::new(),
            lorentz_invariant,
            expected_verdicts: ExpectedVerdicts::from_array(v),
        }
    };
    let mut rows = vec![
        row("1", "lorentzian", DeformationForm::Lorentzian, [Y, Y, Y, Y, Y]),
        row("2", "scaled-lorentzian", DeformationForm::ScaledLorentzian, [Y, Y, Y, Y, Y]),
        row("3", "anti-lorentzian", DeformationForm::AntiLorentzian, [Y, Y, N, Y, N]),
        row("4", "gaussian", DeformationForm::Gaussian, [Y, Y, Y, N, Q]),
        row("5", "inverse-time-squared", DeformationForm::InverseTimeSquared, [Y, N, Y, Y, Y]),
        row("6", "shifted-time-pole", DeformationForm::ShiftedTimePole, [N, N, Y, Y, N]),
        row("7", "time-over-interval", DeformationForm::TimeOverInterval, [N, N, Y, N, N]),
        row("8", "inverse-time", DeformationForm::InverseTime, [N, N, Y, Y, Y]),
    ];
    rows[1].extra_params.insert("beta".into(), 1.0);
    rows
}

/// Look a catalog row up by id (`"3"`) or name (`"anti-lorentzian"`).
pub fn find_spec(key: &str) -> Result<DeformationSpec> {
    catalog()
        .into_iter()
        .find(|s| s.id == key || s.name == key)
        .ok_or_else(|| Error::UnknownSpec(key.to_string()))
}

/// `W₀(z) = −a²/(16π²) · sinh⁻²(az/2)`.
pub fn w0_pullback(a: Accel, z: Complex64) -> std::result::Result<Complex64, EvalError> {
    let a = a.get();
    let s = (z * (0.5 * a)).sinh();
    let s2 = s * s;
    if s2.norm() < 1e-300 {
        return Err(EvalError::Singular { what: "W0", at: z });
    }
    Ok(-(a * a) / (16.0 * PI * PI) / s2)
}

fn guarded_inverse(
    den: Complex64,
    scale: f64,
    what: &'static str,
    at: Complex64,
) -> std::result::Result<Complex64, EvalError> {
    if den.norm() < SINGULAR_REL * scale {
        Err(EvalError::Singular { what, at })
    } else {
        Ok(scaled_inverse(den))
    }
}

/// `1/d` without forming `|d|²`, which overflows long before `d` does. An infinite
/// `d` gives 0, its limit.
fn scaled_inverse(d: Complex64) -> Complex64 {
    let m = d.re.abs().max(d.im.abs());
    if m.is_infinite() {
        return Complex64::new(0.0, 0.0);
    }
    let s = d / m;
    s.conj() / (s.norm_sqr() * m)
}

pub fn deformation_eval(spec: &DeformationSpec, ic: &IntervalComponents) -> std::result::Result<Complex64, EvalError> {
    deformation_eval_at(spec, spec.ell, ic)
}

/// `𝒟` of `spec` with its length scale replaced by `l`.
pub fn deformation_eval_at(
    spec: &DeformationSpec,
    l: f64,
    ic: &IntervalComponents,
) -> std::result::Result<Complex64, EvalError> {
    let l2 = l * l;
    let at = ic.dt;
    let i = Complex64::i();
    let v = match &spec.form {
        DeformationForm::Lorentzian => guarded_inverse(ic.dx2 + l2, l2, "ℓ²/(ΔX²+ℓ²)", at)? * l2,
        DeformationForm::ScaledLorentzian => {
            let beta = spec.param("beta").unwrap_or(1.0);
            guarded_inverse(ic.dx2 + l2, l2, "−βℓ²/(ΔX²+ℓ²)", at)? * (-beta * l2)
        }
        DeformationForm::AntiLorentzian => guarded_inverse(ic.dx2 - l2, l2, "−ℓ²/(ΔX²−ℓ²)", at)? * (-l2),
        DeformationForm::Gaussian => -(-ic.dx2 / l2).exp(),
        DeformationForm::InverseTimeSquared => {
            // (1/Δt)² rather than 1/Δt²: Δt² overflows at large w while 1/Δt only underflows.
            if ic.dt.norm().powi(2) < SINGULAR_REL * l2 {
                return Err(EvalError::Singular { what: "ℓ²/Δt²", at });
            }
            let r = scaled_inverse(ic.dt);
            r * r * l2
        }
        DeformationForm::ShiftedTimePole => guarded_inverse(ic.dt - l, l, "ℓ/(Δt−ℓ)", at)? * l,
        DeformationForm::TimeOverInterval => guarded_inverse(ic.dx2, l2, "iℓΔt/ΔX²", at)? * ic.dt * (i * l),
        DeformationForm::InverseTime => guarded_inverse(ic.dt, l, "iℓ/Δt", at)? * (i * l),
        DeformationForm::Custom(c) => c.eval(l, ic)?,
    };
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite { at })
    }
}

/// `ln 𝒟` on some branch, computed without forming `𝒟` where the closed form allows
/// it, so that it stays finite where `𝒟` itself over- or underflows.
pub fn deformation_log_eval(spec: &DeformationSpec, ic: &IntervalComponents) -> std::result::Result<Complex64, EvalError> {
    match &spec.form {
        DeformationForm::Gaussian => Ok(Complex64::new(0.0, PI) - ic.dx2 / (spec.ell * spec.ell)),
        _ => {
            let v = deformation_eval(spec, ic)?;
            if v.norm() == 0.0 {
                Err(EvalError::NonFinite { at: ic.dt })
            } else {
                Ok(v.ln())
            }
        }
    }
}

/// Acceleration, optional deformation and regulator: everything needed to evaluate
/// `W_ℓ(w, z)`.
#[derive(Debug, Clone)]
pub struct PullbackModel {
    pub a: Accel,
    pub deformation: Option<DeformationSpec>,
    pub reg: RegulatorPolicy,
}

impl PullbackModel {
    pub fn undeformed(a: Accel) -> Self {
        Self { a, deformation: None, reg: RegulatorPolicy::default_for(a) }
    }

    pub fn deformed(a: Accel, spec: DeformationSpec) -> Self {
        Self { a, deformation: Some(spec), reg: RegulatorPolicy::default_for(a) }
    }

    pub fn with_reg(&self, reg: RegulatorPolicy) -> Self {
        Self { reg, ..self.clone() }
    }

    pub fn with_ell(&self, ell: f64) -> Self {
        Self { deformation: self.deformation.as_ref().map(|d| d.with_ell(ell)), ..self.clone() }
    }

    pub fn ell(&self) -> Option<f64> {
        self.deformation.as_ref().map(|d| d.ell)
    }

    pub fn id(&self) -> &str {
        self.deformation.as_ref().map(|d| d.id.as_str()).unwrap_or("none")
    }

    /// True when the pull-back depends on `z` only.
    pub fn is_stationary(&self) -> bool {
        self.deformation.as_ref().is_none_or(|d| d.lorentz_invariant)
    }

    /// `W_ℓ(w, z)` with the regulator applied.
    pub fn eval(&self, p: WZPoint) -> std::result::Result<Complex64, EvalError> {
        self.eval_with(p, &self.reg)
    }

    /// `W_ℓ(w, z)` at exactly the given complex point.
    pub fn eval_raw(&self, p: WZPoint) -> std::result::Result<Complex64, EvalError> {
        self.eval_with(p, &RegulatorPolicy::none())
    }

    /// `W_ℓ(w, z)` (regulated) with the deformation scale set to `ell`; `ell = 0`
    /// gives the undeformed pull-back. Avoids rebuilding the model along ℓ-ladders.
    pub fn eval_at_ell(&self, ell: f64, p: WZPoint) -> std::result::Result<Complex64, EvalError> {
        if ell == 0.0 {
            return w0_pullback(self.a, self.reg.shift(p).z);
        }
        self.eval_impl(p, &self.reg, self.deformation.as_ref().map(|s| (s, ell)))
    }

    fn eval_with(&self, p: WZPoint, reg: &RegulatorPolicy) -> std::result::Result<Complex64, EvalError> {
        self.eval_impl(p, reg, self.deformation.as_ref().map(|s| (s, s.ell)))
    }

    fn eval_impl(
        &self,
        p: WZPoint,
        reg: &RegulatorPolicy,
        deformation: Option<(&DeformationSpec, f64)>,
    ) -> std::result::Result<Complex64, EvalError> {
        let zt = reg.shift(p).z;
        let w0 = w0_pullback(self.a, zt)?;
        match deformation {
            None => Ok(w0),
            Some((spec, ell)) => {
                let ic = interval_components(self.a, p, reg);
                let v = w0 * (1.0 + deformation_eval_at(spec, ell, &ic)?);
                if v.re.is_finite() && v.im.is_finite() {
                    Ok(v)
                } else {
                    Err(EvalError::NonFinite { at: zt })
                }
            }
        }
    }

    /// `z ↦ W_ℓ(w, z)` at fixed real `w`, with failures mapped to NaN for the
    /// contour routines.
    pub fn z_slice(&self, w: f64) -> impl Fn(Complex64) -> Complex64 + Sync + '_ {
        move |z| {
            self.eval(WZPoint::new(Complex64::new(w, 0.0), z))
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn a1() -> Accel {
        Accel::new(1.0).unwrap()
    }

    fn ic_with_dx2(dx2: Complex64) -> IntervalComponents {
        IntervalComponents { dt: c(0.3, 0.0), dx: c(0.0, 0.0), dx2 }
    }

    #[test]
    fn w0_examples() {
        let v = w0_pullback(a1(), c(0.0, PI)).unwrap();
        assert_relative_eq!(v.re, 1.0 / (16.0 * PI * PI), max_relative = 1e-14);
        assert_relative_eq!(v.re, 6.3326e-3, max_relative = 1e-4);
        let v3 = w0_pullback(a1(), c(0.0, 3.0 * PI)).unwrap();
        assert!((v - v3).norm() < 1e-15);
        let z = c(0.37, 0.21);
        let a2 = w0_pullback(Accel::new(2.0).unwrap(), z).unwrap();
        let scaled = w0_pullback(a1(), z * 2.0).unwrap() * 4.0;
        assert!((a2 - scaled).norm() < 1e-14 * a2.norm());
        assert!(matches!(w0_pullback(a1(), c(0.0, 0.0)), Err(EvalError::Singular { .. })));
    }

    #[test]
    fn time_dependent_rows_decay_at_large_w() {
        // |Δt| ~ e^{550} here: Δt² overflows but 𝒟 must still come out as ~0.
        let model = |id: &str| PullbackModel::deformed(a1(), find_spec(id).unwrap());
        for id in ["5", "6", "8"] {
            for z in [c(-7.99, -1.1), c(1.0, 0.5), c(0.3, 2.0)] {
                let p = WZPoint::new(c(1100.0, 0.0), z);
                let w = model(id).eval(p).unwrap();
                let w0 = PullbackModel::undeformed(a1()).eval(p).unwrap();
                assert!((w - w0).norm() <= 1e-12 * w0.norm(), "row {id} at {z}: {w} vs {w0}");
            }
        }
    }

    #[test]
    fn catalog_shape_and_rows() {
        use Verdict::*;
        let cat = catalog();
        assert_eq!(cat.len(), 8);
        assert_eq!(cat[0].expected_verdicts.as_array(), [Yes; 5]);
        assert_eq!(cat[3].expected_verdicts.as_array(), [Yes, Yes, Yes, No, Indeterminate]);
        assert_eq!(cat[7].expected_verdicts.as_array(), [No, No, Yes, Yes, Yes]);
        assert_eq!(cat[1].param("beta"), Some(1.0));
        assert!(!cat[3].falloff_ok);
        assert!(cat[..4].iter().all(|s| s.lorentz_invariant));
        assert!(cat[4..].iter().all(|s| !s.lorentz_invariant));
        assert_eq!(find_spec("anti-lorentzian").unwrap().id, "3");
        assert!(matches!(find_spec("9"), Err(Error::UnknownSpec(_))));
        let json = serde_json::to_string(&cat.iter().map(|s| s.entry()).collect::<Vec<_>>()).unwrap();
        assert!(json.contains("\"preservation\":\"indeterminate\""));
    }

    #[test]
    fn deformation_examples() {
        let cat = catalog();
        let at0 = ic_with_dx2(c(0.0, 0.0));
        assert!((deformation_eval(&cat[0], &at0).unwrap() - 1.0).norm() < 1e-15);
        assert!((deformation_eval(&cat[3], &at0).unwrap() + 1.0).norm() < 1e-15);
        assert!(matches!(deformation_eval(&cat[6], &at0), Err(EvalError::Singular { .. })));
    }

    #[test]
    fn anti_lorentzian_singular_locus() {
        // sinh(z/2) = ±iℓ/2  ⇒  z = ±2i·asin(ℓ/2)
        let spec = find_spec("3").unwrap().with_ell(0.2);
        let zp = 2.0 * (0.1f64).asin();
        assert_relative_eq!(zp, 0.200334, max_relative = 1e-5);
        let m = PullbackModel::deformed(a1(), spec).with_reg(RegulatorPolicy::none());
        for zz in [c(0.0, zp), c(0.0, -zp), c(0.0, 2.0 * PI - zp)] {
            let ic = interval_components(a1(), WZPoint::new(c(0.0, 0.0), zz), &RegulatorPolicy::none());
            let r = deformation_eval(m.deformation.as_ref().unwrap(), &ic);
            assert!(r.is_err() || r.unwrap().norm() > 1e10, "expected singular near {zz}");
        }
    }

    #[test]
    fn pullback_examples() {
        let p = WZPoint::real(0.3, 1.1);
        let und = PullbackModel::undeformed(a1());
        let zt = und.reg.shift(p).z;
        assert_eq!(und.eval(p).unwrap(), w0_pullback(a1(), zt).unwrap());
        let base = und.eval(p).unwrap();
        let mut prev = f64::INFINITY;
        for ell in [0.1, 0.05, 0.025, 0.0125] {
            let m = PullbackModel::deformed(a1(), find_spec("1").unwrap().with_ell(ell));
            let dev = (m.eval(p).unwrap() - base).norm() / base.norm();
            assert!(dev < prev);
            assert!(dev < 2.0 * ell * ell);
            prev = dev;
        }
        let m5 = PullbackModel::deformed(a1(), find_spec("5").unwrap());
        let v0 = m5.eval(WZPoint::real(0.0, 1.0)).unwrap();
        let v2 = m5.eval(WZPoint::real(2.0, 1.0)).unwrap();
        assert!((v0 - v2).norm() > 1e-6 * v0.norm());
    }

    fn regular(m: &PullbackModel, p: WZPoint) -> Option<Complex64> {
        let v = m.eval(p).ok()?;
        (v.norm() < 1e8 && v.norm() > 1e-12).then_some(v)
    }

    #[test]
    fn strip_periodicity_for_every_row() {
        let a = a1();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in catalog() {
            let m = PullbackModel::deformed(a, spec.clone());
            let mut checked = 0;
            while checked < 1000 {
                let p = WZPoint::new(
                    c(rng.gen_range(-3.0..3.0), 0.0),
                    c(rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0)),
                );
                let Some(v) = regular(&m, p) else { continue };
                let q = WZPoint::new(p.w, p.z + c(0.0, a.strip_height()));
                let Ok(vq) = m.eval(q) else { continue };
                // Row 4 grows like exp(sinh²); compare relative to the larger value.
                assert!((vq - v).norm() < 1e-10 * v.norm().max(1e-300), "row {} at {:?}", spec.id, p);
                checked += 1;
            }
        }
    }

    #[test]
    fn lorentz_invariant_rows_are_w_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in catalog().into_iter().filter(|s| s.lorentz_invariant) {
            let m = PullbackModel::deformed(a1(), spec);
            for _ in 0..500 {
                let z = rng.gen_range(-4.0..4.0);
                let w = rng.gen_range(-6.0..6.0);
                let (Ok(v), Ok(v0)) = (m.eval(WZPoint::real(w, z)), m.eval(WZPoint::real(0.0, z))) else {
                    continue;
                };
                assert!((v - v0).norm() <= 1e-12 * v0.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn hermiticity_on_real_points() {
        // Row 6 is excluded: ℓ/(Δt−ℓ) is not invariant under Δt → −Δt combined with
        // complex conjugation, so W(w,−z) ≠ W(w,z)* there.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for spec in catalog().into_iter().filter(|s| s.id != "6") {
            // The Gaussian row overflows on timelike intervals unless ℓ is large.
            let ell = if spec.id == "4" { 2.0 } else { spec.ell };
            let m = PullbackModel::deformed(a1(), spec.with_ell(ell)).with_reg(RegulatorPolicy::none());
            let mut n = 0;
            while n < 300 {
                let w = rng.gen_range(-3.0..3.0);
                let z = rng.gen_range(0.3..4.0);
                let (Ok(v), Ok(vm)) = (m.eval(WZPoint::real(w, z)), m.eval(WZPoint::real(w, -z))) else {
                    continue;
                };
                if !(v.norm() < 1e12) {
                    continue;
                }
                assert!((vm - v.conj()).norm() <= 1e-10 * v.norm(), "row {} w={w} z={z}", spec.id);
                n += 1;
            }
        }
    }

    #[test]
    fn shifted_time_pole_breaks_hermiticity() {
        let m = PullbackModel::deformed(a1(), find_spec("6").unwrap()).with_reg(RegulatorPolicy::none());
        let v = m.eval(WZPoint::real(0.5, 1.0)).unwrap();
        let vm = m.eval(WZPoint::real(0.5, -1.0)).unwrap();
        assert!((vm - v.conj()).norm() > 1e-3 * v.norm());
    }

    #[test]
    fn classical_limit_is_monotone_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let und = PullbackModel::undeformed(a1());
        // The Gaussian row is excluded: it diverges on timelike intervals (see below).
        for spec in catalog().into_iter().filter(|s| s.id != "4") {
            let mut points = 0;
            while points < 100 {
                let p = WZPoint::real(rng.gen_range(-2.0..2.0), rng.gen_range(0.5..3.0));
                let base = und.eval(p).unwrap();
                let devs: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
                    .iter()
                    .map(|&ell| {
                        let m = PullbackModel::deformed(a1(), spec.with_ell(ell));
                        (m.eval(p).unwrap() - base).norm()
                    })
                    .collect();
                assert!(devs.windows(2).all(|d| d[1] < d[0]), "row {} {:?}", spec.id, devs);
                points += 1;
            }
        }
    }

    #[test]
    fn gaussian_row_diverges_on_timelike_intervals() {
        let und = PullbackModel::undeformed(a1());
        let p = WZPoint::real(0.3, 0.4);
        let base = und.eval(p).unwrap();
        let devs: Vec<f64> = [0.4, 0.2, 0.1]
            .iter()
            .map(|&ell| (PullbackModel::deformed(a1(), find_spec("4").unwrap().with_ell(ell)).eval(p).unwrap() - base).norm())
            .collect();
        assert!(devs.windows(2).all(|d| d[1] > d[0]), "{devs:?}");
    }
}
