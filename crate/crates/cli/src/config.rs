//! Run configuration: built-in defaults, then an optional TOML file, then flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "UNRUH_OUT";
pub const DEFAULT_OUT: &str = "unruh-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Residue,
    Quadrature,
    Both,
}

/// Everything that determines a payload. Output location, worker count and cache
/// policy are not part of it and live in [`Runtime`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Catalog ids or names; `none` is the undeformed field.
    pub spec: Vec<String>,
    pub a: f64,
    pub omega: Vec<f64>,
    /// Overrides the catalog length scale.
    pub ell: Option<f64>,
    pub ell_ladder: Vec<f64>,
    /// σ·a values: the extrapolation ladder for the residue method, and the widths
    /// evaluated by the quadrature method.
    pub sigma: Vec<f64>,
    /// z-regulator in units of `1/a`.
    pub eps: Option<f64>,
    /// Sign of the w-regulator, `1` or `-1`.
    pub eps_w_sign: i8,
    pub method: MethodChoice,
    /// `w·a` values for pole scans.
    pub w: Vec<f64>,
    /// Half-width of the pole-scan window in `Re z`, units of `1/a`.
    pub re_half: f64,
    /// Track poles along `ell_ladder` in the `poles` command.
    pub track: bool,
    /// Restricts `table1` to these rows.
    pub only: Vec<String>,
    pub kms_grid: usize,
    /// Relative tolerance of the σ-extrapolation.
    pub tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spec: vec!["none".into()],
            a: 1.0,
            omega: vec![1.0],
            ell: None,
            ell_ladder: vec![0.1, 0.03, 0.01],
            sigma: vec![20.0, 40.0, 80.0],
            eps: None,
            eps_w_sign: 1,
            method: MethodChoice::Residue,
            w: vec![0.0],
            re_half: 8.0,
            track: false,
            only: Vec::new(),
            kms_grid: 32,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Runtime {
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub force: bool,
}

/// Flags shared by every subcommand. Unset flags fall back to the config file,
/// then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct SharedFlags {
    /// Acceleration a (> 0).
    #[arg(long)]
    pub a: Option<f64>,
    /// Detector gaps: comma list (`0.5,1,2`) or inclusive range `start:stop:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// Deformation length scale, overriding the catalog value.
    #[arg(long)]
    pub ell: Option<f64>,
    /// Descending ℓ-ladder, comma separated.
    #[arg(long)]
    pub ell_ladder: Option<String>,
    /// σ·a values, comma separated.
    #[arg(long)]
    pub sigma: Option<String>,
    /// z-regulator ε·a.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Sign of the w-regulator.
    #[arg(long, allow_hyphen_values = true)]
    pub eps_w_sign: Option<i8>,
    /// Deformation ids or names, comma separated (`none` for the undeformed field).
    #[arg(long)]
    pub spec: Option<String>,
    /// Output directory [default: $UNRUH_OUT or ./unruh-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Recompute even when a cached result exists.
    #[arg(long)]
    pub force: bool,
    /// TOML file with any of the run-configuration keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("not a number: `{t}`")))
        .collect()
}

/// `start:stop:step` (inclusive, within a 10⁻⁹ step tolerance) or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [_] => parse_list(s),
        [a, b, h] => {
            let (a, b, h): (f64, f64, f64) = (a.trim().parse()?, b.trim().parse()?, h.trim().parse()?);
            if !(h > 0.0) || !a.is_finite() || !b.is_finite() || b < a {
                bail!("range `{s}` needs start ≤ stop and a positive step");
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            if n > 100_000 {
                bail!("range `{s}` has too many points");
            }
            Ok((0..=n).map(|k| a + k as f64 * h).collect())
        }
        _ => bail!("expected a comma list or start:stop:step, got `{s}`"),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GridValue {
    List(Vec<f64>),
    Text(String),
}

fn load_file(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut table: toml::Table = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    // `omega` may be written as a range string as well as an array.
    if let Some(v) = table.remove("omega") {
        let grid: GridValue = v.try_into().context("omega must be an array or a range string")?;
        let values = match grid {
            GridValue::List(l) => l,
            GridValue::Text(s) => parse_grid(&s)?,
        };
        table.insert("omega".into(), toml::Value::Array(values.into_iter().map(toml::Value::Float).collect()));
    }
    toml::Value::Table(table).try_into().with_context(|| format!("invalid keys in {}", path.display()))
}

impl SharedFlags {
    pub fn resolve(&self) -> Result<(RunConfig, Runtime)> {
        let mut c = match &self.config {
            Some(p) => load_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.a {
            c.a = v;
        }
        if let Some(s) = &self.omega {
            c.omega = parse_grid(s)?;
        }
        if self.ell.is_some() {
            c.ell = self.ell;
        }
        if let Some(s) = &self.ell_ladder {
            c.ell_ladder = parse_list(s)?;
        }
        if let Some(s) = &self.sigma {
            c.sigma = parse_list(s)?;
        }
        if self.eps.is_some() {
            c.eps = self.eps;
        }
        if let Some(v) = self.eps_w_sign {
            c.eps_w_sign = v;
        }
        if let Some(s) = &self.spec {
            c.spec = s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect();
        }
        let out = self
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        Ok((c, Runtime { out, workers: self.workers, force: self.force }))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        bail!("{name} must be positive and finite, got {v}");
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        positive("a", self.a)?;
        if self.omega.is_empty() {
            bail!("the Ω grid is empty");
        }
        if self.omega.iter().any(|o| !o.is_finite()) {
            bail!("Ω values must be finite");
        }
        if let Some(l) = self.ell {
            positive("ell", l)?;
        }
        if self.ell_ladder.is_empty() || self.ell_ladder.windows(2).any(|w| !(w[1] < w[0])) {
            bail!("the ℓ-ladder must be non-empty and strictly descending");
        }
        for &l in &self.ell_ladder {
            positive("ℓ-ladder entries", l)?;
        }
        if self.sigma.is_empty() || self.sigma.windows(2).any(|w| !(w[1] > w[0])) {
            bail!("the σ-ladder must be non-empty and strictly ascending");
        }
        for &s in &self.sigma {
            positive("σ entries", s)?;
        }
        if let Some(e) = self.eps {
            positive("eps", e)?;
        }
        if self.eps_w_sign != 1 && self.eps_w_sign != -1 {
            bail!("eps-w-sign must be 1 or -1, got {}", self.eps_w_sign);
        }
        if self.spec.is_empty() {
            bail!("no deformation given");
        }
        positive("re-half", self.re_half)?;
        positive("tol", self.tol)?;
        if self.kms_grid < 2 {
            bail!("kms-grid needs at least 2 points per axis");
        }
        if self.w.iter().any(|w| !w.is_finite()) {
            bail!("w values must be finite");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_and_lists() {
        assert_eq!(parse_grid("-2:2:0.5").unwrap(), vec![-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_grid("0.5, 1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_list("a").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "a = 2.0\nomega = \"1:2:0.5\"\nsigma = [10.0, 20.0]\n").unwrap();
        let flags = SharedFlags { config: Some(path.clone()), a: Some(3.0), ..Default::default() };
        let (c, _) = flags.resolve().unwrap();
        assert_eq!(c.a, 3.0);
        assert_eq!(c.omega, vec![1.0, 1.5, 2.0]);
        assert_eq!(c.sigma, vec![10.0, 20.0]);
        std::fs::write(&path, "bogus = 1\n").unwrap();
        assert!(SharedFlags { config: Some(path), ..Default::default() }.resolve().is_err());
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        assert!(RunConfig { omega: vec![], ..Default::default() }.validate().is_err());
        assert!(RunConfig { a: -1.0, ..Default::default() }.validate().is_err());
        assert!(RunConfig { ell_ladder: vec![0.01, 0.1], ..Default::default() }.validate().is_err());
        assert!(RunConfig { eps_w_sign: 0, ..Default::default() }.validate().is_err());
    }
}
