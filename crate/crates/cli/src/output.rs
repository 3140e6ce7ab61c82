//! File writers. Floats in text tables carry 17 significant digits; JSON uses
//! serde_json's shortest round-trip form.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_text(path: &Path, body: &str) -> Result<PathBuf> {
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(path.to_path_buf())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    write_text(path, &body)
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Quote a CSV field only when it needs it.
pub fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Two-column data file for plotting. `header` lines are written as `#` comments.
pub fn write_dat(path: &Path, header: &[String], rows: &[(f64, f64)]) -> Result<PathBuf> {
    let mut s = String::new();
    for h in header {
        let _ = writeln!(s, "# {h}");
    }
    for (x, y) in rows {
        let _ = writeln!(s, "{} {}", num(*x), num(*y));
    }
    write_text(path, &s)
}

/// One gnuplot `plot` over the given data files, each drawn with points and lines.
pub fn gnuplot_script(title: &str, xlabel: &str, ylabel: &str, logscale_y: bool, files: &[(String, String)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set title \"{title}\"");
    let _ = writeln!(s, "set xlabel \"{xlabel}\"");
    let _ = writeln!(s, "set ylabel \"{ylabel}\"");
    if logscale_y {
        let _ = writeln!(s, "set logscale y");
    }
    let _ = writeln!(s, "set key outside");
    let plots: Vec<String> = files.iter().map(|(f, t)| format!("\"{f}\" using 1:2 with linespoints title \"{t}\"")).collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(field("plain"), "plain");
        assert_eq!(field("a,b"), "\"a,b\"");
        assert_eq!(field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn dat_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.dat");
        write_dat(&p, &["omega response".into()], &[(1.0, 2.0)]).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        assert!(text.starts_with("# omega response\n"));
        assert_eq!(text.lines().count(), 2);
    }
}
