//! Output plumbing: number formatting, the run manifest, CSV writing.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;
use crate::settings::Settings;

/// Twelve significant digits, `%g` style: fixed notation for moderate
/// exponents, scientific otherwise, trailing zeros removed.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Rounds to the value printed by [`fmt_g`], so JSON output carries the
/// same twelve digits as CSV output.
pub fn round12(x: f64) -> f64 {
    fmt_g(x).parse().unwrap_or(x)
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a Settings,
    pub master_seed: u64,
    pub output_dir: String,
    pub outputs: Vec<String>,
    pub started_at: String,
    pub finished_at: Option<String>,
}

/// Owns the output directory of one command run.
pub struct Run<'a> {
    dir: PathBuf,
    manifest: RunManifest<'a>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl<'a> Run<'a> {
    /// Creates the directory and writes the manifest listing `outputs`.
    pub fn start(command: &'a str, config: &'a Settings, dir: &Path, outputs: Vec<String>) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(&format!("cannot create {}", dir.display()), e))?;
        let manifest = RunManifest {
            command,
            version: bme_core::VERSION,
            config,
            master_seed: config.seed,
            output_dir: dir.display().to_string(),
            outputs,
            started_at: chrono::Utc::now().to_rfc3339(),
            finished_at: None,
        };
        let run = Self { dir: dir.to_path_buf(), manifest };
        run.write_manifest()?;
        Ok(run)
    }

    fn write_manifest(&self) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(&self.manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
        self.write_text(MANIFEST_FILE, &(text + "\n"))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn check_listed(&self, name: &str) {
        debug_assert!(
            name == MANIFEST_FILE || self.manifest.outputs.iter().any(|o| o == name),
            "{name} missing from manifest"
        );
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<(), CliError> {
        self.check_listed(name);
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| CliError::io(&format!("cannot write {}", path.display()), e))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
        self.write_text(name, &(text + "\n"))
    }

    /// Writes a CSV file from a header and rows of already-formatted fields.
    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        self.check_listed(name);
        let path = self.path(name);
        let err = |e: csv::Error| CliError::Runtime(format!("cannot write {}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(row).map_err(err)?;
        }
        w.flush().map_err(|e| CliError::io(&format!("cannot write {}", path.display()), e))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.manifest.finished_at = Some(chrono::Utc::now().to_rfc3339());
        self.write_manifest()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_g(0.5), "0.5");
        assert_eq!(fmt_g(5.0 / 9.0), "0.555555555556");
        assert_eq!(fmt_g(7.0 / 12.0), "0.583333333333");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(-2.5e-7), "-2.5e-7");
        assert_eq!(fmt_g(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(0.99999999999999), "1");
        assert_eq!(fmt_g(1e-5), "0.00001");
    }

    #[test]
    fn round12_is_idempotent() {
        for x in [1.0 / 3.0, 2.0_f64.sqrt(), 1e-9 / 7.0, 12345.678901234] {
            let r = round12(x);
            assert_eq!(round12(r), r);
            assert_eq!(fmt_g(r), fmt_g(x));
        }
    }
}
