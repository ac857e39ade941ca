//! Run settings: built-in defaults, overlaid by a JSON config file, overlaid
//! by command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use bme_core::experiments::{MeasurementSource, RiskWeighting};
use bme_core::{EnsembleKind, Tolerances};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Resolved settings, echoed verbatim into the run manifest. Unset options
/// take per-command defaults when a command resolves them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub d: Option<Vec<usize>>,
    #[serde(rename = "N")]
    pub n_shots: Option<Vec<usize>>,
    pub ensemble: Option<EnsembleKind>,
    #[serde(rename = "L")]
    pub ensemble_size: Option<usize>,
    #[serde(rename = "I")]
    pub experiments: Option<usize>,
    pub seed: u64,
    pub stream: u64,
    pub workers: Option<usize>,
    pub weighting: RiskWeighting,
    pub bins: Option<usize>,
    pub sources: Option<Vec<MeasurementSource>>,
    pub trials: Option<usize>,
    pub corpus: Option<usize>,
    pub rho0: Option<usize>,
    pub ensemble_file: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub svg: bool,
    pub timing: bool,
    pub tolerances: Option<Tolerances>,
}

impl Settings {
    /// Reads a config file. A run manifest is accepted too, in which case
    /// the settings it recorded are used.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
        let value = match value.get("config") {
            Some(inner) if value.get("command").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Comma list `2,4,8` or inclusive range `2:8`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsizeList(pub Vec<usize>);

impl FromStr for UsizeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |part: &str| format!("'{part}' is not a nonnegative integer");
        if let Some((lo, hi)) = s.split_once(':') {
            let lo: usize = lo.trim().parse().map_err(|_| bad(lo))?;
            let hi: usize = hi.trim().parse().map_err(|_| bad(hi))?;
            if hi < lo {
                return Err(format!("empty range {s}"));
            }
            return Ok(UsizeList((lo..=hi).collect()));
        }
        let items = s
            .split(',')
            .map(|p| p.trim().parse().map_err(|_| bad(p)))
            .collect::<Result<Vec<usize>, _>>()?;
        Ok(UsizeList(items))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceList(pub Vec<MeasurementSource>);

impl FromStr for SourceList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|p| p.trim().parse::<MeasurementSource>().map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()
            .map(SourceList)
    }
}

pub fn parse_weighting(s: &str) -> Result<RiskWeighting, String> {
    match s {
        "posterior" => Ok(RiskWeighting::Posterior),
        "prior" => Ok(RiskWeighting::Prior),
        _ => Err(format!("unknown weighting '{s}' (expected posterior or prior)")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!("2,4, 8".parse::<UsizeList>().unwrap().0, vec![2, 4, 8]);
        assert_eq!("2:5".parse::<UsizeList>().unwrap().0, vec![2, 3, 4, 5]);
        assert!("5:2".parse::<UsizeList>().is_err());
        assert!("two".parse::<UsizeList>().is_err());
        assert_eq!(
            "pauli,haar".parse::<SourceList>().unwrap().0,
            vec![MeasurementSource::Pauli, MeasurementSource::Haar]
        );
    }

    #[test]
    fn shipped_presets_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets");
        let mut n = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            let s = Settings::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(s.d.is_some(), "{}", path.display());
            n += 1;
        }
        assert!(n >= 10);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<Settings>(r#"{"dims": [2]}"#).is_err());
        let s: Settings = serde_json::from_str(r#"{"d": [2, 3], "L": 50, "weighting": "prior"}"#).unwrap();
        assert_eq!(s.d, Some(vec![2, 3]));
        assert_eq!(s.ensemble_size, Some(50));
        assert_eq!(s.weighting, RiskWeighting::Prior);
    }
}
