//! Flag/file merging and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use polar_ot::channel::db_to_linear;
use polar_ot::polar::MAX_STAGES;

use crate::args::{ChannelArgs, PairingArg, SplitArg};
use crate::error::CliError;

/// Defaults read from `--params`. Every field is optional.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub snr: Option<f64>,
    pub snr_db: Option<f64>,
    pub gamma: Option<f64>,
    pub k: Option<usize>,
    pub pairing: Option<PairingArg>,
    pub split: Option<SplitArg>,
    pub max_perms: Option<usize>,
    pub ell: Option<usize>,
    pub c_eps: Option<f64>,
    pub eps_s: Option<f64>,
    pub eps_p: Option<f64>,
    pub eps_sw: Option<f64>,
    pub v: Option<f64>,
    pub delta: Option<f64>,
    pub trials: Option<u64>,
    pub rand: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub selection: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("params {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("params {}: {e}", path.display())))
    }
}

/// Validated block length and SNR.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChannelSpec {
    pub m: usize,
    pub n: usize,
    pub snr: f64,
    pub snr_db: f64,
}

pub fn stages_from(n: Option<usize>, m: Option<usize>) -> Result<usize, CliError> {
    let m = match (n, m) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "n: give either --n or --m, not both".into(),
            ))
        }
        (Some(n), None) => {
            if n < 2 || !n.is_power_of_two() {
                return Err(CliError::Usage(format!("n: {n} is not a power of two ≥ 2")));
            }
            n.trailing_zeros() as usize
        }
        (None, Some(m)) => m,
        (None, None) => return Err(CliError::Usage("n: missing (--n or --m)".into())),
    };
    if m == 0 || m > MAX_STAGES {
        return Err(CliError::Usage(format!("m: {m} outside 1..={MAX_STAGES}")));
    }
    Ok(m)
}

pub fn snr_from(snr: Option<f64>, snr_db: Option<f64>) -> Result<f64, CliError> {
    let snr = match (snr, snr_db) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "snr: give either --snr or --snr-db, not both".into(),
            ))
        }
        (Some(s), None) => s,
        (None, Some(db)) => db_to_linear(db),
        (None, None) => return Err(CliError::Usage("snr: missing (--snr or --snr-db)".into())),
    };
    if !snr.is_finite() || snr <= 0.0 {
        return Err(CliError::Usage(format!(
            "snr: {snr} must be positive and finite"
        )));
    }
    Ok(snr)
}

impl ChannelSpec {
    /// Flags win over the file; n/m and snr/snr-db conflicts are checked
    /// after merging so that a flag replaces its file counterpart pair.
    pub fn resolve(args: &ChannelArgs, file: &FileConfig) -> Result<Self, CliError> {
        let (n, m) = if args.n.is_some() || args.m.is_some() {
            (args.n, args.m)
        } else {
            (file.n, file.m)
        };
        let (snr, snr_db) = if args.snr.is_some() || args.snr_db.is_some() {
            (args.snr, args.snr_db)
        } else {
            (file.snr, file.snr_db)
        };
        let m = stages_from(n, m)?;
        let snr = snr_from(snr, snr_db)?;
        Ok(Self {
            m,
            n: 1 << m,
            snr,
            snr_db: 10.0 * snr.log10(),
        })
    }
}

pub fn require<T>(value: Option<T>, field: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("{field}: missing")))
}

pub fn probability(value: f64, field: &str) -> Result<f64, CliError> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(CliError::Usage(format!("{field}: {value} outside (0, 1)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chan(n: Option<usize>, snr: Option<f64>, snr_db: Option<f64>) -> ChannelArgs {
        ChannelArgs {
            n,
            m: None,
            snr,
            snr_db,
        }
    }

    #[test]
    fn resolves_flags() {
        let c = ChannelSpec::resolve(&chan(Some(16), None, Some(0.187)), &FileConfig::default())
            .unwrap();
        assert_eq!((c.m, c.n), (4, 16));
        assert!((c.snr - 1.044).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_values() {
        let f = FileConfig::default();
        let err = ChannelSpec::resolve(&chan(Some(15), Some(1.0), None), &f).unwrap_err();
        assert!(err.to_string().starts_with("n:"));
        let err = ChannelSpec::resolve(&chan(Some(16), Some(1.0), Some(0.0)), &f).unwrap_err();
        assert!(err.to_string().starts_with("snr:"));
        assert!(ChannelSpec::resolve(&chan(Some(16), None, None), &f).is_err());
        assert!(ChannelSpec::resolve(&chan(Some(16), Some(-1.0), None), &f).is_err());
    }

    #[test]
    fn flags_override_file() {
        let f = FileConfig {
            n: Some(8),
            snr_db: Some(3.0),
            ..Default::default()
        };
        let c = ChannelSpec::resolve(&chan(None, None, None), &f).unwrap();
        assert_eq!(c.n, 8);
        let c = ChannelSpec::resolve(&chan(Some(32), Some(2.0), None), &f).unwrap();
        assert_eq!((c.n, c.snr), (32, 2.0));
    }

    #[test]
    fn unknown_file_fields_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
