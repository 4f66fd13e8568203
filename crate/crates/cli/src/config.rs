use std::collections::BTreeMap;

use serde::Serialize;

use crate::input::{ConfigFile, InputError};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_RESOLUTION: f64 = 1.0 / 16.0;
pub const TOL_ENV: &str = "KKMKIT_TOL";

/// Settings for one run. Sources, strongest first: command-line flags, the
/// JSON config file, `KKMKIT_TOL` (tolerance only), built-in defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub tol: f64,
    pub resolution: f64,
    pub trial_counts: BTreeMap<String, usize>,
    pub output_path: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            tol: DEFAULT_TOL,
            resolution: DEFAULT_RESOLUTION,
            trial_counts: BTreeMap::new(),
            output_path: None,
        }
    }
}

/// Values given explicitly on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub resolution: Option<f64>,
    pub output_path: Option<String>,
}

impl RunConfig {
    pub fn resolve(flags: &Overrides, file: Option<&ConfigFile>, env_tol: Option<&str>) -> Result<Self, InputError> {
        let mut cfg = RunConfig::default();
        if let Some(raw) = env_tol {
            cfg.tol = raw
                .trim()
                .parse()
                .map_err(|_| InputError::Invalid(format!("{TOL_ENV}={raw:?} is not a number")))?;
        }
        if let Some(file) = file {
            cfg.seed = file.seed.unwrap_or(cfg.seed);
            cfg.tol = file.tol.unwrap_or(cfg.tol);
            cfg.resolution = file.resolution.unwrap_or(cfg.resolution);
            cfg.trial_counts = file.trial_counts.clone();
            cfg.output_path = file.output_path.clone();
        }
        cfg.seed = flags.seed.unwrap_or(cfg.seed);
        cfg.tol = flags.tol.unwrap_or(cfg.tol);
        cfg.resolution = flags.resolution.unwrap_or(cfg.resolution);
        if flags.output_path.is_some() {
            cfg.output_path = flags.output_path.clone();
        }
        if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
            return Err(InputError::Invalid(format!(
                "tolerance must be positive, got {}",
                cfg.tol
            )));
        }
        if !(cfg.resolution > 0.0 && cfg.resolution <= 1.0) {
            return Err(InputError::Invalid(format!(
                "resolution must lie in (0, 1], got {}",
                cfg.resolution
            )));
        }
        Ok(cfg)
    }

    pub fn trials(&self, suite: &str, default: usize) -> usize {
        self.trial_counts.get(suite).copied().unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_env() {
        let file = ConfigFile {
            seed: Some(3),
            tol: Some(1e-6),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&Overrides::default(), Some(&file), Some("1e-4")).unwrap();
        assert_eq!((cfg.seed, cfg.tol), (3, 1e-6));
        let cfg = RunConfig::resolve(&Overrides::default(), None, Some("1e-4")).unwrap();
        assert_eq!(cfg.tol, 1e-4);
        let flags = Overrides {
            tol: Some(1e-12),
            ..Default::default()
        };
        assert_eq!(
            RunConfig::resolve(&flags, Some(&file), Some("1e-4")).unwrap().tol,
            1e-12
        );
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::resolve(&Overrides::default(), None, Some("tiny")).is_err());
        let flags = Overrides {
            resolution: Some(0.0),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&flags, None, None).is_err());
    }
}
