use std::fs;
use std::path::Path;

use gpi_core::exactnum::{parse_rational, BigRational};
use serde::{Deserialize, Serialize};

use crate::args::Opts;
use crate::error::CliError;

pub const DEFAULT_WIDTH: &str = "1/1000000";
pub const DEFAULT_REFINE_MAX: u32 = 20;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

/// Fully resolved run parameters, embedded in every report. Output path,
/// worker count and timing are deliberately absent: they do not change results.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub command: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m2: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m3: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_lo: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_hi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default)]
    pub width: Option<String>,
    #[serde(default)]
    pub refine_max: Option<u32>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Flags override the config file; then documented defaults fill the rest.
    pub fn resolve(opts: &Opts, file: Option<RunConfig>, command: Vec<String>) -> Self {
        let f = file.unwrap_or_default();
        Self {
            command,
            m2: opts.m2.or(f.m2),
            m3: opts.m3.or(f.m3),
            y2: opts.y2.or(f.y2),
            y3: opts.y3.or(f.y3),
            a: opts.a.clone().or(f.a),
            x: opts.x.clone().or(f.x),
            z: opts.z.clone().or(f.z),
            z_lo: opts.z_lo.clone().or(f.z_lo),
            z_hi: opts.z_hi.clone().or(f.z_hi),
            grid: opts.grid.or(f.grid),
            width: Some(opts.width.clone().or(f.width).unwrap_or_else(|| DEFAULT_WIDTH.into())),
            refine_max: Some(opts.refine_max.or(f.refine_max).unwrap_or(DEFAULT_REFINE_MAX)),
            seed: Some(opts.seed.or(f.seed).unwrap_or(DEFAULT_SEED)),
            samples: Some(opts.samples.or(f.samples).unwrap_or(DEFAULT_SAMPLES)),
        }
    }

    pub fn width(&self) -> Result<BigRational, CliError> {
        let w = rational("width", self.width.as_deref().unwrap_or(DEFAULT_WIDTH))?;
        if w <= BigRational::from_integer(0.into()) {
            return Err(CliError::Usage("--width must be positive".into()));
        }
        Ok(w)
    }

    pub fn refine_max(&self) -> u32 {
        self.refine_max.unwrap_or(DEFAULT_REFINE_MAX)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn samples(&self) -> u64 {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    /// Grid size, recording the command default when none was given.
    pub fn grid_or(&mut self, default: usize) -> usize {
        *self.grid.get_or_insert(default)
    }

    pub fn require_m(&self) -> Result<(u32, u32), CliError> {
        match (self.m2, self.m3) {
            (Some(m2), Some(m3)) => Ok((m2, m3)),
            _ => Err(CliError::Usage("this command needs --m2 and --m3".into())),
        }
    }

    pub fn require_y(&self) -> Result<(f64, f64), CliError> {
        match (self.y2, self.y3) {
            (Some(y2), Some(y3)) => Ok((y2, y3)),
            _ => Err(CliError::Usage("this command needs --y2 and --y3".into())),
        }
    }

    pub fn rational_opt(&self, name: &str, value: &Option<String>) -> Result<Option<BigRational>, CliError> {
        value.as_deref().map(|v| rational(name, v)).transpose()
    }
}

pub fn rational(name: &str, text: &str) -> Result<BigRational, CliError> {
    parse_rational(text).map_err(|_| CliError::Usage(format!("--{name}: `{text}` is not a rational number")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_and_defaults_fill() {
        let opts = Opts {
            m2: Some(3),
            ..Opts::default()
        };
        let file = RunConfig {
            m2: Some(1),
            m3: Some(5),
            width: Some("1/1000".into()),
            ..RunConfig::default()
        };
        let cfg = RunConfig::resolve(&opts, Some(file), vec!["params".into()]);
        assert_eq!((cfg.m2, cfg.m3), (Some(3), Some(5)));
        assert_eq!(cfg.width.as_deref(), Some("1/1000"));
        assert_eq!(cfg.refine_max, Some(20));
        assert_eq!(cfg.seed, Some(1));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"m2": 1, "bogus": 2}"#).is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"m2": 1, "x": "1/2"}"#).unwrap();
        assert_eq!(cfg.x.as_deref(), Some("1/2"));
    }

    #[test]
    fn bad_width_is_a_usage_error() {
        let cfg = RunConfig {
            width: Some("0".into()),
            ..RunConfig::default()
        };
        assert!(matches!(cfg.width(), Err(CliError::Usage(_))));
    }
}
