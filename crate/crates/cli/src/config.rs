//! Run configuration: defaults, plain `key=value` config files, and flag
//! overrides (flags win over the file, the file wins over defaults).

use std::fs;
use std::path::{Path, PathBuf};

use tinysinc_core::euler_maclaurin::EMParams;
use tinysinc_core::mpnum::GetMeBehavior;
use tinysinc_core::tiny_eval::PipelineConfig;
use tinysinc_core::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    pub cache_dir: PathBuf,
    pub format: OutputFormat,
    pub heavy: bool,
    pub demo_machine_precision: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            pipeline: PipelineConfig::default(),
            cache_dir: default_cache_dir(),
            format: OutputFormat::Table,
            heavy: false,
            demo_machine_precision: false,
        }
    }
}

fn default_cache_dir() -> PathBuf {
    match std::env::var_os("TINYSINC_CACHE") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(".tinysinc-cache"),
    }
}

fn set_em(params: &mut EMParams, key: &str, value: &str) -> Result<bool, Error> {
    let parse_u32 = |v: &str| {
        v.parse::<u32>()
            .map_err(|_| Error::Parse(format!("invalid value for {key}: {v:?}")))
    };
    let parse_u64 = |v: &str| {
        v.parse::<u64>()
            .map_err(|_| Error::Parse(format!("invalid value for {key}: {v:?}")))
    };
    match key {
        "m" => params.m = parse_u64(value)?,
        "mu" => params.mu = parse_u32(value)?,
        "ndec" => params.n_decimals = parse_u32(value)?,
        "acc" => params.accuracy_goal = parse_u32(value)?,
        "wp" => params.working_digits = parse_u32(value)?,
        _ => return Ok(false),
    }
    Ok(true)
}

/// Apply one `key=value` setting. Returns an error for unknown keys so typos
/// in config files cannot silently change a reproduction run.
pub fn apply_setting(config: &mut RunConfig, key: &str, value: &str) -> Result<(), Error> {
    let (group, short) = if let Some(rest) = key.strip_suffix('1') {
        (Some(&mut config.pipeline.sum_params), rest)
    } else if let Some(rest) = key.strip_suffix('2') {
        (Some(&mut config.pipeline.fact_params), rest)
    } else {
        (None, key)
    };
    if let Some(params) = group {
        if set_em(params, short, value)? {
            return Ok(());
        }
    }
    match key {
        "cache" => config.cache_dir = PathBuf::from(value),
        "format" => {
            config.format = match value {
                "table" => OutputFormat::Table,
                "json" => OutputFormat::Json,
                "csv" => OutputFormat::Csv,
                other => return Err(Error::Parse(format!("unknown format {other:?}"))),
            }
        }
        "heavy" => config.heavy = parse_bool(key, value)?,
        "demo-machine-precision" => config.demo_machine_precision = parse_bool(key, value)?,
        "compat-getme" => {
            config.pipeline.getme = if parse_bool(key, value)? {
                GetMeBehavior::CompatMantissaOne
            } else {
                GetMeBehavior::Signal
            }
        }
        "oracle-wd" => {
            config.pipeline.oracle_working_digits = value
                .parse()
                .map_err(|_| Error::Parse(format!("invalid value for {key}: {value:?}")))?
        }
        other => return Err(Error::Parse(format!("unknown config key {other:?}"))),
    }
    Ok(())
}

fn parse_bool(key: &str, value: &str) -> Result<bool, Error> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(Error::Parse(format!("invalid bool for {key}: {other:?}"))),
    }
}

/// Read a plain-text config file: one `key=value` per line, `#` comments.
pub fn load_config_file(config: &mut RunConfig, path: &Path) -> Result<(), Error> {
    let content = fs::read_to_string(path)?;
    for (idx, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!(
                "{}:{}: expected key=value, got {line:?}",
                path.display(),
                idx + 1
            ))
        })?;
        apply_setting(config, key.trim(), value.trim())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_parameters() {
        let c = RunConfig::default();
        assert_eq!(c.pipeline.sum_params.m, 100001);
        assert_eq!(c.pipeline.sum_params.mu, 10);
        assert_eq!(c.pipeline.sum_params.n_decimals, 100);
        assert_eq!(c.pipeline.sum_params.accuracy_goal, 20);
        assert_eq!(c.pipeline.sum_params.working_digits, 40);
        assert_eq!(c.pipeline.fact_params.m, 100001);
        assert_eq!(c.pipeline.fact_params.mu, 5);
        assert_eq!(c.pipeline.fact_params.n_decimals, 100);
        assert_eq!(c.pipeline.fact_params.working_digits, 40);
    }

    #[test]
    fn settings_apply() {
        let mut c = RunConfig::default();
        apply_setting(&mut c, "mu1", "11").unwrap();
        apply_setting(&mut c, "m2", "200002").unwrap();
        apply_setting(&mut c, "format", "json").unwrap();
        assert_eq!(c.pipeline.sum_params.mu, 11);
        assert_eq!(c.pipeline.fact_params.m, 200002);
        assert_eq!(c.format, OutputFormat::Json);
        assert!(apply_setting(&mut c, "bogus", "1").is_err());
    }
}
