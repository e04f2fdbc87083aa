//! Flat TOML configuration files, command-line overrides and the config
//! fingerprint embedded in every artifact.

use std::fs;
use std::path::{Path, PathBuf};

use aquarium_core::{AquariumConfig, ConfigError};
use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("configuration key `{key}` expects {expected}, got `{value}`")]
    BadValue {
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error(transparent)]
    Invalid(#[from] ConfigError),
}

fn default_table() -> Table {
    table_without_seed(&AquariumConfig::default())
}

/// TOML integers are signed 64-bit, so the seed is handled apart from the
/// other keys: an integer when it fits, a decimal string otherwise.
fn table_without_seed(config: &AquariumConfig) -> Table {
    let zeroed = AquariumConfig {
        seed: 0,
        ..config.clone()
    };
    match Value::try_from(zeroed).expect("config serializes") {
        Value::Table(t) => t,
        _ => unreachable!("config is a struct"),
    }
}

fn seed_value(seed: u64) -> Value {
    i64::try_from(seed).map_or_else(|_| Value::String(seed.to_string()), Value::Integer)
}

fn parse_seed(value: &Value) -> Option<u64> {
    match value {
        Value::Integer(i) => u64::try_from(*i).ok(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

/// Every key accepted in a configuration file, in file order.
pub fn known_keys() -> Vec<String> {
    default_table().keys().cloned().collect()
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Integer(_) => "an integer",
        Value::Float(_) => "a number",
        Value::Boolean(_) => "true or false",
        _ => "a scalar",
    }
}

/// Overlay `table` on `base`. Keys must be known; integers are accepted
/// where a float is expected. The result is validated.
pub fn merge_table(base: &AquariumConfig, table: Table) -> Result<AquariumConfig, ConfigFileError> {
    let defaults = default_table();
    let mut merged = table_without_seed(base);
    let mut seed = base.seed;
    for (key, value) in table {
        if key == "seed" {
            seed = parse_seed(&value).ok_or_else(|| ConfigFileError::BadValue {
                key,
                expected: "a non-negative integer",
                value: value.to_string(),
            })?;
            continue;
        }
        let Some(template) = defaults.get(&key) else {
            return Err(ConfigFileError::UnknownKey(key));
        };
        let value = match (template, value) {
            (Value::Float(_), Value::Integer(i)) => Value::Float(i as f64),
            (t, v) if std::mem::discriminant(t) == std::mem::discriminant(&v) => v,
            (t, v) => {
                return Err(ConfigFileError::BadValue {
                    key,
                    expected: type_name(t),
                    value: v.to_string(),
                })
            }
        };
        merged.insert(key, value);
    }
    let mut config: AquariumConfig = Value::Table(merged).try_into()?;
    config.seed = seed;
    config.motion = base.motion;
    config.observation_scale = base.observation_scale;
    config.validate()?;
    Ok(config)
}

pub fn parse_config(text: &str) -> Result<AquariumConfig, ConfigFileError> {
    let table: Table = text.parse()?;
    merge_table(&AquariumConfig::default(), table)
}

pub fn load_config(path: &Path) -> Result<AquariumConfig, ConfigFileError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Apply `key=value` style overrides given as strings. Keys may use `-` or
/// `_`; values are parsed according to the key's type.
pub fn apply_overrides(base: &AquariumConfig, overrides: &[(String, String)]) -> Result<AquariumConfig, ConfigFileError> {
    let defaults = default_table();
    let mut table = Table::new();
    for (raw_key, raw) in overrides {
        let key = raw_key.replace('-', "_");
        let Some(template) = defaults.get(&key) else {
            return Err(ConfigFileError::UnknownKey(raw_key.clone()));
        };
        let bad = || ConfigFileError::BadValue {
            key: key.clone(),
            expected: type_name(template),
            value: raw.clone(),
        };
        let value = match template {
            _ if key == "seed" => Value::String(raw.trim().to_string()),
            Value::Integer(_) => Value::Integer(raw.trim().parse().map_err(|_| bad())?),
            Value::Float(_) => Value::Float(raw.trim().parse().map_err(|_| bad())?),
            Value::Boolean(_) => Value::Boolean(raw.trim().parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        table.insert(key, value);
    }
    merge_table(base, table)
}

/// The file form of `config` (all keys, defaults included).
pub fn to_toml_string(config: &AquariumConfig) -> String {
    let zeroed = AquariumConfig {
        seed: 0,
        ..config.clone()
    };
    let text = toml::to_string(&zeroed).expect("config serializes");
    let seed_line = format!("seed = {}", seed_value(config.seed));
    let mut out: String = text
        .lines()
        .map(|l| if l == "seed = 0" { seed_line.as_str() } else { l })
        .collect::<Vec<_>>()
        .join("\n");
    out.push('\n');
    out
}

/// Hex SHA-256 over the file form plus the programmatic-only settings.
pub fn fingerprint(config: &AquariumConfig) -> String {
    let mut h = Sha256::new();
    h.update(to_toml_string(config).as_bytes());
    h.update(format!("motion={:?};scale={:?}", config.motion, config.observation_scale).as_bytes());
    hex::encode(h.finalize())
}
