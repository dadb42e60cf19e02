//! JSON scenario files: a flat object with `ScenarioConfig` keys, optionally
//! starting from a named `preset` whose fields the other keys override.

use std::path::{Path, PathBuf};

use dfdmimo::experiments::STUDY_UE_LOADS;
use dfdmimo::{ScenarioConfig, SimError};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::presets::{preset, preset_names};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file {path} not found or unreadable: {source}")]
    MissingFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config file {path} is not valid JSON: {message}")]
    Syntax { path: PathBuf, message: String },
    #[error("unknown config key '{key}'")]
    UnknownKey { key: String },
    #[error("unknown preset '{name}' (available: {available})")]
    UnknownPreset { name: String, available: String },
    #[error("invalid value for '{key}': {message}")]
    InvalidField { key: String, message: String },
}

const PRESET_KEY: &str = "preset";

/// Every key a config file may contain besides `preset`.
pub fn known_keys() -> Vec<String> {
    let reference = preset("fd_mimo_isd200").expect("reference preset");
    match serde_json::to_value(reference) {
        Ok(Value::Object(m)) => m.keys().cloned().collect(),
        _ => unreachable!("ScenarioConfig serializes to an object"),
    }
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::MissingFile {
        path: path.to_path_buf(),
        source,
    })?;
    let config = parse_config_str(&text).map_err(|e| match e {
        ConfigError::Syntax { message, .. } => ConfigError::Syntax {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })?;
    for w in config_warnings(&config) {
        log::warn!("{}: {w}", path.display());
    }
    Ok(config)
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let syntax = |message: String| ConfigError::Syntax {
        path: PathBuf::new(),
        message,
    };
    let value: Value = serde_json::from_str(text).map_err(|e| syntax(e.to_string()))?;
    let Value::Object(mut fields) = value else {
        return Err(syntax("top level must be an object".into()));
    };
    let known = known_keys();
    for key in fields.keys() {
        if key != PRESET_KEY && !known.contains(key) {
            return Err(ConfigError::UnknownKey { key: key.clone() });
        }
    }
    let mut merged = Map::new();
    if let Some(p) = fields.remove(PRESET_KEY) {
        let name = p.as_str().ok_or_else(|| ConfigError::InvalidField {
            key: PRESET_KEY.into(),
            message: "must be a string".into(),
        })?;
        let base = preset(name).ok_or_else(|| ConfigError::UnknownPreset {
            name: name.into(),
            available: preset_names().join(", "),
        })?;
        if let Ok(Value::Object(m)) = serde_json::to_value(base) {
            merged = m;
        }
    }
    merged.extend(fields);

    let config: ScenarioConfig =
        serde_path_to_error::deserialize(Value::Object(merged)).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().to_string();
            let key = if path == "." {
                missing_field(&inner).unwrap_or_else(|| "(root)".into())
            } else {
                path
            };
            ConfigError::InvalidField {
                key,
                message: inner,
            }
        })?;
    config.validate().map_err(|e| match e {
        SimError::Config(msg) => {
            let (key, message) = msg.split_once(": ").unwrap_or(("(root)", &msg));
            ConfigError::InvalidField {
                key: key.into(),
                message: message.into(),
            }
        }
        other => ConfigError::InvalidField {
            key: "(root)".into(),
            message: other.to_string(),
        },
    })?;
    Ok(config)
}

fn missing_field(msg: &str) -> Option<String> {
    let rest = msg.strip_prefix("missing field `")?;
    Some(rest.split('`').next()?.to_string())
}

/// Non-fatal remarks about a configuration.
pub fn config_warnings(config: &ScenarioConfig) -> Vec<String> {
    let mut w = Vec::new();
    if !STUDY_UE_LOADS.contains(&config.ues_per_area) {
        w.push(format!(
            "ues_per_area = {} is outside the studied loads {:?}",
            config.ues_per_area, STUDY_UE_LOADS
        ));
    }
    w
}

/// Pretty JSON of a resolved configuration; parses back to an equal value.
pub fn config_json(config: &ScenarioConfig) -> String {
    let mut s = serde_json::to_string_pretty(config).expect("config serializes");
    s.push('\n');
    s
}
