//! JSON scenario files.
//!
//! A file only lists what differs from the defaults; it is merged over the
//! default [`ScenarioConfig`] before deserialization, so `{}` is a complete
//! scenario. Each power may be given as `<name>_dbm` or `<name>_mw`, never both.
//! Unknown keys are rejected with their path.

use std::path::Path;

use serde_json::{Map, Value};

use crate::montecarlo::ScenarioConfig;
use crate::{Error, Result};

/// Power fields that accept both unit forms.
pub const POWER_FIELDS: [&str; 5] = ["p_max", "q_p", "sigma_s_sq", "sigma_e_sq", "i_th"];

pub fn parse_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    parse_config_with_overrides(path, &[])
}

pub fn parse_config_with_overrides(path: impl AsRef<Path>, overrides: &[String]) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    parse_config_str_with_overrides(&text, overrides)
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    parse_config_str_with_overrides(text, &[])
}

pub fn parse_config_str_with_overrides(text: &str, overrides: &[String]) -> Result<ScenarioConfig> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| Error::config("<root>", format!("malformed JSON: {e}")))?;
    for assignment in overrides {
        apply_override(&mut value, assignment)?;
    }
    from_value(value)
}

/// Builds a validated config from a (possibly partial) JSON document.
pub fn from_value(mut value: Value) -> Result<ScenarioConfig> {
    let Value::Object(root) = &mut value else {
        return Err(Error::config("<root>", "expected a JSON object"));
    };
    if let Some(powers) = root.get_mut("powers") {
        let Value::Object(powers) = powers else {
            return Err(Error::config("powers", "expected an object"));
        };
        resolve_power_units(powers)?;
    }
    let mut merged = serde_json::to_value(ScenarioConfig::default())?;
    merge(&mut merged, value);
    let config: ScenarioConfig = serde_path_to_error::deserialize(merged).map_err(|e| {
        let path = e.path().to_string();
        Error::config(path, e.into_inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

fn resolve_power_units(powers: &mut Map<String, Value>) -> Result<()> {
    for name in POWER_FIELDS {
        let dbm_key = format!("{name}_dbm");
        let mw_key = format!("{name}_mw");
        match (powers.remove(&dbm_key), powers.contains_key(&mw_key)) {
            (Some(_), true) => {
                return Err(Error::config(
                    format!("powers.{name}"),
                    format!("both `{dbm_key}` and `{mw_key}` given; use one form"),
                ))
            }
            (Some(dbm), false) => {
                let x = dbm
                    .as_f64()
                    .ok_or_else(|| Error::config(format!("powers.{dbm_key}"), "expected a number"))?;
                let mw = serde_json::Number::from_f64(crate::dbm_to_mw(x))
                    .ok_or_else(|| Error::config(format!("powers.{dbm_key}"), "value out of range"))?;
                powers.insert(mw_key, Value::Number(mw));
            }
            (None, _) => {}
        }
    }
    Ok(())
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(base), Value::Object(patch)) => {
            for (key, value) in patch {
                match base.get_mut(&key) {
                    Some(slot) => merge(slot, value),
                    None => {
                        base.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

/// Applies a dotted `key=value` assignment. The value is read as JSON when it
/// parses and as a plain string otherwise. Setting one unit form of a power
/// drops the other.
pub fn apply_override(value: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::config(key, "empty path segment in override"));
    }
    let parsed = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.to_string()));

    let segments: Vec<&str> = key.split('.').collect();
    let (last, parents) = segments.split_last().expect("at least one segment");
    let mut node = value;
    for (depth, segment) in parents.iter().enumerate() {
        let Value::Object(map) = node else {
            return Err(Error::config(segments[..depth].join("."), "cannot descend into a non-object"));
        };
        node = map.entry(segment.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let Value::Object(map) = node else {
        return Err(Error::config(parents.join("."), "cannot descend into a non-object"));
    };
    for (this, other) in [("_dbm", "_mw"), ("_mw", "_dbm")] {
        if let Some(stem) = last.strip_suffix(this) {
            map.remove(&format!("{stem}{other}"));
        }
    }
    map.insert(last.to_string(), parsed);
    Ok(())
}

/// Canonical JSON form (linear units); parses back to the same config.
pub fn to_json(config: &ScenarioConfig) -> Result<String> {
    Ok(serde_json::to_string_pretty(config)?)
}
