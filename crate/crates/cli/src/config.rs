//! Resolution of parameters from a JSON config file and explicit flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::args::Format;
use crate::error::{CliError, CliResult};

pub const SCHEMA: &str = "flowgrowth/1";

/// The fully resolved invocation, embedded in every JSON report. The output
/// path is deliberately absent so that reports written to different files
/// stay byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub parameters: Value,
    pub format: Format,
}

/// Parameters and format found in a config file.
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    pub parameters: Map<String, Value>,
    pub format: Option<Format>,
}

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::validation("config", format!("{}: {e}", path.display())))
}

/// Accepts a bare parameter object, a run config, or a report embedding one.
pub fn load(path: &Path, command: &str) -> CliResult<FileConfig> {
    let value = read_json(path)?;
    let run = match value {
        Value::Object(mut obj) if obj.contains_key("schema") => match obj.remove("run_config") {
            Some(rc) => rc,
            None => return Err(CliError::validation("config", "report has no run_config")),
        },
        other => other,
    };
    let Value::Object(mut obj) = run else {
        return Err(CliError::validation("config", "must be a JSON object"));
    };
    if !obj.contains_key("parameters") {
        return Ok(FileConfig {
            parameters: obj,
            format: None,
        });
    }
    if let Some(c) = obj.get("command") {
        if c.as_str() != Some(command) {
            return Err(CliError::validation(
                "config",
                format!("written for command {c}, not {command:?}"),
            ));
        }
    }
    let format = match obj.remove("format") {
        Some(f) => Some(
            serde_json::from_value(f).map_err(|e| CliError::validation("format", e.to_string()))?,
        ),
        None => None,
    };
    match obj.remove("parameters") {
        Some(Value::Object(parameters)) => Ok(FileConfig { parameters, format }),
        _ => Err(CliError::validation(
            "config",
            "parameters must be a JSON object",
        )),
    }
}

fn object<T: Serialize>(v: &T) -> Map<String, Value> {
    match serde_json::to_value(v) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    }
}

/// Overlays explicit flags on file parameters and rejects unknown keys.
pub fn merge<T>(flags: &T, file: &Map<String, Value>) -> CliResult<T>
where
    T: Serialize + DeserializeOwned + Default,
{
    let known = object(&T::default());
    if let Some(k) = file.keys().find(|k| !known.contains_key(*k)) {
        return Err(CliError::validation(
            k.clone(),
            "unknown parameter in config",
        ));
    }
    let mut merged: Map<String, Value> = file
        .iter()
        .filter(|(_, v)| !v.is_null())
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    for (k, v) in object(flags) {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    match serde_json::from_value(Value::Object(merged.clone())) {
        Ok(t) => Ok(t),
        Err(e) => {
            // name the offending field
            for (k, v) in &merged {
                let mut single = Map::new();
                single.insert(k.clone(), v.clone());
                if let Err(e) = serde_json::from_value::<T>(Value::Object(single)) {
                    return Err(CliError::validation(k.clone(), e.to_string()));
                }
            }
            Err(CliError::validation("config", e.to_string()))
        }
    }
}

/// The resolved parameter object with unset (null) entries dropped.
pub fn resolved_parameters<T: Serialize>(params: &T) -> Value {
    Value::Object(
        object(params)
            .into_iter()
            .filter(|(_, v)| !v.is_null())
            .collect(),
    )
}

pub fn required<T: Clone>(v: &Option<T>, field: &str) -> CliResult<T> {
    v.clone()
        .ok_or_else(|| CliError::validation(field, "required"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::RateArgs;

    #[test]
    fn flags_override_file_values() {
        let mut file = Map::new();
        file.insert("c".into(), Value::from(5.0));
        file.insert("k".into(), Value::from(2.0));
        let flags = RateArgs {
            c: Some(1.0),
            ..Default::default()
        };
        let merged: RateArgs = merge(&flags, &file).unwrap();
        assert_eq!(merged.c, Some(1.0));
        assert_eq!(merged.k, Some(2.0));
        assert_eq!(merged.d, None);
    }

    #[test]
    fn unknown_and_malformed_fields_are_named() {
        let mut file = Map::new();
        file.insert("gamma".into(), Value::from(1.0));
        match merge::<RateArgs>(&RateArgs::default(), &file) {
            Err(CliError::Validation { field, .. }) => assert_eq!(field, "gamma"),
            other => panic!("{other:?}"),
        }
        let mut file = Map::new();
        file.insert("khat".into(), Value::from("zero"));
        match merge::<RateArgs>(&RateArgs::default(), &file) {
            Err(CliError::Validation { field, .. }) => assert_eq!(field, "khat"),
            other => panic!("{other:?}"),
        }
    }
}
