//! JSON config files merged under command-line flags.

use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

pub fn load(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", path.display())))?;
    if v.is_object() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!(
            "config {} must hold a JSON object",
            path.display()
        )))
    }
}

/// The part of a config that applies to `command`: the object under that
/// key when present, otherwise the whole file.
fn section(config: &Value, command: &str) -> Map<String, Value> {
    let obj = config.as_object().cloned().unwrap_or_default();
    let alt = command.replace('-', "_");
    for key in [command, alt.as_str()] {
        if let Some(Value::Object(s)) = obj.get(key) {
            return s.clone();
        }
    }
    obj
}

/// Overlay non-null flag values on the config section and decode the result.
/// Keys that the command does not know are rejected.
pub fn resolve<T>(flags: &T, config: Option<&Value>, command: &str) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned + Default,
{
    let known: BTreeSet<String> = match serde_json::to_value(T::default()) {
        Ok(Value::Object(m)) => m.into_iter().map(|(k, _)| k).collect(),
        _ => BTreeSet::new(),
    };
    let mut merged = config.map(|c| section(c, command)).unwrap_or_default();
    if let Some(bad) = merged.keys().find(|k| !known.contains(*k)) {
        return Err(CliError::Usage(format!(
            "unknown key '{bad}' in config for '{command}'"
        )));
    }
    let flags = serde_json::to_value(flags).map_err(|e| CliError::Internal(e.to_string()))?;
    if let Value::Object(f) = flags {
        for (k, v) in f {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::Usage(format!("invalid config for '{command}': {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;
    use serde_json::json;

    #[derive(Debug, Default, PartialEq, Serialize, Deserialize)]
    struct A {
        x: Option<f64>,
        y: Option<u32>,
    }

    #[test]
    fn flags_override_config() {
        let cfg = json!({"x": 1.0, "y": 2});
        let r = resolve(&A { x: Some(5.0), y: None }, Some(&cfg), "a").unwrap();
        assert_eq!(
            r,
            A {
                x: Some(5.0),
                y: Some(2)
            }
        );
    }

    #[test]
    fn sections_and_unknown_keys() {
        let cfg = json!({"error_curve": {"y": 3}, "other": {}});
        assert_eq!(resolve(&A::default(), Some(&cfg), "error-curve").unwrap().y, Some(3));
        let bad = json!({"z": 1});
        assert!(matches!(
            resolve(&A::default(), Some(&bad), "a"),
            Err(CliError::Usage(_))
        ));
        let typed = json!({"y": "three"});
        assert!(matches!(
            resolve(&A::default(), Some(&typed), "a"),
            Err(CliError::Usage(_))
        ));
    }
}
