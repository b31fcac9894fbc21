//! `--config` handling: a JSON object supplies values for any flag left
//! unset on the command line.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = config else {
        return Ok(serde_json::from_value(serde_json::to_value(flags)?)?);
    };
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut base: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let Value::Object(base_map) = &mut base else {
        return Err(CliError::usage(format!("{}: expected a JSON object", path.display())));
    };
    if let Value::Object(overrides) = serde_json::to_value(flags)? {
        for (key, value) in overrides {
            if !value.is_null() {
                base_map.insert(key, value);
            }
        }
    }
    serde_json::from_value(base).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::EmbedArgs;

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"d": 5, "alpha": 0.2, "kernel": "lle"}"#).unwrap();
        let flags = EmbedArgs {
            d: Some(3),
            ..Default::default()
        };
        let merged = merge(&flags, Some(&path)).unwrap();
        assert_eq!(merged.d, Some(3));
        assert_eq!(merged.alpha, Some(0.2));
        assert_eq!(merged.kernel, Some(crate::args::KernelArg::Lle));
    }

    #[test]
    fn unknown_keys_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"dd": 5}"#).unwrap();
        let err = merge(&EmbedArgs::default(), Some(&path)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
