//! Experiment configuration: loading, defaulting and validation.

use crate::error::{CliError, FieldIssue, Result};
use mpctrack_core::eval::OspaConfig;
use mpctrack_core::synth::{paper_scenario, Scenario, ScenarioVariant};
use mpctrack_core::{ArrayGeometry, HyperParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::{Path, PathBuf};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    FullySynthetic,
    RadioPipeline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub mode: Mode,
    /// Builtin scenario name or path to a scenario file.
    pub scenario: String,
    pub hyper: HyperParams,
    pub geom: ArrayGeometry,
    pub runs: usize,
    pub base_seed: u64,
    pub out_dir: PathBuf,
    pub ospa: OspaConfig,
    /// Concurrent runs; 0 uses all cores.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            mode: Mode::FullySynthetic,
            scenario: "desk".into(),
            hyper: HyperParams::default(),
            geom: ArrayGeometry::default(),
            runs: 1,
            base_seed: 0,
            out_dir: PathBuf::from("out"),
            ospa: OspaConfig::default(),
            workers: 0,
        }
    }
}

/// Configuration after defaulting, with its scenario loaded.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub scenario: Scenario,
    /// Fields filled from defaults, with the value used.
    pub defaulted: Vec<FieldIssue>,
}

/// Outcome of `validate`.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub errors: Vec<FieldIssue>,
    pub defaulted: Vec<FieldIssue>,
}

fn missing_fields(defaults: &Value, user: &Value, prefix: &str, out: &mut Vec<FieldIssue>) {
    let Value::Object(d) = defaults else { return };
    let u = user.as_object();
    for (key, dv) in d {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match u.and_then(|m| m.get(key)) {
            None => out.push(FieldIssue {
                field: path,
                message: if dv.is_object() {
                    "defaulted to built-in values".into()
                } else {
                    format!("defaulted to {dv}")
                },
            }),
            Some(uv) => missing_fields(dv, uv, &path, out),
        }
    }
}

/// Resolve a scenario reference relative to `base` when it is a path.
pub fn resolve_scenario(name: &str, base: Option<&Path>) -> Result<Scenario> {
    if let Some(v) = ScenarioVariant::from_name(name) {
        return Ok(paper_scenario(v));
    }
    let mut path = PathBuf::from(name);
    if path.is_relative() {
        if let Some(b) = base {
            path = b.join(path);
        }
    }
    if !path.exists() {
        return Err(CliError::Invalid(vec![FieldIssue {
            field: "scenario".into(),
            message: format!("not a builtin scenario and no file at {}", path.display()),
        }]));
    }
    Ok(Scenario::load(&path)?)
}

/// Parse config text; `base` resolves relative scenario paths.
pub fn parse_config(text: &str, base: Option<&Path>) -> Result<LoadedConfig> {
    let user: Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
        field: "<root>".into(),
        message: e.to_string(),
    })?;
    if !user.is_object() {
        return Err(CliError::Parse {
            field: "<root>".into(),
            message: "expected a JSON object".into(),
        });
    }
    let mut config: ExperimentConfig =
        serde_path_to_error::deserialize(user.clone()).map_err(|e| CliError::Parse {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;

    let defaults = serde_json::to_value(ExperimentConfig::default())
        .map_err(|e| CliError::Output(e.to_string()))?;
    let mut defaulted = Vec::new();
    missing_fields(&defaults, &user, "", &mut defaulted);

    let mut errors = check(&config);
    let scenario = match resolve_scenario(&config.scenario, base) {
        Ok(s) => Some(s),
        Err(CliError::Invalid(v)) => {
            errors.extend(v);
            None
        }
        Err(e) => {
            errors.push(FieldIssue {
                field: "scenario".into(),
                message: e.to_string(),
            });
            None
        }
    };
    if !errors.is_empty() {
        return Err(CliError::Invalid(errors));
    }
    let scenario = scenario.expect("no errors implies a scenario");
    // the detection threshold follows the scenario unless given explicitly
    let u_de_given = user
        .get("hyper")
        .and_then(|h| h.get("u_de"))
        .is_some();
    if !u_de_given {
        config.hyper.u_de = scenario.u_de;
        if let Some(d) = defaulted.iter_mut().find(|d| d.field == "hyper.u_de") {
            d.message = format!("taken from scenario: {}", scenario.u_de);
        }
    }
    Ok(LoadedConfig {
        config,
        scenario,
        defaulted,
    })
}

/// Range and consistency checks.
pub fn check(config: &ExperimentConfig) -> Vec<FieldIssue> {
    let mut errors: Vec<FieldIssue> = config
        .hyper
        .validate()
        .into_iter()
        .chain(config.geom.validate())
        .chain(config.ospa.validate())
        .map(|(field, message)| FieldIssue { field, message })
        .collect();
    if config.schema_version != CONFIG_SCHEMA_VERSION {
        errors.push(FieldIssue {
            field: "schema_version".into(),
            message: format!("expected {CONFIG_SCHEMA_VERSION}"),
        });
    }
    if config.runs == 0 {
        errors.push(FieldIssue {
            field: "runs".into(),
            message: "must be >= 1".into(),
        });
    }
    errors
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text, path.parent())
}

/// Validate a config file without running it.
pub fn validate_config(path: &Path) -> ValidationReport {
    match load_config(path) {
        Ok(l) => ValidationReport {
            valid: true,
            errors: vec![],
            defaulted: l.defaulted,
        },
        Err(CliError::Invalid(errors)) => ValidationReport {
            valid: false,
            errors,
            defaulted: vec![],
        },
        Err(CliError::Parse { field, message }) => ValidationReport {
            valid: false,
            errors: vec![FieldIssue { field, message }],
            defaulted: vec![],
        },
        Err(e) => ValidationReport {
            valid: false,
            errors: vec![FieldIssue {
                field: "<file>".into(),
                message: e.to_string(),
            }],
            defaulted: vec![],
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_parse_error() {
        assert!(matches!(parse_config("", None), Err(CliError::Parse { .. })));
    }

    #[test]
    fn range_error_names_field() {
        let err = parse_config(r#"{"hyper": {"p_s": 1.5}}"#, None).unwrap_err();
        let CliError::Invalid(v) = err else { panic!() };
        assert!(v.iter().any(|i| i.field == "hyper.p_s"));
    }

    #[test]
    fn omitted_particle_count_is_reported() {
        let l = parse_config(r#"{"hyper": {"p_s": 0.99}}"#, None).unwrap();
        assert_eq!(l.config.hyper.j, 10_000);
        let note = l.defaulted.iter().find(|d| d.field == "hyper.J").unwrap();
        assert!(note.message.contains("10000"));
        assert!(!l.defaulted.iter().any(|d| d.field == "hyper.p_s"));
    }

    #[test]
    fn unknown_field_is_rejected_with_path() {
        let err = parse_config(r#"{"hyper": {"bogus": 1}}"#, None).unwrap_err();
        let CliError::Parse { field, .. } = err else { panic!() };
        assert_eq!(field, "hyper.bogus");
    }

    #[test]
    fn threshold_follows_scenario() {
        let l = parse_config(r#"{"scenario": "radio_desk"}"#, None).unwrap();
        assert!((l.config.hyper.u_de - l.scenario.u_de).abs() < 1e-15);
        let l = parse_config(r#"{"scenario": "radio_desk", "hyper": {"u_de": 9.0}}"#, None).unwrap();
        assert_eq!(l.config.hyper.u_de, 9.0);
    }
}
