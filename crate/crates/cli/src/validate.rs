//! Checks emitted files against their schemas.

use crate::config::ExperimentConfig;
use crate::CliError;
use serde_json::Value;
use std::path::{Path, PathBuf};
use vqsd::ansatz::ParamAnsatz;
use vqsd::io::{density_from_json, validate_any_csv};

/// What a file was recognized as.
#[derive(Debug, Clone, PartialEq)]
pub struct Checked {
    pub path: PathBuf,
    pub kind: String,
}

/// Validates one CSV body against the schema matching its header. Returns
/// the schema name and row count.
pub fn check_csv(text: &str) -> Result<(String, usize), String> {
    validate_any_csv(text).map(|(s, rows)| (s.name.to_string(), rows)).map_err(|e| e.to_string())
}

/// Recognizes a JSON body as a manifest, config, density matrix, layered or
/// free ansatz, or local-ansatz parameters.
pub fn check_json(text: &str) -> Result<String, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("not JSON: {e}"))?;
    if let Some(obj) = value.as_object() {
        if obj.contains_key("tool") && obj.contains_key("config") {
            for key in ["version", "experiment", "seeds", "results", "files"] {
                if !obj.contains_key(key) {
                    return Err(format!("manifest lacks {key:?}"));
                }
            }
            ExperimentConfig::from_json(&obj["config"].to_string()).map_err(|e| format!("manifest config: {e}"))?;
            return Ok("manifest".into());
        }
        if obj.contains_key("local_kind") {
            let kind = serde_json::from_value::<vqsd::ansatz::LocalKind>(obj["local_kind"].clone())
                .map_err(|e| format!("local params: {e}"))?;
            let params = obj.get("params").and_then(Value::as_array).ok_or("local params lack \"params\"")?;
            if params.is_empty() || params.len() % kind.params_per_qubit() != 0 || params.iter().any(|p| !p.is_f64()) {
                return Err("local params have the wrong length or type".into());
            }
            return Ok("local_params".into());
        }
        if obj.contains_key("gates") {
            ParamAnsatz::from_json(text).map_err(|e| format!("ansatz: {e}"))?;
            return Ok("ansatz".into());
        }
        if obj.contains_key("data") {
            density_from_json(text).map_err(|e| format!("density matrix: {e}"))?;
            return Ok("density".into());
        }
    }
    ExperimentConfig::from_json(text).map_err(|e| e.to_string())?.validate().map_err(|e| e.to_string())?;
    Ok("config".into())
}

fn check_file(path: &Path) -> Result<Checked, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let kind = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => check_csv(&text).map(|(name, rows)| format!("{name} ({rows} rows)"))?,
        Some("json") => check_json(&text)?,
        _ => return Err("unknown extension".into()),
    };
    Ok(Checked { path: path.to_path_buf(), kind })
}

fn collect(path: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(path)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
        entries.sort();
        for e in entries {
            collect(&e, out)?;
        }
    } else if matches!(path.extension().and_then(|e| e.to_str()), Some("csv" | "json")) {
        out.push(path.to_path_buf());
    }
    Ok(())
}

/// Validates every `.csv` and `.json` file under the given paths. Fails with
/// a config error listing every bad file.
pub fn validate_paths(paths: &[PathBuf]) -> Result<Vec<Checked>, CliError> {
    let mut files = Vec::new();
    for p in paths {
        if !p.exists() {
            return Err(CliError::Config(format!("{} does not exist", p.display())));
        }
        if p.is_file() {
            files.push(p.clone());
        } else {
            collect(p, &mut files).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?;
        }
    }
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for f in files {
        match check_file(&f) {
            Ok(c) => ok.push(c),
            Err(e) => bad.push(format!("{}: {e}", f.display())),
        }
    }
    if bad.is_empty() {
        Ok(ok)
    } else {
        Err(CliError::Config(bad.join("\n")))
    }
}
