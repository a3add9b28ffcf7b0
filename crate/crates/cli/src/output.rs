use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::canonical::{format_float, to_canonical_string};
use crate::commands::Outcome;
use crate::config::{ExperimentConfig, Format};
use crate::error::{CliError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the canonical resolved configuration.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    Ok(sha256_hex(to_canonical_string(&cfg.resolved()?).as_bytes()))
}

pub fn envelope(cfg: &ExperimentConfig, outcome: &Outcome) -> Result<Value> {
    Ok(json!({
        "command": cfg.command.name(),
        "seed": cfg.seed,
        "tool_version": TOOL_VERSION,
        "config_hash": config_hash(cfg)?,
        "result": outcome.result,
    }))
}

pub fn render(report: &Value, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(to_canonical_string(report)),
        Format::Csv => to_csv(&report["result"]),
    }
}

/// `report.json` → `report.manifest.json`.
pub fn manifest_path(report: &Path) -> PathBuf {
    let stem = report.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    report.with_file_name(format!("{stem}.manifest.json"))
}

/// Warnings and flags found anywhere in the result, deduplicated in order.
pub fn collect_warnings(v: &Value) -> Vec<String> {
    fn walk(v: &Value, out: &mut Vec<String>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    if k == "warnings" || k == "flags" {
                        if let Value::Array(items) = x {
                            out.extend(items.iter().filter_map(|s| s.as_str().map(str::to_string)));
                            continue;
                        }
                    }
                    walk(x, out);
                }
            }
            Value::Array(items) => items.iter().for_each(|x| walk(x, out)),
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(v, &mut out);
    let mut seen = std::collections::HashSet::new();
    out.retain(|w| seen.insert(w.clone()));
    out
}

pub fn manifest(cfg: &ExperimentConfig, outcome: &Outcome, report_path: &Path, report_bytes: &[u8]) -> Result<Value> {
    let mut warnings = collect_warnings(&outcome.result);
    if let Some(f) = &outcome.failure {
        warnings.push(f.to_string());
    }
    let stages: Vec<Value> = outcome.stages.iter().map(|(n, s)| json!({ "stage": n, "seconds": s })).collect();
    Ok(json!({
        "config_sha256": config_hash(cfg)?,
        "tool_version": TOOL_VERSION,
        "command": cfg.command.name(),
        "seed": cfg.seed,
        "report": report_path.file_name().map(|s| s.to_string_lossy().into_owned()),
        "report_sha256": sha256_hex(report_bytes),
        "stages": stages,
        "wall_seconds": outcome.stages.iter().map(|(_, s)| s).sum::<f64>(),
        "warnings": warnings,
    }))
}

/// Writes the report and its manifest, or prints the report when no path is set.
pub fn emit(cfg: &ExperimentConfig, outcome: &Outcome) -> Result<()> {
    let report = envelope(cfg, outcome)?;
    let text = render(&report, cfg.output.format)?;
    match &cfg.output.path {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            std::fs::write(path, &text).map_err(|e| CliError::io(path, e))?;
            let m = manifest(cfg, outcome, path, text.as_bytes())?;
            let mp = manifest_path(path);
            std::fs::write(&mp, to_canonical_string(&m)).map_err(|e| CliError::io(&mp, e))
        }
    }
}

const TABLE_KEYS: &[&str] = &["per_cell", "rows", "points", "cells", "checks", "reports"];

/// Plot-ready projection: the first tabular field of the result, one row per
/// element, nested fields flattened to dotted columns.
pub fn to_csv(result: &Value) -> Result<String> {
    let rows: Vec<BTreeMap<String, String>> = match TABLE_KEYS.iter().find_map(|k| result.get(*k)?.as_array()) {
        Some(items) if !items.is_empty() => items.iter().map(flatten_row).collect(),
        _ => vec![flatten_row(&scalars_only(result))],
    };
    let mut header: Vec<String> = rows.iter().flat_map(|r| r.keys().cloned()).collect();
    header.sort();
    header.dedup();
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Config(format!("csv: {e}"));
    w.write_record(&header).map_err(err)?;
    for r in &rows {
        w.write_record(header.iter().map(|h| r.get(h).map(String::as_str).unwrap_or(""))).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

fn scalars_only(v: &Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(
            m.iter().filter(|(_, x)| !x.is_array()).map(|(k, x)| (k.clone(), scalars_only(x))).collect::<Map<_, _>>(),
        ),
        other => other.clone(),
    }
}

fn flatten_row(v: &Value) -> BTreeMap<String, String> {
    fn go(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    go(&key, x, out);
                }
            }
            Value::Array(items) if items.iter().all(|x| !x.is_object() && !x.is_array()) => {
                let parts: Vec<String> = items.iter().map(cell).collect();
                out.insert(prefix.to_string(), parts.join(";"));
            }
            Value::Array(_) => {
                out.insert(prefix.to_string(), to_canonical_string(v).trim_end().replace('\n', " "));
            }
            _ => {
                out.insert(if prefix.is_empty() { "value".into() } else { prefix.to_string() }, cell(v));
            }
        }
    }
    let mut out = BTreeMap::new();
    go("", v, &mut out);
    out
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => format_float(n.as_f64().unwrap_or(f64::NAN)),
        other => other.to_string(),
    }
}
