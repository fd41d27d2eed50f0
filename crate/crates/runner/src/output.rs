//! JSON and CSV renderings of a result record.

use std::path::Path;

use serde_json::Value;

use crate::config::OutputPaths;
use crate::error::{RunError, RunResult};
use crate::run::ResultRecord;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format `{other}`, expected json or csv")),
        }
    }
}

pub fn to_json(record: &ResultRecord) -> String {
    serde_json::to_string_pretty(record).expect("record serializes")
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        leaf => out.push((prefix.to_string(), scalar(leaf))),
    }
}

/// Tabular outputs (an `outputs.rows` array of objects) become one CSV row
/// each; anything else is flattened to `key,value` pairs.
pub fn to_csv(record: &ResultRecord) -> RunResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| RunError::Io("csv".into(), e.to_string());
    let rows = record.outputs.get("rows").and_then(Value::as_array).filter(|r| r.iter().all(Value::is_object) && !r.is_empty());
    match rows {
        Some(rows) => {
            let header: Vec<String> = rows[0].as_object().expect("checked").keys().cloned().collect();
            w.write_record(&header).map_err(io)?;
            for row in rows {
                w.write_record(header.iter().map(|k| scalar(&row[k]))).map_err(io)?;
            }
        }
        None => {
            let mut pairs = Vec::new();
            flatten("", &record.outputs, &mut pairs);
            w.write_record(["key", "value"]).map_err(io)?;
            for (k, v) in pairs {
                w.write_record([k, v]).map_err(io)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| RunError::Io("csv".into(), e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn render(record: &ResultRecord, format: Format) -> RunResult<String> {
    match format {
        Format::Json => Ok(to_json(record)),
        Format::Csv => to_csv(record),
    }
}

fn write(path: &Path, text: &str) -> RunResult<()> {
    std::fs::write(path, text).map_err(|e| RunError::Io(path.display().to_string(), e.to_string()))
}

/// Writes the record to every path named in the config.
pub fn write_outputs(record: &ResultRecord, paths: &OutputPaths) -> RunResult<()> {
    if let Some(p) = &paths.json {
        write(p, &to_json(record))?;
    }
    if let Some(p) = &paths.csv {
        write(p, &to_csv(record)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn record(outputs: Value) -> ResultRecord {
        ResultRecord {
            config_hash: "0".into(),
            experiment: "x".into(),
            outputs,
            invariants: vec![],
            passed: true,
            runtime_seconds: 0.0,
            timings: Default::default(),
        }
    }

    #[test]
    fn rows_become_a_table() {
        let r = record(json!({ "rows": [{ "depth": 6, "k": 8, "ratio": 0.5 }, { "depth": 7, "k": 8, "ratio": 0.25 }] }));
        assert_eq!(to_csv(&r).unwrap(), "depth,k,ratio\n6,8,0.5\n7,8,0.25\n");
    }

    #[test]
    fn nested_values_are_flattened() {
        let r = record(json!({ "ap": 1.0, "worst": { "level": 0 }, "v": [1, 2], "s": "a,b" }));
        assert_eq!(to_csv(&r).unwrap(), "key,value\nap,1.0\ns,\"a,b\"\nv.0,1\nv.1,2\nworst.level,0\n");
    }
}
