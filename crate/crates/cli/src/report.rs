//! The JSON document every command emits, and the TSV roll-up of a
//! directory of them.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub command: String,
    pub config: Value,
    pub results: Value,
    pub seed: u64,
    pub tool_version: String,
    pub wall_time_ms: u64,
}

/// Rounds every float to 12 significant digits so that output does not
/// depend on the last bits of a summation order.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
            // -0.0 and 0.0 print differently; keep one.
            let r = if r == 0.0 { 0.0 } else { r };
            if let Some(num) = serde_json::Number::from_f64(r) {
                *n = num;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn to_json_value<T: Serialize>(x: &T) -> Value {
    let mut v = serde_json::to_value(x).expect("report types serialize");
    round_floats(&mut v);
    v
}

fn scalar_cell(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.replace(['\t', '\n'], " ")),
        _ => None,
    }
}

struct Row {
    file: String,
    q: Option<u64>,
    results: Map<String, Value>,
}

/// One TSV section per command (sorted by name), rows sorted by `q` and
/// then file name. Columns are the scalar result fields in order of first
/// appearance.
pub fn summarize_dir(dir: &Path) -> CliResult<String> {
    let io = |e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    };
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(io)?
        .collect::<Result<Vec<_>, _>>()
        .map_err(io)?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.is_file())
        .collect();
    files.sort();

    let mut sections: BTreeMap<String, Vec<Row>> = BTreeMap::new();
    for path in files {
        let text = fs::read_to_string(&path).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?;
        let rep: ExperimentReport = serde_json::from_str(&text).map_err(|e| CliError::Json {
            path: path.clone(),
            source: e,
        })?;
        let results = match rep.results {
            Value::Object(m) => m,
            other => Map::from_iter([("value".to_string(), other)]),
        };
        let q = results
            .get("q")
            .and_then(Value::as_u64)
            .or_else(|| rep.config.get("q").and_then(Value::as_u64));
        let file = path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default();
        sections
            .entry(rep.command)
            .or_default()
            .push(Row { file, q, results });
    }

    if sections.is_empty() {
        return Ok("command\tfile\tq\n".to_string());
    }
    let mut out = String::new();
    for (i, (command, mut rows)) in sections.into_iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        rows.sort_by(|a, b| (a.q, &a.file).cmp(&(b.q, &b.file)));
        let mut keys: Vec<String> = Vec::new();
        for r in &rows {
            for (k, v) in &r.results {
                if k != "q" && scalar_cell(v).is_some() && !keys.contains(k) {
                    keys.push(k.clone());
                }
            }
        }
        out.push_str("command\tfile\tq");
        for k in &keys {
            out.push('\t');
            out.push_str(k);
        }
        out.push('\n');
        for r in &rows {
            out.push_str(&command);
            out.push('\t');
            out.push_str(&r.file);
            out.push('\t');
            out.push_str(&r.q.map(|q| q.to_string()).unwrap_or_default());
            for k in &keys {
                out.push('\t');
                out.push_str(&r.results.get(k).and_then(scalar_cell).unwrap_or_default());
            }
            out.push('\n');
        }
    }
    Ok(out)
}
