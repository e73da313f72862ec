//! Instance file formats: bare CSV (one row per vector, `m+1` columns)
//! and a JSON wrapper `{m, n, rows}`. Rows are re-normalized on load
//! when within 1e-6 of unit norm and rejected otherwise.

use serde::{Deserialize, Serialize};

use super::Instance;
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    m: usize,
    n: usize,
    rows: Vec<Vec<f64>>,
}

pub fn instance_to_csv(inst: &Instance) -> String {
    let mut out = String::new();
    for row in inst.rows() {
        let line: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn instance_from_csv(text: &str) -> Result<Instance> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| {
                    Error::Parse(format!("row {}: bad number {tok:?}", lineno + 1))
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no rows in CSV instance".into()));
    }
    let cols = rows[0].len();
    if cols < 2 {
        return Err(Error::Parse(format!(
            "rows need at least 2 columns, got {cols}"
        )));
    }
    Instance::from_raw_rows(cols - 1, rows)
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceJson {
        m: inst.m(),
        n: inst.n(),
        rows: inst.rows().to_vec(),
    })
    .expect("instance serialization cannot fail")
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let raw: InstanceJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad JSON instance: {e}")))?;
    if raw.rows.len() != raw.n {
        return Err(Error::Parse(format!(
            "JSON instance claims n = {} but has {} rows",
            raw.n,
            raw.rows.len()
        )));
    }
    Instance::from_raw_rows(raw.m, raw.rows)
}
