//! Row emission (CSV or JSON lines) and the run-metadata sidecar.

use std::io::Write;

use aqrm_core::{Cell, ScanRow};
use serde_json::{json, Map, Value};

use crate::config::Format;

/// Shortest round-trip text of a cell; empty for null.
pub fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Null => String::new(),
        Cell::Bool(b) => b.to_string(),
        Cell::Int(i) => i.to_string(),
        Cell::Num(v) => format!("{v:?}"),
        Cell::Text(s) => s.clone(),
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Null => Value::Null,
        Cell::Bool(b) => Value::Bool(*b),
        Cell::Int(i) => Value::from(*i),
        Cell::Num(v) => Value::from(*v),
        Cell::Text(s) => Value::String(s.clone()),
    }
}

/// Every row must carry the same columns in the same order.
pub fn header(rows: &[ScanRow]) -> Result<Vec<String>, String> {
    let Some(first) = rows.first() else {
        return Ok(Vec::new());
    };
    let h = first.columns();
    for (i, r) in rows.iter().enumerate() {
        if r.columns() != h {
            return Err(format!("row {i}: columns {:?} differ from header {h:?}", r.columns()));
        }
    }
    Ok(h)
}

pub fn write_rows<W: Write>(rows: &[ScanRow], format: Format, out: W) -> Result<(), String> {
    let h = header(rows)?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&h).map_err(|e| e.to_string())?;
            for r in rows {
                w.write_record(r.cells().iter().map(cell_text)).map_err(|e| e.to_string())?;
            }
            w.flush().map_err(|e| e.to_string())
        }
        Format::Jsonl => {
            let mut out = out;
            for r in rows {
                let obj: Map<String, Value> = h.iter().cloned().zip(r.cells().iter().map(cell_json)).collect();
                writeln!(out, "{}", Value::Object(obj)).map_err(|e| e.to_string())?;
            }
            out.flush().map_err(|e| e.to_string())
        }
    }
}

/// Sidecar content: config echo, versions, per-row convergence and warnings.
pub fn metadata(command: &str, config: &Value, rows: &[ScanRow]) -> Value {
    let convergence: Vec<Value> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| json!({"row": i, "n_used": r.n_used, "converged": r.converged}))
        .collect();
    let warnings: Vec<Value> = rows
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.warnings.iter().map(move |w| json!({"row": i, "message": w})))
        .collect();
    json!({
        "command": command,
        "config": config,
        "versions": {"aqrm-cli": env!("CARGO_PKG_VERSION"), "aqrm-core": aqrm_core::VERSION},
        "rows": rows.len(),
        "unconverged_rows": rows.iter().filter(|r| !r.is_converged()).count(),
        "convergence": convergence,
        "warnings": warnings,
    })
}
