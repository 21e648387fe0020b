//! CSV and JSON emission. Identical inputs give byte-identical output.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Mode, ScenarioConfig};
use crate::scenario::{Row, RunResult, StateRecord};

/// Scientific notation with 12 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

fn columns(result: &RunResult) -> Vec<String> {
    let mut cols: Vec<String> = result.axes.iter().map(|a| a.name().to_owned()).collect();
    if result.mode == Mode::Evolve {
        cols.push("time".into());
    }
    cols.extend(["discord", "classical_correlation", "mutual_information", "concurrence"].map(String::from));
    match result.mode {
        Mode::Evolve => cols.extend(["trace_drift", "min_eigenvalue"].map(String::from)),
        Mode::Steady | Mode::Sweep => cols.extend(["residual", "spectral_gap"].map(String::from)),
    }
    cols.push("error".into());
    cols
}

fn cells(mode: Mode, row: &Row) -> Vec<Option<f64>> {
    let mut out: Vec<Option<f64>> = row.point.iter().map(|&(_, v)| Some(v)).collect();
    if mode == Mode::Evolve {
        out.push(row.time);
    }
    let m = row.measures;
    out.extend([
        m.map(|m| m.discord),
        m.map(|m| m.classical_correlation),
        m.map(|m| m.mutual_information),
        m.map(|m| m.concurrence),
    ]);
    match mode {
        Mode::Evolve => out.extend([row.trace_drift, row.min_eigenvalue]),
        Mode::Steady | Mode::Sweep => out.extend([row.residual, row.spectral_gap]),
    }
    out
}

/// Header comment block holding the resolved configuration, then one row per
/// result with empty cells where a row has no value.
pub fn write_csv(cfg: &ScenarioConfig, result: &RunResult, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "# cavity-discord {}", env!("CARGO_PKG_VERSION"))?;
    if let Some(p) = cfg.preset {
        writeln!(w, "# plotted quantity: {}", p.quantity())?;
    }
    for line in cfg.to_toml().lines() {
        if line.is_empty() {
            writeln!(w, "#")?;
        } else {
            writeln!(w, "# {line}")?;
        }
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(columns(result))?;
    for row in &result.rows {
        let mut record: Vec<String> = cells(result.mode, row)
            .into_iter()
            .map(|c| c.map(fmt_float).unwrap_or_default())
            .collect();
        record.push(row.error.clone().unwrap_or_default());
        csv.write_record(&record)?;
    }
    csv.flush()
}

/// `{"config": …, "rows": [{column: value, …}]}` with `null` for missing values.
pub fn to_json(cfg: &ScenarioConfig, result: &RunResult) -> Value {
    let cols = columns(result);
    let rows: Vec<Value> = result
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (name, cell) in cols.iter().zip(cells(result.mode, row)) {
                obj.insert(name.clone(), cell.map_or(Value::Null, Value::from));
            }
            obj.insert("error".into(), row.error.clone().map_or(Value::Null, Value::from));
            Value::Object(obj)
        })
        .collect();
    json!({ "config": cfg, "rows": rows })
}

pub fn write_json(cfg: &ScenarioConfig, result: &RunResult, mut w: impl Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, &to_json(cfg, result))?;
    writeln!(w)
}

#[derive(Serialize)]
struct DumpEntry<'a> {
    point: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<f64>,
    state: &'a cavity_discord::DensityMatrix,
}

/// States as `{point, time?, state: {dims, entries}}` with row-major
/// `[re, im]` entries.
pub fn write_states(states: &[StateRecord], mut w: impl Write) -> io::Result<()> {
    let entries: Vec<DumpEntry> = states
        .iter()
        .map(|s| DumpEntry {
            point: s.point.iter().map(|&(v, x)| (v.name().to_owned(), Value::from(x))).collect(),
            time: s.time,
            state: &s.state,
        })
        .collect();
    serde_json::to_writer(&mut w, &entries)?;
    writeln!(w)
}
