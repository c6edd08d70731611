//! Curve files: wide CSV, long CSV and JSON.

use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use fresco::Curve;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Auto,
}

/// A named series after normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub id: String,
    pub curve: Curve,
}

#[derive(Deserialize)]
struct JsonSeries {
    id: String,
    values: Vec<f64>,
}

fn parse_err(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

pub fn read_path(path: &Path, format: Format) -> Result<Vec<Series>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let format = match format {
        Format::Auto if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) => Format::Json,
        Format::Auto if text.trim_start().starts_with('[') => Format::Json,
        Format::Auto => Format::Csv,
        f => f,
    };
    let raw = match format {
        Format::Json => parse_json(&text)?,
        _ => parse_csv(&text)?,
    };
    finish(raw)
}

fn finish(raw: Vec<(String, Vec<f64>)>) -> Result<Vec<Series>, CliError> {
    if raw.is_empty() {
        return Err(parse_err("input contains no series"));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(raw.len());
    for (id, values) in raw {
        if !seen.insert(id.clone()) {
            return Err(parse_err(format!("duplicate series id '{id}'")));
        }
        let curve = Curve::new(&values).map_err(|e| parse_err(format!("series '{id}': {e}")))?;
        out.push(Series { id, curve });
    }
    Ok(out)
}

pub fn parse_json(text: &str) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let rows: Vec<JsonSeries> = serde_json::from_str(text).map_err(|e| parse_err(format!("json: {e}")))?;
    Ok(rows.into_iter().map(|r| (r.id, r.values)).collect())
}

fn number(field: &str, line: u64) -> Result<f64, CliError> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_err(format!("row {line}: cannot parse '{}' as a number", field.trim())))
}

/// Wide rows `id,v1,v2,…`, or long rows `id,t,value` under such a header.
pub fn parse_csv(text: &str) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for r in reader.records() {
        let r = r.map_err(|e| parse_err(format!("csv: {e}")))?;
        let line = r.position().map_or(0, |p| p.line());
        if r.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        records.push((line, r));
    }
    let Some((_, first)) = records.first() else {
        return Ok(Vec::new());
    };
    let header = first.len() >= 2 && first[1].trim().parse::<f64>().is_err();
    if header {
        let names: Vec<String> = first.iter().map(|f| f.trim().to_ascii_lowercase()).collect();
        let long = names.len() == 3
            && names[0] == "id"
            && matches!(names[1].as_str(), "t" | "time" | "timestamp")
            && names[2] == "value";
        if long {
            return parse_long(&records[1..]);
        }
        records.remove(0);
    }

    let mut out = Vec::with_capacity(records.len());
    for (line, r) in &records {
        let id = r[0].trim().to_string();
        let mut fields: Vec<&str> = r.iter().skip(1).collect();
        while fields.last().is_some_and(|f| f.trim().is_empty()) {
            fields.pop();
        }
        let values = fields.iter().map(|f| number(f, *line)).collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err(parse_err(format!("row {line}: series '{id}' has no values")));
        }
        out.push((id, values));
    }
    Ok(out)
}

fn parse_long(records: &[(u64, csv::StringRecord)]) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<(String, f64)>> = HashMap::new();
    for (line, r) in records {
        if r.len() != 3 {
            return Err(parse_err(format!("row {line}: expected 3 fields id,t,value, found {}", r.len())));
        }
        let id = r[0].trim().to_string();
        let value = number(&r[2], *line)?;
        if !groups.contains_key(&id) {
            order.push(id.clone());
        }
        groups.entry(id).or_default().push((r[1].trim().to_string(), value));
    }
    Ok(order
        .into_iter()
        .map(|id| {
            let mut rows = groups.remove(&id).unwrap();
            // numeric stamps compare as numbers, anything else as text
            let numeric = rows.iter().all(|(t, _)| t.parse::<f64>().is_ok());
            rows.sort_by(|a, b| {
                if numeric {
                    a.0.parse::<f64>().unwrap().total_cmp(&b.0.parse::<f64>().unwrap())
                } else {
                    a.0.cmp(&b.0)
                }
            });
            (id, rows.into_iter().map(|r| r.1).collect())
        })
        .collect())
}

/// Writes series as wide CSV, one `id,v1,v2,…` line each.
pub fn write_csv<W: Write>(out: W, series: &[Series]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    for s in series {
        let mut row = vec![s.id.clone()];
        row.extend(s.curve.values().iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}
