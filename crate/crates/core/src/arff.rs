//! Minimal ARFF reader for MULAN-style multi-label files, used to convert
//! them to the CSV + descriptor format.
//!
//! Numeric attributes are copied as is; nominal attributes become the index
//! of the value in their declaration. Labels are the last `label_count`
//! attributes and must be `0`/`1`. Both dense and sparse (`{index value, …}`)
//! data rows are accepted. Missing values (`?`) are rejected.

use std::fs;
use std::path::Path;

use crate::dataset::{write_descriptor, CsvDescriptor, LabelMode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum AttributeKind {
    Numeric,
    Nominal(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArffData {
    pub relation: String,
    pub attributes: Vec<Attribute>,
    pub rows: Vec<Vec<f64>>,
}

fn unquote(s: &str) -> String {
    let t = s.trim();
    if t.len() >= 2 && ((t.starts_with('\'') && t.ends_with('\'')) || (t.starts_with('"') && t.ends_with('"'))) {
        t[1..t.len() - 1].to_string()
    } else {
        t.to_string()
    }
}

/// Splits `name rest` where `name` may be quoted.
fn split_name(s: &str) -> Option<(String, &str)> {
    let s = s.trim_start();
    let quote = s.chars().next().filter(|c| *c == '\'' || *c == '"')?;
    let end = s[1..].find(quote)? + 1;
    Some((s[1..end].to_string(), &s[end + 1..]))
}

fn parse_attribute(line: &str, lineno: usize) -> Result<Attribute> {
    let rest = line.trim_start()["@attribute".len()..].trim_start();
    let (name, spec) = match split_name(rest) {
        Some(x) => x,
        None => {
            let cut = rest.find(char::is_whitespace).ok_or_else(|| {
                Error::Validation(format!("line {lineno}: attribute without a type"))
            })?;
            (rest[..cut].to_string(), &rest[cut..])
        }
    };
    let spec = spec.trim();
    let kind = if spec.starts_with('{') {
        let inner = spec
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| Error::Validation(format!("line {lineno}: unterminated nominal list")))?;
        AttributeKind::Nominal(inner.split(',').map(unquote).collect())
    } else {
        match spec.to_ascii_lowercase().as_str() {
            "numeric" | "real" | "integer" => AttributeKind::Numeric,
            other => {
                return Err(Error::Validation(format!(
                    "line {lineno}: unsupported attribute type {other:?}"
                )))
            }
        }
    };
    Ok(Attribute { name, kind })
}

fn parse_value(raw: &str, attr: &Attribute, lineno: usize, col: usize) -> Result<f64> {
    let v = unquote(raw);
    if v == "?" {
        return Err(Error::Validation(format!(
            "line {lineno}: missing value for attribute {}",
            attr.name
        )));
    }
    let parse_err = || Error::Parse {
        row: lineno,
        col: col + 1,
        column: attr.name.clone(),
        value: v.clone(),
    };
    match &attr.kind {
        AttributeKind::Numeric => v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(parse_err),
        AttributeKind::Nominal(values) => values
            .iter()
            .position(|x| *x == v)
            .map(|i| i as f64)
            .ok_or_else(parse_err),
    }
}

pub fn parse_arff(text: &str) -> Result<ArffData> {
    let mut relation = String::new();
    let mut attributes = Vec::new();
    let mut rows = Vec::new();
    let mut in_data = false;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if !in_data {
            let lower = t.to_ascii_lowercase();
            if lower.starts_with("@relation") {
                relation = unquote(&t["@relation".len()..]);
            } else if lower.starts_with("@attribute") {
                attributes.push(parse_attribute(t, lineno)?);
            } else if lower.starts_with("@data") {
                in_data = true;
            }
            continue;
        }
        let row = if t.starts_with('{') {
            let inner = t
                .strip_prefix('{')
                .and_then(|s| s.strip_suffix('}'))
                .ok_or_else(|| Error::Validation(format!("line {lineno}: unterminated sparse row")))?;
            let mut row = vec![0.0; attributes.len()];
            for entry in inner.split(',').map(str::trim).filter(|e| !e.is_empty()) {
                let (idx, val) = entry
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| Error::Validation(format!("line {lineno}: bad sparse entry {entry:?}")))?;
                let idx: usize = idx
                    .parse()
                    .ok()
                    .filter(|&j| j < attributes.len())
                    .ok_or_else(|| Error::Validation(format!("line {lineno}: bad sparse index {idx:?}")))?;
                row[idx] = parse_value(val, &attributes[idx], lineno, idx)?;
            }
            row
        } else {
            let fields: Vec<&str> = t.split(',').collect();
            if fields.len() != attributes.len() {
                return Err(Error::Validation(format!(
                    "line {lineno}: {} values for {} attributes",
                    fields.len(),
                    attributes.len()
                )));
            }
            fields
                .iter()
                .enumerate()
                .map(|(j, f)| parse_value(f, &attributes[j], lineno, j))
                .collect::<Result<Vec<_>>>()?
        };
        rows.push(row);
    }
    if attributes.is_empty() {
        return Err(Error::Validation("no @attribute declarations".into()));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("ARFF data section"));
    }
    Ok(ArffData {
        relation,
        attributes,
        rows,
    })
}

/// Converts an ARFF file whose last `label_count` attributes are binary
/// labels to CSV plus a multi-label descriptor. Returns the row count.
pub fn convert_arff(input: &Path, output: &Path, label_count: usize) -> Result<usize> {
    let text = fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let data = parse_arff(&text)?;
    let width = data.attributes.len();
    if label_count == 0 || label_count >= width {
        return Err(Error::InvalidParameter(format!(
            "label count {label_count} invalid for {width} attributes"
        )));
    }
    for (i, row) in data.rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate().skip(width - label_count) {
            // nominal {0,1} declarations map to indices 0/1, so both spellings land here
            if v != 0.0 && v != 1.0 {
                return Err(Error::Validation(format!(
                    "row {}: label {} has value {v}, expected 0 or 1",
                    i + 1,
                    data.attributes[j].name
                )));
            }
        }
    }
    let mut w = csv::Writer::from_path(output).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(output, io),
        other => Error::Validation(format!("{other:?}")),
    })?;
    w.write_record(data.attributes.iter().map(|a| a.name.as_str()))?;
    for row in &data.rows {
        w.write_record(row.iter().map(|v| format!("{v}")))?;
    }
    w.flush().map_err(|e| Error::io(output, e))?;
    write_descriptor(
        output,
        &CsvDescriptor {
            label_cols: label_count,
            mode: LabelMode::Multi,
        },
    )?;
    Ok(data.rows.len())
}
