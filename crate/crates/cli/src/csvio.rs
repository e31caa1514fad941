//! CSV formats for datasets and sampling plans.
//!
//! Dataset files have a header row and one sample per row. Leading comment
//! lines of the form `# key: value` carry metadata (`source`, `measurement`,
//! `unit`, `bounds: x_min,x_max,y_min,y_max`); any other line starting with
//! `#` is ignored.

use std::collections::HashMap;
use std::io::{Read, Write};

use spatial_sde_core::sampling::{Provenance, SamplingPlan, TrainPick};
use spatial_sde_core::{Dataset, DatasetMeta, GridBounds, SpatialSample};

use crate::error::{Error, Result};

/// Column names to read a dataset from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub x: String,
    pub y: String,
    pub value: String,
    /// Pass/fail column. When absent from the file every sample is valid.
    pub valid: Option<String>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            x: "x".into(),
            y: "y".into(),
            value: "value".into(),
            valid: Some("valid".into()),
        }
    }
}

fn parse_meta(text: &str) -> Result<(DatasetMeta, Option<GridBounds>)> {
    let mut meta = DatasetMeta::default();
    let mut bounds = None;
    for (i, line) in text.lines().enumerate() {
        let Some(rest) = line.trim_start().strip_prefix('#') else {
            break;
        };
        let Some((key, value)) = rest.split_once(':') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "source" => meta.source = value.into(),
            "measurement" => meta.measurement = value.into(),
            "unit" => meta.unit = value.into(),
            "bounds" => {
                let parts: Vec<i32> = value
                    .split(',')
                    .map(|p| p.trim().parse::<i32>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Field {
                        line: i as u64 + 1,
                        column: "bounds".into(),
                        message: e.to_string(),
                    })?;
                let [x_min, x_max, y_min, y_max] = parts[..] else {
                    return Err(Error::Field {
                        line: i as u64 + 1,
                        column: "bounds".into(),
                        message: "expected x_min,x_max,y_min,y_max".into(),
                    });
                };
                bounds = Some(GridBounds {
                    x_min,
                    x_max,
                    y_min,
                    y_max,
                });
            }
            _ => {}
        }
    }
    Ok((meta, bounds))
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

fn required(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    column(headers, name).ok_or_else(|| Error::MissingColumn(name.into()))
}

fn field<'r>(rec: &'r csv::StringRecord, idx: usize, name: &str, line: u64) -> Result<&'r str> {
    rec.get(idx).map(str::trim).ok_or_else(|| Error::Field {
        line,
        column: name.into(),
        message: "missing field".into(),
    })
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, name: &str, line: u64) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = field(rec, idx, name, line)?;
    raw.parse().map_err(|e: T::Err| Error::Field {
        line,
        column: name.into(),
        message: format!("cannot parse `{raw}`: {e}"),
    })
}

fn parse_bool(raw: &str) -> Option<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "1" | "true" | "pass" | "yes" => Some(true),
        "0" | "false" | "fail" | "no" => Some(false),
        _ => None,
    }
}

/// Reads a dataset, preserving row order.
pub fn parse_csv<R: Read>(mut input: R, schema: &CsvSchema) -> Result<Dataset> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| Error::io("<input>", e))?;
    let (meta, bounds) = parse_meta(&text)?;

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let xi = required(&headers, &schema.x)?;
    let yi = required(&headers, &schema.y)?;
    let vi = required(&headers, &schema.value)?;
    let fi = schema.valid.as_deref().and_then(|name| column(&headers, name));

    let mut samples = Vec::new();
    let mut first_seen: HashMap<(i32, i32), u64> = HashMap::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let x: i32 = parse_field(&rec, xi, &schema.x, line)?;
        let y: i32 = parse_field(&rec, yi, &schema.y, line)?;
        let value: f64 = parse_field(&rec, vi, &schema.value, line)?;
        let valid = match fi {
            Some(idx) => {
                let name = schema.valid.as_deref().unwrap_or_default();
                let raw = field(&rec, idx, name, line)?;
                parse_bool(raw).ok_or_else(|| Error::Field {
                    line,
                    column: name.into(),
                    message: format!("expected a boolean, got `{raw}`"),
                })?
            }
            None => true,
        };
        if valid && !value.is_finite() {
            return Err(Error::Field {
                line,
                column: schema.value.clone(),
                message: format!("non-finite value `{value}` on a valid sample"),
            });
        }
        if let Some(&first) = first_seen.get(&(x, y)) {
            return Err(Error::DuplicateRow { line, first, x, y });
        }
        first_seen.insert((x, y), line);
        samples.push(SpatialSample { x, y, value, valid });
    }
    if samples.is_empty() {
        return Err(spatial_sde_core::Error::Empty.into());
    }
    let d = match bounds {
        Some(b) => Dataset::with_bounds(samples, b, meta)?,
        None => Dataset::new(samples, meta)?,
    };
    Ok(d)
}

fn one_line(s: &str) -> String {
    s.replace(['\r', '\n'], " ")
}

/// Writes a dataset in the format [`parse_csv`] reads with the default schema.
pub fn write_dataset<W: Write>(mut out: W, d: &Dataset) -> Result<()> {
    let m = d.meta();
    let b = d.bounds();
    write!(
        out,
        "# source: {}\n# measurement: {}\n# unit: {}\n# bounds: {},{},{},{}\n",
        one_line(&m.source),
        one_line(&m.measurement),
        one_line(&m.unit),
        b.x_min,
        b.x_max,
        b.y_min,
        b.y_max
    )
    .map_err(|e| Error::io("<output>", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "value", "valid"])?;
    for s in d.samples() {
        w.write_record([
            s.x.to_string(),
            s.y.to_string(),
            s.value.to_string(),
            s.valid.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

/// Writes one row per dataset sample: training picks in selection order,
/// then test points in ascending index order.
pub fn write_plan<W: Write>(out: W, d: &Dataset, plan: &SamplingPlan) -> Result<()> {
    if plan.dataset_len() != d.len() {
        return Err(Error::PlanMismatch(format!(
            "plan covers {} points, dataset has {}",
            plan.dataset_len(),
            d.len()
        )));
    }
    let samples = d.samples();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "x", "y", "role", "provenance", "group"])?;
    for p in plan.train() {
        let s = &samples[p.index];
        w.write_record([
            p.index.to_string(),
            s.x.to_string(),
            s.y.to_string(),
            "train".into(),
            p.provenance.to_string(),
            p.group.map(|g| g.to_string()).unwrap_or_default(),
        ])?;
    }
    for &i in plan.test_indices() {
        let s = &samples[i];
        w.write_record([i.to_string(), s.x.to_string(), s.y.to_string(), "test".into(), String::new(), String::new()])?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

/// Reads a plan and checks it against the dataset it was made for: every
/// index in range and listed once, coordinates matching, all points covered.
pub fn read_plan<R: Read>(input: R, d: &Dataset) -> Result<SamplingPlan> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let cols: Vec<usize> = ["index", "x", "y", "role", "provenance", "group"]
        .iter()
        .map(|c| required(&headers, c))
        .collect::<Result<_>>()?;
    let samples = d.samples();
    let mut seen = vec![false; d.len()];
    let mut train = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let index: usize = parse_field(&rec, cols[0], "index", line)?;
        let x: i32 = parse_field(&rec, cols[1], "x", line)?;
        let y: i32 = parse_field(&rec, cols[2], "y", line)?;
        let Some(s) = samples.get(index) else {
            return Err(Error::PlanMismatch(format!(
                "line {line}: index {index} out of range for {} points",
                d.len()
            )));
        };
        if (s.x, s.y) != (x, y) {
            return Err(Error::PlanMismatch(format!(
                "line {line}: index {index} is ({}, {}) in the dataset, plan says ({x}, {y})",
                s.x, s.y
            )));
        }
        if std::mem::replace(&mut seen[index], true) {
            return Err(Error::PlanMismatch(format!("line {line}: index {index} listed twice")));
        }
        match field(&rec, cols[3], "role", line)? {
            "train" => {
                let provenance: Provenance = field(&rec, cols[4], "provenance", line)?
                    .parse()
                    .map_err(|e: spatial_sde_core::Error| Error::Field {
                        line,
                        column: "provenance".into(),
                        message: e.to_string(),
                    })?;
                let group = match field(&rec, cols[5], "group", line)? {
                    "" => None,
                    _ => Some(parse_field(&rec, cols[5], "group", line)?),
                };
                train.push(TrainPick {
                    index,
                    provenance,
                    group,
                });
            }
            "test" => {}
            other => {
                return Err(Error::Field {
                    line,
                    column: "role".into(),
                    message: format!("expected `train` or `test`, got `{other}`"),
                })
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::PlanMismatch(format!(
            "plan lists {} of {} points; index {missing} is missing",
            seen.iter().filter(|s| **s).count(),
            d.len()
        )));
    }
    Ok(SamplingPlan::new(d.len(), train)?)
}
