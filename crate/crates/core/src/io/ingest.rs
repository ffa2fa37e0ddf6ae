use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::shape_space::TimeSeries;

fn parse_field(field: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{what} `{field}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("{what} `{field}` is not finite"),
        });
    }
    Ok(v)
}

/// Read a series from CSV text: one value per row, or `t,value` rows.
///
/// A first row that does not parse as numbers is taken as a header. When a
/// `t` column is present it must advance by exactly 1 per row; it is
/// otherwise discarded.
pub fn ingest<R: Read>(reader: R) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    let mut prev_t: Option<i64> = None;
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(std::io::Error::other(e.to_string())),
            _ => Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            },
        })?;
        let line = record.position().map_or(row + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let fields: Vec<&str> = record.iter().collect();
        if row == 0 && values.is_empty() && fields.iter().any(|f| f.parse::<f64>().is_err()) {
            // header
            width = Some(fields.len());
            continue;
        }
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {w} columns, found {}", fields.len()),
                });
            }
            _ => {}
        }
        match fields.as_slice() {
            [v] => values.push(parse_field(v, line, "value")?),
            [t, v] => {
                let t: i64 = t.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("time index `{t}` is not an integer"),
                })?;
                if let Some(p) = prev_t {
                    if t != p + 1 {
                        return Err(Error::data(format!(
                            "time index jumps from {p} to {t} at line {line}; samples must be equidistant"
                        )));
                    }
                }
                prev_t = Some(t);
                values.push(parse_field(v, line, "value")?);
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 1 or 2 columns, found {}", fields.len()),
                });
            }
        }
    }
    if values.is_empty() {
        return Err(Error::data("input contains no samples"));
    }
    TimeSeries::new(values)
}

pub fn ingest_path(path: &Path) -> Result<TimeSeries> {
    ingest(File::open(path)?)
}
