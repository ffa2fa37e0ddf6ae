use std::fs;
use std::io::Write;
use std::path::Path;

use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::error::Result;
use crate::segmentation::{Segment, Segmentation};
use crate::shape_space::TimeSeries;

use super::pipeline::QueryReport;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One output row: a segment and, for query results, its score.
#[derive(Clone, Copy, Debug)]
pub struct TableRow<'a> {
    pub segment: &'a Segment,
    pub score: Option<f64>,
    /// Number of `alpha_*` columns minus one.
    pub degree: usize,
}

impl Serialize for TableRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let seg = self.segment;
        let mut m = s.serialize_map(Some(6 + self.degree + 1))?;
        m.serialize_entry("index", &seg.index)?;
        m.serialize_entry("start", &seg.start)?;
        m.serialize_entry("end", &seg.end)?;
        m.serialize_entry("length", &seg.length)?;
        m.serialize_entry("closed_by", seg.closed_by.as_str())?;
        for k in 0..=self.degree {
            m.serialize_entry(&format!("alpha_{k}"), &seg.alpha.coefficient(k))?;
        }
        m.serialize_entry("score", &self.score)?;
        m.end()
    }
}

fn header(degree: usize) -> Vec<String> {
    let mut h: Vec<String> = ["index", "start", "end", "length", "closed_by"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((0..=degree).map(|k| format!("alpha_{k}")));
    h.push("score".into());
    h
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write rows as CSV (header plus one line per row) or a JSON array with
/// the same keys. Missing values are empty cells in CSV and `null` in JSON.
pub fn write_table<W: Write>(
    rows: &[TableRow<'_>],
    degree: usize,
    format: Format,
    out: W,
) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header(degree)).map_err(csv_err)?;
            for r in rows {
                let seg = r.segment;
                let mut rec = vec![
                    seg.index.to_string(),
                    seg.start.to_string(),
                    seg.end.to_string(),
                    seg.length.to_string(),
                    seg.closed_by.as_str().to_string(),
                ];
                rec.extend((0..=degree).map(|k| opt(seg.alpha.coefficient(k))));
                rec.push(opt(r.score));
                w.write_record(&rec).map_err(csv_err)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

/// Rows for a segmentation in index order, without scores.
pub fn segment_rows(segmentation: &Segmentation, degree: usize) -> Vec<TableRow<'_>> {
    segmentation
        .segments
        .iter()
        .map(|segment| TableRow {
            segment,
            score: None,
            degree,
        })
        .collect()
}

/// Rows for a query in ranked order.
pub fn ranked_rows(report: &QueryReport, degree: usize) -> Vec<TableRow<'_>> {
    report
        .ranked
        .iter()
        .map(|r| TableRow {
            segment: &r.segment,
            score: Some(r.score),
            degree,
        })
        .collect()
}

/// Write whitespace-separated plot data into `dir`:
/// `series.dat` (`t y`), `fit.dat` (`t fitted`), `boundaries.dat` (one
/// change point per line) and, with scores, `scores.dat` (`t score` as a
/// step function over each scored segment).
pub fn write_plot_data(
    dir: &Path,
    series: &TimeSeries,
    segmentation: &Segmentation,
    report: Option<&QueryReport>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut s = String::new();
    for (t, y) in series.values().iter().enumerate() {
        s.push_str(&format!("{t} {y}\n"));
    }
    fs::write(dir.join("series.dat"), s)?;

    let mut s = String::new();
    for seg in &segmentation.segments {
        for t in seg.start..=seg.end {
            s.push_str(&format!(
                "{t} {}\n",
                seg.alpha.value_at((t - seg.start) as f64)
            ));
        }
        // blank line breaks the curve between segments
        s.push('\n');
    }
    fs::write(dir.join("fit.dat"), s)?;

    let s: String = segmentation
        .change_points
        .iter()
        .map(|c| format!("{c}\n"))
        .collect();
    fs::write(dir.join("boundaries.dat"), s)?;

    if let Some(report) = report {
        let mut scored: Vec<_> = report.ranked.iter().collect();
        scored.sort_by_key(|r| r.segment.index);
        let mut s = String::new();
        for r in scored {
            s.push_str(&format!(
                "{} {}\n{} {}\n\n",
                r.segment.start, r.score, r.segment.end, r.score
            ));
        }
        fs::write(dir.join("scores.dat"), s)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::ClosedBy;
    use crate::shape_space::ShapeVector;

    fn seg() -> Segment {
        Segment {
            index: 2,
            start: 10,
            end: 13,
            length: 4,
            alpha: ShapeVector::from_parts(vec![1.5, -0.25], 3),
            closed_by: ClosedBy::Sss,
        }
    }

    #[test]
    fn csv_and_json_agree() {
        let s = seg();
        let rows = [TableRow {
            segment: &s,
            score: Some(0.75),
            degree: 2,
        }];
        let mut csv_out = Vec::new();
        write_table(&rows, 2, Format::Csv, &mut csv_out).unwrap();
        assert_eq!(
            String::from_utf8(csv_out).unwrap(),
            "index,start,end,length,closed_by,alpha_0,alpha_1,alpha_2,score\n2,10,13,4,SSS,1.5,-0.25,,0.75\n"
        );
        let mut json_out = Vec::new();
        write_table(&rows, 2, Format::Json, &mut json_out).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json_out).unwrap();
        assert_eq!(v[0]["closed_by"], "SSS");
        assert_eq!(v[0]["alpha_1"], -0.25);
        assert!(v[0]["alpha_2"].is_null());
        assert_eq!(v[0]["score"], 0.75);
    }
}
