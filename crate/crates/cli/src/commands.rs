use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use fcpd_core::analysis::{
    change_point_offsets, generate_cycle, kmeans_segments, mean_abs_offset, sensitivity_bounds,
    Anomaly, CycleConfig, SensitivityReport,
};
use fcpd_core::dsl;
use fcpd_core::fuzzy::FisConfig;
use fcpd_core::io::{
    ingest, ingest_path, normalize, ranked_rows, run_query, run_segmentation, segment_rows,
    write_plot_data, write_table, RunConfig,
};
use fcpd_core::segmentation::SegmentationConfig;
use fcpd_core::shape_space::TimeSeries;
use fcpd_core::Error;
use rayon::prelude::*;
use serde_json::json;

use crate::{Command, OutFormat, Param, QueryArgs, SegArgs};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

const CONFIG: u8 = 2;
const DATA: u8 = 3;
const RULES: u8 = 4;

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if let Error::Io(io) = e {
            return io.into();
        }
        let code = match e {
            Error::InvalidConfig(_) => CONFIG,
            Error::InvalidData(_)
            | Error::InsufficientData { .. }
            | Error::Parse { .. }
            | Error::Io(_) => DATA,
            Error::MissingFeature(_) | Error::Rules(_) => RULES,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Failure::new(0, "");
        }
        Failure::new(DATA, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Segment { input, seg, out } => {
            segment(&input, &seg, out.format, out.plot_dir.as_deref())
        }
        Command::Query {
            input,
            seg,
            query,
            out,
        } => query_cmd(&input, &seg, &query, out.format, out.plot_dir.as_deref()),
        Command::Cluster {
            input,
            seg,
            clusters,
            pair,
            seed,
            format,
        } => cluster(&input, &seg, clusters, pair, seed, format),
        Command::Sensitivity {
            path,
            seg,
            query,
            vary,
            values,
            format,
        } => sensitivity(&path, &seg, &query, vary.map(|p| (p, values)), format),
        Command::Generate {
            length,
            period,
            seed,
            clean,
            output,
        } => generate(length, period, seed, clean, output.as_deref()),
        Command::Offsets {
            reference,
            candidate,
            format,
        } => offsets(&reference, &candidate, format),
    }
}

fn read_series(input: &Path) -> Result<TimeSeries, Failure> {
    let series = if input.as_os_str() == "-" {
        ingest(io::stdin().lock())
    } else {
        ingest_path(input)
    };
    series.map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", input.display(), f.message);
        f
    })
}

fn read_rules(path: &Path) -> Result<FisConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(RULES, format!("cannot read rules {}: {e}", path.display())))?;
    dsl::compile(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn run_config(
    seg: &SegArgs,
    config: SegmentationConfig,
    delay: usize,
) -> Result<RunConfig, Failure> {
    config.validate()?;
    Ok(RunConfig::new(config)
        .with_normalize(seg.normalize)
        .with_delay(delay))
}

/// The series the segments were fitted on, for plotting.
fn fitted_series(series: &TimeSeries, config: &RunConfig) -> Result<TimeSeries, Failure> {
    Ok(if config.normalize {
        normalize(series)?
    } else {
        series.clone()
    })
}

fn stdout() -> BufWriter<io::StdoutLock<'static>> {
    BufWriter::new(io::stdout().lock())
}

fn segment(input: &Path, seg: &SegArgs, format: OutFormat, plot_dir: Option<&Path>) -> Outcome {
    let config = run_config(seg, seg.config(), 1)?;
    let series = read_series(input)?;
    let segmentation = run_segmentation(&series, &config)?;
    let degree = config.segmentation.degree;
    let mut out = stdout();
    write_table(
        &segment_rows(&segmentation, degree),
        degree,
        format.into(),
        &mut out,
    )?;
    out.flush()?;
    if let Some(dir) = plot_dir {
        write_plot_data(dir, &fitted_series(&series, &config)?, &segmentation, None)?;
    }
    Ok(())
}

fn query_cmd(
    input: &Path,
    seg: &SegArgs,
    q: &QueryArgs,
    format: OutFormat,
    plot_dir: Option<&Path>,
) -> Outcome {
    let fis = read_rules(&q.rules)?;
    let config = run_config(seg, seg.config(), q.delay)?;
    let series = read_series(input)?;
    let report = run_query(&series, &config, &fis)?;
    for s in &report.skipped {
        eprintln!(
            "skipped segment {}: missing {}",
            s.index,
            s.missing.join(", ")
        );
    }
    let degree = config.segmentation.degree;
    let mut out = stdout();
    write_table(
        &ranked_rows(&report, degree),
        degree,
        format.into(),
        &mut out,
    )?;
    out.flush()?;
    if let Some(dir) = plot_dir {
        write_plot_data(
            dir,
            &fitted_series(&series, &config)?,
            &report.segmentation,
            Some(&report),
        )?;
    }
    Ok(())
}

fn cluster(
    input: &Path,
    seg: &SegArgs,
    k: usize,
    pair: (usize, usize),
    seed: u64,
    format: OutFormat,
) -> Outcome {
    let config = run_config(seg, seg.config(), 1)?;
    if pair.0.max(pair.1) > config.segmentation.degree {
        return Err(Failure::new(
            CONFIG,
            format!(
                "coefficient pair {pair:?} exceeds degree {}",
                config.segmentation.degree
            ),
        ));
    }
    let series = read_series(input)?;
    let segmentation = run_segmentation(&series, &config)?;
    // a tail shorter than K+1 is fitted at a lower degree and cannot be placed
    let segments: Vec<_> = segmentation
        .segments
        .iter()
        .filter(|s| s.alpha.degree() >= pair.0.max(pair.1))
        .cloned()
        .collect();
    for s in segmentation
        .segments
        .iter()
        .filter(|s| s.alpha.degree() < pair.0.max(pair.1))
    {
        eprintln!(
            "skipped segment {}: fitted at degree {}",
            s.index,
            s.alpha.degree()
        );
    }
    let result = kmeans_segments(&segments, pair, k, seed)?;
    let mut out = stdout();
    let coef =
        |s: &fcpd_core::segmentation::Segment, i: usize| s.alpha.coefficient(i).unwrap_or(f64::NAN);
    match format {
        OutFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            let (a, b) = (format!("alpha_{}", pair.0), format!("alpha_{}", pair.1));
            w.write_record([
                "index",
                "start",
                "end",
                "length",
                &a,
                &b,
                "cluster",
                "representative",
            ])
            .map_err(io::Error::from)?;
            for (s, &c) in segments.iter().zip(&result.assignments) {
                let rep = result.representatives[c].is_some_and(|r| segments[r].index == s.index);
                w.write_record([
                    s.index.to_string(),
                    s.start.to_string(),
                    s.end.to_string(),
                    s.length.to_string(),
                    coef(s, pair.0).to_string(),
                    coef(s, pair.1).to_string(),
                    c.to_string(),
                    rep.to_string(),
                ])
                .map_err(io::Error::from)?;
            }
            w.flush()?;
        }
        OutFormat::Json => {
            let doc = json!({
                "pair": [pair.0, pair.1],
                "inertia": result.inertia,
                "iterations": result.iterations,
                "centroids": result.centroids,
                "representatives": result.representatives.iter()
                    .map(|r| r.map(|i| segments[i].index)).collect::<Vec<_>>(),
                "segments": segments.iter().zip(&result.assignments).map(|(s, &c)| json!({
                    "index": s.index,
                    "start": s.start,
                    "end": s.end,
                    "length": s.length,
                    "x": coef(s, pair.0),
                    "y": coef(s, pair.1),
                    "cluster": c,
                })).collect::<Vec<_>>(),
            });
            serde_json::to_writer_pretty(&mut out, &doc).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn series_files(path: &Path) -> Result<Vec<PathBuf>, Failure> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path)? {
        let p = entry?.path();
        if p.is_file() {
            files.push(p);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Failure::new(
            DATA,
            format!("{} contains no files", path.display()),
        ));
    }
    Ok(files)
}

fn with_param(
    base: &SegmentationConfig,
    param: Param,
    value: f64,
) -> Result<SegmentationConfig, Failure> {
    let whole = |v: f64| -> Result<u64, Failure> {
        if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
            Ok(v as u64)
        } else {
            Err(Failure::new(
                CONFIG,
                format!("{} needs a non-negative integer, got {v}", param.name()),
            ))
        }
    };
    let mut c = base.clone();
    match param {
        Param::Degree => {
            let k = whole(value)? as usize;
            // the default minimum length follows the degree
            let min_len =
                if base.min_segment_len == SegmentationConfig::new(base.degree).min_segment_len {
                    SegmentationConfig::new(k).min_segment_len
                } else {
                    base.min_segment_len
                };
            c.degree = k;
            c.min_segment_len = min_len;
        }
        Param::ThDpu => c.th_dpu = Some(value),
        Param::ThSss => c.th_sss = Some(whole(value)? as u32),
    }
    Ok(c)
}

struct SweepRow {
    setting: Option<(Param, f64)>,
    report: SensitivityReport,
}

fn sensitivity(
    path: &Path,
    seg: &SegArgs,
    q: &QueryArgs,
    vary: Option<(Param, Vec<f64>)>,
    format: OutFormat,
) -> Outcome {
    let fis = read_rules(&q.rules)?;
    let base = seg.config();
    let settings: Vec<Option<(Param, f64)>> = match vary {
        Some((p, values)) => values.into_iter().map(|v| Some((p, v))).collect(),
        None => vec![None],
    };
    let mut configs = Vec::new();
    for s in &settings {
        let c = match s {
            Some((p, v)) => with_param(&base, *p, *v)?,
            None => base.clone(),
        };
        configs.push(run_config(seg, c, q.delay)?);
    }
    let files = series_files(path)?;
    let series: Vec<(PathBuf, TimeSeries)> = files
        .into_iter()
        .map(|f| read_series(&f).map(|s| (f, s)))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    for (setting, config) in settings.into_iter().zip(&configs) {
        let per_series: Vec<(PathBuf, Result<Option<SensitivityReport>, Error>)> = series
            .par_iter()
            .map(|(name, s)| {
                let r = run_query(s, config, &fis).and_then(|report| {
                    if report.ranked.is_empty() {
                        return Ok(None);
                    }
                    let scores: Vec<f64> = report.ranked.iter().map(|r| r.score).collect();
                    sensitivity_bounds(&scores)
                        .map(|b| Some(b.with_segment_count(report.segmentation.len())))
                });
                (name.clone(), r)
            })
            .collect();
        let mut reports = Vec::new();
        for (name, r) in per_series {
            match r {
                Ok(Some(b)) => reports.push(b),
                Ok(None) => eprintln!("{}: no scorable segments, left out", name.display()),
                Err(e) => {
                    let mut f = Failure::from(e);
                    f.message = format!("{}: {}", name.display(), f.message);
                    return Err(f);
                }
            }
        }
        if reports.is_empty() {
            return Err(Failure::new(DATA, "no series produced a scorable segment"));
        }
        rows.push(SweepRow {
            setting,
            report: SensitivityReport::combine(&reports)?,
        });
    }

    let mut out = stdout();
    match format {
        OutFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record([
                "parameter",
                "value",
                "series",
                "mean_segment_count",
                "mean_upper",
                "mean_lower",
            ])
            .map_err(io::Error::from)?;
            for r in &rows {
                let (p, v) = match r.setting {
                    Some((p, v)) => (p.name().to_string(), v.to_string()),
                    None => (String::new(), String::new()),
                };
                w.write_record([
                    p,
                    v,
                    r.report.series.to_string(),
                    r.report.mean_segment_count.to_string(),
                    r.report.mean_upper.to_string(),
                    r.report.mean_lower.to_string(),
                ])
                .map_err(io::Error::from)?;
            }
            w.flush()?;
        }
        OutFormat::Json => {
            let doc: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({
                        "parameter": r.setting.map(|(p, _)| p.name()),
                        "value": r.setting.map(|(_, v)| v),
                        "series": r.report.series,
                        "mean_segment_count": r.report.mean_segment_count,
                        "mean_upper": r.report.mean_upper,
                        "mean_lower": r.report.mean_lower,
                    })
                })
                .collect();
            serde_json::to_writer_pretty(&mut out, &doc).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn generate(length: usize, period: f64, seed: u64, clean: bool, output: Option<&Path>) -> Outcome {
    let config = CycleConfig {
        length,
        period,
        seed,
        anomalies: if clean {
            Vec::new()
        } else {
            Anomaly::default_pair()
        },
    };
    let series = generate_cycle(&config)?;
    let mut text = String::from("t,y\n");
    for (t, y) in series.values().iter().enumerate() {
        text.push_str(&format!("{t},{y}\n"));
    }
    match output {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = stdout();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn offsets(reference: &[usize], candidate: &[usize], format: OutFormat) -> Outcome {
    let offs = change_point_offsets(reference, candidate)?;
    let mut out = stdout();
    match format {
        OutFormat::Csv => {
            writeln!(out, "reference,offset")?;
            for (r, o) in reference.iter().zip(&offs) {
                writeln!(
                    out,
                    "{r},{}",
                    o.map(|v| format!("{v:+}")).unwrap_or_default()
                )?;
            }
        }
        OutFormat::Json => {
            let doc = json!({
                "reference": reference,
                "offsets": offs,
                "mean_abs_offset": mean_abs_offset(&offs),
            });
            serde_json::to_writer_pretty(&mut out, &doc).map_err(io::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}
