//! Text formats for CSI records and scalar series.
//!
//! CSI CSV:
//!
//! ```text
//! # csi v1 kind=magnitude subcarriers=50 nominal_rate=62.5 [subject=..] [posture=..] [tags=a;b]
//! 0.000000000,12.5,13.1,...
//! ```
//!
//! Complex records interleave `re,im` pairs, so rows carry `2N` values.
//! Series CSV (reference traces and extracted waveforms):
//!
//! ```text
//! # ref v1 rate=100 start=0
//! 0.4212
//! ```
//!
//! The series tag may also be `series`. Row numbers in errors count lines
//! after the header.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    CsiFrame, CsiKind, CsiRecord, Posture, RecordMeta, ReferenceTrace, SubcarrierValues,
    UniformSeries, DEFAULT_NOMINAL_RATE, DEFAULT_REFERENCE_RATE,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsiFormat {
    Csv,
    Ndjson,
}

impl CsiFormat {
    /// `.ndjson` / `.jsonl` map to NDJSON, everything else to CSV.
    pub fn from_path(path: &Path) -> CsiFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("ndjson") | Some("jsonl") => CsiFormat::Ndjson,
            _ => CsiFormat::Csv,
        }
    }
}

pub fn load_csi(path: impl AsRef<Path>, format: CsiFormat) -> Result<CsiRecord> {
    let path = path.as_ref();
    let read = || -> Result<CsiRecord> {
        let reader = BufReader::new(File::open(path)?);
        match format {
            CsiFormat::Csv => read_csi_csv(reader),
            CsiFormat::Ndjson => read_csi_ndjson(reader),
        }
    };
    read().map_err(|e| e.in_file(path))
}

pub fn save_csi(record: &CsiRecord, path: impl AsRef<Path>, format: CsiFormat) -> Result<()> {
    write_atomic(path, |w| match format {
        CsiFormat::Csv => write_csi_csv(record, w),
        CsiFormat::Ndjson => write_csi_ndjson(record, w),
    })
}

/// Writes `path` through a temporary sibling that is renamed into place once
/// `body` succeeds, so readers never see a partial file.
pub fn write_atomic(
    path: impl AsRef<Path>,
    body: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<()> {
    let path = path.as_ref();
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| -> Result<()> {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

fn parse_f64(row: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(row, format!("non-numeric value `{}`", field.trim())))?;
    if !v.is_finite() {
        return Err(Error::parse(row, format!("non-finite value `{}`", field.trim())));
    }
    Ok(v)
}

/// Splits `# <tag> v1 key=value ...` into its key/value pairs.
fn parse_header<'a>(line: &'a str, tag: &[&str]) -> Result<(&'a str, Vec<(&'a str, &'a str)>)> {
    let mut words = line
        .strip_prefix('#')
        .ok_or_else(|| Error::parse(0, "missing `#` header line"))?
        .split_whitespace();
    let found = words.next().unwrap_or("");
    if !tag.contains(&found) {
        return Err(Error::parse(0, format!("expected `{}` header, found `{found}`", tag[0])));
    }
    match words.next() {
        Some("v1") => {}
        other => {
            return Err(Error::parse(
                0,
                format!("unsupported version `{}`", other.unwrap_or("")),
            ))
        }
    }
    let mut pairs = Vec::new();
    for word in words {
        let (k, v) = word
            .split_once('=')
            .ok_or_else(|| Error::parse(0, format!("malformed header field `{word}`")))?;
        pairs.push((k, v));
    }
    Ok((found, pairs))
}

fn header_f64(row: usize, key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(row, format!("bad header value {key}={value}")))
}

pub fn read_csi_csv<R: BufRead>(reader: R) -> Result<CsiRecord> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(Error::parse(0, "empty file")),
    };
    let (_, fields) = parse_header(header.trim(), &["csi"])?;
    let mut kind = None;
    let mut n_subcarriers = None;
    let mut nominal_rate = DEFAULT_NOMINAL_RATE;
    let mut meta = RecordMeta::default();
    for (k, v) in fields {
        match k {
            "kind" => kind = Some(v.parse::<CsiKind>().map_err(|e| Error::parse(0, e.to_string()))?),
            "subcarriers" => {
                n_subcarriers = Some(
                    v.parse::<usize>()
                        .ok()
                        .filter(|n| *n > 0)
                        .ok_or_else(|| Error::parse(0, format!("bad header value subcarriers={v}")))?,
                )
            }
            "nominal_rate" => nominal_rate = header_f64(0, k, v)?,
            "subject" => meta.subject = Some(v.to_string()),
            "posture" => meta.posture = v.parse().map_err(|e: Error| Error::parse(0, e.to_string()))?,
            "tags" => meta.tags = v.split(';').filter(|t| !t.is_empty()).map(String::from).collect(),
            _ => {}
        }
    }
    let kind = kind.ok_or_else(|| Error::parse(0, "header lacks kind="))?;
    let n = n_subcarriers.ok_or_else(|| Error::parse(0, "header lacks subcarriers="))?;
    let width = match kind {
        CsiKind::Magnitude => n,
        CsiKind::Complex => 2 * n,
    };

    let mut frames = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width + 1 {
            return Err(Error::parse(
                row,
                format!("expected {} columns, found {}", width + 1, cells.len()),
            ));
        }
        let timestamp = parse_f64(row, cells[0])?;
        let nums = cells[1..]
            .iter()
            .map(|c| parse_f64(row, c))
            .collect::<Result<Vec<f64>>>()?;
        let values = match kind {
            CsiKind::Magnitude => SubcarrierValues::Magnitude(nums),
            CsiKind::Complex => SubcarrierValues::Complex(
                nums.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect(),
            ),
        };
        if let Some(prev) = frames.last().map(|f: &CsiFrame| f.timestamp) {
            if timestamp <= prev {
                return Err(Error::parse(row, "non-increasing timestamp"));
            }
        }
        frames.push(CsiFrame { timestamp, values });
    }
    if frames.is_empty() {
        return Err(Error::parse(1, "no data rows"));
    }
    CsiRecord::new(frames, nominal_rate, meta)
}

fn check_token(what: &str, s: &str) -> Result<()> {
    if s.is_empty() || s.contains(|c: char| c.is_whitespace() || c == '=' || c == ';') {
        return Err(Error::InvalidInput(format!(
            "{what} `{s}` cannot be written to a header"
        )));
    }
    Ok(())
}

fn meta_header_fields(meta: &RecordMeta) -> Result<String> {
    let mut out = String::new();
    if let Some(subject) = &meta.subject {
        check_token("subject", subject)?;
        out.push_str(&format!(" subject={subject}"));
    }
    if meta.posture != Posture::Unknown {
        out.push_str(&format!(" posture={}", meta.posture));
    }
    if !meta.tags.is_empty() {
        for t in &meta.tags {
            check_token("tag", t)?;
        }
        out.push_str(&format!(" tags={}", meta.tags.join(";")));
    }
    Ok(out)
}

/// Writes the canonical CSV form: timestamps with 9 fractional digits,
/// values in shortest round-trip notation.
pub fn write_csi_csv<W: Write>(record: &CsiRecord, w: &mut W) -> Result<()> {
    writeln!(
        w,
        "# csi v1 kind={} subcarriers={} nominal_rate={}{}",
        record.kind(),
        record.n_subcarriers(),
        record.nominal_rate(),
        meta_header_fields(record.meta())?
    )?;
    let mut line = String::new();
    for frame in record.frames() {
        line.clear();
        line.push_str(&format!("{:.9}", frame.timestamp));
        match &frame.values {
            SubcarrierValues::Magnitude(v) => {
                for x in v {
                    line.push(',');
                    line.push_str(&x.to_string());
                }
            }
            SubcarrierValues::Complex(v) => {
                for c in v {
                    line.push(',');
                    line.push_str(&c.re.to_string());
                    line.push(',');
                    line.push_str(&c.im.to_string());
                }
            }
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct NdjsonHeader {
    csi: String,
    kind: CsiKind,
    subcarriers: usize,
    nominal_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subject: Option<String>,
    #[serde(default)]
    posture: Posture,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tags: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NdjsonValue {
    Magnitude(f64),
    Complex([f64; 2]),
}

#[derive(Serialize, Deserialize)]
struct NdjsonFrame {
    t: f64,
    sc: Vec<NdjsonValue>,
}

/// Reads one frame object per line. An optional first line carrying a
/// `"csi": "v1"` header supplies the nominal rate and metadata.
pub fn read_csi_ndjson<R: BufRead>(reader: R) -> Result<CsiRecord> {
    let mut nominal_rate = DEFAULT_NOMINAL_RATE;
    let mut meta = RecordMeta::default();
    let mut frames = Vec::new();
    let mut row = 0;
    let mut first = true;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if first {
            first = false;
            if let Ok(h) = serde_json::from_str::<NdjsonHeader>(&line) {
                if h.csi != "v1" {
                    return Err(Error::parse(0, format!("unsupported version `{}`", h.csi)));
                }
                nominal_rate = h.nominal_rate;
                meta = RecordMeta {
                    subject: h.subject,
                    posture: h.posture,
                    tags: h.tags,
                };
                continue;
            }
        }
        row += 1;
        let frame: NdjsonFrame =
            serde_json::from_str(&line).map_err(|e| Error::parse(row, e.to_string()))?;
        let values = if frame.sc.iter().all(|v| matches!(v, NdjsonValue::Magnitude(_))) {
            SubcarrierValues::Magnitude(
                frame
                    .sc
                    .iter()
                    .map(|v| match v {
                        NdjsonValue::Magnitude(x) => *x,
                        NdjsonValue::Complex(_) => unreachable!(),
                    })
                    .collect(),
            )
        } else if frame.sc.iter().all(|v| matches!(v, NdjsonValue::Complex(_))) {
            SubcarrierValues::Complex(
                frame
                    .sc
                    .iter()
                    .map(|v| match v {
                        NdjsonValue::Complex([re, im]) => Complex64::new(*re, *im),
                        NdjsonValue::Magnitude(_) => unreachable!(),
                    })
                    .collect(),
            )
        } else {
            return Err(Error::parse(row, "mixed magnitude and complex values"));
        };
        if let Some(prev) = frames.last().map(|f: &CsiFrame| f.timestamp) {
            if frame.t <= prev {
                return Err(Error::parse(row, "non-increasing timestamp"));
            }
        }
        frames.push(CsiFrame {
            timestamp: frame.t,
            values,
        });
    }
    if frames.is_empty() {
        return Err(Error::parse(1, "empty file"));
    }
    CsiRecord::new(frames, nominal_rate, meta)
}

pub fn write_csi_ndjson<W: Write>(record: &CsiRecord, w: &mut W) -> Result<()> {
    let meta = record.meta();
    let header = NdjsonHeader {
        csi: "v1".into(),
        kind: record.kind(),
        subcarriers: record.n_subcarriers(),
        nominal_rate: record.nominal_rate(),
        subject: meta.subject.clone(),
        posture: meta.posture,
        tags: meta.tags.clone(),
    };
    serde_json::to_writer(&mut *w, &header)?;
    w.write_all(b"\n")?;
    for frame in record.frames() {
        let sc = match &frame.values {
            SubcarrierValues::Magnitude(v) => v.iter().map(|x| NdjsonValue::Magnitude(*x)).collect(),
            SubcarrierValues::Complex(v) => {
                v.iter().map(|c| NdjsonValue::Complex([c.re, c.im])).collect()
            }
        };
        serde_json::to_writer(
            &mut *w,
            &NdjsonFrame {
                t: frame.timestamp,
                sc,
            },
        )?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Parsed `# ref|series v1 rate=.. start=..` line.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesHeader {
    pub tag: String,
    pub rate: Option<f64>,
    pub start: f64,
}

/// Reads a single-column series. A headerless file is accepted; its rate is
/// then `None` and the start time 0.
pub fn read_series_csv<R: BufRead>(reader: R) -> Result<(Option<SeriesHeader>, Vec<f64>)> {
    let mut header = None;
    let mut samples = Vec::new();
    let mut row = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if i == 0 && trimmed.starts_with('#') {
            let (tag, fields) = parse_header(trimmed, &["ref", "series"])?;
            let mut h = SeriesHeader {
                tag: tag.to_string(),
                rate: None,
                start: 0.0,
            };
            for (k, v) in fields {
                match k {
                    "rate" => h.rate = Some(header_f64(0, k, v)?),
                    "start" => h.start = header_f64(0, k, v)?,
                    _ => {}
                }
            }
            header = Some(h);
            continue;
        }
        row += 1;
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.contains(',') {
            return Err(Error::parse(row, "expected 1 column"));
        }
        samples.push(parse_f64(row, trimmed)?);
    }
    if samples.is_empty() {
        return Err(Error::parse(1, "empty file"));
    }
    Ok((header, samples))
}

/// Loads a reference trace. `rate` overrides the header rate; with neither,
/// the belt default of 100 Hz applies.
pub fn load_reference(path: impl AsRef<Path>, rate: Option<f64>) -> Result<ReferenceTrace> {
    let path = path.as_ref();
    let read = || -> Result<ReferenceTrace> {
        let (header, samples) = read_series_csv(BufReader::new(File::open(path)?))?;
        let rate = rate
            .or(header.as_ref().and_then(|h| h.rate))
            .unwrap_or(DEFAULT_REFERENCE_RATE);
        let start = header.map_or(0.0, |h| h.start);
        ReferenceTrace::new(samples, rate, start)
    };
    read().map_err(|e| e.in_file(path))
}

/// Loads any uniform series file; the header must carry `rate=`.
pub fn load_series(path: impl AsRef<Path>) -> Result<UniformSeries> {
    let path = path.as_ref();
    let read = || -> Result<UniformSeries> {
        let (header, samples) = read_series_csv(BufReader::new(File::open(path)?))?;
        let header = header.ok_or_else(|| Error::parse(0, "missing series header"))?;
        let rate = header
            .rate
            .ok_or_else(|| Error::parse(0, "header lacks rate="))?;
        UniformSeries::new(samples, rate, header.start)
    };
    read().map_err(|e| e.in_file(path))
}

pub fn write_series_csv<W: Write>(series: &UniformSeries, tag: &str, w: &mut W) -> Result<()> {
    writeln!(
        w,
        "# {tag} v1 rate={} start={}",
        series.rate(),
        series.start_time()
    )?;
    for x in series.samples() {
        writeln!(w, "{x}")?;
    }
    Ok(())
}

pub fn save_reference(trace: &ReferenceTrace, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, |w| write_series_csv(trace.series(), "ref", w))
}

pub fn save_series(series: &UniformSeries, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, |w| write_series_csv(series, "series", w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn header(n: usize) -> String {
        format!("# csi v1 kind=magnitude subcarriers={n} nominal_rate=62.5\n")
    }

    fn row(t: f64, n: usize) -> String {
        let vals: Vec<String> = (0..n).map(|k| format!("{}", 10.0 + k as f64)).collect();
        format!("{t:.6},{}\n", vals.join(","))
    }

    #[test]
    fn parses_three_rows() {
        let text = header(50) + &row(0.0, 50) + &row(0.016, 50) + &row(0.032, 50);
        let rec = read_csi_csv(Cursor::new(text)).unwrap();
        assert_eq!(rec.len(), 3);
        assert_eq!(rec.n_subcarriers(), 50);
        assert!((rec.duration() - 0.032).abs() < 1e-12);
    }

    #[test]
    fn duplicate_timestamp_reports_row() {
        let text = header(2) + &row(0.0, 2) + &row(0.0, 2);
        let err = read_csi_csv(Cursor::new(text)).unwrap_err();
        assert_eq!(err.to_string(), "non-increasing timestamp at row 2");
    }

    #[test]
    fn malformed_rows_report_row() {
        let text = header(2) + &row(0.0, 2) + "0.1,1.0\n";
        assert!(matches!(
            read_csi_csv(Cursor::new(text)),
            Err(Error::Parse { row: 2, .. })
        ));
        let text = header(2) + &row(0.0, 2) + "0.1,1.0,abc\n";
        let err = read_csi_csv(Cursor::new(text)).unwrap_err();
        assert_eq!(err.to_string(), "non-numeric value `abc` at row 2");
        assert!(read_csi_csv(Cursor::new("")).is_err());
        assert!(read_csi_csv(Cursor::new(header(2))).is_err());
    }

    #[test]
    fn complex_rows_interleave() {
        let text = "# csi v1 kind=complex subcarriers=1 nominal_rate=62.5 subject=s1 posture=prone\n\
                    0.000000000,3,4\n0.016000000,0,1\n";
        let rec = read_csi_csv(Cursor::new(text)).unwrap();
        assert_eq!(rec.kind(), CsiKind::Complex);
        assert_eq!(rec.meta().posture, Posture::Prone);
        assert_eq!(rec.meta().subject.as_deref(), Some("s1"));
        let mut out = Vec::new();
        write_csi_csv(&rec, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn ndjson_roundtrip() {
        let text = header(3) + &row(0.0, 3) + &row(0.016, 3) + &row(0.03, 3);
        let rec = read_csi_csv(Cursor::new(text)).unwrap();
        let mut out = Vec::new();
        write_csi_ndjson(&rec, &mut out).unwrap();
        let back = read_csi_ndjson(Cursor::new(out)).unwrap();
        assert_eq!(back, rec);

        let bare = "{\"t\":0.0,\"sc\":[[3,4]]}\n{\"t\":0.5,\"sc\":[[1,0]]}\n";
        let rec = read_csi_ndjson(Cursor::new(bare)).unwrap();
        assert_eq!(rec.kind(), CsiKind::Complex);
        let mixed = "{\"t\":0.0,\"sc\":[[3,4],1]}\n";
        assert!(read_csi_ndjson(Cursor::new(mixed)).is_err());
    }

    #[test]
    fn series_reader() {
        let mut text = String::from("# ref v1 rate=100 start=0\n");
        for i in 0..100 {
            text.push_str(&format!("{}\n", i as f64 * 0.5));
        }
        let (h, samples) = read_series_csv(Cursor::new(text)).unwrap();
        let h = h.unwrap();
        assert_eq!(h.rate, Some(100.0));
        let trace = ReferenceTrace::new(samples, h.rate.unwrap(), h.start).unwrap();
        assert!((trace.duration() - 0.99).abs() < 1e-12);

        let bad = "# ref v1 rate=100 start=0\n1.0\nx\n";
        let err = read_series_csv(Cursor::new(bad)).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }));
        assert!(read_series_csv(Cursor::new("")).is_err());
    }
}
