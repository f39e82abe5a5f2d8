//! Record and summary emission.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use pipecrawler_core::simulator::{SegmentSummary, SimRecord, SimSummary};
use serde::Serialize;

pub const RECORD_COLUMNS: [&str; 16] = [
    "t_s",
    "s_mm",
    "segment",
    "vA_mm_s",
    "vB_mm_s",
    "vC_mm_s",
    "vreqA_mm_s",
    "vreqB_mm_s",
    "vreqC_mm_s",
    "slipA_mm_s",
    "slipB_mm_s",
    "slipC_mm_s",
    "xA_mm",
    "xB_mm",
    "xC_mm",
    "torque_nm",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}; use csv or json")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("cannot write output: {0}")]
pub struct IoError(#[from] pub std::io::Error);

impl From<csv::Error> for IoError {
    fn from(e: csv::Error) -> Self {
        IoError(e.into())
    }
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError(e.into())
    }
}

/// Formats `x` like C's `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn sig9(x: f64) -> f64 {
    format_sig(x, 9).parse().unwrap_or(x)
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct RecordRow {
    t_s: f64,
    s_mm: f64,
    segment: usize,
    vA_mm_s: f64,
    vB_mm_s: f64,
    vC_mm_s: f64,
    vreqA_mm_s: f64,
    vreqB_mm_s: f64,
    vreqC_mm_s: f64,
    slipA_mm_s: f64,
    slipB_mm_s: f64,
    slipC_mm_s: f64,
    xA_mm: f64,
    xB_mm: f64,
    xC_mm: f64,
    torque_nm: f64,
}

impl From<&SimRecord> for RecordRow {
    fn from(r: &SimRecord) -> Self {
        let [va, vb, vc] = r.track_speeds.map(sig9);
        let [qa, qb, qc] = r.required_speeds.map(sig9);
        let [sa, sb, sc] = r.slip.map(sig9);
        let [xa, xb, xc] = r.compressions.map(sig9);
        RecordRow {
            t_s: sig9(r.t),
            s_mm: sig9(r.s),
            segment: r.segment_index,
            vA_mm_s: va,
            vB_mm_s: vb,
            vC_mm_s: vc,
            vreqA_mm_s: qa,
            vreqB_mm_s: qb,
            vreqC_mm_s: qc,
            slipA_mm_s: sa,
            slipB_mm_s: sb,
            slipC_mm_s: sc,
            xA_mm: xa,
            xB_mm: xb,
            xC_mm: xc,
            torque_nm: sig9(r.common_torque),
        }
    }
}

fn csv_fields(r: &SimRecord) -> Vec<String> {
    let mut out = vec![format_sig(r.t, 9), format_sig(r.s, 9), r.segment_index.to_string()];
    for group in [&r.track_speeds, &r.required_speeds, &r.slip, &r.compressions] {
        out.extend(group.iter().map(|v| format_sig(*v, 9)));
    }
    out.push(format_sig(r.common_torque, 9));
    out
}

pub fn write_records_csv<W: Write>(records: &[SimRecord], writer: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.write_record(csv_fields(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records_json<W: Write>(records: &[SimRecord], mut writer: W) -> Result<(), IoError> {
    let rows: Vec<RecordRow> = records.iter().map(RecordRow::from).collect();
    serde_json::to_writer_pretty(&mut writer, &rows)?;
    writeln!(writer)?;
    Ok(())
}

pub fn write_records<W: Write>(records: &[SimRecord], format: Format, writer: W) -> Result<(), IoError> {
    match format {
        Format::Csv => write_records_csv(records, writer),
        Format::Json => write_records_json(records, writer),
    }
}

#[derive(Serialize)]
struct SegmentRow {
    index: usize,
    kind: &'static str,
    entry_time_s: Option<f64>,
    exit_time_s: Option<f64>,
    duration_s: Option<f64>,
    samples: usize,
    mean_speeds_mm_s: Option<[f64; 3]>,
    analytic_speeds_mm_s: [f64; 3],
    ape_percent: Option<[f64; 3]>,
}

impl From<&SegmentSummary> for SegmentRow {
    fn from(s: &SegmentSummary) -> Self {
        SegmentRow {
            index: s.index,
            kind: if s.is_bend { "bend" } else { "straight" },
            entry_time_s: s.entry_time,
            exit_time_s: s.exit_time,
            duration_s: s.duration(),
            samples: s.samples,
            mean_speeds_mm_s: s.mean_track_speeds,
            analytic_speeds_mm_s: s.analytic_speeds,
            ape_percent: s.ape_percent,
        }
    }
}

#[derive(Serialize)]
struct SummaryDoc {
    finish_time_s: Option<f64>,
    max_abs_slip_mm_s: f64,
    max_compression_mm: f64,
    traversed_mm: f64,
    total_distance_mm: f64,
    segments: Vec<SegmentRow>,
}

pub fn summary_json(summary: &SimSummary) -> serde_json::Value {
    let doc = SummaryDoc {
        finish_time_s: summary.finish_time,
        max_abs_slip_mm_s: summary.max_abs_slip,
        max_compression_mm: summary.max_compression,
        traversed_mm: summary.traversed_mm,
        total_distance_mm: summary.total_distance_mm,
        segments: summary.segments.iter().map(SegmentRow::from).collect(),
    };
    serde_json::to_value(doc).expect("summary serializes")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format_sig(v, 6))
}

pub fn render_summary(summary: &SimSummary) -> String {
    let mut out = String::new();
    out.push_str("seg  kind      entry_s     exit_s      vA/vB/vC mean (mm/s)            APE %\n");
    for s in &summary.segments {
        let speeds = s.mean_track_speeds.map_or_else(|| "-".into(), |m| m.map(|v| format_sig(v, 6)).join(" / "));
        let ape = s.ape_percent.map_or_else(|| "-".into(), |a| a.map(|v| format_sig(v, 3)).join(" / "));
        out.push_str(&format!(
            "{:<4} {:<9} {:<11} {:<11} {:<31} {}\n",
            s.index,
            if s.is_bend { "bend" } else { "straight" },
            opt(s.entry_time),
            opt(s.exit_time),
            speeds,
            ape
        ));
    }
    out.push_str(&format!("finish time: {} s\n", opt(summary.finish_time)));
    out.push_str(&format!("distance: {} mm\n", format_sig(summary.total_distance_mm, 6)));
    out.push_str(&format!("max |slip|: {} mm/s\n", format_sig(summary.max_abs_slip, 3)));
    out.push_str(&format!("max compression: {} mm\n", format_sig(summary.max_compression, 6)));
    out
}
