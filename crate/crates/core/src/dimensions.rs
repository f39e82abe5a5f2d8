//! Nominal pipe size / schedule lookup.
//!
//! The table format is one record per line:
//! `designator, schedule, outer diameter mm, wall thickness mm`.
//! Blank lines and lines starting with `#` are ignored.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

const BUILTIN: &str = include_str!("../data/pipe_dimensions.csv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DimensionError {
    UnknownSize { nps: String, schedule: String },
    Malformed { line: usize, reason: &'static str },
}

impl fmt::Display for DimensionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimensionError::UnknownSize { nps, schedule } => {
                write!(f, "no dimensions for NPS {nps} schedule {schedule}")
            }
            DimensionError::Malformed { line, reason } => write!(f, "line {line}: {reason}"),
        }
    }
}

impl core::error::Error for DimensionError {}

#[derive(Debug, Clone, PartialEq)]
pub struct PipeDimensions {
    pub nps: String,
    pub schedule: String,
    pub outer_diameter_mm: f64,
    pub wall_thickness_mm: f64,
}

impl PipeDimensions {
    pub fn inner_diameter_mm(&self) -> f64 {
        self.outer_diameter_mm - 2.0 * self.wall_thickness_mm
    }

    pub fn inner_radius_mm(&self) -> f64 {
        self.inner_diameter_mm() / 2.0
    }
}

/// `"NPS 1 1/4"`, `"1-1/4"` and `"1-1/4\""` all normalize to `"1-1/4"`.
pub fn normalize_nps(nps: &str) -> String {
    let mut s = nps.trim();
    if s.len() >= 3 && s[..3].eq_ignore_ascii_case("nps") {
        s = s[3..].trim_start();
    }
    let s = s.trim_end_matches('"').trim();
    s.split_whitespace().collect::<Vec<_>>().join("-")
}

/// `"Sch 40"`, `"sch40"`, `"40"` normalize to `"40"`; `"std"` to `"STD"`.
pub fn normalize_schedule(schedule: &str) -> String {
    let upper = schedule.trim().to_ascii_uppercase();
    let stripped = upper.strip_prefix("SCHEDULE").or_else(|| upper.strip_prefix("SCH")).unwrap_or(&upper);
    stripped.trim_start_matches(['.', ' ']).trim().to_string()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DimensionTable {
    records: Vec<PipeDimensions>,
}

impl DimensionTable {
    /// The table shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("embedded dimension table is well formed")
    }

    pub fn parse(text: &str) -> Result<Self, DimensionError> {
        let mut records = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason| DimensionError::Malformed { line: i + 1, reason };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(malformed("expected 4 comma-separated fields"));
            }
            let od: f64 = fields[2].parse().map_err(|_| malformed("bad outer diameter"))?;
            let wall: f64 = fields[3].parse().map_err(|_| malformed("bad wall thickness"))?;
            if !(od > 0.0 && wall > 0.0 && 2.0 * wall < od) {
                return Err(malformed("wall thickness must be positive and less than the radius"));
            }
            records.push(PipeDimensions {
                nps: normalize_nps(fields[0]),
                schedule: normalize_schedule(fields[1]),
                outer_diameter_mm: od,
                wall_thickness_mm: wall,
            });
        }
        Ok(DimensionTable { records })
    }

    pub fn records(&self) -> &[PipeDimensions] {
        &self.records
    }

    pub fn lookup(&self, nps: &str, schedule: &str) -> Result<&PipeDimensions, DimensionError> {
        let (n, s) = (normalize_nps(nps), normalize_schedule(schedule));
        self.records
            .iter()
            .find(|r| r.nps == n && r.schedule == s)
            .ok_or(DimensionError::UnknownSize { nps: n, schedule: s })
    }
}

/// Inner radius in mm from the built-in table.
pub fn pipe_inner_radius(nps: &str, schedule: &str) -> Result<f64, DimensionError> {
    DimensionTable::builtin().lookup(nps, schedule).map(PipeDimensions::inner_radius_mm)
}
