//! Scenario files: a JSON document with `pipe`, `robot`, `transmission` and
//! `sim` sections. Every physical key carries its unit as a suffix.
//!
//! ```json
//! {
//!   "pipe": {
//!     "nps": "6", "schedule": "40",
//!     "segments": [
//!       { "kind": "straight", "length_mm": 500 },
//!       { "kind": "bend", "bend_radius_mm": 300, "sweep_deg": 90, "roll_deg": 0 }
//!     ]
//!   },
//!   "robot": { "h_mm": 50, "sprocket_radius_mm": 20, "spring_k_n_per_m": 1000,
//!              "preload_mm": 8, "mass_kg": 15, "mu": 0.3, "robot_length_mm": 200 },
//!   "transmission": { "g1": 1, "g2": 1 },
//!   "sim": { "input_speed_rad_s": 2.5, "max_time_s": 120 }
//! }
//! ```
//!
//! `pipe` takes either `inner_radius_mm` or an `nps`/`schedule` pair.

use std::fs;
use std::path::{Path, PathBuf};

use pipecrawler_core::differential::SolverOptions;
use pipecrawler_core::geometry::GeometryError;
use pipecrawler_core::simulator::{DEFAULT_DT, DEFAULT_SLIP_STIFFNESS, DEFAULT_TRACK_DRAG};
use pipecrawler_core::{
    DimensionTable, PipeNetwork, RobotError, RobotParams, Scenario, SegmentSpec, SimError, StartPose,
    TransmissionConfig,
};
use serde::{Deserialize, Serialize};
use serde_json::error::Category;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
    #[error("{path}: {source}")]
    CompressionLimit { path: String, source: RobotError },
}

impl ScenarioError {
    fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ScenarioError::Validation { path: path.into(), message: message.into() }
    }

    /// Key path the error refers to, if any.
    pub fn path(&self) -> Option<&str> {
        match self {
            ScenarioError::Validation { path, .. } | ScenarioError::CompressionLimit { path, .. } => Some(path),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub pipe: Option<PipeSection>,
    pub robot: Option<RobotSection>,
    pub transmission: Option<TransmissionSection>,
    pub sim: Option<SimSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_radius_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nps: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,
    pub segments: Option<Vec<SegmentEntry>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentEntry {
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bend_radius_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roll_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSection {
    pub h_mm: Option<f64>,
    pub sprocket_radius_mm: Option<f64>,
    pub orientation_deg: Option<f64>,
    pub spring_k_n_per_m: Option<f64>,
    pub preload_mm: Option<f64>,
    pub max_compression_mm: Option<f64>,
    pub springs: Option<u32>,
    pub mass_kg: Option<f64>,
    pub mu: Option<f64>,
    pub robot_length_mm: Option<f64>,
    pub max_asym_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionSection {
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    pub efficiency: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub input_speed_rad_s: Option<f64>,
    pub slip_stiffness: Option<f64>,
    pub dt_s: Option<f64>,
    pub max_time_s: Option<f64>,
    pub bend_extra_compression_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub track_drag: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver_tol: Option<f64>,
}

fn required<T: Clone>(value: &Option<T>, path: &str) -> Result<T, ScenarioError> {
    value.clone().ok_or_else(|| ScenarioError::invalid(path, "required key is missing"))
}

fn robot_key(field: &str) -> &'static str {
    match field {
        "contact_radius_mm" | "robot.contact_radius" => "robot.h_mm",
        "sprocket_radius_mm" => "robot.sprocket_radius_mm",
        "orientation_deg" => "robot.orientation_deg",
        "spring_k_n_per_m" => "robot.spring_k_n_per_m",
        "springs_per_robot" => "robot.springs",
        "preload_mm" => "robot.preload_mm",
        "max_compression_mm" => "robot.max_compression_mm",
        "max_asym_deg" => "robot.max_asym_deg",
        "mass_kg" => "robot.mass_kg",
        "mu" => "robot.mu",
        "robot_length_mm" => "robot.robot_length_mm",
        "bend_extra_compression_mm" => "sim.bend_extra_compression_mm",
        "dt" => "sim.dt_s",
        "max_time" => "sim.max_time_s",
        "slip_stiffness" => "sim.slip_stiffness",
        "track_drag" => "sim.track_drag",
        "input_speed" => "sim.input_speed_rad_s",
        "solver.tol" => "sim.solver_tol",
        _ => "robot",
    }
}

fn robot_error(e: RobotError) -> ScenarioError {
    match e {
        RobotError::InvalidParam { name, reason } => ScenarioError::invalid(robot_key(name), reason),
        RobotError::CompressionLimit { .. } => {
            ScenarioError::CompressionLimit { path: "robot.preload_mm".into(), source: e }
        }
        other => ScenarioError::invalid("robot", other.to_string()),
    }
}

fn geometry_error(e: GeometryError) -> ScenarioError {
    match e {
        GeometryError::EmptyNetwork => ScenarioError::invalid("pipe.segments", "at least one segment is required"),
        GeometryError::BadSegment { index, reason } => {
            ScenarioError::invalid(format!("pipe.segments[{index}]"), reason)
        }
        GeometryError::BadInnerRadius(_) => ScenarioError::invalid("pipe.inner_radius_mm", "must be positive"),
        other => ScenarioError::invalid("pipe", other.to_string()),
    }
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let parsed: Result<ScenarioFile, _> = serde_path_to_error::deserialize(&mut de);
        let file = parsed.map_err(|err| {
            let path = err.path().to_string();
            let inner = err.into_inner();
            match inner.classify() {
                Category::Data => ScenarioError::invalid(path, inner.to_string()),
                _ => ScenarioError::Parse { line: inner.line(), column: inner.column(), message: inner.to_string() },
            }
        })?;
        de.end().map_err(|e| ScenarioError::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario files always serialize")
    }

    /// Converts to a validated [`Scenario`], resolving pipe sizes from `table`.
    pub fn to_scenario(&self, table: &DimensionTable) -> Result<Scenario, ScenarioError> {
        let pipe = required(&self.pipe, "pipe")?;
        let robot = required(&self.robot, "robot")?;
        let transmission = required(&self.transmission, "transmission")?;
        let sim = required(&self.sim, "sim")?;

        let defaults = RobotParams::default();
        let params = RobotParams {
            contact_radius_mm: required(&robot.h_mm, "robot.h_mm")?,
            sprocket_radius_mm: required(&robot.sprocket_radius_mm, "robot.sprocket_radius_mm")?,
            orientation_deg: robot.orientation_deg.unwrap_or(defaults.orientation_deg),
            spring_k_n_per_m: required(&robot.spring_k_n_per_m, "robot.spring_k_n_per_m")?,
            springs_per_robot: robot.springs.unwrap_or(defaults.springs_per_robot),
            preload_mm: required(&robot.preload_mm, "robot.preload_mm")?,
            max_compression_mm: robot.max_compression_mm.unwrap_or(defaults.max_compression_mm),
            max_asym_deg: robot.max_asym_deg.unwrap_or(defaults.max_asym_deg),
            mass_kg: required(&robot.mass_kg, "robot.mass_kg")?,
            mu: required(&robot.mu, "robot.mu")?,
            robot_length_mm: required(&robot.robot_length_mm, "robot.robot_length_mm")?,
            bend_extra_compression_mm: sim.bend_extra_compression_mm.unwrap_or(defaults.bend_extra_compression_mm),
        };
        params.validate().map_err(robot_error)?;

        let inner_radius = match (&pipe.inner_radius_mm, &pipe.nps, &pipe.schedule) {
            (Some(r), None, None) => *r,
            (None, Some(nps), Some(schedule)) => table
                .lookup(nps, schedule)
                .map_err(|e| ScenarioError::invalid("pipe.nps", e.to_string()))?
                .inner_radius_mm(),
            (None, Some(_), None) => return Err(ScenarioError::invalid("pipe.schedule", "required with pipe.nps")),
            (None, None, Some(_)) => return Err(ScenarioError::invalid("pipe.nps", "required with pipe.schedule")),
            (None, None, None) => {
                return Err(ScenarioError::invalid("pipe.inner_radius_mm", "give inner_radius_mm or nps and schedule"))
            }
            _ => return Err(ScenarioError::invalid("pipe", "inner_radius_mm and nps/schedule are exclusive")),
        };

        let entries = required(&pipe.segments, "pipe.segments")?;
        let mut segments = Vec::with_capacity(entries.len());
        for (i, entry) in entries.iter().enumerate() {
            let at = |key: &str| format!("pipe.segments[{i}].{key}");
            let kind = required(&entry.kind, &at("kind"))?;
            let seg = match kind.as_str() {
                "straight" => {
                    for (key, present) in [
                        ("bend_radius_mm", entry.bend_radius_mm.is_some()),
                        ("sweep_deg", entry.sweep_deg.is_some()),
                        ("roll_deg", entry.roll_deg.is_some()),
                    ] {
                        if present {
                            return Err(ScenarioError::invalid(at(key), "not allowed on a straight segment"));
                        }
                    }
                    SegmentSpec::straight(required(&entry.length_mm, &at("length_mm"))?)
                }
                "bend" => {
                    if entry.length_mm.is_some() {
                        return Err(ScenarioError::invalid(at("length_mm"), "not allowed on a bend; use sweep_deg"));
                    }
                    let r = required(&entry.bend_radius_mm, &at("bend_radius_mm"))?;
                    if r.is_nan() || r <= params.contact_radius_mm {
                        return Err(ScenarioError::invalid(
                            at("bend_radius_mm"),
                            format!(
                                "degenerate bend: radius {r} mm must exceed robot.h_mm = {} mm",
                                params.contact_radius_mm
                            ),
                        ));
                    }
                    SegmentSpec::bend(r, required(&entry.sweep_deg, &at("sweep_deg"))?, entry.roll_deg.unwrap_or(0.0))
                }
                other => {
                    return Err(ScenarioError::invalid(
                        at("kind"),
                        format!("unknown kind {other:?}; use straight or bend"),
                    ))
                }
            };
            segments.push(seg);
        }
        let network = PipeNetwork::build(&segments, inner_radius, StartPose::default()).map_err(geometry_error)?;

        let config = TransmissionConfig::new(
            required(&transmission.g1, "transmission.g1")?,
            required(&transmission.g2, "transmission.g2")?,
            transmission.efficiency.unwrap_or(1.0),
        )
        .map_err(|e| ScenarioError::invalid("transmission", e.to_string()))?;

        let scenario = Scenario {
            network,
            robot: params,
            transmission: config,
            input_speed: required(&sim.input_speed_rad_s, "sim.input_speed_rad_s")?,
            slip_stiffness: sim.slip_stiffness.unwrap_or(DEFAULT_SLIP_STIFFNESS),
            track_drag: sim.track_drag.unwrap_or(DEFAULT_TRACK_DRAG),
            dt: sim.dt_s.unwrap_or(DEFAULT_DT),
            max_time: required(&sim.max_time_s, "sim.max_time_s")?,
            solver: SolverOptions {
                tol: sim.solver_tol.unwrap_or(SolverOptions::default().tol),
                ..SolverOptions::default()
            },
        };
        scenario.validate().map_err(|e| match e {
            SimError::InvalidScenario { field, reason } => ScenarioError::invalid(robot_key(field), reason),
            SimError::Robot(r) => robot_error(r),
            SimError::Geometry(g) => geometry_error(g),
            other => ScenarioError::invalid("sim", other.to_string()),
        })?;
        Ok(scenario)
    }

    /// Canonical file for `scenario`: every key present, pipe given by radius.
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let r = &scenario.robot;
        let t = &scenario.transmission;
        let segments = scenario
            .network
            .segments()
            .iter()
            .map(|seg| match *seg {
                SegmentSpec::Straight { length_mm } => SegmentEntry {
                    kind: Some("straight".into()),
                    length_mm: Some(length_mm),
                    ..SegmentEntry::default()
                },
                SegmentSpec::Bend { bend_radius_mm, sweep_deg, roll_deg } => SegmentEntry {
                    kind: Some("bend".into()),
                    bend_radius_mm: Some(bend_radius_mm),
                    sweep_deg: Some(sweep_deg),
                    roll_deg: Some(roll_deg),
                    ..SegmentEntry::default()
                },
            })
            .collect();
        ScenarioFile {
            pipe: Some(PipeSection {
                inner_radius_mm: Some(scenario.network.inner_radius()),
                nps: None,
                schedule: None,
                segments: Some(segments),
            }),
            robot: Some(RobotSection {
                h_mm: Some(r.contact_radius_mm),
                sprocket_radius_mm: Some(r.sprocket_radius_mm),
                orientation_deg: Some(r.orientation_deg),
                spring_k_n_per_m: Some(r.spring_k_n_per_m),
                preload_mm: Some(r.preload_mm),
                max_compression_mm: Some(r.max_compression_mm),
                springs: Some(r.springs_per_robot),
                mass_kg: Some(r.mass_kg),
                mu: Some(r.mu),
                robot_length_mm: Some(r.robot_length_mm),
                max_asym_deg: Some(r.max_asym_deg),
            }),
            transmission: Some(TransmissionSection {
                g1: Some(t.g1()),
                g2: Some(t.g2()),
                efficiency: Some(t.efficiency()),
            }),
            sim: Some(SimSection {
                input_speed_rad_s: Some(scenario.input_speed),
                slip_stiffness: Some(scenario.slip_stiffness),
                dt_s: Some(scenario.dt),
                max_time_s: Some(scenario.max_time),
                bend_extra_compression_mm: Some(r.bend_extra_compression_mm),
                track_drag: Some(scenario.track_drag),
                solver_tol: Some(scenario.solver.tol),
            }),
        }
    }
}

pub fn parse_scenario_str(text: &str) -> Result<Scenario, ScenarioError> {
    ScenarioFile::from_json(text)?.to_scenario(&DimensionTable::builtin())
}

pub fn parse_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
    parse_scenario_str(&text)
}
