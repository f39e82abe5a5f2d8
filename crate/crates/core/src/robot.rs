//! Three-module robot: per-track kinematics in bends and wall-pressing springs.
//!
//! Modules sit 120° apart around the body. Module A's radial axis is at
//! `orientation_deg` from the body reference carried by the centerline pose;
//! B and C follow at +120° and +240°. Inside a bend the angle of each module
//! is taken from the bend's outward direction, so `cos = +1` is the track
//! running along the outside of the turn.

use core::fmt;

use crate::geometry::{CenterlinePose, GeometryError, PipeNetwork};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobotError {
    InvalidParam {
        name: &'static str,
        reason: &'static str,
    },
    /// A track's contact path would cross the bend axis.
    DegenerateBend {
        bend_radius_mm: f64,
        contact_radius_mm: f64,
    },
    /// A module would need more spring compression than it has travel.
    CompressionLimit {
        module: usize,
        required_mm: f64,
        limit_mm: f64,
    },
    /// Front/rear compression difference tilts a module past its limit.
    AsymmetryLimit {
        module: usize,
        tilt_deg: f64,
        limit_deg: f64,
    },
    Geometry(GeometryError),
}

impl fmt::Display for RobotError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RobotError::InvalidParam { name, reason } => write!(f, "{name}: {reason}"),
            RobotError::DegenerateBend { bend_radius_mm, contact_radius_mm } => {
                write!(f, "bend radius {bend_radius_mm} mm does not exceed contact radius {contact_radius_mm} mm")
            }
            RobotError::CompressionLimit { module, required_mm, limit_mm } => write!(
                f,
                "module {} needs {required_mm} mm compression, limit is {limit_mm} mm",
                MODULE_LABELS[*module]
            ),
            RobotError::AsymmetryLimit { module, tilt_deg, limit_deg } => {
                write!(f, "module {} tilts {tilt_deg}°, limit is {limit_deg}°", MODULE_LABELS[*module])
            }
            RobotError::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for RobotError {}

impl From<GeometryError> for RobotError {
    fn from(e: GeometryError) -> Self {
        RobotError::Geometry(e)
    }
}

pub const MODULE_LABELS: [&str; 3] = ["A", "B", "C"];

/// Standard gravity used by the tractive-effort formula, m/s².
pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotParams {
    /// Radial distance from the body axis to the track contact line, `h`.
    pub contact_radius_mm: f64,
    pub sprocket_radius_mm: f64,
    pub orientation_deg: f64,
    pub spring_k_n_per_m: f64,
    /// Number of wall-pressing springs on the whole robot.
    pub springs_per_robot: u32,
    pub preload_mm: f64,
    pub max_compression_mm: f64,
    /// Largest allowed front/rear tilt of a module, `φ`.
    pub max_asym_deg: f64,
    pub mass_kg: f64,
    pub mu: f64,
    pub robot_length_mm: f64,
    /// Extra compression of a module lying in the bend plane.
    pub bend_extra_compression_mm: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        RobotParams {
            contact_radius_mm: 50.0,
            sprocket_radius_mm: 20.0,
            orientation_deg: 0.0,
            spring_k_n_per_m: 1000.0,
            springs_per_robot: 12,
            preload_mm: 8.0,
            max_compression_mm: 16.0,
            max_asym_deg: 10.0,
            mass_kg: 15.0,
            mu: 0.3,
            robot_length_mm: 200.0,
            bend_extra_compression_mm: 1.5,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<(), RobotError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(RobotError::InvalidParam { name, reason: "must be positive" })
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<(), RobotError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(RobotError::InvalidParam { name, reason: "must be non-negative" })
    }
}

impl RobotParams {
    /// Checks the parameter invariants. A preload beyond the compression
    /// limit is reported as [`RobotError::CompressionLimit`].
    pub fn validate(&self) -> Result<(), RobotError> {
        positive("contact_radius_mm", self.contact_radius_mm)?;
        positive("sprocket_radius_mm", self.sprocket_radius_mm)?;
        positive("spring_k_n_per_m", self.spring_k_n_per_m)?;
        positive("max_compression_mm", self.max_compression_mm)?;
        positive("mass_kg", self.mass_kg)?;
        positive("robot_length_mm", self.robot_length_mm)?;
        non_negative("preload_mm", self.preload_mm)?;
        non_negative("max_asym_deg", self.max_asym_deg)?;
        non_negative("bend_extra_compression_mm", self.bend_extra_compression_mm)?;
        if !self.orientation_deg.is_finite() {
            return Err(RobotError::InvalidParam { name: "orientation_deg", reason: "must be finite" });
        }
        if self.springs_per_robot == 0 {
            return Err(RobotError::InvalidParam { name: "springs_per_robot", reason: "must be at least 1" });
        }
        if !(self.mu > 0.0 && self.mu < 2.0) {
            return Err(RobotError::InvalidParam { name: "mu", reason: "must lie in (0, 2)" });
        }
        if self.preload_mm > self.max_compression_mm {
            return Err(RobotError::CompressionLimit {
                module: 0,
                required_mm: self.preload_mm,
                limit_mm: self.max_compression_mm,
            });
        }
        Ok(())
    }

    /// Angular position of modules A, B, C in degrees.
    pub fn module_angles(&self) -> [f64; 3] {
        let t = self.orientation_deg;
        [t, t + 120.0, t + 240.0]
    }

    pub fn with_orientation(&self, orientation_deg: f64) -> Self {
        RobotParams { orientation_deg, ..*self }
    }
}

/// Turning radius of a track's contact path about the bend axis.
pub fn track_path_radius(
    bend_radius_mm: f64,
    contact_radius_mm: f64,
    module_angle_deg: f64,
) -> Result<f64, RobotError> {
    if bend_radius_mm.is_nan() || bend_radius_mm <= contact_radius_mm {
        return Err(RobotError::DegenerateBend { bend_radius_mm, contact_radius_mm });
    }
    Ok(bend_radius_mm + contact_radius_mm * libm::cos(module_angle_deg.to_radians()))
}

/// Cosine of each module's angle from the bend's outward direction;
/// `None` on straights.
pub fn module_bend_cosines(pose: &CenterlinePose, params: &RobotParams) -> Option<[f64; 3]> {
    let outward = pose.bend_outward?;
    // Module direction m = cos(a) ref + sin(a) (t × ref); project on outward.
    let along_ref = pose.reference.dot(outward);
    let along_side = pose.tangent.cross(pose.reference).dot(outward);
    Some(params.module_angles().map(|a| {
        let a = a.to_radians();
        libm::cos(a) * along_ref + libm::sin(a) * along_side
    }))
}

/// Surface speed each track needs so that none of them slips.
///
/// On a straight all three equal `v_center`. In a bend of radius `R` a track
/// at angle `θ_i` from the outward direction runs on a path of radius
/// `R + h cos θ_i`, so its speed scales by that ratio to `R`. The three
/// cosines sum to zero, so the mean stays `v_center`.
pub fn required_track_speeds(
    pose: &CenterlinePose,
    v_center: f64,
    params: &RobotParams,
) -> Result<[f64; 3], RobotError> {
    let (Some(r), Some(cosines)) = (pose.bend_radius(), module_bend_cosines(pose, params)) else {
        return Ok([v_center; 3]);
    };
    let h = params.contact_radius_mm;
    if r.is_nan() || r <= h {
        return Err(RobotError::DegenerateBend { bend_radius_mm: r, contact_radius_mm: h });
    }
    Ok(cosines.map(|c| v_center * (r + h * c) / r))
}

/// Spring compression of each module at `pose`.
///
/// Straight pipe leaves every module at the preload. In a bend each module
/// gains `bend_extra_compression_mm * |cos θ_i|`, the full amount for a module
/// lying in the bend plane.
pub fn spring_compression(pose: &CenterlinePose, params: &RobotParams) -> Result<[f64; 3], RobotError> {
    let x0 = params.preload_mm;
    let compressions = match module_bend_cosines(pose, params) {
        None => [x0; 3],
        Some(c) => c.map(|c| x0 + params.bend_extra_compression_mm * c.abs()),
    };
    for (module, &x) in compressions.iter().enumerate() {
        if x > params.max_compression_mm {
            return Err(RobotError::CompressionLimit { module, required_mm: x, limit_mm: params.max_compression_mm });
        }
    }
    Ok(compressions)
}

/// Tilt of each module from the compression difference between its front
/// and rear ends.
pub fn module_tilt(front_mm: &[f64; 3], rear_mm: &[f64; 3], params: &RobotParams) -> Result<[f64; 3], RobotError> {
    let mut tilt = [0.0; 3];
    for module in 0..3 {
        let t = libm::atan2((front_mm[module] - rear_mm[module]).abs(), params.robot_length_mm).to_degrees();
        if t > params.max_asym_deg {
            return Err(RobotError::AsymmetryLimit { module, tilt_deg: t, limit_deg: params.max_asym_deg });
        }
        tilt[module] = t;
    }
    Ok(tilt)
}

/// Per-module condition of the robot centered at arc length `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModuleState {
    pub compressions_mm: [f64; 3],
    pub tilt_deg: [f64; 3],
    /// Contact path radii inside a bend.
    pub contact_path_radius_mm: Option<[f64; 3]>,
    pub required_speeds: [f64; 3],
}

impl ModuleState {
    /// Evaluates kinematics and springs at the body center, and tilt from
    /// the poses at the front and rear ends (clamped to the network).
    pub fn at(network: &PipeNetwork, s: f64, v_center: f64, params: &RobotParams) -> Result<Self, RobotError> {
        let pose = network.pose_at(s)?;
        let half = params.robot_length_mm / 2.0;
        let total = network.total_length();
        let front = network.pose_at((s + half).min(total))?;
        let rear = network.pose_at((s - half).max(0.0))?;

        let compressions_mm = spring_compression(&pose, params)?;
        let tilt_deg = module_tilt(&spring_compression(&front, params)?, &spring_compression(&rear, params)?, params)?;
        let required_speeds = required_track_speeds(&pose, v_center, params)?;
        let contact_path_radius_mm = match (pose.bend_radius(), module_bend_cosines(&pose, params)) {
            (Some(r), Some(c)) => Some(c.map(|c| r + params.contact_radius_mm * c)),
            _ => None,
        };
        Ok(ModuleState { compressions_mm, tilt_deg, contact_path_radius_mm, required_speeds })
    }
}
