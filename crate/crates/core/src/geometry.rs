//! Pipe centerline built from tangent-continuous straight and circular segments,
//! parameterized by arc length.
//!
//! Bend planes are chained: a bend with roll `0°` has its outward direction
//! at entry equal to the previous bend's outward direction at exit (or the
//! start reference for the first bend), so two consecutive zero-roll elbows
//! form a U. Non-zero roll rotates the outward direction right-handedly about
//! the entry tangent.
//!
//! Independently of the bend chain, every pose carries a body reference that
//! is parallel-transported (twist-free) from the start reference. A robot
//! that does not roll inside the pipe keeps a fixed angle to it.

use alloc::vec::Vec;
use core::fmt;

use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentSpec {
    Straight { length_mm: f64 },
    Bend { bend_radius_mm: f64, sweep_deg: f64, roll_deg: f64 },
}

impl SegmentSpec {
    pub fn straight(length_mm: f64) -> Self {
        SegmentSpec::Straight { length_mm }
    }

    pub fn bend(bend_radius_mm: f64, sweep_deg: f64, roll_deg: f64) -> Self {
        SegmentSpec::Bend { bend_radius_mm, sweep_deg, roll_deg }
    }

    pub fn arc_length(&self) -> f64 {
        match *self {
            SegmentSpec::Straight { length_mm } => length_mm,
            SegmentSpec::Bend { bend_radius_mm, sweep_deg, .. } => bend_radius_mm * sweep_deg.to_radians(),
        }
    }

    pub fn is_bend(&self) -> bool {
        matches!(self, SegmentSpec::Bend { .. })
    }

    fn check(&self, inner_radius: f64) -> Result<(), &'static str> {
        match *self {
            SegmentSpec::Straight { length_mm } => {
                if !(length_mm.is_finite() && length_mm > 0.0) {
                    return Err("straight length must be positive");
                }
            }
            SegmentSpec::Bend { bend_radius_mm, sweep_deg, roll_deg } => {
                if !(bend_radius_mm.is_finite() && bend_radius_mm > inner_radius) {
                    return Err("bend radius must exceed the pipe inner radius");
                }
                if !(sweep_deg > 0.0 && sweep_deg <= 180.0) {
                    return Err("sweep angle must lie in (0, 180] degrees");
                }
                if !roll_deg.is_finite() {
                    return Err("roll angle must be finite");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryError {
    EmptyNetwork,
    BadSegment { index: usize, reason: &'static str },
    BadInnerRadius(f64),
    BadStartPose,
    OutOfRange { s: f64, total: f64 },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::EmptyNetwork => f.write_str("pipe network has no segments"),
            GeometryError::BadSegment { index, reason } => write!(f, "segment {index}: {reason}"),
            GeometryError::BadInnerRadius(r) => write!(f, "inner radius must be positive, got {r}"),
            GeometryError::BadStartPose => f.write_str("start tangent and reference must be non-zero and not parallel"),
            GeometryError::OutOfRange { s, total } => {
                write!(f, "arc length {s} mm outside network of length {total} mm")
            }
        }
    }
}

impl core::error::Error for GeometryError {}

/// Where the centerline begins and how it is oriented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartPose {
    pub position: Vec3,
    pub tangent: Vec3,
    /// Reference normal for the first bend; need not be exactly perpendicular to `tangent`.
    pub reference: Vec3,
}

impl Default for StartPose {
    /// Origin, heading up `+z`, first bend outward along `+x`.
    fn default() -> Self {
        StartPose { position: Vec3::ZERO, tangent: Vec3::Z, reference: Vec3::X }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterlinePose {
    pub position: Vec3,
    pub tangent: Vec3,
    /// Unit vector from the bend center to the centerline; `None` on straights.
    pub bend_outward: Option<Vec3>,
    /// Body reference normal, parallel-transported along the centerline.
    pub reference: Vec3,
    /// `0` on straights, `1 / R` in bends.
    pub curvature: f64,
    pub segment_index: usize,
}

impl CenterlinePose {
    pub fn bend_radius(&self) -> Option<f64> {
        (self.curvature > 0.0).then(|| 1.0 / self.curvature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frame {
    start: Vec3,
    tangent: Vec3,
    reference: Vec3,
    body: Vec3,
}

/// Carries a normal through a bend: the binormal `tangent × outward` is fixed,
/// so the normal keeps its components along (outward, binormal).
fn transport(normal: Vec3, entry_tangent: Vec3, entry_outward: Vec3, outward: Vec3) -> Vec3 {
    let binormal = entry_tangent.cross(entry_outward);
    outward * normal.dot(entry_outward) + binormal * normal.dot(binormal)
}

/// Orthonormal frame with `reference` made perpendicular to `tangent`.
fn orthonormal(tangent: Vec3, reference: Vec3) -> Option<(Vec3, Vec3)> {
    let t = tangent.normalized()?;
    let n = (reference - t * reference.dot(t)).normalized()?;
    Some((t, n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipeNetwork {
    segments: Vec<SegmentSpec>,
    frames: Vec<Frame>,
    inner_radius: f64,
    cumulative: Vec<f64>,
    start: StartPose,
}

impl PipeNetwork {
    pub fn build(segments: &[SegmentSpec], inner_radius: f64, start: StartPose) -> Result<Self, GeometryError> {
        if segments.is_empty() {
            return Err(GeometryError::EmptyNetwork);
        }
        if !(inner_radius.is_finite() && inner_radius > 0.0) {
            return Err(GeometryError::BadInnerRadius(inner_radius));
        }
        for (index, seg) in segments.iter().enumerate() {
            seg.check(inner_radius).map_err(|reason| GeometryError::BadSegment { index, reason })?;
        }
        let (mut tangent, mut reference) =
            orthonormal(start.tangent, start.reference).ok_or(GeometryError::BadStartPose)?;
        let mut position = start.position;
        let mut body = reference;

        let mut frames = Vec::with_capacity(segments.len());
        let mut cumulative = Vec::with_capacity(segments.len());
        let mut total = 0.0;
        for seg in segments {
            frames.push(Frame { start: position, tangent, reference, body });
            let len = seg.arc_length();
            match *seg {
                SegmentSpec::Straight { .. } => {
                    position = position + tangent * len;
                }
                SegmentSpec::Bend { bend_radius_mm: r, sweep_deg, roll_deg } => {
                    let outward = reference.rotated_about(tangent, roll_deg.to_radians());
                    let center = position - outward * r;
                    let phi = sweep_deg.to_radians();
                    let (s, c) = (libm::sin(phi), libm::cos(phi));
                    position = center + (outward * c + tangent * s) * r;
                    let exit_tangent = tangent * c - outward * s;
                    let exit_outward = outward * c + tangent * s;
                    body = transport(body, tangent, outward, exit_outward);
                    (tangent, reference) =
                        orthonormal(exit_tangent, exit_outward).ok_or(GeometryError::BadStartPose)?;
                    body = orthonormal(tangent, body).ok_or(GeometryError::BadStartPose)?.1;
                }
            }
            total += len;
            cumulative.push(total);
        }
        Ok(PipeNetwork { segments: segments.to_vec(), frames, inner_radius, cumulative, start })
    }

    pub fn segments(&self) -> &[SegmentSpec] {
        &self.segments
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn start_pose(&self) -> &StartPose {
        &self.start
    }

    /// Arc length at the end of each segment.
    pub fn cumulative_lengths(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn total_length(&self) -> f64 {
        *self.cumulative.last().expect("network is never empty")
    }

    /// `(start, end)` arc lengths of segment `index`.
    pub fn segment_bounds(&self, index: usize) -> (f64, f64) {
        let start = if index == 0 { 0.0 } else { self.cumulative[index - 1] };
        (start, self.cumulative[index])
    }

    /// Index of the segment containing `s`; a boundary belongs to the segment it ends.
    pub fn segment_at(&self, s: f64) -> Result<usize, GeometryError> {
        let total = self.total_length();
        if !(0.0..=total).contains(&s) {
            return Err(GeometryError::OutOfRange { s, total });
        }
        Ok(self.cumulative.partition_point(|&end| end < s).min(self.segments.len() - 1))
    }

    pub fn pose_at(&self, s: f64) -> Result<CenterlinePose, GeometryError> {
        let index = self.segment_at(s)?;
        let frame = &self.frames[index];
        let local = s - self.segment_bounds(index).0;
        Ok(match self.segments[index] {
            SegmentSpec::Straight { .. } => CenterlinePose {
                position: frame.start + frame.tangent * local,
                tangent: frame.tangent,
                bend_outward: None,
                reference: frame.body,
                curvature: 0.0,
                segment_index: index,
            },
            SegmentSpec::Bend { bend_radius_mm: r, roll_deg, .. } => {
                let outward0 = frame.reference.rotated_about(frame.tangent, roll_deg.to_radians());
                let center = frame.start - outward0 * r;
                let phi = local / r;
                let (sn, cs) = (libm::sin(phi), libm::cos(phi));
                let outward = outward0 * cs + frame.tangent * sn;
                let reference = transport(frame.body, frame.tangent, outward0, outward);
                CenterlinePose {
                    position: center + outward * r,
                    tangent: frame.tangent * cs - outward0 * sn,
                    bend_outward: Some(outward),
                    reference,
                    curvature: 1.0 / r,
                    segment_index: index,
                }
            }
        })
    }
}
