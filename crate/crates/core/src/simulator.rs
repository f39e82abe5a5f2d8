//! Quasi-static traversal of a pipe network.
//!
//! Every step treats the robot as being in equilibrium: the pipe geometry at
//! the body center fixes the speed each track must run at, each track resists
//! any mismatch with a stiff linear slip law plus a drag torque proportional
//! to its wall force, and the differential settles at the speeds where all
//! three tracks carry the same torque. The body then advances at the mean
//! track speed.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use crate::differential::{solve_torque_balance, DifferentialError, LinearSlipLoad, SolverOptions, TransmissionConfig};
use crate::geometry::{GeometryError, PipeNetwork, SegmentSpec};
use crate::robot::{module_tilt, required_track_speeds, spring_compression, RobotError, RobotParams};

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    InvalidScenario {
        field: &'static str,
        reason: &'static str,
    },
    Robot(RobotError),
    Differential(DifferentialError),
    Geometry(GeometryError),
    /// The body center has reached the end of the network.
    EndOfNetwork,
    /// `max_time` elapsed first; carries everything simulated so far.
    MaxTimeExceeded(Box<RunOutput>),
    EmptySweep,
    ZeroReference,
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::InvalidScenario { field, reason } => write!(f, "{field}: {reason}"),
            SimError::Robot(e) => write!(f, "{e}"),
            SimError::Differential(e) => write!(f, "{e}"),
            SimError::Geometry(e) => write!(f, "{e}"),
            SimError::EndOfNetwork => f.write_str("end of network reached"),
            SimError::MaxTimeExceeded(out) => write!(
                f,
                "robot did not finish within the time limit ({} steps, reached s = {} mm)",
                out.records.len(),
                out.summary.traversed_mm
            ),
            SimError::EmptySweep => f.write_str("orientation sweep needs at least one angle"),
            SimError::ZeroReference => f.write_str("percentage error against a zero reference"),
        }
    }
}

impl core::error::Error for SimError {}

impl From<RobotError> for SimError {
    fn from(e: RobotError) -> Self {
        match e {
            RobotError::Geometry(g) => SimError::Geometry(g),
            other => SimError::Robot(other),
        }
    }
}

impl From<DifferentialError> for SimError {
    fn from(e: DifferentialError) -> Self {
        SimError::Differential(e)
    }
}

impl From<GeometryError> for SimError {
    fn from(e: GeometryError) -> Self {
        SimError::Geometry(e)
    }
}

/// Default slip stiffness, N·m of resisting torque per mm/s of track slip.
pub const DEFAULT_SLIP_STIFFNESS: f64 = 1.0e4;
/// Default ratio of track drag force to wall force.
pub const DEFAULT_TRACK_DRAG: f64 = 0.02;
pub const DEFAULT_DT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: PipeNetwork,
    pub robot: RobotParams,
    pub transmission: TransmissionConfig,
    /// Constant motor speed, rad/s.
    pub input_speed: f64,
    /// N·m per mm/s of slip.
    pub slip_stiffness: f64,
    /// Drag force per unit wall force on each track.
    pub track_drag: f64,
    pub dt: f64,
    pub max_time: f64,
    pub solver: SolverOptions,
}

impl Scenario {
    /// Scenario with default stiffness, drag, step and solver settings.
    pub fn new(
        network: PipeNetwork,
        robot: RobotParams,
        transmission: TransmissionConfig,
        input_speed: f64,
        max_time: f64,
    ) -> Self {
        Scenario {
            network,
            robot,
            transmission,
            input_speed,
            slip_stiffness: DEFAULT_SLIP_STIFFNESS,
            track_drag: DEFAULT_TRACK_DRAG,
            dt: DEFAULT_DT,
            max_time,
            solver: SolverOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |field, reason| Err(SimError::InvalidScenario { field, reason });
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt", "must be positive");
        }
        if !(self.max_time.is_finite() && self.max_time >= 0.0) {
            return bad("max_time", "must be non-negative");
        }
        if !(self.slip_stiffness.is_finite() && self.slip_stiffness > 0.0) {
            return bad("slip_stiffness", "must be positive");
        }
        if !(self.track_drag.is_finite() && self.track_drag >= 0.0) {
            return bad("track_drag", "must be non-negative");
        }
        if !(self.input_speed.is_finite() && self.input_speed >= 0.0) {
            return bad("input_speed", "must be non-negative");
        }
        if !(self.solver.tol.is_finite() && self.solver.tol > 0.0) {
            return bad("solver.tol", "must be positive");
        }
        self.robot.validate()?;
        let h = self.robot.contact_radius_mm;
        for seg in self.network.segments() {
            if let SegmentSpec::Bend { bend_radius_mm, .. } = *seg {
                if bend_radius_mm.is_nan() || bend_radius_mm <= h {
                    return Err(RobotError::DegenerateBend { bend_radius_mm, contact_radius_mm: h }.into());
                }
            }
        }
        if h > self.network.inner_radius() {
            return bad("robot.contact_radius", "exceeds the pipe inner radius");
        }
        Ok(())
    }

    /// Body speed along the centerline, mm/s.
    pub fn centerline_speed(&self) -> f64 {
        self.transmission.mean_output_speed(self.input_speed) * self.robot.sprocket_radius_mm
    }

    pub fn with_orientation(&self, orientation_deg: f64) -> Self {
        Scenario { robot: self.robot.with_orientation(orientation_deg), ..self.clone() }
    }

    /// Drag torque on each track's sprocket, N·m.
    fn drag_torques(&self, compressions_mm: &[f64; 3]) -> [f64; 3] {
        let per_module = f64::from(self.robot.springs_per_robot) / 3.0;
        let r_s = self.robot.sprocket_radius_mm / 1000.0;
        compressions_mm.map(|x| self.track_drag * per_module * self.robot.spring_k_n_per_m * (x / 1000.0) * r_s)
    }
}

/// One quasi-static step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRecord {
    pub t: f64,
    pub s: f64,
    pub segment_index: usize,
    /// Actual track surface speeds, mm/s.
    pub track_speeds: [f64; 3],
    pub required_speeds: [f64; 3],
    /// `track_speeds - required_speeds`.
    pub slip: [f64; 3],
    pub compressions: [f64; 3],
    /// Torque shared by the three outputs, N·m.
    pub common_torque: f64,
}

impl SimRecord {
    pub fn mean_track_speed(&self) -> f64 {
        self.track_speeds.iter().sum::<f64>() / 3.0
    }

    pub fn max_abs_slip(&self) -> f64 {
        self.slip.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    pub step_index: u64,
    /// Arc length of the body center, mm.
    pub s: f64,
}

impl SimState {
    pub fn start() -> Self {
        SimState { step_index: 0, s: 0.0 }
    }

    pub fn time(&self, dt: f64) -> f64 {
        self.step_index as f64 * dt
    }
}

/// Solves the equilibrium at `state` and advances the body by one `dt`.
pub fn step(scenario: &Scenario, state: &SimState) -> Result<(SimRecord, SimState), SimError> {
    let network = &scenario.network;
    let robot = &scenario.robot;
    if state.s >= network.total_length() {
        return Err(SimError::EndOfNetwork);
    }
    let pose = network.pose_at(state.s)?;
    let v_center = scenario.centerline_speed();
    let required = required_track_speeds(&pose, v_center, robot)?;
    let compressions = spring_compression(&pose, robot)?;

    let half = robot.robot_length_mm / 2.0;
    let front = network.pose_at((state.s + half).min(network.total_length()))?;
    let rear = network.pose_at((state.s - half).max(0.0))?;
    module_tilt(&spring_compression(&front, robot)?, &spring_compression(&rear, robot)?, robot)?;

    let drag = scenario.drag_torques(&compressions);
    let r_s = robot.sprocket_radius_mm;
    let mut loads = [LinearSlipLoad::new(1.0, 1.0, 0.0)?; 3];
    for j in 0..3 {
        loads[j] = LinearSlipLoad::with_offset(scenario.slip_stiffness, r_s, required[j], drag[j])?;
    }
    let balance = solve_torque_balance(scenario.input_speed, &loads, &scenario.transmission, &scenario.solver)?;

    let track_speeds = balance.output_speeds.map(|w| w * r_s);
    let slip = [0, 1, 2].map(|j| track_speeds[j] - required[j]);
    let record = SimRecord {
        t: state.time(scenario.dt),
        s: state.s,
        segment_index: pose.segment_index,
        track_speeds,
        required_speeds: required,
        slip,
        compressions,
        common_torque: balance.common_torque,
    };
    let next = SimState { step_index: state.step_index + 1, s: state.s + record.mean_track_speed() * scenario.dt };
    Ok((record, next))
}

/// Absolute percentage error of `measured` against `theoretical`.
pub fn ape(measured: f64, theoretical: f64) -> Result<f64, SimError> {
    if theoretical == 0.0 {
        return Err(SimError::ZeroReference);
    }
    Ok(100.0 * (measured - theoretical).abs() / theoretical.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSummary {
    pub index: usize,
    pub is_bend: bool,
    /// When the body center entered and left the segment; `None` if it never did.
    pub entry_time: Option<f64>,
    pub exit_time: Option<f64>,
    pub samples: usize,
    /// Mean simulated track speeds over the segment's records, mm/s.
    pub mean_track_speeds: Option<[f64; 3]>,
    /// Closed-form required speeds for the segment, mm/s.
    pub analytic_speeds: [f64; 3],
    pub ape_percent: Option<[f64; 3]>,
}

impl SegmentSummary {
    pub fn duration(&self) -> Option<f64> {
        Some(self.exit_time? - self.entry_time?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub segments: Vec<SegmentSummary>,
    /// Time the body center reached the end of the network.
    pub finish_time: Option<f64>,
    pub max_abs_slip: f64,
    pub max_compression: f64,
    /// Arc length covered by the body center, mm.
    pub traversed_mm: f64,
    /// Traversed length minus the robot's own length, mm.
    pub total_distance_mm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<SimRecord>,
    pub summary: SimSummary,
}

fn summarize(
    scenario: &Scenario,
    records: &[SimRecord],
    crossings: &[f64],
    finish_time: Option<f64>,
    final_s: f64,
) -> Result<SimSummary, SimError> {
    let network = &scenario.network;
    let v_center = scenario.centerline_speed();
    let n = network.segments().len();
    let mut sums = alloc::vec![([0.0; 3], 0usize); n];
    let mut max_abs_slip: f64 = 0.0;
    let mut max_compression: f64 = 0.0;
    for r in records {
        let (sum, count) = &mut sums[r.segment_index];
        for (acc, v) in sum.iter_mut().zip(r.track_speeds) {
            *acc += v;
        }
        *count += 1;
        max_abs_slip = max_abs_slip.max(r.max_abs_slip());
        max_compression = r.compressions.iter().fold(max_compression, |m, &x| m.max(x));
    }

    let mut segments = Vec::with_capacity(n);
    for (index, (sum, samples)) in sums.into_iter().enumerate() {
        let (start, end) = network.segment_bounds(index);
        let mid = network.pose_at(0.5 * (start + end))?;
        let analytic = required_track_speeds(&mid, v_center, &scenario.robot)?;
        let entry_time = if index == 0 { Some(0.0) } else { crossings.get(index - 1).copied() };
        let exit_time = if index + 1 == n { finish_time } else { crossings.get(index).copied() };
        let mean = (samples > 0).then(|| sum.map(|v| v / samples as f64));
        let ape_percent = match mean {
            Some(m) if analytic.iter().all(|&a| a != 0.0) => {
                Some([ape(m[0], analytic[0])?, ape(m[1], analytic[1])?, ape(m[2], analytic[2])?])
            }
            _ => None,
        };
        segments.push(SegmentSummary {
            index,
            is_bend: network.segments()[index].is_bend(),
            entry_time,
            exit_time,
            samples,
            mean_track_speeds: mean,
            analytic_speeds: analytic,
            ape_percent,
        });
    }
    Ok(SimSummary {
        segments,
        finish_time,
        max_abs_slip,
        max_compression,
        traversed_mm: final_s,
        total_distance_mm: (final_s - scenario.robot.robot_length_mm).max(0.0),
    })
}

/// Steps from the start of the network until the body center reaches its end.
///
/// Boundary crossing times (and the finish time) are interpolated linearly
/// within the step that crosses them.
pub fn run(scenario: &Scenario) -> Result<RunOutput, SimError> {
    scenario.validate()?;
    let total = scenario.network.total_length();
    let boundaries = scenario.network.cumulative_lengths();
    let interior = &boundaries[..boundaries.len() - 1];

    let mut records = Vec::new();
    let mut crossings = Vec::with_capacity(interior.len());
    let mut state = SimState::start();
    let mut finish_time = None;

    while finish_time.is_none() {
        let t = state.time(scenario.dt);
        if t >= scenario.max_time {
            let summary = summarize(scenario, &records, &crossings, None, state.s)?;
            return Err(SimError::MaxTimeExceeded(Box::new(RunOutput { records, summary })));
        }
        let (record, next) = step(scenario, &state)?;
        let advance = next.s - state.s;
        let at = |b: f64| t + (b - state.s) / advance * scenario.dt;
        while let Some(&b) = interior.get(crossings.len()) {
            if b < next.s {
                crossings.push(at(b));
            } else {
                break;
            }
        }
        if next.s >= total {
            finish_time = Some(at(total));
        }
        records.push(record);
        state = next;
    }

    let final_s = state.s.min(total);
    let summary = summarize(scenario, &records, &crossings, finish_time, final_s)?;
    Ok(RunOutput { records, summary })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientationRun {
    pub orientation_deg: f64,
    pub outcome: Result<RunOutput, SimError>,
}

/// Runs the scenario once per orientation. A failing orientation is recorded
/// and the sweep continues.
pub fn sweep_orientation(scenario: &Scenario, orientations_deg: &[f64]) -> Result<Vec<OrientationRun>, SimError> {
    if orientations_deg.is_empty() {
        return Err(SimError::EmptySweep);
    }
    Ok(orientations_deg
        .iter()
        .map(|&theta| OrientationRun { orientation_deg: theta, outcome: run(&scenario.with_orientation(theta)) })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StartPose;

    fn scenario(segments: &[SegmentSpec]) -> Scenario {
        let network = PipeNetwork::build(segments, 77.0, StartPose::default()).unwrap();
        // r_s = 20 mm, g1 g2 = 1, 2.5 rad/s → 50 mm/s
        Scenario::new(network, RobotParams::default(), TransmissionConfig::default(), 2.5, 600.0)
    }

    #[test]
    fn ape_values() {
        assert!((ape(39.0, 40.0).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(ape(7.25, 7.25).unwrap(), 0.0);
        assert_eq!(ape(33.62, 33.62).unwrap(), 0.0);
        assert_eq!(ape(-3.0, -4.0).unwrap(), 25.0);
        assert_eq!(ape(1.0, 0.0), Err(SimError::ZeroReference));
    }

    #[test]
    fn straight_step_has_no_slip() {
        let sc = scenario(&[SegmentSpec::straight(500.0)]);
        for theta in [0.0, 37.0, 200.0] {
            let sc = sc.with_orientation(theta);
            let (rec, next) = step(&sc, &SimState::start()).unwrap();
            for j in 0..3 {
                assert!((rec.track_speeds[j] - 50.0).abs() < 1e-9);
                assert!(rec.slip[j].abs() < 1e-9);
            }
            assert!((next.s - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn bend_step_follows_path_ratio() {
        let sc = scenario(&[SegmentSpec::bend(300.0, 90.0, 0.0)]);
        let (rec, _) = step(&sc, &SimState { step_index: 0, s: 200.0 }).unwrap();
        let expected = [350.0, 275.0, 275.0].map(|r| 50.0 * r / 300.0);
        for j in 0..3 {
            assert!((rec.track_speeds[j] - expected[j]).abs() < 1e-6);
        }
        assert!(rec.max_abs_slip() < 1e-6);
    }

    #[test]
    fn step_at_end_signals_completion() {
        let sc = scenario(&[SegmentSpec::straight(100.0)]);
        let end = SimState { step_index: 9, s: 100.0 };
        assert_eq!(step(&sc, &end), Err(SimError::EndOfNetwork));
    }

    #[test]
    fn zero_time_budget() {
        let mut sc = scenario(&[SegmentSpec::straight(100.0)]);
        sc.max_time = 0.0;
        match run(&sc) {
            Err(SimError::MaxTimeExceeded(out)) => assert!(out.records.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn straight_finish_time() {
        let sc = scenario(&[SegmentSpec::straight(333.0)]);
        let out = run(&sc).unwrap();
        let t = out.summary.finish_time.unwrap();
        assert!((t - 333.0 / 50.0).abs() <= sc.dt);
        assert_eq!(out.summary.traversed_mm, 333.0);
        assert!((out.summary.total_distance_mm - 133.0).abs() < 1e-9);
    }

    #[test]
    fn drag_torques_scale_with_compression() {
        let sc = scenario(&[SegmentSpec::straight(100.0)]);
        // 0.02 * 4 springs * 1000 N/m * 0.008 m * 0.02 m
        let d = sc.drag_torques(&[8.0; 3]);
        assert!((d[0] - 0.02 * 4.0 * 1000.0 * 0.008 * 0.02).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let mut sc = scenario(&[SegmentSpec::straight(100.0)]);
        sc.dt = 0.0;
        assert!(matches!(sc.validate(), Err(SimError::InvalidScenario { field: "dt", .. })));
        let mut sc = scenario(&[SegmentSpec::straight(100.0)]);
        sc.slip_stiffness = -1.0;
        assert!(sc.validate().is_err());
        let mut sc = scenario(&[SegmentSpec::straight(100.0)]);
        sc.robot.contact_radius_mm = 80.0;
        assert!(sc.validate().is_err());
        let mut sc = scenario(&[SegmentSpec::bend(100.0, 90.0, 0.0)]);
        sc.robot.contact_radius_mm = 60.0;
        sc.validate().unwrap();
        let network = PipeNetwork::build(&[SegmentSpec::bend(100.0, 90.0, 0.0)], 99.0, StartPose::default()).unwrap();
        sc.network = network;
        sc.robot.contact_radius_mm = 99.0;
        assert!(sc.validate().is_ok());
    }

    #[test]
    fn sweep_needs_angles() {
        let sc = scenario(&[SegmentSpec::straight(10.0)]);
        assert_eq!(sweep_orientation(&sc, &[]), Err(SimError::EmptySweep));
        let runs = sweep_orientation(&sc, &[0.0, 45.0]).unwrap();
        assert_eq!(runs.len(), 2);
        assert!(runs.iter().all(|r| r.outcome.is_ok()));
    }
}
