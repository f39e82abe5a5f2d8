//! Quasi-static model of an in-pipe climbing robot whose three tracks are
//! driven from one motor through a three-output open differential.
//!
//! The differential forces the three track speeds to average to a fixed
//! multiple of the motor speed while sharing one torque. Inside a bend the
//! outer track has farther to go than the inner ones; the equal-torque
//! equilibrium hands it exactly the extra speed it needs, so no track slips.
//!
//! * [`differential`]: gear-train speed averaging, torque sharing and
//!   the equilibrium solver.
//! * [`geometry`]: pipe centerlines built from straights and bends.
//! * [`dimensions`]: nominal pipe size and schedule lookup.
//! * [`robot`] and [`traction`]: module kinematics, springs and traction.
//! * [`simulator`]: time stepping through a network, with summaries.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod differential;
pub mod dimensions;
pub mod geometry;
pub mod robot;
pub mod root;
pub mod simulator;
pub mod traction;
mod vec3;

pub use differential::{
    internal_state, power_balance, solve_free, solve_torque_balance, torque_distribution, DifferentialError,
    LinearSlipLoad, LoadCurve, MonotoneFn, SolverOptions, TorqueBalance, TransmissionConfig, TransmissionState,
};
pub use dimensions::{pipe_inner_radius, DimensionError, DimensionTable, PipeDimensions};
pub use geometry::{CenterlinePose, GeometryError, PipeNetwork, SegmentSpec, StartPose};
pub use robot::{required_track_speeds, spring_compression, track_path_radius, ModuleState, RobotError, RobotParams};
pub use simulator::{
    ape, run, step, sweep_orientation, RunOutput, Scenario, SegmentSummary, SimError, SimRecord, SimState, SimSummary,
};
pub use traction::{sprocket_torque, traction_force, tractive_effort, Traction};
pub use vec3::Vec3;
