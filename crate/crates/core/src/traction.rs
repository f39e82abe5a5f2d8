//! Wall-pressing traction and the tractive effort needed to climb.
//!
//! All functions here take SI units: N/m, m, kg.

use crate::robot::{RobotParams, GRAVITY};

/// Friction force from `springs` springs of stiffness `k` compressed by `x`:
/// `f = springs * μ * k * x`.
pub fn traction_force(springs: f64, mu: f64, k_n_per_m: f64, x_m: f64) -> f64 {
    springs * mu * k_n_per_m * x_m
}

/// `TE = m g - springs * μ * k * x`.
///
/// Negative when the springs supply more friction than the weight to be lifted.
pub fn tractive_effort(mass_kg: f64, springs: f64, mu: f64, k_n_per_m: f64, x_m: f64) -> f64 {
    mass_kg * GRAVITY - traction_force(springs, mu, k_n_per_m, x_m)
}

/// Sprocket torque `τ = TE * r`.
pub fn sprocket_torque(tractive_effort_n: f64, sprocket_radius_m: f64) -> f64 {
    tractive_effort_n * sprocket_radius_m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Traction {
    pub traction_force_n: f64,
    pub tractive_effort_n: f64,
    pub torque_nm: f64,
}

impl RobotParams {
    /// Traction figures with every spring compressed by `compression_mm`.
    pub fn traction_at(&self, compression_mm: f64) -> Traction {
        let springs = f64::from(self.springs_per_robot);
        let x = compression_mm / 1000.0;
        let te = tractive_effort(self.mass_kg, springs, self.mu, self.spring_k_n_per_m, x);
        Traction {
            traction_force_n: traction_force(springs, self.mu, self.spring_k_n_per_m, x),
            tractive_effort_n: te,
            torque_nm: sprocket_torque(te, self.sprocket_radius_mm / 1000.0),
        }
    }

    /// Traction figures at the preload.
    pub fn traction(&self) -> Traction {
        self.traction_at(self.preload_mm)
    }
}
