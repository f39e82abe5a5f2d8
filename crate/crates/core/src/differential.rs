//! Single-input, three-output open differential.
//!
//! The train is three two-output differentials (stage 1) sharing the input,
//! followed by three two-input differentials (stage 2) that each drive one
//! track. Every differential obeys the same two rules: its carrier turns at
//! the average of its two side gears, and both side gears carry the same
//! torque.
//!
//! Side gears are indexed `(L1, R1, L2, R2, L3, R3)`. Stage-2 differential
//! `j` averages `R_j` and `L_{j+1}` (indices mod 3), so the pairing runs
//! around the ring: `R1–L2`, `R2–L3`, `R3–L1`.
//!
//! The composed train satisfies
//!
//! ```text
//! ring_i     = g1 * input_speed
//! L_i + R_i  = 2 * ring_i
//! output_j   = g2 * (R_j + L_{j+1}) / 2
//! mean(out)  = g1 * g2 * input_speed
//! ```
//!
//! and every output carries the same torque.

use core::fmt;

use crate::root::{bisect_increasing, Bracketing, RootError};

/// Index of each side gear in the six-element side-speed array.
pub const SIDE_GEAR_LABELS: [&str; 6] = ["L1", "R1", "L2", "R2", "L3", "R3"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DifferentialError {
    InvalidConfig(&'static str),
    InvalidTolerance(f64),
    /// Load curve `index` is not strictly increasing, so its inverse is undefined.
    NonMonotoneLoad {
        index: usize,
    },
    /// The common torque level could not be bracketed.
    NoBracket(RootError),
    /// Output speeds whose mean does not match the input; no side-gear state exists.
    InconsistentOutputs {
        mean_output: f64,
        expected: f64,
    },
}

impl fmt::Display for DifferentialError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DifferentialError::InvalidConfig(what) => write!(f, "invalid transmission config: {what}"),
            DifferentialError::InvalidTolerance(t) => write!(f, "tolerance must be positive and finite, got {t}"),
            DifferentialError::NonMonotoneLoad { index } => {
                write!(f, "load curve {index} is not strictly increasing")
            }
            DifferentialError::NoBracket(e) => write!(f, "torque balance not bracketed: {e}"),
            DifferentialError::InconsistentOutputs { mean_output, expected } => {
                write!(f, "mean output speed {mean_output} does not match {expected} required by the input")
            }
        }
    }
}

impl core::error::Error for DifferentialError {}

/// Gear ratios of the train.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionConfig {
    g1: f64,
    g2: f64,
    efficiency: f64,
}

impl TransmissionConfig {
    /// `g1` is input → ring gears, `g2` is stage-2 carrier → output.
    pub fn new(g1: f64, g2: f64, efficiency: f64) -> Result<Self, DifferentialError> {
        if !(g1.is_finite() && g1 > 0.0) {
            return Err(DifferentialError::InvalidConfig("g1 must be positive"));
        }
        if !(g2.is_finite() && g2 > 0.0) {
            return Err(DifferentialError::InvalidConfig("g2 must be positive"));
        }
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(DifferentialError::InvalidConfig("efficiency must lie in (0, 1]"));
        }
        Ok(TransmissionConfig { g1, g2, efficiency })
    }

    pub fn lossless(g1: f64, g2: f64) -> Result<Self, DifferentialError> {
        Self::new(g1, g2, 1.0)
    }

    pub fn g1(&self) -> f64 {
        self.g1
    }

    pub fn g2(&self) -> f64 {
        self.g2
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    /// Overall input → output speed ratio, `g1 * g2`.
    pub fn overall_ratio(&self) -> f64 {
        self.g1 * self.g2
    }

    /// Mean output speed imposed by `input_speed`.
    pub fn mean_output_speed(&self, input_speed: f64) -> f64 {
        self.overall_ratio() * input_speed
    }

    /// Input torque that holds every output at `output_torque`.
    pub fn input_torque_for(&self, output_torque: f64) -> f64 {
        3.0 * self.overall_ratio() * output_torque / self.efficiency
    }
}

impl Default for TransmissionConfig {
    fn default() -> Self {
        TransmissionConfig { g1: 1.0, g2: 1.0, efficiency: 1.0 }
    }
}

/// Output speeds when all three outputs see the same load (or none).
pub fn solve_free(input_speed: f64, config: &TransmissionConfig) -> [f64; 3] {
    [config.mean_output_speed(input_speed); 3]
}

/// Splits input torque equally across the three outputs.
///
/// Each output receives `efficiency * input_torque / (3 * g1 * g2)`, so that
/// output power equals `efficiency` times input power when the outputs turn
/// at `g1 * g2 * input_speed`.
pub fn torque_distribution(input_torque: f64, config: &TransmissionConfig) -> [f64; 3] {
    [config.efficiency * input_torque / (3.0 * config.overall_ratio()); 3]
}

/// Resistive torque seen by one output as a function of its speed.
///
/// Implementations must be strictly increasing in `speed`.
pub trait LoadCurve {
    fn torque(&self, speed: f64) -> f64;

    /// Inverse of [`LoadCurve::torque`].
    fn speed_for_torque(&self, torque: f64) -> Result<f64, DifferentialError>;
}

impl<L: LoadCurve + ?Sized> LoadCurve for &L {
    fn torque(&self, speed: f64) -> f64 {
        (**self).torque(speed)
    }

    fn speed_for_torque(&self, torque: f64) -> Result<f64, DifferentialError> {
        (**self).speed_for_torque(torque)
    }
}

/// `torque = stiffness * (speed * sprocket_radius - required_speed) + offset`.
///
/// The bracketed term is the track's surface-speed mismatch against the speed
/// the pipe geometry demands, so `stiffness` converts slip into resisting
/// torque. `offset` is a speed-independent drag torque.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSlipLoad {
    stiffness: f64,
    sprocket_radius: f64,
    required_speed: f64,
    offset: f64,
}

impl LinearSlipLoad {
    pub fn new(stiffness: f64, sprocket_radius: f64, required_speed: f64) -> Result<Self, DifferentialError> {
        Self::with_offset(stiffness, sprocket_radius, required_speed, 0.0)
    }

    pub fn with_offset(
        stiffness: f64,
        sprocket_radius: f64,
        required_speed: f64,
        offset: f64,
    ) -> Result<Self, DifferentialError> {
        if !(stiffness.is_finite() && stiffness > 0.0 && sprocket_radius.is_finite() && sprocket_radius > 0.0) {
            return Err(DifferentialError::NonMonotoneLoad { index: 0 });
        }
        if !(required_speed.is_finite() && offset.is_finite()) {
            return Err(DifferentialError::InvalidConfig("load parameters must be finite"));
        }
        Ok(LinearSlipLoad { stiffness, sprocket_radius, required_speed, offset })
    }

    pub fn stiffness(&self) -> f64 {
        self.stiffness
    }

    pub fn sprocket_radius(&self) -> f64 {
        self.sprocket_radius
    }

    pub fn required_speed(&self) -> f64 {
        self.required_speed
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl LoadCurve for LinearSlipLoad {
    fn torque(&self, speed: f64) -> f64 {
        self.stiffness * (speed * self.sprocket_radius - self.required_speed) + self.offset
    }

    fn speed_for_torque(&self, torque: f64) -> Result<f64, DifferentialError> {
        Ok(((torque - self.offset) / self.stiffness + self.required_speed) / self.sprocket_radius)
    }
}

/// Wraps an arbitrary increasing function; the inverse is found numerically.
///
/// `speed_scale` seeds the inverse search bracket `[-speed_scale, speed_scale]`.
pub struct MonotoneFn<F> {
    f: F,
    speed_scale: f64,
}

impl<F: Fn(f64) -> f64> MonotoneFn<F> {
    pub fn new(f: F, speed_scale: f64) -> Self {
        MonotoneFn { f, speed_scale: speed_scale.abs().max(f64::MIN_POSITIVE) }
    }
}

impl<F> fmt::Debug for MonotoneFn<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneFn").field("speed_scale", &self.speed_scale).finish_non_exhaustive()
    }
}

impl<F: Fn(f64) -> f64> LoadCurve for MonotoneFn<F> {
    fn torque(&self, speed: f64) -> f64 {
        (self.f)(speed)
    }

    fn speed_for_torque(&self, torque: f64) -> Result<f64, DifferentialError> {
        let opts = Bracketing { max_expansions: 200, ..Bracketing::default() };
        let root = bisect_increasing(|w| (self.f)(w) - torque, -self.speed_scale, self.speed_scale, &opts)
            .map_err(|_| DifferentialError::NonMonotoneLoad { index: 0 })?;
        Ok(root.x)
    }
}

/// Controls for [`solve_torque_balance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative tolerance on the mean-speed constraint.
    pub tol: f64,
    pub max_expansions: u32,
    pub max_iter: u32,
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions { tol, ..Self::default() }
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_expansions: 64, max_iter: 2_200 }
    }
}

/// Equilibrium of the train under three loads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorqueBalance {
    pub output_speeds: [f64; 3],
    pub common_torque: f64,
    pub iterations: u32,
}

impl TorqueBalance {
    pub fn mean_speed(&self) -> f64 {
        mean3(&self.output_speeds)
    }
}

fn mean3(v: &[f64; 3]) -> f64 {
    (v[0] + v[1] + v[2]) / 3.0
}

fn invert<L: LoadCurve>(load: &L, index: usize, torque: f64) -> Result<f64, DifferentialError> {
    match load.speed_for_torque(torque) {
        Ok(w) if w.is_finite() => Ok(w),
        Ok(_) | Err(DifferentialError::NonMonotoneLoad { .. }) => Err(DifferentialError::NonMonotoneLoad { index }),
        Err(e) => Err(e),
    }
}

/// Solves for the output speeds at which all three loads carry the same torque
/// and the outputs average to `g1 * g2 * input_speed`.
///
/// Each output speed is the inverse of its load curve at a shared torque
/// level; that level is found by bisection on the mean-speed residual.
/// Evaluating the loads at the mean speed brackets the root: at the smallest
/// of those torques every output is at or below the mean, at the largest
/// every output is at or above it.
pub fn solve_torque_balance<L: LoadCurve>(
    input_speed: f64,
    loads: &[L; 3],
    config: &TransmissionConfig,
    opts: &SolverOptions,
) -> Result<TorqueBalance, DifferentialError> {
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(DifferentialError::InvalidTolerance(opts.tol));
    }
    let target = config.mean_output_speed(input_speed);
    if !target.is_finite() {
        return Err(DifferentialError::InvalidConfig("input speed must be finite"));
    }

    let probe = target.abs().max(1.0) * 1e-3;
    let mut at_target = [0.0; 3];
    for (j, load) in loads.iter().enumerate() {
        let below = load.torque(target - probe);
        let above = load.torque(target + probe);
        if !(below.is_finite() && above.is_finite() && above > below) {
            return Err(DifferentialError::NonMonotoneLoad { index: j });
        }
        at_target[j] = load.torque(target);
    }

    let lo = at_target.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = at_target.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let speeds_at = |torque: f64| -> Result<[f64; 3], DifferentialError> {
        Ok([invert(&loads[0], 0, torque)?, invert(&loads[1], 1, torque)?, invert(&loads[2], 2, torque)?])
    };

    if lo == hi {
        return Ok(TorqueBalance { output_speeds: speeds_at(lo)?, common_torque: lo, iterations: 0 });
    }

    let scale = target.abs().max(f64::MIN_POSITIVE);
    let bracketing = Bracketing {
        ftol: opts.tol * scale,
        xtol_abs: 0.0,
        xtol_rel: 2.0 * f64::EPSILON,
        max_expansions: opts.max_expansions,
        max_iter: opts.max_iter,
    };
    let mut failure = None;
    let residual = |torque: f64| match speeds_at(torque) {
        Ok(w) => mean3(&w) - target,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let root = bisect_increasing(residual, lo, hi, &bracketing);
    if let Some(e) = failure {
        return Err(e);
    }
    let root = root.map_err(DifferentialError::NoBracket)?;
    Ok(TorqueBalance { output_speeds: speeds_at(root.x)?, common_torque: root.x, iterations: root.iterations })
}

/// Minimum-norm side-gear speeds consistent with the given outputs.
///
/// The six equations have rank five. Their null space is the internal
/// circulation `(+t, -t, +t, -t, +t, -t)`, in which every side gear spins
/// against its partner without moving any carrier. The returned state has
/// no circulation component.
pub fn internal_state(
    output_speeds: &[f64; 3],
    input_speed: f64,
    config: &TransmissionConfig,
    tol: f64,
) -> Result<[f64; 6], DifferentialError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(DifferentialError::InvalidTolerance(tol));
    }
    let expected = config.mean_output_speed(input_speed);
    let mean_output = mean3(output_speeds);
    let scale = expected.abs().max(output_speeds.iter().fold(0.0, |m, w| f64::max(m, w.abs())));
    if (mean_output - expected).abs() > tol * scale {
        return Err(DifferentialError::InconsistentOutputs { mean_output, expected });
    }

    let stage1 = 2.0 * config.g1 * input_speed;
    let stage2 = output_speeds.map(|w| 2.0 * w / config.g2);

    // Walk the ring starting from L1 = 0, then remove the circulation component.
    let mut side = [0.0; 6];
    for i in 0..3 {
        side[2 * i + 1] = stage1 - side[2 * i];
        if i < 2 {
            side[2 * i + 2] = stage2[i] - side[2 * i + 1];
        }
    }
    let circulation = (side[0] - side[1] + side[2] - side[3] + side[4] - side[5]) / 6.0;
    for (k, s) in side.iter_mut().enumerate() {
        if k % 2 == 0 {
            *s -= circulation;
        } else {
            *s += circulation;
        }
    }
    Ok(side)
}

/// Full kinematic and static state of the train at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionState {
    pub input_speed: f64,
    pub input_torque: f64,
    pub ring_speeds: [f64; 3],
    pub side_speeds: [f64; 6],
    pub output_speeds: [f64; 3],
    pub output_torques: [f64; 3],
}

impl TransmissionState {
    /// State of the unloaded or evenly loaded train.
    pub fn free(config: &TransmissionConfig, input_speed: f64, input_torque: f64) -> Self {
        let ring = config.g1 * input_speed;
        TransmissionState {
            input_speed,
            input_torque,
            ring_speeds: [ring; 3],
            side_speeds: [ring; 6],
            output_speeds: solve_free(input_speed, config),
            output_torques: torque_distribution(input_torque, config),
        }
    }

    /// Assembles the full state from a torque-balance solution.
    pub fn from_balance(
        config: &TransmissionConfig,
        input_speed: f64,
        balance: &TorqueBalance,
        tol: f64,
    ) -> Result<Self, DifferentialError> {
        let side_speeds = internal_state(&balance.output_speeds, input_speed, config, tol)?;
        Ok(TransmissionState {
            input_speed,
            input_torque: config.input_torque_for(balance.common_torque),
            ring_speeds: [config.g1 * input_speed; 3],
            side_speeds,
            output_speeds: balance.output_speeds,
            output_torques: [balance.common_torque; 3],
        })
    }

    /// Largest violation of the kinematic invariants, relative to the output speed scale.
    pub fn max_invariant_residual(&self, config: &TransmissionConfig) -> f64 {
        let ring = config.g1 * self.input_speed;
        let scale = self
            .output_speeds
            .iter()
            .chain(self.side_speeds.iter())
            .fold(ring.abs(), |m, w| m.max(w.abs()))
            .max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            worst = worst.max((self.ring_speeds[i] - ring).abs());
            worst =
                worst.max((self.side_speeds[2 * i] + self.side_speeds[2 * i + 1] - 2.0 * self.ring_speeds[i]).abs());
            let paired = self.side_speeds[2 * i + 1] + self.side_speeds[(2 * i + 2) % 6];
            worst = worst.max((self.output_speeds[i] - config.g2 * paired / 2.0).abs());
        }
        worst = worst.max((mean3(&self.output_speeds) - config.mean_output_speed(self.input_speed)).abs());
        worst / scale
    }

    pub fn input_power(&self) -> f64 {
        self.input_speed * self.input_torque
    }

    pub fn output_power(&self) -> f64 {
        (0..3).map(|j| self.output_speeds[j] * self.output_torques[j]).sum()
    }
}

/// `efficiency * input power - output power`; zero for a consistent lossless state.
pub fn power_balance(state: &TransmissionState, config: &TransmissionConfig) -> f64 {
    config.efficiency * state.input_power() - state.output_power()
}
