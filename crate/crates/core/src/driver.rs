//! Simulated drivers: a delayed, noisy preview tracker that follows its own
//! target trajectory, with a head-glance precursor before its own lane
//! changes and a stiffened "resist" mode used to overrule the guidance.
//!
//! The preview law sets a steering-wheel angle command after the reaction
//! delay; the arms turn the gap between command and wheel into torque
//! through a spring-damper. Resisting stiffens the arms, so the driver holds
//! the wheel against the guidance without a faster (and delay-unstable) path
//! loop.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{SteeringState, VehicleState};
use crate::error::{Error, Result};
use crate::trajectory::{preview_point_errors, TrajectoryPlan};

/// Rate at which fresh torque noise is drawn, independent of the step size.
pub const NOISE_RATE_HZ: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriverParams {
    /// Wheel-angle command per m of preview lateral error (rad/m).
    pub gain_y: f64,
    /// Wheel-angle command per rad of preview heading error.
    pub gain_psi: f64,
    /// Arm stiffness between commanded and actual wheel angle (N m/rad).
    pub arm_stiffness: f64,
    /// Arm damping on the wheel rate (N m s/rad).
    pub arm_damping: f64,
    pub preview_t: f64,
    pub reaction_delay: f64,
    pub noise_std: f64,
    /// Arm stiffness multiplier while resisting the guidance.
    pub stiffen_factor: f64,
    /// Head-yaw onset ahead of the driver's own lane-change onset (s).
    pub glance_lead: f64,
    /// Peak normalized head yaw of a glance.
    pub glance_amplitude: f64,
    /// Head-yaw slew rate (1/s).
    pub head_rate: f64,
    /// Duration of the driver's own lane changes (s).
    pub lc_duration: f64,
}

impl Default for DriverParams {
    fn default() -> Self {
        Self {
            gain_y: 0.12,
            gain_psi: 2.4,
            arm_stiffness: 5.0,
            arm_damping: 0.6,
            preview_t: 1.0,
            reaction_delay: 0.2,
            noise_std: 0.3,
            stiffen_factor: 30.0,
            glance_lead: 1.0,
            glance_amplitude: 0.7,
            head_rate: 2.0,
            lc_duration: 6.0,
        }
    }
}

impl DriverParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gain_y", self.gain_y),
            ("gain_psi", self.gain_psi),
            ("arm_stiffness", self.arm_stiffness),
            ("arm_damping", self.arm_damping),
            ("preview_t", self.preview_t),
            ("reaction_delay", self.reaction_delay),
            ("noise_std", self.noise_std),
            ("glance_lead", self.glance_lead),
            ("glance_amplitude", self.glance_amplitude),
            ("head_rate", self.head_rate),
        ];
        for (name, v) in fields {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("driver {name} must be finite and non-negative, got {v}")));
            }
        }
        if !(self.stiffen_factor >= 1.0) {
            return Err(Error::Config(format!("stiffen_factor must be >= 1, got {}", self.stiffen_factor)));
        }
        if !(self.lc_duration > 0.0) {
            return Err(Error::Config("driver lc_duration must be positive".into()));
        }
        if self.glance_amplitude > 1.0 {
            return Err(Error::Config("glance_amplitude must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Stiffened arm impedance while `active`. Damping grows with the square
/// root of the stiffness gain, so co-contraction keeps the arm's damping ratio.
pub fn set_resist(p: DriverParams, active: bool) -> DriverParams {
    if !active {
        return p;
    }
    DriverParams {
        arm_stiffness: p.arm_stiffness * p.stiffen_factor,
        arm_damping: p.arm_damping * p.stiffen_factor.sqrt(),
        ..p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntentEvent {
    /// Road position where the driver starts steering into the target lane.
    pub trigger_x: f64,
    pub target_lane: usize,
    /// Follow the system's lane-change plan once the assist engages.
    #[serde(default = "yes")]
    pub comply_with_assist: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntentSchedule {
    pub events: Vec<IntentEvent>,
}

impl IntentSchedule {
    pub fn validate(&self, course_length: f64) -> Result<()> {
        for pair in self.events.windows(2) {
            if !(pair[1].trigger_x > pair[0].trigger_x) {
                return Err(Error::Config("intent trigger positions must be strictly increasing".into()));
            }
        }
        if let Some(e) = self.events.iter().find(|e| !(e.trigger_x >= 0.0 && e.trigger_x <= course_length)) {
            return Err(Error::Config(format!("intent trigger at {} m lies outside the course", e.trigger_x)));
        }
        Ok(())
    }
}

/// Undelayed wheel-angle command toward `own_target`.
pub fn steering_command(v: &VehicleState, own_target: &TrajectoryPlan, p: &DriverParams) -> f64 {
    let (e_y, e_psi) = preview_point_errors(v, own_target, p.preview_t);
    p.gain_y * e_y + p.gain_psi * e_psi
}

/// Arm torque for a wheel-angle command, without noise.
pub fn arm_torque(command: f64, s: &SteeringState, p: &DriverParams) -> f64 {
    p.arm_stiffness * (command - s.theta_sw) - p.arm_damping * s.theta_sw_dot
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DriverOutput {
    pub tau_driver: f64,
    pub head_yaw: f64,
}

/// Per-trial driver instance: delay line, noise stream and head state.
#[derive(Debug, Clone)]
pub struct Driver {
    params: DriverParams,
    dt: f64,
    resist: bool,
    delay: VecDeque<f64>,
    rng: ChaCha8Rng,
    noise_slot: Option<u64>,
    noise: f64,
    head: f64,
    steps: u64,
}

impl Driver {
    pub fn new(params: DriverParams, dt: f64, seed: u64) -> Result<Self> {
        params.validate()?;
        if !(dt > 0.0) {
            return Err(Error::Config("driver dt must be positive".into()));
        }
        let n = (params.reaction_delay / dt).round() as usize;
        Ok(Self {
            params,
            dt,
            resist: false,
            delay: std::iter::repeat(0.0).take(n).collect(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise_slot: None,
            noise: 0.0,
            head: 0.0,
            steps: 0,
        })
    }

    pub fn params(&self) -> &DriverParams {
        &self.params
    }

    pub fn set_resist(&mut self, active: bool) {
        self.resist = active;
    }

    pub fn is_resisting(&self) -> bool {
        self.resist
    }

    pub fn head_yaw(&self) -> f64 {
        self.head
    }

    fn draw_noise(&mut self) -> f64 {
        // index of the 60 Hz slot containing the current step
        let slot = ((self.steps as f64 * self.dt) * NOISE_RATE_HZ + 1e-9).floor() as u64;
        if self.noise_slot != Some(slot) {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            self.noise = z * self.params.noise_std;
            self.noise_slot = Some(slot);
        }
        self.noise
    }

    /// One step. `glance` is the head-yaw direction the driver is looking in:
    /// `+1` left, `-1` right, `0` ahead.
    pub fn step(&mut self, v: &VehicleState, s: &SteeringState, own_target: &TrajectoryPlan, glance: f64) -> DriverOutput {
        let p = set_resist(self.params, self.resist);
        let command = steering_command(v, own_target, &p);
        self.delay.push_back(command);
        let delayed = self.delay.pop_front().unwrap_or(command);
        let tau_driver = arm_torque(delayed, s, &p) + self.draw_noise();

        let target = if glance > 0.0 {
            self.params.glance_amplitude
        } else if glance < 0.0 {
            -self.params.glance_amplitude
        } else {
            0.0
        };
        let max_step = self.params.head_rate * self.dt;
        self.head += (target - self.head).clamp(-max_step, max_step);

        self.steps += 1;
        DriverOutput { tau_driver, head_yaw: self.head }
    }
}
