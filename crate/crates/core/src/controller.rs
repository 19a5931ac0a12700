//! Haptic guidance torque: instruction, estimated driver torque and the
//! applied torque after authority gain, strength scaling and saturation.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ColumnParams, SteeringState, VehicleParams};
use crate::error::{Error, Result};
use crate::scalar::{clamp, Real};
use crate::trajectory::PreviewErrors;

/// Gains of the preview-point driver-torque estimate.
///
/// The instruction torque subtracts the estimate, so with the lateral error
/// measured as target minus vehicle a stabilising set has `k_y < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerGains<T = f64> {
    pub k_y: T,
    pub k_yd: T,
    pub k_theta: T,
    pub k_alpha: T,
}

impl<T: Real> Default for ControllerGains<T> {
    fn default() -> Self {
        Self { k_y: T::lit(-12.0), k_yd: T::lit(30.0), k_theta: T::lit(24.0), k_alpha: T::lit(4.0) }
    }
}

/// Haptic torque strength of a trial condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    Manual,
    Strong,
    Weak,
}

impl Strength {
    /// Scaling applied on top of the authority gain.
    pub fn factor<T: Real>(self) -> T {
        match self {
            Strength::Manual => T::zero(),
            Strength::Strong => T::one(),
            Strength::Weak => T::lit(0.4),
        }
    }
}

/// Which signal feeds the third term of the driver-torque estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThirdTerm {
    #[default]
    SteerAngle,
    HeadingError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig<T = f64> {
    pub gains: ControllerGains<T>,
    /// Saturation of the applied haptic torque (N m).
    pub tau_max: T,
    /// Use the reference steering acceleration term; `false` zeroes it.
    pub reference_acceleration: bool,
    /// Scale of the disturbance compensation relative to the plant load model.
    pub disturbance_match: T,
    pub third_term: ThirdTerm,
}

impl<T: Real> Default for ControllerConfig<T> {
    fn default() -> Self {
        Self {
            gains: ControllerGains::default(),
            tau_max: T::lit(5.0),
            reference_acceleration: true,
            disturbance_match: T::one(),
            third_term: ThirdTerm::SteerAngle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TorqueBreakdown<T = f64> {
    pub tau_hapi: T,
    pub tau_dr_hat: T,
    pub tau_dis_hat: T,
    pub tau_hapa: T,
}

/// `K_y e_y + K_yd ė_θ + K_θ θ_sw + K_α α`.
pub fn estimate_driver_torque<T: Real>(e: &PreviewErrors<T>, theta_sw: T, alpha: T, g: &ControllerGains<T>) -> T {
    g.k_y * e.e_y + g.k_yd * e.e_theta_dot + g.k_theta * theta_sw + g.k_alpha * alpha
}

/// `J θ̈_ref + B θ̇ + K θ − τ'_dr + τ̂_dis`.
pub fn guidance_instruction<T: Real>(
    s: &SteeringState<T>,
    theta_ref_ddot: T,
    tau_dr_hat: T,
    tau_dis_hat: T,
    params: &ColumnParams<T>,
) -> T {
    params.j_eq * theta_ref_ddot + params.b_eq * s.theta_sw_dot + params.k_fz * s.theta_sw - tau_dr_hat + tau_dis_hat
}

/// Applied torque: `strength · K_h · τ_hapi`, saturated to `±tau_max`.
pub fn actual_haptic_torque<T: Real>(tau_hapi: T, k_h: T, strength: Strength, tau_max: T) -> Result<T> {
    if !(k_h >= T::zero() && k_h <= T::one()) {
        return Err(Error::Contract(format!("K_h = {k_h} outside [0, 1]")));
    }
    let scaled = strength.factor::<T>() * k_h * tau_hapi;
    Ok(clamp(scaled, -tau_max, tau_max))
}

/// Per-simulation controller: holds the configuration and the reference
/// steering-angle history used for the acceleration term.
#[derive(Debug, Clone)]
pub struct HapticController<T = f64> {
    pub config: ControllerConfig<T>,
    dt: T,
    theta_ref_history: [Option<T>; 2],
}

impl<T: Real> HapticController<T> {
    pub fn new(config: ControllerConfig<T>, dt: T) -> Self {
        Self { config, dt, theta_ref_history: [None, None] }
    }

    /// Second backward difference of the reference wheel angle. The history
    /// is dropped when the plan changes.
    fn reference_acceleration(&mut self, theta_ref: T, plan_changed: bool) -> T {
        if plan_changed {
            self.theta_ref_history = [None, None];
        }
        let acc = match self.theta_ref_history {
            [Some(prev), Some(prev2)] => (theta_ref - prev * T::lit(2.0) + prev2) / (self.dt * self.dt),
            _ => T::zero(),
        };
        self.theta_ref_history = [Some(theta_ref), self.theta_ref_history[0]];
        if self.config.reference_acceleration {
            acc
        } else {
            T::zero()
        }
    }

    /// Reference wheel angle holding the path curvature `kappa` at speed `v_x`.
    pub fn reference_wheel_angle(vehicle: &VehicleParams<T>, v_x: T, kappa: T) -> T {
        vehicle.steer_ratio * vehicle.steady_state_steer(v_x, kappa)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn compute(
        &mut self,
        s: &SteeringState<T>,
        e: &PreviewErrors<T>,
        alpha: T,
        theta_ref: T,
        plan_changed: bool,
        k_h: T,
        strength: Strength,
        column: &ColumnParams<T>,
    ) -> Result<TorqueBreakdown<T>> {
        let theta_ddot = self.reference_acceleration(theta_ref, plan_changed);
        let third = match self.config.third_term {
            ThirdTerm::SteerAngle => s.theta_sw,
            ThirdTerm::HeadingError => e.e_theta,
        };
        let tau_dr_hat = estimate_driver_torque(e, third, alpha, &self.config.gains);
        let tau_dis_hat = self.config.disturbance_match * column.load_torque(s.theta_sw_dot, alpha);
        let tau_hapi = guidance_instruction(s, theta_ddot, tau_dr_hat, tau_dis_hat, column);
        let tau_hapa = actual_haptic_torque(tau_hapi, k_h, strength, self.config.tau_max)?;
        Ok(TorqueBreakdown { tau_hapi, tau_dr_hat, tau_dis_hat, tau_hapa })
    }
}
