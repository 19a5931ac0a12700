//! Lateral vehicle dynamics (linear single-track model) and steering column.
//!
//! Coordinates: `x` along the road, `y` lateral and increasing to the left,
//! `psi` counter-clockwise. A positive steering-wheel angle steers left.
//!
//! Both integrators are semi-implicit Euler: rates are advanced first and the
//! updated rates drive the position update.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{clamp, Real};

/// Planar pose and lateral-dynamics state of the ego vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState<T = f64> {
    pub x: T,
    pub y: T,
    pub psi: T,
    pub v_x: T,
    pub v_y: T,
    pub r: T,
}

impl<T: Real> VehicleState<T> {
    /// Vehicle moving straight along the road at `v_x`.
    pub fn cruising(x: T, y: T, v_x: T) -> Self {
        Self { x, y, psi: T::zero(), v_x, v_y: T::zero(), r: T::zero() }
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.psi, self.v_x, self.v_y, self.r].iter().all(|v| v.is_finite())
    }

    /// Lateral velocity in the road frame.
    pub fn lateral_rate(&self) -> T {
        self.v_x * self.psi.sin() + self.v_y * self.psi.cos()
    }
}

/// Steering wheel angle and rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SteeringState<T = f64> {
    pub theta_sw: T,
    pub theta_sw_dot: T,
}

impl<T: Real> SteeringState<T> {
    pub fn is_finite(&self) -> bool {
        self.theta_sw.is_finite() && self.theta_sw_dot.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams<T = f64> {
    /// Mass (kg).
    pub m: T,
    /// Yaw inertia (kg m^2).
    pub i_z: T,
    /// CG to front axle (m).
    pub l_f: T,
    /// CG to rear axle (m).
    pub l_r: T,
    /// Front axle cornering stiffness (N/rad).
    pub c_f: T,
    /// Rear axle cornering stiffness (N/rad).
    pub c_r: T,
    /// Steering wheel angle per road-wheel angle.
    pub steer_ratio: T,
}

impl<T: Real> Default for VehicleParams<T> {
    fn default() -> Self {
        Self {
            m: T::lit(1500.0),
            i_z: T::lit(2500.0),
            l_f: T::lit(1.2),
            l_r: T::lit(1.6),
            c_f: T::lit(80_000.0),
            c_r: T::lit(80_000.0),
            steer_ratio: T::lit(16.0),
        }
    }
}

impl<T: Real> VehicleParams<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.m, self.i_z, self.l_f, self.l_r, self.c_f, self.c_r];
        if positive.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(Error::Config("vehicle parameters must be finite and strictly positive".into()));
        }
        if !(self.steer_ratio > T::one()) {
            return Err(Error::Config("steer_ratio must exceed 1".into()));
        }
        Ok(())
    }

    pub fn wheelbase(&self) -> T {
        self.l_f + self.l_r
    }

    /// Understeer gradient (rad per m/s^2) for axle cornering stiffnesses.
    pub fn understeer_gradient(&self) -> T {
        self.m * (self.l_r / self.c_f - self.l_f / self.c_r) / self.wheelbase()
    }

    /// Steady-state yaw rate for a constant road-wheel angle.
    pub fn steady_state_yaw_rate(&self, v_x: T, delta_f: T) -> T {
        v_x * delta_f / (self.wheelbase() + self.understeer_gradient() * v_x * v_x)
    }

    /// Road-wheel angle that holds a path of curvature `kappa` in steady state.
    pub fn steady_state_steer(&self, v_x: T, kappa: T) -> T {
        (self.wheelbase() + self.understeer_gradient() * v_x * v_x) * kappa
    }

    pub fn road_wheel_angle(&self, theta_sw: T) -> T {
        theta_sw / self.steer_ratio
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnParams<T = f64> {
    /// Column inertia (kg m^2).
    pub j_eq: T,
    /// Column damping (N m s/rad).
    pub b_eq: T,
    /// Steering resistance stiffness (N m/rad).
    pub k_fz: T,
    /// Coulomb friction magnitude (N m).
    pub friction_coulomb: T,
    /// Self-aligning torque per radian of front slip (N m/rad), acting to recentre the wheel.
    pub sat_gain: T,
    /// Rate scale of the smoothed friction sign (rad/s).
    pub friction_smoothing: T,
    /// Mechanical stop, symmetric (rad).
    pub stop_angle: T,
}

impl<T: Real> Default for ColumnParams<T> {
    fn default() -> Self {
        Self {
            j_eq: T::lit(0.05),
            b_eq: T::lit(0.3),
            k_fz: T::lit(1.0),
            friction_coulomb: T::lit(0.1),
            sat_gain: T::lit(8.0),
            friction_smoothing: T::lit(0.01),
            stop_angle: T::lit(7.85),
        }
    }
}

impl<T: Real> ColumnParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.j_eq > T::zero()) || self.b_eq < T::zero() || self.k_fz < T::zero() {
            return Err(Error::Config("column needs j_eq > 0, b_eq >= 0, k_fz >= 0".into()));
        }
        if self.friction_coulomb < T::zero() || !(self.friction_smoothing > T::zero()) {
            return Err(Error::Config("column friction must be >= 0 with a positive smoothing rate".into()));
        }
        if !(self.stop_angle > T::zero()) {
            return Err(Error::Config("stop_angle must be positive".into()));
        }
        Ok(())
    }

    /// Friction plus self-aligning torque opposing the column.
    pub fn load_torque(&self, theta_sw_dot: T, alpha: T) -> T {
        self.friction_coulomb * (theta_sw_dot / self.friction_smoothing).tanh() - self.sat_gain * alpha
    }
}

/// Front tire slip angle, `(v_y + l_f r) / v_x - delta_f`.
pub fn front_slip_angle<T: Real>(v: &VehicleState<T>, delta_f: T, params: &VehicleParams<T>) -> Result<T> {
    if !(v.v_x > T::zero()) {
        return Err(Error::Domain(format!("slip angle needs v_x > 0, got {}", v.v_x)));
    }
    Ok((v.v_y + params.l_f * v.r) / v.v_x - delta_f)
}

fn rear_slip_angle<T: Real>(v: &VehicleState<T>, params: &VehicleParams<T>) -> T {
    (v.v_y - params.l_r * v.r) / v.v_x
}

/// Advances the single-track model by `dt`. `v_x` is left untouched; the
/// caller owns the longitudinal profile.
pub fn step_vehicle<T: Real>(
    v: &VehicleState<T>,
    delta_f: T,
    dt: T,
    params: &VehicleParams<T>,
) -> Result<VehicleState<T>> {
    if !(dt > T::zero()) {
        return Err(Error::Domain("dt must be positive".into()));
    }
    if !v.is_finite() || !delta_f.is_finite() {
        return Err(Error::Integration(format!("non-finite input: {v:?}, delta_f = {delta_f}")));
    }
    let alpha_f = front_slip_angle(v, delta_f, params)?;
    let alpha_r = rear_slip_angle(v, params);
    let f_yf = -params.c_f * alpha_f;
    let f_yr = -params.c_r * alpha_r;

    let v_y_dot = (f_yf + f_yr) / params.m - v.v_x * v.r;
    let r_dot = (params.l_f * f_yf - params.l_r * f_yr) / params.i_z;

    let v_y = v.v_y + v_y_dot * dt;
    let r = v.r + r_dot * dt;
    let psi = v.psi + r * dt;
    let (sin, cos) = psi.sin_cos();
    let next = VehicleState {
        x: v.x + (v.v_x * cos - v_y * sin) * dt,
        y: v.y + (v.v_x * sin + v_y * cos) * dt,
        psi,
        v_x: v.v_x,
        v_y,
        r,
    };
    if !next.is_finite() {
        return Err(Error::Integration(format!("vehicle state diverged: {next:?}")));
    }
    Ok(next)
}

/// Advances the column: `J θ̈ = τ_dr + τ_hapa − B θ̇ − K θ − τ_load`.
pub fn step_column<T: Real>(
    s: &SteeringState<T>,
    tau_driver: T,
    tau_hapa: T,
    tau_load: T,
    dt: T,
    params: &ColumnParams<T>,
) -> Result<SteeringState<T>> {
    if !(dt > T::zero()) {
        return Err(Error::Domain("dt must be positive".into()));
    }
    let net = tau_driver + tau_hapa - params.b_eq * s.theta_sw_dot - params.k_fz * s.theta_sw - tau_load;
    let mut theta_sw_dot = s.theta_sw_dot + net / params.j_eq * dt;
    let mut theta_sw = s.theta_sw + theta_sw_dot * dt;

    let stop = params.stop_angle;
    if theta_sw.abs() > stop {
        theta_sw = clamp(theta_sw, -stop, stop);
        if theta_sw_dot * theta_sw > T::zero() {
            theta_sw_dot = T::zero();
        }
    }
    let next = SteeringState { theta_sw, theta_sw_dot };
    if !next.is_finite() {
        return Err(Error::Integration(format!("column state diverged: {next:?}")));
    }
    Ok(next)
}
