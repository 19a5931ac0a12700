//! Guidance target trajectories and single preview-point errors.
//!
//! Lateral positions are measured from the right road edge and increase to
//! the left. Lane 0 is the rightmost lane; lane `i` has its centreline at
//! `d * (i + 0.5)`.

use serde::{Deserialize, Serialize};

use crate::dynamics::VehicleState;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaneGeometry<T = f64> {
    pub lane_width: T,
    pub lane_count: usize,
    pub course_length: T,
}

impl<T: Real> Default for LaneGeometry<T> {
    fn default() -> Self {
        Self { lane_width: T::lit(3.5), lane_count: 2, course_length: T::lit(8000.0) }
    }
}

impl<T: Real> LaneGeometry<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lane_width > T::zero()) || self.lane_count < 2 || !(self.course_length > T::zero()) {
            return Err(Error::Config("lane geometry needs width > 0, >= 2 lanes and a positive length".into()));
        }
        Ok(())
    }

    pub fn lane_center(&self, lane: usize) -> T {
        self.lane_width * (T::from_usize(lane).unwrap() + T::lit(0.5))
    }

    /// Lane containing lateral position `y`, saturated to the outermost lanes.
    pub fn lane_of(&self, y: T) -> usize {
        let idx = (y / self.lane_width).floor();
        if idx < T::zero() {
            0
        } else {
            idx.to_usize().unwrap_or(usize::MAX).min(self.lane_count - 1)
        }
    }

    pub fn road_width(&self) -> T {
        self.lane_width * T::from_usize(self.lane_count).unwrap()
    }

    pub fn is_valid_lane(&self, lane: usize) -> bool {
        lane < self.lane_count
    }

    /// Boundary between `lane` and its neighbour on the `left` or right side,
    /// or `None` if that neighbour does not exist.
    pub fn boundary_towards(&self, lane: usize, left: bool) -> Option<T> {
        if left {
            (lane + 1 < self.lane_count).then(|| self.lane_width * T::from_usize(lane + 1).unwrap())
        } else {
            (lane > 0).then(|| self.lane_width * T::from_usize(lane).unwrap())
        }
    }
}

/// A quintic Bézier lane change in the `(x, y)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneChangePlan<T = f64> {
    pub start_x: T,
    pub length: T,
    pub y_start: T,
    pub y_end: T,
    pub target_lane: usize,
    pub control_points: [[T; 2]; 6],
}

impl<T: Real> LaneChangePlan<T> {
    pub fn end_x(&self) -> T {
        self.start_x + self.length
    }

    /// Bézier point and its first two parametric derivatives at `s ∈ [0, 1]`.
    pub fn bezier(&self, s: T) -> [[T; 2]; 3] {
        let p = &self.control_points;
        let five = T::lit(5.0);
        let twenty = T::lit(20.0);
        let mut d1 = [[T::zero(); 2]; 5];
        let mut d2 = [[T::zero(); 2]; 4];
        for i in 0..5 {
            for k in 0..2 {
                d1[i][k] = five * (p[i + 1][k] - p[i][k]);
            }
        }
        for i in 0..4 {
            for k in 0..2 {
                d2[i][k] = (p[i + 2][k] - p[i + 1][k] * T::lit(2.0) + p[i][k]) * twenty;
            }
        }
        [de_casteljau(p, s), de_casteljau(&d1, s), de_casteljau(&d2, s)]
    }

    fn param_of(&self, x: T) -> T {
        ((x - self.start_x) / self.length).max(T::zero()).min(T::one())
    }
}

fn de_casteljau<T: Real, const N: usize>(pts: &[[T; 2]; N], s: T) -> [T; 2] {
    let mut work = *pts;
    let one_minus = T::one() - s;
    for level in 1..N {
        for i in 0..N - level {
            for k in 0..2 {
                work[i][k] = work[i][k] * one_minus + work[i + 1][k] * s;
            }
        }
    }
    work[0]
}

/// Active guidance target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TrajectoryPlan<T = f64> {
    LaneKeep { lane: usize, y_center: T },
    LaneChange(LaneChangePlan<T>),
}

/// Reference path sample at a longitudinal position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint<T = f64> {
    pub y: T,
    pub heading: T,
    /// Second derivative `d²y/dx²` (1/m).
    pub d2y: T,
}

impl<T: Real> PathPoint<T> {
    pub fn curvature(&self) -> T {
        let slope = self.heading.tan();
        self.d2y / (T::one() + slope * slope).powf(T::lit(1.5))
    }
}

/// Plans a quintic Bézier change from the current position into `target_lane`,
/// covering `L = v_x · ΔT_LC` metres of road.
pub fn plan_lane_change<T: Real>(
    geometry: &LaneGeometry<T>,
    x_now: T,
    y_now: T,
    target_lane: usize,
    v_x: T,
    delta_t_lc: T,
) -> Result<TrajectoryPlan<T>> {
    if !(v_x > T::zero()) || !(delta_t_lc > T::zero()) {
        return Err(Error::Domain("lane change needs v_x > 0 and delta_t_lc > 0".into()));
    }
    if !geometry.is_valid_lane(target_lane) {
        return Err(Error::Domain(format!("lane {target_lane} does not exist")));
    }
    if geometry.lane_of(y_now) == target_lane {
        return Err(Error::Domain("target lane is the current lane".into()));
    }
    let length = v_x * delta_t_lc;
    let y_end = geometry.lane_center(target_lane);
    let ys = [y_now, y_now, y_now, y_end, y_end, y_end];
    let mut control_points = [[T::zero(); 2]; 6];
    for (i, cp) in control_points.iter_mut().enumerate() {
        cp[0] = x_now + length * T::from_usize(i).unwrap() / T::lit(5.0);
        cp[1] = ys[i];
    }
    Ok(TrajectoryPlan::LaneChange(LaneChangePlan {
        start_x: x_now,
        length,
        y_start: y_now,
        y_end,
        target_lane,
        control_points,
    }))
}

pub fn plan_lane_keep<T: Real>(geometry: &LaneGeometry<T>, lane: usize) -> Result<TrajectoryPlan<T>> {
    if !geometry.is_valid_lane(lane) {
        return Err(Error::Domain(format!("lane {lane} does not exist")));
    }
    Ok(TrajectoryPlan::LaneKeep { lane, y_center: geometry.lane_center(lane) })
}

impl<T: Real> TrajectoryPlan<T> {
    pub fn is_lane_change(&self) -> bool {
        matches!(self, Self::LaneChange(_))
    }

    /// Lane the plan ends in.
    pub fn target_lane(&self) -> usize {
        match self {
            Self::LaneKeep { lane, .. } => *lane,
            Self::LaneChange(lc) => lc.target_lane,
        }
    }

    /// Whether a lane change has run past its end point at `x`.
    pub fn is_complete_at(&self, x: T) -> bool {
        match self {
            Self::LaneKeep { .. } => false,
            Self::LaneChange(lc) => x >= lc.end_x(),
        }
    }

    /// Reference lateral position, heading and `d²y/dx²` at `x`. Lane changes
    /// hold their start and end lines outside `[start_x, start_x + L]`.
    pub fn eval(&self, x: T) -> PathPoint<T> {
        match self {
            Self::LaneKeep { y_center, .. } => PathPoint { y: *y_center, heading: T::zero(), d2y: T::zero() },
            Self::LaneChange(lc) => {
                if x <= lc.start_x {
                    return PathPoint { y: lc.y_start, heading: T::zero(), d2y: T::zero() };
                }
                if x >= lc.end_x() {
                    return PathPoint { y: lc.y_end, heading: T::zero(), d2y: T::zero() };
                }
                let [p, d1, d2] = lc.bezier(lc.param_of(x));
                let slope = d1[1] / d1[0];
                let d2y = (d2[1] * d1[0] - d1[1] * d2[0]) / (d1[0] * d1[0] * d1[0]);
                PathPoint { y: p[1], heading: slope.atan(), d2y }
            }
        }
    }
}

/// Errors at the single preview point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PreviewErrors<T = f64> {
    /// Reference minus predicted lateral position (m); positive when the target is to the left.
    pub e_y: T,
    /// Reference heading minus vehicle yaw, wrapped to `(-π, π]`.
    pub e_theta: T,
    pub e_theta_dot: T,
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::TAU();
    let mut w = a % two_pi;
    if w <= -T::PI() {
        w = w + two_pi;
    } else if w > T::PI() {
        w = w - two_pi;
    }
    w
}

/// `(e_y, e_theta)` at the point `v_x · t_preview` ahead along the vehicle heading.
pub fn preview_point_errors<T: Real>(v: &VehicleState<T>, plan: &TrajectoryPlan<T>, t_preview: T) -> (T, T) {
    let lp = v.v_x * t_preview;
    let (sin, cos) = v.psi.sin_cos();
    let x_p = v.x + lp * cos;
    let y_p = v.y + lp * sin;
    let reference = plan.eval(x_p);
    (reference.y - y_p, wrap_angle(reference.heading - v.psi))
}

/// Per-simulation memory for the heading-error rate: backward difference,
/// optionally followed by a first-order low-pass filter.
#[derive(Debug, Clone)]
pub struct PreviewTracker<T = f64> {
    pub t_preview: T,
    dt: T,
    /// Smoothing factor of the low-pass, `None` when the filter is off.
    alpha: Option<T>,
    prev_e_theta: Option<T>,
    last_raw: T,
    filtered: T,
}

impl<T: Real> PreviewTracker<T> {
    pub fn new(t_preview: T, dt: T, lowpass_cutoff_hz: Option<T>) -> Self {
        let alpha = lowpass_cutoff_hz.map(|fc| {
            let tau = T::one() / (T::TAU() * fc);
            dt / (dt + tau)
        });
        Self { t_preview, dt, alpha, prev_e_theta: None, last_raw: T::zero(), filtered: T::zero() }
    }

    /// Errors for the current step. On a step where the plan was replaced the
    /// raw difference is held at its previous value, so the switch does not
    /// register as a heading-error impulse.
    pub fn update(&mut self, v: &VehicleState<T>, plan: &TrajectoryPlan<T>, plan_changed: bool) -> PreviewErrors<T> {
        let (e_y, e_theta) = preview_point_errors(v, plan, self.t_preview);
        let raw = match self.prev_e_theta {
            Some(prev) if !plan_changed => wrap_angle(e_theta - prev) / self.dt,
            Some(_) => self.last_raw,
            None => T::zero(),
        };
        self.prev_e_theta = Some(e_theta);
        self.last_raw = raw;
        let e_theta_dot = match self.alpha {
            Some(a) => {
                self.filtered = self.filtered + a * (raw - self.filtered);
                self.filtered
            }
            None => raw,
        };
        PreviewErrors { e_y, e_theta, e_theta_dot }
    }
}
