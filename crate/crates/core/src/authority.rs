//! Control-authority gain schedule and the lane-keep / lane-change mode machine.
//!
//! While the verdict is inconsistent the gain decays from the value captured
//! at the switch towards 0; while consistent it recovers towards 1:
//!
//! ```text
//! K_h = −K_s/2 · tanh(λ(t − γ)) + K_s/2              (inconsistent)
//! K_h = (1 − K_s)/2 · tanh(λ(t − γ)) + (1 + K_s)/2    (consistent)
//! ```
//!
//! `t` restarts at every verdict switch, so both branches start within
//! `(1 + tanh(−λγ))/2` of the captured gain.

use serde::{Deserialize, Serialize};

use crate::consistency::Verdict;
use crate::dynamics::VehicleState;
use crate::error::Result;
use crate::scalar::{clamp, Real};
use crate::trajectory::{plan_lane_change, plan_lane_keep, LaneGeometry, TrajectoryPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum AssistMode {
    #[default]
    LaneKeep,
    LaneChange,
}

impl AssistMode {
    pub fn label(self) -> &'static str {
        match self {
            AssistMode::LaneKeep => "LK",
            AssistMode::LaneChange => "LC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuthorityConfig<T = f64> {
    /// Steepness λ of the tanh schedule (1/s).
    pub lambda: T,
    /// Delay γ of the schedule midpoint (s).
    pub gamma: T,
    /// Gain below which an inconsistent episode re-plans to the current lane.
    pub k_replan: T,
    /// Margin keeping the captured gain inside `(0, 1)`.
    pub shifting_margin: T,
    /// Fallback lane-change side when neither drift nor heading error decides.
    pub default_side: Side,
    /// Lateral rate (m/s) above which drift decides the lane-change side.
    pub drift_threshold: T,
    /// Capture the gain at each verdict switch. Disabling it is a mutation
    /// hook for the continuity checks; it is never off in normal runs.
    pub capture_on_switch: bool,
}

impl<T: Real> Default for AuthorityConfig<T> {
    fn default() -> Self {
        Self {
            lambda: T::lit(4.0),
            gamma: T::one(),
            k_replan: T::lit(0.01),
            shifting_margin: T::lit(1e-6),
            default_side: Side::Left,
            drift_threshold: T::lit(0.05),
            capture_on_switch: true,
        }
    }
}

/// Decaying branch, used while inconsistent.
pub fn gain_inconsistent<T: Real>(k_shifting: T, t: T, lambda: T, gamma: T) -> T {
    let half = k_shifting / T::lit(2.0);
    -half * (lambda * (t - gamma)).tanh() + half
}

/// Recovering branch, used while consistent.
pub fn gain_consistent<T: Real>(k_shifting: T, t: T, lambda: T, gamma: T) -> T {
    let two = T::lit(2.0);
    (T::one() - k_shifting) / two * (lambda * (t - gamma)).tanh() + (T::one() + k_shifting) / two
}

/// Largest one-step change either branch can make right after a switch: the
/// `t = 0` offset plus the steepest slope on `[0, dt]` times `dt`.
pub fn switch_step_bound<T: Real>(k_shifting: T, dt: T, lambda: T, gamma: T) -> T {
    let two = T::lit(2.0);
    let offset = (T::one() + (-lambda * gamma).tanh()) / two;
    let spread = k_shifting.max(T::one() - k_shifting);
    let slope = |t: T| {
        let c = (lambda * (t - gamma)).cosh();
        spread / two * lambda / (c * c)
    };
    spread * offset + slope(dt).max(slope(T::zero())) * dt
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuthorityState<T = f64> {
    pub k_h: T,
    pub k_shifting: T,
    pub t_in_state: T,
    pub verdict: Verdict,
    pub mode: AssistMode,
    pub replanned: bool,
}

impl<T: Real> Default for AuthorityState<T> {
    fn default() -> Self {
        Self {
            k_h: T::one(),
            k_shifting: T::one(),
            t_in_state: T::zero(),
            verdict: Verdict::Consistent,
            mode: AssistMode::LaneKeep,
            replanned: false,
        }
    }
}

/// What `step_mode` did to the plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeEvent {
    None,
    LaneChangeStarted,
    LaneChangeCompleted,
    Replanned,
}

/// Advances the gain schedule by one step under `verdict_now`.
pub fn step_gain<T: Real>(a: &AuthorityState<T>, verdict_now: Verdict, dt: T, cfg: &AuthorityConfig<T>) -> AuthorityState<T> {
    let mut next = *a;
    if verdict_now != a.verdict {
        if cfg.capture_on_switch {
            next.k_shifting = clamp(a.k_h, cfg.shifting_margin, T::one() - cfg.shifting_margin);
        }
        next.t_in_state = T::zero();
        next.verdict = verdict_now;
    }
    next.t_in_state = next.t_in_state + dt;
    let k_s = clamp(next.k_shifting, cfg.shifting_margin, T::one() - cfg.shifting_margin);
    let k_h = match verdict_now {
        Verdict::Inconsistent => gain_inconsistent(k_s, next.t_in_state, cfg.lambda, cfg.gamma),
        Verdict::Consistent => gain_consistent(k_s, next.t_in_state, cfg.lambda, cfg.gamma),
    };
    next.k_h = clamp(k_h, T::zero(), T::one());
    next
}

/// Inputs the mode machine needs besides the authority state.
#[derive(Debug, Clone, Copy)]
pub struct ModeContext<'a, T = f64> {
    pub geometry: &'a LaneGeometry<T>,
    pub vehicle: &'a VehicleState<T>,
    /// Latest heading error, the second cue for the lane-change side.
    pub e_theta: T,
    pub delta_t_lc: T,
}

fn choose_side<T: Real>(ctx: &ModeContext<'_, T>, cfg: &AuthorityConfig<T>) -> Option<usize> {
    let drift = ctx.vehicle.lateral_rate();
    let preferred = if drift.abs() > cfg.drift_threshold {
        if drift > T::zero() { Side::Left } else { Side::Right }
    } else if ctx.e_theta != T::zero() {
        if ctx.e_theta > T::zero() { Side::Left } else { Side::Right }
    } else {
        cfg.default_side
    };
    let lane = ctx.geometry.lane_of(ctx.vehicle.y);
    let neighbour = |side: Side| match side {
        Side::Left => (lane + 1 < ctx.geometry.lane_count).then_some(lane + 1),
        Side::Right => lane.checked_sub(1),
    };
    let other = match preferred {
        Side::Left => Side::Right,
        Side::Right => Side::Left,
    };
    neighbour(preferred).or_else(|| neighbour(other))
}

/// Mode transitions after the intent and verdict updates of a step.
pub fn step_mode<T: Real>(
    a: &AuthorityState<T>,
    intent: bool,
    plan: &TrajectoryPlan<T>,
    ctx: &ModeContext<'_, T>,
    cfg: &AuthorityConfig<T>,
) -> Result<(AuthorityState<T>, TrajectoryPlan<T>, ModeEvent)> {
    let mut next = *a;
    let v = ctx.vehicle;

    if next.verdict == Verdict::Consistent {
        next.replanned = false;
    }

    if plan.is_complete_at(v.x) {
        next.mode = AssistMode::LaneKeep;
        let keep = plan_lane_keep(ctx.geometry, plan.target_lane())?;
        return Ok((next, keep, ModeEvent::LaneChangeCompleted));
    }

    if next.verdict == Verdict::Inconsistent && next.k_h < cfg.k_replan && !next.replanned {
        next.replanned = true;
        next.mode = AssistMode::LaneKeep;
        let keep = plan_lane_keep(ctx.geometry, ctx.geometry.lane_of(v.y))?;
        return Ok((next, keep, ModeEvent::Replanned));
    }

    if next.mode == AssistMode::LaneKeep && intent && next.verdict == Verdict::Consistent {
        if let Some(target) = choose_side(ctx, cfg) {
            let change = plan_lane_change(ctx.geometry, v.x, v.y, target, v.v_x, ctx.delta_t_lc)?;
            next.mode = AssistMode::LaneChange;
            return Ok((next, change, ModeEvent::LaneChangeStarted));
        }
    }

    Ok((next, *plan, ModeEvent::None))
}
