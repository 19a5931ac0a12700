//! Driver/guidance intention consistency from modified pseudo-work.
//!
//! Each agent's pseudo-work is the windowed mean of its torque times the
//! heading-error rate; the torque product gives the instantaneous agreement
//! sign. Only `ė_θ` is consumed, so conflicts register even when the vehicle
//! barely moves laterally.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Verdict {
    #[default]
    Consistent,
    Inconsistent,
}

impl Verdict {
    pub fn as_flag(self) -> u8 {
        match self {
            Verdict::Consistent => 0,
            Verdict::Inconsistent => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConsistencyConfig<T = f64> {
    /// Averaging window ΔT (s).
    pub window: T,
    /// Inconsistency threshold on `W_hapi − W_dr` (N m rad/s).
    pub delta: T,
    /// Consecutive identical raw verdicts required to switch the published one.
    pub debounce: usize,
}

impl<T: Real> Default for ConsistencyConfig<T> {
    fn default() -> Self {
        Self { window: T::one(), delta: T::lit(0.05), debounce: 6 }
    }
}

/// Table lookup: opposing torques and a pseudo-work gap above `delta` mean
/// the agents pursue different targets. Ties resolve to consistent.
pub fn classify<T: Real>(s_c: T, beta: T, delta: T) -> Verdict {
    if s_c < T::zero() && beta > delta {
        Verdict::Inconsistent
    } else {
        Verdict::Consistent
    }
}

/// Trapezoidal mean over uniformly spaced samples: the integral over the
/// `(n−1)·dt` span divided by that span.
pub fn trapezoid_mean<T: Real>(samples: impl ExactSizeIterator<Item = T>) -> T {
    let n = samples.len();
    if n < 2 {
        return T::zero();
    }
    let mut sum = T::zero();
    for (i, v) in samples.enumerate() {
        if i == 0 || i == n - 1 {
            sum = sum + v * T::lit(0.5);
        } else {
            sum = sum + v;
        }
    }
    sum / T::from_usize(n - 1).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConsistencyState<T = f64> {
    pub w_hapi: T,
    pub w_dr: T,
    pub s_c: T,
    pub beta: T,
    /// Undebounced table verdict for the latest sample.
    pub raw: Verdict,
    /// Published verdict after start-up and debounce rules.
    pub verdict: Verdict,
    pub window_full: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Sample<T> {
    tau_hapi: T,
    tau_dr: T,
    e_theta_dot: T,
}

/// Sliding-window detector, one per simulation.
#[derive(Debug, Clone)]
pub struct ConsistencyDetector<T = f64> {
    config: ConsistencyConfig<T>,
    intervals: usize,
    window: VecDeque<Sample<T>>,
    streak_value: Verdict,
    streak: usize,
    state: ConsistencyState<T>,
}

impl<T: Real> ConsistencyDetector<T> {
    pub fn new(config: ConsistencyConfig<T>, dt: T) -> Result<Self> {
        if !(config.delta > T::zero()) || !(config.window > T::zero()) || !(dt > T::zero()) {
            return Err(Error::Config("consistency needs delta > 0, window > 0 and dt > 0".into()));
        }
        let intervals = (config.window / dt).round().to_usize().unwrap_or(0).max(1);
        Ok(Self {
            config,
            intervals,
            window: VecDeque::with_capacity(intervals + 1),
            streak_value: Verdict::Consistent,
            streak: 0,
            state: ConsistencyState::default(),
        })
    }

    /// Number of sampling intervals spanned by a full window, `round(ΔT/dt)`.
    pub fn window_intervals(&self) -> usize {
        self.intervals
    }

    pub fn state(&self) -> &ConsistencyState<T> {
        &self.state
    }

    pub fn config(&self) -> &ConsistencyConfig<T> {
        &self.config
    }

    pub fn update(&mut self, tau_hapi: T, tau_dr: T, e_theta_dot: T) -> ConsistencyState<T> {
        if self.window.len() == self.intervals + 1 {
            self.window.pop_front();
        }
        self.window.push_back(Sample { tau_hapi, tau_dr, e_theta_dot });

        let w_hapi = trapezoid_mean(self.window.iter().map(|s| s.tau_hapi * s.e_theta_dot));
        let w_dr = trapezoid_mean(self.window.iter().map(|s| s.tau_dr * s.e_theta_dot));
        let s_c = tau_hapi * tau_dr;
        let beta = w_hapi - w_dr;
        let window_full = self.window.len() == self.intervals + 1;
        let raw = if window_full { classify(s_c, beta, self.config.delta) } else { Verdict::Consistent };

        if raw == self.streak_value {
            self.streak += 1;
        } else {
            self.streak_value = raw;
            self.streak = 1;
        }
        let mut verdict = self.state.verdict;
        if raw != verdict && self.streak >= self.config.debounce.max(1) {
            verdict = raw;
        }
        self.state = ConsistencyState { w_hapi, w_dr, s_c, beta, raw, verdict, window_full };
        self.state
    }
}
