//! Lane-change intention: the three-second observation window and the
//! binary "will cross a lane boundary within the horizon" prediction.
//!
//! The window holds `k = 180` samples (3 s at 60 Hz) of six features. Its
//! flattened form lists samples oldest first, each as
//! `[head, a, v, theta_sw, d_adj, psi]`, giving a vector of length `6k`.
//! Any predictor, including an out-of-process one, sees exactly that vector.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples in a full window.
pub const WINDOW_LEN: usize = 180;
/// Features per sample.
pub const FEATURES: usize = 6;
/// Prediction horizon `m` (s).
pub const HORIZON: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureSample {
    /// Normalized head yaw in `[-1, 1]`, positive to the left.
    pub head: f64,
    /// Longitudinal acceleration (m/s²).
    pub a: f64,
    /// Longitudinal speed (m/s).
    pub v: f64,
    pub theta_sw: f64,
    /// Lateral distance to the adjacent-lane boundary (m).
    pub d_adj: f64,
    pub psi: f64,
}

impl FeatureSample {
    pub fn to_array(&self) -> [f64; FEATURES] {
        [self.head, self.a, self.v, self.theta_sw, self.d_adj, self.psi]
    }
}

/// Time and road position of a sample. Not part of the feature vector; the
/// oracle predictor reads it to look up scripted ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SampleStamp {
    pub t: f64,
    pub x: f64,
}

#[derive(Debug, Clone)]
pub struct FeatureWindow {
    samples: VecDeque<(FeatureSample, SampleStamp)>,
    dt: f64,
}

impl FeatureWindow {
    pub fn new(dt: f64) -> Self {
        Self { samples: VecDeque::with_capacity(WINDOW_LEN), dt }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.samples.len() == WINDOW_LEN
    }

    pub fn push(&mut self, mut sample: FeatureSample, stamp: SampleStamp) {
        if !(-1.0..=1.0).contains(&sample.head) {
            warn!("head yaw {} outside [-1, 1] at t = {:.3}; clamped", sample.head, stamp.t);
            sample.head = sample.head.clamp(-1.0, 1.0);
        }
        if self.samples.len() == WINDOW_LEN {
            self.samples.pop_front();
        }
        self.samples.push_back((sample, stamp));
    }

    /// Oldest-first samples.
    pub fn samples(&self) -> impl DoubleEndedIterator<Item = &FeatureSample> + ExactSizeIterator {
        self.samples.iter().map(|(s, _)| s)
    }

    pub fn latest(&self) -> Option<(&FeatureSample, &SampleStamp)> {
        self.samples.back().map(|(s, st)| (s, st))
    }

    /// The last `n` samples, oldest first.
    pub fn tail(&self, n: usize) -> impl Iterator<Item = &FeatureSample> {
        let skip = self.samples.len().saturating_sub(n);
        self.samples.iter().skip(skip).map(|(s, _)| s)
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.samples.iter().flat_map(|(s, _)| s.to_array()).collect()
    }
}

/// One window in, one bit out.
pub trait IntentPredictor: Send + Sync {
    fn name(&self) -> &str;

    fn predict_full(&self, window: &FeatureWindow) -> Result<bool>;
}

/// Prediction contract: `false` until the window is full.
pub fn predict(predictor: &dyn IntentPredictor, window: &FeatureWindow) -> Result<bool> {
    if !window.is_full() {
        return Ok(false);
    }
    predictor.predict_full(window)
}

/// Ground-truth label: a crossing happens within `(t, t + horizon]`.
pub fn crossing_label(crossing_times: &[f64], t: f64, horizon: f64) -> bool {
    crossing_times.iter().any(|&c| c - t >= 0.0 && c - t <= horizon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub r#fn: usize,
}

impl Confusion {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut c = Confusion::default();
        for (pred, label) in pairs {
            match (pred, label) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.r#fn += 1,
            }
        }
        c
    }

    pub fn precision(&self) -> Option<f64> {
        let d = self.tp + self.fp;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        let d = self.tp + self.r#fn;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    pub fn accuracy(&self) -> Option<f64> {
        let n = self.tp + self.fp + self.tn + self.r#fn;
        (n > 0).then(|| (self.tp + self.tn) as f64 / n as f64)
    }
}

/// Scripted crossing events, keyed either by time or by road position.
#[derive(Debug, Clone, PartialEq)]
pub enum CrossingSchedule {
    Times(Vec<f64>),
    /// Positions are converted to time-to-crossing with the latest speed.
    Positions(Vec<f64>),
}

/// Emits 1 during the horizon before each scripted crossing.
#[derive(Debug, Clone)]
pub struct OraclePredictor {
    pub schedule: CrossingSchedule,
    pub horizon: f64,
}

impl OraclePredictor {
    pub fn from_times(times: Vec<f64>) -> Self {
        Self { schedule: CrossingSchedule::Times(times), horizon: HORIZON }
    }

    pub fn from_positions(positions: Vec<f64>) -> Self {
        Self { schedule: CrossingSchedule::Positions(positions), horizon: HORIZON }
    }
}

impl IntentPredictor for OraclePredictor {
    fn name(&self) -> &str {
        "oracle"
    }

    fn predict_full(&self, window: &FeatureWindow) -> Result<bool> {
        let Some((sample, stamp)) = window.latest() else { return Ok(false) };
        Ok(match &self.schedule {
            CrossingSchedule::Times(times) => crossing_label(times, stamp.t, self.horizon),
            CrossingSchedule::Positions(xs) => {
                if sample.v <= 0.0 {
                    false
                } else {
                    xs.iter().any(|&xc| {
                        let ttc = (xc - stamp.x) / sample.v;
                        (0.0..=self.horizon).contains(&ttc)
                    })
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeuristicThresholds {
    /// Mean |head yaw| that counts as a glance precursor.
    pub head_threshold: f64,
    /// Averaging span for head yaw (s).
    pub head_span: f64,
    /// Regression span for the `d_adj` rate (s).
    pub drift_span: f64,
    pub horizon: f64,
}

impl Default for HeuristicThresholds {
    fn default() -> Self {
        Self { head_threshold: 0.3, head_span: 0.5, drift_span: 0.5, horizon: HORIZON }
    }
}

/// Glance plus drift rule: the head has been turned for the last half second
/// and the boundary distance, extrapolated at its regressed rate, reaches 0
/// within the horizon.
#[derive(Debug, Clone, Default)]
pub struct HeuristicPredictor {
    pub thresholds: HeuristicThresholds,
}

/// Least-squares slope of equally spaced values.
pub fn regression_slope(values: &[f64], dt: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean_i = (n - 1) as f64 / 2.0;
    let mean_v = values.iter().sum::<f64>() / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, v) in values.iter().enumerate() {
        let di = i as f64 - mean_i;
        num += di * (v - mean_v);
        den += di * di;
    }
    num / den / dt
}

pub fn heuristic_predict(window: &FeatureWindow, th: &HeuristicThresholds) -> bool {
    let dt = window.dt();
    let n_head = ((th.head_span / dt).round() as usize).max(1);
    let heads: Vec<f64> = window.tail(n_head).map(|s| s.head.abs()).collect();
    if heads.is_empty() {
        return false;
    }
    let mean_head = heads.iter().sum::<f64>() / heads.len() as f64;
    if mean_head <= th.head_threshold {
        return false;
    }
    let n_drift = ((th.drift_span / dt).round() as usize).max(2);
    let d: Vec<f64> = window.tail(n_drift).map(|s| s.d_adj).collect();
    let rate = regression_slope(&d, dt);
    let Some(&now) = d.last() else { return false };
    if rate >= 0.0 {
        return false;
    }
    now.max(0.0) / -rate <= th.horizon
}

impl IntentPredictor for HeuristicPredictor {
    fn name(&self) -> &str {
        "heuristic"
    }

    fn predict_full(&self, window: &FeatureWindow) -> Result<bool> {
        Ok(heuristic_predict(window, &self.thresholds))
    }
}

/// Out-of-process predictor. Each query writes the flattened window as one
/// line of comma-separated numbers to the child's stdin and reads one line
/// holding `0` or `1` back.
pub struct ExternalPredictor {
    command: Vec<String>,
    io: Mutex<(Child, ChildStdin, BufReader<ChildStdout>)>,
}

impl ExternalPredictor {
    pub fn spawn(command: &[String]) -> Result<Self> {
        let (program, args) =
            command.split_first().ok_or_else(|| Error::Config("external predictor command is empty".into()))?;
        let mut child = Command::new(program).args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self { command: command.to_vec(), io: Mutex::new((child, stdin, stdout)) })
    }
}

impl std::fmt::Debug for ExternalPredictor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalPredictor").field("command", &self.command).finish()
    }
}

impl Drop for ExternalPredictor {
    fn drop(&mut self) {
        if let Ok(mut io) = self.io.lock() {
            let _ = io.0.kill();
            let _ = io.0.wait();
        }
    }
}

impl IntentPredictor for ExternalPredictor {
    fn name(&self) -> &str {
        "external"
    }

    fn predict_full(&self, window: &FeatureWindow) -> Result<bool> {
        let mut guard = self.io.lock().map_err(|_| Error::Contract("external predictor lock poisoned".into()))?;
        let (_, stdin, stdout) = &mut *guard;
        let line: Vec<String> = window.flatten().iter().map(|v| v.to_string()).collect();
        writeln!(stdin, "{}", line.join(","))?;
        stdin.flush()?;
        let mut reply = String::new();
        if stdout.read_line(&mut reply)? == 0 {
            return Err(Error::Contract("external predictor closed its output".into()));
        }
        match reply.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(Error::Contract(format!("external predictor replied {other:?}, expected 0 or 1"))),
        }
    }
}

/// Predictor selection in the run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PredictorChoice {
    Oracle,
    Heuristic(HeuristicThresholds),
    External { command: Vec<String> },
}

impl Default for PredictorChoice {
    fn default() -> Self {
        PredictorChoice::Oracle
    }
}
