//! Driving-performance measures computed from drive logs.
//!
//! Lane position spread and steering reversal rate use lane-keeping areas
//! only; lane changes are found from the yaw angle and measured one by one.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Course;
use crate::telemetry::{DriveLog, LogRecord};
use crate::trajectory::LaneGeometry;

/// Two-sided 95 % normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    /// Reversal gap threshold (deg).
    pub swrr_gap_deg: f64,
    /// Yaw angle that opens a lane-change segment (deg).
    pub psi_on_deg: f64,
    /// Yaw angle below which a segment may close (deg).
    pub psi_off_deg: f64,
    /// Settling window after a segment for overshoot (s).
    pub overshoot_window: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { swrr_gap_deg: 3.0, psi_on_deg: 0.5, psi_off_deg: 0.2, overshoot_window: 3.0 }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.swrr_gap_deg >= 0.0) || !(self.overshoot_window > 0.0) {
            return Err(Error::Config("metrics: swrr_gap_deg >= 0 and overshoot_window > 0 required".into()));
        }
        if !(self.psi_off_deg > 0.0 && self.psi_off_deg < self.psi_on_deg) {
            return Err(Error::Config("metrics: need 0 < psi_off_deg < psi_on_deg".into()));
        }
        Ok(())
    }
}

/// Sample standard deviation (N − 1 denominator).
pub fn sdlp(lateral: &[f64]) -> Result<f64> {
    let n = lateral.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("SDLP needs at least 2 samples, got {n}")));
    }
    let mean = lateral.iter().sum::<f64>() / n as f64;
    let ss = lateral.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>();
    Ok((ss / (n - 1) as f64).sqrt())
}

/// Indices of the stationary points: the first sample, then every direction
/// change. A flat run at a turning point resolves to its last sample.
pub fn stationary_points(theta: &[f64]) -> Vec<usize> {
    let mut points = Vec::new();
    if theta.is_empty() {
        return points;
    }
    points.push(0);
    let mut last_dir = 0.0;
    for i in 1..theta.len() {
        let d = theta[i] - theta[i - 1];
        if d == 0.0 {
            continue;
        }
        let dir = d.signum();
        if last_dir != 0.0 && dir != last_dir {
            points.push(i - 1);
        }
        last_dir = dir;
    }
    points
}

/// Reversals whose excursion from the previous stationary point exceeds `gap`.
pub fn reversal_count(theta: &[f64], gap: f64) -> usize {
    let pts = stationary_points(theta);
    pts.windows(2).filter(|w| (theta[w[1]] - theta[w[0]]).abs() > gap).count()
}

/// Steering-wheel reversal rate in reversals per minute.
pub fn swrr(theta: &[f64], gap: f64, duration: f64) -> Result<f64> {
    if !(duration > 0.0) {
        return Err(Error::Domain(format!("SWRR duration must be positive, got {duration}")));
    }
    Ok(reversal_count(theta, gap) as f64 / (duration / 60.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcSegment {
    pub start: usize,
    /// Index of the closing record (inclusive).
    pub end: usize,
    pub start_t: f64,
    pub end_t: f64,
    pub direction: Direction,
    pub target_lane: usize,
    /// Closed by the end of the log rather than by the yaw criterion.
    pub unterminated: bool,
}

impl LcSegment {
    pub fn duration(&self) -> f64 {
        self.end_t - self.start_t
    }
}

/// Lane changes found by yaw-angle hysteresis.
///
/// A segment opens when |ψ| rises above `psi_on` while the lateral drift has
/// the same sign, and closes once |ψ| is below `psi_off` with the vehicle
/// inside the neighbouring lane in that direction. A yaw excursion that
/// settles back below `psi_off` in the lane it started from is dropped.
pub fn segment_lc(log: &DriveLog, geometry: &LaneGeometry, cfg: &MetricsConfig) -> Vec<LcSegment> {
    let on = cfg.psi_on_deg.to_radians();
    let off = cfg.psi_off_deg.to_radians();
    let recs = &log.records;
    let mut out = Vec::new();
    // (start index, direction, origin lane, target lane)
    let mut open: Option<(usize, Direction, usize, usize)> = None;
    for (i, r) in recs.iter().enumerate() {
        match open {
            None => {
                let drift = r.v_x * r.psi.sin() + r.v_y * r.psi.cos();
                if r.psi.abs() > on && drift * r.psi > 0.0 {
                    let lane = geometry.lane_of(r.y);
                    let (dir, target) = if r.psi > 0.0 {
                        (Direction::Left, (lane + 1).min(geometry.lane_count - 1))
                    } else {
                        (Direction::Right, lane.saturating_sub(1))
                    };
                    open = Some((i, dir, lane, target));
                }
            }
            Some((start, direction, origin, target_lane)) => {
                let lane = geometry.lane_of(r.y);
                if r.psi.abs() < off && lane == origin && origin != target_lane {
                    open = None;
                } else if r.psi.abs() < off && lane == target_lane {
                    out.push(LcSegment {
                        start,
                        end: i,
                        start_t: recs[start].t,
                        end_t: r.t,
                        direction,
                        target_lane,
                        unterminated: false,
                    });
                    open = None;
                }
            }
        }
    }
    if let Some((start, direction, _, target_lane)) = open {
        let end = recs.len() - 1;
        out.push(LcSegment {
            start,
            end,
            start_t: recs[start].t,
            end_t: recs[end].t,
            direction,
            target_lane,
            unterminated: true,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overshoot {
    pub distance: f64,
    /// The settling window ran past the end of the log.
    pub truncated: bool,
}

/// Largest |y − target_center| from the segment end over the settling window.
pub fn overshoot(log: &DriveLog, seg: &LcSegment, target_center: f64, window: f64) -> Overshoot {
    let t_end = seg.end_t + window;
    let distance = log.records[seg.end..]
        .iter()
        .take_while(|r| r.t <= t_end)
        .map(|r| (r.y - target_center).abs())
        .fold(0.0, f64::max);
    let last_t = log.records.last().map_or(f64::NEG_INFINITY, |r| r.t);
    Overshoot { distance, truncated: last_t < t_end - 0.5 * log.dt }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcStats {
    pub duration: f64,
    pub rms_steer_vel: f64,
    pub peak_angle: f64,
}

pub fn lc_stats(log: &DriveLog, seg: &LcSegment) -> LcStats {
    let recs = &log.records[seg.start..=seg.end];
    LcStats {
        duration: seg.duration(),
        rms_steer_vel: rms(recs.iter().map(|r| r.theta_sw_dot)),
        peak_angle: recs.iter().map(|r| r.theta_sw.abs()).fold(0.0, f64::max),
    }
}

pub fn driver_torque_rms(log: &DriveLog) -> Result<f64> {
    if log.records.is_empty() {
        return Err(Error::InsufficientData("driver torque RMS of an empty log".into()));
    }
    Ok(rms(log.records.iter().map(|r| r.tau_driver)))
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (n, ss) = values.fold((0usize, 0.0), |(n, s), v| (n + 1, s + v * v));
    if n == 0 {
        0.0
    } else {
        (ss / n as f64).sqrt()
    }
}

/// Contiguous runs of records inside lane-keeping areas, as index ranges.
pub fn lk_runs(records: &[LogRecord], course: &Course) -> Vec<std::ops::Range<usize>> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, r) in records.iter().enumerate() {
        match (course.in_lk_area(r.x), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push(s..records.len());
    }
    runs
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcMeasure {
    pub segment: LcSegment,
    pub stats: LcStats,
    pub overshoot: Overshoot,
}

/// Per-trial measures.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    pub condition: String,
    pub seed: u64,
    /// Mean over lane-keeping runs of each run's lateral-position SD (m).
    pub sdlp: f64,
    /// Reversals per minute over lane-keeping runs.
    pub swrr: f64,
    pub driver_torque_rms: f64,
    pub lane_changes: Vec<LcMeasure>,
}

impl TrialMetrics {
    fn lc_mean(&self, f: impl Fn(&LcMeasure) -> f64) -> f64 {
        if self.lane_changes.is_empty() {
            return f64::NAN;
        }
        self.lane_changes.iter().map(f).sum::<f64>() / self.lane_changes.len() as f64
    }

    /// The per-trial value of every summarised measure, in [`MEASURES`] order.
    pub fn values(&self) -> [f64; 8] {
        [
            self.sdlp,
            self.swrr,
            self.driver_torque_rms,
            self.lane_changes.len() as f64,
            self.lc_mean(|m| m.stats.duration),
            self.lc_mean(|m| m.overshoot.distance),
            self.lc_mean(|m| m.stats.rms_steer_vel),
            self.lc_mean(|m| m.stats.peak_angle),
        ]
    }
}

pub const MEASURES: [&str; 8] =
    ["sdlp", "swrr", "driver_torque_rms", "lc_count", "lc_duration", "overshoot", "rms_steer_vel", "peak_angle"];

/// Full battery for one trial on its course.
pub fn evaluate(log: &DriveLog, course: &Course, cfg: &MetricsConfig) -> Result<TrialMetrics> {
    cfg.validate()?;
    let gap = cfg.swrr_gap_deg.to_radians();
    let mut sds = Vec::new();
    let mut reversals = 0;
    let mut lk_time = 0.0;
    for run in lk_runs(&log.records, course) {
        let recs = &log.records[run];
        let ys: Vec<f64> = recs.iter().map(|r| r.y).collect();
        if ys.len() >= 2 {
            sds.push(sdlp(&ys)?);
        }
        let theta: Vec<f64> = recs.iter().map(|r| r.theta_sw).collect();
        reversals += reversal_count(&theta, gap);
        lk_time += recs.len() as f64 * log.dt;
    }
    if sds.is_empty() {
        return Err(Error::InsufficientData(format!("{}: no lane-keeping samples", log.file_name())));
    }
    let geometry = &course.geometry;
    let lane_changes = segment_lc(log, geometry, cfg)
        .into_iter()
        .map(|segment| LcMeasure {
            segment,
            stats: lc_stats(log, &segment),
            overshoot: overshoot(log, &segment, geometry.lane_center(segment.target_lane), cfg.overshoot_window),
        })
        .collect();
    Ok(TrialMetrics {
        condition: log.condition.clone(),
        seed: log.seed,
        sdlp: sds.iter().sum::<f64>() / sds.len() as f64,
        swrr: reversals as f64 / (lk_time / 60.0),
        driver_torque_rms: driver_torque_rms(log)?,
        lane_changes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    Condition,
    Strength,
    Pace,
}

impl Grouping {
    pub const ALL: [Grouping; 3] = [Grouping::Condition, Grouping::Strength, Grouping::Pace];

    pub fn label(&self) -> &'static str {
        match self {
            Grouping::Condition => "condition",
            Grouping::Strength => "strength",
            Grouping::Pace => "pace",
        }
    }

    /// Group key of a condition name such as `strong-normal`; `None` when
    /// the condition has no member in this grouping (manual has no pace).
    pub fn key(&self, condition: &str) -> Option<String> {
        let mut parts = condition.splitn(2, '-');
        let strength = parts.next().unwrap_or_default();
        let pace = parts.next();
        match self {
            Grouping::Condition => Some(condition.to_string()),
            Grouping::Strength => Some(strength.to_string()),
            Grouping::Pace => pace.map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Mean, sample SD and normal-approximation 95 % interval. NaN inputs
/// (trials without a lane change) are skipped.
pub fn describe(values: &[f64]) -> Result<Stats> {
    let v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    let n = v.len();
    if n == 0 {
        return Err(Error::InsufficientData("no values to summarise".into()));
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 { sdlp(&v)? } else { 0.0 };
    let half = Z95 * sd / (n as f64).sqrt();
    Ok(Stats { n, mean, sd, ci_low: mean - half, ci_high: mean + half })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub grouping: Grouping,
    pub group: String,
    pub measure: &'static str,
    pub stats: Stats,
}

/// One row per (group, measure) for each requested grouping.
pub fn summarize(trials: &[TrialMetrics], groupings: &[Grouping]) -> Result<Vec<SummaryRow>> {
    if trials.is_empty() {
        return Err(Error::InsufficientData("no trials to summarise".into()));
    }
    let mut rows = Vec::new();
    for &grouping in groupings {
        let mut groups: BTreeMap<String, Vec<&TrialMetrics>> = BTreeMap::new();
        for t in trials {
            if let Some(k) = grouping.key(&t.condition) {
                groups.entry(k).or_default().push(t);
            }
        }
        for (group, members) in groups {
            for (m, measure) in MEASURES.iter().enumerate() {
                let values: Vec<f64> = members.iter().map(|t| t.values()[m]).collect();
                if values.iter().all(|v| v.is_nan()) {
                    continue;
                }
                rows.push(SummaryRow { grouping, group: group.clone(), measure, stats: describe(&values)? });
            }
        }
    }
    Ok(rows)
}

/// Column names of the per-trial table.
pub fn trial_header() -> Vec<&'static str> {
    let mut header = vec!["condition", "seed"];
    header.extend(MEASURES);
    header.extend(["unterminated_lc", "truncated_overshoot"]);
    header
}

pub fn trial_row(t: &TrialMetrics) -> Vec<String> {
    let mut row = vec![t.condition.clone(), t.seed.to_string()];
    row.extend(t.values().iter().map(|v| v.to_string()));
    row.push(t.lane_changes.iter().filter(|m| m.segment.unterminated).count().to_string());
    row.push(t.lane_changes.iter().filter(|m| m.overshoot.truncated).count().to_string());
    row
}

pub fn write_trials_csv<W: Write>(trials: &[TrialMetrics], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trial_header())?;
    for t in trials {
        w.write_record(trial_row(t))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["grouping", "group", "measure", "n", "mean", "sd", "ci_low", "ci_high"])?;
    for r in rows {
        let s = &r.stats;
        w.write_record([
            r.grouping.label().to_string(),
            r.group.clone(),
            r.measure.to_string(),
            s.n.to_string(),
            s.mean.to_string(),
            s.sd.to_string(),
            s.ci_low.to_string(),
            s.ci_high.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed-width table for terminals.
pub fn pretty_summary(rows: &[SummaryRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10} {:<14} {:<18} {:>3} {:>12} {:>12} {:>12} {:>12}",
        "grouping", "group", "measure", "n", "mean", "sd", "ci_low", "ci_high"
    );
    for r in rows {
        let st = &r.stats;
        let _ = writeln!(
            s,
            "{:<10} {:<14} {:<18} {:>3} {:>12.5} {:>12.5} {:>12.5} {:>12.5}",
            r.grouping.label(),
            r.group,
            r.measure,
            st.n,
            st.mean,
            st.sd,
            st.ci_low,
            st.ci_high
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::authority::AssistMode;
    use proptest::prelude::*;

    fn log_from(records: Vec<LogRecord>) -> DriveLog {
        DriveLog { condition: "manual".into(), seed: 1, dt: 1.0 / 60.0, records }
    }

    fn triangle(amplitude_deg: f64, period: f64, seconds: f64, dt: f64) -> Vec<f64> {
        let n = (seconds / dt).round() as usize;
        (0..n)
            .map(|i| {
                let ph = (i as f64 * dt / period).fract();
                let a = amplitude_deg.to_radians();
                // 0 → +a → 0 → −a → 0 over one period
                if ph < 0.25 {
                    4.0 * a * ph
                } else if ph < 0.75 {
                    a * (2.0 - 4.0 * ph)
                } else {
                    a * (4.0 * ph - 4.0)
                }
            })
            .collect()
    }

    #[test]
    fn sdlp_examples() {
        assert_eq!(sdlp(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(sdlp(&[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert!(sdlp(&[1.0]).is_err());
    }

    #[test]
    fn swrr_triangle_waves() {
        let dt = 1.0 / 60.0;
        let gap = 3f64.to_radians();
        let big = triangle(10.0, 2.0, 60.0, dt);
        assert_eq!(reversal_count(&big, gap), 60);
        assert_eq!(swrr(&big, gap, 60.0).unwrap(), 60.0);
        assert_eq!(swrr(&triangle(1.0, 2.0, 60.0, dt), gap, 60.0).unwrap(), 0.0);
    }

    #[test]
    fn swrr_ramp_and_bad_duration() {
        let ramp: Vec<f64> = (0..600).map(|i| i as f64 * 0.01).collect();
        assert_eq!(swrr(&ramp, 0.05, 10.0).unwrap(), 0.0);
        assert!(swrr(&ramp, 0.05, 0.0).is_err());
    }

    #[test]
    fn plateau_resolves_to_last_sample() {
        let theta = [0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0];
        assert_eq!(stationary_points(&theta), vec![0, 4]);
    }

    fn lc_log(pulse_peak: f64, t_total: f64) -> (DriveLog, Vec<f64>) {
        // yaw pulse psi(t) = peak·sin²(π t / T) over T = 6 s starting at t0 = 2 s,
        // with y integrating v·sin(psi)
        let dt = 1.0 / 60.0;
        let v = 20.0;
        let (t0, tp) = (2.0, 6.0);
        let n = (t_total / dt) as usize;
        let mut y = 1.75;
        let mut recs = Vec::with_capacity(n);
        let mut psis = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 * dt;
            let psi = if t > t0 && t < t0 + tp { pulse_peak * (std::f64::consts::PI * (t - t0) / tp).sin().powi(2) } else { 0.0 };
            recs.push(LogRecord { t, x: v * t, y, psi, v_x: v, mode: AssistMode::LaneKeep, ..Default::default() });
            psis.push(psi);
            y += v * psi.sin() * dt;
        }
        (log_from(recs), psis)
    }

    #[test]
    fn segment_bounds_match_analytic_crossings() {
        let peak = 3f64.to_radians();
        let (log, _) = lc_log(peak, 14.0);
        let geom = LaneGeometry::default();
        let cfg = MetricsConfig::default();
        let segs = segment_lc(&log, &geom, &cfg);
        assert_eq!(segs.len(), 1);
        let s = segs[0];
        assert_eq!(s.direction, Direction::Left);
        assert_eq!(s.target_lane, 1);
        assert!(!s.unterminated);
        // analytic crossings of peak·sin²(π τ / 6)
        let cross = |level: f64| 6.0 / std::f64::consts::PI * (level / peak).sqrt().asin();
        let t_on = 2.0 + cross(0.5f64.to_radians());
        let t_off = 2.0 + 6.0 - cross(0.2f64.to_radians());
        let dt = log.dt;
        assert!((s.start_t - t_on).abs() <= dt + 1e-12, "{} vs {}", s.start_t, t_on);
        assert!(log.records[s.end].y >= 3.5);
        assert!((s.end_t - t_off).abs() <= dt + 1e-12, "{} vs {}", s.end_t, t_off);
    }

    #[test]
    fn excursion_back_into_the_origin_lane_is_dropped() {
        // a 0.6° yaw pulse drifts well under a metre and never leaves lane 0
        let (log, _) = lc_log(0.6f64.to_radians(), 14.0);
        assert!(log.records.iter().all(|r| r.y < 3.5));
        assert!(segment_lc(&log, &LaneGeometry::default(), &MetricsConfig::default()).is_empty());
    }

    #[test]
    fn pure_lane_keeping_has_no_segments() {
        let (log, _) = lc_log(0.0, 10.0);
        assert!(segment_lc(&log, &LaneGeometry::default(), &MetricsConfig::default()).is_empty());
    }

    #[test]
    fn unterminated_segment_is_flagged() {
        let (log, _) = lc_log(3f64.to_radians(), 6.0);
        let segs = segment_lc(&log, &LaneGeometry::default(), &MetricsConfig::default());
        assert_eq!(segs.len(), 1);
        assert!(segs[0].unterminated);
        assert_eq!(segs[0].end, log.records.len() - 1);
    }

    #[test]
    fn overshoot_examples() {
        let dt = 1.0 / 60.0;
        let recs: Vec<LogRecord> = (0..600)
            .map(|i| {
                let t = i as f64 * dt;
                let y = if (3.0..4.0).contains(&t) { 5.55 } else { 5.25 };
                LogRecord { t, y, ..Default::default() }
            })
            .collect();
        let log = log_from(recs);
        let seg = |end: usize| LcSegment {
            start: 0,
            end,
            start_t: 0.0,
            end_t: end as f64 * dt,
            direction: Direction::Left,
            target_lane: 1,
            unterminated: false,
        };
        let o = overshoot(&log, &seg(120), 5.25, 3.0);
        assert!((o.distance - 0.3).abs() < 1e-12);
        assert!(!o.truncated);
        assert_eq!(overshoot(&log, &seg(300), 5.25, 3.0).distance, 0.0);
        assert!(overshoot(&log, &seg(500), 5.25, 3.0).truncated);
    }

    #[test]
    fn lc_stats_examples() {
        let recs: Vec<LogRecord> =
            (0..100).map(|i| LogRecord { t: i as f64 / 60.0, theta_sw: -0.2, theta_sw_dot: 0.7, ..Default::default() }).collect();
        let log = log_from(recs);
        let seg = LcSegment {
            start: 10,
            end: 50,
            start_t: 10.0 / 60.0,
            end_t: 50.0 / 60.0,
            direction: Direction::Right,
            target_lane: 0,
            unterminated: false,
        };
        let s = lc_stats(&log, &seg);
        assert!((s.rms_steer_vel - 0.7).abs() < 1e-15);
        assert_eq!(s.peak_angle, 0.2);
        assert!((s.duration - 40.0 / 60.0).abs() < 1e-15);
    }

    #[test]
    fn torque_rms_examples() {
        let mk = |c: f64| log_from((0..10).map(|i| LogRecord { t: i as f64, tau_driver: c, ..Default::default() }).collect());
        assert_eq!(driver_torque_rms(&mk(0.0)).unwrap(), 0.0);
        assert!((driver_torque_rms(&mk(-1.5)).unwrap() - 1.5).abs() < 1e-15);
        assert!(driver_torque_rms(&log_from(vec![])).is_err());
    }

    #[test]
    fn describe_examples() {
        let one = describe(&[2.5]).unwrap();
        assert_eq!((one.mean, one.sd), (2.5, 0.0));
        let two = describe(&[1.0, 1.0]).unwrap();
        assert_eq!(two.ci_high - two.ci_low, 0.0);
        assert!(describe(&[]).is_err());
        assert_eq!(describe(&[1.0, f64::NAN, 3.0]).unwrap().n, 2);
    }

    #[test]
    fn grouping_keys() {
        assert_eq!(Grouping::Strength.key("strong-rapid").as_deref(), Some("strong"));
        assert_eq!(Grouping::Pace.key("weak-gentle").as_deref(), Some("gentle"));
        assert_eq!(Grouping::Pace.key("manual"), None);
        assert_eq!(Grouping::Condition.key("manual").as_deref(), Some("manual"));
    }

    #[test]
    fn metrics_config_validation() {
        assert!(MetricsConfig::default().validate().is_ok());
        assert!(MetricsConfig { psi_off_deg: 0.6, ..Default::default() }.validate().is_err());
    }

    proptest! {
        #[test]
        fn swrr_ignores_constant_offset(
            ticks in proptest::collection::vec(-512i32..512, 2..400),
            offset in -10i32..10,
        ) {
            // dyadic samples keep the shifted differences exact
            let theta: Vec<f64> = ticks.iter().map(|&t| t as f64 / 1024.0).collect();
            let shifted: Vec<f64> = theta.iter().map(|t| t + offset as f64).collect();
            let gap = 3f64.to_radians();
            prop_assert_eq!(swrr(&theta, gap, 60.0).unwrap(), swrr(&shifted, gap, 60.0).unwrap());
        }

        #[test]
        fn sdlp_is_shift_invariant(
            ys in proptest::collection::vec(-3.0f64..3.0, 2..200),
            c in -5.0f64..5.0,
        ) {
            let shifted: Vec<f64> = ys.iter().map(|y| y + c).collect();
            let a = sdlp(&ys).unwrap();
            let b = sdlp(&shifted).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
        }
    }
}
