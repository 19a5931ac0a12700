//! The expressway experiment: course construction, the closed-loop trial and
//! the condition × seed matrix.
//!
//! Per-step order inside [`run_trial`]:
//!
//! 1. sense the vehicle and push a feature sample; query the predictor;
//! 2. update the consistency detector with the previous step's guidance
//!    torque, driver torque and heading-error rate;
//! 3. advance the authority gain, then the assist mode (which may re-plan);
//! 4. compute preview errors against the (possibly new) plan;
//! 5. compute the haptic torques;
//! 6. step the driver;
//! 7. integrate the column, then the vehicle;
//! 8. log the pre-step state with every signal computed from it.
//!
//! Record `i` therefore holds exactly the values that produced record `i + 1`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::authority::{step_gain, step_mode, AssistMode, AuthorityConfig, AuthorityState, ModeContext, ModeEvent};
use crate::consistency::{ConsistencyConfig, ConsistencyDetector};
use crate::controller::{ControllerConfig, HapticController, Strength};
use crate::driver::{Driver, DriverParams, IntentEvent, IntentSchedule};
use crate::dynamics::{front_slip_angle, step_column, step_vehicle, ColumnParams, SteeringState, VehicleParams, VehicleState};
use crate::error::{Error, Result};
use crate::intent::{
    predict, ExternalPredictor, FeatureSample, FeatureWindow, HeuristicPredictor, HeuristicThresholds, IntentPredictor,
    OraclePredictor, PredictorChoice, SampleStamp,
};
use crate::trajectory::{plan_lane_change, plan_lane_keep, LaneGeometry, PreviewTracker};

pub use crate::telemetry::{DriveLog, LogRecord};

/// One row of the experimental condition table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub strength: Strength,
    /// Assisted lane-change duration (s); `None` for manual driving.
    pub delta_t_lc: Option<f64>,
}

/// Lane-change paces and their durations (s).
pub const PACES: [(&str, f64); 3] = [("rapid", 4.0), ("normal", 6.0), ("gentle", 8.0)];

impl Condition {
    pub const MANUAL: Condition = Condition { strength: Strength::Manual, delta_t_lc: None };
    pub const STRONG_NORMAL: Condition = Condition { strength: Strength::Strong, delta_t_lc: Some(6.0) };

    pub fn new(strength: Strength, delta_t_lc: Option<f64>) -> Result<Self> {
        let c = Condition { strength, delta_t_lc };
        if Self::all().contains(&c) {
            Ok(c)
        } else {
            Err(Error::Config(format!("{strength:?} with ΔT_LC = {delta_t_lc:?} is not an experimental condition")))
        }
    }

    /// The seven conditions in table order.
    pub fn all() -> [Condition; 7] {
        let mut out = [Self::MANUAL; 7];
        let mut i = 1;
        for strength in [Strength::Strong, Strength::Weak] {
            for (_, dt) in PACES {
                out[i] = Condition { strength, delta_t_lc: Some(dt) };
                i += 1;
            }
        }
        out
    }

    pub fn group(&self) -> &'static str {
        match self.strength {
            Strength::Manual => "manual",
            Strength::Strong => "strong",
            Strength::Weak => "weak",
        }
    }

    pub fn pace(&self) -> Option<&'static str> {
        let dt = self.delta_t_lc?;
        PACES.iter().find(|(_, d)| *d == dt).map(|(n, _)| *n)
    }

    pub fn name(&self) -> String {
        match self.pace() {
            Some(p) => format!("{}-{}", self.group(), p),
            None => self.group().to_string(),
        }
    }

    /// Conditions whose name matches a pattern with an optional trailing `*`.
    pub fn matching(pattern: &str) -> Vec<Condition> {
        let pattern = pattern.to_ascii_lowercase();
        Self::all()
            .into_iter()
            .filter(|c| match pattern.strip_suffix('*') {
                Some(prefix) => c.name().starts_with(prefix),
                None => c.name() == pattern,
            })
            .collect()
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        Self::all().into_iter().find(|c| c.name() == s).ok_or_else(|| Error::Config(format!("unknown condition {s:?}")))
    }
}

/// A scripted lane change of the course.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LcEventSpec {
    /// Where the driver starts steering (m).
    pub trigger_x: f64,
    pub target_lane: usize,
    /// A slower lead vehicle motivates the change; otherwise it is a free change.
    pub lead_vehicle: bool,
    #[serde(default = "default_true")]
    pub comply_with_assist: bool,
}

fn default_true() -> bool {
    true
}

/// Which driver torque feeds the consistency detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriverTorqueSource {
    /// The torque actually applied to the column.
    #[default]
    Measured,
    /// The controller's preview-point estimate.
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreviewConfig {
    pub t_preview: f64,
    /// Cutoff of the heading-error-rate low-pass (Hz); `0` disables it.
    pub lowpass_hz: f64,
}

impl Default for PreviewConfig {
    fn default() -> Self {
        Self { t_preview: 0.8, lowpass_hz: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub dt: f64,
    pub geometry: LaneGeometry,
    pub start_lane: usize,
    pub ego_speed_kmh: f64,
    /// Range of the lead-vehicle speed deficit (km/h), sampled uniformly.
    pub lead_deficit_kmh: [f64; 2],
    /// Magnitude of the ego speed dip acceleration (m/s²).
    pub speed_change_accel: f64,
    /// Longest assisted lane-change duration, used to size the lane-change zones (s).
    pub max_lc_duration: f64,
    /// Distance excluded around each lane-change zone; defaults to the
    /// longest lane change at cruise speed.
    pub lc_zone_buffer: Option<f64>,
    /// Lateral distance beyond the road edges that aborts a trial (m).
    pub offroad_margin: f64,
    pub events: Vec<LcEventSpec>,
    /// Road positions where the predictor output is forced to 1 for one step.
    pub false_triggers: Vec<f64>,
    pub vehicle: VehicleParams,
    pub column: ColumnParams,
    pub controller: ControllerConfig,
    pub consistency: ConsistencyConfig,
    pub consistency_torque: DriverTorqueSource,
    pub authority: AuthorityConfig,
    pub preview: PreviewConfig,
    pub driver: DriverParams,
    pub predictor: PredictorChoice,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let ev = |trigger_x, target_lane, lead_vehicle| LcEventSpec {
            trigger_x,
            target_lane,
            lead_vehicle,
            comply_with_assist: true,
        };
        Self {
            dt: 1.0 / 60.0,
            geometry: LaneGeometry::default(),
            start_lane: 1,
            ego_speed_kmh: 70.0,
            lead_deficit_kmh: [5.0, 15.0],
            speed_change_accel: 1.0,
            max_lc_duration: 8.0,
            lc_zone_buffer: None,
            offroad_margin: 1.0,
            events: vec![ev(1500.0, 0, true), ev(3300.0, 1, true), ev(5100.0, 0, true), ev(6900.0, 1, false)],
            false_triggers: Vec::new(),
            vehicle: VehicleParams::default(),
            column: ColumnParams::default(),
            controller: ControllerConfig::default(),
            consistency: ConsistencyConfig::default(),
            consistency_torque: DriverTorqueSource::Measured,
            authority: AuthorityConfig::default(),
            preview: PreviewConfig::default(),
            driver: DriverParams::default(),
            predictor: PredictorChoice::Oracle,
        }
    }
}

impl ScenarioConfig {
    pub fn ego_speed(&self) -> f64 {
        self.ego_speed_kmh / 3.6
    }

    pub fn zone_buffer(&self) -> f64 {
        self.lc_zone_buffer.unwrap_or(self.max_lc_duration * self.ego_speed())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.1) {
            return Err(Error::Config(format!("dt = {} outside (0, 0.1]", self.dt)));
        }
        self.geometry.validate()?;
        self.vehicle.validate()?;
        self.column.validate()?;
        self.driver.validate()?;
        if !self.geometry.is_valid_lane(self.start_lane) {
            return Err(Error::Config(format!("start lane {} does not exist", self.start_lane)));
        }
        if !(self.ego_speed_kmh > 0.0) {
            return Err(Error::Config("ego speed must be positive".into()));
        }
        let [lo, hi] = self.lead_deficit_kmh;
        if !(lo >= 0.0 && hi >= lo && hi < self.ego_speed_kmh) {
            return Err(Error::Config(format!("lead deficit range [{lo}, {hi}] km/h is invalid")));
        }
        if !(self.speed_change_accel > 0.0) || !(self.max_lc_duration > 0.0) || !(self.offroad_margin >= 0.0) {
            return Err(Error::Config("speed_change_accel, max_lc_duration must be positive".into()));
        }
        if !(self.preview.t_preview > 0.0) || !(self.preview.lowpass_hz >= 0.0) {
            return Err(Error::Config("preview time must be positive and the cutoff non-negative".into()));
        }
        let mut lane = self.start_lane;
        for e in &self.events {
            if !self.geometry.is_valid_lane(e.target_lane) || e.target_lane == lane {
                return Err(Error::Config(format!("event at {} m targets lane {} from lane {lane}", e.trigger_x, e.target_lane)));
            }
            lane = e.target_lane;
        }
        Ok(())
    }
}

/// A lane change placed on the course.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CourseEvent {
    pub trigger_x: f64,
    pub target_lane: usize,
    /// Lead-vehicle speed (m/s) for lead-triggered changes.
    pub lead_speed: Option<f64>,
    pub comply_with_assist: bool,
    /// Ego speed while the change runs (m/s).
    pub ego_speed: f64,
    /// Where the driver's own plan crosses the lane boundary (m).
    pub crossing_x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SpeedDip {
    decel_start: f64,
    hold_start: f64,
    hold_end: f64,
    accel_end: f64,
    low: f64,
}

/// Geometry, scripted events and the ego speed profile of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Course {
    pub geometry: LaneGeometry,
    pub start_lane: usize,
    pub cruise_speed: f64,
    pub events: Vec<CourseEvent>,
    /// Lane-change areas including their buffers; the rest is lane keeping.
    pub lc_zones: Vec<(f64, f64)>,
    accel: f64,
    dips: Vec<SpeedDip>,
}

impl Course {
    pub fn schedule(&self) -> IntentSchedule {
        IntentSchedule {
            events: self
                .events
                .iter()
                .map(|e| IntentEvent { trigger_x: e.trigger_x, target_lane: e.target_lane, comply_with_assist: e.comply_with_assist })
                .collect(),
        }
    }

    pub fn speed_at(&self, x: f64) -> f64 {
        let v0 = self.cruise_speed;
        for d in &self.dips {
            if x < d.decel_start || x > d.accel_end {
                continue;
            }
            return if x < d.hold_start {
                (v0 * v0 - 2.0 * self.accel * (x - d.decel_start)).max(d.low * d.low).sqrt()
            } else if x <= d.hold_end {
                d.low
            } else {
                (d.low * d.low + 2.0 * self.accel * (x - d.hold_end)).min(v0 * v0).sqrt()
            };
        }
        v0
    }

    /// Longitudinal acceleration of the speed profile at `x`.
    pub fn accel_at(&self, x: f64) -> f64 {
        for d in &self.dips {
            if x >= d.decel_start && x < d.hold_start {
                return -self.accel;
            }
            if x > d.hold_end && x < d.accel_end {
                return self.accel;
            }
        }
        0.0
    }

    pub fn in_lk_area(&self, x: f64) -> bool {
        !self.lc_zones.iter().any(|&(a, b)| x >= a && x <= b)
    }
}

/// Lays out the scripted lane changes and draws the lead-vehicle speeds.
pub fn build_course(cfg: &ScenarioConfig, seed: u64) -> Result<Course> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let v0 = cfg.ego_speed();
    let buffer = cfg.zone_buffer();
    let a = cfg.speed_change_accel;
    let [lo, hi] = cfg.lead_deficit_kmh;

    let mut events = Vec::new();
    let mut zones: Vec<(f64, f64)> = Vec::new();
    let mut dips = Vec::new();
    for spec in &cfg.events {
        let lead_speed = spec.lead_vehicle.then(|| {
            let deficit = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
            v0 - deficit / 3.6
        });
        let ego_speed = lead_speed.unwrap_or(v0);
        let zone = (spec.trigger_x - buffer, spec.trigger_x + cfg.max_lc_duration * v0 + buffer);
        if let Some(prev) = zones.last() {
            if zone.0 <= prev.1 {
                return Err(Error::Config(format!("lane-change zone at {} m overlaps the previous one", spec.trigger_x)));
            }
        }
        if spec.trigger_x < 0.0 || spec.trigger_x + cfg.max_lc_duration * v0 > cfg.geometry.course_length {
            return Err(Error::Config(format!("lane change at {} m does not fit on the course", spec.trigger_x)));
        }
        if let Some(low) = lead_speed {
            let span = (v0 * v0 - low * low) / (2.0 * a);
            let hold_start = spec.trigger_x - low * (cfg.driver.glance_lead + 1.0);
            let hold_end = spec.trigger_x + low * cfg.max_lc_duration;
            dips.push(SpeedDip { decel_start: hold_start - span, hold_start, hold_end, accel_end: hold_end + span, low });
        }
        zones.push(zone);
        events.push(CourseEvent {
            trigger_x: spec.trigger_x,
            target_lane: spec.target_lane,
            lead_speed,
            comply_with_assist: spec.comply_with_assist,
            ego_speed,
            crossing_x: spec.trigger_x + ego_speed * cfg.driver.lc_duration / 2.0,
        });
    }
    for pair in dips.windows(2) {
        if pair[1].decel_start <= pair[0].accel_end {
            return Err(Error::Config("speed dips of consecutive lane changes overlap".into()));
        }
    }
    let course = Course {
        geometry: cfg.geometry,
        start_lane: cfg.start_lane,
        cruise_speed: v0,
        events,
        lc_zones: zones,
        accel: a,
        dips,
    };
    course.schedule().validate(cfg.geometry.course_length)?;
    Ok(course)
}

/// Predictor used by a trial. The oracle is built per trial from the course.
#[derive(Clone)]
pub enum PredictorSpec {
    Oracle,
    Shared(Arc<dyn IntentPredictor>),
}

impl PredictorSpec {
    pub fn from_choice(choice: &PredictorChoice) -> Result<Self> {
        Ok(match choice {
            PredictorChoice::Oracle => PredictorSpec::Oracle,
            PredictorChoice::Heuristic(th) => PredictorSpec::heuristic(*th),
            PredictorChoice::External { command } => PredictorSpec::Shared(Arc::new(ExternalPredictor::spawn(command)?)),
        })
    }

    pub fn heuristic(thresholds: HeuristicThresholds) -> Self {
        PredictorSpec::Shared(Arc::new(HeuristicPredictor { thresholds }))
    }
}

impl fmt::Debug for PredictorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictorSpec::Oracle => f.write_str("Oracle"),
            PredictorSpec::Shared(p) => write!(f, "Shared({})", p.name()),
        }
    }
}

/// Distance from `y` to the boundary of the adjacent lane on the side of
/// `toward_lane`, or of the only neighbouring lane when there is one.
pub fn adjacent_lane_distance(geometry: &LaneGeometry, y: f64, toward_lane: usize, drift: f64) -> f64 {
    let lane = geometry.lane_of(y);
    let left = if toward_lane != lane {
        toward_lane > lane
    } else {
        match (geometry.boundary_towards(lane, true), geometry.boundary_towards(lane, false)) {
            (Some(_), None) => true,
            (None, Some(_)) => false,
            _ => drift >= 0.0,
        }
    };
    geometry.boundary_towards(lane, left).map_or(f64::INFINITY, |b| (b - y).abs())
}

/// Runs one seeded trial over the whole course.
pub fn run_trial(condition: Condition, cfg: &ScenarioConfig, predictor: &PredictorSpec, seed: u64) -> Result<DriveLog> {
    let course = build_course(cfg, seed)?;
    let oracle;
    let predictor: &dyn IntentPredictor = match predictor {
        PredictorSpec::Oracle => {
            oracle = OraclePredictor::from_positions(course.events.iter().map(|e| e.crossing_x).collect());
            &oracle
        }
        PredictorSpec::Shared(p) => p.as_ref(),
    };
    Trial::new(condition, cfg, &course, seed)?.run(predictor)
}

struct Trial<'a> {
    condition: Condition,
    cfg: &'a ScenarioConfig,
    course: &'a Course,
    seed: u64,
}

impl<'a> Trial<'a> {
    fn new(condition: Condition, cfg: &'a ScenarioConfig, course: &'a Course, seed: u64) -> Result<Self> {
        Condition::new(condition.strength, condition.delta_t_lc)?;
        Ok(Self { condition, cfg, course, seed })
    }

    fn run(&self, predictor: &dyn IntentPredictor) -> Result<DriveLog> {
        let cfg = self.cfg;
        let geom = cfg.geometry;
        let dt = cfg.dt;
        let assisted = self.condition.strength != Strength::Manual;
        let lc_duration = self.condition.delta_t_lc.unwrap_or(cfg.driver.lc_duration);

        let mut v = VehicleState::cruising(0.0, geom.lane_center(cfg.start_lane), self.course.speed_at(0.0));
        let mut s = SteeringState::default();
        let mut window = FeatureWindow::new(dt);
        let mut detector = ConsistencyDetector::new(cfg.consistency, dt)?;
        let mut auth = AuthorityState::default();
        let mut plan = plan_lane_keep(&geom, cfg.start_lane)?;
        let lowpass = (cfg.preview.lowpass_hz > 0.0).then_some(cfg.preview.lowpass_hz);
        let mut tracker = PreviewTracker::new(cfg.preview.t_preview, dt, lowpass);
        let mut controller = HapticController::new(cfg.controller.clone(), dt);
        let mut driver = Driver::new(cfg.driver, dt, self.seed)?;
        let mut driver_plan = plan;

        let mut next_event = 0;
        let mut active: Option<usize> = None;
        let mut next_false = 0;
        let mut prev = (0.0, 0.0, 0.0);
        let mut last_e_theta = 0.0;
        let mut head = 0.0;

        let expected = (geom.course_length / self.course.cruise_speed / dt) as usize + 1;
        let mut records = Vec::with_capacity(expected + expected / 8);
        let mut step: u64 = 0;

        while v.x < geom.course_length {
            let t = step as f64 * dt;

            // sense and predict
            let delta = cfg.vehicle.road_wheel_angle(s.theta_sw);
            let alpha = front_slip_angle(&v, delta, &cfg.vehicle)?;
            let d_adj = adjacent_lane_distance(&geom, v.y, driver_plan.target_lane(), v.lateral_rate());
            window.push(
                FeatureSample { head, a: self.course.accel_at(v.x), v: v.v_x, theta_sw: s.theta_sw, d_adj, psi: v.psi },
                SampleStamp { t, x: v.x },
            );
            let mut intent = predict(predictor, &window)?;
            if next_false < cfg.false_triggers.len() && v.x >= cfg.false_triggers[next_false] {
                intent = true;
                next_false += 1;
            }

            // consistency on the previous step's torques
            let cs = detector.update(prev.0, prev.1, prev.2);

            // authority
            auth = step_gain(&auth, cs.verdict, dt, &cfg.authority);
            let ctx = ModeContext { geometry: &geom, vehicle: &v, e_theta: last_e_theta, delta_t_lc: lc_duration };
            let (next_auth, next_plan, event) = step_mode(&auth, intent, &plan, &ctx, &cfg.authority)?;
            auth = next_auth;
            plan = next_plan;
            let plan_changed = event != ModeEvent::None;

            // guidance
            let e = tracker.update(&v, &plan, plan_changed);
            let kappa = plan.eval(v.x).curvature();
            let theta_ref = HapticController::reference_wheel_angle(&cfg.vehicle, v.v_x, kappa);
            let torque =
                controller.compute(&s, &e, alpha, theta_ref, plan_changed, auth.k_h, self.condition.strength, &cfg.column)?;

            // driver intentions
            let mut glance = 0.0;
            if let Some(ev) = self.course.events.get(next_event) {
                if active.is_none() && v.x >= ev.trigger_x - v.v_x * cfg.driver.glance_lead {
                    active = Some(next_event);
                }
                if v.x >= ev.trigger_x {
                    if geom.lane_of(v.y) != ev.target_lane {
                        driver_plan = plan_lane_change(&geom, v.x, v.y, ev.target_lane, v.v_x, cfg.driver.lc_duration)?;
                    }
                    next_event += 1;
                }
            }
            if let Some(k) = active {
                let ev = self.course.events[k];
                let lane = geom.lane_of(v.y);
                if next_event > k && lane == ev.target_lane {
                    active = None;
                } else {
                    glance = if ev.target_lane > lane { 1.0 } else { -1.0 };
                    let complies = assisted && ev.comply_with_assist;
                    if complies && auth.mode == AssistMode::LaneChange && plan.target_lane() == ev.target_lane {
                        driver_plan = plan;
                    }
                }
            }
            if driver_plan.is_complete_at(v.x) {
                driver_plan = plan_lane_keep(&geom, driver_plan.target_lane())?;
            }
            driver.set_resist(plan.target_lane() != driver_plan.target_lane());
            let out = driver.step(&v, &s, &driver_plan, glance);

            // plant
            let load = cfg.column.load_torque(s.theta_sw_dot, alpha);
            let s_next = step_column(&s, out.tau_driver, torque.tau_hapa, load, dt, &cfg.column)?;
            let mut v_next = step_vehicle(&v, cfg.vehicle.road_wheel_angle(s_next.theta_sw), dt, &cfg.vehicle)?;
            v_next.v_x = self.course.speed_at(v_next.x);

            records.push(LogRecord {
                t,
                x: v.x,
                y: v.y,
                psi: v.psi,
                v_x: v.v_x,
                v_y: v.v_y,
                r: v.r,
                theta_sw: s.theta_sw,
                theta_sw_dot: s.theta_sw_dot,
                tau_driver: out.tau_driver,
                tau_hapi: torque.tau_hapi,
                tau_hapa: torque.tau_hapa,
                k_h: auth.k_h,
                mode: auth.mode,
                verdict: auth.verdict,
                intent,
                e_y: e.e_y,
                e_theta: e.e_theta,
                e_theta_dot: e.e_theta_dot,
                w_hapi: cs.w_hapi,
                w_dr: cs.w_dr,
                s_c: cs.s_c,
                head_yaw: head,
                lane_id: geom.lane_of(v.y),
                k_shifting: auth.k_shifting,
                replanned: auth.replanned,
            });

            let tau_dr_for_consistency = match cfg.consistency_torque {
                DriverTorqueSource::Measured => out.tau_driver,
                DriverTorqueSource::Estimated => torque.tau_dr_hat,
            };
            prev = (torque.tau_hapi, tau_dr_for_consistency, e.e_theta_dot);
            last_e_theta = e.e_theta;
            head = out.head_yaw;
            v = v_next;
            s = s_next;
            step += 1;

            let margin = cfg.offroad_margin;
            if v.y < -margin || v.y > geom.road_width() + margin {
                return Err(Error::TrialAborted {
                    t: step as f64 * dt,
                    reason: format!("vehicle left the road at x = {:.1} m, y = {:.2} m", v.x, v.y),
                });
            }
        }

        Ok(DriveLog { condition: self.condition.name(), seed: self.seed, dt, records })
    }
}

/// Result of one matrix cell.
#[derive(Debug)]
pub struct MatrixEntry {
    pub condition: Condition,
    pub seed: u64,
    pub log: Result<DriveLog>,
}

/// All condition × seed trials, run in parallel on the current rayon pool.
/// Entries come back in condition-major order regardless of scheduling.
pub fn run_matrix(conditions: &[Condition], cfg: &ScenarioConfig, predictor: &PredictorSpec, seeds: &[u64]) -> Vec<MatrixEntry> {
    let cells: Vec<(Condition, u64)> = conditions.iter().flat_map(|&c| seeds.iter().map(move |&s| (c, s))).collect();
    cells
        .into_par_iter()
        .map(|(condition, seed)| MatrixEntry { condition, seed, log: run_trial(condition, cfg, predictor, seed) })
        .collect()
}

/// The canned false lane-change episode: a short two-lane run with no
/// scripted lane changes, one forced intent pulse and a driver who keeps
/// their lane.
pub fn false_lc_config(base: &ScenarioConfig) -> ScenarioConfig {
    ScenarioConfig {
        geometry: LaneGeometry { course_length: 900.0, ..base.geometry },
        events: Vec::new(),
        false_triggers: vec![200.0],
        ..base.clone()
    }
}
