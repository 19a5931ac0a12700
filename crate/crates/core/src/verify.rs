//! Canned scenarios and invariant checks behind the `verify` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::authority::{gain_inconsistent, AssistMode, AuthorityConfig};
use crate::config::Config;
use crate::consistency::{classify, trapezoid_mean, Verdict};
use crate::error::Result;
use crate::scenario::{false_lc_config, run_trial, Condition, PredictorSpec, ScenarioConfig};
use crate::telemetry::DriveLog;
use crate::trajectory::{plan_lane_change, LaneGeometry, TrajectoryPlan};

/// Seed of the canned false lane-change trial.
pub const FALSE_LC_SEED: u64 = 1;
/// Offset allowance of a gain step at a verdict switch.
pub const SWITCH_OFFSET_BOUND: f64 = 3.4e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name, passed, detail: detail.into() }
    }
}

/// Timeline of a false lane-change episode read back from its log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FalseLcEpisode {
    /// First lane-change guidance step.
    pub onset: Option<f64>,
    /// First inconsistent verdict after the onset.
    pub switch: Option<f64>,
    /// First `K_h < 0.02` after the switch.
    pub collapsed: Option<f64>,
    /// Re-plans fired over the whole log.
    pub replans: usize,
    /// Every re-plan left lane-keep guidance in the lane the episode started in.
    pub replan_to_current_lane: bool,
    /// First consistent verdict after the switch.
    pub release: Option<f64>,
    /// First `K_h > 0.99` after the release.
    pub recovered: Option<f64>,
    /// Largest one-step `|ΔK_h|` at a verdict switch, with its allowance.
    pub worst_switch_step: Option<(f64, f64)>,
}

/// Largest one-step gain change allowed across a verdict switch: the start
/// offset allowance plus the steepest schedule slope over the first step.
pub fn switch_allowance(dt: f64, cfg: &AuthorityConfig) -> f64 {
    let c = (cfg.lambda * (dt - cfg.gamma)).cosh();
    SWITCH_OFFSET_BOUND + cfg.lambda / 2.0 / (c * c) * dt
}

pub fn analyze_false_lc(log: &DriveLog, cfg: &AuthorityConfig) -> FalseLcEpisode {
    let r = &log.records;
    let first = |from: f64, pred: &dyn Fn(usize) -> bool| (0..r.len()).find(|&i| r[i].t >= from && pred(i)).map(|i| r[i].t);
    let onset = first(0.0, &|i| r[i].mode == AssistMode::LaneChange);
    let switch = onset.and_then(|t0| first(t0, &|i| r[i].verdict == Verdict::Inconsistent));
    let collapsed = switch.and_then(|t0| first(t0, &|i| r[i].k_h < 0.02));
    let release = switch.and_then(|t0| first(t0, &|i| r[i].verdict == Verdict::Consistent));
    let recovered = release.and_then(|t0| first(t0, &|i| r[i].k_h > 0.99));

    let start_lane = onset.and_then(|t0| r.iter().find(|x| x.t >= t0)).map(|x| x.lane_id);
    let edges: Vec<usize> = (1..r.len()).filter(|&i| r[i].replanned && !r[i - 1].replanned).collect();
    let replan_to_current_lane = !edges.is_empty()
        && edges.iter().all(|&i| r[i].mode == AssistMode::LaneKeep && Some(r[i].lane_id) == start_lane)
        && r.last().map(|x| x.lane_id) == start_lane;

    let allowance = switch_allowance(log.dt, cfg);
    let worst_switch_step = (1..r.len())
        .filter(|&i| r[i].verdict != r[i - 1].verdict)
        .map(|i| (r[i].k_h - r[i - 1].k_h).abs())
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))))
        .map(|d| (d, allowance));

    FalseLcEpisode {
        onset,
        switch,
        collapsed,
        replans: edges.len(),
        replan_to_current_lane,
        release,
        recovered,
        worst_switch_step,
    }
}

fn span(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(b? - a?)
}

fn fmt_span(s: Option<f64>) -> String {
    s.map_or("never".to_string(), |v| format!("{v:.2} s"))
}

/// The canned false lane-change trial under `base`.
pub fn false_lc_trial(base: &ScenarioConfig) -> Result<DriveLog> {
    let cfg = false_lc_config(base);
    run_trial(Condition::STRONG_NORMAL, &cfg, &PredictorSpec::from_choice(&cfg.predictor)?, FALSE_LC_SEED)
}

/// Episode checks: detection, collapse, one re-plan, recovery, continuity.
pub fn false_lc_checks(log: &DriveLog, cfg: &AuthorityConfig) -> Vec<Check> {
    let ep = analyze_false_lc(log, cfg);
    let detect = span(ep.onset, ep.switch);
    let collapse = span(ep.switch, ep.collapsed);
    let recover = span(ep.release, ep.recovered);
    let mut out = vec![
        Check::new("false-lc detection", detect.is_some_and(|s| s <= 1.5), format!("inconsistent {} after onset", fmt_span(detect))),
        Check::new("false-lc gain collapse", collapse.is_some_and(|s| s <= 2.0), format!("K_h < 0.02 {} after switch", fmt_span(collapse))),
        Check::new(
            "false-lc single re-plan",
            ep.replans == 1 && ep.replan_to_current_lane,
            format!("{} re-plan(s), stays in lane: {}", ep.replans, ep.replan_to_current_lane),
        ),
        Check::new("false-lc recovery", recover.is_some_and(|s| s <= 3.0), format!("K_h > 0.99 {} after release", fmt_span(recover))),
    ];
    let continuity = match ep.worst_switch_step {
        Some((d, bound)) if ep.release.is_some() => Check::new("gain continuity", d <= bound, format!("max |ΔK_h| {d:.3e} (bound {bound:.3e})")),
        _ => Check::new("gain continuity", false, "fewer than two verdict switches"),
    };
    out.push(continuity);
    out
}

/// Recomputes the windowed pseudo-work from the logged torques and compares
/// it with the logged values. The detector sees the previous step's signals,
/// starting from a zero sample.
pub fn pseudo_work_mismatch(log: &DriveLog, window_intervals: usize) -> f64 {
    let r = &log.records;
    let product = |k: isize, f: &dyn Fn(usize) -> f64| if k < 0 { 0.0 } else { f(k as usize) * r[k as usize].e_theta_dot };
    let mut worst = 0.0f64;
    for i in 0..r.len() {
        let lo = i as isize - window_intervals as isize - 1;
        let ks: Vec<isize> = (lo.max(-1)..i as isize).collect();
        let w_hapi = trapezoid_mean(ks.iter().map(|&k| product(k, &|j| r[j].tau_hapi)).collect::<Vec<_>>().into_iter());
        let w_dr = trapezoid_mean(ks.iter().map(|&k| product(k, &|j| r[j].tau_driver)).collect::<Vec<_>>().into_iter());
        worst = worst.max((w_hapi - r[i].w_hapi).abs()).max((w_dr - r[i].w_dr).abs());
    }
    worst
}

fn schedule_check(cfg: &AuthorityConfig) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let worst = (0..1000)
        .map(|_| {
            let ks: f64 = rng.gen_range(1e-9..1.0);
            (gain_inconsistent(ks, cfg.gamma, cfg.lambda, cfg.gamma) - ks / 2.0).abs()
        })
        .fold(0.0, f64::max);
    Check::new("schedule midpoint", worst <= 1e-12, format!("max error {worst:.1e}"))
}

fn truth_table_check(delta: f64) -> Check {
    let mut wrong = 0;
    for s_c in [-1.0, 0.0, 1.0] {
        for beta in [delta / 2.0, delta, 2.0 * delta] {
            let expect = if s_c < 0.0 && beta > delta { Verdict::Inconsistent } else { Verdict::Consistent };
            wrong += usize::from(classify(s_c, beta, delta) != expect);
        }
    }
    Check::new("consistency truth table", wrong == 0, format!("{wrong} of 9 cells wrong"))
}

fn boundary_check(geometry: &LaneGeometry) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let v: f64 = rng.gen_range(5.0..40.0);
        let dt_lc: f64 = rng.gen_range(2.0..10.0);
        let y0 = geometry.lane_center(1) + rng.gen_range(-0.5..0.5);
        let Ok(TrajectoryPlan::LaneChange(lc)) = plan_lane_change(geometry, 0.0, y0, 0, v, dt_lc) else {
            return Check::new("lane-change boundaries", false, "planning failed");
        };
        let ([a, da, dda], [b, db, ddb]) = (lc.bezier(0.0), lc.bezier(1.0));
        let y1 = geometry.lane_center(0);
        for e in [a[1] - y0, da[1], dda[1], b[1] - y1, db[1], ddb[1], lc.length - v * dt_lc] {
            worst = worst.max(e.abs());
        }
    }
    Check::new("lane-change boundaries", worst <= 1e-9, format!("max error {worst:.1e}"))
}

fn manual_check(cfg: &ScenarioConfig) -> Check {
    let predictor = match PredictorSpec::from_choice(&cfg.predictor) {
        Ok(p) => p,
        Err(e) => return Check::new("manual has no guidance", false, e.to_string()),
    };
    match run_trial(Condition::MANUAL, cfg, &predictor, FALSE_LC_SEED) {
        Ok(log) => {
            let n = log.records.iter().filter(|r| r.tau_hapa != 0.0).count();
            Check::new("manual has no guidance", n == 0, format!("{n} nonzero guidance samples"))
        }
        Err(e) => Check::new("manual has no guidance", false, e.to_string()),
    }
}

/// Runs every canned check under `config`.
pub fn run_all(config: &Config) -> Vec<Check> {
    let sc = &config.scenario;
    let mut out =
        vec![schedule_check(&sc.authority), truth_table_check(sc.consistency.delta), boundary_check(&sc.geometry)];
    match false_lc_trial(sc) {
        Ok(log) => {
            out.extend(false_lc_checks(&log, &sc.authority));
            let intervals = (sc.consistency.window / sc.dt).round() as usize;
            let err = pseudo_work_mismatch(&log, intervals);
            out.push(Check::new("pseudo-work oracle", err <= 1e-9, format!("max error {err:.1e}")));
            let again = false_lc_trial(sc).and_then(|b| Ok(b.to_csv_string()? == log.to_csv_string()?));
            out.push(Check::new("determinism", matches!(again, Ok(true)), "repeat run byte-identical"));
        }
        Err(e) => out.push(Check::new("false-lc trial", false, e.to_string())),
    }
    out.push(manual_check(sc));
    out
}

/// Fixed-width pass/fail table.
pub fn render(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for c in checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        s += &format!("{tag}  {:<width$}  {}\n", c.name, c.detail);
    }
    s
}
