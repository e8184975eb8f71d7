use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::report::*;
use super::scenario::{Family, Scenario, ScenarioError, SweepDirection};
use super::stats::{angle_between_deg, median, wilson};
use super::trace::{TraceError, TraceFile};
use crate::policy::{self, Decision, PlacementTrace, PolicyConfig, PolicyError, StackPlan};
use crate::sensor::{ForceTorqueSensor, SensorConfig};
use crate::sim::{ContactResult, Vec2, WorldState};
use crate::spatial::Vec3;

const GUESS_SALT: u64 = 0x6a09_e667_f3bc_c908;
const DIRECTION_SALT: u64 = 0xbb67_ae85_84ca_a73b;
const FINGER_SALT: u64 = 0x3c6e_f372_fe94_f82b;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces the scenario seed.
    pub seed: Option<u64>,
    /// Worker threads; 0 uses rayon's default.
    pub jobs: usize,
    /// Directory for the report, traces and tables.
    pub out_dir: Option<PathBuf>,
}

impl RunOptions {
    fn apply(&self, scenario: &Scenario) -> Scenario {
        let mut s = scenario.clone();
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        s
    }

    fn in_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
        if self.jobs == 0 {
            return Ok(f());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?;
        Ok(pool.install(f))
    }

    fn write(&self, name: &str, contents: &str) -> Result<Option<String>, HarnessError> {
        let Some(dir) = &self.out_dir else {
            return Ok(None);
        };
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|source| io_err(parent, source))?;
        }
        std::fs::write(&path, contents).map_err(|source| io_err(&path, source))?;
        Ok(Some(name.to_string()))
    }
}

fn io_err(path: &Path, source: std::io::Error) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn rng(seed: u64, salt: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ salt);
    r.set_stream(stream);
    r
}

fn unit(angle: f64) -> Vec2 {
    Vec2::new(angle.cos(), angle.sin())
}

/// Uniform point in a disk of radius `r`.
fn in_disk(rng: &mut ChaCha8Rng, r: f64) -> Vec2 {
    if r <= 0.0 {
        return Vec2::zeros();
    }
    let rho = r * rng.random::<f64>().sqrt();
    unit(rng.random_range(0.0..std::f64::consts::TAU)) * rho
}

fn world_for(s: &Scenario) -> Result<WorldState, PolicyError> {
    Ok(WorldState::new(s.world, s.tower.clone(), s.object.clone(), s.grip)?)
}

fn trial_guess(s: &Scenario, trial: usize) -> Vec2 {
    let p = &s.placement;
    let mut r = rng(s.seed, GUESS_SALT, trial as u64);
    let mut guess = p.initial_guess;
    if !p.offsets.is_empty() {
        guess += p.offsets[trial % p.offsets.len()];
    }
    if let Some([lo, hi]) = p.random_offset {
        let rho = if hi > lo { r.random_range(lo..=hi) } else { lo };
        guess += unit(r.random_range(0.0..std::f64::consts::TAU)) * rho;
    }
    guess + in_disk(&mut r, p.guess_jitter)
}

fn horizontal(v: &Vec3) -> Vec2 {
    Vec2::new(v.x, v.y)
}

fn placement_record(
    level: usize,
    trace: &PlacementTrace,
    stable: Option<Vec2>,
    trace_file: Option<String>,
) -> PlacementRecord {
    let final_com = match trace.outcome {
        policy::PlacementOutcome::ReleasedStable { final_com } => Some(final_com),
        _ => None,
    };
    let (mut first, mut dirs) = (None, Vec::new());
    if let Some(stable) = stable {
        if let Some(it) = trace.iterations.first() {
            first = Some((horizontal(&it.true_com) + it.shift - stable).norm());
        }
        for it in trace.iterations.iter().filter(|it| it.decision == Decision::Shift) {
            let to_stable = stable - horizontal(&it.true_com);
            if to_stable.norm() > 1e-9 {
                dirs.push(angle_between_deg(&it.shift, &to_stable));
            }
        }
    }
    PlacementRecord {
        level,
        outcome: trace.outcome.label().to_string(),
        iterations: trace.iteration_count(),
        initial_guess: trace.initial_guess,
        final_com,
        first_proposal_error: first,
        direction_errors_deg: dirs,
        trace_file,
    }
}

struct TrialResult {
    record: TrialRecord,
    traces: Vec<(String, PlacementTrace)>,
}

fn trace_name(trial: usize, condition: Option<usize>, level: Option<usize>) -> String {
    let mut name = String::from("traces/");
    if let Some(c) = condition {
        let _ = write!(name, "cond_{c:02}_");
    }
    let _ = write!(name, "trial_{trial:04}");
    if let Some(l) = level {
        let _ = write!(name, "_level_{l:02}");
    }
    name.push_str(".txt");
    name
}

fn run_single(s: &Scenario, trial: usize, condition: Option<usize>, sensor_cfg: &SensorConfig, cfg: &PolicyConfig) -> TrialResult {
    let attempt = || -> Result<PlacementTrace, PolicyError> {
        let mut world = world_for(s)?;
        let mut sensor = ForceTorqueSensor::new(sensor_cfg.clone(), trial as u64)?;
        let calib = policy::calibrate(&world, &mut sensor, cfg)?;
        policy::run_placement(&mut world, trial_guess(s, trial), cfg, &mut sensor, &calib)
    };
    match attempt() {
        Ok(trace) => {
            let name = trace_name(trial, condition, None);
            let record = placement_record(0, &trace, s.placement.stable_point, Some(name.clone()));
            TrialResult {
                record: TrialRecord {
                    index: trial,
                    condition,
                    placements: vec![record],
                    error: None,
                },
                traces: vec![(name, trace)],
            }
        }
        Err(e) => failed(trial, condition, e),
    }
}

fn failed(trial: usize, condition: Option<usize>, e: PolicyError) -> TrialResult {
    TrialResult {
        record: TrialRecord {
            index: trial,
            condition,
            placements: Vec::new(),
            error: Some(e.to_string()),
        },
        traces: Vec::new(),
    }
}

fn run_stack_trial(s: &Scenario, trial: usize) -> TrialResult {
    let stack = s.stack.as_ref().expect("validated");
    let mut r = rng(s.seed, GUESS_SALT, trial as u64);
    let plan = StackPlan {
        objects: vec![s.object.clone(); stack.levels],
        first_guess: s.placement.initial_guess,
        perturbations: (0..stack.levels).map(|_| in_disk(&mut r, stack.perturbation)).collect(),
    };
    let attempt = || -> Result<Vec<PlacementTrace>, PolicyError> {
        let mut world = world_for(s)?;
        let mut sensor = ForceTorqueSensor::new(s.sensor_config(), trial as u64)?;
        policy::run_stack(&mut world, &plan, &s.policy, &mut sensor)
    };
    match attempt() {
        Ok(traces) => {
            let mut placements = Vec::new();
            let mut named = Vec::new();
            for (level, trace) in traces.into_iter().enumerate() {
                let name = trace_name(trial, None, Some(level));
                placements.push(placement_record(level, &trace, None, Some(name.clone())));
                named.push((name, trace));
            }
            TrialResult {
                record: TrialRecord {
                    index: trial,
                    condition: None,
                    placements,
                    error: None,
                },
                traces: named,
            }
        }
        Err(e) => failed(trial, None, e),
    }
}

fn direction_stats(records: &[TrialRecord]) -> Vec<DirectionStats> {
    let mut by_iter: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for p in records.iter().flat_map(|r| r.placements.iter()) {
        for (i, e) in p.direction_errors_deg.iter().enumerate() {
            by_iter.entry(i).or_default().push(*e);
        }
    }
    by_iter
        .into_iter()
        .map(|(iteration, v)| DirectionStats {
            iteration,
            count: v.len(),
            median_deg: finite(median(&v)),
            mean_deg: finite(v.iter().sum::<f64>() / v.len() as f64),
        })
        .collect()
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn empty_report(s: &Scenario) -> ExperimentReport {
    ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        scenario: s.name.clone(),
        family: s.family,
        seed: s.seed,
        trials: s.trials,
        success: wilson(0, 0),
        outcome_counts: BTreeMap::new(),
        direction_accuracy: Vec::new(),
        conditions: Vec::new(),
        sweep: None,
        finger_press: None,
        records: Vec::new(),
        acceptance: Vec::new(),
        passed: false,
    }
}

fn tally(report: &mut ExperimentReport) {
    let mut counts = BTreeMap::new();
    let mut total = 0;
    for p in report.placements() {
        *counts.entry(p.outcome.clone()).or_insert(0) += 1;
        total += 1;
    }
    let successes = counts.get("released_stable").copied().unwrap_or(0);
    report.success = wilson(successes, total);
    report.outcome_counts = counts;
    report.direction_accuracy = direction_stats(&report.records);
}

fn write_traces(opts: &RunOptions, results: &[TrialResult]) -> Result<(), HarnessError> {
    if opts.out_dir.is_none() {
        return Ok(());
    }
    for r in results {
        for (name, trace) in &r.traces {
            let label = name.trim_start_matches("traces/").trim_end_matches(".txt");
            opts.write(name, &TraceFile::from_trace(label, trace).to_text())?;
        }
    }
    Ok(())
}

/// Runs every trial of `scenario` and writes the report and traces when
/// `opts.out_dir` is set.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<ExperimentReport, HarnessError> {
    let s = opts.apply(scenario);
    s.validate()?;
    let mut report = empty_report(&s);
    match s.family {
        Family::ZeroOffset | Family::OffsetRecovery | Family::Ramp => {
            let results: Vec<TrialResult> = opts.in_pool(|| {
                (0..s.trials)
                    .into_par_iter()
                    .map(|t| run_single(&s, t, None, &s.sensor_config(), &s.policy))
                    .collect()
            })?;
            write_traces(opts, &results)?;
            report.records = results.into_iter().map(|r| r.record).collect();
            tally(&mut report);
        }
        Family::MultiStack => {
            let results: Vec<TrialResult> =
                opts.in_pool(|| (0..s.trials).into_par_iter().map(|t| run_stack_trial(&s, t)).collect())?;
            write_traces(opts, &results)?;
            report.records = results.into_iter().map(|r| r.record).collect();
            tally(&mut report);
        }
        Family::NoiseSweep => {
            let ns = s.noise_sweep.as_ref().expect("validated");
            let conditions: Vec<(f64, f64)> = ns
                .release_thresholds
                .iter()
                .flat_map(|t| ns.noise_scales.iter().map(move |k| (*t, *k)))
                .collect();
            let jobs: Vec<(usize, usize)> = (0..conditions.len()).flat_map(|c| (0..s.trials).map(move |t| (c, t))).collect();
            let results: Vec<TrialResult> = opts.in_pool(|| {
                jobs.par_iter()
                    .map(|&(c, t)| {
                        let (threshold, scale) = conditions[c];
                        let cfg = PolicyConfig {
                            torque_release_threshold: threshold,
                            ..s.policy
                        };
                        let mut sensor = s.sensor_config();
                        sensor.force_noise_std *= scale;
                        sensor.torque_noise_std *= scale;
                        run_single(&s, t, Some(c), &sensor, &cfg)
                    })
                    .collect()
            })?;
            write_traces(opts, &results)?;
            report.records = results.into_iter().map(|r| r.record).collect();
            tally(&mut report);
            report.conditions = conditions
                .iter()
                .enumerate()
                .map(|(c, &(threshold, scale))| {
                    let ps: Vec<&PlacementRecord> = report
                        .records
                        .iter()
                        .filter(|r| r.condition == Some(c))
                        .flat_map(|r| r.placements.iter())
                        .collect();
                    let ok = ps.iter().filter(|p| p.outcome == "released_stable").count();
                    let iters: Vec<f64> = ps.iter().map(|p| p.iterations as f64).collect();
                    ConditionSummary {
                        release_threshold: threshold,
                        noise_scale: scale,
                        success: wilson(ok, ps.len()),
                        mean_iterations: finite(iters.iter().sum::<f64>() / iters.len() as f64),
                    }
                })
                .collect();
        }
        Family::FingerPress => {
            let (summary, table) = finger_press(&s, opts)?;
            report.success = wilson(summary.within_tolerance, summary.cases);
            report.finger_press = Some(FingerPressSummary {
                case_file: opts.write("finger_press.txt", &table)?,
                ..summary
            });
        }
    }
    if s.sweep.is_some() {
        let rows = sweep_rows(&s, &RunOptions { seed: None, ..opts.clone() })?;
        let mut summary = summarize_sweep(&rows);
        summary.table_file = opts.write("sweep.txt", &sweep_table(&rows))?;
        report.sweep = Some(summary);
    }
    report.evaluate(&s.acceptance);
    opts.write("report.json", &report.to_json())?;
    Ok(report)
}

pub fn run_scenario_path(path: &Path, opts: &RunOptions) -> Result<ExperimentReport, HarnessError> {
    run_scenario(&Scenario::load(path)?, opts)
}

/// One row of an offset sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub offset: f64,
    pub seed: usize,
    pub direction: Vec2,
    pub commanded: Vec2,
    pub shift: Vec2,
    pub angle_error_deg: f64,
    pub torque_deviation: f64,
}

/// Proposed shift after the first press at each offset from the stable
/// point. Seed `j` uses the same sensor noise stream and, for random
/// directions, the same direction at every offset.
pub fn sweep_rows(scenario: &Scenario, opts: &RunOptions) -> Result<Vec<SweepRow>, HarnessError> {
    let s = opts.apply(scenario);
    s.validate()?;
    let sweep = s
        .sweep
        .as_ref()
        .ok_or_else(|| HarnessError::Usage(format!("scenario `{}` has no [sweep] section", s.name)))?;
    let stable = s.placement.stable_point.expect("validated with sweep");
    let mut cases: Vec<(f64, usize, Vec2)> = Vec::new();
    match sweep.direction {
        SweepDirection::Random => {
            for &o in &sweep.offsets {
                for j in 0..sweep.seeds {
                    let mut r = rng(s.seed, DIRECTION_SALT, j as u64);
                    cases.push((o, j, unit(r.random_range(0.0..std::f64::consts::TAU))));
                }
            }
        }
        SweepDirection::Pattern => {
            for j in 0..sweep.seeds {
                cases.push((0.0, j, Vec2::x()));
            }
            for &o in sweep.offsets.iter().filter(|o| **o > 0.0) {
                for dir in [Vec2::x(), Vec2::y()] {
                    for j in 0..sweep.seeds {
                        cases.push((o, j, dir));
                    }
                }
            }
        }
    }
    let rows: Result<Vec<SweepRow>, PolicyError> = opts.in_pool(|| {
        cases
            .par_iter()
            .map(|&(offset, j, direction)| {
                let world = world_for(&s)?;
                let mut sensor = ForceTorqueSensor::new(s.sensor_config(), j as u64)?;
                let calib = policy::calibrate(&world, &mut sensor, &s.policy)?;
                let xy = stable + direction * offset;
                let p = policy::press(&world, xy, world.config().approach_height, &s.policy, &mut sensor, &calib)?;
                let flat = calib.flat_reference_com()?.torque;
                let shift = p.estimate.map_or(Vec2::zeros(), |e| policy::propose_shift(&e, &s.policy));
                let to_stable = stable - horizontal(&world.true_com(&p.descent.tip));
                let angle = if to_stable.norm() > 1e-9 {
                    angle_between_deg(&shift, &to_stable)
                } else {
                    // Already stable: any direction is as good as another.
                    angle_between_deg(&shift, &-direction)
                };
                Ok(SweepRow {
                    offset,
                    seed: j,
                    direction,
                    commanded: xy,
                    shift,
                    angle_error_deg: angle,
                    torque_deviation: (p.wrench.torque - flat).norm(),
                })
            })
            .collect()
    })?;
    Ok(rows?)
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut out = String::from("offset seed dir_x dir_y cmd_x cmd_y shift_x shift_y angle_error_deg torque_dev\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {} {} {}",
            r.offset,
            r.seed,
            r.direction.x,
            r.direction.y,
            r.commanded.x,
            r.commanded.y,
            r.shift.x,
            r.shift.y,
            r.angle_error_deg,
            r.torque_deviation
        );
    }
    out
}

pub fn summarize_sweep(rows: &[SweepRow]) -> SweepSummary {
    let mut by_offset: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        by_offset.entry(r.offset.to_bits()).or_insert((r.offset, Vec::new())).1.push(r.angle_error_deg);
    }
    let mut per_offset: Vec<OffsetSummary> = by_offset
        .into_values()
        .map(|(offset, v)| OffsetSummary {
            offset,
            count: v.len(),
            median_deg: finite(median(&v)),
        })
        .collect();
    per_offset.sort_by(|a, b| a.offset.total_cmp(&b.offset));
    SweepSummary {
        rows: rows.len(),
        crossover_offset: crossover(&per_offset, 45.0),
        per_offset,
        table_file: None,
    }
}

/// Smallest offset past which the median stays below `level`, interpolated
/// linearly from the grid point before it.
fn crossover(per_offset: &[OffsetSummary], level: f64) -> Option<f64> {
    let m = |o: &OffsetSummary| o.median_deg.unwrap_or(180.0);
    let last_above = per_offset.iter().rposition(|o| m(o) >= level)?;
    let next = per_offset.get(last_above + 1)?;
    let prev = &per_offset[last_above];
    let t = (m(prev) - level) / (m(prev) - m(next));
    Some(prev.offset + t * (next.offset - prev.offset))
}

/// Runs the sweep, writes `sweep.txt` and a report when `out_dir` is set.
pub fn sweep_offsets(scenario: &Scenario, opts: &RunOptions) -> Result<ExperimentReport, HarnessError> {
    let s = opts.apply(scenario);
    let rows = sweep_rows(&s, &RunOptions { seed: None, ..opts.clone() })?;
    let mut summary = summarize_sweep(&rows);
    summary.table_file = opts.write("sweep.txt", &sweep_table(&rows))?;
    let mut report = empty_report(&s);
    report.trials = rows.len();
    report.sweep = Some(summary);
    report.evaluate(&s.acceptance);
    opts.write("sweep_report.json", &report.to_json())?;
    Ok(report)
}

fn press_direction_error(
    world: &WorldState,
    sensor: &mut ForceTorqueSensor,
    s: &Scenario,
    calib: &crate::sensor::CalibrationState,
    lever: Vec2,
    force: f64,
) -> Result<Option<f64>, PolicyError> {
    let tip = Vec3::new(0.0, 0.0, world.config().approach_height);
    let depth = s.object.bottom.height(lever.x, lever.y).unwrap_or(0.0);
    let contact = ContactResult {
        contact_point: tip + Vec3::new(lever.x, lever.y, -depth),
        surface_normal: Vec3::z(),
        penetration: 0.0,
        normal_force_magnitude: force,
        contact_patch: Vec::new(),
    };
    let truth = world.true_wrench_at_wrist(&tip, Some(&contact));
    let reading = sensor.settle_and_average(|_| truth, &s.policy.window)?;
    let est = s.policy.estimator().estimate_contact(&calib.to_com(&reading), &calib.gravity_estimate);
    Ok(est.ok().map(|e| angle_between_deg(&policy::propose_shift(&e, &s.policy), &lever)))
}

/// Synthetic finger presses on the hovering object at known points.
pub fn finger_press(s: &Scenario, opts: &RunOptions) -> Result<(FingerPressSummary, String), HarnessError> {
    let fp = s
        .finger_press
        .as_ref()
        .ok_or_else(|| HarnessError::Usage(format!("scenario `{}` has no [finger_press] section", s.name)))?;
    let limit = s.acceptance.max_direction_error_deg.unwrap_or(5.0);
    let setup = |stream: u64| -> Result<_, PolicyError> {
        let world = world_for(s)?;
        let mut sensor = ForceTorqueSensor::new(s.sensor_config(), stream)?;
        let calib = policy::calibrate(&world, &mut sensor, &s.policy)?;
        Ok((world, sensor, calib))
    };

    let cases: Result<Vec<(f64, f64, f64, f64)>, PolicyError> = opts.in_pool(|| {
        (0..fp.cases)
            .into_par_iter()
            .map(|i| {
                let mut r = rng(s.seed, FINGER_SALT, i as u64);
                let torque = r.random_range(fp.torque_range[0]..=fp.torque_range[1]);
                let lever = r.random_range(fp.lever_range[0]..=fp.lever_range[1]);
                let angle = r.random_range(0.0..std::f64::consts::TAU);
                let (world, mut sensor, calib) = setup(i as u64)?;
                let err = press_direction_error(&world, &mut sensor, s, &calib, unit(angle) * lever, torque / lever)?;
                Ok((torque, lever, angle, err.unwrap_or(180.0)))
            })
            .collect()
    })?;
    let cases = cases?;

    let zero_wrench_degenerate = {
        let (world, mut sensor, calib) = setup(fp.cases as u64)?;
        press_direction_error(&world, &mut sensor, s, &calib, Vec2::new(0.05, 0.0), 0.0)?.is_none()
    };

    // Fixed press force, so small torques come from short levers.
    let force = s.policy.resistance_threshold;
    let curve: Result<Vec<CurvePoint>, PolicyError> = opts.in_pool(|| {
        fp.curve_torques
            .par_iter()
            .enumerate()
            .map(|(k, &torque)| {
                let mut errs = Vec::with_capacity(fp.curve_repeats);
                for j in 0..fp.curve_repeats {
                    let stream = (fp.cases + 1 + k * fp.curve_repeats + j) as u64;
                    let mut r = rng(s.seed, FINGER_SALT, stream);
                    let angle = r.random_range(0.0..std::f64::consts::TAU);
                    let (world, mut sensor, calib) = setup(stream)?;
                    let e = press_direction_error(&world, &mut sensor, s, &calib, unit(angle) * (torque / force), force)?;
                    errs.push(e.unwrap_or(180.0));
                }
                Ok(CurvePoint {
                    torque,
                    median_deg: finite(median(&errs)),
                    max_deg: errs.iter().copied().reduce(f64::max),
                })
            })
            .collect()
    })?;

    let errors: Vec<f64> = cases.iter().map(|c| c.3).collect();
    let mut table = String::from("case torque lever angle_rad error_deg\n");
    for (i, (t, l, a, e)) in cases.iter().enumerate() {
        let _ = writeln!(table, "{i} {t} {l} {a} {e}");
    }
    Ok((
        FingerPressSummary {
            cases: cases.len(),
            within_tolerance: errors.iter().filter(|e| **e < limit).count(),
            max_error_deg: errors.iter().copied().reduce(f64::max),
            median_error_deg: finite(median(&errors)),
            zero_wrench_degenerate,
            curve: curve?,
            case_file: None,
        },
        table,
    ))
}

/// The `press-check` entry point.
pub fn finger_press_check(scenario: &Scenario, opts: &RunOptions) -> Result<ExperimentReport, HarnessError> {
    let mut s = opts.apply(scenario);
    if s.family != Family::FingerPress {
        s.family = Family::FingerPress;
        s.validate()?;
    }
    run_scenario(&s, &RunOptions { seed: None, ..opts.clone() })
}

/// Reads a trace file and writes its descent force/torque norms to `out`.
pub fn emit_contact_plot_data(trace: &Path, out: &Path) -> Result<usize, HarnessError> {
    let t = TraceFile::read(trace)?;
    Ok(super::trace::emit_contact_plot_data(&t, out)?)
}
