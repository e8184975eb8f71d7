use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::scenario::{Acceptance, Family};
use super::stats::Proportion;
use crate::sim::Vec2;
use crate::spatial::Vec3;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRecord {
    pub level: usize,
    pub outcome: String,
    pub iterations: usize,
    pub initial_guess: Vec2,
    pub final_com: Option<Vec3>,
    /// Distance from the stable point after the first proposal (m).
    pub first_proposal_error: Option<f64>,
    /// Angle between each proposed shift and the true direction (deg).
    pub direction_errors_deg: Vec<f64>,
    pub trace_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    /// Index into the noise sweep conditions.
    pub condition: Option<usize>,
    pub placements: Vec<PlacementRecord>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionStats {
    pub iteration: usize,
    pub count: usize,
    pub median_deg: Option<f64>,
    pub mean_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub release_threshold: f64,
    pub noise_scale: f64,
    pub success: Proportion,
    pub mean_iterations: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetSummary {
    pub offset: f64,
    pub count: usize,
    pub median_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub per_offset: Vec<OffsetSummary>,
    /// Offset at which the median error crosses 45 degrees, interpolated.
    pub crossover_offset: Option<f64>,
    pub table_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub torque: f64,
    pub median_deg: Option<f64>,
    pub max_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerPressSummary {
    pub cases: usize,
    pub within_tolerance: usize,
    pub max_error_deg: Option<f64>,
    pub median_error_deg: Option<f64>,
    pub zero_wrench_degenerate: bool,
    pub curve: Vec<CurvePoint>,
    pub case_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub scenario: String,
    pub family: Family,
    pub seed: u64,
    pub trials: usize,
    /// Over placements; a stack contributes one per level.
    pub success: Proportion,
    pub outcome_counts: BTreeMap<String, usize>,
    pub direction_accuracy: Vec<DirectionStats>,
    pub conditions: Vec<ConditionSummary>,
    pub sweep: Option<SweepSummary>,
    pub finger_press: Option<FingerPressSummary>,
    pub records: Vec<TrialRecord>,
    pub acceptance: Vec<AcceptanceCheck>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn placements(&self) -> impl Iterator<Item = &PlacementRecord> {
        self.records.iter().flat_map(|r| r.placements.iter())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Fills `acceptance` and `passed` from the scenario thresholds.
    pub fn evaluate(&mut self, acc: &Acceptance) {
        let mut checks = Vec::new();
        let mut check = |name: &str, passed: bool, detail: String| {
            checks.push(AcceptanceCheck {
                name: name.to_string(),
                passed,
                detail,
            })
        };
        let rate = self.success.rate;
        if let Some(min) = acc.min_success_rate {
            check("min_success_rate", rate >= min, format!("{rate:.4} >= {min}"));
        }
        if let Some(max) = acc.max_success_rate {
            check("max_success_rate", rate <= max, format!("{rate:.4} <= {max}"));
        }
        let errors = self.records.iter().filter(|r| r.error.is_some()).count();
        if errors > 0 {
            check("trial_errors", false, format!("{errors} trials failed to run"));
        }
        if let Some(max) = acc.max_iterations_per_success {
            let worst = self
                .placements()
                .filter(|p| p.outcome == "released_stable")
                .map(|p| p.iterations)
                .max()
                .unwrap_or(0);
            check("max_iterations_per_success", worst <= max, format!("worst {worst} <= {max}"));
        }
        if let Some(label) = &acc.required_outcome {
            let off = self.placements().filter(|p| &p.outcome != label).count();
            check("required_outcome", off == 0, format!("{off} placements not {label}"));
        }
        if let Some(max) = acc.max_first_proposal_error {
            let errs: Vec<f64> = self.placements().map(|p| p.first_proposal_error.unwrap_or(f64::INFINITY)).collect();
            let worst = errs.iter().copied().fold(0.0, f64::max);
            let within = errs.iter().filter(|e| **e <= max).count();
            check(
                "max_first_proposal_error",
                within == errs.len(),
                format!("{within}/{} within {max} m, worst {worst:.5}", errs.len()),
            );
        }
        if let Some(sweep) = &self.sweep {
            evaluate_sweep(sweep, acc, &mut check);
        }
        if let (Some(max), Some(fp)) = (acc.max_direction_error_deg, &self.finger_press) {
            check(
                "max_direction_error_deg",
                fp.within_tolerance == fp.cases && fp.zero_wrench_degenerate,
                format!(
                    "{}/{} within {max} deg, worst {:.3}, zero wrench degenerate {}",
                    fp.within_tolerance,
                    fp.cases,
                    fp.max_error_deg.unwrap_or(f64::NAN),
                    fp.zero_wrench_degenerate
                ),
            );
        }
        self.passed = checks.iter().all(|c| c.passed);
        self.acceptance = checks;
    }
}

fn evaluate_sweep(sweep: &SweepSummary, acc: &Acceptance, check: &mut impl FnMut(&str, bool, String)) {
    let median = |o: &OffsetSummary| o.median_deg.unwrap_or(180.0);
    if let (Some(far), Some(max)) = (acc.far_offset, acc.far_max_median_deg) {
        let rows: Vec<&OffsetSummary> = sweep.per_offset.iter().filter(|o| o.offset >= far - 1e-12).collect();
        let worst = rows.iter().map(|o| median(o)).fold(0.0, f64::max);
        check(
            "far_max_median_deg",
            !rows.is_empty() && worst < max,
            format!("worst median {worst:.2} deg at offsets >= {far} m (limit {max})"),
        );
    }
    if let (Some(near), Some(min)) = (acc.near_offset, acc.near_min_median_deg) {
        let rows: Vec<&OffsetSummary> = sweep.per_offset.iter().filter(|o| o.offset <= near + 1e-12).collect();
        let best = rows.iter().map(|o| median(o)).fold(f64::INFINITY, f64::min);
        check(
            "near_min_median_deg",
            !rows.is_empty() && best > min,
            format!("lowest median {best:.2} deg at offsets <= {near} m (limit {min})"),
        );
    }
    if acc.monotone {
        let mut sorted: Vec<&OffsetSummary> = sweep.per_offset.iter().collect();
        sorted.sort_by(|a, b| a.offset.total_cmp(&b.offset));
        // Offsets that see identical noise can tie up to rounding.
        let ok = sorted.windows(2).all(|w| median(w[0]) + 1e-6 >= median(w[1]));
        let curve: Vec<String> = sorted.iter().map(|o| format!("{}:{:.1}", o.offset, median(o))).collect();
        check("monotone", ok, curve.join(" "));
    }
}
