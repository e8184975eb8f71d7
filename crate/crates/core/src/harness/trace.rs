//! Columnar text traces.
//!
//! ```text
//! # ftplace-trace 1
//! # label trial 3
//! # outcome released_stable
//! # final_com 0.001 -0.002 0.025
//! # initial_guess 0.03 0
//! [iterations]
//! iter cmd_x cmd_y cmd_z torque_x ... decision com_x ... contact_z
//! 0 0.03 0 0.0245 ...
//! [descent]
//! iter t z force_norm torque_norm
//! 0 0 0.3 0.12 0.004
//! ```
//!
//! Comment lines carry the header fields, a `[section]` line is followed by a
//! column header and whitespace separated rows. Floats use Rust's shortest
//! round-trip formatting, so parsing a written trace gives the same numbers.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::policy::{Decision, DescentSample, PlacementTrace};
use crate::sim::Vec2;
use crate::spatial::{Vec3, Wrench};

pub const TRACE_MAGIC: &str = "# ftplace-trace 1";

pub const ITERATION_COLUMNS: [&str; 21] = [
    "iter", "cmd_x", "cmd_y", "cmd_z", "torque_x", "torque_y", "torque_z", "force_x", "force_y", "force_z",
    "torque_dev", "shift_x", "shift_y", "decision", "com_x", "com_y", "com_z", "contact_x", "contact_y",
    "contact_z", "press_force",
];

pub const DESCENT_COLUMNS: [&str; 5] = ["iter", "t", "z", "force_norm", "torque_norm"];

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace io: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace has no descent samples")]
    NoDescent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub commanded: Vec3,
    pub wrench: Wrench,
    pub torque_deviation: f64,
    pub shift: Vec2,
    pub decision: Decision,
    pub true_com: Vec3,
    pub true_contact: Vec3,
    /// Normal force magnitude from the estimate, NaN without one.
    pub press_force: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub label: String,
    pub outcome: String,
    pub final_com: Option<Vec3>,
    pub initial_guess: Vec2,
    pub iterations: Vec<TraceRow>,
    pub descent: Vec<(usize, DescentSample)>,
}

pub fn decision_label(d: Decision) -> &'static str {
    match d {
        Decision::Release => "release",
        Decision::Shift => "shift",
        Decision::NoEstimate => "no_estimate",
    }
}

fn parse_decision(s: &str) -> Option<Decision> {
    match s {
        "release" => Some(Decision::Release),
        "shift" => Some(Decision::Shift),
        "no_estimate" => Some(Decision::NoEstimate),
        _ => None,
    }
}

impl TraceFile {
    pub fn from_trace(label: impl Into<String>, trace: &PlacementTrace) -> Self {
        let final_com = match trace.outcome {
            crate::policy::PlacementOutcome::ReleasedStable { final_com } => Some(final_com),
            _ => None,
        };
        let iterations = trace
            .iterations
            .iter()
            .map(|it| TraceRow {
                commanded: it.commanded,
                wrench: it.wrench,
                torque_deviation: it.torque_deviation,
                shift: it.shift,
                decision: it.decision,
                true_com: it.true_com,
                true_contact: it.true_contact,
                press_force: it.estimate.map_or(f64::NAN, |e| e.press_magnitude),
            })
            .collect();
        let descent = trace
            .iterations
            .iter()
            .enumerate()
            .flat_map(|(i, it)| it.descent.iter().map(move |s| (i, *s)))
            .collect();
        Self {
            label: label.into(),
            outcome: trace.outcome.label().to_string(),
            final_com,
            initial_guess: trace.initial_guess,
            iterations,
            descent,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{TRACE_MAGIC}");
        let _ = writeln!(out, "# label {}", self.label);
        let _ = writeln!(out, "# outcome {}", self.outcome);
        match self.final_com {
            Some(c) => {
                let _ = writeln!(out, "# final_com {} {} {}", c.x, c.y, c.z);
            }
            None => {
                let _ = writeln!(out, "# final_com -");
            }
        }
        let _ = writeln!(out, "# initial_guess {} {}", self.initial_guess.x, self.initial_guess.y);
        let _ = writeln!(out, "[iterations]");
        let _ = writeln!(out, "{}", ITERATION_COLUMNS.join(" "));
        for (i, r) in self.iterations.iter().enumerate() {
            let c = &r.commanded;
            let (t, f) = (&r.wrench.torque, &r.wrench.force);
            let _ = writeln!(
                out,
                "{i} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {}",
                c.x,
                c.y,
                c.z,
                t.x,
                t.y,
                t.z,
                f.x,
                f.y,
                f.z,
                r.torque_deviation,
                r.shift.x,
                r.shift.y,
                decision_label(r.decision),
                r.true_com.x,
                r.true_com.y,
                r.true_com.z,
                r.true_contact.x,
                r.true_contact.y,
                r.true_contact.z,
                r.press_force,
            );
        }
        let _ = writeln!(out, "[descent]");
        let _ = writeln!(out, "{}", DESCENT_COLUMNS.join(" "));
        for (i, s) in &self.descent {
            let _ = writeln!(out, "{i} {} {} {} {}", s.t, s.z, s.force_norm, s.torque_norm);
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), TraceError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, TraceError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, TraceError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let err = |line: usize, message: &str| TraceError::Parse {
            line,
            message: message.to_string(),
        };
        match lines.next() {
            Some((_, TRACE_MAGIC)) => {}
            _ => return Err(err(1, "missing trace header")),
        }
        let mut trace = TraceFile {
            label: String::new(),
            outcome: String::new(),
            final_com: None,
            initial_guess: Vec2::zeros(),
            iterations: Vec::new(),
            descent: Vec::new(),
        };
        let mut section = "";
        let mut expect_columns = false;
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# ") {
                let (key, value) = rest.split_once(' ').unwrap_or((rest, ""));
                match key {
                    "label" => trace.label = value.to_string(),
                    "outcome" => trace.outcome = value.to_string(),
                    "final_com" if value == "-" => trace.final_com = None,
                    "final_com" => trace.final_com = Some(Vec3::from_column_slice(&floats(value, 3, n)?)),
                    "initial_guess" => trace.initial_guess = Vec2::from_column_slice(&floats(value, 2, n)?),
                    _ => return Err(err(n, "unknown header field")),
                }
                continue;
            }
            if line.starts_with('[') {
                section = match line {
                    "[iterations]" => "iterations",
                    "[descent]" => "descent",
                    _ => return Err(err(n, "unknown section")),
                };
                expect_columns = true;
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if expect_columns {
                let want: &[&str] = if section == "iterations" { &ITERATION_COLUMNS } else { &DESCENT_COLUMNS };
                if cols != want {
                    return Err(err(n, "unexpected column header"));
                }
                expect_columns = false;
                continue;
            }
            match section {
                "iterations" => {
                    if cols.len() != ITERATION_COLUMNS.len() {
                        return Err(err(n, "wrong column count"));
                    }
                    let decision = parse_decision(cols[13]).ok_or_else(|| err(n, "unknown decision"))?;
                    let mut v = Vec::with_capacity(20);
                    for (i, c) in cols.iter().enumerate() {
                        if i != 0 && i != 13 {
                            v.push(c.parse::<f64>().map_err(|_| err(n, "bad number"))?);
                        }
                    }
                    trace.iterations.push(TraceRow {
                        commanded: Vec3::new(v[0], v[1], v[2]),
                        wrench: Wrench::new(Vec3::new(v[3], v[4], v[5]), Vec3::new(v[6], v[7], v[8])),
                        torque_deviation: v[9],
                        shift: Vec2::new(v[10], v[11]),
                        decision,
                        true_com: Vec3::new(v[12], v[13], v[14]),
                        true_contact: Vec3::new(v[15], v[16], v[17]),
                        press_force: v[18],
                    });
                }
                "descent" => {
                    if cols.len() != DESCENT_COLUMNS.len() {
                        return Err(err(n, "wrong column count"));
                    }
                    let iter = cols[0].parse::<usize>().map_err(|_| err(n, "bad iteration index"))?;
                    let v = floats(&cols[1..].join(" "), 4, n)?;
                    trace.descent.push((
                        iter,
                        DescentSample {
                            t: v[0],
                            z: v[1],
                            force_norm: v[2],
                            torque_norm: v[3],
                        },
                    ));
                }
                _ => return Err(err(n, "data outside a section")),
            }
        }
        Ok(trace)
    }
}

fn floats(text: &str, count: usize, line: usize) -> Result<Vec<f64>, TraceError> {
    let v: Result<Vec<f64>, _> = text.split_whitespace().map(str::parse::<f64>).collect();
    match v {
        Ok(v) if v.len() == count => Ok(v),
        _ => Err(TraceError::Parse {
            line,
            message: format!("expected {count} numbers"),
        }),
    }
}

/// Writes the force and torque norms seen during every descent in `trace` as
/// columns `iter t z force_norm torque_norm`.
pub fn emit_contact_plot_data(trace: &TraceFile, out: &Path) -> Result<usize, TraceError> {
    if trace.descent.is_empty() {
        return Err(TraceError::NoDescent);
    }
    let mut text = String::new();
    let _ = writeln!(text, "# contact plot data: {} ({})", trace.label, trace.outcome);
    let _ = writeln!(text, "{}", DESCENT_COLUMNS.join(" "));
    for (i, s) in &trace.descent {
        let _ = writeln!(text, "{i} {} {} {} {}", s.t, s.z, s.force_norm, s.torque_norm);
    }
    std::fs::write(out, text)?;
    Ok(trace.descent.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TraceFile {
        TraceFile {
            label: "trial 2".into(),
            outcome: "released_stable".into(),
            final_com: Some(Vec3::new(0.1, -1e-17, 0.025)),
            initial_guess: Vec2::new(0.03, 0.0),
            iterations: vec![TraceRow {
                commanded: Vec3::new(0.03, 0.0, 0.0245),
                wrench: Wrench::new(Vec3::new(0.0, -0.3, 1e-9), Vec3::new(0.0, 0.0, 50.0)),
                torque_deviation: 0.3,
                shift: Vec2::new(-0.006, 0.0),
                decision: Decision::Shift,
                true_com: Vec3::new(0.03, 0.0, 0.0245),
                true_contact: Vec3::new(0.024, 0.0, 0.02),
                press_force: f64::NAN,
            }],
            descent: vec![(0, DescentSample { t: 0.04, z: 0.3, force_norm: 0.2, torque_norm: 0.01 })],
        }
    }

    fn same(a: &TraceFile, b: &TraceFile) -> bool {
        // NaN != NaN, so compare the text form.
        a.to_text() == b.to_text()
    }

    #[test]
    fn text_round_trip() {
        let t = sample();
        let back = TraceFile::parse(&t.to_text()).unwrap();
        assert!(same(&t, &back));
        assert_eq!(back.iterations[0].wrench, t.iterations[0].wrench);
        assert!(back.iterations[0].press_force.is_nan());
    }

    #[test]
    fn malformed_traces_point_at_the_line() {
        let text = sample().to_text().replace(" shift ", " wiggle ");
        match TraceFile::parse(&text) {
            Err(TraceError::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("{other:?}"),
        }
        assert!(TraceFile::parse("hello").is_err());
    }

    #[test]
    fn plot_data_needs_descent() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = sample();
        assert_eq!(emit_contact_plot_data(&t, &dir.path().join("p.txt")).unwrap(), 1);
        t.descent.clear();
        assert!(matches!(emit_contact_plot_data(&t, &dir.path().join("q.txt")), Err(TraceError::NoDescent)));
    }
}
