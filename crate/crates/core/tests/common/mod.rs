#![allow(dead_code)]

use std::path::PathBuf;

use ftplace::harness::Scenario;
use ftplace::sim::Vec2;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

pub fn scenario(name: &str) -> Scenario {
    Scenario::load(&scenario_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Tipping check by enumeration: every pair of patch points whose line has
/// the whole patch on one side is a possible tipping axis. The object stays
/// put iff the COM lies at least `margin` inside every such axis.
pub fn brute_force_stable(patch: &[Vec2], com: &Vec2, margin: f64) -> bool {
    // A hull vertex is the extreme point of its own row, so only row extremes
    // can define a tipping axis.
    let mut rows: std::collections::BTreeMap<i64, (Vec2, Vec2)> = Default::default();
    for p in patch {
        let key = (p.y * 1e9).round() as i64;
        let e = rows.entry(key).or_insert((*p, *p));
        if p.x < e.0.x {
            e.0 = *p;
        }
        if p.x > e.1.x {
            e.1 = *p;
        }
    }
    let mut pts: Vec<Vec2> = rows.values().flat_map(|(a, b)| [*a, *b]).collect();
    pts.dedup();
    let side = |a: &Vec2, b: &Vec2, p: &Vec2| (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    let mut found_axis = false;
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            if i == j {
                continue;
            }
            let (a, b) = (pts[i], pts[j]);
            let len = (b - a).norm();
            if len < 1e-12 {
                continue;
            }
            // Everything on the left of a -> b (with rounding slack).
            if pts.iter().any(|p| side(&a, &b, p) / len < -1e-12) {
                continue;
            }
            found_axis = true;
            if side(&a, &b, com) / len < margin {
                return false;
            }
        }
    }
    found_axis
}
