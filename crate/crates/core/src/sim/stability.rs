//! Support-region test used as ground truth for release outcomes.

use super::surface::Vec2;

fn cross(o: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Counter-clockwise convex hull (monotone chain), collinear points dropped.
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Vec2> = Vec::with_capacity(2 * pts.len());
    for p in pts.iter() {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower_len = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

pub fn polygon_area(poly: &[Vec2]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        twice += a.x * b.y - b.x * a.y;
    }
    0.5 * twice
}

/// Smallest signed distance from `p` to the edges of a CCW convex polygon;
/// positive inside.
pub fn inset_distance(hull: &[Vec2], p: &Vec2) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..hull.len() {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        let len = (b - a).norm();
        if len == 0.0 {
            continue;
        }
        best = best.min(cross(&a, &b, p) / len);
    }
    best
}

/// How a contact supports the object.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// Flat-on-flat: convex hull of the contact patch.
    Patch(Vec<Vec2>),
    /// Single point or curved contact.
    Point(Vec2),
}

impl Support {
    /// Patch when the hull of `patch` has at least `min_area`, point otherwise.
    pub fn classify(patch: &[Vec2], contact: Vec2, min_area: f64) -> Support {
        let hull = convex_hull(patch);
        if hull.len() >= 3 && polygon_area(&hull) >= min_area {
            Support::Patch(hull)
        } else {
            Support::Point(contact)
        }
    }

    /// True iff `com` lies in the support region shrunk by `margin`.
    ///
    /// A COM exactly on the shrunk boundary counts as stable, so one on the
    /// unshrunk boundary is unstable for any positive margin.
    pub fn holds(&self, com: &Vec2, margin: f64) -> bool {
        match self {
            Support::Patch(hull) => inset_distance(hull, com) >= margin,
            Support::Point(c) => (com - c).norm() <= margin,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(h: f64) -> Vec<Vec2> {
        let mut pts = Vec::new();
        for i in -4..=4 {
            for j in -4..=4 {
                pts.push(Vec2::new(i as f64 * h / 4.0, j as f64 * h / 4.0));
            }
        }
        pts
    }

    #[test]
    fn hull_of_grid_square() {
        let hull = convex_hull(&square(0.02));
        assert_eq!(hull.len(), 4);
        assert!((polygon_area(&hull) - 0.04f64 * 0.04).abs() < 1e-15);
    }

    #[test]
    fn degenerate_hulls() {
        assert!(convex_hull(&[]).is_empty());
        let line = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(2.0, 2.0)];
        assert!(convex_hull(&line).len() < 3);
        assert_eq!(Support::classify(&line, Vec2::new(1.0, 1.0), 1e-9), Support::Point(Vec2::new(1.0, 1.0)));
    }

    #[test]
    fn centered_is_stable_outside_is_not() {
        let s = Support::classify(&square(0.02), Vec2::zeros(), 1e-6);
        assert!(s.holds(&Vec2::zeros(), 0.001));
        assert!(!s.holds(&Vec2::new(0.05, 0.0), 0.001));
    }

    #[test]
    fn boundary_is_unstable_under_margin() {
        let s = Support::classify(&square(0.02), Vec2::zeros(), 1e-6);
        assert!(!s.holds(&Vec2::new(0.02, 0.0), 0.001));
        assert!(s.holds(&Vec2::new(0.0185, 0.0), 0.001));
        assert!(!s.holds(&Vec2::new(0.0195, 0.0), 0.001));
    }

    #[test]
    fn point_support_margin() {
        let s = Support::Point(Vec2::new(0.01, 0.0));
        assert!(s.holds(&Vec2::new(0.0105, 0.0), 0.001));
        assert!(!s.holds(&Vec2::new(0.012, 0.0), 0.001));
    }
}
