//! Tower and object surfaces as height functions `z = h(x, y)`.
//!
//! A height of `None` means there is no surface above that point at all
//! (outside a primitive without a base, or an unset height-field cell).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::spatial::Vec3;

pub type Vec2 = nalgebra::Vector2<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceModel {
    Plane {
        height: f64,
    },
    /// Inclined plane rising along `azimuth_deg` (from +x toward +y).
    Ramp {
        height: f64,
        slope_deg: f64,
        #[serde(default)]
        azimuth_deg: f64,
        #[serde(default = "zero2")]
        origin: Vec2,
    },
    SphericalCap {
        center: Vec2,
        apex_height: f64,
        radius: f64,
        #[serde(default)]
        base_height: Option<f64>,
    },
    /// Flat disk top with an optional parabolic crown and a sinusoidal ripple.
    Puck {
        center: Vec2,
        radius: f64,
        height: f64,
        #[serde(default)]
        crown: f64,
        #[serde(default)]
        ripple_amplitude: f64,
        #[serde(default = "default_wavelength")]
        ripple_wavelength: f64,
        #[serde(default)]
        base_height: Option<f64>,
    },
    /// Axis-aligned flat rectangle.
    Slab {
        center: Vec2,
        half_extent: Vec2,
        height: f64,
        #[serde(default)]
        base_height: Option<f64>,
    },
    HeightField(HeightField),
    /// Pointwise maximum of the parts.
    Union {
        parts: Vec<SurfaceModel>,
    },
}

fn zero2() -> Vec2 {
    Vec2::zeros()
}

fn default_wavelength() -> f64 {
    0.02
}

/// Height and gradient at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSample {
    pub height: f64,
    pub gradient: Vec2,
}

impl SurfaceSample {
    fn flat(height: f64) -> Self {
        Self {
            height,
            gradient: Vec2::zeros(),
        }
    }

    /// Upward unit normal.
    pub fn normal(&self) -> Vec3 {
        Vec3::new(-self.gradient.x, -self.gradient.y, 1.0).normalize()
    }
}

impl SurfaceModel {
    pub fn flat_ground() -> Self {
        SurfaceModel::Plane { height: 0.0 }
    }

    pub fn empty() -> Self {
        SurfaceModel::Union { parts: Vec::new() }
    }

    pub fn height(&self, x: f64, y: f64) -> Option<f64> {
        self.sample(x, y).map(|s| s.height)
    }

    pub fn normal(&self, x: f64, y: f64) -> Option<Vec3> {
        self.sample(x, y).map(|s| s.normal())
    }

    pub fn sample(&self, x: f64, y: f64) -> Option<SurfaceSample> {
        match self {
            SurfaceModel::Plane { height } => Some(SurfaceSample::flat(*height)),
            SurfaceModel::Ramp {
                height,
                slope_deg,
                azimuth_deg,
                origin,
            } => {
                let t = slope_deg.to_radians().tan();
                let (s, c) = azimuth_deg.to_radians().sin_cos();
                let along = (x - origin.x) * c + (y - origin.y) * s;
                Some(SurfaceSample {
                    height: height + t * along,
                    gradient: Vec2::new(t * c, t * s),
                })
            }
            SurfaceModel::SphericalCap {
                center,
                apex_height,
                radius,
                base_height,
            } => {
                let d = Vec2::new(x - center.x, y - center.y);
                let rho2 = d.norm_squared();
                let base = base_height.map(SurfaceSample::flat);
                if rho2 >= radius * radius {
                    return base;
                }
                let root = (radius * radius - rho2).sqrt();
                let cap = SurfaceSample {
                    height: apex_height - radius + root,
                    gradient: -d / root,
                };
                match base {
                    Some(b) if b.height >= cap.height => Some(b),
                    _ => Some(cap),
                }
            }
            SurfaceModel::Puck {
                center,
                radius,
                height,
                crown,
                ripple_amplitude,
                ripple_wavelength,
                base_height,
            } => {
                let d = Vec2::new(x - center.x, y - center.y);
                if d.norm_squared() > radius * radius {
                    return base_height.map(SurfaceSample::flat);
                }
                let r2 = radius * radius;
                let mut h = height + crown * (1.0 - d.norm_squared() / r2);
                let mut g = -d * (2.0 * crown / r2);
                if *ripple_amplitude != 0.0 {
                    let k = 2.0 * PI / ripple_wavelength;
                    let (sx, cx) = (k * d.x).sin_cos();
                    let (sy, cy) = (k * d.y).sin_cos();
                    h += ripple_amplitude * sx * sy;
                    g += Vec2::new(cx * sy, sx * cy) * (ripple_amplitude * k);
                }
                Some(SurfaceSample { height: h, gradient: g })
            }
            SurfaceModel::Slab {
                center,
                half_extent,
                height,
                base_height,
            } => {
                if (x - center.x).abs() <= half_extent.x && (y - center.y).abs() <= half_extent.y {
                    Some(SurfaceSample::flat(*height))
                } else {
                    base_height.map(SurfaceSample::flat)
                }
            }
            SurfaceModel::HeightField(hf) => hf.sample(x, y),
            SurfaceModel::Union { parts } => parts
                .iter()
                .filter_map(|p| p.sample(x, y))
                .fold(None, |best: Option<SurfaceSample>, s| match best {
                    Some(b) if b.height >= s.height => Some(b),
                    _ => Some(s),
                }),
        }
    }
}

/// Uniform grid of optional heights with bilinear interpolation.
///
/// Node `(i, j)` sits at `origin + (i, j) * pitch`; storage is row-major in `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightField {
    pub origin: Vec2,
    pub pitch: f64,
    pub nx: usize,
    pub ny: usize,
    pub heights: Vec<Option<f64>>,
}

impl HeightField {
    /// Empty field covering `[min, max]`.
    pub fn covering(min: Vec2, max: Vec2, pitch: f64) -> Self {
        let nx = ((max.x - min.x) / pitch).ceil() as usize + 1;
        let ny = ((max.y - min.y) / pitch).ceil() as usize + 1;
        Self {
            origin: min,
            pitch,
            nx,
            ny,
            heights: vec![None; nx * ny],
        }
    }

    pub fn node(&self, i: usize, j: usize) -> Option<f64> {
        self.heights[j * self.nx + i]
    }

    pub fn node_position(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64, j as f64) * self.pitch
    }

    /// Raises every node for which `value(x, y)` is `Some` to at least that value.
    pub fn raise_where<F>(&mut self, lo: Vec2, hi: Vec2, mut value: F)
    where
        F: FnMut(f64, f64) -> Option<f64>,
    {
        let lo_index = |v: f64, o: f64, n: usize| (((v - o) / self.pitch).floor().max(0.0) as usize).min(n - 1);
        let hi_index = |v: f64, o: f64, n: usize| (((v - o) / self.pitch).ceil().max(0.0) as usize).min(n - 1);
        let (i0, i1) = (lo_index(lo.x, self.origin.x, self.nx), hi_index(hi.x, self.origin.x, self.nx));
        let (j0, j1) = (lo_index(lo.y, self.origin.y, self.ny), hi_index(hi.y, self.origin.y, self.ny));
        for j in j0..=j1 {
            for i in i0..=i1 {
                let p = self.node_position(i, j);
                if let Some(v) = value(p.x, p.y) {
                    let slot = &mut self.heights[j * self.nx + i];
                    *slot = Some(slot.map_or(v, |old| old.max(v)));
                }
            }
        }
    }

    pub fn sample(&self, x: f64, y: f64) -> Option<SurfaceSample> {
        let fx = (x - self.origin.x) / self.pitch;
        let fy = (y - self.origin.y) / self.pitch;
        if !(fx >= 0.0 && fy >= 0.0) || fx > (self.nx - 1) as f64 || fy > (self.ny - 1) as f64 {
            return None;
        }
        let i = (fx.floor() as usize).min(self.nx.saturating_sub(2));
        let j = (fy.floor() as usize).min(self.ny.saturating_sub(2));
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let h00 = self.node(i, j)?;
        let h10 = self.node(i + 1, j)?;
        let h01 = self.node(i, j + 1)?;
        let h11 = self.node(i + 1, j + 1)?;
        let height = h00 * (1.0 - tx) * (1.0 - ty) + h10 * tx * (1.0 - ty) + h01 * (1.0 - tx) * ty + h11 * tx * ty;
        let gx = ((h10 - h00) * (1.0 - ty) + (h11 - h01) * ty) / self.pitch;
        let gy = ((h01 - h00) * (1.0 - tx) + (h11 - h10) * tx) / self.pitch;
        Some(SurfaceSample {
            height,
            gradient: Vec2::new(gx, gy),
        })
    }
}
