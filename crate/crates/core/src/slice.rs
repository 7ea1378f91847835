//! Planar cross sections of the unit balls, exported as radial polylines.
//!
//! A slice fixes two independent vectors u, v and traces
//! `radius(theta) = 1 / norm(cos(theta) u + sin(theta) v)`; the point
//! `(px, py) = radius * (cos(theta), sin(theta))` is the curve in the
//! (u, v)-coordinates of the plane. Every slice is a closed polyline
//! (first point repeated at the end).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::norm::{comparison_norm, level_norm};
use crate::space::{axpy, TowerSpace, TowerVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlicePoint {
    pub theta: f64,
    pub radius: f64,
    /// Coefficient of u: radius * cos(theta).
    pub px: f64,
    /// Coefficient of v: radius * sin(theta).
    pub py: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlicePolyline {
    pub plane: (TowerVector, TowerVector),
    pub points: Vec<SlicePoint>,
    pub resolution: usize,
}

impl SlicePolyline {
    /// CSV document with the stable header `theta,radius,px,py`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,radius,px,py\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{}\n", p.theta, p.radius, p.px, p.py));
        }
        out
    }
}

/// Cross section of the level-n unit ball in the plane spanned by u and v.
pub fn unit_sphere_slice(
    space: &TowerSpace,
    u: &TowerVector,
    v: &TowerVector,
    level: usize,
    resolution: usize,
) -> Result<SlicePolyline> {
    slice_with(space, u, v, level, resolution, |space, dir| {
        Ok(level_norm(space, dir, level)?.value)
    })
}

/// Cross section of the comparison ball (level n-1 ball extended by the
/// absolute value of the n-th coordinate) in the same plane; level >= 1.
pub fn comparison_slice(
    space: &TowerSpace,
    u: &TowerVector,
    v: &TowerVector,
    level: usize,
    resolution: usize,
) -> Result<SlicePolyline> {
    slice_with(space, u, v, level, resolution, |space, dir| {
        comparison_norm(space, dir, level)
    })
}

fn slice_with(
    space: &TowerSpace,
    u: &TowerVector,
    v: &TowerVector,
    level: usize,
    resolution: usize,
    norm_of: impl Fn(&TowerSpace, &TowerVector) -> Result<f64>,
) -> Result<SlicePolyline> {
    if resolution < 1 {
        return Err(Error::OutOfDomain {
            name: "resolution",
            value: resolution as f64,
            domain: "integers >= 1",
        });
    }
    let span = u.trimmed().degree().max(v.trimmed().degree());
    if span > level {
        return Err(Error::DegreeOutOfRange {
            degree: span,
            max: level,
        });
    }
    check_independent(u, v)?;
    let mut points = Vec::with_capacity(resolution + 1);
    for i in 0..resolution {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / resolution as f64;
        let dir = axpy(theta.cos(), u, theta.sin(), v)?;
        let norm = norm_of(space, &dir)?;
        if norm <= 0.0 {
            return Err(Error::DegeneratePlane);
        }
        let radius = 1.0 / norm;
        points.push(SlicePoint {
            theta,
            radius,
            px: radius * theta.cos(),
            py: radius * theta.sin(),
        });
    }
    let mut closing = points[0];
    closing.theta = 2.0 * std::f64::consts::PI;
    points.push(closing);
    Ok(SlicePolyline {
        plane: (u.clone(), v.clone()),
        points,
        resolution,
    })
}

/// Linear independence on the raw representation (Gram determinant of the
/// concatenated base and coordinate entries).
fn check_independent(u: &TowerVector, v: &TowerVector) -> Result<()> {
    if u.base.len() != v.base.len() {
        return Err(Error::DimensionMismatch {
            left: u.base.len(),
            right: v.base.len(),
        });
    }
    let degree = u.degree().max(v.degree());
    let mut uu = 0.0;
    let mut vv = 0.0;
    let mut uv = 0.0;
    let entries = u
        .base
        .iter()
        .copied()
        .zip(v.base.iter().copied())
        .chain((1..=degree).map(|j| (u.coord(j), v.coord(j))));
    for (a, b) in entries {
        uu += a * a;
        vv += b * b;
        uv += a * b;
    }
    let det = uu * vv - uv * uv;
    if det.is_nan() || det <= 1e-24 * uu.max(1e-300) * vv.max(1e-300) {
        return Err(Error::DegeneratePlane);
    }
    Ok(())
}
