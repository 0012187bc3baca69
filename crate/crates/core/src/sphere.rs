//! Geometry of the round unit sphere.
//!
//! Points are unit vectors in R³, tangent vectors are ambient vectors
//! orthogonal to their base point, and every base point carries a canonical
//! orthonormal frame so that derivatives can be written as 2×2 matrices.
//! Two stereographic charts cover the sphere: the north chart projects from
//! (0,0,1) and the south chart projects from (0,0,−1).

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|‖p‖ − 1|` accepted by [`SpherePoint::new`].
pub const UNIT_TOLERANCE: f64 = 1e-12;
/// Tolerance on `|p · v|` accepted by [`TangentVector::new`].
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-12;
/// Distance from the z-axis below which [`frame_at`] switches to the fallback frame.
pub const POLE_FALLBACK_RADIUS: f64 = 1e-9;
/// Minimum distance from a chart's excluded pole for [`stereographic_project`].
pub const CHART_EXCLUSION_RADIUS: f64 = 1e-6;
/// Height above which [`preferred_chart`] picks the south chart.
pub const CHART_SWITCH_HEIGHT: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    coords: [f64; 3],
}

impl SpherePoint {
    pub const NORTH: SpherePoint = SpherePoint {
        coords: [0.0, 0.0, 1.0],
    };
    pub const SOUTH: SpherePoint = SpherePoint {
        coords: [0.0, 0.0, -1.0],
    };

    /// Validating constructor: the input must already have unit norm.
    pub fn new(coords: [f64; 3]) -> Result<Self> {
        let norm = norm3(&coords);
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::Validation(format!(
                "point {coords:?} has norm {norm}, expected 1"
            )));
        }
        Ok(Self { coords })
    }

    /// Projects an arbitrary nonzero vector radially onto the sphere.
    pub fn normalized(coords: [f64; 3]) -> Result<Self> {
        let norm = norm3(&coords);
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Validation(format!("cannot normalize {coords:?}")));
        }
        Ok(Self {
            coords: [coords[0] / norm, coords[1] / norm, coords[2] / norm],
        })
    }

    #[allow(dead_code)]
    pub(crate) fn from_unit_unchecked(coords: [f64; 3]) -> Self {
        debug_assert!((norm3(&coords) - 1.0).abs() < 1e-9);
        Self { coords }
    }

    /// Renormalizes a vector already close to unit length.
    pub(crate) fn renormalize(coords: [f64; 3]) -> Self {
        let n = norm3(&coords);
        Self {
            coords: [coords[0] / n, coords[1] / n, coords[2] / n],
        }
    }

    pub fn coords(&self) -> [f64; 3] {
        self.coords
    }

    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn y(&self) -> f64 {
        self.coords[1]
    }

    pub fn z(&self) -> f64 {
        self.coords[2]
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::from(self.coords)
    }

    pub fn antipode(&self) -> Self {
        Self {
            coords: [-self.coords[0], -self.coords[1], -self.coords[2]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    base: SpherePoint,
    dir: [f64; 3],
}

impl TangentVector {
    pub fn new(base: SpherePoint, dir: [f64; 3]) -> Result<Self> {
        let dot = dot3(&base.coords, &dir);
        let scale = norm3(&dir).max(1.0);
        if !dot.is_finite() || dot.abs() > ORTHOGONALITY_TOLERANCE * scale {
            return Err(Error::Validation(format!(
                "vector {dir:?} is not tangent at {:?} (dot {dot:e})",
                base.coords
            )));
        }
        Ok(Self { base, dir })
    }

    /// Drops the normal component of `dir`.
    pub fn projected(base: SpherePoint, dir: [f64; 3]) -> Self {
        let d = dot3(&base.coords, &dir);
        let p = base.coords;
        Self {
            base,
            dir: [dir[0] - d * p[0], dir[1] - d * p[1], dir[2] - d * p[2]],
        }
    }

    /// Builds the tangent vector with components `(a, b)` in `frame_at(base)`.
    pub fn from_frame(base: SpherePoint, components: [f64; 2]) -> Self {
        let frame = frame_at(&base);
        let [a, b] = components;
        let dir = [
            a * frame.e1[0] + b * frame.e2[0],
            a * frame.e1[1] + b * frame.e2[1],
            a * frame.e1[2] + b * frame.e2[2],
        ];
        Self { base, dir }
    }

    pub fn base(&self) -> SpherePoint {
        self.base
    }

    pub fn dir(&self) -> [f64; 3] {
        self.dir
    }

    pub fn norm(&self) -> f64 {
        norm3(&self.dir)
    }

    /// Components in `frame_at(base)`.
    pub fn frame_components(&self) -> [f64; 2] {
        let frame = frame_at(&self.base);
        [dot3(&frame.e1, &self.dir), dot3(&frame.e2, &self.dir)]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            base: self.base,
            dir: [
                self.dir[0] * factor,
                self.dir[1] * factor,
                self.dir[2] * factor,
            ],
        }
    }
}

/// Orthonormal tangent frame with `e1 × e2 = base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub base: SpherePoint,
    pub e1: [f64; 3],
    pub e2: [f64; 3],
}

/// Canonical frame: `e1` points east (increasing longitude) and `e2` north.
///
/// Within [`POLE_FALLBACK_RADIUS`] of the z-axis the frame is the fixed
/// `e1 = (1,0,0)` with `e2 = base × e1`, i.e. `(0,1,0)` at the north pole and
/// `(0,−1,0)` at the south pole.
pub fn frame_at(p: &SpherePoint) -> Frame {
    let [x, y, z] = p.coords;
    let rho = x.hypot(y);
    if rho < POLE_FALLBACK_RADIUS {
        let e1 = [1.0, 0.0, 0.0];
        let e2 = cross3(&p.coords, &e1);
        let n = norm3(&e2);
        return Frame {
            base: *p,
            e1,
            e2: [e2[0] / n, e2[1] / n, e2[2] / n],
        };
    }
    Frame {
        base: *p,
        e1: [-y / rho, x / rho, 0.0],
        e2: [-z * x / rho, -z * y / rho, rho],
    }
}

/// Great-circle distance in radians, in `[0, π]`.
pub fn geodesic_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    let c = cross3(&p.coords, &q.coords);
    norm3(&c).atan2(dot3(&p.coords, &q.coords))
}

/// [`geodesic_distance`] for raw coordinates that must be unit vectors.
pub fn checked_geodesic_distance(p: [f64; 3], q: [f64; 3]) -> Result<f64> {
    Ok(geodesic_distance(
        &SpherePoint::new(p)?,
        &SpherePoint::new(q)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    /// Projection from (0,0,1); the north pole is excluded.
    North,
    /// Projection from (0,0,−1); the south pole is excluded.
    South,
}

impl Chart {
    pub fn excluded_pole(self) -> SpherePoint {
        match self {
            Chart::North => SpherePoint::NORTH,
            Chart::South => SpherePoint::SOUTH,
        }
    }

    pub fn other(self) -> Chart {
        match self {
            Chart::North => Chart::South,
            Chart::South => Chart::North,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartCoords {
    pub chart: Chart,
    pub u: f64,
    pub v: f64,
}

/// North chart when `z ≤ 0.9`, south chart otherwise.
pub fn preferred_chart(p: &SpherePoint) -> Chart {
    if p.z() <= CHART_SWITCH_HEIGHT {
        Chart::North
    } else {
        Chart::South
    }
}

pub fn stereographic_project(p: &SpherePoint, chart: Chart) -> Result<ChartCoords> {
    if geodesic_distance(p, &chart.excluded_pole()) < CHART_EXCLUSION_RADIUS {
        return Err(Error::ChartDomain(format!(
            "{:?} is within {CHART_EXCLUSION_RADIUS:e} of the {chart:?} chart's excluded pole",
            p.coords
        )));
    }
    let [u, v] = project_raw(p.coords, chart);
    Ok(ChartCoords { chart, u, v })
}

pub fn stereographic_lift(c: &ChartCoords) -> SpherePoint {
    SpherePoint::renormalize(lift_raw([c.u, c.v], c.chart))
}

/// Transition map between the two charts: `(u, v) ↦ (u, v) / (u² + v²)`.
pub fn chart_transition(u: f64, v: f64) -> (f64, f64) {
    let r2 = u * u + v * v;
    (u / r2, v / r2)
}

pub(crate) fn project_raw<T: crate::jet::Scalar>(p: [T; 3], chart: Chart) -> [T; 2] {
    let denom = match chart {
        Chart::North => T::from_f64(1.0) - p[2],
        Chart::South => T::from_f64(1.0) + p[2],
    };
    let inv = denom.recip();
    [p[0] * inv, p[1] * inv]
}

pub(crate) fn lift_raw<T: crate::jet::Scalar>(c: [T; 2], chart: Chart) -> [T; 3] {
    let r2 = c[0] * c[0] + c[1] * c[1];
    let inv = (r2 + 1.0).recip();
    let z = match chart {
        Chart::North => (r2 - 1.0) * inv,
        Chart::South => (-r2 + 1.0) * inv,
    };
    [c[0] * inv * 2.0, c[1] * inv * 2.0, z]
}

/// Deterministic quasi-uniform point set (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<SpherePoint> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let theta = golden * i as f64;
            SpherePoint::renormalize([r * theta.cos(), r * theta.sin(), z])
        })
        .collect()
}

/// The six points `±e_x, ±e_y, ±e_z`.
pub fn axis_points() -> [SpherePoint; 6] {
    [
        SpherePoint {
            coords: [1.0, 0.0, 0.0],
        },
        SpherePoint {
            coords: [-1.0, 0.0, 0.0],
        },
        SpherePoint {
            coords: [0.0, 1.0, 0.0],
        },
        SpherePoint {
            coords: [0.0, -1.0, 0.0],
        },
        SpherePoint {
            coords: [0.0, 0.0, 1.0],
        },
        SpherePoint {
            coords: [0.0, 0.0, -1.0],
        },
    ]
}

/// Rotation of R³ taking `from` to `to` along the great circle joining them.
///
/// For antipodal inputs the rotation by π about `frame_at(from).e1` is used.
pub fn transport_rotation(from: &SpherePoint, to: &SpherePoint) -> nalgebra::Matrix3<f64> {
    let a = from.vector();
    let b = to.vector();
    let axis = a.cross(&b);
    let s = axis.norm();
    let c = a.dot(&b);
    if s < 1e-15 {
        if c > 0.0 {
            return nalgebra::Matrix3::identity();
        }
        let e1 = Vector3::from(frame_at(from).e1);
        return 2.0 * e1 * e1.transpose() - nalgebra::Matrix3::identity();
    }
    let k = axis / s;
    let kx = nalgebra::Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    nalgebra::Matrix3::identity() + s * kx + (1.0 - c) * kx * kx
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}
