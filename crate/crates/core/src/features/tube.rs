//! modeTube: a tube around a line whose radius follows the change of the
//! mean mode across each cross-section.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{FeatureError, ModeTubeParams, Normalization};
use crate::geometry::{FeaturePolyline, TriangleSurface};
use crate::locate::PointLocator;
use crate::special::tube_displacement_factor;
use crate::stats::ModeStats;
use crate::vec3::Vec3;

/// Orthonormal cross-section frame `(u, v)` with `u × v` along the tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub tangent: Vec3,
    pub u: Vec3,
    pub v: Vec3,
}

fn least_aligned_axis(t: Vec3) -> Vec3 {
    let a = [t.x.abs(), t.y.abs(), t.z.abs()];
    if a[0] <= a[1] && a[0] <= a[2] {
        Vec3::X
    } else if a[1] <= a[2] {
        Vec3::Y
    } else {
        Vec3::Z
    }
}

fn complete(t: Vec3, hint: Vec3) -> Frame {
    let u = (hint - t * hint.dot(t))
        .try_normalize()
        .unwrap_or_else(|| {
            let e = least_aligned_axis(t);
            (e - t * e.dot(t)).try_normalize().unwrap_or(Vec3::X)
        });
    Frame {
        tangent: t,
        u,
        v: t.cross(u),
    }
}

fn reflect(x: Vec3, n: Vec3, c: f64) -> Vec3 {
    x - n * (2.0 / c * n.dot(x))
}

/// Rotation-minimizing frames by double reflection, seeded with the
/// coordinate axis least aligned with the first tangent. On closed lines
/// the residual twist is spread evenly so the last frame matches the first.
pub fn rotation_minimizing_frames(points: &[Vec3], tangents: &[Vec3], closed: bool) -> Vec<Frame> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let t0 = tangents[0];
    let mut frames = Vec::with_capacity(n);
    frames.push(complete(t0, least_aligned_axis(t0)));
    for i in 0..n - 1 {
        let f = frames[i];
        let v1 = points[i + 1] - points[i];
        let c1 = v1.dot(v1);
        let t1 = tangents[i + 1];
        let next = if c1 == 0.0 {
            complete(t1, f.u)
        } else {
            let r_l = reflect(f.u, v1, c1);
            let t_l = reflect(f.tangent, v1, c1);
            let v2 = t1 - t_l;
            let c2 = v2.dot(v2);
            let r = if c2 == 0.0 { r_l } else { reflect(r_l, v2, c2) };
            complete(t1, r)
        };
        frames.push(next);
    }
    if closed && n > 2 {
        let first = frames[0];
        let last = frames[n - 1];
        let twist = libm::atan2(first.tangent.dot(first.u.cross(last.u)), first.u.dot(last.u));
        for (i, f) in frames.iter_mut().enumerate() {
            let a = -twist * i as f64 / (n - 1) as f64;
            let (s, c) = libm::sincos(a);
            let u = f.u * c + f.v * s;
            *f = complete(f.tangent, u);
        }
        frames[n - 1] = frames[0];
    }
    frames
}

/// A scale at or below this is interpolation round-off; d_c is then zero.
const NORMALIZATION_FLOOR: f64 = 1e-12;

struct Ring {
    center: Vec3,
    dirs: Vec<Vec3>,
    /// Raw mean-mode difference per sample, NaN where unavailable.
    d: Vec<f64>,
}

/// Builds one tube per polyline and merges them into a single surface with a
/// per-vertex "d_c" channel holding the normalized mode difference.
pub fn build_mode_tube(
    lines: &[FeaturePolyline],
    stats: &ModeStats,
    params: &ModeTubeParams,
) -> Result<TriangleSurface, FeatureError> {
    params.validate()?;
    let locator = PointLocator::new(stats.mesh());
    let k = params.samples_per_ring;
    let mut tubes: Vec<(Vec<Ring>, bool)> = Vec::new();
    for line in lines {
        if line.len() < 2 {
            continue;
        }
        if line.tangents.len() != line.len() {
            return Err(FeatureError::MissingTangents);
        }
        let frames = rotation_minimizing_frames(&line.points, &line.tangents, line.closed);
        let count = if line.closed && line.len() > 2 { line.len() - 1 } else { line.len() };
        let rings = (0..count)
            .map(|i| {
                let p0 = line.points[i];
                let f = frames[i];
                let base = locator.sample(&stats.mean_mode, p0);
                let dirs: Vec<Vec3> = (0..k)
                    .map(|j| {
                        let (s, c) = libm::sincos(2.0 * PI * j as f64 / k as f64);
                        f.u * c + f.v * s
                    })
                    .collect();
                let d = dirs
                    .iter()
                    .map(|dir| match (base, locator.sample(&stats.mean_mode, p0 + *dir * params.r0)) {
                        (Some(m0), Some(mc)) => mc - m0,
                        _ => f64::NAN,
                    })
                    .collect();
                Ring { center: p0, dirs, d }
            })
            .collect();
        tubes.push((rings, line.closed && line.len() > 2));
    }

    let global_max = tubes
        .iter()
        .flat_map(|(rings, _)| rings.iter().flat_map(|r| r.d.iter()))
        .filter(|d| d.is_finite())
        .fold(0.0f64, |m, d| m.max(d.abs()));

    let mut surface = TriangleSurface::default();
    let mut channel: Vec<f64> = Vec::new();
    for (rings, closed) in &tubes {
        let base = surface.points.len();
        for ring in rings {
            let scale = match params.normalization {
                Normalization::Global => global_max,
                Normalization::PerPoint => ring
                    .d
                    .iter()
                    .filter(|d| d.is_finite())
                    .fold(0.0f64, |m, d| m.max(d.abs())),
            };
            for (dir, &d) in ring.dirs.iter().zip(&ring.d) {
                let dn = if !d.is_finite() {
                    f64::NAN
                } else if scale > NORMALIZATION_FLOOR {
                    d / scale
                } else {
                    0.0
                };
                let fc = if dn.is_finite() { tube_displacement_factor(dn) } else { 1.0 };
                surface.points.push(ring.center + *dir * (fc * params.rs));
                channel.push(dn);
            }
        }
        let n = rings.len();
        let at = |i: usize, j: usize| base + (i % n) * k + (j % k);
        let segs = if *closed { n } else { n - 1 };
        for i in 0..segs {
            for j in 0..k {
                let (a, b, c, d) = (at(i, j), at(i, j + 1), at(i + 1, j + 1), at(i + 1, j));
                surface.triangles.push([a, b, d]);
                surface.triangles.push([b, c, d]);
            }
        }
        if !*closed {
            for j in 1..k - 1 {
                surface.triangles.push([at(0, 0), at(0, j + 1), at(0, j)]);
                surface.triangles.push([at(n - 1, 0), at(n - 1, j), at(n - 1, j + 1)]);
            }
        }
    }
    surface.set_channel("d_c", channel);
    Ok(surface)
}
