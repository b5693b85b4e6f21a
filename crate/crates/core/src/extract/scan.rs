//! Locating degenerate points on mesh vertices, edges and faces.

use alloc::vec::Vec;

use super::minors::{relative_discriminant, segment_excludes_root, triangle_excludes_root, AffineDeviator};
use super::{DegenKind, ExtractionParams};
use crate::mesh::TensorField;
use crate::tensor::SymTensor3;
use crate::vec3::Vec3;

/// Normalized energies below this are treated as identically zero.
const ZERO_ENERGY: f64 = 1e-24;
/// Bernstein coefficients within this band of zero do not prune.
const PRUNE_TOL: f64 = 1e-12;
/// Barycentric weights below this count as lying on the face boundary.
const BOUNDARY_BARY: f64 = 1e-6;
/// More distinct roots than this on one simplex means a continuum of zeros.
const MAX_ISOLATED_ROOTS: usize = 4;

/// A degenerate point on a mesh face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceDegeneratePoint {
    pub face: [usize; 3],
    pub barycentric: [f64; 3],
    pub position: Vec3,
    pub kind: DegenKind,
    /// `discriminant / ‖deviator‖⁶` of the interpolated tensor.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceStatus {
    /// Zero or more isolated degenerate points.
    Regular,
    /// A curve of degenerate points runs inside the face; its points are
    /// left to the neighbouring edges.
    NonIsolated,
    /// The face is degenerate everywhere (or isotropic).
    DegeneratePlane,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceScan {
    pub points: Vec<FaceDegeneratePoint>,
    pub status: FaceStatus,
    pub unconverged_seeds: usize,
}

pub(crate) fn deviator_at(field: &TensorField, v: usize) -> SymTensor3 {
    field.tensors()[v].deviator()
}

pub(crate) fn kind_of(a: &SymTensor3) -> DegenKind {
    if a.mode().value > 0.0 {
        DegenKind::Linear
    } else {
        DegenKind::Planar
    }
}

/// Degenerate (and not near-isotropic) mesh vertex.
pub(crate) fn vertex_is_degenerate(t: &SymTensor3, params: &ExtractionParams) -> Option<f64> {
    if t.mode().near_isotropic {
        return None;
    }
    let rel = relative_discriminant(&t.deviator());
    (rel <= params.vertex_tol).then_some(rel)
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum EdgeScan {
    Roots(Vec<(f64, f64)>),
    /// Degenerate along its whole length.
    Degenerate,
    Isotropic,
}

/// Interior roots `(t, residual)` of the discriminant along the edge `a → b`.
pub(crate) fn scan_edge(ta: &SymTensor3, tb: &SymTensor3, params: &ExtractionParams) -> EdgeScan {
    let (da, db) = (ta.deviator(), tb.deviator());
    let s = da.frobenius_norm().max(db.frobenius_norm());
    if s == 0.0 || !s.is_finite() {
        return EdgeScan::Isotropic;
    }
    let a = da * (1.0 / s);
    let b = db * (1.0 / s);
    let dir = [b - a];
    let f = AffineDeviator { base: a, dirs: &dir };
    let max_e = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&t| f.energy(&[t, 0.0]))
        .fold(0.0, f64::max);
    if max_e <= ZERO_ENERGY {
        return EdgeScan::Degenerate;
    }
    // interval subdivision seeded refinement
    let mut seeds = Vec::new();
    let mut stack = alloc::vec![(0.0f64, 1.0f64, a, b, 0usize)];
    while let Some((t0, t1, p, q, depth)) = stack.pop() {
        if segment_excludes_root(&p, &q, PRUNE_TOL) {
            continue;
        }
        if depth == params.edge_depth {
            seeds.push(0.5 * (t0 + t1));
            continue;
        }
        let tm = 0.5 * (t0 + t1);
        let m = (p + q) * 0.5;
        stack.push((tm, t1, m, q, depth + 1));
        stack.push((t0, tm, p, m, depth + 1));
    }
    let width = 1.0 / (1u64 << params.edge_depth) as f64;
    let mut roots: Vec<(f64, f64)> = Vec::new();
    for s in seeds {
        if roots.iter().any(|r| (r.0 - s).abs() <= width) {
            continue;
        }
        let (p, e) = f.refine([s, 0.0], 2.0);
        let t = p[0];
        if !(e <= params.accept_rel * max_e) || !(t > 1e-9 && t < 1.0 - 1e-9) {
            continue;
        }
        if let Some(r) = roots.iter_mut().find(|r| (r.0 - t).abs() <= params.dedup_bary) {
            if e < r.1 {
                *r = (t, e);
            }
            continue;
        }
        roots.push((t, e));
        if roots.len() > MAX_ISOLATED_ROOTS {
            return EdgeScan::Degenerate;
        }
    }
    roots.sort_by(|x, y| x.0.total_cmp(&y.0));
    EdgeScan::Roots(
        roots
            .into_iter()
            .map(|(t, _)| (t, relative_discriminant(&f.at(&[t, 0.0]))))
            .collect(),
    )
}

struct SubTriangle {
    bary: [[f64; 3]; 3],
    corners: [SymTensor3; 3],
    depth: usize,
}

/// All isolated degenerate points strictly inside a face.
///
/// Bernstein bounds on the discriminant minors prune a recursive 4-way
/// subdivision; each surviving leaf seeds a Levenberg-Marquardt descent.
/// Roots on the face boundary are left to the edge and vertex scans.
pub fn find_face_degeneracies(field: &TensorField, face: [usize; 3], params: &ExtractionParams) -> FaceScan {
    let pts = face.map(|v| field.mesh().points()[v]);
    let dev = face.map(|v| deviator_at(field, v));
    scan_face(face, pts, dev, params)
}

pub(crate) fn scan_face(
    face: [usize; 3],
    pts: [Vec3; 3],
    dev: [SymTensor3; 3],
    params: &ExtractionParams,
) -> FaceScan {
    let mut out = FaceScan {
        points: Vec::new(),
        status: FaceStatus::Regular,
        unconverged_seeds: 0,
    };
    let s = dev.iter().map(|d| d.frobenius_norm()).fold(0.0, f64::max);
    if s == 0.0 || !s.is_finite() {
        out.status = FaceStatus::DegeneratePlane;
        return out;
    }
    let c = dev.map(|d| d * (1.0 / s));
    let dirs = [c[1] - c[0], c[2] - c[0]];
    let f = AffineDeviator { base: c[0], dirs: &dirs };
    let third = 1.0 / 3.0;
    let samples = [
        [0.0, 0.0],
        [1.0, 0.0],
        [0.0, 1.0],
        [0.5, 0.0],
        [0.0, 0.5],
        [0.5, 0.5],
        [third, third],
    ];
    let max_e = samples.iter().map(|p| f.energy(p)).fold(0.0, f64::max);
    if max_e <= ZERO_ENERGY {
        out.status = FaceStatus::DegeneratePlane;
        return out;
    }

    let mut leaves: Vec<([f64; 3], f64)> = Vec::new();
    let mut stack = alloc::vec![SubTriangle {
        bary: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        corners: c,
        depth: 0,
    }];
    while let Some(t) = stack.pop() {
        if triangle_excludes_root(&t.corners, PRUNE_TOL) {
            continue;
        }
        let [b0, b1, b2] = t.bary;
        if t.depth == params.face_depth {
            let size = 1.0 / (1u64 << t.depth) as f64;
            leaves.push((core::array::from_fn(|k| (b0[k] + b1[k] + b2[k]) / 3.0), size));
            continue;
        }
        let mid = |x: [f64; 3], y: [f64; 3]| core::array::from_fn(|k| 0.5 * (x[k] + y[k]));
        let [c0, c1, c2] = t.corners;
        let (m01, m12, m02) = (mid(b0, b1), mid(b1, b2), mid(b0, b2));
        let (t01, t12, t02) = ((c0 + c1) * 0.5, (c1 + c2) * 0.5, (c0 + c2) * 0.5);
        let d = t.depth + 1;
        // pushed in reverse so the corner-0 child is processed first
        stack.push(SubTriangle { bary: [m01, m12, m02], corners: [t01, t12, t02], depth: d });
        stack.push(SubTriangle { bary: [m02, m12, b2], corners: [t02, t12, c2], depth: d });
        stack.push(SubTriangle { bary: [m01, b1, m12], corners: [t01, c1, t12], depth: d });
        stack.push(SubTriangle { bary: [b0, m01, m02], corners: [c0, t01, t02], depth: d });
    }

    let accept = params.accept_rel * max_e;
    // Roots on the boundary belong to the edge scan when the boundary point
    // itself is degenerate.
    let on_degenerate_boundary = |l: &[f64; 3]| {
        let k = (0..3).min_by(|&a, &b| l[a].total_cmp(&l[b])).unwrap_or(0);
        if l[k] >= BOUNDARY_BARY {
            return false;
        }
        let mut q = *l;
        q[k] = 0.0;
        let sum = q[0] + q[1] + q[2];
        let q = q.map(|w| w / sum);
        f.energy(&[q[1], q[2]]) <= accept
    };
    let mut roots: Vec<([f64; 3], f64)> = Vec::new();
    for (centroid, size) in leaves {
        if roots.iter().any(|r| bary_dist(&r.0, &centroid) <= size) {
            continue;
        }
        let (p, e) = f.refine([centroid[1], centroid[2]], 3.0);
        let l = [1.0 - p[0] - p[1], p[0], p[1]];
        if !(e <= accept) || l.iter().any(|&w| w < -1e-9) {
            out.unconverged_seeds += 1;
            continue;
        }
        if on_degenerate_boundary(&l) {
            continue;
        }
        if let Some(r) = roots.iter_mut().find(|r| bary_dist(&r.0, &l) <= params.dedup_bary) {
            if e < r.1 {
                *r = (l, e);
            }
            continue;
        }
        roots.push((l, e));
        if roots.len() > MAX_ISOLATED_ROOTS {
            out.status = FaceStatus::NonIsolated;
            return out;
        }
    }

    // Two roots joined by zeros are samples of one degenerate curve.
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            let m: [f64; 3] = core::array::from_fn(|k| 0.5 * (roots[i].0[k] + roots[j].0[k]));
            if f.energy(&[m[1], m[2]]) <= accept {
                out.status = FaceStatus::NonIsolated;
                return out;
            }
        }
    }

    roots.sort_by(|a, b| {
        a.0[0]
            .total_cmp(&b.0[0])
            .then(a.0[1].total_cmp(&b.0[1]))
    });
    out.points = roots
        .into_iter()
        .map(|(l, _)| {
            let a = f.at(&[l[1], l[2]]);
            FaceDegeneratePoint {
                face,
                barycentric: l,
                position: pts[0] * l[0] + pts[1] * l[1] + pts[2] * l[2],
                kind: kind_of(&a),
                residual: relative_discriminant(&a),
            }
        })
        .collect();
    out
}

fn bary_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    libm::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
}
