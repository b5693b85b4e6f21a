//! Pairing the degenerate points on a tet's boundary into line segments.

use alloc::vec::Vec;

use super::DegenKind;
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentEnd {
    pub position: Vec3,
    pub kind: DegenKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Pairing {
    pub segments: Vec<[usize; 2]>,
    /// Index of the point left over from an odd count.
    pub unpaired: Option<usize>,
}

/// Greedy pairing: same-kind pairs before mixed ones, nearest first; ties
/// are broken by index so the result is deterministic.
pub fn build_segments(points: &[SegmentEnd]) -> Pairing {
    let n = points.len();
    let mut candidates: Vec<(bool, f64, usize, usize)> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let mixed = points[i].kind != points[j].kind;
            candidates.push((mixed, points[i].position.distance(points[j].position), i, j));
        }
    }
    candidates.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    let mut used = alloc::vec![false; n];
    let mut segments = Vec::with_capacity(n / 2);
    for (_, _, i, j) in candidates {
        if !used[i] && !used[j] {
            used[i] = true;
            used[j] = true;
            segments.push([i, j]);
        }
    }
    Pairing {
        segments,
        unpaired: used.iter().position(|u| !u),
    }
}
