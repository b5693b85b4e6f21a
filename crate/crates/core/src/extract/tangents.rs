//! Finite-difference tangents along polylines.

use alloc::vec::Vec;

use crate::geometry::FeaturePolyline;
use crate::vec3::Vec3;

/// Central differences at interior points, one-sided at the ends of open
/// lines, wrapping around on closed ones. A zero difference falls back to the
/// one-sided neighbours and finally to the previous tangent.
pub fn compute_tangents(mut line: FeaturePolyline) -> FeaturePolyline {
    let p = &line.points;
    let n = p.len();
    if n < 2 {
        line.tangents = alloc::vec![Vec3::Z; n];
        return line;
    }
    let unique = if line.closed && n > 2 { n - 1 } else { n };
    let mut t: Vec<Vec3> = Vec::with_capacity(n);
    for i in 0..unique {
        let (prev, next) = if line.closed && n > 2 {
            (p[(i + unique - 1) % unique], p[(i + 1) % unique])
        } else {
            (p[i.saturating_sub(1)], p[(i + 1).min(n - 1)])
        };
        let dir = (next - prev)
            .try_normalize()
            .or_else(|| (next - p[i]).try_normalize())
            .or_else(|| (p[i] - prev).try_normalize())
            .or_else(|| t.last().copied())
            .unwrap_or(Vec3::Z);
        t.push(dir);
    }
    if unique < n {
        t.push(t[0]);
    }
    line.tangents = t;
    line
}
