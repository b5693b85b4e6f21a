//! Marching tetrahedra.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::geometry::TriangleSurface;
use crate::mesh::ScalarField;
use crate::par::par_map_collect;
use crate::vec3::Vec3;

/// Identity of an isosurface vertex: a mesh vertex the surface passes
/// through, or the crossing on a mesh edge `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Vertex(usize),
    Edge(usize, usize),
}

/// Crossings this close to an edge end (in edge parameter) snap to the mesh
/// vertex, which keeps sliver triangles out without opening cracks.
const SNAP: f64 = 1e-9;

/// Isosurface `{f = c}` of a piecewise linear field.
///
/// A vertex is inside when `f ≥ c`. Crossing points are keyed by mesh edge so
/// neighbouring tets share them exactly, and every triangle is wound so its
/// normal points toward increasing `f`.
pub fn marching_tetrahedra(field: &ScalarField, c: f64) -> TriangleSurface {
    let mesh = field.mesh();
    let f = field.values();
    let pts = mesh.points();
    let tets = mesh.tets();
    if !c.is_finite() {
        return TriangleSurface::default();
    }

    let crossing = |i: usize, j: usize| -> (Key, Vec3) {
        let (a, b) = (i.min(j), i.max(j));
        let t = (c - f[a]) / (f[b] - f[a]);
        if !(t > SNAP) {
            (Key::Vertex(a), pts[a])
        } else if t >= 1.0 - SNAP {
            (Key::Vertex(b), pts[b])
        } else {
            (Key::Edge(a, b), pts[a] + (pts[b] - pts[a]) * t)
        }
    };

    let per_tet: Vec<Vec<[(Key, Vec3); 3]>> = par_map_collect!(0..tets.len(), |ti: usize| {
        let t = tets[ti];
        let vals = t.map(|v| f[v]);
        if vals.iter().any(|v| !v.is_finite()) {
            return Vec::new();
        }
        let inside: Vec<usize> = (0..4).filter(|&k| vals[k] >= c).collect();
        let outside: Vec<usize> = (0..4).filter(|&k| vals[k] < c).collect();
        let mut tris: Vec<[(Key, Vec3); 3]> = Vec::new();
        match inside.len() {
            1 | 3 => {
                let (lone, others) = if inside.len() == 1 {
                    (inside[0], &outside)
                } else {
                    (outside[0], &inside)
                };
                tris.push([
                    crossing(t[lone], t[others[0]]),
                    crossing(t[lone], t[others[1]]),
                    crossing(t[lone], t[others[2]]),
                ]);
            }
            2 => {
                let (a, b) = (inside[0], inside[1]);
                let (p, q) = (outside[0], outside[1]);
                let ap = crossing(t[a], t[p]);
                let aq = crossing(t[a], t[q]);
                let bq = crossing(t[b], t[q]);
                let bp = crossing(t[b], t[p]);
                tris.push([ap, aq, bq]);
                tris.push([ap, bq, bp]);
            }
            _ => return tris,
        }
        let g = tet_gradient(t.map(|v| pts[v]), vals);
        tris.retain_mut(|tri| {
            if tri[0].0 == tri[1].0 || tri[1].0 == tri[2].0 || tri[0].0 == tri[2].0 {
                return false;
            }
            let n = (tri[1].1 - tri[0].1).cross(tri[2].1 - tri[0].1);
            if n.dot(g) < 0.0 {
                tri.swap(1, 2);
            }
            true
        });
        tris
    });

    let mut ids: BTreeMap<Key, usize> = BTreeMap::new();
    let mut surface = TriangleSurface::default();
    for tris in per_tet {
        for tri in tris {
            let idx = tri.map(|(k, p)| {
                *ids.entry(k).or_insert_with(|| {
                    surface.points.push(p);
                    surface.points.len() - 1
                })
            });
            surface.triangles.push(idx);
        }
    }
    surface
}

/// Gradient of the linear interpolant over a tet.
fn tet_gradient(p: [Vec3; 4], f: [f64; 4]) -> Vec3 {
    let e1 = p[1] - p[0];
    let e2 = p[2] - p[0];
    let e3 = p[3] - p[0];
    let det = e1.dot(e2.cross(e3));
    if det == 0.0 {
        return Vec3::ZERO;
    }
    let (d1, d2, d3) = (f[1] - f[0], f[2] - f[0], f[3] - f[0]);
    (e2.cross(e3) * d1 + e3.cross(e1) * d2 + e1.cross(e2) * d3) / det
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{build_box_mesh, BoxDomain};
    use alloc::sync::Arc;
    use core::f64::consts::PI;

    fn field_of(n: usize, domain: BoxDomain, f: impl Fn(Vec3) -> f64) -> ScalarField {
        let mesh = Arc::new(build_box_mesh(&domain, n));
        let v = mesh.points().iter().map(|p| f(*p)).collect();
        ScalarField::new(mesh, v).unwrap()
    }

    #[test]
    fn plane_through_unit_box() {
        let s = field_of(6, BoxDomain::unit(), |p| p.x);
        let surf = marching_tetrahedra(&s, 0.5);
        assert!((surf.area() - 1.0).abs() < 1e-12, "{}", surf.area());
        for p in &surf.points {
            assert!((p.x - 0.5).abs() < 1e-12);
        }
        // normals point toward +x
        for t in 0..surf.triangles.len() {
            let [a, b, c] = surf.triangles[t].map(|i| surf.points[i]);
            assert!((b - a).cross(c - a).x > 0.0);
        }
    }

    #[test]
    fn oblique_plane_is_exact() {
        let s = field_of(5, BoxDomain::unit(), |p| 0.3 * p.x + 0.5 * p.y - 0.2 * p.z);
        let surf = marching_tetrahedra(&s, 0.2);
        for p in &surf.points {
            assert!((0.3 * p.x + 0.5 * p.y - 0.2 * p.z - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_is_empty() {
        let s = field_of(4, BoxDomain::unit(), |p| p.x + p.y);
        assert!(marching_tetrahedra(&s, -1.0).is_empty());
        assert!(marching_tetrahedra(&s, 5.0).is_empty());
        assert!(marching_tetrahedra(&s, f64::NAN).is_empty());
    }

    #[test]
    fn sphere_is_watertight_and_accurate() {
        let center = Vec3::new(1.0, 1.0, 1.0);
        let s = field_of(41, BoxDomain::default(), |p| (p - center).norm_squared());
        let surf = marching_tetrahedra(&s, 0.25);
        assert!(surf.is_watertight());
        let min_area = (0..surf.triangles.len()).map(|t| surf.triangle_area(t)).fold(f64::MAX, f64::min);
        assert!(min_area > 1e-14 * 12.0, "{min_area:e}");
        let exact = 4.0 * PI * 0.25;
        assert!((surf.area() - exact).abs() / exact < 0.02, "{}", surf.area());
    }

    #[test]
    fn isovalue_on_vertices_stays_crack_free() {
        // c hits grid planes exactly
        let s = field_of(5, BoxDomain::default(), |p| p.x + 0.0 * p.y);
        let surf = marching_tetrahedra(&s, 1.0);
        assert!((surf.area() - 4.0).abs() < 1e-12, "{}", surf.area());
    }
}
