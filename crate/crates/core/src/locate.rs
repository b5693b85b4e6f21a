//! Point location on tetrahedral meshes via uniform-grid binning.

use alloc::vec;
use alloc::vec::Vec;

use crate::mesh::{ScalarField, TetMesh};
use crate::vec3::Vec3;

/// Result of a point query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    Inside { tet: usize, weights: [f64; 4] },
    Outside,
}

impl Location {
    pub fn is_inside(&self) -> bool {
        matches!(self, Location::Inside { .. })
    }
}

/// Weight tolerance for accepting a point as inside a tet.
const INSIDE_TOL: f64 = 1e-9;

/// Uniform grid over the mesh bounding box; each bin lists the tets whose
/// (slightly padded) bounding box overlaps it, in ascending tet order.
#[derive(Debug, Clone)]
pub struct PointLocator<'a> {
    mesh: &'a TetMesh,
    lo: Vec3,
    hi: Vec3,
    dims: [usize; 3],
    cell: Vec3,
    offsets: Vec<usize>,
    entries: Vec<usize>,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a TetMesh) -> Self {
        let (lo, hi) = mesh.bounds();
        let ext = hi - lo;
        let n_tets = mesh.tet_count().max(1);
        // about two tets per bin on average
        let target_bins = (n_tets as f64 / 2.0).max(1.0);
        let vol = [ext.x, ext.y, ext.z]
            .iter()
            .map(|e| e.max(1e-300))
            .product::<f64>();
        let h = libm::cbrt(vol / target_bins).max(1e-300);
        let dim = |e: f64| (libm::ceil(e / h) as usize).clamp(1, 512);
        let dims = if mesh.tet_count() == 0 {
            [1, 1, 1]
        } else {
            [dim(ext.x), dim(ext.y), dim(ext.z)]
        };
        let cell = Vec3::new(
            (ext.x / dims[0] as f64).max(1e-300),
            (ext.y / dims[1] as f64).max(1e-300),
            (ext.z / dims[2] as f64).max(1e-300),
        );
        let mut locator = Self {
            mesh,
            lo,
            hi,
            dims,
            cell,
            offsets: Vec::new(),
            entries: Vec::new(),
        };
        let pad = 1e-9 * mesh.bbox_diagonal();
        let n_bins = dims[0] * dims[1] * dims[2];
        let ranges: Vec<[[usize; 2]; 3]> = (0..mesh.tet_count())
            .map(|t| {
                let vs = mesh.tet_vertices(t);
                let mut a = vs[0];
                let mut b = vs[0];
                for v in &vs[1..] {
                    a = a.min(*v);
                    b = b.max(*v);
                }
                let pv = Vec3::new(pad, pad, pad);
                let ia = locator.bin_coords(a - pv);
                let ib = locator.bin_coords(b + pv);
                [[ia[0], ib[0]], [ia[1], ib[1]], [ia[2], ib[2]]]
            })
            .collect();
        let mut counts = vec![0usize; n_bins + 1];
        for r in &ranges {
            locator.for_bins(r, |b| counts[b + 1] += 1);
        }
        for i in 0..n_bins {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut entries = vec![0usize; counts[n_bins]];
        for (t, r) in ranges.iter().enumerate() {
            locator.for_bins(r, |b| {
                entries[fill[b]] = t;
                fill[b] += 1;
            });
        }
        locator.offsets = counts;
        locator.entries = entries;
        locator
    }

    pub fn mesh(&self) -> &'a TetMesh {
        self.mesh
    }

    fn for_bins(&self, r: &[[usize; 2]; 3], mut f: impl FnMut(usize)) {
        for k in r[2][0]..=r[2][1] {
            for j in r[1][0]..=r[1][1] {
                for i in r[0][0]..=r[0][1] {
                    f(i + self.dims[0] * (j + self.dims[1] * k));
                }
            }
        }
    }

    fn bin_coords(&self, p: Vec3) -> [usize; 3] {
        let d = p - self.lo;
        let c = |v: f64, h: f64, n: usize| -> usize {
            let i = libm::floor(v / h);
            if !(i > 0.0) {
                0
            } else {
                (i as usize).min(n - 1)
            }
        };
        [
            c(d.x, self.cell.x, self.dims[0]),
            c(d.y, self.cell.y, self.dims[1]),
            c(d.z, self.cell.z, self.dims[2]),
        ]
    }

    fn accept(&self, tet: usize, x: Vec3) -> Option<[f64; 4]> {
        let w = self.mesh.barycentric(tet, x);
        if w.iter().all(|&wi| wi >= -INSIDE_TOL && wi <= 1.0 + INSIDE_TOL) {
            Some(w)
        } else {
            None
        }
    }

    /// Finds a tet containing `x` (first in ascending tet order among the
    /// bin candidates), or `Outside`.
    pub fn locate(&self, x: Vec3) -> Location {
        if self.mesh.tet_count() == 0 || !(x.x.is_finite() && x.y.is_finite() && x.z.is_finite()) {
            return Location::Outside;
        }
        let tol = INSIDE_TOL * self.mesh.bbox_diagonal();
        if x.x < self.lo.x - tol
            || x.y < self.lo.y - tol
            || x.z < self.lo.z - tol
            || x.x > self.hi.x + tol
            || x.y > self.hi.y + tol
            || x.z > self.hi.z + tol
        {
            return Location::Outside;
        }
        let [i, j, k] = self.bin_coords(x);
        let b = i + self.dims[0] * (j + self.dims[1] * k);
        for &t in &self.entries[self.offsets[b]..self.offsets[b + 1]] {
            if let Some(weights) = self.accept(t, x) {
                return Location::Inside { tet: t, weights };
            }
        }
        // exhaustive fallback
        for t in 0..self.mesh.tet_count() {
            if let Some(weights) = self.accept(t, x) {
                return Location::Inside { tet: t, weights };
            }
        }
        Location::Outside
    }

    /// Interpolated scalar at `x`, `None` outside the mesh.
    pub fn sample(&self, field: &ScalarField, x: Vec3) -> Option<f64> {
        match self.locate(x) {
            Location::Inside { tet, weights } => Some(field.interpolate(tet, &weights)),
            Location::Outside => None,
        }
    }
}

/// One-shot point location; build a [`PointLocator`] for repeated queries.
pub fn locate_point(mesh: &TetMesh, x: Vec3) -> Location {
    PointLocator::new(mesh).locate(x)
}
