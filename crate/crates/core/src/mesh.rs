//! Tetrahedral mesh model and per-vertex fields.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::tensor::SymTensor3;
use crate::vec3::Vec3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("tet {tet} references point {index} but the mesh has {points} points")]
    IndexOutOfRange { tet: usize, index: usize, points: usize },
    #[error("tet {tet} has zero volume")]
    DegenerateTet { tet: usize },
    #[error("tet {tet} duplicates tet {other}")]
    DuplicateTet { tet: usize, other: usize },
    #[error("attribute has {got} values but the mesh has {expected} points")]
    AttributeLength { expected: usize, got: usize },
    #[error("barycentric weight {weight} is outside the cell")]
    OutOfCell { weight: f64 },
    #[error("tet index {tet} out of range ({tets} tets)")]
    TetOutOfRange { tet: usize, tets: usize },
}

/// Tetrahedral mesh. Every tet is positively oriented.
#[derive(Debug, Clone, PartialEq)]
pub struct TetMesh {
    points: Vec<Vec3>,
    tets: Vec<[usize; 4]>,
}

/// Signed volume of the tet `(a, b, c, d)`.
pub fn signed_volume(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> f64 {
    (b - a).dot((c - a).cross(d - a)) / 6.0
}

impl TetMesh {
    /// Validates indices, rejects zero-volume and duplicate tets, and flips
    /// negatively oriented tets.
    pub fn new(points: Vec<Vec3>, mut tets: Vec<[usize; 4]>) -> Result<Self, MeshError> {
        let n = points.len();
        for (ti, tet) in tets.iter_mut().enumerate() {
            if let Some(&bad) = tet.iter().find(|&&i| i >= n) {
                return Err(MeshError::IndexOutOfRange {
                    tet: ti,
                    index: bad,
                    points: n,
                });
            }
            let [a, b, c, d] = tet.map(|i| points[i]);
            let v = signed_volume(a, b, c, d);
            let scale = [b - a, c - a, d - a]
                .iter()
                .map(|e| e.norm())
                .fold(0.0, f64::max);
            if !(v.abs() > 1e-14 * scale * scale * scale) {
                return Err(MeshError::DegenerateTet { tet: ti });
            }
            if v < 0.0 {
                tet.swap(2, 3);
            }
        }
        let mut keys: Vec<([usize; 4], usize)> = tets
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut k = *t;
                k.sort_unstable();
                (k, i)
            })
            .collect();
        keys.sort_unstable();
        for w in keys.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(MeshError::DuplicateTet {
                    tet: w[1].1.max(w[0].1),
                    other: w[1].1.min(w[0].1),
                });
            }
        }
        Ok(Self { points, tets })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    pub fn tet_vertices(&self, tet: usize) -> [Vec3; 4] {
        self.tets[tet].map(|i| self.points[i])
    }

    pub fn tet_volume(&self, tet: usize) -> f64 {
        let [a, b, c, d] = self.tet_vertices(tet);
        signed_volume(a, b, c, d)
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for p in &self.points {
            lo = lo.min(*p);
            hi = hi.max(*p);
        }
        (lo, hi)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = self.bounds();
        if self.points.is_empty() {
            0.0
        } else {
            (hi - lo).norm()
        }
    }

    /// Barycentric coordinates of `x` with respect to `tet`.
    pub fn barycentric(&self, tet: usize, x: Vec3) -> [f64; 4] {
        let [a, b, c, d] = self.tet_vertices(tet);
        let v = signed_volume(a, b, c, d);
        let w0 = signed_volume(x, b, c, d) / v;
        let w1 = signed_volume(a, x, c, d) / v;
        let w2 = signed_volume(a, b, x, d) / v;
        let w3 = 1.0 - w0 - w1 - w2;
        [w0, w1, w2, w3]
    }

    /// Unique triangular faces as sorted index triples, with the tets on
    /// each side (`usize::MAX` on the boundary), in ascending key order.
    pub fn faces(&self) -> Vec<([usize; 3], [usize; 2])> {
        let mut all: Vec<([usize; 3], usize)> = Vec::with_capacity(self.tets.len() * 4);
        for (ti, t) in self.tets.iter().enumerate() {
            for skip in 0..4 {
                let mut f = [0usize; 3];
                let mut k = 0;
                for (j, &v) in t.iter().enumerate() {
                    if j != skip {
                        f[k] = v;
                        k += 1;
                    }
                }
                f.sort_unstable();
                all.push((f, ti));
            }
        }
        all.sort_unstable();
        let mut out: Vec<([usize; 3], [usize; 2])> = Vec::with_capacity(all.len() / 2 + 1);
        for (f, t) in all {
            match out.last_mut() {
                Some((lf, adj)) if *lf == f => adj[1] = t,
                _ => out.push((f, [t, usize::MAX])),
            }
        }
        out
    }

    /// Unique edges as sorted index pairs in ascending order.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut all: Vec<[usize; 2]> = Vec::with_capacity(self.tets.len() * 6);
        for t in &self.tets {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    all.push([t[i].min(t[j]), t[i].max(t[j])]);
                }
            }
        }
        all.sort_unstable();
        all.dedup();
        all
    }
}

/// Per-vertex symmetric tensors on a shared mesh.
#[derive(Debug, Clone)]
pub struct TensorField {
    mesh: Arc<TetMesh>,
    tensors: Vec<SymTensor3>,
}

impl TensorField {
    pub fn new(mesh: Arc<TetMesh>, tensors: Vec<SymTensor3>) -> Result<Self, MeshError> {
        if tensors.len() != mesh.point_count() {
            return Err(MeshError::AttributeLength {
                expected: mesh.point_count(),
                got: tensors.len(),
            });
        }
        Ok(Self { mesh, tensors })
    }

    pub fn mesh(&self) -> &Arc<TetMesh> {
        &self.mesh
    }

    pub fn tensors(&self) -> &[SymTensor3] {
        &self.tensors
    }

    pub fn into_tensors(self) -> Vec<SymTensor3> {
        self.tensors
    }

    pub fn map(&self, f: impl Fn(&SymTensor3) -> SymTensor3) -> TensorField {
        TensorField {
            mesh: self.mesh.clone(),
            tensors: self.tensors.iter().map(f).collect(),
        }
    }
}

/// Per-vertex scalar values on a shared mesh.
#[derive(Debug, Clone)]
pub struct ScalarField {
    mesh: Arc<TetMesh>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(mesh: Arc<TetMesh>, values: Vec<f64>) -> Result<Self, MeshError> {
        if values.len() != mesh.point_count() {
            return Err(MeshError::AttributeLength {
                expected: mesh.point_count(),
                got: values.len(),
            });
        }
        Ok(Self { mesh, values })
    }

    pub fn mesh(&self) -> &Arc<TetMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation inside `tet`. Weights are not range-checked.
    pub fn interpolate(&self, tet: usize, weights: &[f64; 4]) -> f64 {
        let t = &self.mesh.tets()[tet];
        (0..4).map(|i| weights[i] * self.values[t[i]]).sum()
    }

    /// `(min, max)` over finite values, `None` if there are none.
    pub fn range(&self) -> Option<(f64, f64)> {
        self.values
            .iter()
            .filter(|v| v.is_finite())
            .fold(None, |acc, &v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
    }
}

/// Component-wise linear interpolation of the field inside `tet`.
///
/// Weights must sum to 1; any weight below `-1e-9` is rejected as outside
/// the cell.
pub fn interpolate_tensor(
    field: &TensorField,
    tet: usize,
    weights: &[f64; 4],
) -> Result<SymTensor3, MeshError> {
    let mesh = field.mesh();
    if tet >= mesh.tet_count() {
        return Err(MeshError::TetOutOfRange {
            tet,
            tets: mesh.tet_count(),
        });
    }
    if let Some(&w) = weights.iter().find(|&&w| w < -1e-9 || w.is_nan()) {
        return Err(MeshError::OutOfCell { weight: w });
    }
    Ok(interpolate_unchecked(field.tensors(), &mesh.tets()[tet], weights))
}

pub(crate) fn interpolate_unchecked(
    tensors: &[SymTensor3],
    tet: &[usize; 4],
    weights: &[f64; 4],
) -> SymTensor3 {
    let mut acc = SymTensor3::ZERO;
    for i in 0..4 {
        acc += tensors[tet[i]] * weights[i];
    }
    acc
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn unit_tet() -> TetMesh {
        TetMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn reorients_negative_tets() {
        let m = TetMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 2, 1, 3]],
        )
        .unwrap();
        assert!(m.tet_volume(0) > 0.0);
    }

    #[test]
    fn rejects_bad_meshes() {
        let pts = unit_tet().points().to_vec();
        assert!(matches!(
            TetMesh::new(pts.clone(), vec![[0, 1, 2, 7]]),
            Err(MeshError::IndexOutOfRange { index: 7, .. })
        ));
        assert!(matches!(
            TetMesh::new(pts.clone(), vec![[0, 1, 2, 3], [3, 2, 1, 0]]),
            Err(MeshError::DuplicateTet { tet: 1, other: 0 })
        ));
        let mut flat = pts;
        flat[3] = Vec3::new(1.0, 1.0, 0.0);
        assert!(matches!(
            TetMesh::new(flat, vec![[0, 1, 2, 3]]),
            Err(MeshError::DegenerateTet { tet: 0 })
        ));
    }

    #[test]
    fn attribute_length_checked() {
        let m = Arc::new(unit_tet());
        assert!(TensorField::new(m.clone(), vec![SymTensor3::ZERO; 3]).is_err());
        assert!(ScalarField::new(m, vec![0.0; 5]).is_err());
    }

    #[test]
    fn interpolation_examples() {
        let m = Arc::new(unit_tet());
        let ts = vec![
            SymTensor3::diag(1.0, 0.0, 0.0),
            SymTensor3::diag(0.0, 2.0, 0.0),
            SymTensor3::new(0.0, 0.0, 4.0, 1.0, 0.0, 0.0),
            SymTensor3::new(0.0, 0.0, 0.0, 0.0, 8.0, -4.0),
        ];
        let f = TensorField::new(m.clone(), ts.clone()).unwrap();
        assert_eq!(interpolate_tensor(&f, 0, &[1.0, 0.0, 0.0, 0.0]).unwrap(), ts[0]);
        let q = interpolate_tensor(&f, 0, &[0.25; 4]).unwrap();
        let mean = (ts[0] + ts[1] + ts[2] + ts[3]) * 0.25;
        assert!(q.max_abs_diff(&mean) < 1e-15);

        let same = SymTensor3::new(1.0, 2.0, 3.0, 0.5, -0.5, 0.25);
        let g = TensorField::new(m, vec![same; 4]).unwrap();
        let q = interpolate_tensor(&g, 0, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(q.max_abs_diff(&same) < 1e-15);

        assert!(matches!(
            interpolate_tensor(&f, 0, &[1.1, -0.1, 0.0, 0.0]),
            Err(MeshError::OutOfCell { .. })
        ));
        assert!(interpolate_tensor(&f, 0, &[1.0 + 1e-12, -1e-12, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn barycentric_of_centroid() {
        let m = unit_tet();
        let w = m.barycentric(0, Vec3::new(0.25, 0.25, 0.25));
        for wi in w {
            assert!((wi - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn face_and_edge_topology() {
        let m = unit_tet();
        let faces = m.faces();
        assert_eq!(faces.len(), 4);
        assert!(faces.iter().all(|(_, adj)| adj[1] == usize::MAX));
        assert_eq!(m.edges().len(), 6);
    }
}
