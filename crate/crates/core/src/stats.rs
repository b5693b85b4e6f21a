//! Per-vertex ensemble statistics.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::mesh::{ScalarField, TensorField, TetMesh};
use crate::par::par_map_collect;
use crate::special::normal_exceedance;
use crate::tensor::SymTensor3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("ensemble has no members")]
    Empty,
    #[error("member {member} has {got} tensors but the mesh has {expected} points")]
    MemberLength { member: usize, expected: usize, got: usize },
    #[error("member {member} is defined on a different mesh")]
    MeshMismatch { member: usize },
    #[error("threshold t = {0} is outside (0, 1]")]
    Domain(f64),
}

/// `m ≥ 1` tensor fields over one shared mesh.
#[derive(Debug, Clone)]
pub struct Ensemble {
    mesh: Arc<TetMesh>,
    members: Vec<Vec<SymTensor3>>,
}

impl Ensemble {
    pub fn new(mesh: Arc<TetMesh>, members: Vec<Vec<SymTensor3>>) -> Result<Self, StatsError> {
        if members.is_empty() {
            return Err(StatsError::Empty);
        }
        let n = mesh.point_count();
        if let Some((i, m)) = members.iter().enumerate().find(|(_, m)| m.len() != n) {
            return Err(StatsError::MemberLength {
                member: i,
                expected: n,
                got: m.len(),
            });
        }
        Ok(Self { mesh, members })
    }

    /// Members must share the mesh: the same allocation or equal topology
    /// and point positions.
    pub fn from_fields(fields: Vec<TensorField>) -> Result<Self, StatsError> {
        let first = fields.first().ok_or(StatsError::Empty)?.mesh().clone();
        for (i, f) in fields.iter().enumerate().skip(1) {
            if !Arc::ptr_eq(f.mesh(), &first) && **f.mesh() != *first {
                return Err(StatsError::MeshMismatch { member: i });
            }
        }
        let members = fields.into_iter().map(|f| f.into_tensors()).collect();
        Self::new(first, members)
    }

    pub fn mesh(&self) -> &Arc<TetMesh> {
        &self.mesh
    }

    pub fn members(&self) -> &[Vec<SymTensor3>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member_field(&self, i: usize) -> TensorField {
        TensorField::new(self.mesh.clone(), self.members[i].clone()).expect("validated length")
    }
}

/// Mean absolute mode and its sample standard deviation per vertex.
#[derive(Debug, Clone)]
pub struct ModeStats {
    pub mean_mode: ScalarField,
    pub mode_std: ScalarField,
    /// Members whose tensor was near-isotropic at each vertex.
    pub near_isotropic_count: Vec<u32>,
    pub member_count: usize,
}

impl ModeStats {
    pub fn mesh(&self) -> &Arc<TetMesh> {
        self.mean_mode.mesh()
    }
}

/// Streaming accumulation of the mean tensor and mode statistics, one member
/// at a time, so large ensembles need not be held in memory.
#[derive(Debug, Clone)]
pub struct EnsembleAccumulator {
    mesh: Arc<TetMesh>,
    count: usize,
    sum: Vec<[f64; 6]>,
    mode_mean: Vec<f64>,
    mode_m2: Vec<f64>,
    isotropic: Vec<u32>,
}

impl EnsembleAccumulator {
    pub fn new(mesh: Arc<TetMesh>) -> Self {
        let n = mesh.point_count();
        Self {
            mesh,
            count: 0,
            sum: alloc::vec![[0.0; 6]; n],
            mode_mean: alloc::vec![0.0; n],
            mode_m2: alloc::vec![0.0; n],
            isotropic: alloc::vec![0; n],
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn push(&mut self, member: &[SymTensor3]) -> Result<(), StatsError> {
        if member.len() != self.sum.len() {
            return Err(StatsError::MemberLength {
                member: self.count,
                expected: self.sum.len(),
                got: member.len(),
            });
        }
        let modes: Vec<(f64, bool)> = par_map_collect!(0..member.len(), |v: usize| {
            let m = member[v].mode_abs();
            (m.value, m.near_isotropic)
        });
        self.count += 1;
        let k = self.count as f64;
        for (v, t) in member.iter().enumerate() {
            for (s, c) in self.sum[v].iter_mut().zip(t.components()) {
                *s += c;
            }
            let (x, iso) = modes[v];
            if iso {
                self.isotropic[v] += 1;
            }
            // Welford update
            let delta = x - self.mode_mean[v];
            self.mode_mean[v] += delta / k;
            self.mode_m2[v] += delta * (x - self.mode_mean[v]);
        }
        Ok(())
    }

    pub fn mean_field(&self) -> Result<TensorField, StatsError> {
        if self.count == 0 {
            return Err(StatsError::Empty);
        }
        let m = self.count as f64;
        let tensors = self
            .sum
            .iter()
            .map(|s| SymTensor3::from_components(s.map(|c| c / m)))
            .collect();
        Ok(TensorField::new(self.mesh.clone(), tensors).expect("accumulator length"))
    }

    pub fn mode_stats(&self) -> Result<ModeStats, StatsError> {
        if self.count == 0 {
            return Err(StatsError::Empty);
        }
        let std: Vec<f64> = if self.count == 1 {
            alloc::vec![0.0; self.mode_m2.len()]
        } else {
            let d = (self.count - 1) as f64;
            self.mode_m2.iter().map(|m2| libm::sqrt(m2.max(0.0) / d)).collect()
        };
        let mean: Vec<f64> = self.mode_mean.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Ok(ModeStats {
            mean_mode: ScalarField::new(self.mesh.clone(), mean).expect("accumulator length"),
            mode_std: ScalarField::new(self.mesh.clone(), std).expect("accumulator length"),
            near_isotropic_count: self.isotropic.clone(),
            member_count: self.count,
        })
    }
}

/// Component-wise arithmetic mean of the members.
pub fn mean_tensor_field(ens: &Ensemble) -> TensorField {
    let m = ens.len() as f64;
    let members = ens.members();
    let tensors = par_map_collect!(0..ens.mesh.point_count(), |v: usize| {
        let mut s = [0.0; 6];
        for member in members {
            for (a, c) in s.iter_mut().zip(member[v].components()) {
                *a += c;
            }
        }
        SymTensor3::from_components(s.map(|c| c / m))
    });
    TensorField::new(ens.mesh.clone(), tensors).expect("ensemble length")
}

/// Mean of `|mode|` over members and its sample (`m - 1`) standard deviation.
/// Near-isotropic members contribute 0 and are counted.
pub fn mode_stats(ens: &Ensemble) -> ModeStats {
    let m = ens.len();
    let members = ens.members();
    let per_vertex: Vec<(f64, f64, u32)> = par_map_collect!(0..ens.mesh.point_count(), |v: usize| {
        let mut mean = 0.0;
        let mut m2 = 0.0;
        let mut iso = 0u32;
        for (k, member) in members.iter().enumerate() {
            let md = member[v].mode_abs();
            if md.near_isotropic {
                iso += 1;
            }
            let delta = md.value - mean;
            mean += delta / (k + 1) as f64;
            m2 += delta * (md.value - mean);
        }
        let std = if m > 1 {
            libm::sqrt(m2.max(0.0) / (m - 1) as f64)
        } else {
            0.0
        };
        (mean.clamp(0.0, 1.0), std, iso)
    });
    let mesh = ens.mesh.clone();
    ModeStats {
        mean_mode: ScalarField::new(mesh.clone(), per_vertex.iter().map(|p| p.0).collect()).expect("length"),
        mode_std: ScalarField::new(mesh, per_vertex.iter().map(|p| p.1).collect()).expect("length"),
        near_isotropic_count: per_vertex.iter().map(|p| p.2).collect(),
        member_count: m,
    }
}

/// `|mode|` of the mean tensor at each vertex.
pub fn mode_of_mean_field(ens: &Ensemble) -> ScalarField {
    abs_mode_field(&mean_tensor_field(ens))
}

/// `|mode|` of a tensor field at each vertex (0 where near-isotropic).
pub fn abs_mode_field(field: &TensorField) -> ScalarField {
    let ts = field.tensors();
    let values = par_map_collect!(0..ts.len(), |v: usize| ts[v].mode_abs().value);
    ScalarField::new(field.mesh().clone(), values).expect("field length")
}

/// Per-vertex probability that the mode is at least `t`, under a normal
/// model with the ensemble's mean mode and sample standard deviation.
pub fn probability_field(stats: &ModeStats, t: f64) -> Result<ScalarField, StatsError> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(StatsError::Domain(t));
    }
    let mean = stats.mean_mode.values();
    let std = stats.mode_std.values();
    let values = par_map_collect!(0..mean.len(), |v: usize| normal_exceedance(mean[v], std[v], t));
    Ok(ScalarField::new(stats.mesh().clone(), values).expect("stats length"))
}
