//! Synthetic linear tensor fields and the ensembles built from them.
//!
//! A linear field is `T(x, y, z) = x·Tx + y·Ty + z·Tz + T0`. With the default
//! coefficients it is degenerate (planar, λ1 = λ2) exactly on the line
//! `x = 1, y = 1` and non-degenerate everywhere else.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::mesh::TetMesh;
use crate::par::par_map_collect;
use crate::stats::Ensemble;
use crate::tensor::SymTensor3;
use crate::vec3::Vec3;

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain {
    pub min: Vec3,
    pub max: Vec3,
}

impl BoxDomain {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    pub fn unit() -> Self {
        Self::new(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0))
    }

    pub fn volume(&self) -> f64 {
        let e = self.max - self.min;
        e.x * e.y * e.z
    }

    pub fn is_valid(&self) -> bool {
        let e = self.max - self.min;
        e.x > 0.0 && e.y > 0.0 && e.z > 0.0 && e.x.is_finite() && e.y.is_finite() && e.z.is_finite()
    }
}

impl Default for BoxDomain {
    /// `[0, 2]³`
    fn default() -> Self {
        Self::new(Vec3::ZERO, Vec3::new(2.0, 2.0, 2.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SyntheticError {
    #[error("resolution must be at least 2 points per axis, got {0}")]
    Resolution(usize),
    #[error("domain box is degenerate")]
    Domain,
    #[error("member count must be at least 1")]
    MemberCount,
    #[error("noise sigma must be finite and nonnegative, got {0}")]
    Sigma(f64),
}

/// Coefficients, domain and sampling resolution of a linear test field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFieldSpec {
    pub tx: SymTensor3,
    pub ty: SymTensor3,
    pub tz: SymTensor3,
    pub t0: SymTensor3,
    pub domain: BoxDomain,
    pub resolution: usize,
}

impl LinearFieldSpec {
    /// The reference coefficients on `[0, 2]³` at `resolution` points per axis.
    pub fn reference(resolution: usize) -> Self {
        Self {
            tx: SymTensor3::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0),
            ty: SymTensor3::new(0.0, 2.0, 0.0, -1.0, 0.0, 0.0),
            tz: SymTensor3::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0),
            t0: SymTensor3::diag(7.0, 6.0, 1.0),
            domain: BoxDomain::default(),
            resolution,
        }
    }

    pub fn validate(&self) -> Result<(), SyntheticError> {
        if self.resolution < 2 {
            return Err(SyntheticError::Resolution(self.resolution));
        }
        if !self.domain.is_valid() {
            return Err(SyntheticError::Domain);
        }
        Ok(())
    }
}

/// Per-member translation and rotation about the degenerate line.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MemberTransform {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub theta: f64,
}

impl MemberTransform {
    /// Coordinate at which the base field is evaluated for this member.
    ///
    /// Rotation by `theta` about the vertical axis through the pivot
    /// `(1 + dx, 1 + dy)` (translate, rotate, translate back), followed by the
    /// translation `(x, y, z) → (x - dx, y - dy, z - dz)`.
    pub fn base_coordinates(&self, p: Vec3) -> Vec3 {
        let r = self.rotate_about_pivot(p);
        Vec3::new(r.x - self.dx, r.y - self.dy, r.z - self.dz)
    }

    /// The three-matrix affine product alone, without the final translation.
    pub fn rotate_about_pivot(&self, p: Vec3) -> Vec3 {
        let (s, c) = libm::sincos(self.theta);
        let px = 1.0 + self.dx;
        let py = 1.0 + self.dy;
        let (x, y) = (p.x - px, p.y - py);
        Vec3::new(c * x + s * y + px, -s * x + c * y + py, p.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

/// Uniform `n³`-point grid over the box; each of the `(n-1)³` cubes is split
/// into five tets, with the split mirrored on alternating cubes so shared
/// faces carry the same diagonal.
pub fn build_box_mesh(domain: &BoxDomain, n: usize) -> TetMesh {
    assert!(n >= 2, "box mesh needs at least 2 points per axis");
    let coord = |lo: f64, hi: f64, i: usize| {
        if i == n - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    let mut points = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                points.push(Vec3::new(
                    coord(domain.min.x, domain.max.x, i),
                    coord(domain.min.y, domain.max.y, j),
                    coord(domain.min.z, domain.max.z, k),
                ));
            }
        }
    }
    let idx = |i: usize, j: usize, k: usize| i + n * (j + n * k);
    let c = n - 1;
    let mut tets = Vec::with_capacity(5 * c * c * c);
    for k in 0..c {
        for j in 0..c {
            for i in 0..c {
                let v = |a: usize, b: usize, d: usize| idx(i + a, j + b, k + d);
                // corners with odd coordinate sum head the corner tets when
                // the cube parity is even, and vice versa
                let even = (i + j + k) % 2 == 0;
                let (center, corners) = if even {
                    (
                        [v(0, 0, 0), v(1, 1, 0), v(1, 0, 1), v(0, 1, 1)],
                        [
                            [v(1, 0, 0), v(0, 0, 0), v(1, 1, 0), v(1, 0, 1)],
                            [v(0, 1, 0), v(0, 0, 0), v(1, 1, 0), v(0, 1, 1)],
                            [v(0, 0, 1), v(0, 0, 0), v(1, 0, 1), v(0, 1, 1)],
                            [v(1, 1, 1), v(1, 1, 0), v(1, 0, 1), v(0, 1, 1)],
                        ],
                    )
                } else {
                    (
                        [v(1, 0, 0), v(0, 1, 0), v(0, 0, 1), v(1, 1, 1)],
                        [
                            [v(0, 0, 0), v(1, 0, 0), v(0, 1, 0), v(0, 0, 1)],
                            [v(1, 1, 0), v(1, 0, 0), v(0, 1, 0), v(1, 1, 1)],
                            [v(1, 0, 1), v(1, 0, 0), v(0, 0, 1), v(1, 1, 1)],
                            [v(0, 1, 1), v(0, 1, 0), v(0, 0, 1), v(1, 1, 1)],
                        ],
                    )
                };
                tets.push(center);
                tets.extend_from_slice(&corners);
            }
        }
    }
    TetMesh::new(points, tets).expect("box mesh construction is valid by design")
}

/// `x·Tx + y·Ty + z·Tz + T0`.
pub fn eval_linear(spec: &LinearFieldSpec, x: f64, y: f64, z: f64) -> SymTensor3 {
    spec.tx * x + spec.ty * y + spec.tz * z + spec.t0
}

/// Base field evaluated at the member's transformed coordinate. Tensor
/// components are not re-oriented.
pub fn eval_member(spec: &LinearFieldSpec, transform: &MemberTransform, x: f64, y: f64, z: f64) -> SymTensor3 {
    let q = transform.base_coordinates(Vec3::new(x, y, z));
    eval_linear(spec, q.x, q.y, q.z)
}

/// Evenly spaced parameters with inclusive endpoints; a single member takes
/// the midpoint.
pub fn even_samples(range: (f64, f64), m: usize) -> Vec<f64> {
    match m {
        0 => Vec::new(),
        1 => alloc::vec![0.5 * (range.0 + range.1)],
        _ => (0..m)
            .map(|i| {
                if i == m - 1 {
                    range.1
                } else {
                    range.0 + (range.1 - range.0) * i as f64 / (m - 1) as f64
                }
            })
            .collect(),
    }
}

/// Member transforms pairing the i-th translation with the i-th angle.
pub fn trans_rot_transforms(m: usize, dx_range: (f64, f64), theta_range: (f64, f64)) -> Vec<MemberTransform> {
    even_samples(dx_range, m)
        .into_iter()
        .zip(even_samples(theta_range, m))
        .map(|(dx, theta)| MemberTransform {
            dx,
            theta,
            ..MemberTransform::default()
        })
        .collect()
}

/// Member field sampled at the mesh vertices.
pub fn sample_member(spec: &LinearFieldSpec, transform: &MemberTransform, mesh: &TetMesh) -> Vec<SymTensor3> {
    mesh.points()
        .iter()
        .map(|p| eval_member(spec, transform, p.x, p.y, p.z))
        .collect()
}

/// Base field sampled at the mesh vertices.
pub fn sample_base(spec: &LinearFieldSpec, mesh: &TetMesh) -> Vec<SymTensor3> {
    mesh.points()
        .iter()
        .map(|p| eval_linear(spec, p.x, p.y, p.z))
        .collect()
}

pub fn gen_trans_rot_ensemble(
    spec: &LinearFieldSpec,
    m: usize,
    dx_range: (f64, f64),
    theta_range: (f64, f64),
) -> Result<Ensemble, SyntheticError> {
    spec.validate()?;
    if m == 0 {
        return Err(SyntheticError::MemberCount);
    }
    let mesh = Arc::new(build_box_mesh(&spec.domain, spec.resolution));
    let members = trans_rot_transforms(m, dx_range, theta_range)
        .iter()
        .map(|tr| sample_member(spec, tr, &mesh))
        .collect();
    Ok(Ensemble::new(mesh, members).expect("members sampled on the shared mesh"))
}

/// Words of the ChaCha keystream reserved for each vertex of a member.
const WORDS_PER_VERTEX: u128 = 256;

/// Noise draws for one member: six standard-normal variates per vertex in
/// component order (xx, yy, zz, xy, xz, yz).
///
/// The stream is keyed by the seed, selected by the member index, and
/// positioned by the vertex index, so any member or vertex can be
/// regenerated independently.
pub fn noise_draws(seed: u64, member: usize, vertex: usize) -> [f64; 6] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member as u64);
    rng.set_word_pos(vertex as u128 * WORDS_PER_VERTEX);
    let mut out = [0.0; 6];
    for o in out.iter_mut() {
        *o = StandardNormal.sample(&mut rng);
    }
    out
}

/// `base + N(0, σ²)` on each independent component of every vertex.
pub fn noise_member(base: &[SymTensor3], noise: &NoiseSpec, member: usize) -> Vec<SymTensor3> {
    if noise.sigma == 0.0 {
        return base.to_vec();
    }
    par_map_collect!(0..base.len(), |v: usize| {
        let d = noise_draws(noise.seed, member, v);
        let mut c = base[v].components();
        for (ci, di) in c.iter_mut().zip(d.iter()) {
            *ci += noise.sigma * di;
        }
        SymTensor3::from_components(c)
    })
}

pub fn gen_noise_ensemble(spec: &LinearFieldSpec, m: usize, noise: &NoiseSpec) -> Result<Ensemble, SyntheticError> {
    spec.validate()?;
    if m == 0 {
        return Err(SyntheticError::MemberCount);
    }
    if !(noise.sigma >= 0.0 && noise.sigma.is_finite()) {
        return Err(SyntheticError::Sigma(noise.sigma));
    }
    let mesh = Arc::new(build_box_mesh(&spec.domain, spec.resolution));
    let base = sample_base(spec, &mesh);
    let members = (0..m).map(|i| noise_member(&base, noise, i)).collect();
    Ok(Ensemble::new(mesh, members).expect("members sampled on the shared mesh"))
}
