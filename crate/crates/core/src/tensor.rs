//! Symmetric 3x3 tensors and their invariants.

use core::ops::{Add, AddAssign, Mul, Sub};

use crate::vec3::Vec3;

/// A symmetric 3x3 tensor stored as its six independent components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor3 {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub xz: f64,
    pub yz: f64,
}

/// Relative deviator-norm threshold below which the mode is undefined.
pub const NEAR_ISOTROPIC_REL: f64 = 1e-12;

/// Tensor mode together with the near-isotropic flag.
///
/// When `near_isotropic` is set the mode is undefined and `value` holds the
/// policy value 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub value: f64,
    pub near_isotropic: bool,
}

impl Mode {
    pub fn abs(self) -> Mode {
        Mode {
            value: self.value.abs(),
            near_isotropic: self.near_isotropic,
        }
    }
}

/// Eigenvalues sorted descending with matching unit eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
}

impl EigenSystem {
    pub fn values(&self) -> [f64; 3] {
        [self.lambda1, self.lambda2, self.lambda3]
    }

    pub fn vectors(&self) -> [Vec3; 3] {
        [self.e1, self.e2, self.e3]
    }
}

/// Component order used for the flat `[f64; 6]` view: xx, yy, zz, xy, xz, yz.
pub const COMPONENT_NAMES: [&str; 6] = ["xx", "yy", "zz", "xy", "xz", "yz"];

const SQRT_2: f64 = core::f64::consts::SQRT_2;
const SQRT_6: f64 = 2.449_489_742_783_178;

impl SymTensor3 {
    pub const ZERO: SymTensor3 = SymTensor3::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    pub const IDENTITY: SymTensor3 = SymTensor3::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0);

    pub const fn new(xx: f64, yy: f64, zz: f64, xy: f64, xz: f64, yz: f64) -> Self {
        Self {
            xx,
            yy,
            zz,
            xy,
            xz,
            yz,
        }
    }

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        Self::new(a, b, c, 0.0, 0.0, 0.0)
    }

    /// Symmetric part `(M + Mᵀ)/2` of a full matrix.
    pub fn from_matrix(m: &[[f64; 3]; 3]) -> Self {
        Self::new(
            m[0][0],
            m[1][1],
            m[2][2],
            0.5 * (m[0][1] + m[1][0]),
            0.5 * (m[0][2] + m[2][0]),
            0.5 * (m[1][2] + m[2][1]),
        )
    }

    pub fn to_matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.xx, self.xy, self.xz],
            [self.xy, self.yy, self.yz],
            [self.xz, self.yz, self.zz],
        ]
    }

    pub fn from_components(c: [f64; 6]) -> Self {
        Self::new(c[0], c[1], c[2], c[3], c[4], c[5])
    }

    pub fn components(&self) -> [f64; 6] {
        [self.xx, self.yy, self.zz, self.xy, self.xz, self.yz]
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    pub fn determinant(&self) -> f64 {
        self.xx * (self.yy * self.zz - self.yz * self.yz)
            - self.xy * (self.xy * self.zz - self.yz * self.xz)
            + self.xz * (self.xy * self.yz - self.yy * self.xz)
    }

    pub fn frobenius_norm_squared(&self) -> f64 {
        self.xx * self.xx
            + self.yy * self.yy
            + self.zz * self.zz
            + 2.0 * (self.xy * self.xy + self.xz * self.xz + self.yz * self.yz)
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.frobenius_norm_squared())
    }

    /// Traceless part `T - tr(T)/3 · I`.
    pub fn deviator(&self) -> SymTensor3 {
        let m = self.trace() / 3.0;
        SymTensor3::new(
            self.xx - m,
            self.yy - m,
            self.zz - m,
            self.xy,
            self.xz,
            self.yz,
        )
    }

    /// `T · T`, which is again symmetric.
    pub fn square(&self) -> SymTensor3 {
        self.sym_product(self)
    }

    /// Symmetrized product `(A·B + B·A)/2`.
    pub fn sym_product(&self, o: &SymTensor3) -> SymTensor3 {
        let a = self.to_matrix();
        let b = o.to_matrix();
        let mut ab = [[0.0; 3]; 3];
        for (i, row) in ab.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        SymTensor3::from_matrix(&ab)
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.xx * v.x + self.xy * v.y + self.xz * v.z,
            self.xy * v.x + self.yy * v.y + self.yz * v.z,
            self.xz * v.x + self.yz * v.y + self.zz * v.z,
        )
    }

    /// Similarity transform `R · T · Rᵀ`.
    pub fn rotated(&self, r: &[[f64; 3]; 3]) -> SymTensor3 {
        let t = self.to_matrix();
        let mut rt = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                rt[i][j] = (0..3).map(|k| r[i][k] * t[k][j]).sum();
            }
        }
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| rt[i][k] * r[j][k]).sum();
            }
        }
        SymTensor3::from_matrix(&out)
    }

    /// Outer product `v · vᵀ`.
    pub fn outer(v: Vec3) -> SymTensor3 {
        SymTensor3::new(v.x * v.x, v.y * v.y, v.z * v.z, v.x * v.y, v.x * v.z, v.y * v.z)
    }

    pub fn max_abs_diff(&self, o: &SymTensor3) -> f64 {
        self.components()
            .iter()
            .zip(o.components().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Tensor mode `3√6 · det(A / ‖A‖)` of the deviator `A`, clamped to [-1, 1].
    pub fn mode(&self) -> Mode {
        let dev = self.deviator();
        let n = dev.frobenius_norm();
        let threshold = NEAR_ISOTROPIC_REL * self.frobenius_norm().max(1.0);
        if !(n >= threshold) || n == 0.0 {
            return Mode {
                value: 0.0,
                near_isotropic: true,
            };
        }
        let unit = dev * (1.0 / n);
        let value = (3.0 * SQRT_6 * unit.determinant()).clamp(-1.0, 1.0);
        Mode {
            value,
            near_isotropic: false,
        }
    }

    /// `|mode(T)|` in [0, 1].
    pub fn mode_abs(&self) -> Mode {
        self.mode().abs()
    }

    /// Product of squared eigenvalue differences; zero iff `T` is degenerate.
    ///
    /// Evaluated as a sum of squared 3x3 minors of the matrix whose rows are
    /// `I`, `A` and `A²` (A the deviator), which stays accurate near zero
    /// where the `4J2³ - 27J3²` form cancels catastrophically.
    pub fn discriminant(&self) -> f64 {
        discriminant_minors(&self.deviator())
            .iter()
            .map(|m| m * m)
            .sum()
    }

    /// Eigen-decomposition with eigenvalues sorted descending.
    ///
    /// Uses the trigonometric solution of the characteristic cubic and
    /// cross-product eigenvectors; falls back to cyclic Jacobi rotations when
    /// two eigenvalues are too close for the cross products to be reliable.
    pub fn eigen(&self) -> EigenSystem {
        let scale = self.frobenius_norm();
        if scale == 0.0 || !scale.is_finite() {
            return EigenSystem {
                lambda1: 0.0,
                lambda2: 0.0,
                lambda3: 0.0,
                e1: Vec3::X,
                e2: Vec3::Y,
                e3: Vec3::Z,
            };
        }
        if self.xy == 0.0 && self.xz == 0.0 && self.yz == 0.0 {
            let mut pairs = [(self.xx, Vec3::X), (self.yy, Vec3::Y), (self.zz, Vec3::Z)];
            pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
            return EigenSystem {
                lambda1: pairs[0].0,
                lambda2: pairs[1].0,
                lambda3: pairs[2].0,
                e1: pairs[0].1,
                e2: pairs[1].1,
                e3: pairs[2].1,
            };
        }
        let lambdas = closed_form_eigenvalues(self);
        let dev_norm = self.deviator().frobenius_norm();
        let min_gap = (lambdas[0] - lambdas[1]).min(lambdas[1] - lambdas[2]);
        if dev_norm <= NEAR_ISOTROPIC_REL * scale || min_gap < EIGEN_FALLBACK_GAP * dev_norm {
            return jacobi_eigen(self);
        }
        let mut vecs = [Vec3::ZERO; 3];
        for (v, &l) in vecs.iter_mut().zip(lambdas.iter()) {
            match null_vector(&(*self - SymTensor3::IDENTITY * l)) {
                Some(n) => *v = n,
                None => return jacobi_eigen(self),
            }
        }
        // Re-orthogonalize against rounding in the cross products.
        let e1 = vecs[0];
        let e2 = match (vecs[1] - e1 * e1.dot(vecs[1])).try_normalize() {
            Some(v) => v,
            None => return jacobi_eigen(self),
        };
        let mut e3 = e1.cross(e2);
        if e3.dot(vecs[2]) < 0.0 {
            e3 = -e3;
        }
        EigenSystem {
            lambda1: lambdas[0],
            lambda2: lambdas[1],
            lambda3: lambdas[2],
            e1: canonical_sign(e1),
            e2: canonical_sign(e2),
            e3: canonical_sign(e3),
        }
    }
}

/// Relative eigenvalue gap (w.r.t. the deviator norm) below which the
/// decomposition switches from the closed form to Jacobi rotations.
const EIGEN_FALLBACK_GAP: f64 = 1e-4;

fn closed_form_eigenvalues(t: &SymTensor3) -> [f64; 3] {
    let q = t.trace() / 3.0;
    let dev = t.deviator();
    let p = libm::sqrt(dev.frobenius_norm_squared() / 6.0);
    if p == 0.0 {
        return [q, q, q];
    }
    let b = dev * (1.0 / p);
    let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
    let phi = libm::acos(r) / 3.0;
    let l1 = q + 2.0 * p * libm::cos(phi);
    let l3 = q + 2.0 * p * libm::cos(phi + 2.0 * core::f64::consts::PI / 3.0);
    let l2 = 3.0 * q - l1 - l3;
    let mut l = [l1, l2, l3];
    l.sort_by(|a, b| b.total_cmp(a));
    l
}

/// Unit vector spanning the null space of a rank-2 symmetric matrix, taken
/// from the largest cross product of its rows.
fn null_vector(m: &SymTensor3) -> Option<Vec3> {
    let mat = m.to_matrix();
    let r0 = Vec3::from_array(mat[0]);
    let r1 = Vec3::from_array(mat[1]);
    let r2 = Vec3::from_array(mat[2]);
    let candidates = [r0.cross(r1), r1.cross(r2), r2.cross(r0)];
    let best = candidates
        .iter()
        .copied()
        .max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))?;
    best.try_normalize()
}

/// First component with magnitude above 1e-12 is made nonnegative.
fn canonical_sign(v: Vec3) -> Vec3 {
    for i in 0..3 {
        if v[i].abs() > 1e-12 {
            return if v[i] < 0.0 { -v } else { v };
        }
    }
    v
}

fn jacobi_eigen(t: &SymTensor3) -> EigenSystem {
    let mut a = t.to_matrix();
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let scale = t.frobenius_norm();
    for _sweep in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off <= (1e-17 * scale) * (1e-17 * scale) || off == 0.0 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == 0.0 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
            let tn = sign / (theta.abs() + libm::sqrt(theta * theta + 1.0));
            let c = 1.0 / libm::sqrt(tn * tn + 1.0);
            let s = tn * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let vkp = row[p];
                let vkq = row[q];
                row[p] = c * vkp - s * vkq;
                row[q] = s * vkp + c * vkq;
            }
        }
    }
    let mut pairs = [
        (a[0][0], Vec3::new(v[0][0], v[1][0], v[2][0])),
        (a[1][1], Vec3::new(v[0][1], v[1][1], v[2][1])),
        (a[2][2], Vec3::new(v[0][2], v[1][2], v[2][2])),
    ];
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    EigenSystem {
        lambda1: pairs[0].0,
        lambda2: pairs[1].0,
        lambda3: pairs[2].0,
        e1: canonical_sign(pairs[0].1),
        e2: canonical_sign(pairs[1].1),
        e3: canonical_sign(pairs[2].1),
    }
}

/// Column weights turning the 6-component view into the Frobenius inner product.
const GRAM_WEIGHTS: [f64; 6] = [1.0, 1.0, 1.0, SQRT_2, SQRT_2, SQRT_2];
const IDENTITY_ROW: [f64; 6] = [1.0, 1.0, 1.0, 0.0, 0.0, 0.0];

/// Column triples of the 3x6 Gram factor with a nonzero identity row
/// (the all-off-diagonal triple {3, 4, 5} vanishes identically).
pub(crate) const MINOR_COLUMNS: [[usize; 3]; 19] = {
    let mut out = [[0usize; 3]; 19];
    let mut n = 0;
    let mut i = 0;
    while i < 6 {
        let mut j = i + 1;
        while j < 6 {
            let mut k = j + 1;
            while k < 6 {
                if i < 3 {
                    out[n] = [i, j, k];
                    n += 1;
                }
                k += 1;
            }
            j += 1;
        }
        i += 1;
    }
    out
};

pub(crate) fn weighted(t: &SymTensor3) -> [f64; 6] {
    let c = t.components();
    [
        c[0] * GRAM_WEIGHTS[0],
        c[1] * GRAM_WEIGHTS[1],
        c[2] * GRAM_WEIGHTS[2],
        c[3] * GRAM_WEIGHTS[3],
        c[4] * GRAM_WEIGHTS[4],
        c[5] * GRAM_WEIGHTS[5],
    ]
}

/// Determinant of the 3x3 matrix formed by rows `I`, `r1`, `r2` restricted to
/// the given columns.
#[inline]
pub(crate) fn gram_minor(cols: &[usize; 3], r1: &[f64; 6], r2: &[f64; 6]) -> f64 {
    let [i, j, k] = *cols;
    let r0 = &IDENTITY_ROW;
    r0[i] * (r1[j] * r2[k] - r1[k] * r2[j]) - r0[j] * (r1[i] * r2[k] - r1[k] * r2[i])
        + r0[k] * (r1[i] * r2[j] - r1[j] * r2[i])
}

/// The 19 minors whose squares sum to the discriminant of `a`.
///
/// With `M = [vec I; vec A; vec A²]` (Frobenius-weighted), `M·Mᵀ` is the
/// Hankel matrix of power sums, whose determinant is the squared Vandermonde
/// determinant of the eigenvalues; Cauchy-Binet splits it into these minors.
pub(crate) fn discriminant_minors(a: &SymTensor3) -> [f64; 19] {
    let r1 = weighted(a);
    let r2 = weighted(&a.square());
    let mut out = [0.0; 19];
    for (o, cols) in out.iter_mut().zip(MINOR_COLUMNS.iter()) {
        *o = gram_minor(cols, &r1, &r2);
    }
    out
}

impl Add for SymTensor3 {
    type Output = SymTensor3;
    fn add(self, o: SymTensor3) -> SymTensor3 {
        SymTensor3::new(
            self.xx + o.xx,
            self.yy + o.yy,
            self.zz + o.zz,
            self.xy + o.xy,
            self.xz + o.xz,
            self.yz + o.yz,
        )
    }
}

impl AddAssign for SymTensor3 {
    fn add_assign(&mut self, o: SymTensor3) {
        *self = *self + o;
    }
}

impl Sub for SymTensor3 {
    type Output = SymTensor3;
    fn sub(self, o: SymTensor3) -> SymTensor3 {
        SymTensor3::new(
            self.xx - o.xx,
            self.yy - o.yy,
            self.zz - o.zz,
            self.xy - o.xy,
            self.xz - o.xz,
            self.yz - o.yz,
        )
    }
}

impl Mul<f64> for SymTensor3 {
    type Output = SymTensor3;
    fn mul(self, s: f64) -> SymTensor3 {
        SymTensor3::new(
            self.xx * s,
            self.yy * s,
            self.zz * s,
            self.xy * s,
            self.xz * s,
            self.yz * s,
        )
    }
}
