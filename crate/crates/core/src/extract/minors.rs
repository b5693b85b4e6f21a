//! The discriminant minors over a simplex (edge or triangle) on which the
//! deviator varies linearly: Bernstein bounds for pruning and damped
//! Gauss-Newton refinement of their common zeros.

use crate::tensor::{discriminant_minors, gram_minor, weighted, SymTensor3, MINOR_COLUMNS};

pub(crate) const N_MINORS: usize = 19;

/// Cubic multi-indices over three corners.
const CUBIC: [[usize; 3]; 10] = [
    [3, 0, 0],
    [2, 1, 0],
    [2, 0, 1],
    [1, 2, 0],
    [1, 1, 1],
    [1, 0, 2],
    [0, 3, 0],
    [0, 2, 1],
    [0, 1, 2],
    [0, 0, 3],
];

/// Positions in `CUBIC` of the multi-indices that only involve corners 0 and 1.
const EDGE_CUBIC: [usize; 4] = [0, 1, 3, 6];

fn quad_index(b: [usize; 3]) -> usize {
    match b {
        [2, 0, 0] => 0,
        [1, 1, 0] => 1,
        [1, 0, 1] => 2,
        [0, 2, 0] => 3,
        [0, 1, 1] => 4,
        _ => 5,
    }
}

/// Weighted rows of `A` at the corners and of `A²` at the quadratic control
/// points.
fn control_rows(c: &[SymTensor3; 3]) -> ([[f64; 6]; 3], [[f64; 6]; 6]) {
    let r1 = [weighted(&c[0]), weighted(&c[1]), weighted(&c[2])];
    let r2 = [
        weighted(&c[0].square()),
        weighted(&c[0].sym_product(&c[1])),
        weighted(&c[0].sym_product(&c[2])),
        weighted(&c[1].square()),
        weighted(&c[1].sym_product(&c[2])),
        weighted(&c[2].square()),
    ];
    (r1, r2)
}

fn coefficient(cols: &[usize; 3], g: [usize; 3], r1: &[[f64; 6]; 3], r2: &[[f64; 6]; 6]) -> f64 {
    let mut c = 0.0;
    for i in 0..3 {
        if g[i] > 0 {
            let mut b = g;
            b[i] -= 1;
            c += g[i] as f64 / 3.0 * gram_minor(cols, &r1[i], &r2[quad_index(b)]);
        }
    }
    c
}

/// True if some minor keeps a strict sign (beyond `tol`) over the triangle
/// with the given corner deviators, so the discriminant cannot vanish there.
pub(crate) fn triangle_excludes_root(c: &[SymTensor3; 3], tol: f64) -> bool {
    let (r1, r2) = control_rows(c);
    MINOR_COLUMNS.iter().any(|cols| {
        let mut pos = true;
        let mut neg = true;
        for g in CUBIC {
            let v = coefficient(cols, g, &r1, &r2);
            pos &= v > tol;
            neg &= v < -tol;
            if !pos && !neg {
                return false;
            }
        }
        true
    })
}

/// Edge version of [`triangle_excludes_root`].
pub(crate) fn segment_excludes_root(a: &SymTensor3, b: &SymTensor3, tol: f64) -> bool {
    let (r1, r2) = control_rows(&[*a, *b, *b]);
    MINOR_COLUMNS.iter().any(|cols| {
        let mut pos = true;
        let mut neg = true;
        for gi in EDGE_CUBIC {
            let v = coefficient(cols, CUBIC[gi], &r1, &r2);
            pos &= v > tol;
            neg &= v < -tol;
            if !pos && !neg {
                return false;
            }
        }
        true
    })
}

/// Sum of squared minors of a traceless tensor.
pub(crate) fn minor_energy(a: &SymTensor3) -> f64 {
    discriminant_minors(a).iter().map(|m| m * m).sum()
}

/// Discriminant of a deviator divided by `‖A‖⁶`, i.e. `(1 - mode²)/2`.
pub(crate) fn relative_discriminant(a: &SymTensor3) -> f64 {
    let n = a.frobenius_norm();
    if n == 0.0 {
        return 0.0;
    }
    minor_energy(&(*a * (1.0 / n)))
}

/// Affine family `A(p) = base + Σ p_k · dirs[k]` with one or two parameters.
pub(crate) struct AffineDeviator<'a> {
    pub base: SymTensor3,
    pub dirs: &'a [SymTensor3],
}

impl AffineDeviator<'_> {
    pub fn at(&self, p: &[f64; 2]) -> SymTensor3 {
        let mut a = self.base;
        for (k, d) in self.dirs.iter().enumerate() {
            a += *d * p[k];
        }
        a
    }

    fn residual_and_jacobian(&self, p: &[f64; 2]) -> ([f64; N_MINORS], [[f64; N_MINORS]; 2]) {
        let a = self.at(p);
        let r1 = weighted(&a);
        let r2 = weighted(&a.square());
        let mut res = [0.0; N_MINORS];
        let mut jac = [[0.0; N_MINORS]; 2];
        for (k, cols) in MINOR_COLUMNS.iter().enumerate() {
            res[k] = gram_minor(cols, &r1, &r2);
        }
        for (j, d) in self.dirs.iter().enumerate() {
            let w = weighted(d);
            let dsq = weighted(&(a.sym_product(d) * 2.0));
            for (k, cols) in MINOR_COLUMNS.iter().enumerate() {
                jac[j][k] = gram_minor(cols, &w, &r2) + gram_minor(cols, &r1, &dsq);
            }
        }
        (res, jac)
    }

    pub fn energy(&self, p: &[f64; 2]) -> f64 {
        minor_energy(&self.at(p))
    }

    /// Levenberg-Marquardt descent on the minors from `start`. Returns the
    /// final parameters and energy. Stops early once the iterate leaves the
    /// region `|p_k| ≤ bound`.
    pub fn refine(&self, start: [f64; 2], bound: f64) -> ([f64; 2], f64) {
        let n = self.dirs.len();
        let mut p = start;
        let mut e = self.energy(&p);
        let mut mu = 1e-3;
        for _ in 0..80 {
            if e == 0.0 {
                break;
            }
            let (r, j) = self.residual_and_jacobian(&p);
            let mut h = [[0.0; 2]; 2];
            let mut g = [0.0; 2];
            for a in 0..n {
                g[a] = (0..N_MINORS).map(|k| j[a][k] * r[k]).sum();
                for b in 0..n {
                    h[a][b] = (0..N_MINORS).map(|k| j[a][k] * j[b][k]).sum();
                }
            }
            let step = loop {
                let mut m = h;
                for (a, row) in m.iter_mut().enumerate().take(n) {
                    row[a] += mu * (h[a][a] + 1e-300);
                }
                let d = solve(&m, &g, n);
                let mut q = p;
                for a in 0..n {
                    q[a] -= d[a];
                }
                let eq = self.energy(&q);
                if eq < e {
                    mu = (mu * 0.2).max(1e-12);
                    break Some((q, eq, d));
                }
                mu *= 10.0;
                if mu > 1e12 {
                    break None;
                }
            };
            let Some((q, eq, d)) = step else { break };
            p = q;
            e = eq;
            if p[..n].iter().any(|v| v.abs() > bound) {
                break;
            }
            let dn = libm::sqrt(d[0] * d[0] + d[1] * d[1]);
            if dn <= 1e-15 {
                break;
            }
        }
        (p, e)
    }
}

fn solve(m: &[[f64; 2]; 2], g: &[f64; 2], n: usize) -> [f64; 2] {
    if n == 1 {
        return [if m[0][0] != 0.0 { g[0] / m[0][0] } else { 0.0 }, 0.0];
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det == 0.0 || !det.is_finite() {
        return [0.0, 0.0];
    }
    [
        (g[0] * m[1][1] - g[1] * m[0][1]) / det,
        (m[0][0] * g[1] - m[1][0] * g[0]) / det,
    ]
}
