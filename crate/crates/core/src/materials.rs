//! Isotropic elastic tensors in the orthonormal Voigt basis
//! `(ξ₁₁, ξ₂₂, √2 ξ₁₂)`, where the 3×3 matrix is the exact Gram matrix of
//! the fourth-order tensor.

use crate::error::{invalid, Error};
use homog_numerics::{symmetric_eigen, Real};
use serde::{Deserialize, Serialize};

/// Symmetric 2×2 matrix, row-major.
pub type Sym2<T> = [[T; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticTensor<T> {
    /// First Lamé parameter λ.
    pub lame: T,
    /// Shear modulus μ.
    pub shear: T,
}

impl<T: Real> ElasticTensor<T> {
    pub fn new(lame: T, shear: T) -> Result<Self, Error> {
        if !(shear > T::zero()) {
            return Err(invalid("shear", "must be positive"));
        }
        if !(lame + shear > T::zero()) || !lame.is_finite() || !shear.is_finite() {
            return Err(invalid("lame", "need lame + shear > 0"));
        }
        Ok(Self { lame, shear })
    }

    /// `A ξ = 2μ ξ + λ tr(ξ) I`.
    pub fn apply(&self, xi: &Sym2<T>) -> Sym2<T> {
        let two = T::lit(2.0);
        let tr = xi[0][0] + xi[1][1];
        [
            [two * self.shear * xi[0][0] + self.lame * tr, two * self.shear * xi[0][1]],
            [two * self.shear * xi[1][0], two * self.shear * xi[1][1] + self.lame * tr],
        ]
    }

    /// Quadratic form `A ξ · ξ`.
    pub fn energy(&self, xi: &Sym2<T>) -> T {
        let s = self.apply(xi);
        (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| s[i][j] * xi[i][j])
            .sum()
    }

    pub fn to_voigt(&self) -> VoigtMatrix<T> {
        let (l, m) = (self.lame, self.shear);
        let two = T::lit(2.0);
        let z = T::zero();
        VoigtMatrix {
            m: [[l + two * m, l, z], [l, l + two * m, z], [z, z, two * m]],
        }
    }

    /// Inverse of [`to_voigt`](Self::to_voigt); fails unless the matrix has
    /// isotropic structure.
    pub fn from_voigt(v: &VoigtMatrix<T>) -> Result<Self, Error> {
        let m = &v.m;
        let lame = m[0][1];
        let shear = m[2][2] / T::lit(2.0);
        let scale = m.iter().flatten().fold(T::zero(), |a, x| a.max(x.abs()));
        let tol = scale * T::epsilon() * T::lit(64.0);
        let iso = (m[0][0] - m[1][1]).abs() <= tol
            && (m[0][0] - lame - T::lit(2.0) * shear).abs() <= tol
            && (m[1][0] - lame).abs() <= tol
            && [m[0][2], m[2][0], m[1][2], m[2][1]].iter().all(|x| x.abs() <= tol);
        if !iso {
            return Err(invalid("voigt", "matrix is not isotropic"));
        }
        Self::new(lame, shear)
    }

    /// Effective link stiffness `K₁ = (A⁻¹η·η)⁻¹` with `η = τ⊗τ`.
    pub fn k1(&self, tau: [T; 2]) -> Result<T, Error> {
        let n2 = tau[0] * tau[0] + tau[1] * tau[1];
        if (n2 - T::one()).abs() > T::lit(2e-12) {
            return Err(invalid("tau", "not a unit vector"));
        }
        let inv = self
            .to_voigt()
            .inverse()
            .ok_or_else(|| invalid("A1", "singular tensor"))?;
        let eta = strain_to_voigt(&[[tau[0] * tau[0], tau[0] * tau[1]], [tau[0] * tau[1], tau[1] * tau[1]]]);
        Ok(T::one() / inv.form(&eta, &eta))
    }

    /// Closed form of [`k1`](Self::k1) for isotropic tensors.
    pub fn k1_closed_form(&self) -> T {
        let (l, m) = (self.lame, self.shear);
        T::lit(4.0) * m * (l + m) / (l + T::lit(2.0) * m)
    }
}

pub fn strain_to_voigt<T: Real>(xi: &Sym2<T>) -> [T; 3] {
    [xi[0][0], xi[1][1], T::lit(std::f64::consts::SQRT_2) * xi[0][1]]
}

pub fn voigt_to_strain<T: Real>(v: &[T; 3]) -> Sym2<T> {
    let off = v[2] / T::lit(std::f64::consts::SQRT_2);
    [[v[0], off], [off, v[1]]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoigtMatrix<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Real> VoigtMatrix<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            m: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    pub fn zeros() -> Self {
        Self { m: [[T::zero(); 3]; 3] }
    }

    pub fn apply(&self, v: &[T; 3]) -> [T; 3] {
        let mut out = [T::zero(); 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|j| self.m[i][j] * v[j]).sum();
        }
        out
    }

    pub fn form(&self, a: &[T; 3], b: &[T; 3]) -> T {
        let ab = self.apply(b);
        (0..3).map(|i| a[i] * ab[i]).sum()
    }

    pub fn scaled(&self, c: T) -> Self {
        let mut out = *self;
        out.m.iter_mut().flatten().for_each(|x| *x *= c);
        out
    }

    pub fn inverse(&self) -> Option<Self> {
        let m = &self.m;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        let c00 = cof(1, 2, 1, 2);
        let c01 = -cof(1, 2, 0, 2);
        let c02 = cof(1, 2, 0, 1);
        let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
        let scale = m.iter().flatten().fold(T::zero(), |a, x| a.max(x.abs()));
        if det.abs() <= scale * scale * scale * T::epsilon() * T::lit(16.0) {
            return None;
        }
        let adj = [
            [c00, -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [c01, cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [c02, -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = adj[i][j] / det;
            }
        }
        Some(out)
    }

    pub fn asymmetry(&self) -> T {
        let m = &self.m;
        (m[0][1] - m[1][0])
            .abs()
            .max((m[0][2] - m[2][0]).abs())
            .max((m[1][2] - m[2][1]).abs())
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [T; 3] {
        let flat: Vec<T> = self.m.iter().flatten().copied().collect();
        let e = symmetric_eigen(3, &flat);
        [e.values[0], e.values[1], e.values[2]]
    }

    /// The tensor rotated by π/2: `ξ₁₁ ↔ ξ₂₂`, `ξ₁₂ → −ξ₁₂`.
    pub fn rotated_quarter(&self) -> Self {
        let p = [1usize, 0, 2];
        let sgn = |i: usize| if i == 2 { -T::one() } else { T::one() };
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = sgn(i) * sgn(j) * self.m[p[i]][p[j]];
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.m
            .iter()
            .flatten()
            .zip(other.m.iter().flatten())
            .fold(T::zero(), |a, (x, y)| a.max((*x - *y).abs()))
    }
}

/// Orthogonal map taking Voigt strains from the `(x₁, x₂)` frame to the
/// frame `(n, t)` with `t = n` turned by π/2.
fn frame_rotation(n: [f64; 2]) -> [[f64; 3]; 3] {
    let (c, s) = (n[0], n[1]);
    let r2 = std::f64::consts::SQRT_2;
    [
        [c * c, s * s, r2 * c * s],
        [s * s, c * c, -r2 * c * s],
        [-r2 * c * s, r2 * c * s, c * c - s * s],
    ]
}

/// Effective tensor of a fine laminate of `a` (volume fraction `f`) and `b`
/// with layer normal `n`: traction and tangential strain are continuous
/// across the layers.
pub fn laminate(a: &VoigtMatrix<f64>, b: &VoigtMatrix<f64>, f: f64, n: [f64; 2]) -> VoigtMatrix<f64> {
    let q = frame_rotation(n);
    let to_frame = |c: &VoigtMatrix<f64>| {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3)
                    .flat_map(|k| (0..3).map(move |l| (k, l)))
                    .map(|(k, l)| q[i][k] * c.m[k][l] * q[j][l])
                    .sum();
            }
        }
        out
    };
    // Split into the stress-continuous slots J = {nn, nt} and K = {tt}.
    const J: [usize; 2] = [0, 2];
    struct Parts {
        jj_inv: [[f64; 2]; 2],
        jj_inv_jk: [f64; 2],
        kj_jj_inv: [f64; 2],
        schur: f64,
    }
    let parts = |c: [[f64; 3]; 3]| {
        let (p, r, s) = (c[0][0], c[0][2], c[2][2]);
        let det = p * s - r * r;
        let inv = [[s / det, -r / det], [-r / det, p / det]];
        let jk = [c[0][1], c[2][1]];
        let kj = [c[1][0], c[1][2]];
        let ij = [inv[0][0] * jk[0] + inv[0][1] * jk[1], inv[1][0] * jk[0] + inv[1][1] * jk[1]];
        let ji = [kj[0] * inv[0][0] + kj[1] * inv[1][0], kj[0] * inv[0][1] + kj[1] * inv[1][1]];
        Parts {
            jj_inv: inv,
            jj_inv_jk: ij,
            kj_jj_inv: ji,
            schur: c[1][1] - (kj[0] * ij[0] + kj[1] * ij[1]),
        }
    };
    let (pa, pb) = (parts(to_frame(a)), parts(to_frame(b)));
    let mix = |x: f64, y: f64| f * x + (1.0 - f) * y;
    let h = [
        [mix(pa.jj_inv[0][0], pb.jj_inv[0][0]), mix(pa.jj_inv[0][1], pb.jj_inv[0][1])],
        [mix(pa.jj_inv[1][0], pb.jj_inv[1][0]), mix(pa.jj_inv[1][1], pb.jj_inv[1][1])],
    ];
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let hi = [[h[1][1] / det, -h[0][1] / det], [-h[1][0] / det, h[0][0] / det]];
    let g = [mix(pa.jj_inv_jk[0], pb.jj_inv_jk[0]), mix(pa.jj_inv_jk[1], pb.jj_inv_jk[1])];
    let l = [mix(pa.kj_jj_inv[0], pb.kj_jj_inv[0]), mix(pa.kj_jj_inv[1], pb.kj_jj_inv[1])];
    let schur = mix(pa.schur, pb.schur);
    // σ_J = hi (e_J + g e_K),  σ_K = l σ_J + schur e_K.
    let hig = [hi[0][0] * g[0] + hi[0][1] * g[1], hi[1][0] * g[0] + hi[1][1] * g[1]];
    let lhi = [l[0] * hi[0][0] + l[1] * hi[1][0], l[0] * hi[0][1] + l[1] * hi[1][1]];
    let mut e = [[0.0; 3]; 3];
    for (a_, &ja) in J.iter().enumerate() {
        for (b_, &jb) in J.iter().enumerate() {
            e[ja][jb] = hi[a_][b_];
        }
        e[ja][1] = hig[a_];
        e[1][ja] = lhi[a_];
    }
    e[1][1] = schur + l[0] * hig[0] + l[1] * hig[1];
    let mut out = VoigtMatrix::zeros();
    for i in 0..3 {
        for j in 0..3 {
            out.m[i][j] = (0..3)
                .flat_map(|k| (0..3).map(move |m| (k, m)))
                .map(|(k, m)| q[k][i] * e[k][m] * q[m][j])
                .sum();
        }
    }
    out
}

/// Homogenised tensor with its ellipticity constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroTensor<T> {
    pub voigt: VoigtMatrix<T>,
    /// Smallest eigenvalue of the Voigt matrix.
    pub ellipticity: T,
}

impl<T: Real> MacroTensor<T> {
    pub const ELLIPTIC_TOL: f64 = 1e-10;

    pub fn new(voigt: VoigtMatrix<T>) -> Self {
        let ellipticity = voigt.eigenvalues()[0];
        Self { voigt, ellipticity }
    }

    pub fn is_elliptic(&self) -> bool {
        self.ellipticity >= T::lit(Self::ELLIPTIC_TOL)
    }
}
