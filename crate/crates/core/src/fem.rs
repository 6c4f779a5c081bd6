//! Element matrices: P1 triangles for plane elasticity and Hermite cubic
//! beam segments. Vector element DOFs are ordered `(x₀, y₀, x₁, y₁, x₂, y₂)`;
//! beam DOFs `(w_a, w'_a, w_b, w'_b)`.

use crate::geometry::{Point, SquareMesh};
use crate::materials::VoigtMatrix;
use homog_numerics::{NumericsError, SparseMatrix, TripletBuilder};

/// Signed area and constant shape-function gradients of a P1 triangle.
pub fn p1_gradients(p: &[Point; 3]) -> (f64, [[f64; 2]; 3]) {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        g[i] = [(p[j][1] - p[k][1]) / det, (p[k][0] - p[j][0]) / det];
    }
    (det / 2.0, g)
}

/// Voigt strain-displacement rows, 3×6.
fn strain_matrix(g: &[[f64; 2]; 3]) -> [[f64; 6]; 3] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut b = [[0.0; 6]; 3];
    for i in 0..3 {
        b[0][2 * i] = g[i][0];
        b[1][2 * i + 1] = g[i][1];
        b[2][2 * i] = r * g[i][1];
        b[2][2 * i + 1] = r * g[i][0];
    }
    b
}

/// `∫_T D e(u)·e(v)`.
pub fn p1_elasticity(p: &[Point; 3], d: &VoigtMatrix<f64>) -> [[f64; 6]; 6] {
    let (area, g) = p1_gradients(p);
    let b = strain_matrix(&g);
    let mut k = [[0.0; 6]; 6];
    for r in 0..6 {
        for c in 0..6 {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += b[i][r] * d.m[i][j] * b[j][c];
                }
            }
            k[r][c] = area.abs() * s;
        }
    }
    k
}

/// Voigt strain of a P1 field with element values `u`.
pub fn p1_strain(p: &[Point; 3], u: &[f64; 6]) -> [f64; 3] {
    let (_, g) = p1_gradients(p);
    let b = strain_matrix(&g);
    let mut e = [0.0; 3];
    for (i, ei) in e.iter_mut().enumerate() {
        *ei = (0..6).map(|c| b[i][c] * u[c]).sum();
    }
    e
}

/// Consistent scalar mass `∫_T φᵢ φⱼ`.
pub fn p1_mass(p: &[Point; 3]) -> [[f64; 3]; 3] {
    let (area, _) = p1_gradients(p);
    let a = area.abs() / 12.0;
    let mut m = [[a; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 2.0 * a;
    }
    m
}

/// Consistent vector mass scaled by `weight`.
pub fn p1_vector_mass(p: &[Point; 3], weight: f64) -> [[f64; 6]; 6] {
    let s = p1_mass(p);
    let mut m = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            for c in 0..2 {
                m[2 * i + c][2 * j + c] = weight * s[i][j];
            }
        }
    }
    m
}

/// Two-node linear mass `∫ φᵢ φⱼ ds`.
pub fn line_mass(len: f64) -> [[f64; 2]; 2] {
    [[len / 3.0, len / 6.0], [len / 6.0, len / 3.0]]
}

/// Bending stiffness `c ∫ w″ v″ ds` of a Hermite cubic segment.
pub fn hermite_stiffness(len: f64, c: f64) -> [[f64; 4]; 4] {
    let l = len;
    let f = c / (l * l * l);
    [
        [12.0 * f, 6.0 * l * f, -12.0 * f, 6.0 * l * f],
        [6.0 * l * f, 4.0 * l * l * f, -6.0 * l * f, 2.0 * l * l * f],
        [-12.0 * f, -6.0 * l * f, 12.0 * f, -6.0 * l * f],
        [6.0 * l * f, 2.0 * l * l * f, -6.0 * l * f, 4.0 * l * l * f],
    ]
}

/// Consistent mass `∫ w v ds` of a Hermite cubic segment.
pub fn hermite_mass(len: f64) -> [[f64; 4]; 4] {
    let l = len;
    let f = l / 420.0;
    [
        [156.0 * f, 22.0 * l * f, 54.0 * f, -13.0 * l * f],
        [22.0 * l * f, 4.0 * l * l * f, 13.0 * l * f, -3.0 * l * l * f],
        [54.0 * f, 13.0 * l * f, 156.0 * f, -22.0 * l * f],
        [-13.0 * l * f, -3.0 * l * l * f, -22.0 * l * f, 4.0 * l * l * f],
    ]
}

/// `∫ w ds` against each Hermite shape function.
pub fn hermite_integral(len: f64) -> [f64; 4] {
    [len / 2.0, len * len / 12.0, len / 2.0, -len * len / 12.0]
}

/// `S ⊗ T`: each scalar entry of `s` becomes the 2×2 block `s_ij T`.
pub fn kron2(s: &SparseMatrix, t: [[f64; 2]; 2]) -> Result<SparseMatrix, NumericsError> {
    let mut b = TripletBuilder::with_capacity(2 * s.dim(), 4 * s.nnz());
    for (i, j, v) in s.iter_lower() {
        for c in 0..2 {
            for d in 0..2 {
                if i != j || c >= d {
                    b.push(2 * i + c, 2 * j + d, v * t[c][d]);
                }
            }
        }
    }
    b.build()
}

/// Vector P1 elasticity on the unit square with homogeneous Dirichlet
/// conditions. Stiffness lives on interior DOFs; the scalar mass keeps all
/// vertices so loads and x-fields without boundary conditions can use it.
#[derive(Debug, Clone)]
pub struct DirichletSystem {
    pub mesh: SquareMesh,
    /// Stiffness on interior DOFs, `2·interior + component`.
    pub k: SparseMatrix,
    /// Scalar weighted mass on all vertices.
    pub mass: SparseMatrix,
    interior: Vec<usize>,
}

impl DirichletSystem {
    /// `coeff(t)` gives the elasticity matrix and mass weight of triangle `t`.
    pub fn assemble(
        mesh: SquareMesh,
        coeff: impl Fn(usize) -> (VoigtMatrix<f64>, f64),
    ) -> Result<Self, NumericsError> {
        let nv = mesh.num_vertices();
        let interior: Vec<usize> = (0..nv).filter(|&v| !mesh.on_boundary(v)).collect();
        let mut index = vec![usize::MAX; nv];
        for (k, &v) in interior.iter().enumerate() {
            index[v] = k;
        }
        let nt = mesh.num_triangles();
        let mut kb = TripletBuilder::with_capacity(2 * interior.len(), 21 * nt);
        let mut mb = TripletBuilder::with_capacity(nv, 6 * nt);
        for t in 0..nt {
            let tri = mesh.triangle(t);
            let pts = mesh.triangle_points(t);
            let (d, w) = coeff(t);
            let ke = p1_elasticity(&pts, &d);
            let me = p1_mass(&pts);
            for a in 0..3 {
                for b in 0..=a {
                    mb.push(tri[a], tri[b], w * me[a][b]);
                }
            }
            for r in 0..6 {
                let vr = index[tri[r / 2]];
                if vr == usize::MAX {
                    continue;
                }
                for c in 0..=r {
                    let vc = index[tri[c / 2]];
                    if vc == usize::MAX {
                        continue;
                    }
                    kb.push(2 * vr + r % 2, 2 * vc + c % 2, ke[r][c]);
                }
            }
        }
        Ok(Self {
            k: kb.build()?,
            mass: mb.build()?,
            mesh,
            interior,
        })
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn dim(&self) -> usize {
        2 * self.interior.len()
    }

    /// Vector mass on interior DOFs with the 2×2 block `t`.
    pub fn interior_mass(&self, t: [[f64; 2]; 2]) -> Result<SparseMatrix, NumericsError> {
        kron2(&self.mass.submatrix(&self.interior)?, t)
    }

    /// `∫ (T f)·φ_i` over interior DOFs for an all-vertex nodal field `f`.
    pub fn load(&self, f: &[f64], t: [[f64; 2]; 2]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        let mf = self.mass_apply(f);
        for (k, &v) in self.interior.iter().enumerate() {
            for c in 0..2 {
                out[2 * k + c] = t[c][0] * mf[2 * v] + t[c][1] * mf[2 * v + 1];
            }
        }
        out
    }

    /// Scalar mass applied componentwise to an all-vertex vector field.
    pub fn mass_apply(&self, f: &[f64]) -> Vec<f64> {
        let nv = self.mesh.num_vertices();
        let mut out = vec![0.0; 2 * nv];
        for c in 0..2 {
            let comp: Vec<f64> = (0..nv).map(|v| f[2 * v + c]).collect();
            for (v, x) in self.mass.mul_vec(&comp).into_iter().enumerate() {
                out[2 * v + c] = x;
            }
        }
        out
    }

    /// All-vertex field with zeros on the boundary.
    pub fn expand(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 2 * self.mesh.num_vertices()];
        for (k, &v) in self.interior.iter().enumerate() {
            out[2 * v] = u[2 * k];
            out[2 * v + 1] = u[2 * k + 1];
        }
        out
    }

    /// Nodal interpolant of `f` on all vertices.
    pub fn interpolate(&self, f: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
        (0..self.mesh.num_vertices())
            .flat_map(|v| f(self.mesh.vertex_position(v)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::ElasticTensor;

    const TRI: [Point; 3] = [[0.1, 0.2], [0.7, 0.3], [0.3, 0.9]];

    fn quad6(k: &[[f64; 6]; 6], u: &[f64; 6]) -> f64 {
        (0..6).map(|i| (0..6).map(|j| u[i] * k[i][j] * u[j]).sum::<f64>()).sum()
    }

    #[test]
    fn rigid_motions_carry_no_energy() {
        let d = ElasticTensor::new(0.4, 1.3).unwrap().to_voigt();
        let k = p1_elasticity(&TRI, &d);
        let rot: Vec<f64> = TRI.iter().flat_map(|p| [-p[1], p[0]]).collect();
        for u in [[1.0, 0.0, 1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0, 0.0, 1.0], rot.try_into().unwrap()] {
            assert!(quad6(&k, &u).abs() < 1e-13);
        }
    }

    #[test]
    fn uniform_strain_energy() {
        // u = ξ x with ξ = [[1, 0.5], [0.5, -2]]: energy = area · Dε·ε.
        let d = ElasticTensor::new(0.4, 1.3).unwrap().to_voigt();
        let xi = [[1.0, 0.5], [0.5, -2.0]];
        let u: Vec<f64> = TRI
            .iter()
            .flat_map(|p| [xi[0][0] * p[0] + xi[0][1] * p[1], xi[1][0] * p[0] + xi[1][1] * p[1]])
            .collect();
        let u: [f64; 6] = u.try_into().unwrap();
        let (area, _) = p1_gradients(&TRI);
        let v = crate::materials::strain_to_voigt(&xi);
        let exact = area * d.form(&v, &v);
        assert!((quad6(&p1_elasticity(&TRI, &d), &u) - exact).abs() < 1e-12);
        let e = p1_strain(&TRI, &u);
        assert!((e[0] - v[0]).abs() < 1e-13 && (e[2] - v[2]).abs() < 1e-13);
    }

    #[test]
    fn mass_totals() {
        let (area, _) = p1_gradients(&TRI);
        let total: f64 = p1_mass(&TRI).iter().flatten().sum();
        assert!((total - area).abs() < 1e-15);
        let hm = hermite_mass(0.3);
        // Constant deflection 1 with zero slope integrates w² to the length.
        let c = [1.0, 0.0, 1.0, 0.0];
        let m: f64 = (0..4).map(|i| (0..4).map(|j| c[i] * hm[i][j] * c[j]).sum::<f64>()).sum();
        assert!((m - 0.3).abs() < 1e-15);
        let lm: f64 = line_mass(0.3).iter().flatten().sum();
        assert!((lm - 0.3).abs() < 1e-15);
    }

    #[test]
    fn hermite_integrates_cubics() {
        // w = s³ on [0, L]: w(0)=0, w'(0)=0, w(L)=L³, w'(L)=3L².
        let l: f64 = 0.7;
        let dofs = [0.0, 0.0, l.powi(3), 3.0 * l * l];
        let int: f64 = hermite_integral(l).iter().zip(&dofs).map(|(a, b)| a * b).sum();
        assert!((int - l.powi(4) / 4.0).abs() < 1e-15);
        // ∫ (w″)² = ∫ 36 s² = 12 L³.
        let k = hermite_stiffness(l, 1.0);
        let e: f64 = (0..4).map(|i| (0..4).map(|j| dofs[i] * k[i][j] * dofs[j]).sum::<f64>()).sum();
        assert!((e - 12.0 * l.powi(3)).abs() < 1e-12);
    }
}
