//! Homogenised tensor of the network: the relaxed cell problem is a
//! periodic truss whose links carry the energy `K₁ (ξ:ττ + Δu·τ/ℓ)²`
//! weighted by their share `ℓ/L_tot` of the arc-length measure.

use crate::error::Error;
use crate::geometry::FrameworkGraph;
use crate::materials::{voigt_to_strain, ElasticTensor, MacroTensor, Sym2, VoigtMatrix};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
struct TrussLink {
    a: usize,
    b: usize,
    tau: [f64; 2],
    len: f64,
    /// `K₁ ℓ / L_tot`.
    weight: f64,
}

/// Quadratic truss energy on periodic nodal displacements.
#[derive(Debug, Clone)]
pub struct TrussSystem {
    nodes: usize,
    links: Vec<TrussLink>,
    stiffness: DMatrix<f64>,
}

impl TrussSystem {
    pub fn new(graph: &FrameworkGraph, a1: &ElasticTensor<f64>) -> Result<Self, Error> {
        let total = graph.total_length();
        let nodes = graph.nodes().len();
        let mut links = Vec::new();
        for l in graph.links() {
            links.push(TrussLink {
                a: l.a,
                b: l.b,
                tau: l.tau,
                len: l.length,
                weight: a1.k1(l.tau)? * l.length / total,
            });
        }
        let mut stiffness = DMatrix::zeros(2 * nodes, 2 * nodes);
        for l in &links {
            let row = Self::row(nodes, l);
            stiffness += l.weight * &row * row.transpose();
        }
        Ok(Self { nodes, links, stiffness })
    }

    /// Coefficients of `(u_b − u_a)·τ/ℓ`.
    fn row(nodes: usize, l: &TrussLink) -> DVector<f64> {
        let mut r = DVector::zeros(2 * nodes);
        for c in 0..2 {
            r[2 * l.b + c] += l.tau[c] / l.len;
            r[2 * l.a + c] -= l.tau[c] / l.len;
        }
        r
    }

    fn strain(&self, l: &TrussLink, xi: &Sym2<f64>, u: &DVector<f64>) -> f64 {
        let t = l.tau;
        let axial = xi[0][0] * t[0] * t[0] + 2.0 * xi[0][1] * t[0] * t[1] + xi[1][1] * t[1] * t[1];
        axial + Self::row(self.nodes, l).dot(u)
    }

    /// Network energy of the macroscopic strain `ξ` with nodal field `u`.
    pub fn energy(&self, xi: &Sym2<f64>, u: &DVector<f64>) -> f64 {
        self.links.iter().map(|l| l.weight * self.strain(l, xi, u).powi(2)).sum()
    }

    /// Number of zero-energy nodal modes.
    pub fn kernel_dimension(&self) -> usize {
        let scale: f64 = self.links.iter().map(|l| l.weight / (l.len * l.len)).sum();
        let eig = self.stiffness.clone().symmetric_eigen();
        eig.eigenvalues.iter().filter(|v| v.abs() <= 1e-10 * scale).count()
    }

    /// Zero-mean minimiser of [`energy`](Self::energy) for strain `ξ`.
    pub fn minimiser(&self, xi: &Sym2<f64>) -> Result<DVector<f64>, Error> {
        let dim = 2 * self.nodes;
        let kernel = self.kernel_dimension();
        if kernel > 2 {
            return Err(Error::IllPosedTruss(kernel));
        }
        let zero = DVector::zeros(dim);
        let mut rhs = DVector::zeros(dim);
        for l in &self.links {
            rhs -= l.weight * self.strain(l, xi, &zero) * Self::row(self.nodes, l);
        }
        // Translations are in the kernel and orthogonal to the load; adding
        // the projector onto them fixes the mean without changing the rest.
        let mut a = self.stiffness.clone();
        let scale = self.stiffness.diagonal().max().max(1.0);
        for i in 0..dim {
            for j in 0..dim {
                if i % 2 == j % 2 {
                    a[(i, j)] += scale / self.nodes as f64;
                }
            }
        }
        a.cholesky()
            .map(|c| c.solve(&rhs))
            .ok_or(Error::IllPosedTruss(kernel))
    }
}

/// `A^hom` by minimising over the three Voigt basis strains and
/// polarising at the minimisers.
pub fn compute_ahom(graph: &FrameworkGraph, a1: &ElasticTensor<f64>) -> Result<MacroTensor<f64>, Error> {
    let truss = TrussSystem::new(graph, a1)?;
    let basis: Vec<Sym2<f64>> = (0..3)
        .map(|k| {
            let mut v = [0.0; 3];
            v[k] = 1.0;
            voigt_to_strain(&v)
        })
        .collect();
    let mut strains = Vec::with_capacity(3);
    for xi in &basis {
        let u = truss.minimiser(xi)?;
        strains.push(truss.links.iter().map(|l| truss.strain(l, xi, &u)).collect::<Vec<f64>>());
    }
    let mut voigt = VoigtMatrix::zeros();
    for i in 0..3 {
        for j in 0..3 {
            voigt.m[i][j] = truss
                .links
                .iter()
                .enumerate()
                .map(|(k, l)| l.weight * strains[i][k] * strains[j][k])
                .sum();
        }
    }
    Ok(MacroTensor::new(voigt))
}

/// Smallest eigenvalue of the Voigt matrix.
pub fn ellipticity(m: &MacroTensor<f64>) -> f64 {
    m.voigt.eigenvalues()[0]
}

/// `∫ K₁ (ξ:ττ)² dλ`, the network energy of the affine field.
pub fn affine_bound(graph: &FrameworkGraph, a1: &ElasticTensor<f64>, xi: &Sym2<f64>) -> Result<f64, Error> {
    let truss = TrussSystem::new(graph, a1)?;
    Ok(truss.energy(xi, &DVector::zeros(2 * truss.nodes)))
}
