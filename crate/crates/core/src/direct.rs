//! The ε-problem on the unit square, with the singular rod measure written
//! as a Lebesgue weight `w = ½ + χ(x/ε)/(2|Q₁ʰ|)`.

use crate::error::{invalid, Error};
use crate::fem::DirichletSystem;
use crate::geometry::{FrameworkGraph, Point, RodRegion, SquareMesh};
use crate::homogenised::HomogenisedSolution;
use crate::materials::{laminate, ElasticTensor, VoigtMatrix};
use crate::micro::MicroProblem;
use homog_numerics::{smallest_eigpairs, EigenOptions, LdlFactor, SparseMatrix};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    Plain,
    /// Cells touching `∂Ω` carry the stiff coefficient throughout.
    Stiff,
}

impl FromStr for BoundaryMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "plain" => Ok(Self::Plain),
            "stiff" => Ok(Self::Stiff),
            _ => Err(invalid("boundary", format!("`{s}` is neither `plain` nor `stiff`"))),
        }
    }
}

impl std::fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Plain => "plain",
            Self::Stiff => "stiff",
        })
    }
}

/// Smallest even `n_fine` that puts two elements across the rod half-width.
pub fn min_nfine(theta: f64, cells: usize) -> usize {
    let h = theta / cells as f64;
    let n = (2.0 / h - 1e-9).ceil() as usize;
    n.max(4) + n % 2
}

#[derive(Debug, Clone)]
pub struct EpsProblem {
    pub cells: usize,
    pub theta: f64,
    pub n_fine: usize,
    pub mode: BoundaryMode,
    /// `|Q₁ʰ|` in cell units.
    pub stiff_area: f64,
    /// Stiff area fraction of each triangle of one cell.
    pub fractions: Vec<f64>,
    /// Full operator `K_ε` and the weighted mass live in `system`.
    pub system: DirichletSystem,
    /// Stiff and unscaled soft parts, `K_ε = k_stiff + ε² k_soft`.
    pub k_stiff: SparseMatrix,
    pub k_soft: SparseMatrix,
}

impl EpsProblem {
    pub fn eps(&self) -> f64 {
        1.0 / self.cells as f64
    }

    /// Rod half-width in cell units.
    pub fn h(&self) -> f64 {
        self.theta / self.cells as f64
    }

    /// `ε = 1/cells`.
    pub fn build(
        graph: &FrameworkGraph,
        cells: usize,
        theta: f64,
        n_fine: usize,
        mode: BoundaryMode,
        a0: &ElasticTensor<f64>,
        a1: &ElasticTensor<f64>,
    ) -> Result<Self, Error> {
        if cells == 0 {
            return Err(invalid("eps", "1/eps must be a positive integer"));
        }
        if n_fine < 2 || n_fine % 2 != 0 {
            return Err(invalid("n_fine", "must be even and at least 2"));
        }
        let h = theta / cells as f64;
        let layers = h * n_fine as f64;
        if layers < 2.0 - 1e-9 {
            return Err(Error::Underresolved { layers });
        }
        let region = RodRegion::new(graph.clone(), h)?;
        let q = region.stiff_area();
        let pattern = SquareMesh::new(n_fine);
        let fractions: Vec<f64> = (0..pattern.num_triangles())
            .map(|t| {
                let p = pattern.triangle_points(t);
                (region.area_in(&p) / crate::geometry::polygon_area(&p).abs()).clamp(0.0, 1.0)
            })
            .collect();

        let normals: Vec<Point> = (0..pattern.num_triangles())
            .map(|t| {
                let p = pattern.triangle_points(t);
                region.interface_normal([(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0])
            })
            .collect();

        let eps = 1.0 / cells as f64;
        let mesh = SquareMesh::new(cells * n_fine);
        let (d0, d1) = (a0.to_voigt(), a1.to_voigt());
        let ws = 0.5 + 0.5 / q;
        let pattern_index = |t: usize| {
            let (i, j) = mesh.subsquare(t);
            4 * ((j % n_fine) * n_fine + i % n_fine) + t % 4
        };
        let local = |t: usize| {
            let (i, j) = mesh.subsquare(t);
            let f = fractions[pattern_index(t)];
            let (ci, cj) = (i / n_fine, j / n_fine);
            let boundary = ci == 0 || cj == 0 || ci + 1 == cells || cj + 1 == cells;
            (f, mode == BoundaryMode::Stiff && boundary)
        };
        let (d1s, d0s) = (d1.scaled(ws), d0.scaled(0.5));
        let weight = |f: f64| 0.5 + 0.5 * f / q;
        let zero = VoigtMatrix::zeros();
        let stiff = DirichletSystem::assemble(mesh.clone(), |t| {
            let (f, boundary) = local(t);
            if boundary {
                (d1.scaled(weight(f)), 0.0)
            } else if f > 0.0 && f < 1.0 {
                // Cut triangles: laminate mixing across the rod edge, minus
                // the soft share kept in `k_soft`.
                let soft = d0s.scaled((1.0 - f) * eps * eps);
                let mut c = laminate(&d1s, &soft.scaled(1.0 / (1.0 - f)), f, normals[pattern_index(t)]);
                for (r, s) in c.m.iter_mut().flatten().zip(soft.m.iter().flatten()) {
                    *r -= s;
                }
                (c, 0.0)
            } else {
                (d1s.scaled(f), 0.0)
            }
        })?;
        let soft = DirichletSystem::assemble(mesh.clone(), |t| {
            let (f, boundary) = local(t);
            if boundary {
                (zero, 0.0)
            } else {
                (d0.scaled((1.0 - f) * 0.5), 0.0)
            }
        })?;
        let mut system = DirichletSystem::assemble(mesh.clone(), |t| (zero, weight(local(t).0)))?;
        system.k = stiff.k.linear_combination(1.0, &soft.k, eps * eps)?;
        Ok(Self {
            cells,
            theta,
            n_fine,
            mode,
            stiff_area: q,
            fractions,
            system,
            k_stiff: stiff.k,
            k_soft: soft.k,
        })
    }

    /// `∫_Ω w dx`.
    pub fn total_measure(&self) -> f64 {
        let ones = vec![1.0; self.system.mass.dim()];
        self.system.mass.bilinear(&ones, &ones)
    }

    pub fn dofs(&self) -> usize {
        self.system.dim()
    }

    /// `(K_ε + M_ε) u = M_ε f`.
    pub fn solve_source(&self, f: impl Fn(Point) -> [f64; 2]) -> Result<DirectSolution, Error> {
        let sys = &self.system;
        let ident = [[1.0, 0.0], [0.0, 1.0]];
        let a = sys.k.linear_combination(1.0, &sys.interior_mass(ident)?, 1.0)?;
        let fh = sys.interpolate(&f);
        let rhs = sys.load(&fh, ident);
        let factor = LdlFactor::new(&a)?;
        let u = factor.solve_refined(&a, &rhs);
        let au = a.mul_vec(&u);
        let num: f64 = au.iter().zip(&rhs).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        let den: f64 = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
        let eps = self.eps();
        let stiff = self.k_stiff.bilinear(&u, &u);
        let soft = eps * eps * self.k_soft.bilinear(&u, &u);
        let full = sys.expand(&u);
        let work: f64 = rhs.iter().zip(&u).map(|(x, y)| x * y).sum();
        Ok(DirectSolution {
            norm_sq: sys.mass.bilinear(&comp(&full, 0), &comp(&full, 0)) + sys.mass.bilinear(&comp(&full, 1), &comp(&full, 1)),
            u: full,
            energy_stiff: stiff,
            energy_soft: soft,
            work,
            residual: if den > 0.0 { num / den } else { num },
        })
    }

    /// Lowest `m` eigenvalues of `K_ε u = ω M_ε u`.
    pub fn solve_spectrum(&self, m: usize) -> Result<DirectSpectrum, Error> {
        if m == 0 {
            return Err(invalid("modes", "need at least one mode"));
        }
        let mass = self.system.interior_mass([[1.0, 0.0], [0.0, 1.0]])?;
        let opts = EigenOptions::default();
        let r = smallest_eigpairs(&self.system.k, &mass, m, &opts)?;
        if let Some(&worst) = r.residuals.iter().max_by(|a, b| a.total_cmp(b)) {
            if worst > opts.tol {
                return Err(Error::Residual { residual: worst, tol: opts.tol });
            }
        }
        Ok(DirectSpectrum {
            omegas: r.values,
            residuals: r.residuals,
        })
    }

    /// Mass weight of global triangle `t`.
    pub fn weight(&self, t: usize) -> f64 {
        let n = self.n_fine;
        let (i, j) = self.system.mesh.subsquare(t);
        0.5 + 0.5 * self.fractions[4 * ((j % n) * n + i % n) + t % 4] / self.stiff_area
    }
}

fn comp(u: &[f64], c: usize) -> Vec<f64> {
    u.iter().skip(c).step_by(2).copied().collect()
}

#[derive(Debug, Clone)]
pub struct DirectSolution {
    /// Nodal displacement on all vertices, zero on `∂Ω`.
    pub u: Vec<f64>,
    pub energy_stiff: f64,
    /// Includes the `ε²` factor.
    pub energy_soft: f64,
    /// `∫ f·u w dx`.
    pub work: f64,
    /// `∫ |u|² w dx`.
    pub norm_sq: f64,
    pub residual: f64,
}

impl DirectSolution {
    pub fn energy(&self) -> f64 {
        self.energy_stiff + self.energy_soft
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectSpectrum {
    pub omegas: Vec<f64>,
    pub residuals: Vec<f64>,
}

const QUAD: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

/// `‖u_ε − u₀ − Σ cₙ φₙ(·/ε)‖` in the `w`-weighted L² norm.
pub fn two_scale_distance(
    problem: &EpsProblem,
    u: &[f64],
    hom: &HomogenisedSolution,
    micro: &MicroProblem,
) -> f64 {
    let mesh = &problem.system.mesh;
    let eps = problem.eps();
    let mut sum = 0.0;
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangle(t);
        let p = mesh.triangle_points(t);
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs();
        let w = problem.weight(t);
        for b in &QUAD {
            let x = [
                b[0] * p[0][0] + b[1] * p[1][0] + b[2] * p[2][0],
                b[0] * p[0][1] + b[1] * p[1][1] + b[2] * p[2][1],
            ];
            let r = hom.reconstruct(micro, x, eps);
            let mut d = 0.0;
            for c in 0..2 {
                let ue: f64 = (0..3).map(|k| b[k] * u[2 * tri[k] + c]).sum();
                d += (ue - r[c]).powi(2);
            }
            sum += w * area / 3.0 * d;
        }
    }
    sum.sqrt()
}

/// `(r_fwd, r_bwd)`: the worst distance from a direct eigenvalue to the
/// limit set, and from a limit point below the largest direct eigenvalue
/// to the direct list.
pub fn hausdorff_residual(direct: &[f64], limit: &[f64]) -> (f64, f64) {
    let dist = |x: f64, set: &[f64]| set.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min);
    let fwd = direct.iter().map(|&w| dist(w, limit)).fold(0.0, f64::max);
    let top = direct.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bwd = limit
        .iter()
        .filter(|&&s| s <= top)
        .map(|&s| dist(s, direct))
        .fold(0.0, f64::max);
    (fwd, bwd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mats() -> (ElasticTensor<f64>, ElasticTensor<f64>) {
        (ElasticTensor::new(0.0, 0.1).unwrap(), ElasticTensor::new(1.0, 1.0).unwrap())
    }

    #[test]
    fn measure_is_normalised() {
        let g = FrameworkGraph::preset("grid").unwrap();
        let (a0, a1) = mats();
        let p = EpsProblem::build(&g, 4, 0.4, 32, BoundaryMode::Plain, &a0, &a1).unwrap();
        assert!((p.total_measure() - 1.0).abs() < 1e-6, "{}", p.total_measure());
    }

    #[test]
    fn underresolved_rods_are_rejected() {
        let g = FrameworkGraph::preset("grid").unwrap();
        let (a0, a1) = mats();
        let r = EpsProblem::build(&g, 4, 0.4, 8, BoundaryMode::Plain, &a0, &a1);
        assert!(matches!(r, Err(Error::Underresolved { .. })));
        assert_eq!(min_nfine(0.4, 8), 40);
        assert_eq!(min_nfine(0.4, 4), 20);
    }

    #[test]
    fn hausdorff_of_shifted_sets() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(hausdorff_residual(&a, &a), (0.0, 0.0));
        let b: Vec<f64> = a.iter().map(|x| x + 0.1).collect();
        let (f, r) = hausdorff_residual(&b, &a);
        assert!(f <= 0.1 + 1e-15 && r <= 0.1 + 1e-15);
    }

    #[test]
    fn source_energy_identity() {
        let g = FrameworkGraph::preset("grid-diag").unwrap();
        let (a0, a1) = mats();
        let p = EpsProblem::build(&g, 2, 0.4, 12, BoundaryMode::Plain, &a0, &a1).unwrap();
        let s = p.solve_source(|x| [x[0] * (1.0 - x[0]), x[1]]).unwrap();
        assert!(s.residual < 1e-10);
        let rel = (s.work - s.energy() - s.norm_sq).abs() / s.work;
        assert!(rel < 1e-9, "{rel}");
    }
}
