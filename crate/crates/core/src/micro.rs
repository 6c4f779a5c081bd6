//! The cell eigenproblem: Hermite beams along the links coupled to P1
//! plane elasticity on the cell, with the composite mass `½dy + ½dλ`.
//!
//! The full discrete space has two displacement components per mesh vertex,
//! a slope per on-link vertex and a rotation per graph node. The admissible
//! subspace pins every node, keeps on-link vertices moving along the link
//! normal (`U = wν`) and ties every link-end slope to its node rotation;
//! it is realised by an explicit sparse embedding.

use crate::error::{invalid, Error};
use crate::fem;
use crate::geometry::{CellMesh, FrameworkGraph, Point};
use crate::materials::ElasticTensor;
use homog_numerics::{smallest_eigpairs, EigenOptions, SparseMatrix, TripletBuilder};
use serde::Serialize;

/// Relative threshold below which a mode counts as average-free.
pub const TOL_AVG: f64 = 1e-6;

type Row = Vec<(usize, f64)>;

#[derive(Debug, Clone)]
pub struct MicroProblem {
    mesh: CellMesh,
    /// Reduced stiffness (bending + area).
    pub k: SparseMatrix,
    pub k_bending: SparseMatrix,
    pub k_area: SparseMatrix,
    /// Reduced mass.
    pub m: SparseMatrix,
    /// Mass on the unconstrained space.
    pub m_full: SparseMatrix,
    /// `rows[i]`: full DOF `i` as a combination of free DOFs.
    rows: Vec<Row>,
    /// `⟨φ⟩_k = averages[k] · φ` for reduced vectors φ.
    averages: [Vec<f64>; 2],
    /// Per vertex: `Some((link, slope_dof))` for on-link vertices away from nodes.
    on_link: Vec<Option<(usize, usize)>>,
    node_rotation: Vec<usize>,
    graph: FrameworkGraph,
}

fn add_local(b: &mut TripletBuilder<f64>, map: &[Row], local: &[f64], scale: f64) {
    let n = map.len();
    for i in 0..n {
        for j in 0..n {
            let v = scale * local[i * n + j];
            if v == 0.0 {
                continue;
            }
            for &(p, a) in &map[i] {
                for &(q, c) in &map[j] {
                    if p >= q {
                        b.push(p, q, v * a * c);
                    }
                }
            }
        }
    }
}

impl MicroProblem {
    pub fn assemble(
        mesh: CellMesh,
        graph: &FrameworkGraph,
        a0: &ElasticTensor<f64>,
        a1: &ElasticTensor<f64>,
        theta: f64,
    ) -> Result<Self, Error> {
        if !(theta > 0.0) {
            return Err(invalid("theta", "must be positive"));
        }
        if mesh.link_paths().len() != graph.links().len() || mesh.node_vertices().len() != graph.nodes().len() {
            return Err(invalid("mesh", "mesh was built for a different framework"));
        }
        let nv = mesh.num_vertices();
        let total = graph.total_length();

        // Full DOF layout.
        let mut on_link: Vec<Option<(usize, usize)>> = vec![None; nv];
        let mut next = 2 * nv;
        for path in mesh.link_paths() {
            for &v in &path.vertices[1..path.vertices.len() - 1] {
                if on_link[v].is_some() {
                    return Err(Error::InvalidGraph("links share a mesh vertex away from nodes".into()));
                }
                on_link[v] = Some((path.link, next));
                next += 1;
            }
        }
        let node_rotation: Vec<usize> = (0..graph.nodes().len()).map(|i| next + i).collect();
        let full_dim = next + node_rotation.len();
        let mut is_node = vec![false; nv];
        for &v in mesh.node_vertices() {
            is_node[v] = true;
        }

        let mut kb = TripletBuilder::new(full_dim);
        let mut ka = TripletBuilder::new(full_dim);
        let mut mb = TripletBuilder::new(full_dim);
        let d0 = a0.to_voigt();
        for t in 0..mesh.num_triangles() {
            let tri = mesh.triangle(t);
            let pts = mesh.triangle_points(t);
            let map: Vec<Row> = tri.iter().flat_map(|&v| [vec![(2 * v, 1.0)], vec![(2 * v + 1, 1.0)]]).collect();
            let k = fem::p1_elasticity(&pts, &d0);
            add_local(&mut ka, &map, &k.concat(), 0.5);
            let m = fem::p1_vector_mass(&pts, 0.5);
            add_local(&mut mb, &map, &m.concat(), 1.0);
        }

        let coef = theta * theta / 6.0 / total;
        for path in mesh.link_paths() {
            let link = &graph.links()[path.link];
            let k1 = a1.k1(link.tau)?;
            let (nu, tau) = (link.nu, link.tau);
            let len = path.segment_length();
            let last = path.vertices.len() - 1;
            let slope = |k: usize| -> usize {
                if k == 0 {
                    node_rotation[link.a]
                } else if k == last {
                    node_rotation[link.b]
                } else {
                    on_link[path.vertices[k]].expect("interior vertex").1
                }
            };
            let beam = fem::hermite_stiffness(len, coef * k1).concat();
            let beam_mass = fem::hermite_mass(len).concat();
            let lmass = fem::line_mass(len).concat();
            for k in 0..last {
                let (va, vb) = (path.vertices[k], path.vertices[k + 1]);
                let normal = |v: usize| vec![(2 * v, nu[0]), (2 * v + 1, nu[1])];
                let tangent = |v: usize| vec![(2 * v, tau[0]), (2 * v + 1, tau[1])];
                let map = [normal(va), vec![(slope(k), 1.0)], normal(vb), vec![(slope(k + 1), 1.0)]];
                add_local(&mut kb, &map, &beam, 1.0);
                add_local(&mut mb, &map, &beam_mass, 0.5 / total);
                add_local(&mut mb, &[tangent(va), tangent(vb)], &lmass, 0.5 / total);
            }
        }
        let k_bend_full = kb.build()?;
        let k_area_full = ka.build()?;
        let m_full = mb.build()?;

        // Embedding.
        let mut rows: Vec<Row> = vec![Vec::new(); full_dim];
        let mut free = 0usize;
        for v in 0..nv {
            if is_node[v] {
                continue;
            }
            match on_link[v] {
                Some((l, s)) => {
                    let nu = graph.links()[l].nu;
                    rows[2 * v] = vec![(free, nu[0])];
                    rows[2 * v + 1] = vec![(free, nu[1])];
                    rows[s] = vec![(free + 1, 1.0)];
                    free += 2;
                }
                None => {
                    rows[2 * v] = vec![(free, 1.0)];
                    rows[2 * v + 1] = vec![(free + 1, 1.0)];
                    free += 2;
                }
            }
        }
        for &r in &node_rotation {
            rows[r] = vec![(free, 1.0)];
            free += 1;
        }
        if free == 0 {
            return Err(invalid("mesh", "empty constrained space"));
        }

        let k_bending = k_bend_full.congruence(&rows, free)?;
        let k_area = k_area_full.congruence(&rows, free)?;
        let k = k_bending.linear_combination(1.0, &k_area, 1.0)?;
        let m = m_full.congruence(&rows, free)?;

        let mut averages = [vec![0.0; free], vec![0.0; free]];
        for (c, avg) in averages.iter_mut().enumerate() {
            let mut e = vec![0.0; full_dim];
            for v in 0..nv {
                e[2 * v + c] = 1.0;
            }
            let me = m_full.mul_vec(&e);
            for (i, row) in rows.iter().enumerate() {
                for &(j, a) in row {
                    avg[j] += a * me[i];
                }
            }
        }

        Ok(Self {
            mesh,
            k,
            k_bending,
            k_area,
            m,
            m_full,
            rows,
            averages,
            on_link,
            node_rotation,
            graph: graph.clone(),
        })
    }

    pub fn mesh(&self) -> &CellMesh {
        &self.mesh
    }

    pub fn graph(&self) -> &FrameworkGraph {
        &self.graph
    }

    pub fn free_dim(&self) -> usize {
        self.k.dim()
    }

    pub fn full_dim(&self) -> usize {
        self.rows.len()
    }

    /// `(U, U)_μ` for the constant field `U ≡ e_c` on the unconstrained space.
    pub fn constant_field_mass(&self, c: usize) -> f64 {
        let mut e = vec![0.0; self.full_dim()];
        for v in 0..self.mesh.num_vertices() {
            e[2 * v + c] = 1.0;
        }
        self.m_full.bilinear(&e, &e)
    }

    /// μ-average of a reduced vector.
    pub fn average(&self, phi: &[f64]) -> [f64; 2] {
        let d = |a: &[f64]| a.iter().zip(phi).map(|(x, y)| x * y).sum::<f64>();
        [d(&self.averages[0]), d(&self.averages[1])]
    }

    /// Full DOF vector of a reduced vector.
    pub fn expand(&self, phi: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(j, a)| a * phi[j]).sum()).collect()
    }

    /// Nodal displacement `(U₁, U₂)` per mesh vertex of a reduced vector.
    pub fn displacement(&self, phi: &[f64]) -> Vec<f64> {
        let full = self.expand(phi);
        full[..2 * self.mesh.num_vertices()].to_vec()
    }

    /// Evaluates a nodal displacement (from [`displacement`](Self::displacement))
    /// at cell point `y` through the P1 interpolant.
    pub fn evaluate(&self, nodal: &[f64], y: Point) -> [f64; 2] {
        let (t, b) = self.mesh.locate(y);
        let tri = self.mesh.triangle(t);
        let mut u = [0.0; 2];
        for k in 0..3 {
            u[0] += b[k] * nodal[2 * tri[k]];
            u[1] += b[k] * nodal[2 * tri[k] + 1];
        }
        u
    }

    /// Largest `|U·τ|` at on-link vertices and `|U|` at nodes.
    pub fn constraint_violation(&self, phi: &[f64]) -> f64 {
        let full = self.expand(phi);
        let mut worst: f64 = 0.0;
        for (v, info) in self.on_link.iter().enumerate() {
            if let Some((l, _)) = info {
                let t = self.graph.links()[*l].tau;
                worst = worst.max((full[2 * v] * t[0] + full[2 * v + 1] * t[1]).abs());
            }
        }
        for &v in self.mesh.node_vertices() {
            worst = worst.max(full[2 * v].abs()).max(full[2 * v + 1].abs());
        }
        worst
    }

    /// Rotation DOF of each node in the full space.
    pub fn node_rotation_dofs(&self) -> &[usize] {
        &self.node_rotation
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MicroMode {
    pub omega: f64,
    pub avg: [f64; 2],
    pub zero_average: bool,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct MicroSpectrum {
    pub modes: Vec<MicroMode>,
    /// M-orthonormal reduced eigenvectors.
    pub vectors: Vec<Vec<f64>>,
}

impl MicroSpectrum {
    pub fn omegas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.omega).collect()
    }

    /// Only the first `n` modes.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.modes.len());
        Self {
            modes: self.modes[..n].to_vec(),
            vectors: self.vectors[..n].to_vec(),
        }
    }
}

/// Lowest `count` eigenpairs of the cell problem.
pub fn solve_micro(problem: &MicroProblem, count: usize) -> Result<MicroSpectrum, Error> {
    if count == 0 {
        return Err(invalid("modes", "need at least one mode"));
    }
    let opts = EigenOptions::default();
    let r = smallest_eigpairs(&problem.k, &problem.m, count, &opts)?;
    let mut modes = Vec::with_capacity(count);
    for (i, x) in r.vectors.iter().enumerate() {
        if r.residuals[i] > opts.tol {
            return Err(Error::Residual {
                residual: r.residuals[i],
                tol: opts.tol,
            });
        }
        let avg = problem.average(x);
        let norm = (avg[0] * avg[0] + avg[1] * avg[1]).sqrt();
        modes.push(MicroMode {
            omega: r.values[i],
            avg,
            zero_average: norm <= TOL_AVG,
            residual: r.residuals[i],
        });
    }
    Ok(MicroSpectrum {
        modes,
        vectors: r.vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(n: usize, theta: f64) -> MicroProblem {
        let g = FrameworkGraph::preset("grid-diag").unwrap();
        let mesh = CellMesh::new(&g, n).unwrap();
        let a0 = ElasticTensor::new(0.0, 0.1).unwrap();
        let a1 = ElasticTensor::new(1.0, 1.0).unwrap();
        MicroProblem::assemble(mesh, &g, &a0, &a1, theta).unwrap()
    }

    #[test]
    fn constant_field_has_unit_mass() {
        let p = problem(8, 0.5);
        assert!((p.constant_field_mass(0) - 1.0).abs() < 1e-12);
        assert!((p.constant_field_mass(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bending_scales_with_theta_squared() {
        let a = problem(8, 0.5);
        let b = problem(8, 1.0);
        let d = a.k_bending.scaled(4.0).linear_combination(1.0, &b.k_bending, -1.0).unwrap();
        let worst = d.iter_lower().fold(0.0f64, |m, (_, _, v)| m.max(v.abs()));
        assert!(worst < 1e-12);
        assert_eq!(a.k_area.to_dense(), b.k_area.to_dense());
    }

    #[test]
    fn modes_are_admissible_and_positive() {
        let p = problem(8, 0.5);
        let s = solve_micro(&p, 6).unwrap();
        assert!(s.modes[0].omega > 0.0);
        for v in &s.vectors {
            assert!(p.constraint_violation(v) < 1e-12);
        }
    }
}
