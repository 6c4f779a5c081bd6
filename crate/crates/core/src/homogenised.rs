//! Macroscopic Dirichlet problem for `A^hom` on the unit square and the
//! coupled two-scale source problem, reduced onto the micro eigenbasis.

use crate::error::Error;
use crate::fem::DirichletSystem;
use crate::geometry::{Point, SquareMesh};
use crate::materials::MacroTensor;
use crate::micro::{MicroProblem, MicroSpectrum};
use homog_numerics::{smallest_eigpairs, EigenOptions, LdlFactor};

#[derive(Debug, Clone)]
pub struct MacroProblem {
    pub ahom: MacroTensor<f64>,
    pub system: DirichletSystem,
}

impl MacroProblem {
    /// Refuses degenerate tensors.
    pub fn new(ahom: &MacroTensor<f64>, n: usize) -> Result<Self, Error> {
        if !ahom.is_elliptic() {
            return Err(Error::NotElliptic(ahom.ellipticity));
        }
        if n < 2 {
            return Err(crate::error::invalid("macro_n", "need at least 2 subsquares"));
        }
        let d = ahom.voigt;
        let system = DirichletSystem::assemble(SquareMesh::new(n), |_| (d, 1.0))?;
        Ok(Self { ahom: ahom.clone(), system })
    }
}

const IDENTITY: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

/// Lowest `k` eigenvalues of `−div A^hom e(u) = Λu`.
pub fn macro_spectrum(problem: &MacroProblem, k: usize) -> Result<Vec<f64>, Error> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let m = problem.system.interior_mass(IDENTITY)?;
    let opts = EigenOptions::default();
    let r = smallest_eigpairs(&problem.system.k, &m, k, &opts)?;
    if let Some(&worst) = r.residuals.iter().max_by(|a, b| a.total_cmp(b)) {
        if worst > opts.tol {
            return Err(Error::Residual { residual: worst, tol: opts.tol });
        }
    }
    Ok(r.values)
}

/// `S = Σ ⟨φₙ⟩⊗⟨φₙ⟩/(1 + ωₙ)`.
pub fn coupling_matrix(spectrum: &MicroSpectrum) -> [[f64; 2]; 2] {
    let mut s = [[0.0; 2]; 2];
    for m in &spectrum.modes {
        for r in 0..2 {
            for c in 0..2 {
                s[r][c] += m.avg[r] * m.avg[c] / (1.0 + m.omega);
            }
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct HomogenisedSolution {
    /// Macro field on all vertices, interleaved components.
    pub u0: Vec<f64>,
    /// `cₙ` on all vertices, one scalar per vertex.
    pub coeffs: Vec<Vec<f64>>,
    /// Micro mode displacements on the cell mesh vertices.
    modes: Vec<Vec<f64>>,
    pub mesh: SquareMesh,
    /// `∫A^hom e(u₀)·e(u₀) + Σ ωₙ ∫cₙ²`.
    pub energy: f64,
    /// Relative residual of the discrete two-scale identity.
    pub residual: f64,
}

impl HomogenisedSolution {
    /// `u₀(x) + Σ cₙ(x) φₙ(x/ε)`.
    pub fn reconstruct(&self, micro: &MicroProblem, x: Point, eps: f64) -> [f64; 2] {
        let mut u = [0.0; 2];
        self.mesh.interpolate(&self.u0, 2, x, &mut u);
        if self.coeffs.is_empty() {
            return u;
        }
        let y = [(x[0] / eps).rem_euclid(1.0), (x[1] / eps).rem_euclid(1.0)];
        let mut c = [0.0];
        for (coef, phi) in self.coeffs.iter().zip(&self.modes) {
            self.mesh.interpolate(coef, 1, x, &mut c);
            let p = micro.evaluate(phi, y);
            u[0] += c[0] * p[0];
            u[1] += c[0] * p[1];
        }
        u
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves the two-scale source problem with the first `spectrum.modes`
/// micro modes and source `f(x)`.
pub fn solve_homogenised(
    problem: &MacroProblem,
    micro: &MicroProblem,
    spectrum: &MicroSpectrum,
    f: impl Fn(Point) -> [f64; 2],
) -> Result<HomogenisedSolution, Error> {
    let sys = &problem.system;
    let nv = sys.mesh.num_vertices();
    let s = coupling_matrix(spectrum);
    let t = [[1.0 - s[0][0], -s[0][1]], [-s[1][0], 1.0 - s[1][1]]];

    let fh = sys.interpolate(&f);
    let a = sys.k.linear_combination(1.0, &sys.interior_mass(t)?, 1.0)?;
    let rhs = sys.load(&fh, t);
    let factor = LdlFactor::new(&a)?;
    let u = factor.solve_refined(&a, &rhs);
    let u0 = sys.expand(&u);

    let modes = &spectrum.modes;
    let coeffs: Vec<Vec<f64>> = modes
        .iter()
        .map(|m| {
            (0..nv)
                .map(|v| {
                    let d = [fh[2 * v] - u0[2 * v], fh[2 * v + 1] - u0[2 * v + 1]];
                    (m.avg[0] * d[0] + m.avg[1] * d[1]) / (1.0 + m.omega)
                })
                .collect()
        })
        .collect();

    let mut energy = sys.k.bilinear(&u, &u);
    for (m, c) in modes.iter().zip(&coeffs) {
        energy += m.omega * sys.mass.bilinear(c, c);
    }

    // Residual of the discrete identity tested with macro hat functions
    // and with x-hats times micro modes, using the micro matrices directly.
    let n = modes.len();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        let kv = micro.k.mul_vec(&spectrum.vectors[i]);
        let mv = micro.m.mul_vec(&spectrum.vectors[i]);
        for j in 0..n {
            let pj = &spectrum.vectors[j];
            g[i * n + j] = kv.iter().zip(pj).map(|(a, b)| a * b).sum::<f64>()
                + mv.iter().zip(pj).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    let mut field = u0.clone();
    for (m, c) in modes.iter().zip(&coeffs) {
        for v in 0..nv {
            field[2 * v] += m.avg[0] * c[v];
            field[2 * v + 1] += m.avg[1] * c[v];
        }
    }
    for (x, fx) in field.iter_mut().zip(&fh) {
        *x -= fx;
    }
    let mut r_macro = sys.k.mul_vec(&u);
    for (r, l) in r_macro.iter_mut().zip(sys.load(&field, IDENTITY)) {
        *r += l;
    }
    let b_macro = sys.load(&fh, IDENTITY);

    let mut r_micro = Vec::with_capacity(n * nv);
    let mut b_micro = Vec::with_capacity(n * nv);
    for (mi, m) in modes.iter().enumerate() {
        let mut inner = vec![0.0; nv];
        let mut load = vec![0.0; nv];
        for v in 0..nv {
            let mut x = 0.0;
            for (nj, c) in coeffs.iter().enumerate() {
                x += g[mi * n + nj] * c[v];
            }
            x += m.avg[0] * (u0[2 * v] - fh[2 * v]) + m.avg[1] * (u0[2 * v + 1] - fh[2 * v + 1]);
            inner[v] = x;
            load[v] = m.avg[0] * fh[2 * v] + m.avg[1] * fh[2 * v + 1];
        }
        r_micro.extend(sys.mass.mul_vec(&inner));
        b_micro.extend(sys.mass.mul_vec(&load));
    }
    let scale = (norm(&b_macro).powi(2) + norm(&b_micro).powi(2)).sqrt();
    let res = (norm(&r_macro).powi(2) + norm(&r_micro).powi(2)).sqrt();
    let residual = if scale > 0.0 { res / scale } else { res };

    Ok(HomogenisedSolution {
        u0,
        coeffs,
        modes: spectrum.vectors.iter().map(|v| micro.displacement(v)).collect(),
        mesh: sys.mesh.clone(),
        energy,
        residual,
    })
}
