//! End-to-end runs: limit spectrum and homogenised solution for one
//! configuration, then the direct ε-problems of a ladder compared against it.

use crate::cell_homog::compute_ahom;
use crate::direct::{hausdorff_residual, min_nfine, two_scale_distance, BoundaryMode, EpsProblem};
use crate::error::Error;
use crate::geometry::{CellMesh, FrameworkGraph, Point};
use crate::homogenised::{macro_spectrum, solve_homogenised, HomogenisedSolution, MacroProblem};
use crate::limit::{assemble_bands, BandStructure, BetaFunction};
use crate::materials::{ElasticTensor, MacroTensor};
use crate::micro::{solve_micro, MicroProblem, MicroSpectrum};
use serde::Serialize;

/// The source used by the convergence study, `(sin πx₁ sin πx₂, 0)`.
pub fn default_source(x: Point) -> [f64; 2] {
    use std::f64::consts::PI;
    [(PI * x[0]).sin() * (PI * x[1]).sin(), 0.0]
}

#[derive(Debug, Clone)]
pub struct Setup {
    pub graph: FrameworkGraph,
    pub a0: ElasticTensor<f64>,
    pub a1: ElasticTensor<f64>,
    pub theta: f64,
    /// Cell mesh subdivisions.
    pub micro_n: usize,
    /// Micro modes kept in `β` and in the source solve.
    pub modes: usize,
    pub macro_n: usize,
    pub macro_k: usize,
}

impl Setup {
    pub fn ahom(&self) -> Result<MacroTensor<f64>, Error> {
        compute_ahom(&self.graph, &self.a1)
    }

    pub fn micro_problem(&self) -> Result<MicroProblem, Error> {
        let mesh = CellMesh::new(&self.graph, self.micro_n)?;
        MicroProblem::assemble(mesh, &self.graph, &self.a0, &self.a1, self.theta)
    }

    /// One mode beyond `modes` so the last kept cluster can be checked.
    pub fn micro(&self) -> Result<(MicroProblem, MicroSpectrum), Error> {
        let p = self.micro_problem()?;
        let count = (self.modes + 1).min(p.free_dim());
        let s = solve_micro(&p, count)?;
        Ok((p, s))
    }

    pub fn beta(&self, spectrum: &MicroSpectrum) -> BetaFunction {
        BetaFunction::new(spectrum, self.modes, self.graph.is_symmetric())
    }

    /// Macro spectrum from `A^hom`, or the supplied list.
    pub fn lambda(&self, supplied: Option<&[f64]>) -> Result<Vec<f64>, Error> {
        match supplied {
            Some(l) => Ok(l.to_vec()),
            None => macro_spectrum(&MacroProblem::new(&self.ahom()?, self.macro_n)?, self.macro_k),
        }
    }

    pub fn bands(&self, spectrum: &MicroSpectrum, supplied: Option<&[f64]>) -> Result<BandStructure, Error> {
        let lambda = self.lambda(supplied)?;
        assemble_bands(&self.beta(spectrum), &lambda)
    }

    pub fn homogenised(
        &self,
        micro: &MicroProblem,
        spectrum: &MicroSpectrum,
        f: impl Fn(Point) -> [f64; 2],
    ) -> Result<HomogenisedSolution, Error> {
        let mp = MacroProblem::new(&self.ahom()?, self.macro_n)?;
        solve_homogenised(&mp, micro, &spectrum.truncated(self.modes), f)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub n_fine: usize,
    pub dofs: usize,
    pub distance: f64,
    pub energy: f64,
    pub energy_gap: f64,
    pub r_fwd: f64,
    pub r_bwd: f64,
    pub omegas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Convergence {
    pub energy_hom: f64,
    pub rows: Vec<ConvergenceRow>,
}

/// `n_fine` actually used: the request raised to resolve the rods.
pub fn effective_nfine(theta: f64, cells: usize, requested: Option<usize>) -> usize {
    let min = min_nfine(theta, cells);
    requested.map_or(min, |r| r.max(min) + r.max(min) % 2)
}

/// Direct solves along the ladder `ε = 1/k`, compared with the limit.
pub fn run_ladder(
    setup: &Setup,
    ladder: &[usize],
    n_fine: Option<usize>,
    mode: BoundaryMode,
    direct_modes: usize,
    f: impl Fn(Point) -> [f64; 2] + Copy,
) -> Result<Convergence, Error> {
    let (micro, spectrum) = setup.micro()?;
    let bands = setup.bands(&spectrum, None)?;
    let hom = setup.homogenised(&micro, &spectrum, f)?;
    let skeleton = bands.skeleton();
    let mut rows = Vec::with_capacity(ladder.len());
    for &k in ladder {
        let nf = effective_nfine(setup.theta, k, n_fine);
        let p = EpsProblem::build(&setup.graph, k, setup.theta, nf, mode, &setup.a0, &setup.a1)?;
        let sol = p.solve_source(f)?;
        let distance = two_scale_distance(&p, &sol.u, &hom, &micro);
        let sp = p.solve_spectrum(direct_modes)?;
        let (r_fwd, r_bwd) = hausdorff_residual(&sp.omegas, &skeleton);
        rows.push(ConvergenceRow {
            eps: 1.0 / k as f64,
            n_fine: nf,
            dofs: p.dofs(),
            distance,
            energy: sol.energy(),
            energy_gap: (sol.energy() - hom.energy).abs(),
            r_fwd,
            r_bwd,
            omegas: sp.omegas,
        });
    }
    Ok(Convergence {
        energy_hom: hom.energy,
        rows,
    })
}
