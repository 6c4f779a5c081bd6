use homog_core::direct::{min_nfine, two_scale_distance, BoundaryMode, EpsProblem};
use homog_core::experiment::{default_source, Setup};
use homog_core::geometry::FrameworkGraph;
use homog_core::homogenised::{solve_homogenised, MacroProblem};
use homog_core::materials::ElasticTensor;

fn mats() -> (ElasticTensor<f64>, ElasticTensor<f64>) {
    (ElasticTensor::new(0.0, 0.1).unwrap(), ElasticTensor::new(1.0, 1.0).unwrap())
}

fn build(name: &str, cells: usize, nf: usize, mode: BoundaryMode) -> EpsProblem {
    let (a0, a1) = mats();
    EpsProblem::build(&FrameworkGraph::preset(name).unwrap(), cells, 0.4, nf, mode, &a0, &a1).unwrap()
}

#[test]
fn measure_totals() {
    for cells in [2, 4, 8] {
        let p = build("grid-diag", cells, min_nfine(0.4, cells), BoundaryMode::Stiff);
        assert!((p.total_measure() - 1.0).abs() < 1e-6, "{cells}: {}", p.total_measure());
    }
}

#[test]
fn soft_part_carries_eps_squared() {
    let p = build("grid", 4, 20, BoundaryMode::Plain);
    let e = p.eps();
    let d = p.k_stiff.linear_combination(1.0, &p.k_soft, e * e).unwrap();
    let diff = d.linear_combination(1.0, &p.system.k, -1.0).unwrap();
    assert!(diff.iter_lower().all(|(_, _, v)| v.abs() <= 1e-14));
}

#[test]
fn stiff_mode_removes_soft_coefficient_near_the_boundary() {
    let plain = build("grid-diag", 4, 20, BoundaryMode::Plain);
    let stiff = build("grid-diag", 4, 20, BoundaryMode::Stiff);
    // A bump supported in the first column of cells.
    let bump = |x: [f64; 2]| {
        let b = if x[0] < 0.25 { (4.0 * std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin() } else { 0.0 };
        [b, 0.5 * b]
    };
    let field = plain.system.interpolate(bump);
    let interior: Vec<f64> = plain.system.interior().iter().flat_map(|&v| [field[2 * v], field[2 * v + 1]]).collect();
    assert!(plain.k_soft.bilinear(&interior, &interior) > 0.0);
    assert!(stiff.k_soft.bilinear(&interior, &interior).abs() < 1e-14);
    assert!((stiff.total_measure() - plain.total_measure()).abs() < 1e-14);
}

#[test]
fn zero_source_and_symmetry() {
    let p = build("grid-diag", 2, 12, BoundaryMode::Plain);
    let zero = p.solve_source(|_| [0.0, 0.0]).unwrap();
    assert!(zero.u.iter().all(|&x| x == 0.0));
    let s = p.solve_source(default_source).unwrap();
    assert!(s.residual <= 1e-10);
    // f is even under x₂ ↦ 1 − x₂ with zero second component.
    let mesh = &p.system.mesh;
    let scale = s.u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for v in 0..mesh.num_vertices() {
        let x = mesh.vertex_position(v);
        let mut u = [0.0; 2];
        mesh.interpolate(&s.u, 2, [x[0], 1.0 - x[1]], &mut u);
        assert!((u[0] - s.u[2 * v]).abs() <= 1e-8 * scale);
        assert!((u[1] + s.u[2 * v + 1]).abs() <= 1e-8 * scale);
    }
}

#[test]
fn eigenvalues_are_positive_and_monotone_in_soft_stiffness() {
    let g = FrameworkGraph::preset("grid-diag").unwrap();
    let a1 = ElasticTensor::new(1.0, 1.0).unwrap();
    let soft = ElasticTensor::new(0.0, 0.05).unwrap();
    let (a0, _) = mats();
    let p1 = EpsProblem::build(&g, 2, 0.4, 12, BoundaryMode::Stiff, &a0, &a1).unwrap();
    let p2 = EpsProblem::build(&g, 2, 0.4, 12, BoundaryMode::Stiff, &soft, &a1).unwrap();
    let w1 = p1.solve_spectrum(6).unwrap();
    let w2 = p2.solve_spectrum(6).unwrap();
    for (a, b) in w1.omegas.iter().zip(&w2.omegas) {
        assert!(*b > 0.0 && b <= a);
    }
    assert!(w1.residuals.iter().all(|&r| r <= 1e-8));
}

// ε = 1/4, θ = 0.4: n_fine = 20 is the coarsest mesh with two elements
// across the half-width, so 16 → 32 becomes 20 → 40.
fn refinement_check(name: &str) {
    let coarse = build(name, 4, 20, BoundaryMode::Stiff).solve_spectrum(6).unwrap();
    let fine = build(name, 4, 40, BoundaryMode::Stiff).solve_spectrum(6).unwrap();
    let changes: Vec<f64> = coarse.omegas.iter().zip(&fine.omegas).map(|(a, b)| (a - b).abs() / b).collect();
    assert!(
        changes.iter().all(|&c| c <= 0.02),
        "{name}: coarse {:?} fine {:?} relative changes {changes:?}",
        coarse.omegas,
        fine.omegas
    );
}

#[test]
fn refinement_changes_low_eigenvalues_little_grid() {
    refinement_check("grid");
}

#[test]
fn refinement_changes_low_eigenvalues_little_grid_diag() {
    refinement_check("grid-diag");
}

#[test]
fn distance_vanishes_on_the_sampled_macro_field() {
    let s = Setup {
        graph: FrameworkGraph::preset("grid-diag").unwrap(),
        a0: mats().0,
        a1: mats().1,
        theta: 0.4,
        micro_n: 8,
        modes: 4,
        macro_n: 8,
        macro_k: 4,
    };
    let (micro, spec) = s.micro().unwrap();
    let mp = MacroProblem::new(&s.ahom().unwrap(), 8).unwrap();
    let hom = solve_homogenised(&mp, &micro, &spec.truncated(0), default_source).unwrap();
    let p = build("grid-diag", 2, 12, BoundaryMode::Plain);
    // The fine crossed mesh refines the macro one, so the P1 field is exact.
    let mesh = &p.system.mesh;
    let mut u = vec![0.0; 2 * mesh.num_vertices()];
    for v in 0..mesh.num_vertices() {
        let mut w = [0.0; 2];
        hom.mesh.interpolate(&hom.u0, 2, mesh.vertex_position(v), &mut w);
        u[2 * v] = w[0];
        u[2 * v + 1] = w[1];
    }
    assert!(two_scale_distance(&p, &u, &hom, &micro) < 1e-10);
}
