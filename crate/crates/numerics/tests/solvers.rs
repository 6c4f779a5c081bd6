use homog_numerics::{
    smallest_eigpairs, EigenOptions, Factor, LdlFactor, SparseMatrix, SparseSymmetric, TripletBuilder,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Small xorshift generator so the fixtures do not depend on a rand crate.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Random sparse SPD matrix: a random sparse symmetric pattern made
/// diagonally dominant.
fn random_spd(n: usize, per_row: usize, seed: u64) -> SparseMatrix {
    let mut rng = Rng(seed | 1);
    let mut b = TripletBuilder::new(n);
    let mut rowsum = vec![0.0; n];
    for i in 0..n {
        for _ in 0..per_row {
            let j = (rng.next() * n as f64) as usize % n;
            if j == i {
                continue;
            }
            let v = rng.next() - 0.5;
            b.push(i, j, v);
            rowsum[i] += v.abs();
            rowsum[j] += v.abs();
        }
    }
    for (i, s) in rowsum.iter().enumerate() {
        b.push(i, i, s + 0.5 + rng.next());
    }
    b.build().unwrap()
}

fn dense(a: &SparseMatrix) -> DMatrix<f64> {
    let n = a.dim();
    DMatrix::from_row_slice(n, n, &a.to_dense())
}

#[test]
fn random_spd_matches_dense_oracle() {
    let a = random_spd(200, 4, 7);
    let mut rng = Rng(99);
    let b: Vec<f64> = (0..200).map(|_| rng.next() - 0.5).collect();
    let x = LdlFactor::new(&a).unwrap().solve_refined(&a, &b);
    let oracle = dense(&a).lu().solve(&DVector::from_vec(b.clone())).unwrap();
    let err = (DVector::from_vec(x) - &oracle).norm() / oracle.norm();
    assert!(err <= 1e-10, "relative error {err:e}");
}

#[test]
fn refined_solve_meets_residual_target() {
    let a = random_spd(500, 6, 3);
    let b: Vec<f64> = (0..500).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
    let f = Factor::new(&a).unwrap();
    let x = f.solve_refined(&a, &b);
    let ax = a.mul_vec(&x);
    let r: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(r / bn <= 1e-12, "{:e}", r / bn);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn factor_solve_round_trip(seed in 1u64..u64::MAX, n in 5usize..80) {
        let a = random_spd(n, 3, seed);
        let mut rng = Rng(seed.rotate_left(7) | 1);
        let x_true: Vec<f64> = (0..n).map(|_| rng.next() - 0.5).collect();
        let b = a.mul_vec(&x_true);
        let x = LdlFactor::new(&a).unwrap().solve(&b);
        let err: f64 = x.iter().zip(&x_true).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let nrm: f64 = x_true.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(err / nrm <= 1e-10);
    }
}

fn laplacian_1d(n: usize) -> SparseMatrix {
    let h = 1.0 / (n + 1) as f64;
    let mut b = TripletBuilder::new(n);
    for i in 0..n {
        b.push(i, i, 2.0 / (h * h));
        if i + 1 < n {
            b.push(i + 1, i, -1.0 / (h * h));
        }
    }
    b.build().unwrap()
}

#[test]
fn dirichlet_laplacian_matches_exact_discrete_spectrum() {
    let n = 200;
    let big_n = (n + 1) as f64;
    let k = laplacian_1d(n);
    let m = SparseSymmetric::identity(n);
    let r = smallest_eigpairs(&k, &m, 4, &EigenOptions::default()).unwrap();
    for (i, &v) in r.values.iter().enumerate() {
        let kk = (i + 1) as f64;
        let exact = 4.0 * big_n * big_n * (kk * std::f64::consts::PI / (2.0 * big_n)).sin().powi(2);
        assert!((v - exact).abs() <= 1e-10 * exact, "mode {i}: {v} vs {exact}");
        assert!(r.residuals[i] <= 1e-8);
    }
    // Discretisation error bound against the continuum value.
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((r.values[0] - pi2).abs() < 1e-3);
}

#[test]
fn generalized_pencil_against_dense_oracle() {
    let k = random_spd(60, 3, 11);
    let mut mb = TripletBuilder::new(60);
    for i in 0..60 {
        mb.push(i, i, 1.0 + (i % 5) as f64 * 0.25);
        if i + 1 < 60 {
            mb.push(i + 1, i, 0.1);
        }
    }
    let m = mb.build().unwrap();
    let r = smallest_eigpairs(&k, &m, 6, &EigenOptions::default()).unwrap();
    // Oracle: symmetric reduction L⁻¹ K L⁻ᵀ with the dense Cholesky of M.
    let l = dense(&m).cholesky().unwrap();
    let linv = l.l().try_inverse().unwrap();
    let c = &linv * dense(&k) * linv.transpose();
    let mut ev: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for i in 0..6 {
        assert!((r.values[i] - ev[i]).abs() <= 1e-10 * ev[i], "{} vs {}", r.values[i], ev[i]);
    }
    assert!(r.orthonormality_error(&m) <= 1e-8);
}

#[test]
fn eigensolver_is_deterministic() {
    let k = laplacian_1d(150);
    let m = SparseSymmetric::identity(150);
    let a = smallest_eigpairs(&k, &m, 5, &EigenOptions::default()).unwrap();
    let b = smallest_eigpairs(&k, &m, 5, &EigenOptions::default()).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn block_diagonal_multiplicity_is_resolved() {
    // Two uncoupled copies of the same Laplacian: every eigenvalue is double.
    let n = 40;
    let base = laplacian_1d(n);
    let mut b = TripletBuilder::new(2 * n);
    for (r, c, v) in base.iter_lower() {
        b.push(r, c, v);
        b.push(r + n, c + n, v);
    }
    let k = b.build().unwrap();
    let m = SparseSymmetric::identity(2 * n);
    let r = smallest_eigpairs(&k, &m, 4, &EigenOptions::default()).unwrap();
    assert!((r.values[0] - r.values[1]).abs() <= 1e-9 * r.values[0]);
    assert!((r.values[2] - r.values[3]).abs() <= 1e-9 * r.values[2]);
    assert!(r.values[2] > r.values[1] * 1.5);
    assert!(r.orthonormality_error(&m) <= 1e-8);
}
