use homog_core::fem::{hermite_mass, hermite_stiffness};
use nalgebra::DMatrix;

/// First positive root of `cos k cosh k = 1`.
fn clamped_root() -> f64 {
    let f = |k: f64| k.cos() * k.cosh() - 1.0;
    let (mut lo, mut hi) = (4.0, 5.0);
    assert!(f(lo) * f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lowest eigenvalue of `w'''' = κ w` on a clamped unit beam with `elements` Hermite segments.
pub fn clamped_beam(elements: usize) -> f64 {
    let len = 1.0 / elements as f64;
    let n = 2 * (elements + 1);
    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut m = DMatrix::<f64>::zeros(n, n);
    let (ke, me) = (hermite_stiffness(len, 1.0), hermite_mass(len));
    for e in 0..elements {
        for i in 0..4 {
            for j in 0..4 {
                k[(2 * e + i, 2 * e + j)] += ke[i][j];
                m[(2 * e + i, 2 * e + j)] += me[i][j];
            }
        }
    }
    // Clamp both ends: drop w and w' at the first and last node.
    let keep: Vec<usize> = (2..n - 2).collect();
    let k = k.select_rows(&keep).select_columns(&keep);
    let m = m.select_rows(&keep).select_columns(&keep);
    let l = m.cholesky().unwrap().l();
    let li = l.clone().try_inverse().unwrap();
    let a = &li * k * li.transpose();
    let a = (&a + a.transpose()) * 0.5;
    a.symmetric_eigen().eigenvalues.min()
}

#[test]
fn clamped_beam_first_eigenvalue() {
    let root = clamped_root();
    assert!((root - 4.73004074).abs() < 1e-8);
    let exact = root.powi(4);
    let kappa = clamped_beam(64);
    assert!((kappa - exact).abs() / exact < 5e-3, "{kappa} vs {exact}");
}
