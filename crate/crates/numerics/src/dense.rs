use crate::Real;

/// Eigen decomposition of a small dense symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetricEigen<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Row-major; column `k` is the eigenvector of `values[k]`.
    pub vectors: Vec<T>,
}

/// Cyclic Jacobi rotations on a row-major symmetric `n x n` matrix.
/// Intended for the 2x2 and 3x3 tensors of the elasticity code.
pub fn symmetric_eigen<T: Real>(n: usize, a: &[T]) -> DenseSymmetricEigen<T> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    for _sweep in 0..64 {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        let diag: T = (0..n).map(|i| m[i * n + i] * m[i * n + i]).sum();
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| {
        m[x * n + x]
            .partial_cmp(&m[y * n + y])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = idx.iter().map(|&k| m[k * n + k]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (nk, &k) in idx.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + nk] = v[i * n + k];
        }
    }
    DenseSymmetricEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_by_three_reconstructs() {
        let a = [4.0, 1.0, -2.0, 1.0, 2.0, 0.5, -2.0, 0.5, 3.0];
        let e = symmetric_eigen(3, &a);
        for k in 0..3 {
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| a[i * 3 + j] * e.vectors[j * 3 + k]).sum();
                assert!((av - e.values[k] * e.vectors[i * 3 + k]).abs() < 1e-12);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = e.values.iter().sum();
        assert!((trace - 9.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_input_is_untouched() {
        let e = symmetric_eigen(2, &[3.0f64, 0.0, 0.0, -1.0]);
        assert_eq!(e.values, vec![-1.0, 3.0]);
    }
}
