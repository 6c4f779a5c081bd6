use crate::ordering::nested_dissection;
use crate::{NumericsError, Real, Result, SparseSymmetric};

/// Sparse `P A Pᵀ = L D Lᵀ` factorisation without pivoting.
///
/// Valid for definite and quasi-definite matrices; a pivot that vanishes
/// relative to the matrix scale is reported as [`NumericsError::ZeroPivot`].
/// The ordering is a nested dissection of the matrix graph.
#[derive(Debug, Clone)]
pub struct LdlFactor<T> {
    dim: usize,
    perm: Vec<usize>,
    /// Strictly lower factor by columns.
    l_ptr: Vec<usize>,
    l_idx: Vec<u32>,
    l_val: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> LdlFactor<T> {
    pub fn new(a: &SparseSymmetric<T>) -> Result<Self> {
        let (aptr, aadj) = a.adjacency();
        let perm = nested_dissection(&aptr, &aadj);
        Self::with_ordering(a, perm)
    }

    /// Factorises with a caller-supplied elimination order
    /// (`perm[k]` = original index eliminated k-th).
    pub fn with_ordering(a: &SparseSymmetric<T>, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        if perm.len() != n {
            return Err(NumericsError::DimensionMismatch {
                expected: n,
                got: perm.len(),
            });
        }
        let mut pinv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }
        let (cptr, crow, cval) = a.full_columns();

        // Symbolic: elimination tree and column counts.
        let mut parent = vec![usize::MAX; n];
        let mut flag = vec![usize::MAX; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            let kk = perm[k];
            for &r in &crow[cptr[kk]..cptr[kk + 1]] {
                let mut i = pinv[r];
                if i < k {
                    while flag[i] != k {
                        if parent[i] == usize::MAX {
                            parent[i] = k;
                        }
                        lnz[i] += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                }
            }
        }
        let mut l_ptr = vec![0usize; n + 1];
        for k in 0..n {
            l_ptr[k + 1] = l_ptr[k] + lnz[k];
        }
        let total = l_ptr[n];
        let mut l_idx = vec![0u32; total];
        let mut l_val = vec![T::zero(); total];
        let mut d = vec![T::zero(); n];

        // Matrix scale for the pivot test.
        let scale = cval.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let pivot_tol = scale * T::epsilon() * T::lit(16.0);

        // Numeric: up-looking, one row of L per step.
        let mut y = vec![T::zero(); n];
        let mut pattern = vec![0usize; n];
        lnz.iter_mut().for_each(|c| *c = 0);
        flag.iter_mut().for_each(|f| *f = usize::MAX);
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            let kk = perm[k];
            for (p, &r) in crow[cptr[kk]..cptr[kk + 1]].iter().enumerate() {
                let mut i = pinv[r];
                if i > k {
                    continue;
                }
                y[i] += cval[cptr[kk] + p];
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            let mut dk = y[k];
            y[k] = T::zero();
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = T::zero();
                let start = l_ptr[i];
                let end = start + lnz[i];
                for p in start..end {
                    let r = l_idx[p] as usize;
                    y[r] -= l_val[p] * yi;
                }
                let lki = yi / d[i];
                dk -= lki * yi;
                l_idx[end] = k as u32;
                l_val[end] = lki;
                lnz[i] += 1;
            }
            if dk.abs() <= pivot_tol || !dk.is_finite() {
                return Err(NumericsError::ZeroPivot { index: k, row: kk });
            }
            d[k] = dk;
        }
        Ok(Self {
            dim: n,
            perm,
            l_ptr,
            l_idx,
            l_val,
            d,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored entries of the strictly lower factor.
    pub fn factor_nnz(&self) -> usize {
        self.l_val.len()
    }

    /// Number of negative pivots, i.e. the count of negative eigenvalues.
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|v| **v < T::zero()).count()
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        assert_eq!(b.len(), self.dim);
        let n = self.dim;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            if xj != T::zero() {
                for p in self.l_ptr[j]..self.l_ptr[j + 1] {
                    x[self.l_idx[p] as usize] -= self.l_val[p] * xj;
                }
            }
        }
        for j in 0..n {
            x[j] /= self.d[j];
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.l_ptr[j]..self.l_ptr[j + 1] {
                s -= self.l_val[p] * x[self.l_idx[p] as usize];
            }
            x[j] = s;
        }
        for (k, &p) in self.perm.iter().enumerate() {
            b[p] = x[k];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Solve followed by one step of iterative refinement against `a`.
    pub fn solve_refined(&self, a: &SparseSymmetric<T>, b: &[T]) -> Vec<T> {
        let mut x = self.solve(b);
        let ax = a.mul_vec(&x);
        let mut r: Vec<T> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
        self.solve_in_place(&mut r);
        x.iter_mut().zip(&r).for_each(|(xi, ri)| *xi += *ri);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TripletBuilder;

    #[test]
    fn identity_solve_returns_rhs() {
        let a = SparseSymmetric::<f64>::identity(5);
        let f = LdlFactor::new(&a).unwrap();
        let b = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(f.solve(&b), b.to_vec());
    }

    #[test]
    fn two_by_two_by_hand() {
        let a = SparseSymmetric::<f64>::from_dense(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let f = LdlFactor::new(&a).unwrap();
        let x = f.solve(&[1.0, 1.0]);
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let a = SparseSymmetric::from_dense(2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        let err = LdlFactor::with_ordering(&a, vec![0, 1]).unwrap_err();
        assert_eq!(err, NumericsError::ZeroPivot { index: 1, row: 1 });
    }

    #[test]
    fn indefinite_quasi_definite_counts_negative_pivots() {
        // [[2, 1], [1, -3]] has one negative eigenvalue.
        let mut b = TripletBuilder::new(2);
        b.push(0, 0, 2.0);
        b.push(1, 0, 1.0);
        b.push(1, 1, -3.0);
        let f = LdlFactor::new(&b.build().unwrap()).unwrap();
        assert_eq!(f.negative_pivots(), 1);
    }

    #[test]
    fn single_precision_instantiation() {
        let a = SparseSymmetric::<f32>::from_dense(2, &[4.0, 1.0, 1.0, 3.0]).unwrap();
        let x = LdlFactor::new(&a).unwrap().solve(&[1.0, 2.0]);
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-6);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-6);
    }
}
