use crate::{NumericsError, Real, Result};

/// Symmetric sparse matrix stored as its lower triangle in compressed
/// sparse column form. Column `j` holds rows `i >= j`, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric<T> {
    dim: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<T>,
}

/// Coordinate-format accumulator. Entries may be pushed for either
/// triangle; duplicates are summed when the matrix is built.
#[derive(Debug, Clone)]
pub struct TripletBuilder<T> {
    dim: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> TripletBuilder<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, capacity: usize) -> Self {
        Self {
            dim,
            entries: Vec::with_capacity(capacity),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `value` at `(row, col)`. The mirrored entry is implied, so an
    /// off-diagonal coupling must be pushed once, not twice.
    pub fn push(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(row < self.dim && col < self.dim);
        let (r, c) = if row >= col { (row, col) } else { (col, row) };
        self.entries.push((r, c, value));
    }

    /// Scatters a dense symmetric element matrix through a local-to-global
    /// map. Only the lower triangle of `local` is read.
    pub fn add_element(&mut self, dofs: &[usize], local: &[T]) {
        let n = dofs.len();
        debug_assert_eq!(local.len(), n * n);
        for a in 0..n {
            for b in 0..=a {
                let v = local[a * n + b];
                if v != T::zero() {
                    self.push(dofs[a], dofs[b], v);
                }
            }
        }
    }

    pub fn build(mut self) -> Result<SparseSymmetric<T>> {
        for &(r, c, _) in &self.entries {
            if r >= self.dim || c >= self.dim {
                return Err(NumericsError::OutOfBounds {
                    row: r,
                    col: c,
                    dim: self.dim,
                });
            }
        }
        self.entries.sort_unstable_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut col_ptr = vec![0usize; self.dim + 1];
        let mut row_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<T> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for j in 0..self.dim {
            col_ptr[j + 1] += col_ptr[j];
        }
        SparseSymmetric {
            dim: self.dim,
            col_ptr,
            row_idx,
            values,
        }
        .drop_zeros()
    }
}

impl<T: Real> SparseSymmetric<T> {
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            col_ptr: (0..=dim).collect(),
            row_idx: (0..dim).collect(),
            values: vec![T::one(); dim],
        }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::identity(diag.len());
        m.values.copy_from_slice(diag);
        m
    }

    /// Builds from a dense row-major symmetric matrix (lower triangle read).
    pub fn from_dense(dim: usize, dense: &[T]) -> Result<Self> {
        if dense.len() != dim * dim {
            return Err(NumericsError::DimensionMismatch {
                expected: dim * dim,
                got: dense.len(),
            });
        }
        let mut b = TripletBuilder::new(dim);
        for i in 0..dim {
            for j in 0..=i {
                let v = dense[i * dim + j];
                if v != T::zero() {
                    b.push(i, j, v);
                }
            }
        }
        b.build()
    }

    fn drop_zeros(self) -> Result<Self> {
        if self.values.iter().all(|v| *v != T::zero()) {
            return Ok(self);
        }
        let mut b = Vec::with_capacity(self.values.len());
        for j in 0..self.dim {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                if self.values[p] != T::zero() {
                    b.push((self.row_idx[p], j, self.values[p]));
                }
            }
        }
        let mut col_ptr = vec![0usize; self.dim + 1];
        let mut row_idx = Vec::with_capacity(b.len());
        let mut values = Vec::with_capacity(b.len());
        for (r, c, v) in b {
            col_ptr[c + 1] += 1;
            row_idx.push(r);
            values.push(v);
        }
        for j in 0..self.dim {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(Self {
            dim: self.dim,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored lower-triangle entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(row, col, value)` over the stored lower triangle.
    pub fn iter_lower(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.dim).flat_map(move |j| {
            (self.col_ptr[j]..self.col_ptr[j + 1]).map(move |p| (self.row_idx[p], j, self.values[p]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        let (r, c) = if row >= col { (row, col) } else { (col, row) };
        let rows = &self.row_idx[self.col_ptr[c]..self.col_ptr[c + 1]];
        match rows.binary_search(&r) {
            Ok(k) => self.values[self.col_ptr[c] + k],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.iter_mut().for_each(|v| *v = T::zero());
        for j in 0..self.dim {
            let xj = x[j];
            let mut acc = T::zero();
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                let a = self.values[p];
                if i == j {
                    acc += a * xj;
                } else {
                    y[i] += a * xj;
                    acc += a * x[i];
                }
            }
            y[j] += acc;
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.dim];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| *a * *b).sum()
    }

    pub fn scaled(&self, alpha: T) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// `alpha * self + beta * other`.
    pub fn linear_combination(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        if other.dim != self.dim {
            return Err(NumericsError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut b = TripletBuilder::with_capacity(self.dim, self.nnz() + other.nnz());
        for (r, c, v) in self.iter_lower() {
            b.push(r, c, alpha * v);
        }
        for (r, c, v) in other.iter_lower() {
            b.push(r, c, beta * v);
        }
        b.build()
    }

    /// Congruence `Eᵀ A E` for a sparse embedding `E` given row-wise:
    /// `rows[i]` lists `(j, e_ij)` so that full entry `i` equals
    /// `Σ e_ij · reduced_j`.
    pub fn congruence(&self, rows: &[Vec<(usize, T)>], reduced_dim: usize) -> Result<Self> {
        if rows.len() != self.dim {
            return Err(NumericsError::DimensionMismatch {
                expected: self.dim,
                got: rows.len(),
            });
        }
        let mut b = TripletBuilder::with_capacity(reduced_dim, self.nnz() * 2);
        for (r, c, v) in self.iter_lower() {
            for &(a, ea) in &rows[r] {
                for &(bb, eb) in &rows[c] {
                    let w = v * ea * eb;
                    if r == c {
                        // (a, bb) and (bb, a) are the same stored entry.
                        if a >= bb {
                            b.push(a, bb, w);
                        }
                    } else if a == bb {
                        b.push(a, a, w + w);
                    } else {
                        b.push(a, bb, w);
                    }
                }
            }
        }
        b.build()
    }

    /// Both triangles in compressed column form, rows sorted.
    pub(crate) fn full_columns(&self) -> (Vec<usize>, Vec<usize>, Vec<T>) {
        let n = self.dim;
        let mut count = vec![0usize; n + 1];
        for (r, c, _) in self.iter_lower() {
            count[c + 1] += 1;
            if r != c {
                count[r + 1] += 1;
            }
        }
        for j in 0..n {
            count[j + 1] += count[j];
        }
        let nnz = count[n];
        let mut next = count.clone();
        let mut rows = vec![0usize; nnz];
        let mut vals = vec![T::zero(); nnz];
        // Upper part first (entries (c, r) with c < r land in column r),
        // iterating columns in order keeps every column sorted.
        for j in 0..n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                if i != j {
                    let q = next[i];
                    rows[q] = j;
                    vals[q] = self.values[p];
                    next[i] += 1;
                }
            }
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let q = next[j];
                rows[q] = self.row_idx[p];
                vals[q] = self.values[p];
                next[j] += 1;
            }
        }
        (count, rows, vals)
    }

    /// Off-diagonal adjacency structure (both directions), compressed.
    pub fn adjacency(&self) -> (Vec<usize>, Vec<usize>) {
        let (ptr, rows, _) = self.full_columns();
        let mut out_ptr = vec![0usize; self.dim + 1];
        let mut out = Vec::with_capacity(rows.len());
        for j in 0..self.dim {
            for &i in &rows[ptr[j]..ptr[j + 1]] {
                if i != j {
                    out.push(i);
                }
            }
            out_ptr[j + 1] = out.len();
        }
        (out_ptr, out)
    }

    /// Dense row-major copy, for tests and tiny problems.
    pub fn to_dense(&self) -> Vec<T> {
        let n = self.dim;
        let mut d = vec![T::zero(); n * n];
        for (r, c, v) in self.iter_lower() {
            d[r * n + c] = v;
            d[c * n + r] = v;
        }
        d
    }

    /// Principal submatrix on `keep` (indices into this matrix, ascending
    /// order not required). Row `k` of the result is `keep[k]`.
    pub fn submatrix(&self, keep: &[usize]) -> Result<Self> {
        let mut map = vec![usize::MAX; self.dim];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let mut b = TripletBuilder::with_capacity(keep.len(), self.nnz());
        for (r, c, v) in self.iter_lower() {
            let (mr, mc) = (map[r], map[c]);
            if mr != usize::MAX && mc != usize::MAX {
                b.push(mr, mc, v);
            }
        }
        b.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseSymmetric<f64> {
        let mut b = TripletBuilder::new(3);
        b.push(0, 0, 4.0);
        b.push(1, 0, 1.0);
        b.push(1, 1, 3.0);
        b.push(0, 2, 0.5); // upper triangle is folded down
        b.push(2, 2, 2.0);
        b.push(2, 2, 1.0); // duplicates sum
        b.build().unwrap()
    }

    #[test]
    fn builder_folds_and_sums() {
        let a = small();
        assert_eq!(a.get(2, 2), 3.0);
        assert_eq!(a.get(0, 2), 0.5);
        assert_eq!(a.get(2, 0), 0.5);
        assert_eq!(a.get(2, 1), 0.0);
        assert_eq!(a.nnz(), 5);
    }

    #[test]
    fn matvec_matches_dense() {
        let a = small();
        let d = a.to_dense();
        let x = [1.0, -2.0, 0.25];
        let y = a.mul_vec(&x);
        for i in 0..3 {
            let e: f64 = (0..3).map(|j| d[i * 3 + j] * x[j]).sum();
            assert!((y[i] - e).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_zeros_are_dropped() {
        let mut b = TripletBuilder::new(2);
        b.push(0, 0, 1.0);
        b.push(1, 0, 2.0);
        b.push(1, 0, -2.0);
        b.push(1, 1, 1.0);
        assert_eq!(b.build().unwrap().nnz(), 2);
    }

    #[test]
    fn out_of_bounds_is_reported() {
        let mut b = TripletBuilder::new(2);
        b.entries.push((2, 0, 1.0));
        assert!(matches!(b.build(), Err(NumericsError::OutOfBounds { .. })));
    }

    #[test]
    fn congruence_matches_dense_product() {
        let a = small();
        // E: 3x2, rows: [ (0,1.0) ], [ (0,0.5),(1,2.0) ], [ (1,-1.0) ]
        let rows = vec![vec![(0, 1.0)], vec![(0, 0.5), (1, 2.0)], vec![(1, -1.0)]];
        let r = a.congruence(&rows, 2).unwrap();
        let d = a.to_dense();
        let e = [[1.0, 0.0], [0.5, 2.0], [0.0, -1.0]];
        for p in 0..2 {
            for q in 0..2 {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += e[i][p] * d[i * 3 + j] * e[j][q];
                    }
                }
                assert!((r.get(p, q) - s).abs() < 1e-14, "{p}{q}: {} vs {s}", r.get(p, q));
            }
        }
    }

    #[test]
    fn full_columns_are_sorted_and_complete() {
        let a = small();
        let (ptr, rows, vals) = a.full_columns();
        assert_eq!(ptr[3], 7);
        for j in 0..3 {
            let col = &rows[ptr[j]..ptr[j + 1]];
            assert!(col.windows(2).all(|w| w[0] < w[1]));
            for (k, &i) in col.iter().enumerate() {
                assert_eq!(vals[ptr[j] + k], a.get(i, j));
            }
        }
    }
}
