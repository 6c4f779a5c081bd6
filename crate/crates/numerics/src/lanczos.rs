//! Shift-invert Lanczos for the generalized pencil `K x = λ M x`.
//!
//! The recurrence runs on `(K - σM)⁻¹ M` in the M-inner product with full
//! reorthogonalisation. Converged pairs are locked and the iteration is
//! restarted in their M-orthogonal complement, which recovers every copy
//! of a repeated eigenvalue; the run stops once a restart turns up nothing
//! below the wanted eigenvalues.

use crate::{tridiagonal_eigen, LdlFactor, NumericsError, Real, Result, SparseSymmetric};

#[derive(Debug, Clone)]
pub struct EigenOptions<T> {
    /// Spectral shift σ; must lie below the wanted eigenvalues.
    pub shift: T,
    /// Relative residual `‖Kx − λMx‖ / ‖Kx‖` each returned pair must meet.
    pub tol: T,
    /// Cap on Lanczos steps per restart.
    pub max_steps: usize,
    /// Cap on restarts.
    pub max_restarts: usize,
}

impl<T: Real> Default for EigenOptions<T> {
    fn default() -> Self {
        Self {
            shift: T::zero(),
            tol: T::lit(1e-8),
            max_steps: 400,
            max_restarts: 12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// `vectors[k]` is M-normalised.
    pub vectors: Vec<Vec<T>>,
    /// `‖Kx − λMx‖ / ‖Kx‖` per pair.
    pub residuals: Vec<T>,
}

impl<T: Real> EigenResult<T> {
    /// Largest `|x_iᵀ M x_j − δ_ij|` over returned pairs.
    pub fn orthonormality_error(&self, m: &SparseSymmetric<T>) -> T {
        let mx: Vec<Vec<T>> = self.vectors.iter().map(|x| m.mul_vec(x)).collect();
        let mut worst = T::zero();
        for i in 0..self.vectors.len() {
            for j in 0..self.vectors.len() {
                let g: T = dot(&self.vectors[i], &mx[j]);
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * *xi);
}

fn norm<T: Real>(x: &[T]) -> T {
    dot(x, x).sqrt()
}

/// Deterministic pseudo-random start vector.
fn start_vector<T: Real>(n: usize, round: usize) -> Vec<T> {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15 ^ (round as u64 + 1).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            T::lit((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        })
        .collect()
}

struct Locked<T> {
    vectors: Vec<Vec<T>>,
    m_vectors: Vec<Vec<T>>,
    values: Vec<T>,
    residuals: Vec<T>,
}

impl<T: Real> Locked<T> {
    /// Removes locked components from `w` in the M-inner product. `mw` is
    /// not required: `yᵀ M w = (M y)ᵀ w`.
    fn project_out(&self, w: &mut [T]) {
        for (y, my) in self.vectors.iter().zip(&self.m_vectors) {
            let c = dot(my, w);
            axpy(-c, y, w);
        }
    }
}

/// Lowest `nev` eigenpairs of `K x = λ M x` (K symmetric, M SPD).
pub fn smallest_eigpairs<T: Real>(
    k: &SparseSymmetric<T>,
    m: &SparseSymmetric<T>,
    nev: usize,
    opts: &EigenOptions<T>,
) -> Result<EigenResult<T>> {
    let n = k.dim();
    if m.dim() != n {
        return Err(NumericsError::DimensionMismatch {
            expected: n,
            got: m.dim(),
        });
    }
    if nev == 0 {
        return Ok(EigenResult {
            values: Vec::new(),
            vectors: Vec::new(),
            residuals: Vec::new(),
        });
    }
    if nev > n {
        return Err(NumericsError::TooManyEigenpairs { requested: nev, dim: n });
    }
    let shifted = if opts.shift == T::zero() {
        k.clone()
    } else {
        k.linear_combination(T::one(), m, -opts.shift)?
    };
    let factor = LdlFactor::new(&shifted)?;

    let mut locked = Locked {
        vectors: Vec::new(),
        m_vectors: Vec::new(),
        values: Vec::new(),
        residuals: Vec::new(),
    };
    let mut worst = T::zero();

    for round in 0..opts.max_restarts {
        let available = n - locked.vectors.len();
        if available == 0 {
            break;
        }
        let threshold = sorted_nth(&locked.values, nev);
        let want = if locked.values.len() >= nev {
            1
        } else {
            nev - locked.values.len() + 1
        }
        .min(available);
        let steps_cap = opts.max_steps.min(available);

        let mut found = lanczos_round(k, m, &factor, &locked, want, steps_cap, round)?;
        for _ in 0..POLISH_STEPS {
            if found.iter().all(|p| p.2 <= opts.tol) {
                break;
            }
            found = polish(k, m, &factor, &locked, &found)?;
        }
        if found.is_empty() {
            break;
        }
        let new_min = found
            .iter()
            .map(|p| p.0)
            .fold(T::infinity(), |a, b| a.min(b));
        let mut accepted = 0;
        for (lambda, x, res) in found {
            if res <= opts.tol {
                let mx = m.mul_vec(&x);
                locked.values.push(lambda);
                locked.vectors.push(x);
                locked.m_vectors.push(mx);
                locked.residuals.push(res);
                accepted += 1;
            } else {
                worst = worst.max(res);
            }
        }
        if accepted == 0 {
            break;
        }
        if let Some(th) = threshold {
            // Nothing new at or below the current nev-th value: done.
            let margin = th.abs() * T::lit(1e-10);
            if new_min > th + margin {
                break;
            }
        }
    }

    let mut idx: Vec<usize> = (0..locked.values.len()).collect();
    idx.sort_by(|&a, &b| {
        locked.values[a]
            .partial_cmp(&locked.values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    if idx.len() < nev {
        return Err(NumericsError::NotConverged {
            converged: idx.len(),
            requested: nev,
            worst_residual: worst.to_f64().unwrap_or(f64::NAN),
        });
    }
    idx.truncate(nev);
    Ok(EigenResult {
        values: idx.iter().map(|&i| locked.values[i]).collect(),
        vectors: idx.iter().map(|&i| locked.vectors[i].clone()).collect(),
        residuals: idx.iter().map(|&i| locked.residuals[i]).collect(),
    })
}

/// Subspace-iteration sweeps applied to Ritz vectors whose residual misses
/// the tolerance; each sweep damps the stiff components left by Lanczos.
const POLISH_STEPS: usize = 4;

/// One block inverse-iteration step followed by Rayleigh–Ritz.
fn polish<T: Real>(
    k: &SparseSymmetric<T>,
    m: &SparseSymmetric<T>,
    factor: &LdlFactor<T>,
    locked: &Locked<T>,
    pairs: &[(T, Vec<T>, T)],
) -> Result<Vec<(T, Vec<T>, T)>> {
    let mut basis: Vec<Vec<T>> = Vec::new();
    let mut mbasis: Vec<Vec<T>> = Vec::new();
    for (_, x, _) in pairs {
        let mut y = m.mul_vec(x);
        factor.solve_in_place(&mut y);
        for _ in 0..2 {
            locked.project_out(&mut y);
            for (b, mb) in basis.iter().zip(&mbasis) {
                let c = dot(mb, &y);
                axpy(-c, b, &mut y);
            }
        }
        let my = m.mul_vec(&y);
        let nrm = dot(&y, &my).max(T::zero()).sqrt();
        if nrm <= T::epsilon() * T::lit(1e3) * norm(&y).max(T::min_positive_value()) || nrm == T::zero() {
            continue;
        }
        y.iter_mut().for_each(|c| *c /= nrm);
        basis.push(y);
        mbasis.push(my.into_iter().map(|c| c / nrm).collect());
    }
    let p = basis.len();
    let kb: Vec<Vec<T>> = basis.iter().map(|b| k.mul_vec(b)).collect();
    let mut a = vec![T::zero(); p * p];
    for i in 0..p {
        for j in 0..p {
            a[i * p + j] = dot(&basis[i], &kb[j]);
        }
    }
    for i in 0..p {
        for j in 0..i {
            let s = (a[i * p + j] + a[j * p + i]) / T::lit(2.0);
            a[i * p + j] = s;
            a[j * p + i] = s;
        }
    }
    let eig = crate::symmetric_eigen(p, &a);
    let n = k.dim();
    let mut out = Vec::with_capacity(p);
    for c in 0..p {
        let mut x = vec![T::zero(); n];
        let mut kx = vec![T::zero(); n];
        let mut mx = vec![T::zero(); n];
        for r in 0..p {
            let w = eig.vectors[r * p + c];
            axpy(w, &basis[r], &mut x);
            axpy(w, &kb[r], &mut kx);
            axpy(w, &mbasis[r], &mut mx);
        }
        let xn = dot(&x, &mx).sqrt();
        for v in [&mut x, &mut kx, &mut mx] {
            v.iter_mut().for_each(|e| *e /= xn);
        }
        let lambda = dot(&x, &kx);
        let r: Vec<T> = kx.iter().zip(&mx).map(|(a, b)| *a - lambda * *b).collect();
        let kn = norm(&kx);
        let res = if kn > T::zero() { norm(&r) / kn } else { norm(&r) };
        out.push((lambda, x, res));
    }
    Ok(out)
}

fn sorted_nth<T: Real>(values: &[T], nev: usize) -> Option<T> {
    if values.len() < nev {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Some(v[nev - 1])
}

/// One Lanczos run in the complement of the locked vectors. Returns the
/// `want` Ritz pairs nearest the shift, as `(λ, x, residual)`.
#[allow(clippy::too_many_arguments)]
fn lanczos_round<T: Real>(
    k: &SparseSymmetric<T>,
    m: &SparseSymmetric<T>,
    factor: &LdlFactor<T>,
    locked: &Locked<T>,
    want: usize,
    steps_cap: usize,
    round: usize,
) -> Result<Vec<(T, Vec<T>, T)>> {
    let n = k.dim();
    let mut q: Vec<Vec<T>> = Vec::new();
    let mut mq: Vec<Vec<T>> = Vec::new();
    let mut alpha: Vec<T> = Vec::new();
    let mut beta: Vec<T> = Vec::new();

    let mut v = start_vector::<T>(n, round);
    locked.project_out(&mut v);
    let mut mv = m.mul_vec(&v);
    let nrm = dot(&v, &mv).sqrt();
    if nrm == T::zero() {
        return Ok(Vec::new());
    }
    v.iter_mut().for_each(|x| *x /= nrm);
    mv.iter_mut().for_each(|x| *x /= nrm);

    let ritz_tol = T::epsilon() * T::lit(1e3);
    let mut ritz: Option<(Vec<T>, Vec<T>)> = None;

    for j in 0..steps_cap {
        q.push(v);
        mq.push(mv);
        // w = (K − σM)⁻¹ M q_j
        let mut w = mq[j].clone();
        factor.solve_in_place(&mut w);
        let a = dot(&mq[j], &w);
        alpha.push(a);
        // Full reorthogonalisation, twice.
        for _ in 0..2 {
            locked.project_out(&mut w);
            for (qi, mqi) in q.iter().zip(&mq) {
                let c = dot(mqi, &w);
                axpy(-c, qi, &mut w);
            }
        }
        let mw = m.mul_vec(&w);
        let b = dot(&w, &mw).max(T::zero()).sqrt();

        let steps = j + 1;
        let check = steps >= want && (steps % 4 == 0 || steps == steps_cap);
        let scale = alpha.iter().fold(T::zero(), |s, a| s.max(a.abs()));
        let breakdown = b <= scale * T::epsilon() * T::lit(64.0);
        if check || breakdown {
            let (vals, vecs) = tridiagonal_eigen(&alpha, &beta)?;
            let top: Vec<usize> = (0..steps).rev().take(want).collect();
            let converged = top.iter().all(|&i| {
                let last = vecs[(steps - 1) * steps + i];
                (b * last).abs() <= ritz_tol * vals[i].abs().max(T::min_positive_value())
            });
            ritz = Some((vals, vecs));
            if converged || breakdown {
                break;
            }
        }
        if steps == steps_cap {
            break;
        }
        beta.push(b);
        v = w;
        mv = mw;
        v.iter_mut().for_each(|x| *x /= b);
        mv.iter_mut().for_each(|x| *x /= b);
    }

    let (vals, vecs) = match ritz {
        Some(r) => r,
        None => tridiagonal_eigen(&alpha, &beta)?,
    };
    let steps = alpha.len();
    let mut out = Vec::new();
    for i in (0..steps).rev().take(want) {
        let nu = vals[i];
        if nu <= T::zero() {
            continue;
        }
        let mut x = vec![T::zero(); n];
        for (jj, qj) in q.iter().enumerate() {
            axpy(vecs[jj * steps + i], qj, &mut x);
        }
        let mx = m.mul_vec(&x);
        let xn = dot(&x, &mx).sqrt();
        x.iter_mut().for_each(|c| *c /= xn);
        let kx = k.mul_vec(&x);
        let lambda = dot(&x, &kx);
        let mx = m.mul_vec(&x);
        let r: Vec<T> = kx.iter().zip(&mx).map(|(a, b)| *a - lambda * *b).collect();
        let kn = norm(&kx);
        let res = if kn > T::zero() { norm(&r) / kn } else { norm(&r) };
        out.push((lambda, x, res));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_pencil() {
        let k = SparseSymmetric::from_diagonal(&(1..=10).map(|i| i as f64).collect::<Vec<_>>());
        let m = SparseSymmetric::identity(10);
        let r = smallest_eigpairs(&k, &m, 3, &EigenOptions::default()).unwrap();
        for (i, v) in r.values.iter().enumerate() {
            assert!((v - (i + 1) as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn repeated_eigenvalue_returns_both_copies() {
        let k = SparseSymmetric::<f64>::from_diagonal(&[2.0, 1.0, 5.0, 1.0, 7.0, 3.0]);
        let m = SparseSymmetric::identity(6);
        let r = smallest_eigpairs(&k, &m, 3, &EigenOptions::default()).unwrap();
        assert!((r.values[0] - 1.0).abs() < 1e-12);
        assert!((r.values[1] - 1.0).abs() < 1e-12);
        assert!((r.values[2] - 2.0).abs() < 1e-12);
        assert!(r.orthonormality_error(&m) < 1e-10);
    }

    #[test]
    fn too_many_pairs_is_an_error() {
        let k = SparseSymmetric::<f64>::identity(2);
        let err = smallest_eigpairs(&k, &k, 3, &EigenOptions::default()).unwrap_err();
        assert!(matches!(err, NumericsError::TooManyEigenpairs { .. }));
    }

    #[test]
    fn zero_pairs_is_empty() {
        let k = SparseSymmetric::<f64>::identity(2);
        let r = smallest_eigpairs(&k, &k, 0, &EigenOptions::default()).unwrap();
        assert!(r.values.is_empty());
    }
}
