//! Frequency-dependent effective density `β(s)`, its zeros and poles, and
//! the band/gap structure of the two-scale limit operator.

use crate::error::Error;
use crate::micro::{MicroSpectrum, TOL_AVG};
use serde::Serialize;

/// Relative spread below which eigenvalues are treated as one cluster.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Isotropy tolerance for symmetric frameworks.
pub const ISO_TOL: f64 = 1e-6;
const POLE_GUARD: f64 = 1e-9;
const MAX_BISECT: usize = 200;
const ROOT_TOL: f64 = 1e-10;

/// Modes sharing one eigenvalue, summed into `Σ⟨φ⟩⊗⟨φ⟩`.
#[derive(Debug, Clone, Serialize)]
pub struct Cluster {
    pub omega: f64,
    pub multiplicity: usize,
    pub weight: [[f64; 2]; 2],
    /// At least one mode has a nonzero average.
    pub pole: bool,
}

#[derive(Debug, Clone)]
pub struct BetaFunction {
    clusters: Vec<Cluster>,
    symmetric: bool,
    /// `Σ|⟨φ⟩|²` over the kept modes.
    captured: f64,
}

fn same_cluster(a: f64, b: f64) -> bool {
    (b - a).abs() <= CLUSTER_TOL * a.abs().max(b.abs())
}

impl BetaFunction {
    /// Builds from eigenvalues and averages. The last cluster is dropped if
    /// it could be incomplete, so pass one more mode than needed.
    pub fn from_modes(omegas: &[f64], avgs: &[[f64; 2]], symmetric: bool, complete: bool) -> Self {
        let mut clusters: Vec<Cluster> = Vec::new();
        let mut captured = 0.0;
        for (i, (&w, a)) in omegas.iter().zip(avgs).enumerate() {
            let nonzero = (a[0] * a[0] + a[1] * a[1]).sqrt() > TOL_AVG;
            let outer = [[a[0] * a[0], a[0] * a[1]], [a[0] * a[1], a[1] * a[1]]];
            let extend = match clusters.last() {
                Some(c) => i > 0 && same_cluster(omegas[i - 1], w) && same_cluster(c.omega, w),
                None => false,
            };
            if !extend {
                clusters.push(Cluster {
                    omega: w,
                    multiplicity: 0,
                    weight: [[0.0; 2]; 2],
                    pole: false,
                });
            }
            let c = clusters.last_mut().expect("cluster");
            c.multiplicity += 1;
            c.pole |= nonzero;
            for r in 0..2 {
                for s in 0..2 {
                    c.weight[r][s] += outer[r][s];
                }
            }
        }
        if !complete && clusters.len() > 1 {
            clusters.pop();
        }
        for c in &mut clusters {
            if !c.pole {
                c.weight = [[0.0; 2]; 2];
            }
            captured += c.weight[0][0] + c.weight[1][1];
        }
        Self {
            clusters,
            symmetric,
            captured,
        }
    }

    /// Uses the lowest `n` modes of `spectrum`, keeping whole clusters.
    pub fn new(spectrum: &MicroSpectrum, n: usize, symmetric: bool) -> Self {
        let n = n.min(spectrum.modes.len());
        let omegas: Vec<f64> = spectrum.modes.iter().map(|m| m.omega).collect();
        let avgs: Vec<[f64; 2]> = spectrum.modes.iter().map(|m| m.avg).collect();
        let complete = n == 0 || n < omegas.len() && !same_cluster(omegas[n - 1], omegas[n]);
        let mut b = Self::from_modes(&omegas[..n], &avgs[..n], symmetric, complete);
        if n == 0 {
            b.clusters.clear();
        }
        b
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    /// Poles `δₙ`.
    pub fn poles(&self) -> Vec<f64> {
        self.clusters.iter().filter(|c| c.pole).map(|c| c.omega).collect()
    }

    /// Silent eigenvalues `αₙ`.
    pub fn silent(&self) -> Vec<f64> {
        self.clusters.iter().filter(|c| !c.pole).map(|c| c.omega).collect()
    }

    /// Largest kept eigenvalue.
    pub fn top(&self) -> Option<f64> {
        self.clusters.last().map(|c| c.omega)
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn check_pole(&self, s: f64) -> Result<(), Error> {
        for c in &self.clusters {
            if (s - c.omega).abs() <= POLE_GUARD * c.omega.max(1.0) {
                return Err(Error::NearPole { s, pole: c.omega });
            }
        }
        Ok(())
    }

    /// `β(s) = s(I + s Σ ⟨φ⟩⊗⟨φ⟩/(ω − s))`.
    pub fn beta(&self, s: f64) -> Result<[[f64; 2]; 2], Error> {
        self.check_pole(s)?;
        let mut b = [[s, 0.0], [0.0, s]];
        for c in &self.clusters {
            let f = s * s / (c.omega - s);
            for r in 0..2 {
                for q in 0..2 {
                    b[r][q] += f * c.weight[r][q];
                }
            }
        }
        b[0][1] = 0.5 * (b[0][1] + b[1][0]);
        b[1][0] = b[0][1];
        Ok(b)
    }

    /// Estimated size of the omitted tail, `s² (1 − Σ|⟨φ⟩|²)/(ω_N − s)`,
    /// using `μ(Q) = 1` as the total.
    pub fn tail_bound(&self, s: f64) -> f64 {
        match self.top() {
            Some(top) if s < top => s * s * (1.0 - self.captured).max(0.0) / (top - s),
            _ => f64::INFINITY,
        }
    }

    /// `‖β(s) − b(s)I‖` in the max norm.
    pub fn anisotropy(&self, s: f64) -> Result<f64, Error> {
        let b = self.beta(s)?;
        Ok((0.5 * (b[0][0] - b[1][1])).abs().max(b[0][1].abs()))
    }

    /// `b(s) = tr β(s)/2`, after checking that β is isotropic.
    pub fn scalar_b(&self, s: f64) -> Result<f64, Error> {
        if !self.symmetric {
            return Err(Error::Anisotropic { s, deviation: f64::NAN });
        }
        let m = self.beta(s)?;
        let b = 0.5 * (m[0][0] + m[1][1]);
        let dev = (0.5 * (m[0][0] - m[1][1])).abs().max(m[0][1].abs());
        // Near zeros of b compare against the size of the terms instead.
        let scale = b.abs().max(s.abs() * 1e-3);
        if dev > ISO_TOL * scale {
            return Err(Error::Anisotropic { s, deviation: dev / scale });
        }
        Ok(b)
    }

    /// The isotropic part without the check; used inside root searches.
    fn b_raw(&self, s: f64) -> f64 {
        let mut b = s;
        for c in &self.clusters {
            b += s * s / (c.omega - s) * 0.5 * (c.weight[0][0] + c.weight[1][1]);
        }
        b
    }

    /// Root of `b(s) = target` on `(lo, hi)` where `b − target` changes sign
    /// from negative to positive.
    fn bisect(&self, mut lo: f64, mut hi: f64, target: f64) -> Result<f64, Error> {
        let g = |s: f64| self.b_raw(s) - target;
        if !(g(lo) < 0.0 && g(hi) > 0.0) {
            return Err(Error::NoSignChange { lo, hi });
        }
        let scale = target.abs().max(1.0);
        for _ in 0..MAX_BISECT {
            let mid = 0.5 * (lo + hi);
            let v = g(mid);
            if v.abs() <= ROOT_TOL * 1e-3 * scale || hi - lo <= ROOT_TOL * 1e-2 * mid.abs() {
                return Ok(mid);
            }
            if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Zeros of `b`: `γ₁ = 0`, one between consecutive poles and one after
    /// the last pole.
    pub fn gammas(&self) -> Result<Vec<f64>, Error> {
        let poles = self.poles();
        let mut out = vec![0.0];
        for (i, &p) in poles.iter().enumerate() {
            let lo = p * (1.0 + 1e-12) + 1e-300;
            let hi = match poles.get(i + 1) {
                Some(&q) => q * (1.0 - 1e-12),
                None => {
                    let mut h = 2.0 * p;
                    let mut k = 0;
                    while self.b_raw(h) <= 0.0 {
                        h *= 2.0;
                        k += 1;
                        if k > 200 {
                            return Err(Error::NoSignChange { lo, hi: h });
                        }
                    }
                    h
                }
            };
            out.push(self.bisect(lo, hi, 0.0)?);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BandStructure {
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Per branch `(γₙ, δₙ)`: the sorted solutions of `b(s) = Λ_k`.
    pub points: Vec<Vec<f64>>,
    /// Closed hulls of the branch points.
    pub bands: Vec<[f64; 2]>,
    /// `(δₙ, γₙ₊₁)`.
    pub gaps: Vec<[f64; 2]>,
    pub lambda: Vec<f64>,
}

impl BandStructure {
    /// Band points, poles and silent points: the discrete skeleton.
    pub fn skeleton(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.points.iter().flatten().copied().collect();
        all.extend(&self.delta);
        all.extend(&self.alpha);
        all.sort_by(f64::total_cmp);
        all
    }
}

/// Preimages of the macro eigenvalues under `b` on each branch.
pub fn assemble_bands(beta: &BetaFunction, lambda: &[f64]) -> Result<BandStructure, Error> {
    if !beta.is_symmetric() {
        return Err(Error::Anisotropic { s: 0.0, deviation: f64::NAN });
    }
    let gamma = beta.gammas()?;
    let delta = beta.poles();
    let mut points = Vec::with_capacity(delta.len());
    let mut bands = Vec::new();
    for (n, &d) in delta.iter().enumerate() {
        let lo = gamma[n];
        let hi = d * (1.0 - 1e-12);
        let mut pts = Vec::new();
        for &l in lambda {
            if l <= 0.0 {
                continue;
            }
            if beta.b_raw(hi) <= l {
                // Λ beyond the reach of floating point near the pole.
                continue;
            }
            let s = beta.bisect(lo, hi, l)?;
            beta.scalar_b(s)?;
            pts.push(s);
        }
        pts.sort_by(f64::total_cmp);
        if let (Some(&a), Some(&b)) = (pts.first(), pts.last()) {
            bands.push([a, b]);
        }
        points.push(pts);
    }
    let gaps = delta.iter().zip(&gamma[1..]).map(|(&d, &g)| [d, g]).collect();
    Ok(BandStructure {
        gamma,
        delta,
        alpha: beta.silent(),
        points,
        bands,
        gaps,
        lambda: lambda.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic() -> BetaFunction {
        let a = 0.5f64.sqrt();
        BetaFunction::from_modes(&[1.0], &[[a, 0.0]], false, true)
    }

    #[test]
    fn beta_vanishes_at_zero() {
        let b = synthetic().beta(0.0).unwrap();
        assert_eq!(b, [[0.0; 2]; 2]);
    }

    #[test]
    fn synthetic_zero_at_two() {
        let a = 0.5f64.sqrt();
        // Isotropic split of the same weight: |⟨φ⟩|² = ½ over a pair.
        let bf = BetaFunction::from_modes(&[1.0, 1.0], &[[a, 0.0], [0.0, a]], true, true);
        // b(s) = s + s²·½/(1 − s) = s(1 + s/(2(1 − s))).
        let g = bf.gammas().unwrap();
        assert_eq!(g.len(), 2);
        assert!((g[1] - 2.0).abs() < 1e-9, "{}", g[1]);
        let r = bf.bisect(1.0001, 10.0, 0.0).unwrap();
        assert!((r - 2.0).abs() < 1e-9);
    }

    #[test]
    fn pole_guard() {
        assert!(matches!(synthetic().beta(1.0), Err(Error::NearPole { .. })));
    }

    #[test]
    fn empty_spectrum_has_single_zero() {
        let bf = BetaFunction::from_modes(&[], &[], true, true);
        assert_eq!(bf.gammas().unwrap(), vec![0.0]);
    }

    #[test]
    fn silent_modes_do_not_move_b() {
        let a = 0.5f64.sqrt();
        let bf = BetaFunction::from_modes(&[1.0, 1.0, 3.0], &[[a, 0.0], [0.0, a], [0.0, 0.0]], true, true);
        assert_eq!(bf.silent(), vec![3.0]);
        assert_eq!(bf.poles(), vec![1.0]);
        assert!((bf.scalar_b(2.5).unwrap() - (2.5 + 6.25 * 0.5 / (1.0 - 2.5))).abs() < 1e-14);
    }

    #[test]
    fn band_preimage_recovers_chosen_point() {
        let a = 0.5f64.sqrt();
        let bf = BetaFunction::from_modes(&[1.0, 1.0], &[[a, 0.0], [0.0, a]], true, true);
        let s = 0.6;
        let l = bf.scalar_b(s).unwrap();
        let bs = assemble_bands(&bf, &[l]).unwrap();
        assert!((bs.points[0][0] - s).abs() < 1e-9);
        assert_eq!(bs.gaps, vec![[1.0, bs.gamma[1]]]);
    }

    #[test]
    fn incomplete_last_cluster_is_dropped() {
        let bf = BetaFunction::from_modes(&[1.0, 2.0], &[[0.1, 0.0], [0.1, 0.0]], true, false);
        assert_eq!(bf.clusters().len(), 1);
    }
}
