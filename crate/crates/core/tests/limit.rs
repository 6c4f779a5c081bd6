use homog_core::experiment::Setup;
use homog_core::geometry::FrameworkGraph;
use homog_core::limit::{assemble_bands, BetaFunction};
use homog_core::materials::ElasticTensor;
use proptest::prelude::*;

fn setup(modes: usize) -> Setup {
    Setup {
        graph: FrameworkGraph::preset("grid-diag").unwrap(),
        a0: ElasticTensor::new(0.0, 0.1).unwrap(),
        a1: ElasticTensor::new(1.0, 1.0).unwrap(),
        theta: 0.5,
        micro_n: 16,
        modes,
        macro_n: 16,
        macro_k: 12,
    }
}

struct Rng(u64);

impl Rng {
    fn next(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[test]
fn default_structure_interlaces_and_is_isotropic() {
    let s = setup(20);
    let (_, spec) = s.micro().unwrap();
    let beta = s.beta(&spec);
    let bands = s.bands(&spec, None).unwrap();
    let (g, d) = (&bands.gamma, &bands.delta);
    assert_eq!(g[0], 0.0);
    assert!(!d.is_empty());
    for n in 0..d.len() {
        assert!(g[n] < d[n] && d[n] < g[n + 1], "{g:?} {d:?}");
    }
    // b increases on each branch between consecutive poles.
    let mut edges = vec![0.0];
    edges.extend(d.iter().copied());
    for w in edges.windows(2) {
        let mut prev = f64::NEG_INFINITY;
        for k in 1..100 {
            let x = w[0] + (w[1] - w[0]) * k as f64 / 100.0;
            let b = beta.scalar_b(x).unwrap();
            assert!(b > prev);
            prev = b;
        }
    }
    // Gaps carry no band points and b < 0 there; band points hit some Λ.
    let mut rng = Rng(77);
    for gap in &bands.gaps {
        for _ in 0..20 {
            let x = gap[0] + (gap[1] - gap[0]) * (0.001 + 0.998 * rng.next());
            if bands.alpha.iter().any(|a| (a - x).abs() < 1e-9) {
                continue;
            }
            assert!(beta.scalar_b(x).unwrap() < 0.0);
        }
        for p in bands.points.iter().flatten() {
            assert!(!(gap[0] < *p && *p < gap[1]));
        }
    }
    for p in bands.points.iter().flatten() {
        let b = beta.scalar_b(*p).unwrap();
        assert!(bands.lambda.iter().any(|l| (b - l).abs() <= 1e-6 * l));
    }
}

#[test]
fn truncation_is_stable() {
    let s20 = setup(20);
    let (_, spec) = s20.micro().unwrap();
    let b20 = assemble_bands(&s20.beta(&spec), &[]).unwrap();
    let b12 = assemble_bands(&BetaFunction::new(&spec, 12, true), &[]).unwrap();
    for (a, b) in b12.delta.iter().zip(&b20.delta) {
        assert!((a - b).abs() <= 0.01 * b);
    }
    // The last zero of the short list is a tail zero; compare the rest.
    let common = b12.gamma.len() - 1;
    for (a, b) in b12.gamma[..common].iter().zip(&b20.gamma) {
        assert!((a - b).abs() <= 0.01 * b.max(1e-12));
    }
}

#[test]
fn chosen_point_is_recovered() {
    let s = setup(20);
    let (_, spec) = s.micro().unwrap();
    let beta = s.beta(&spec);
    let g = beta.gammas().unwrap();
    let target = 0.5 * (g[0] + beta.poles()[0]);
    let l = beta.scalar_b(target).unwrap();
    let bands = assemble_bands(&beta, &[l]).unwrap();
    assert!(bands.points[0].iter().any(|p| (p - target).abs() <= 1e-9));
}

#[test]
fn blow_up_below_first_pole() {
    let s = setup(20);
    let (_, spec) = s.micro().unwrap();
    let beta = s.beta(&spec);
    let d = beta.poles()[0];
    let mut prev = 0.0;
    for k in 1..8 {
        let x = d * (1.0 - 10f64.powi(-k));
        let b = beta.beta(x).unwrap();
        let top = 0.5 * (b[0][0] + b[1][1]);
        assert!(top > prev);
        prev = top;
    }
    assert!(prev > 1e5);
}

proptest! {
    #[test]
    fn beta_is_symmetric(
        w in proptest::collection::vec(0.5f64..50.0, 1..8),
        a in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
        s in 0.0f64..60.0,
    ) {
        let avgs: Vec<[f64; 2]> = a.iter().take(w.len()).map(|&(x, y)| [x, y]).collect();
        let mut w = w;
        w.sort_by(f64::total_cmp);
        let bf = BetaFunction::from_modes(&w, &avgs, false, true);
        if let Ok(b) = bf.beta(s) {
            prop_assert_eq!(b[0][1], b[1][0]);
        }
    }

    #[test]
    fn synthetic_pairs_interlace(w in proptest::collection::vec(0.5f64..50.0, 1..6), r in 0.05f64..0.3) {
        let mut w = w;
        w.sort_by(f64::total_cmp);
        w.dedup_by(|a, b| (*a - *b).abs() < 1e-3 * *b);
        let mut omegas = Vec::new();
        let mut avgs = Vec::new();
        let a = (r / w.len() as f64).sqrt();
        for &x in &w {
            omegas.extend([x, x]);
            avgs.extend([[a, 0.0], [0.0, a]]);
        }
        let bf = BetaFunction::from_modes(&omegas, &avgs, true, true);
        let g = bf.gammas().unwrap();
        let d = bf.poles();
        prop_assert_eq!(g.len(), d.len() + 1);
        for n in 0..d.len() {
            prop_assert!(g[n] < d[n] && d[n] < g[n + 1]);
        }
    }
}
