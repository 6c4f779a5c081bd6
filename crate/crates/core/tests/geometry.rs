use homog_core::geometry::{rotate_quarter, CellMesh, FrameworkGraph, Phase, RodRegion};
use proptest::prelude::*;

struct Rng(u64);

impl Rng {
    fn next(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Distance to the tiled network computed from the link list alone.
fn oracle_distance(g: &FrameworkGraph, y: [f64; 2]) -> f64 {
    let mut best = f64::INFINITY;
    for l in g.links() {
        let a = g.nodes()[l.a];
        let b = g.nodes()[l.b];
        let b = [b[0] + l.shift[0] as f64, b[1] + l.shift[1] as f64];
        for i in -2..=2 {
            for j in -2..=2 {
                let p = [a[0] + i as f64, a[1] + j as f64];
                let q = [b[0] + i as f64, b[1] + j as f64];
                let d = [q[0] - p[0], q[1] - p[1]];
                let t = (((y[0] - p[0]) * d[0] + (y[1] - p[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
                let e = [y[0] - p[0] - t * d[0], y[1] - p[1] - t * d[1]];
                best = best.min((e[0] * e[0] + e[1] * e[1]).sqrt());
            }
        }
    }
    best
}

#[test]
fn stiff_area_matches_monte_carlo() {
    let g = FrameworkGraph::preset("grid-diag").unwrap();
    let h = 0.02;
    let region = RodRegion::new(g.clone(), h).unwrap();
    let mut rng = Rng(0x2545_f491_4f6c_dd1d);
    let n = 1_000_000;
    let hits = (0..n).filter(|_| oracle_distance(&g, [rng.next(), rng.next()]) < h).count();
    let p = hits as f64 / n as f64;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    let area = region.stiff_area();
    assert!((area - p).abs() < 4.0 * sigma, "exact {area}, sampled {p} ± {sigma}");
}

#[test]
fn thin_rods_approach_length() {
    let g = FrameworkGraph::preset("grid-diag").unwrap();
    let h = 1e-3;
    let area = RodRegion::new(g.clone(), h).unwrap().stiff_area();
    let ratio = area / (2.0 * h) / g.total_length();
    assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn grid_area_is_inclusion_exclusion() {
    // Two strips of width 2h crossing in a 2h × 2h square.
    let g = FrameworkGraph::preset("grid").unwrap();
    for h in [0.01, 0.1, 0.3] {
        let a = RodRegion::new(g.clone(), h).unwrap().stiff_area();
        assert!((a - (4.0 * h - 4.0 * h * h)).abs() < 1e-12);
    }
}

#[test]
fn presets() {
    let grid = FrameworkGraph::preset("grid").unwrap();
    assert_eq!(grid.nodes().len(), 1);
    assert_eq!(grid.links().len(), 2);
    assert!((grid.total_length() - 2.0).abs() < 1e-15);
    let gd = FrameworkGraph::preset("grid-diag").unwrap();
    assert!((gd.total_length() - (2.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
    assert!(grid.is_symmetric() && gd.is_symmetric());
    assert!(FrameworkGraph::preset("honeycomb").is_err());
}

#[test]
fn frames_are_positively_oriented() {
    for name in ["grid", "grid-diag"] {
        for l in FrameworkGraph::preset(name).unwrap().links() {
            let det = l.tau[0] * l.nu[1] - l.tau[1] * l.nu[0];
            assert!((det - 1.0).abs() < 1e-15);
        }
    }
}

#[test]
fn file_round_trip() {
    for name in ["grid", "grid-diag"] {
        let g = FrameworkGraph::preset(name).unwrap();
        let back = FrameworkGraph::parse(&g.to_text()).unwrap();
        assert_eq!(back.to_text(), g.to_text());
        assert_eq!(back.is_symmetric(), g.is_symmetric());
    }
    let text = "framework v1\nnode c 0.5 0.5\nlink c c 1 0\nlink c c 0 1\n";
    let g = FrameworkGraph::parse(text).unwrap();
    let grid = FrameworkGraph::preset("grid").unwrap();
    assert_eq!(g.total_length(), grid.total_length());
    assert_eq!(g.links().len(), grid.links().len());
}

#[test]
fn broken_symmetry_is_detected() {
    let g = FrameworkGraph::new(vec![[0.5, 0.5]], &[(0, 0, [1, 0])]).unwrap();
    assert!(!g.is_symmetric());
}

#[test]
fn mesh_areas_and_link_cover() {
    let g = FrameworkGraph::preset("grid-diag").unwrap();
    let m = CellMesh::new(&g, 16).unwrap();
    let total: f64 = (0..m.num_triangles())
        .map(|t| {
            let p = m.triangle_points(t);
            0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs()
        })
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
    for path in m.link_paths() {
        let len = path.segment_length() * (path.vertices.len() - 1) as f64;
        assert!((len - g.links()[path.link].length).abs() < 1e-12);
    }
}

#[test]
fn centroid_classification_agrees_with_points() {
    let g = FrameworkGraph::preset("grid").unwrap();
    let r = RodRegion::new(g.clone(), 0.1).unwrap();
    let m = CellMesh::new(&g, 8).unwrap();
    let tags = m.classify(&r);
    for (t, tag) in tags.iter().enumerate() {
        let p = m.triangle_points(t);
        let c = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        assert_eq!(*tag, r.classify_point(c));
    }
}

proptest! {
    #[test]
    fn classification_is_periodic(y1 in 0.0f64..1.0, y2 in 0.0f64..1.0, i in -3i32..3, j in -3i32..3) {
        let g = FrameworkGraph::preset("grid-diag").unwrap();
        let r = RodRegion::new(g, 0.07).unwrap();
        let d0 = r.distance([y1, y2]);
        let d1 = r.distance([y1 + i as f64, y2 + j as f64]);
        prop_assert!((d0 - d1).abs() < 1e-12);
    }

    #[test]
    fn classification_matches_oracle(y1 in 0.0f64..1.0, y2 in 0.0f64..1.0) {
        let g = FrameworkGraph::preset("grid-diag").unwrap();
        let r = RodRegion::new(g.clone(), 0.07).unwrap();
        let d = oracle_distance(&g, [y1, y2]);
        prop_assume!((d - 0.07).abs() > 1e-9);
        let expect = if d < 0.07 { Phase::Stiff } else { Phase::Soft };
        prop_assert_eq!(r.classify_point([y1, y2]), expect);
    }

    #[test]
    fn symmetric_presets_classify_rotation_invariantly(y1 in 0.0f64..1.0, y2 in 0.0f64..1.0) {
        for name in ["grid", "grid-diag"] {
            let r = RodRegion::new(FrameworkGraph::preset(name).unwrap(), 0.05).unwrap();
            let a = r.distance([y1, y2]);
            let b = r.distance(rotate_quarter([y1, y2]));
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
