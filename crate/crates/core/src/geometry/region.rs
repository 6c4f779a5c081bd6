use super::{add, cross, dot, norm, segment_distance, sub, FrameworkGraph, Point};
use crate::error::{invalid, Error};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Stiff,
    Soft,
}

/// The set of points within distance `h` of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub link: usize,
    pub p: Point,
    pub q: Point,
    pub h: f64,
}

impl Capsule {
    pub fn contains(&self, y: Point) -> bool {
        segment_distance(y, self.p, self.q) < self.h
    }

    /// Corners of the rectangle part, counter-clockwise.
    fn rectangle(&self) -> [Point; 4] {
        let d = sub(self.q, self.p);
        let l = norm(d);
        let n = [-d[1] / l * self.h, d[0] / l * self.h];
        [sub(self.p, n), sub(self.q, n), add(self.q, n), add(self.p, n)]
    }

    fn bbox(&self) -> [f64; 4] {
        [
            self.p[0].min(self.q[0]) - self.h,
            self.p[1].min(self.q[1]) - self.h,
            self.p[0].max(self.q[0]) + self.h,
            self.p[1].max(self.q[1]) + self.h,
        ]
    }

    /// Cross-section with the vertical line at `x`.
    fn section(&self, x: f64) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        if let Some((a, b)) = convex_section(&self.rectangle(), x) {
            lo = a;
            hi = b;
        }
        for c in [self.p, self.q] {
            let dx = x - c[0];
            if dx.abs() < self.h {
                let s = (self.h * self.h - dx * dx).sqrt();
                lo = lo.min(c[1] - s);
                hi = hi.max(c[1] + s);
            }
        }
        (lo < hi).then_some((lo, hi))
    }
}

/// Rod neighbourhood `{y : dist(y, F₁) < h}` of a framework.
#[derive(Debug, Clone)]
pub struct RodRegion {
    graph: FrameworkGraph,
    h: f64,
    /// Link translates whose capsules reach into the closed unit cell.
    capsules: Vec<Capsule>,
}

impl RodRegion {
    pub fn new(graph: FrameworkGraph, h: f64) -> Result<Self, Error> {
        if !(h > 0.0) {
            return Err(invalid("h", "rod half-width must be positive"));
        }
        let bound = graph.overlap_bound();
        if h >= bound {
            return Err(invalid(
                "h",
                format!("rod half-width {h} must stay below the overlap bound {bound}"),
            ));
        }
        let capsules = graph
            .translates(2)
            .into_iter()
            .map(|(link, p, q)| Capsule { link, p, q, h })
            .filter(|c| {
                let b = c.bbox();
                b[0] < 1.0 && b[2] > 0.0 && b[1] < 1.0 && b[3] > 0.0
            })
            .collect();
        Ok(Self { graph, h, capsules })
    }

    pub fn graph(&self) -> &FrameworkGraph {
        &self.graph
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn capsules(&self) -> &[Capsule] {
        &self.capsules
    }

    /// Periodic distance from `y` to the network.
    pub fn distance(&self, y: Point) -> f64 {
        let y = [y[0].rem_euclid(1.0), y[1].rem_euclid(1.0)];
        let mut best = f64::INFINITY;
        for (_, p, q) in self.graph.translates(1) {
            best = best.min(segment_distance(y, p, q));
        }
        best
    }

    pub fn classify_point(&self, y: Point) -> Phase {
        if self.distance(y) < self.h {
            Phase::Stiff
        } else {
            Phase::Soft
        }
    }

    /// Unit normal of the rod boundary nearest to `y` (cell coordinates,
    /// `y` in the closed cell): from the closest point on the nearest link
    /// towards `y`, or the link normal when `y` sits on the axis.
    pub fn interface_normal(&self, y: Point) -> Point {
        let mut best = (f64::INFINITY, [1.0, 0.0]);
        for c in &self.capsules {
            let d = sub(c.q, c.p);
            let t = (dot(sub(y, c.p), d) / dot(d, d)).clamp(0.0, 1.0);
            let r = sub(y, [c.p[0] + t * d[0], c.p[1] + t * d[1]]);
            let dist = norm(r);
            if dist < best.0 {
                let n = if dist > 1e-12 {
                    [r[0] / dist, r[1] / dist]
                } else {
                    let l = norm(d);
                    [-d[1] / l, d[0] / l]
                };
                best = (dist, n);
            }
        }
        best.1
    }

    /// Area of the rod region inside one cell, `|Q₁ʰ|`.
    pub fn stiff_area(&self) -> f64 {
        union_area_in_convex(&self.capsules, &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    /// Area of the rod region inside a convex polygon given in cell
    /// coordinates (the polygon is assumed to lie in the closed cell).
    pub fn area_in(&self, poly: &[Point]) -> f64 {
        let (lo, hi) = poly_bbox(poly);
        // A capsule is convex, so holding every vertex means holding the polygon.
        if self.capsules.iter().any(|c| poly.iter().all(|&v| c.contains(v))) {
            return polygon_area(poly);
        }
        let near: Vec<Capsule> = self
            .capsules
            .iter()
            .filter(|c| {
                let b = c.bbox();
                b[0] < hi[0] && b[2] > lo[0] && b[1] < hi[1] && b[3] > lo[1]
            })
            .copied()
            .collect();
        if near.is_empty() {
            return 0.0;
        }
        union_area_in_convex(&near, poly)
    }
}

fn poly_bbox(poly: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for v in poly {
        for k in 0..2 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    (lo, hi)
}

pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| cross(poly[i], poly[(i + 1) % n])).sum::<f64>().abs() / 2.0
}

/// Cross-section of a convex polygon with the vertical line at `x`.
fn convex_section(poly: &[Point], x: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let (x0, x1) = (a[0].min(b[0]), a[0].max(b[0]));
        if x < x0 || x > x1 || x0 == x1 {
            continue;
        }
        let t = (x - a[0]) / (b[0] - a[0]);
        let y = a[1] + t * (b[1] - a[1]);
        lo = lo.min(y);
        hi = hi.max(y);
    }
    (lo < hi).then_some((lo, hi))
}

/// x-coordinates where two segments cross.
fn segment_crossing(a: Point, b: Point, c: Point, d: Point) -> Option<f64> {
    let r = sub(b, a);
    let s = sub(d, c);
    let rs = cross(r, s);
    if rs.abs() <= 1e-300 {
        return None;
    }
    let ca = sub(c, a);
    let t = cross(ca, s) / rs;
    let u = cross(ca, r) / rs;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then(|| a[0] + t * r[0])
}

/// x-coordinates where a segment meets a circle.
fn circle_segment(c: Point, rad: f64, a: Point, b: Point, out: &mut Vec<f64>) {
    let d = sub(b, a);
    let f = sub(a, c);
    let qa = dot(d, d);
    let qb = 2.0 * dot(f, d);
    let qc = dot(f, f) - rad * rad;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    for t in [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)] {
        if (0.0..=1.0).contains(&t) {
            out.push(a[0] + t * d[0]);
        }
    }
}

fn circle_circle(c1: Point, c2: Point, rad: f64, out: &mut Vec<f64>) {
    let d = sub(c2, c1);
    let dist = norm(d);
    if dist <= 0.0 || dist >= 2.0 * rad {
        return;
    }
    let a = dist / 2.0;
    let hh = (rad * rad - a * a).sqrt();
    let m = [c1[0] + d[0] / 2.0, c1[1] + d[1] / 2.0];
    out.push(m[0] + hh * d[1] / dist);
    out.push(m[0] - hh * d[1] / dist);
}

const GAUSS8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Area of `(∪ capsules) ∩ poly` for a convex polygon `poly`.
///
/// Vertical sweep: between consecutive events (vertices, edge crossings,
/// circle extremes and circle crossings) the covered length of a vertical
/// line is linear whenever the rounded rod ends are hidden inside other
/// rods, so the Gauss rule on each slab is exact up to rounding. Exposed
/// ends give square-root behaviour near the circle extremes; those slabs are
/// graded geometrically.
pub fn union_area_in_convex(capsules: &[Capsule], poly: &[Point]) -> f64 {
    let mut edges: Vec<(Point, Point)> = Vec::new();
    let n = poly.len();
    for i in 0..n {
        edges.push((poly[i], poly[(i + 1) % n]));
    }
    for c in capsules {
        let r = c.rectangle();
        for i in 0..4 {
            edges.push((r[i], r[(i + 1) % 4]));
        }
    }
    let mut events: Vec<f64> = edges.iter().map(|e| e.0[0]).collect();
    let mut singular: Vec<f64> = Vec::new();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            if let Some(x) = segment_crossing(edges[i].0, edges[i].1, edges[j].0, edges[j].1) {
                events.push(x);
            }
        }
    }
    let circles: Vec<(Point, f64)> = capsules.iter().flat_map(|c| [(c.p, c.h), (c.q, c.h)]).collect();
    for (k, &(c, r)) in circles.iter().enumerate() {
        singular.push(c[0] - r);
        singular.push(c[0] + r);
        for e in &edges {
            circle_segment(c, r, e.0, e.1, &mut events);
        }
        for &(c2, _) in &circles[k + 1..] {
            circle_circle(c, c2, r, &mut events);
        }
    }
    events.extend_from_slice(&singular);
    let (lo, hi) = poly_bbox(poly);
    events.retain(|x| *x > lo[0] && *x < hi[0]);
    events.push(lo[0]);
    events.push(hi[0]);
    events.sort_by(|a, b| a.partial_cmp(b).unwrap());
    events.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);

    let covered = |x: f64| -> f64 {
        let Some((clo, chi)) = convex_section(poly, x) else {
            return 0.0;
        };
        let mut iv: Vec<(f64, f64)> = capsules
            .iter()
            .filter_map(|c| c.section(x))
            .filter_map(|(a, b)| {
                let (a, b) = (a.max(clo), b.min(chi));
                (a < b).then_some((a, b))
            })
            .collect();
        iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut total = 0.0;
        let mut cur: Option<(f64, f64)> = None;
        for (a, b) in iv {
            match cur {
                Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
                Some((ca, cb)) => {
                    total += cb - ca;
                    cur = Some((a, b));
                }
                None => cur = Some((a, b)),
            }
        }
        if let Some((ca, cb)) = cur {
            total += cb - ca;
        }
        total
    };
    let gauss = |a: f64, b: f64| -> f64 {
        let (m, r) = ((a + b) / 2.0, (b - a) / 2.0);
        GAUSS8.iter().map(|(t, w)| w * covered(m + r * t)).sum::<f64>() * r
    };
    let is_singular = |x: f64| singular.iter().any(|s| (s - x).abs() <= 1e-15);

    let mut area = 0.0;
    for w in events.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        let (sa, sb) = (is_singular(a), is_singular(b));
        if !sa && !sb {
            area += gauss(a, b);
            continue;
        }
        // Geometric grading toward singular ends.
        let mid = (a + b) / 2.0;
        for (end, other, sing) in [(a, mid, sa), (b, mid, sb)] {
            if !sing {
                area += gauss(end.min(other), end.max(other));
                continue;
            }
            let mut far = other;
            for _ in 0..24 {
                let near = end + (far - end) / 4.0;
                area += gauss(near.min(far), near.max(far));
                far = near;
            }
            area += gauss(end.min(far), end.max(far));
        }
    }
    area
}
