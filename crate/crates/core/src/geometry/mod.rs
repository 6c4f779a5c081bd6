//! Periodic rod frameworks on the unit cell.

mod mesh;
mod region;

pub use mesh::{CellMesh, LinkPath, SquareMesh};
pub use region::{polygon_area, union_area_in_convex, Capsule, Phase, RodRegion};

use crate::error::Error;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

pub type Point = [f64; 2];

const TOL: f64 = 1e-12;

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = sub(b, a);
    let t = (dot(sub(p, a), d) / dot(d, d)).clamp(0.0, 1.0);
    norm(sub(p, [a[0] + t * d[0], a[1] + t * d[1]]))
}

/// Rotation by π/2 about the cell centre.
pub fn rotate_quarter(y: Point) -> Point {
    [1.0 - y[1], y[0]]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    /// The segment runs from `nodes[a]` to `nodes[b] + shift`.
    pub shift: [i32; 2],
    pub length: f64,
    pub tau: Point,
    /// `tau` rotated by +π/2.
    pub nu: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameworkGraph {
    node_ids: Vec<String>,
    nodes: Vec<Point>,
    links: Vec<Link>,
    symmetric: bool,
}

impl FrameworkGraph {
    /// Builds and validates a graph; `links` holds `(a, b, shift)`.
    pub fn new(nodes: Vec<Point>, links: &[(usize, usize, [i32; 2])]) -> Result<Self, Error> {
        let ids = (0..nodes.len()).map(|i| i.to_string()).collect();
        Self::with_ids(ids, nodes, links)
    }

    fn with_ids(node_ids: Vec<String>, nodes: Vec<Point>, raw: &[(usize, usize, [i32; 2])]) -> Result<Self, Error> {
        let bad = |m: &str| Err(Error::InvalidGraph(m.to_string()));
        if nodes.is_empty() || raw.is_empty() {
            return bad("framework needs at least one node and one link");
        }
        for p in &nodes {
            if !(0.0..1.0).contains(&p[0]) || !(0.0..1.0).contains(&p[1]) {
                return bad("node out of cell");
            }
        }
        for i in 0..nodes.len() {
            for j in 0..i {
                let d = sub(nodes[i], nodes[j]);
                if norm(d) <= TOL {
                    return bad("duplicate node");
                }
            }
        }
        let mut links = Vec::with_capacity(raw.len());
        for &(a, b, shift) in raw {
            if a >= nodes.len() || b >= nodes.len() {
                return bad("link refers to an unknown node");
            }
            let p = nodes[a];
            let q = add(nodes[b], [shift[0] as f64, shift[1] as f64]);
            let d = sub(q, p);
            let length = norm(d);
            if length <= TOL {
                return bad("zero-length link");
            }
            let tau = [d[0] / length, d[1] / length];
            let on_boundary = (tau[1].abs() <= TOL && p[1].abs() <= TOL) || (tau[0].abs() <= TOL && p[0].abs() <= TOL);
            if on_boundary {
                return bad("link lies on the cell boundary");
            }
            links.push(Link {
                a,
                b,
                shift,
                length,
                tau,
                nu: [-tau[1], tau[0]],
            });
        }
        let mut g = Self {
            node_ids,
            nodes,
            links,
            symmetric: false,
        };
        g.check_intersections()?;
        g.symmetric = g.is_quarter_symmetric();
        Ok(g)
    }

    pub fn preset(name: &str) -> Result<Self, Error> {
        match name {
            "grid" => Self::new(vec![[0.5, 0.5]], &[(0, 0, [1, 0]), (0, 0, [0, 1])]),
            "grid-diag" => Self::new(
                vec![[0.5, 0.5], [0.0, 0.0]],
                &[
                    (0, 0, [1, 0]),
                    (0, 0, [0, 1]),
                    (1, 0, [0, 0]),
                    (0, 1, [1, 1]),
                    (0, 1, [1, 0]),
                    (0, 1, [0, 1]),
                ],
            ),
            _ => Err(Error::UnknownPreset(name.to_string())),
        }
    }

    /// A preset name or a path to a framework file.
    pub fn from_spec(spec: &str) -> Result<Self, Error> {
        match spec {
            "grid" | "grid-diag" => Self::preset(spec),
            path => Self::load(path),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut header = false;
        let mut ids: Vec<String> = Vec::new();
        let mut nodes = Vec::new();
        let mut links = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let err = |message: &str| Error::Parse {
                line,
                message: message.to_string(),
            };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tok: Vec<&str> = content.split_whitespace().collect();
            if !header {
                if tok != ["framework", "v1"] {
                    return Err(err("expected header `framework v1`"));
                }
                header = true;
                continue;
            }
            match tok[0] {
                "node" if tok.len() == 4 => {
                    if ids.iter().any(|i| i == tok[1]) {
                        return Err(err("duplicate node id"));
                    }
                    let y1: f64 = tok[2].parse().map_err(|_| err("bad coordinate"))?;
                    let y2: f64 = tok[3].parse().map_err(|_| err("bad coordinate"))?;
                    ids.push(tok[1].to_string());
                    nodes.push([y1, y2]);
                }
                "link" if tok.len() == 5 => {
                    let find = |id: &str| ids.iter().position(|i| i == id).ok_or_else(|| err("unknown node id"));
                    let a = find(tok[1])?;
                    let b = find(tok[2])?;
                    let s1: i32 = tok[3].parse().map_err(|_| err("bad shift"))?;
                    let s2: i32 = tok[4].parse().map_err(|_| err("bad shift"))?;
                    links.push((a, b, [s1, s2]));
                }
                _ => return Err(err("expected `node <id> <y1> <y2>` or `link <a> <b> <s1> <s2>`")),
            }
        }
        if !header {
            return Err(Error::Parse {
                line: 0,
                message: "empty file".into(),
            });
        }
        Self::with_ids(ids, nodes, &links)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("framework v1\n");
        for (id, p) in self.node_ids.iter().zip(&self.nodes) {
            writeln!(s, "node {id} {} {}", p[0], p[1]).unwrap();
        }
        for l in &self.links {
            let (a, b) = (&self.node_ids[l.a], &self.node_ids[l.b]);
            writeln!(s, "link {a} {b} {} {}", l.shift[0], l.shift[1]).unwrap();
        }
        s
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn total_length(&self) -> f64 {
        self.links.iter().map(|l| l.length).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// End points of link `i` in unwrapped cell coordinates.
    pub fn segment(&self, i: usize) -> (Point, Point) {
        let l = &self.links[i];
        let q = add(self.nodes[l.b], [l.shift[0] as f64, l.shift[1] as f64]);
        (self.nodes[l.a], q)
    }

    /// All link translates by `z ∈ [-r, r]²` as `(link, p, q)`.
    pub(crate) fn translates(&self, r: i32) -> Vec<(usize, Point, Point)> {
        let mut out = Vec::new();
        for i in 0..self.links.len() {
            let (p, q) = self.segment(i);
            for z1 in -r..=r {
                for z2 in -r..=r {
                    let z = [z1 as f64, z2 as f64];
                    out.push((i, add(p, z), add(q, z)));
                }
            }
        }
        out
    }

    fn check_intersections(&self) -> Result<(), Error> {
        for i in 0..self.links.len() {
            let (p, q) = self.segment(i);
            for (j, a, b) in self.translates(2) {
                if j < i || (j == i && a == p) {
                    continue;
                }
                match segment_contact(p, q, a, b) {
                    Contact::None | Contact::SharedEnd => {}
                    Contact::Overlap => return Err(Error::InvalidGraph("links overlap".into())),
                    Contact::Interior => {
                        return Err(Error::InvalidGraph("links intersect away from nodes".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Invariance of the periodic node and link sets under rotation by π/2
    /// about the cell centre, up to cell translations.
    pub fn is_quarter_symmetric(&self) -> bool {
        let integral = |d: Point| (d[0] - d[0].round()).abs() <= TOL && (d[1] - d[1].round()).abs() <= TOL;
        let nodes_ok = self
            .nodes
            .iter()
            .all(|&p| self.nodes.iter().any(|&n| integral(sub(rotate_quarter(p), n))));
        nodes_ok
            && (0..self.links.len()).all(|i| {
                let (p, q) = self.segment(i);
                let (rp, rq) = (rotate_quarter(p), rotate_quarter(q));
                (0..self.links.len()).any(|j| {
                    let (a, b) = self.segment(j);
                    let same = |x: Point, y: Point| {
                        let (d1, d2) = (sub(rp, x), sub(rq, y));
                        integral(d1) && norm(sub(d1, d2)) <= TOL
                    };
                    same(a, b) || same(b, a)
                })
            })
    }

    /// Half the smallest distance from a node to a link translate not
    /// incident to it; rods thinner than this overlap only near nodes.
    pub fn overlap_bound(&self) -> f64 {
        let mut best = f64::INFINITY;
        for &n in &self.nodes {
            for z1 in -1..=1 {
                for z2 in -1..=1 {
                    let p = add(n, [z1 as f64, z2 as f64]);
                    for (_, a, b) in self.translates(2) {
                        if norm(sub(p, a)) <= TOL || norm(sub(p, b)) <= TOL {
                            continue;
                        }
                        best = best.min(segment_distance(p, a, b));
                    }
                }
            }
        }
        best / 2.0
    }
}

enum Contact {
    None,
    SharedEnd,
    Overlap,
    Interior,
}

fn segment_contact(p: Point, q: Point, a: Point, b: Point) -> Contact {
    let r = sub(q, p);
    let s = sub(b, a);
    let rs = cross(r, s);
    let ap = sub(a, p);
    let scale = norm(r) * norm(s);
    if rs.abs() <= TOL * scale {
        if cross(ap, r).abs() > TOL * norm(r) {
            return Contact::None;
        }
        let rr = dot(r, r);
        let t0 = dot(ap, r) / rr;
        let t1 = t0 + dot(s, r) / rr;
        let (lo, hi) = (t0.min(t1).max(0.0), t0.max(t1).min(1.0));
        return if (hi - lo) * rr.sqrt() > TOL {
            Contact::Overlap
        } else if hi - lo >= -TOL {
            Contact::SharedEnd
        } else {
            Contact::None
        };
    }
    let t = cross(ap, s) / rs;
    let u = cross(ap, r) / rs;
    let tol_t = TOL / norm(r);
    let tol_u = TOL / norm(s);
    if t < -tol_t || t > 1.0 + tol_t || u < -tol_u || u > 1.0 + tol_u {
        return Contact::None;
    }
    let end_t = t.abs() <= tol_t || (t - 1.0).abs() <= tol_t;
    let end_u = u.abs() <= tol_u || (u - 1.0).abs() <= tol_u;
    if end_t && end_u {
        Contact::SharedEnd
    } else {
        Contact::Interior
    }
}
