//! Crossed-triangle meshes: every subsquare is split into four triangles by
//! its diagonals, so axis-aligned and ±45° lines run along mesh edges.

use super::{FrameworkGraph, Phase, Point, RodRegion};
use crate::error::{invalid, Error};

/// Corners of triangle `k` of the unit subsquare, counter-clockwise, the
/// centre last. Offsets are in units of the subsquare side.
const LOCAL: [[[u8; 2]; 2]; 4] = [
    [[0, 0], [1, 0]],
    [[1, 0], [1, 1]],
    [[1, 1], [0, 1]],
    [[0, 1], [0, 0]],
];

/// Which of the four triangles holds local coordinates `(u, v) ∈ [0,1]²`.
fn local_triangle(u: f64, v: f64) -> usize {
    let below_main = v <= u;
    let below_anti = u + v <= 1.0;
    match (below_main, below_anti) {
        (true, true) => 0,
        (true, false) => 1,
        (false, false) => 2,
        (false, true) => 3,
    }
}

fn barycentric(p: [Point; 3], y: Point) -> [f64; 3] {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let l1 = ((y[0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (y[1] - p[0][1])) / det;
    let l2 = ((p[1][0] - p[0][0]) * (y[1] - p[0][1]) - (y[0] - p[0][0]) * (p[1][1] - p[0][1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// The chain of mesh vertices along one link, from `nodes[a]` to
/// `nodes[b] + shift`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPath {
    pub link: usize,
    pub vertices: Vec<usize>,
    /// Unwrapped positions of `vertices`.
    pub points: Vec<Point>,
}

impl LinkPath {
    pub fn segment_length(&self) -> f64 {
        let d = super::sub(self.points[1], self.points[0]);
        super::norm(d)
    }
}

/// Periodic crossed mesh of the unit cell: `n²` grid vertices followed by
/// `n²` subsquare centres.
#[derive(Debug, Clone)]
pub struct CellMesh {
    n: usize,
    link_paths: Vec<LinkPath>,
    node_vertices: Vec<usize>,
}

impl CellMesh {
    pub fn new(graph: &FrameworkGraph, n: usize) -> Result<Self, Error> {
        if n < 2 || n % 2 != 0 {
            return Err(invalid("n", "cell mesh subdivisions must be even and at least 2"));
        }
        let mut mesh = Self {
            n,
            link_paths: Vec::new(),
            node_vertices: Vec::new(),
        };
        for (i, _) in graph.links().iter().enumerate() {
            let path = mesh.trace(graph, i)?;
            mesh.link_paths.push(path);
        }
        for p in graph.nodes() {
            let v = mesh.vertex_at(*p).ok_or(Error::InvalidGraph("node is not a mesh vertex".into()))?;
            mesh.node_vertices.push(v);
        }
        Ok(mesh)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        2 * self.n * self.n
    }

    pub fn num_triangles(&self) -> usize {
        4 * self.n * self.n
    }

    pub fn grid_vertex(&self, i: i64, j: i64) -> usize {
        let n = self.n as i64;
        (j.rem_euclid(n) * n + i.rem_euclid(n)) as usize
    }

    pub fn centre_vertex(&self, i: i64, j: i64) -> usize {
        self.n * self.n + self.grid_vertex(i, j)
    }

    /// Canonical position in `[0,1)²`.
    pub fn vertex_position(&self, v: usize) -> Point {
        let n = self.n;
        let (k, off) = if v < n * n { (v, 0.0) } else { (v - n * n, 0.5) };
        let (i, j) = (k % n, k / n);
        [(i as f64 + off) / n as f64, (j as f64 + off) / n as f64]
    }

    /// Mesh vertex at `y` (any periodic image), if there is one.
    pub fn vertex_at(&self, y: Point) -> Option<usize> {
        let s = 2.0 * self.n as f64;
        let a = (y[0] * s).round();
        let b = (y[1] * s).round();
        if (y[0] * s - a).abs() > 1e-9 || (y[1] * s - b).abs() > 1e-9 {
            return None;
        }
        let (a, b) = (a as i64, b as i64);
        match (a.rem_euclid(2), b.rem_euclid(2)) {
            (0, 0) => Some(self.grid_vertex(a.div_euclid(2), b.div_euclid(2))),
            (1, 1) => Some(self.centre_vertex(a.div_euclid(2), b.div_euclid(2))),
            _ => None,
        }
    }

    fn trace(&self, graph: &FrameworkGraph, link: usize) -> Result<LinkPath, Error> {
        let (p, q) = graph.segment(link);
        let d = super::sub(q, p);
        let n = self.n as f64;
        let tol = 1e-9;
        let step = if d[1].abs() <= tol {
            [d[0].signum() / n, 0.0]
        } else if d[0].abs() <= tol {
            [0.0, d[1].signum() / n]
        } else if (d[0].abs() - d[1].abs()).abs() <= tol {
            [d[0].signum() / (2.0 * n), d[1].signum() / (2.0 * n)]
        } else {
            return Err(Error::NotAlignable(link));
        };
        let axis = if step[0] != 0.0 { 0 } else { 1 };
        let count = d[axis] / step[axis];
        let m = count.round();
        if (count - m).abs() > tol || m < 1.0 {
            return Err(Error::NotAlignable(link));
        }
        let m = m as usize;
        let mut vertices = Vec::with_capacity(m + 1);
        let mut points = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let y = [p[0] + k as f64 * step[0], p[1] + k as f64 * step[1]];
            let v = self.vertex_at(y).ok_or(Error::NotAlignable(link))?;
            // Axis steps between two centres do not follow a mesh edge.
            if step[0] == 0.0 || step[1] == 0.0 {
                if v >= self.n * self.n {
                    return Err(Error::NotAlignable(link));
                }
            }
            vertices.push(v);
            points.push(y);
        }
        Ok(LinkPath { link, vertices, points })
    }

    pub fn link_paths(&self) -> &[LinkPath] {
        &self.link_paths
    }

    /// Mesh vertex of each graph node.
    pub fn node_vertices(&self) -> &[usize] {
        &self.node_vertices
    }

    /// Vertex indices of triangle `t`, counter-clockwise.
    pub fn triangle(&self, t: usize) -> [usize; 3] {
        let (s, k) = (t / 4, t % 4);
        let (i, j) = ((s % self.n) as i64, (s / self.n) as i64);
        let c = LOCAL[k];
        [
            self.grid_vertex(i + c[0][0] as i64, j + c[0][1] as i64),
            self.grid_vertex(i + c[1][0] as i64, j + c[1][1] as i64),
            self.centre_vertex(i, j),
        ]
    }

    /// Unwrapped corner positions of triangle `t`.
    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let (s, k) = (t / 4, t % 4);
        let (i, j) = ((s % self.n) as f64, (s / self.n) as f64);
        let h = 1.0 / self.n as f64;
        let c = LOCAL[k];
        [
            [(i + c[0][0] as f64) * h, (j + c[0][1] as f64) * h],
            [(i + c[1][0] as f64) * h, (j + c[1][1] as f64) * h],
            [(i + 0.5) * h, (j + 0.5) * h],
        ]
    }

    /// Triangle containing `y` (taken modulo 1) and its barycentric
    /// coordinates.
    pub fn locate(&self, y: Point) -> (usize, [f64; 3]) {
        let n = self.n as f64;
        let y = [y[0].rem_euclid(1.0), y[1].rem_euclid(1.0)];
        let i = ((y[0] * n).floor() as usize).min(self.n - 1);
        let j = ((y[1] * n).floor() as usize).min(self.n - 1);
        let (u, v) = (y[0] * n - i as f64, y[1] * n - j as f64);
        let t = 4 * (j * self.n + i) + local_triangle(u, v);
        (t, barycentric(self.triangle_points(t), y))
    }

    /// Per-triangle phase by centroid distance to the network.
    pub fn classify(&self, region: &RodRegion) -> Vec<Phase> {
        (0..self.num_triangles())
            .map(|t| {
                let p = self.triangle_points(t);
                region.classify_point([(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0])
            })
            .collect()
    }
}

/// Crossed mesh of the unit square with `cells` subsquares per
/// side: `(cells+1)²` grid vertices followed by `cells²` centres.
#[derive(Debug, Clone)]
pub struct SquareMesh {
    cells: usize,
}

impl SquareMesh {
    pub fn new(cells: usize) -> Self {
        Self { cells }
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.cells as f64
    }

    pub fn num_vertices(&self) -> usize {
        (self.cells + 1) * (self.cells + 1) + self.cells * self.cells
    }

    pub fn num_triangles(&self) -> usize {
        4 * self.cells * self.cells
    }

    pub fn grid_vertex(&self, i: usize, j: usize) -> usize {
        j * (self.cells + 1) + i
    }

    pub fn centre_vertex(&self, i: usize, j: usize) -> usize {
        (self.cells + 1) * (self.cells + 1) + j * self.cells + i
    }

    pub fn vertex_position(&self, v: usize) -> Point {
        let g = self.cells + 1;
        let h = self.spacing();
        if v < g * g {
            [(v % g) as f64 * h, (v / g) as f64 * h]
        } else {
            let k = v - g * g;
            [((k % self.cells) as f64 + 0.5) * h, ((k / self.cells) as f64 + 0.5) * h]
        }
    }

    pub fn on_boundary(&self, v: usize) -> bool {
        let g = self.cells + 1;
        if v >= g * g {
            return false;
        }
        let (i, j) = (v % g, v / g);
        i == 0 || j == 0 || i == self.cells || j == self.cells
    }

    /// Subsquare `(i, j)` holding triangle `t`.
    pub fn subsquare(&self, t: usize) -> (usize, usize) {
        let s = t / 4;
        (s % self.cells, s / self.cells)
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        let (i, j) = self.subsquare(t);
        let c = LOCAL[t % 4];
        [
            self.grid_vertex(i + c[0][0] as usize, j + c[0][1] as usize),
            self.grid_vertex(i + c[1][0] as usize, j + c[1][1] as usize),
            self.centre_vertex(i, j),
        ]
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let v = self.triangle(t);
        [
            self.vertex_position(v[0]),
            self.vertex_position(v[1]),
            self.vertex_position(v[2]),
        ]
    }

    /// Triangle containing `x ∈ [0,1]²` and barycentric coordinates.
    pub fn locate(&self, x: Point) -> (usize, [f64; 3]) {
        let n = self.cells as f64;
        let i = ((x[0] * n).floor().max(0.0) as usize).min(self.cells - 1);
        let j = ((x[1] * n).floor().max(0.0) as usize).min(self.cells - 1);
        let (u, v) = (x[0] * n - i as f64, x[1] * n - j as f64);
        let t = 4 * (j * self.cells + i) + local_triangle(u, v);
        (t, barycentric(self.triangle_points(t), x))
    }

    /// Evaluates a nodal field with `comps` interleaved components at `x`.
    pub fn interpolate(&self, values: &[f64], comps: usize, x: Point, out: &mut [f64]) {
        let (t, bary) = self.locate(x);
        let tri = self.triangle(t);
        for (c, o) in out.iter_mut().enumerate().take(comps) {
            *o = (0..3).map(|k| bary[k] * values[tri[k] * comps + c]).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon_area as area;

    #[test]
    fn grid_link_is_four_horizontal_edges() {
        let g = FrameworkGraph::preset("grid").unwrap();
        let m = CellMesh::new(&g, 4).unwrap();
        let p = &m.link_paths()[0];
        assert_eq!(p.vertices.len(), 5);
        assert!((p.segment_length() - 0.25).abs() < 1e-15);
        assert_eq!(p.vertices[0], p.vertices[4]);
    }

    #[test]
    fn diagonal_is_eight_half_diagonals() {
        let g = FrameworkGraph::preset("grid-diag").unwrap();
        let m = CellMesh::new(&g, 4).unwrap();
        // Links 2 and 3 together make the main diagonal.
        let edges: usize = [2, 3].iter().map(|&l| m.link_paths()[l].vertices.len() - 1).sum();
        assert_eq!(edges, 8);
    }

    #[test]
    fn sloped_link_is_rejected() {
        let g = FrameworkGraph::new(vec![[0.0, 0.0]], &[(0, 0, [3, 1])]).unwrap();
        assert!(matches!(CellMesh::new(&g, 4), Err(Error::NotAlignable(0))));
        let grid = FrameworkGraph::preset("grid").unwrap();
        assert!(CellMesh::new(&grid, 3).is_err());
    }

    #[test]
    fn areas_sum_to_one_and_paths_match_lengths() {
        let g = FrameworkGraph::preset("grid-diag").unwrap();
        let m = CellMesh::new(&g, 8).unwrap();
        let total: f64 = (0..m.num_triangles()).map(|t| area(&m.triangle_points(t))).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for (p, l) in m.link_paths().iter().zip(g.links()) {
            let len = p.segment_length() * (p.vertices.len() - 1) as f64;
            assert!((len - l.length).abs() < 1e-12);
        }
        assert_eq!(m.node_vertices(), &[m.grid_vertex(4, 4), m.grid_vertex(0, 0)]);
    }

    #[test]
    fn locate_returns_containing_triangle() {
        let g = FrameworkGraph::preset("grid").unwrap();
        let m = CellMesh::new(&g, 6).unwrap();
        for y in [[0.1, 0.02], [0.93, 0.5], [0.5, 0.99], [0.01, 0.4], [1.3, -0.2]] {
            let (_, b) = m.locate(y);
            assert!(b.iter().all(|&l| l >= -1e-12), "{y:?} {b:?}");
        }
        let s = SquareMesh::new(5);
        for x in [[0.0, 0.0], [1.0, 1.0], [0.33, 0.71]] {
            let (t, b) = s.locate(x);
            assert!(b.iter().all(|&l| l >= -1e-12));
            let p = s.triangle_points(t);
            let back: Vec<f64> = (0..2).map(|c| (0..3).map(|k| b[k] * p[k][c]).sum()).collect();
            assert!((back[0] - x[0]).abs() < 1e-12 && (back[1] - x[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn square_mesh_counts() {
        let s = SquareMesh::new(4);
        assert_eq!(s.num_vertices(), 25 + 16);
        let total: f64 = (0..s.num_triangles()).map(|t| area(&s.triangle_points(t))).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert_eq!((0..s.num_vertices()).filter(|&v| s.on_boundary(v)).count(), 16);
    }
}
