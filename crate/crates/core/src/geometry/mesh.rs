use std::collections::HashMap;

use serde::Serialize;

use crate::{Error, Point, Result};

/// Edge of the triangulation with its one or two adjacent triangles.
#[derive(Debug, Clone, Serialize)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// `(triangle, local edge index)`; local edge `k` joins local vertices `k`
    /// and `(k + 1) % 3`.
    pub adjacent: Vec<(usize, usize)>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.adjacent.len() == 1
    }
}

/// Uniform triangulation of `(-1, 1)²` by `N × N` squares, each split along
/// the diagonal joining its upper-left and lower-right corners.
#[derive(Debug, Clone, Serialize)]
pub struct Mesh {
    pub n: usize,
    pub h: f64,
    pub vertices: Vec<Point>,
    /// Integer lattice position `(i, j)` of each vertex.
    pub grid: Vec<[usize; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    /// Global edge id of local edge `k` of each triangle.
    pub triangle_edges: Vec<[usize; 3]>,
}

pub fn build_mesh(n: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "mesh subdivision count must be at least 2, got {n}"
        )));
    }
    let h = 2.0 / n as f64;
    let vid = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    let mut grid = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point::new(
                -1.0 + 2.0 * i as f64 / n as f64,
                -1.0 + 2.0 * j as f64 / n as f64,
            ));
            grid.push([i, j]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push([vid(i, j), vid(i + 1, j), vid(i, j + 1)]);
            triangles.push([vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
        }
    }

    let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut triangle_edges = Vec::with_capacity(triangles.len());
    for (t, tri) in triangles.iter().enumerate() {
        let mut ids = [0; 3];
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            let key = (a.min(b), a.max(b));
            let id = *lookup.entry(key).or_insert_with(|| {
                edges.push(Edge {
                    vertices: [key.0, key.1],
                    adjacent: Vec::with_capacity(2),
                });
                edges.len() - 1
            });
            edges[id].adjacent.push((t, k));
            ids[k] = id;
        }
        triangle_edges.push(ids);
    }

    Ok(Mesh {
        n,
        h,
        vertices,
        grid,
        triangles,
        edges,
        triangle_edges,
    })
}

impl Mesh {
    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let [i, j] = self.grid[v];
        i == 0 || j == 0 || i == self.n || j == self.n
    }

    /// Index of the triangle whose vertices match `points` up to `tol`, if any.
    pub fn find_triangle(&self, points: [Point; 3], tol: f64) -> Option<usize> {
        (0..self.triangles.len()).find(|&t| {
            let tp = self.triangle_points(t);
            points
                .iter()
                .all(|p| tp.iter().any(|q| (p - q).norm() <= tol))
        })
    }
}

/// Signed area of a triangle (positive when counter-clockwise).
pub fn signed_area(p: [Point; 3]) -> f64 {
    let u = p[1] - p[0];
    let v = p[2] - p[0];
    0.5 * (u.x * v.y - u.y * v.x)
}

/// Diameter (longest edge) of a triangle.
pub fn diameter(p: [Point; 3]) -> f64 {
    (p[1] - p[0])
        .norm()
        .max((p[2] - p[1]).norm())
        .max((p[0] - p[2]).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let m = build_mesh(2).unwrap();
        assert_eq!(m.num_triangles(), 8);
        assert_eq!(m.vertices.len(), 9);
        assert_eq!(m.h, 1.0);
        let m = build_mesh(10).unwrap();
        assert_eq!(m.num_triangles(), 200);
        assert!((m.h - 0.2).abs() < 1e-15);
        assert!(build_mesh(1).is_err());
    }

    #[test]
    fn total_area_and_orientation() {
        let m = build_mesh(40).unwrap();
        assert_eq!(m.num_triangles(), 3200);
        let mut total = 0.0;
        for t in 0..m.num_triangles() {
            let a = signed_area(m.triangle_points(t));
            assert!(a > 0.0);
            assert!((a - m.h * m.h / 2.0).abs() < 1e-15);
            total += a;
        }
        assert!((total - 4.0).abs() < 1e-12);
    }

    #[test]
    fn edge_adjacency() {
        let m = build_mesh(7).unwrap();
        let mut boundary = 0;
        for e in &m.edges {
            let on_boundary =
                m.is_boundary_vertex(e.vertices[0]) && m.is_boundary_vertex(e.vertices[1]) && {
                    let a = m.grid[e.vertices[0]];
                    let b = m.grid[e.vertices[1]];
                    (a[0] == b[0] && (a[0] == 0 || a[0] == m.n))
                        || (a[1] == b[1] && (a[1] == 0 || a[1] == m.n))
                };
            if on_boundary {
                assert_eq!(e.adjacent.len(), 1);
                boundary += 1;
            } else {
                assert_eq!(e.adjacent.len(), 2);
            }
        }
        assert_eq!(boundary, 4 * 7);
        // Euler: V - E + F = 1 for a disk
        assert_eq!(
            m.vertices.len() as i64 - m.edges.len() as i64 + m.num_triangles() as i64,
            1
        );
    }
}
