use std::collections::HashMap;

use crate::geometry::{CutClassification, Mesh};
use crate::polybasis::lattice;
use crate::Point;

/// Global numbering of the nodal degrees of freedom.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub p: usize,
    pub element_dofs: Vec<Vec<usize>>,
    pub num_dofs: usize,
    /// Position of each degree of freedom.
    pub points: Vec<Point>,
    /// First `(element, local index)` carrying each degree of freedom.
    pub owners: Vec<(usize, usize)>,
    /// Degrees of freedom of non-interface elements on the outer boundary.
    pub boundary: Vec<bool>,
}

/// Lattice coordinates of the local nodes of triangle `t`, in units of `h/p`.
pub fn node_keys(mesh: &Mesh, t: usize, p: usize) -> Vec<[usize; 2]> {
    let g = mesh.triangles[t].map(|v| mesh.grid[v]);
    lattice(p)
        .iter()
        .map(|k| {
            [
                k[0] * g[0][0] + k[1] * g[1][0] + k[2] * g[2][0],
                k[0] * g[0][1] + k[1] * g[1][1] + k[2] * g[2][1],
            ]
        })
        .collect()
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Merge nodal values across edges shared by two non-interface elements;
/// everything else stays element-local.
pub fn build_dofs(mesh: &Mesh, cls: &CutClassification, p: usize) -> DofMap {
    let n = lattice(p).len();
    let nt = mesh.num_triangles();
    let keys: Vec<Vec<[usize; 2]>> = (0..nt).map(|t| node_keys(mesh, t, p)).collect();
    let mut parent: Vec<usize> = (0..nt * n).collect();
    for (e, edge) in mesh.edges.iter().enumerate() {
        if cls.interface_edges[e] || edge.adjacent.len() != 2 {
            continue;
        }
        let (t1, _) = edge.adjacent[0];
        let (t2, _) = edge.adjacent[1];
        let index: HashMap<[usize; 2], usize> =
            keys[t2].iter().enumerate().map(|(i, k)| (*k, i)).collect();
        for (i, k) in keys[t1].iter().enumerate() {
            if let Some(&j) = index.get(k) {
                let a = find(&mut parent, t1 * n + i);
                let b = find(&mut parent, t2 * n + j);
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let scale = mesh.h / p as f64;
    let top = mesh.n * p;
    let mut id = vec![usize::MAX; nt * n];
    let mut element_dofs = vec![Vec::with_capacity(n); nt];
    let mut points = Vec::new();
    let mut owners = Vec::new();
    let mut boundary = Vec::new();
    for t in 0..nt {
        for i in 0..n {
            let r = find(&mut parent, t * n + i);
            if id[r] == usize::MAX {
                id[r] = points.len();
                let k = keys[t][i];
                points.push(Point::new(-1.0 + k[0] as f64 * scale, -1.0 + k[1] as f64 * scale));
                owners.push((t, i));
                let on_edge = k[0] == 0 || k[1] == 0 || k[0] == top || k[1] == top;
                boundary.push(on_edge && !cls.is_interface(t));
            }
            element_dofs[t].push(id[r]);
        }
    }
    DofMap {
        p,
        element_dofs,
        num_dofs: points.len(),
        points,
        owners,
        boundary,
    }
}
