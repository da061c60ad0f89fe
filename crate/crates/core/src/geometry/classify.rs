use serde::Serialize;

use super::interface::{edge_intersection, Interface, Side};
use super::mesh::Mesh;
use crate::{Error, Point, Result};

/// A mesh vertex with `|phi|` below this value is treated as lying on the
/// interface.
pub const VERTEX_TOLERANCE: f64 = 1e-12;

/// How the interface cuts a triangle.
///
/// One vertex (`lone`) lies alone on its side. `points[0]` is the crossing on
/// the edge from `lone` to the next vertex (local edge `lone`), `points[1]` the
/// crossing on the edge from the previous vertex to `lone` (local edge
/// `(lone + 2) % 3`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TriangleCut {
    pub vertices: [Point; 3],
    pub sides: [Side; 3],
    pub lone: usize,
    pub points: [Point; 2],
    pub cut_edges: [usize; 2],
}

impl TriangleCut {
    pub fn lone_side(&self) -> Side {
        self.sides[self.lone]
    }
}

/// Determine whether the triangle `verts` (counter-clockwise) is cut.
///
/// `ids` are reported in degeneracy errors; pass `None` for triangles that are
/// not mesh elements.
pub fn cut_triangle(
    iface: &Interface,
    verts: [Point; 3],
    ids: Option<[usize; 3]>,
) -> Result<Option<TriangleCut>> {
    let mut phis = [0.0; 3];
    for k in 0..3 {
        phis[k] = iface.phi(verts[k]);
        if phis[k].abs() < VERTEX_TOLERANCE {
            return Err(Error::GeometricDegeneracy {
                vertex: ids.map_or(usize::MAX, |i| i[k]),
                point: verts[k],
                phi: phis[k],
            });
        }
    }
    let sides = phis.map(Side::of_level);
    let count_plus = sides.iter().filter(|s| **s == Side::Plus).count();
    if count_plus == 0 || count_plus == 3 {
        for k in 0..3 {
            let t = iface.segment_crossings(verts[k], verts[(k + 1) % 3]);
            if t.iter().any(|&t| t > 0.0 && t < 1.0) {
                return Err(Error::AssumptionViolation(format!(
                    "interface crosses one edge of triangle {:?} twice",
                    ids.unwrap_or([usize::MAX; 3])
                )));
            }
        }
        if let Interface::Circle { cx, cy, sign, .. } = *iface {
            let outside = if sign > 0.0 { 0 } else { 3 };
            if count_plus == outside && point_in_triangle(Point::new(cx, cy), verts) {
                return Err(Error::AssumptionViolation(format!(
                    "interface is enclosed by triangle {:?}",
                    ids.unwrap_or([usize::MAX; 3])
                )));
            }
        }
        return Ok(None);
    }
    let lone = (0..3)
        .find(|&k| sides[k] != sides[(k + 1) % 3] && sides[k] != sides[(k + 2) % 3])
        .expect("mixed signs leave one vertex alone");
    let next = (lone + 1) % 3;
    let prev = (lone + 2) % 3;
    let crossings = iface.segment_crossings(verts[next], verts[prev]);
    if crossings.iter().any(|&t| t > 0.0 && t < 1.0) {
        return Err(Error::AssumptionViolation(format!(
            "interface meets triangle {:?} on more than two points",
            ids.unwrap_or([usize::MAX; 3])
        )));
    }
    let p = edge_intersection(iface, verts[lone], verts[next])?;
    let q = edge_intersection(iface, verts[prev], verts[lone])?;
    Ok(Some(TriangleCut {
        vertices: verts,
        sides,
        lone,
        points: [p, q],
        cut_edges: [lone, prev],
    }))
}

fn point_in_triangle(x: Point, v: [Point; 3]) -> bool {
    let cross = |a: Point, b: Point, c: Point| (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    let d0 = cross(v[0], v[1], x);
    let d1 = cross(v[1], v[2], x);
    let d2 = cross(v[2], v[0], x);
    (d0 >= 0.0 && d1 >= 0.0 && d2 >= 0.0) || (d0 <= 0.0 && d1 <= 0.0 && d2 <= 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ElementClass {
    NonInterface(Side),
    Interface,
}

/// Classification of all triangles and edges of a mesh against an interface.
#[derive(Debug, Clone, Serialize)]
pub struct CutClassification {
    pub classes: Vec<ElementClass>,
    pub cuts: Vec<Option<TriangleCut>>,
    pub interface_elements: Vec<usize>,
    /// Membership of each edge in the set of edges of interface elements.
    pub interface_edges: Vec<bool>,
}

impl CutClassification {
    pub fn is_interface(&self, t: usize) -> bool {
        self.classes[t] == ElementClass::Interface
    }

    pub fn num_interface_elements(&self) -> usize {
        self.interface_elements.len()
    }
}

pub fn classify(mesh: &Mesh, iface: &Interface) -> Result<CutClassification> {
    let mut classes = Vec::with_capacity(mesh.num_triangles());
    let mut cuts = Vec::with_capacity(mesh.num_triangles());
    let mut interface_elements = Vec::new();
    let mut interface_edges = vec![false; mesh.edges.len()];
    for t in 0..mesh.num_triangles() {
        let verts = mesh.triangle_points(t);
        match cut_triangle(iface, verts, Some(mesh.triangles[t]))? {
            Some(cut) => {
                classes.push(ElementClass::Interface);
                cuts.push(Some(cut));
                interface_elements.push(t);
                for &e in &mesh.triangle_edges[t] {
                    interface_edges[e] = true;
                }
            }
            None => {
                classes.push(ElementClass::NonInterface(iface.side(verts[0])));
                cuts.push(None);
            }
        }
    }
    Ok(CutClassification {
        classes,
        cuts,
        interface_elements,
        interface_edges,
    })
}

#[derive(Serialize)]
struct DumpTriangle {
    vertices: [usize; 3],
    class: &'static str,
    intersections: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct Dump {
    n: usize,
    h: f64,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<DumpTriangle>,
}

/// JSON dump of a mesh and its classification for debugging.
pub fn dump_json(mesh: &Mesh, cls: &CutClassification) -> String {
    let dump = Dump {
        n: mesh.n,
        h: mesh.h,
        vertices: mesh.vertices.iter().map(|p| [p.x, p.y]).collect(),
        triangles: (0..mesh.num_triangles())
            .map(|t| DumpTriangle {
                vertices: mesh.triangles[t],
                class: match cls.classes[t] {
                    ElementClass::NonInterface(Side::Plus) => "plus",
                    ElementClass::NonInterface(Side::Minus) => "minus",
                    ElementClass::Interface => "interface",
                },
                intersections: cls.cuts[t]
                    .map(|c| c.points.iter().map(|p| [p.x, p.y]).collect())
                    .unwrap_or_default(),
            })
            .collect(),
    };
    serde_json::to_string(&dump).expect("dump is serializable")
}
