//! Meshes, level-set interfaces, element classification and fictitious
//! elements.

mod classify;
mod fictitious;
mod interface;
mod mesh;

pub use classify::{
    classify, cut_triangle, dump_json, CutClassification, ElementClass, TriangleCut,
    VERTEX_TOLERANCE,
};
pub use fictitious::{fictitious, fictitious_element, incenter, FictitiousElement};
pub(crate) use interface::arc_angles;
pub use interface::{edge_intersection, Interface, Side};
pub use mesh::{build_mesh, diameter, signed_area, Edge, Mesh};
