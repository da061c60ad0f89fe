use serde::Serialize;

use super::classify::{cut_triangle, TriangleCut};
use super::interface::Interface;
use super::mesh::{diameter, Mesh};
use crate::{Error, Point, Result};

/// Homothetic enlargement of an interface element about its incenter.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FictitiousElement {
    pub parent: Option<usize>,
    pub lambda: f64,
    /// Vertices of the parent element.
    pub parent_vertices: [Point; 3],
    pub vertices: [Point; 3],
    pub incenter: Point,
    /// How the interface cuts the enlarged element.
    pub cut: TriangleCut,
    /// Diameter of the parent element.
    pub h: f64,
}

pub fn incenter(p: [Point; 3]) -> Point {
    let a = (p[2] - p[1]).norm();
    let b = (p[0] - p[2]).norm();
    let c = (p[1] - p[0]).norm();
    (p[0] * a + p[1] * b + p[2] * c) / (a + b + c)
}

/// Fictitious element of the triangle `verts` for scaling factor `lambda`.
pub fn fictitious_element(
    verts: [Point; 3],
    lambda: f64,
    iface: &Interface,
    parent: Option<usize>,
) -> Result<FictitiousElement> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "scaling factor must be at least 1, got {lambda}"
        )));
    }
    let g = incenter(verts);
    let scaled = verts.map(|a| g + (a - g) * lambda);
    let cut = match cut_triangle(iface, scaled, None) {
        Ok(Some(cut)) => cut,
        Ok(None) => {
            return Err(Error::AssumptionViolation(format!(
                "fictitious element of {parent:?} with lambda = {lambda} is not cut by the interface"
            )))
        }
        Err(Error::AssumptionViolation(_)) | Err(Error::GeometricDegeneracy { .. }) => {
            return Err(Error::AssumptionViolation(format!(
                "interface does not cut the fictitious element of {parent:?} on two distinct edges (lambda = {lambda}); reduce lambda"
            )));
        }
        Err(e) => return Err(e),
    };
    if scaled
        .iter()
        .any(|p| p.x < -1.0 || p.x > 1.0 || p.y < -1.0 || p.y > 1.0)
    {
        log::warn!(
            "fictitious element of {parent:?} (lambda = {lambda}) extends outside the domain"
        );
    }
    Ok(FictitiousElement {
        parent,
        lambda,
        parent_vertices: verts,
        vertices: scaled,
        incenter: g,
        cut,
        h: diameter(verts),
    })
}

pub fn fictitious(
    mesh: &Mesh,
    t: usize,
    lambda: f64,
    iface: &Interface,
) -> Result<FictitiousElement> {
    fictitious_element(mesh.triangle_points(t), lambda, iface, Some(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::signed_area;

    fn unit() -> [Point; 3] {
        [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ]
    }

    #[test]
    fn identity_homothety() {
        let iface = Interface::horizontal(0.3);
        let f = fictitious_element(unit(), 1.0, &iface, None).unwrap();
        for k in 0..3 {
            assert_eq!(f.vertices[k], unit()[k]);
        }
    }

    #[test]
    fn right_isoceles_incenter() {
        let g = 1.0 / (2.0 + 2f64.sqrt());
        let c = incenter(unit());
        assert!((c - Point::new(g, g)).norm() < 1e-15);
        let f = fictitious_element(unit(), 1.5, &Interface::horizontal(0.3), None).unwrap();
        let expected = c + (Point::new(0.0, 0.0) - c) * 1.5;
        assert!((f.vertices[0] - expected).norm() < 1e-15);
        assert!((signed_area(f.vertices) - 2.25 * 0.5).abs() < 1e-14);
    }

    #[test]
    fn nested_for_growing_lambda() {
        let iface = Interface::horizontal(0.3);
        let small = fictitious_element(unit(), 1.2, &iface, None).unwrap();
        let large = fictitious_element(unit(), 1.8, &iface, None).unwrap();
        // every vertex of the smaller element is inside the larger one
        for p in small.vertices.iter().chain(unit().iter()) {
            for k in 0..3 {
                let a = large.vertices[k];
                let b = large.vertices[(k + 1) % 3];
                let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
                assert!(cross > 0.0);
            }
        }
    }

    #[test]
    fn rejects_lambda_below_one() {
        assert!(fictitious_element(unit(), 0.9, &Interface::horizontal(0.3), None).is_err());
    }
}
