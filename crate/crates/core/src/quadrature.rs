//! Quadrature on triangles, curved cut regions, segments and interface arcs.

use crate::geometry::{arc_angles, edge_intersection, Interface, Side, TriangleCut};
use crate::{Error, Point, Result};

/// Largest supported polynomial exactness for volume rules.
pub const MAX_RULE_DEGREE: usize = 24;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if m == 1 {
                p1 = z;
                p0 = 1.0;
            } else {
                for k in 2..=m {
                    let pk = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = pk;
                }
            }
            // p1 = P_m(z), p0 = P_{m-1}(z)
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if m == 1 {
            z = 0.0;
            dp = 1.0;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[m - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[m - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

/// Points and weights; weights may be negative for signed fan decompositions.
#[derive(Debug, Clone, Default)]
pub struct QuadRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }

    /// Map a rule on the reference triangle `(0,0), (1,0), (0,1)` onto `tri`.
    /// Weights pick up the signed area ratio.
    pub fn mapped(&self, tri: [Point; 3]) -> QuadRule {
        let e1 = tri[1] - tri[0];
        let e2 = tri[2] - tri[0];
        let jac = e1.x * e2.y - e1.y * e2.x;
        QuadRule {
            points: self
                .points
                .iter()
                .map(|r| tri[0] + e1 * r.x + e2 * r.y)
                .collect(),
            weights: self.weights.iter().map(|w| w * jac).collect(),
            degree: self.degree,
        }
    }

    pub fn extend(&mut self, other: QuadRule) {
        self.points.extend(other.points);
        self.weights.extend(other.weights);
        self.degree = if self.degree == 0 {
            other.degree
        } else {
            self.degree.min(other.degree)
        };
    }
}

/// Rule on the reference triangle exact for polynomials of total degree `d`.
///
/// Degrees 1 and 2 use the symmetric centroid and three-point rules; higher
/// degrees use a collapsed Gauss-Legendre product rule.
pub fn triangle_rule(d: usize) -> Result<QuadRule> {
    match d {
        0 => Err(Error::InvalidConfig("quadrature degree must be positive".into())),
        1 => Ok(QuadRule {
            points: vec![Point::new(1.0 / 3.0, 1.0 / 3.0)],
            weights: vec![0.5],
            degree: 1,
        }),
        2 => Ok(QuadRule {
            points: vec![
                Point::new(1.0 / 6.0, 1.0 / 6.0),
                Point::new(2.0 / 3.0, 1.0 / 6.0),
                Point::new(1.0 / 6.0, 2.0 / 3.0),
            ],
            weights: vec![1.0 / 6.0; 3],
            degree: 2,
        }),
        d if d <= MAX_RULE_DEGREE => {
            let m = (d + 2).div_ceil(2);
            let (x, w) = gauss_legendre(m);
            let mut points = Vec::with_capacity(m * m);
            let mut weights = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    let u = x[i];
                    let v = x[j];
                    points.push(Point::new(u, (1.0 - u) * v));
                    weights.push(w[i] * w[j] * (1.0 - u));
                }
            }
            Ok(QuadRule {
                points,
                weights,
                degree: d,
            })
        }
        _ => Err(Error::InvalidConfig(format!(
            "quadrature degree {d} exceeds the supported maximum {MAX_RULE_DEGREE}"
        ))),
    }
}

/// Gauss rule on the straight segment `a -> b`, exact for degree `d`.
pub fn segment_rule(a: Point, b: Point, d: usize) -> Result<QuadRule> {
    let len = (b - a).norm();
    if !(len > 0.0) {
        return Err(Error::DegenerateRegion("zero-length segment".into()));
    }
    let (x, w) = gauss_legendre((d + 1).div_ceil(2).max(1));
    Ok(QuadRule {
        points: x.iter().map(|&t| a + (b - a) * t).collect(),
        weights: w.iter().map(|&wi| wi * len).collect(),
        degree: d,
    })
}

/// Rule on a piece of the interface, with unit normals (pointing from the plus
/// to the minus side) stored per point.
#[derive(Debug, Clone, Default)]
pub struct InterfaceRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub normals: Vec<Point>,
}

impl InterfaceRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64, Point)> + '_ {
        self.points
            .iter()
            .zip(&self.weights)
            .zip(&self.normals)
            .map(|((x, w), n)| (*x, *w, *n))
    }

    pub fn length(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(Point, Point) -> f64) -> f64 {
        self.iter().map(|(x, w, n)| w * f(x, n)).sum()
    }
}

/// Rule on the circular arc of radius `r` around `center` from angle `theta0`
/// to `theta1`, with `m` Gauss points. Normals point away from the center.
pub fn arc_rule(center: Point, r: f64, theta0: f64, theta1: f64, m: usize) -> Result<InterfaceRule> {
    let sweep = theta1 - theta0;
    if !(r > 0.0) || sweep == 0.0 {
        return Err(Error::DegenerateRegion("zero-length arc".into()));
    }
    let (x, w) = gauss_legendre(m.max(1));
    let mut rule = InterfaceRule::default();
    for (t, wt) in x.iter().zip(&w) {
        let th = theta0 + t * sweep;
        let n = Point::new(th.cos(), th.sin());
        rule.points.push(center + n * r);
        rule.weights.push(wt * r * sweep.abs());
        rule.normals.push(n);
    }
    Ok(rule)
}

/// Number of Gauss points used along interface pieces for degree `d`.
fn interface_points(d: usize) -> usize {
    d.max(2)
}

/// Rule along the interface between the interface points `from` and `to`.
pub fn interface_piece_rule(iface: &Interface, from: Point, to: Point, d: usize) -> Result<InterfaceRule> {
    match *iface {
        Interface::Line { .. } => {
            let len = (to - from).norm();
            if !(len > 0.0) {
                return Err(Error::DegenerateRegion("zero-length interface segment".into()));
            }
            let (x, w) = gauss_legendre(interface_points(d));
            let n = iface.normal(from);
            Ok(InterfaceRule {
                points: x.iter().map(|&t| from + (to - from) * t).collect(),
                weights: w.iter().map(|&wi| wi * len).collect(),
                normals: vec![n; x.len()],
            })
        }
        Interface::Circle { cx, cy, radius, .. } => {
            let c = Point::new(cx, cy);
            let (t0, dt) = arc_angles(c, from, to);
            let mut rule = arc_rule(c, radius, t0, t0 + dt, interface_points(d))?;
            // recompute normals from the level set so they match grad(phi)
            rule.normals = rule.points.iter().map(|&x| iface.normal(x)).collect();
            Ok(rule)
        }
    }
}

/// Boundary piece of a curved polygon, traversed counter-clockwise.
#[derive(Debug, Clone, Copy)]
pub enum Piece {
    Segment(Point, Point),
    Arc {
        center: Point,
        radius: f64,
        theta0: f64,
        sweep: f64,
    },
}

impl Piece {
    fn interface(iface: &Interface, from: Point, to: Point) -> Piece {
        match *iface {
            Interface::Line { .. } => Piece::Segment(from, to),
            Interface::Circle { cx, cy, radius, .. } => {
                let c = Point::new(cx, cy);
                let (theta0, sweep) = arc_angles(c, from, to);
                Piece::Arc {
                    center: c,
                    radius,
                    theta0,
                    sweep,
                }
            }
        }
    }
}

/// Volume rule for a region bounded by straight segments and circular arcs.
///
/// The region is decomposed into signed fans from the start point of the first
/// piece: a straight piece contributes a triangle, an arc piece a collapsed
/// map `O + s (gamma(t) - O)` with the exact arc parametrization. The identity
/// holds for any closed counter-clockwise boundary, so weights can be negative
/// when the region is not star-shaped from the origin.
pub fn curved_region_rule(pieces: &[Piece], d: usize) -> Result<QuadRule> {
    let origin = match pieces.first() {
        Some(Piece::Segment(a, _)) => *a,
        Some(Piece::Arc {
            center,
            radius,
            theta0,
            ..
        }) => center + Point::new(theta0.cos(), theta0.sin()) * *radius,
        None => return Err(Error::DegenerateRegion("empty region boundary".into())),
    };
    let tri = triangle_rule(d.max(1))?;
    let ms = (d + 2).div_ceil(2);
    let mt = ms + 2;
    let (xs, ws) = gauss_legendre(ms);
    let (xt, wt) = gauss_legendre(mt);
    let mut out = QuadRule {
        degree: d,
        ..Default::default()
    };
    for piece in pieces {
        match *piece {
            Piece::Segment(a, b) => {
                if a == origin || b == origin {
                    continue;
                }
                out.extend(tri.mapped([origin, a, b]));
            }
            Piece::Arc {
                center,
                radius,
                theta0,
                sweep,
            } => {
                for (t, wtt) in xt.iter().zip(&wt) {
                    let th = theta0 + t * sweep;
                    let dir = Point::new(th.cos(), th.sin());
                    let g = center + dir * radius;
                    let dg = Point::new(-th.sin(), th.cos()) * (radius * sweep);
                    let r = g - origin;
                    let det = r.x * dg.y - r.y * dg.x;
                    for (s, wss) in xs.iter().zip(&ws) {
                        out.points.push(origin + r * *s);
                        out.weights.push(wtt * wss * s * det);
                    }
                }
            }
        }
    }
    out.degree = d;
    Ok(out)
}

/// Rules on the two sides of a cut triangle and on the interface inside it.
#[derive(Debug, Clone)]
pub struct CutRegionQuad {
    pub plus: QuadRule,
    pub minus: QuadRule,
    /// Interface piece inside the triangle, oriented from `cut.points[0]` to
    /// `cut.points[1]`.
    pub interface: InterfaceRule,
}

impl CutRegionQuad {
    pub fn side(&self, s: Side) -> &QuadRule {
        match s {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }
}

/// Build volume rules of exactness `d` on both sides of a cut triangle (an
/// element or a fictitious element) and the interface rule on the cut.
pub fn cut_rules(cut: &TriangleCut, iface: &Interface, d: usize) -> Result<CutRegionQuad> {
    let v = cut.vertices;
    let a = cut.lone;
    let next = (a + 1) % 3;
    let prev = (a + 2) % 3;
    let [p, q] = cut.points;
    if (p - q).norm() == 0.0 {
        return Err(Error::AssumptionViolation(
            "interface meets the element at a single point".into(),
        ));
    }
    let lone_region = [
        Piece::Segment(v[a], p),
        Piece::interface(iface, p, q),
        Piece::Segment(q, v[a]),
    ];
    let other_region = [
        Piece::Segment(v[next], v[prev]),
        Piece::Segment(v[prev], q),
        Piece::interface(iface, q, p),
        Piece::Segment(p, v[next]),
    ];
    let lone_rule = curved_region_rule(&lone_region, d)?;
    let other_rule = curved_region_rule(&other_region, d)?;
    let interface = interface_piece_rule(iface, p, q, d)?;
    let (plus, minus) = match cut.lone_side() {
        Side::Plus => (lone_rule, other_rule),
        Side::Minus => (other_rule, lone_rule),
    };
    Ok(CutRegionQuad {
        plus,
        minus,
        interface,
    })
}

/// Gauss rules on segment `a -> b`, split where the interface crosses it.
/// Each part is labelled with its side.
pub fn edge_rules(a: Point, b: Point, iface: &Interface, d: usize) -> Result<Vec<(Side, QuadRule)>> {
    let sa = iface.side(a);
    let sb = iface.side(b);
    if sa == sb {
        return Ok(vec![(sa, segment_rule(a, b, d)?)]);
    }
    let x = edge_intersection(iface, a, b)?;
    let mut out = Vec::with_capacity(2);
    if x != a {
        out.push((sa, segment_rule(a, x, d)?));
    }
    if x != b {
        out.push((sb, segment_rule(x, b, d)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cut_triangle, signed_area};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    fn monomial_exact(a: usize, b: usize) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for m in 1..=12 {
            let (x, w) = gauss_legendre(m);
            for k in 0..2 * m {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((s - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn reference_rules() {
        let r1 = triangle_rule(1).unwrap();
        assert_eq!(r1.len(), 1);
        assert!((r1.measure() - 0.5).abs() < 1e-15);
        let r2 = triangle_rule(2).unwrap();
        assert!((r2.integrate(|x| x.x * x.x) - 1.0 / 12.0).abs() < 1e-15);
        assert!((r2.integrate(|x| x.x * x.y) - 1.0 / 24.0).abs() < 1e-15);
        assert!(triangle_rule(0).is_err());
        assert!(triangle_rule(MAX_RULE_DEGREE + 1).is_err());
    }

    #[test]
    fn degree_sweep_is_exact() {
        for d in 1..=12 {
            let r = triangle_rule(d).unwrap();
            assert!(r.weights.iter().all(|w| *w > 0.0));
            for a in 0..=d {
                for b in 0..=(d - a) {
                    let s = r.integrate(|x| x.x.powi(a as i32) * x.y.powi(b as i32));
                    let e = monomial_exact(a, b);
                    assert!((s - e).abs() <= 1e-11 * e, "d={d} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn arc_length_and_moment() {
        let r = arc_rule(Point::zeros(), 1.0, 0.0, FRAC_PI_2, 8).unwrap();
        assert!((r.length() - FRAC_PI_2).abs() < 1e-12);
        assert!((r.integrate(|x, _| x.x) - 1.0).abs() < 1e-11);
        assert!(arc_rule(Point::zeros(), 1.0, 0.3, 0.3, 4).is_err());
        let e = segment_rule(Point::new(0.0, 0.0), Point::new(0.3, 0.4), 5).unwrap();
        assert!((e.measure() - 0.5).abs() < 1e-15);
        assert!(segment_rule(Point::zeros(), Point::zeros(), 3).is_err());
    }

    fn example_cut() -> (Interface, TriangleCut) {
        let iface = Interface::circle(0.0, 0.0, FRAC_PI_4).unwrap();
        let tri = [
            Point::new(0.6, 0.0),
            Point::new(0.8, 0.0),
            Point::new(0.6, 0.2),
        ];
        (iface, cut_triangle(&iface, tri, None).unwrap().unwrap())
    }

    #[test]
    fn circle_cut_measures_add_up() {
        let (iface, cut) = example_cut();
        let q = cut_rules(&cut, &iface, 8).unwrap();
        assert!((q.plus.measure() + q.minus.measure() - 0.02).abs() < 1e-10 * 0.02);
        // the arc length is r times the angle between the two cut points
        let [p, r] = cut.points;
        let ang = (p.y.atan2(p.x) - r.y.atan2(r.x)).abs();
        assert!((q.interface.length() - FRAC_PI_4 * ang).abs() < 1e-10 * q.interface.length());
        for (x, _, n) in q.interface.iter() {
            assert!((n - iface.normal(x)).norm() < 1e-12);
            assert!((n.norm() - 1.0).abs() < 1e-12);
            assert!(iface.phi(x).abs() < 1e-12);
        }
    }

    /// Recursive bisection oracle for the area of `{phi > 0}` inside a triangle.
    fn subdivision_area(iface: &Interface, t: [Point; 3], depth: usize) -> f64 {
        let inside = t.iter().filter(|p| iface.phi(**p) > 0.0).count();
        let area = signed_area(t).abs();
        if inside == 3 {
            return area;
        }
        if inside == 0 && depth < 12 {
            // a circle can still clip an all-outside triangle; keep refining a little
            let c = (t[0] + t[1] + t[2]) / 3.0;
            if iface.phi(c) <= 0.0 && depth > 4 {
                return 0.0;
            }
        }
        if depth == 0 {
            let c = (t[0] + t[1] + t[2]) / 3.0;
            return if iface.phi(c) > 0.0 { area } else { 0.0 };
        }
        // split the longest edge
        let e = [(t[1] - t[0]).norm(), (t[2] - t[1]).norm(), (t[0] - t[2]).norm()];
        let k = (0..3).max_by(|a, b| e[*a].partial_cmp(&e[*b]).unwrap()).unwrap();
        let a = t[k];
        let b = t[(k + 1) % 3];
        let c = t[(k + 2) % 3];
        let m = (a + b) * 0.5;
        subdivision_area(iface, [a, m, c], depth - 1) + subdivision_area(iface, [m, b, c], depth - 1)
    }

    #[test]
    fn circle_cut_area_matches_subdivision_oracle() {
        let (iface, cut) = example_cut();
        let q = cut_rules(&cut, &iface, 6).unwrap();
        let oracle = subdivision_area(&iface, cut.vertices, 28);
        // bisection error decays like the boundary cell size
        assert!((q.minus.measure() - oracle).abs() < 1e-8, "{} vs {}", q.minus.measure(), oracle);
    }

    #[test]
    fn line_cut_is_exact_polygon() {
        let iface = Interface::horizontal(0.013);
        let tri = [
            Point::new(0.0, 0.0),
            Point::new(0.05, 0.0),
            Point::new(0.0, 0.05),
        ];
        let cut = cut_triangle(&iface, tri, None).unwrap().unwrap();
        let q = cut_rules(&cut, &iface, 4).unwrap();
        // the plus side is the trapezoid below y = 0.013
        let top = 0.05 - 0.013;
        let trap = 0.5 * (0.05 + top) * 0.013;
        assert!((q.plus.measure() - trap).abs() < 1e-16);
        assert!((q.interface.length() - top).abs() < 1e-15);
    }

    #[test]
    fn smooth_integrand_is_stable_under_refinement() {
        let iface = Interface::circle(0.0, 0.0, FRAC_PI_4).unwrap();
        let mesh = crate::geometry::build_mesh(20).unwrap();
        let cls = crate::geometry::classify(&mesh, &iface).unwrap();
        for &t in &cls.interface_elements {
            let cut = cls.cuts[t].unwrap();
            for d in [4, 6] {
                let lo = cut_rules(&cut, &iface, d).unwrap();
                let hi = cut_rules(&cut, &iface, d + 2).unwrap();
                let f = |x: Point| (x.x * x.y).exp();
                assert!((lo.minus.integrate(f) - hi.minus.integrate(f)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cut_monomials_sum_to_whole_triangle() {
        let (iface, cut) = example_cut();
        let whole = triangle_rule(10).unwrap().mapped(cut.vertices);
        let q = cut_rules(&cut, &iface, 10).unwrap();
        for a in 0..=5 {
            for b in 0..=(5 - a) {
                let f = |x: Point| (x.x - 0.7).powi(a) * (x.y - 0.07).powi(b);
                let s = q.plus.integrate(f) + q.minus.integrate(f);
                let e = whole.integrate(f);
                assert!((s - e).abs() < 1e-15 + 1e-11 * e.abs());
            }
        }
    }

    #[test]
    fn edges_split_at_interface() {
        let iface = Interface::horizontal(0.25);
        let parts = edge_rules(Point::new(0.0, 0.0), Point::new(0.0, 1.0), &iface, 3).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].0, Side::Plus);
        assert!((parts[0].1.measure() - 0.25).abs() < 1e-15);
        assert!((parts[1].1.measure() - 0.75).abs() < 1e-15);
    }
}
