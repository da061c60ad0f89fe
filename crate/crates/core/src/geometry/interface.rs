use serde::{Deserialize, Serialize};

use crate::{Error, Point, Result};

/// Which subdomain a point belongs to. `Plus` is `{phi < 0}`, `Minus` is
/// `{phi > 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::Plus => 0,
            Side::Minus => 1,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    pub fn of_level(phi: f64) -> Side {
        if phi < 0.0 {
            Side::Plus
        } else {
            Side::Minus
        }
    }
}

/// Level-set description of the interface.
///
/// The unit normal `n = grad(phi)/|grad(phi)|` points from the plus side into
/// the minus side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Interface {
    /// `a x + b y + c = 0`, with `phi = a x + b y + c`.
    Line { a: f64, b: f64, c: f64 },
    /// `phi = sign (|X - center|² - radius²)` with `sign = ±1`; for `sign = 1`
    /// the disk interior is the plus side.
    Circle {
        cx: f64,
        cy: f64,
        radius: f64,
        sign: f64,
    },
}

impl Interface {
    pub fn line(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a * a + b * b > 0.0) || !c.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "line coefficients ({a}, {b}, {c}) do not define a line"
            )));
        }
        Ok(Interface::Line { a, b, c })
    }

    /// The horizontal line `y = delta`; the plus side is `y < delta`.
    pub fn horizontal(delta: f64) -> Self {
        Interface::Line {
            a: 0.0,
            b: 1.0,
            c: -delta,
        }
    }

    pub fn circle(cx: f64, cy: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "circle radius must be positive, got {radius}"
            )));
        }
        Ok(Interface::Circle {
            cx,
            cy,
            radius,
            sign: 1.0,
        })
    }

    /// Same curve with the two sides exchanged.
    pub fn flipped(&self) -> Self {
        match *self {
            Interface::Line { a, b, c } => Interface::Line {
                a: -a,
                b: -b,
                c: -c,
            },
            Interface::Circle {
                cx,
                cy,
                radius,
                sign,
            } => Interface::Circle {
                cx,
                cy,
                radius,
                sign: -sign,
            },
        }
    }

    pub fn phi(&self, p: Point) -> f64 {
        match *self {
            Interface::Line { a, b, c } => a * p.x + b * p.y + c,
            Interface::Circle {
                cx,
                cy,
                radius,
                sign,
            } => {
                let dx = p.x - cx;
                let dy = p.y - cy;
                sign * (dx * dx + dy * dy - radius * radius)
            }
        }
    }

    pub fn grad(&self, p: Point) -> Point {
        match *self {
            Interface::Line { a, b, .. } => Point::new(a, b),
            Interface::Circle { cx, cy, sign, .. } => {
                Point::new(2.0 * (p.x - cx), 2.0 * (p.y - cy)) * sign
            }
        }
    }

    /// Unit normal at `p`, pointing from the plus side to the minus side.
    /// Undefined at the center of a circle.
    pub fn normal(&self, p: Point) -> Point {
        let g = self.grad(p);
        g / g.norm()
    }

    pub fn side(&self, p: Point) -> Side {
        Side::of_level(self.phi(p))
    }

    /// Parameters `t` in `[0, 1]` where the segment `p + t (q - p)` meets the
    /// interface, sorted ascending.
    pub fn segment_crossings(&self, p: Point, q: Point) -> Vec<f64> {
        let d = q - p;
        let fp = self.phi(p);
        match *self {
            Interface::Line { .. } => {
                let fq = self.phi(q);
                let denom = fp - fq;
                if denom == 0.0 {
                    return Vec::new();
                }
                let t = fp / denom;
                if (0.0..=1.0).contains(&t) {
                    vec![t]
                } else {
                    Vec::new()
                }
            }
            Interface::Circle { cx, cy, sign, .. } => {
                let a = d.dot(&d);
                let b = 2.0 * d.dot(&Point::new(p.x - cx, p.y - cy));
                let c = fp * sign;
                let disc = b * b - 4.0 * a * c;
                if a == 0.0 || disc < 0.0 {
                    return Vec::new();
                }
                let sq = disc.sqrt();
                let q = -0.5 * (b + b.signum() * sq);
                let mut roots = Vec::with_capacity(2);
                if q != 0.0 {
                    roots.push(q / a);
                    roots.push(c / q);
                } else {
                    roots.push(0.0);
                }
                roots.retain(|t| (0.0..=1.0).contains(t));
                roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
                roots.dedup();
                roots
            }
        }
    }

    /// Length of the interface inside the segment between two interface points
    /// `p` and `q` (straight for a line, the minor arc for a circle).
    pub fn piece_length(&self, p: Point, q: Point) -> f64 {
        match *self {
            Interface::Line { .. } => (q - p).norm(),
            Interface::Circle { cx, cy, radius, .. } => {
                let (_, dt) = arc_angles(Point::new(cx, cy), p, q);
                radius * dt.abs()
            }
        }
    }
}

/// Start angle and signed sweep (in `(-pi, pi]`) of the minor arc from `p` to
/// `q` around `center`.
pub(crate) fn arc_angles(center: Point, p: Point, q: Point) -> (f64, f64) {
    let t0 = (p.y - center.y).atan2(p.x - center.x);
    let t1 = (q.y - center.y).atan2(q.x - center.x);
    let mut dt = t1 - t0;
    let two_pi = 2.0 * std::f64::consts::PI;
    while dt > std::f64::consts::PI {
        dt -= two_pi;
    }
    while dt <= -std::f64::consts::PI {
        dt += two_pi;
    }
    (t0, dt)
}

/// Point where the interface crosses segment `pq`. Requires a sign change of
/// the level set between the endpoints.
pub fn edge_intersection(iface: &Interface, p: Point, q: Point) -> Result<Point> {
    let fp = iface.phi(p);
    let fq = iface.phi(q);
    if !(fp * fq < 0.0) {
        return Err(Error::NoIntersection);
    }
    let t = match *iface {
        Interface::Line { .. } => fp / (fp - fq),
        Interface::Circle { .. } => {
            let roots = iface.segment_crossings(p, q);
            // with a sign change exactly one root lies in [0, 1]
            match roots.as_slice() {
                [t] => *t,
                [] => return Err(Error::NoIntersection),
                many => {
                    // round-off can push the second root onto an endpoint
                    *many
                        .iter()
                        .min_by(|a, b| {
                            let da = (**a - 0.5).abs();
                            let db = (**b - 0.5).abs();
                            da.partial_cmp(&db).unwrap()
                        })
                        .unwrap()
                }
            }
        }
    };
    let t = t.clamp(0.0, 1.0);
    Ok(p + (q - p) * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn flipping_exchanges_sides() {
        let c = Interface::circle(0.1, 0.0, 0.5).unwrap();
        let f = c.flipped();
        let x = Point::new(0.2, 0.1);
        assert_eq!(c.side(x), Side::Plus);
        assert_eq!(f.side(x), Side::Minus);
        assert!((c.normal(x) + f.normal(x)).norm() < 1e-15);
        let (p, q) = (Point::new(-1.0, 0.0), Point::new(1.0, 0.0));
        assert_eq!(c.segment_crossings(p, q), f.segment_crossings(p, q));
        let l = Interface::horizontal(0.3).flipped();
        assert_eq!(l.side(Point::new(0.0, 0.0)), Side::Minus);
    }

    #[test]
    fn line_intersection_is_affine() {
        let iface = Interface::horizontal(0.3);
        let x = edge_intersection(&iface, Point::new(0.0, 0.0), Point::new(0.0, 1.0)).unwrap();
        assert!((x - Point::new(0.0, 0.3)).norm() < 1e-15);
    }

    #[test]
    fn circle_intersection_on_axis() {
        let iface = Interface::circle(0.0, 0.0, FRAC_PI_4).unwrap();
        let x = edge_intersection(&iface, Point::new(0.6, 0.0), Point::new(0.8, 0.0)).unwrap();
        assert!((x.x - FRAC_PI_4).abs() < 1e-14);
        assert_eq!(x.y, 0.0);
        assert!(iface.phi(x).abs() <= 1e-13 * 0.2);

        let iface = Interface::circle(0.0, 0.0, 0.79).unwrap();
        let x = edge_intersection(&iface, Point::new(0.775, 0.0), Point::new(0.8, 0.0)).unwrap();
        assert!((x.x - 0.79).abs() < 1e-12);
    }

    #[test]
    fn no_sign_change_is_an_error() {
        let iface = Interface::horizontal(2.0);
        let r = edge_intersection(&iface, Point::new(0.0, 0.0), Point::new(0.0, 1.0));
        assert!(matches!(r, Err(Error::NoIntersection)));
    }

    #[test]
    fn normals_are_unit_and_point_to_minus() {
        let iface = Interface::circle(0.1, -0.2, 0.5).unwrap();
        for k in 0..16 {
            let th = k as f64 * 0.4;
            let p = Point::new(0.1 + 0.5 * th.cos(), -0.2 + 0.5 * th.sin());
            let n = iface.normal(p);
            assert!((n.norm() - 1.0).abs() < 1e-14);
            assert_eq!(iface.side(p + n * 1e-3), Side::Minus);
            assert_eq!(iface.side(p - n * 1e-3), Side::Plus);
        }
        let line = Interface::line(1.0, 2.0, 0.3).unwrap();
        assert!((line.normal(Point::zeros()).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_interfaces_rejected() {
        assert!(Interface::line(0.0, 0.0, 1.0).is_err());
        assert!(Interface::circle(0.0, 0.0, 0.0).is_err());
        assert!(Interface::circle(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn circle_segment_double_crossing() {
        let iface = Interface::circle(0.0, 0.0, 0.5).unwrap();
        let t = iface.segment_crossings(Point::new(-1.0, 0.0), Point::new(1.0, 0.0));
        assert_eq!(t.len(), 2);
        assert!((t[0] - 0.25).abs() < 1e-15 && (t[1] - 0.75).abs() < 1e-15);
    }
}
