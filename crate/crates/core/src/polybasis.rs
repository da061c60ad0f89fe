//! Degree-`p` polynomial spaces on triangles.
//!
//! Polynomials are stored as coefficient vectors over monomials
//! `xi^a eta^b` with `xi = (x - cx) / s`, `eta = (y - cy) / s`, where `(cx, cy)`
//! is the centroid of the anchor triangle and `s` its diameter. Monomials are
//! ordered by total degree, then by decreasing power of `xi`.

use nalgebra::{DMatrix, DVector};

use crate::geometry::diameter;
use crate::quadrature::QuadRule;
use crate::{Error, Point, Result};

pub const MAX_DEGREE: usize = 4;

pub fn dim(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Exponents `(a, b)` of the monomials of degree at most `p`.
pub fn exponents(p: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim(p));
    for d in 0..=p {
        for b in 0..=d {
            out.push((d - b, b));
        }
    }
    out
}

/// Centered, scaled monomial frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub center: Point,
    pub scale: f64,
}

/// Monomial values and derivatives at one point.
#[derive(Debug, Clone)]
pub struct MonomialValues {
    pub val: Vec<f64>,
    pub grad: Vec<Point>,
    pub lap: Vec<f64>,
}

impl Frame {
    pub fn for_triangle(verts: [Point; 3]) -> Frame {
        Frame {
            center: (verts[0] + verts[1] + verts[2]) / 3.0,
            scale: diameter(verts),
        }
    }

    fn powers(&self, p: usize, x: Point) -> ([f64; MAX_DEGREE + 5], [f64; MAX_DEGREE + 5]) {
        let xi = (x.x - self.center.x) / self.scale;
        let eta = (x.y - self.center.y) / self.scale;
        let mut px = [1.0; MAX_DEGREE + 5];
        let mut py = [1.0; MAX_DEGREE + 5];
        for k in 1..=p {
            px[k] = px[k - 1] * xi;
            py[k] = py[k - 1] * eta;
        }
        (px, py)
    }

    pub fn values(&self, p: usize, x: Point) -> Vec<f64> {
        let (px, py) = self.powers(p, x);
        exponents(p).iter().map(|&(a, b)| px[a] * py[b]).collect()
    }

    pub fn evaluate(&self, p: usize, x: Point) -> MonomialValues {
        let (px, py) = self.powers(p, x);
        let s = self.scale;
        let n = dim(p);
        let mut val = Vec::with_capacity(n);
        let mut grad = Vec::with_capacity(n);
        let mut lap = Vec::with_capacity(n);
        for (a, b) in exponents(p) {
            val.push(px[a] * py[b]);
            let gx = if a > 0 { a as f64 * px[a - 1] * py[b] } else { 0.0 };
            let gy = if b > 0 { b as f64 * px[a] * py[b - 1] } else { 0.0 };
            grad.push(Point::new(gx / s, gy / s));
            let mut l = 0.0;
            if a > 1 {
                l += (a * (a - 1)) as f64 * px[a - 2] * py[b];
            }
            if b > 1 {
                l += (b * (b - 1)) as f64 * px[a] * py[b - 2];
            }
            lap.push(l / (s * s));
        }
        MonomialValues { val, grad, lap }
    }
}

/// A polynomial in a scaled monomial frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub frame: Frame,
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn zero(frame: Frame, degree: usize) -> Poly {
        Poly {
            frame,
            degree,
            coeffs: vec![0.0; dim(degree)],
        }
    }

    pub fn eval(&self, x: Point) -> f64 {
        let m = self.frame.values(self.degree, x);
        m.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn grad(&self, x: Point) -> Point {
        let m = self.frame.evaluate(self.degree, x);
        m.grad
            .iter()
            .zip(&self.coeffs)
            .fold(Point::zeros(), |acc, (g, c)| acc + g * *c)
    }

    pub fn laplacian(&self, x: Point) -> f64 {
        let m = self.frame.evaluate(self.degree, x);
        m.lap.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
    }

    /// Re-express in the same frame at a higher degree.
    pub fn with_degree(&self, degree: usize) -> Poly {
        assert!(degree >= self.degree);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(dim(degree), 0.0);
        Poly {
            frame: self.frame,
            degree,
            coeffs,
        }
    }
}

/// Nodal Lagrange basis of degree `p` on a triangle, on the uniform lattice of
/// the triangle. The basis can be evaluated anywhere in the plane.
#[derive(Debug, Clone)]
pub struct PolyBasis {
    pub p: usize,
    pub frame: Frame,
    pub vertices: [Point; 3],
    pub nodes: Vec<Point>,
    /// Barycentric lattice indices `(k0, k1, k2)`, `k0 + k1 + k2 = p`.
    pub lattice: Vec<[usize; 3]>,
    /// Column `i` holds the monomial coefficients of the `i`-th Lagrange
    /// function.
    pub coeffs: DMatrix<f64>,
}

/// Barycentric lattice of degree `p`; the vertices come first in the order
/// `V0, V1, V2`.
pub fn lattice(p: usize) -> Vec<[usize; 3]> {
    let mut out = vec![[p, 0, 0], [0, p, 0], [0, 0, p]];
    for b in 0..=p {
        for a in 0..=(p - b) {
            let k = [p - a - b, a, b];
            if !out.contains(&k) {
                out.push(k);
            }
        }
    }
    out
}

impl PolyBasis {
    pub fn lagrange(p: usize, verts: [Point; 3]) -> Result<PolyBasis> {
        if !(1..=MAX_DEGREE).contains(&p) {
            return Err(Error::InvalidConfig(format!(
                "polynomial degree must be in 1..={MAX_DEGREE}, got {p}"
            )));
        }
        let frame = Frame::for_triangle(verts);
        let lattice = lattice(p);
        let nodes: Vec<Point> = lattice
            .iter()
            .map(|k| {
                (verts[0] * k[0] as f64 + verts[1] * k[1] as f64 + verts[2] * k[2] as f64)
                    / p as f64
            })
            .collect();
        let v = vandermonde(&frame, p, &nodes);
        let coeffs = v.try_inverse().ok_or_else(|| {
            Error::DegenerateRegion("Vandermonde matrix of a degenerate triangle".into())
        })?;
        Ok(PolyBasis {
            p,
            frame,
            vertices: verts,
            nodes,
            lattice,
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        dim(self.p)
    }

    pub fn eval(&self, x: Point) -> Vec<f64> {
        let m = DVector::from_vec(self.frame.values(self.p, x));
        (self.coeffs.transpose() * m).as_slice().to_vec()
    }

    pub fn grad(&self, x: Point) -> Vec<Point> {
        let m = self.frame.evaluate(self.p, x);
        (0..self.dim())
            .map(|i| {
                (0..self.dim()).fold(Point::zeros(), |acc, k| acc + m.grad[k] * self.coeffs[(k, i)])
            })
            .collect()
    }

    pub fn laplacian(&self, x: Point) -> Vec<f64> {
        let m = self.frame.evaluate(self.p, x);
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|k| m.lap[k] * self.coeffs[(k, i)]).sum())
            .collect()
    }

    /// The polynomial `sum_i alpha_i zeta_i`.
    pub fn combine(&self, alpha: &[f64]) -> Poly {
        let c = &self.coeffs * DVector::from_column_slice(alpha);
        Poly {
            frame: self.frame,
            degree: self.p,
            coeffs: c.as_slice().to_vec(),
        }
    }

    /// Lagrange coefficients (nodal values) of a polynomial given in this
    /// basis' frame.
    pub fn nodal_values(&self, poly: &Poly) -> Vec<f64> {
        self.nodes.iter().map(|&x| poly.eval(x)).collect()
    }

    /// Spectral condition number of the Vandermonde matrix at the nodes.
    pub fn vandermonde_condition(&self) -> f64 {
        let v = vandermonde(&self.frame, self.p, &self.nodes);
        let sv = v.singular_values();
        sv.max() / sv.min()
    }
}

fn vandermonde(frame: &Frame, p: usize, nodes: &[Point]) -> DMatrix<f64> {
    let n = dim(p);
    let mut v = DMatrix::zeros(nodes.len(), n);
    for (j, &x) in nodes.iter().enumerate() {
        for (k, m) in frame.values(p, x).into_iter().enumerate() {
            v[(j, k)] = m;
        }
    }
    v
}

/// `L²` projection of `f` onto polynomials of degree `k` (in `frame`) over the
/// region carried by `rule`.
pub fn l2_project(
    f: &dyn Fn(Point) -> f64,
    rule: &QuadRule,
    frame: Frame,
    k: usize,
) -> Result<Poly> {
    let n = dim(k);
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (x, w) in rule.iter() {
        let m = frame.values(k, x);
        let fx = f(x);
        for i in 0..n {
            rhs[i] += w * fx * m[i];
            for j in 0..n {
                gram[(i, j)] += w * m[i] * m[j];
            }
        }
    }
    let chol = gram.cholesky().ok_or_else(|| {
        Error::DegenerateRegion(format!(
            "Gram matrix of degree {k} projection is singular (region measure {:.3e})",
            rule.measure()
        ))
    })?;
    let c = chol.solve(&rhs);
    Ok(Poly {
        frame,
        degree: k,
        coeffs: c.as_slice().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::triangle_rule;

    fn reference() -> [Point; 3] {
        [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ]
    }

    #[test]
    fn dimensions() {
        for p in 1..=4 {
            assert_eq!(dim(p), (p + 1) * (p + 2) / 2);
            assert_eq!(exponents(p).len(), dim(p));
            assert_eq!(lattice(p).len(), dim(p));
        }
        assert!(PolyBasis::lagrange(5, reference()).is_err());
        assert!(PolyBasis::lagrange(0, reference()).is_err());
    }

    #[test]
    fn linear_at_origin() {
        let b = PolyBasis::lagrange(1, reference()).unwrap();
        let v = b.eval(Point::new(0.0, 0.0));
        assert!((v[0] - 1.0).abs() < 1e-14 && v[1].abs() < 1e-14 && v[2].abs() < 1e-14);
        assert!(b.laplacian(Point::new(0.3, 0.2)).iter().all(|l| l.abs() < 1e-12));
    }

    #[test]
    fn quadratic_at_barycenter() {
        let b = PolyBasis::lagrange(2, reference()).unwrap();
        let v = b.eval(Point::new(1.0 / 3.0, 1.0 / 3.0));
        assert!(v.iter().take(3).all(|x| (x + 1.0 / 9.0).abs() < 1e-13));
        assert!(v.iter().skip(3).all(|x| (x - 4.0 / 9.0).abs() < 1e-13));
        // (1 - x - y)(1 - 2x - 2y) has Laplacian 8
        let lap = b.laplacian(Point::new(0.7, -0.4));
        assert!((lap[0] - 8.0).abs() < 1e-11);
    }

    #[test]
    fn lagrange_property_and_partition_of_unity() {
        let tri = [
            Point::new(0.6, 0.0),
            Point::new(0.8, 0.0),
            Point::new(0.6, 0.2),
        ];
        for p in 1..=4 {
            let b = PolyBasis::lagrange(p, tri).unwrap();
            for (j, &x) in b.nodes.iter().enumerate() {
                let v = b.eval(x);
                for (i, vi) in v.iter().enumerate() {
                    let d = if i == j { 1.0 } else { 0.0 };
                    assert!((vi - d).abs() < 1e-12, "p={p} i={i} j={j}");
                }
            }
            let far = Point::new(3.7, -2.1);
            let s: f64 = b.eval(far).iter().sum();
            assert!((s - 1.0).abs() < 1e-9 * b.eval(far).iter().map(|v| v.abs()).sum::<f64>());
            let g = b.grad(Point::new(0.65, 0.05)).iter().fold(Point::zeros(), |a, g| a + g);
            assert!(g.norm() < 1e-9);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let tri = [
            Point::new(-0.2, 0.1),
            Point::new(0.0, 0.1),
            Point::new(-0.2, 0.3),
        ];
        let b = PolyBasis::lagrange(3, tri).unwrap();
        let step = 1e-6 * b.frame.scale;
        let mut seed = 12345u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let x = Point::new(-0.3 + 0.4 * rnd(), 0.0 + 0.4 * rnd());
            let g = b.grad(x);
            let ex = Point::new(step, 0.0);
            let ey = Point::new(0.0, step);
            let (vpx, vmx) = (b.eval(x + ex), b.eval(x - ex));
            let (vpy, vmy) = (b.eval(x + ey), b.eval(x - ey));
            for i in 0..b.dim() {
                let fd = Point::new((vpx[i] - vmx[i]) / (2.0 * step), (vpy[i] - vmy[i]) / (2.0 * step));
                assert!((fd - g[i]).norm() <= 1e-6 * g[i].norm().max(1.0));
            }
        }
    }

    #[test]
    fn vandermonde_condition_is_scale_free() {
        let kappas: Vec<f64> = [0.2, 0.05, 0.025]
            .iter()
            .map(|&h| {
                let tri = [
                    Point::new(0.3, -0.1),
                    Point::new(0.3 + h, -0.1),
                    Point::new(0.3, -0.1 + h),
                ];
                PolyBasis::lagrange(3, tri).unwrap().vandermonde_condition()
            })
            .collect();
        for k in &kappas {
            assert!((k / kappas[0] - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn projection_reproduces_polynomials() {
        let tri = reference();
        let rule = triangle_rule(8).unwrap().mapped(tri);
        let frame = Frame::for_triangle(tri);
        let c = l2_project(&|_| 2.5, &rule, frame, 2).unwrap();
        assert!((c.coeffs[0] - 2.5).abs() < 1e-12);
        assert!(c.coeffs[1..].iter().all(|v| v.abs() < 1e-11));
        let f = |x: Point| 1.0 + x.x - 3.0 * x.x * x.y + x.y * x.y;
        let pr = l2_project(&f, &rule, frame, 2).unwrap();
        for x in [Point::new(0.1, 0.2), Point::new(2.0, -1.0)] {
            assert!((pr.eval(x) - f(x)).abs() < 1e-11);
        }
    }

    #[test]
    fn projection_matches_normal_equations_oracle() {
        // dense least squares over an independent tensor sampling oracle:
        // minimize sum_q w_q (f - p)^2 with the same weights, solved by QR
        let tri = reference();
        let rule = triangle_rule(8).unwrap().mapped(tri);
        let frame = Frame::for_triangle(tri);
        let f = |x: Point| x.x * x.x * x.x;
        let pr = l2_project(&f, &rule, frame, 2).unwrap();
        let n = dim(2);
        let mut a = DMatrix::zeros(rule.len(), n);
        let mut b = DVector::zeros(rule.len());
        for (q, (x, w)) in rule.iter().enumerate() {
            let sw = w.sqrt();
            for (k, m) in frame.values(2, x).into_iter().enumerate() {
                a[(q, k)] = sw * m;
            }
            b[q] = sw * f(x);
        }
        let qr = a.qr();
        let sol = qr.r().solve_upper_triangular(&(qr.q().transpose() * b)).unwrap();
        for k in 0..n {
            assert!((sol[k] - pr.coeffs[k]).abs() < 1e-10);
        }
    }
}
