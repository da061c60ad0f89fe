//! Property tests for the geometric, local and global invariants.

use ife::geometry::{classify, cut_triangle, fictitious_element, signed_area};
use ife::localife::{build_block, local_quad_degree, objective};
use ife::polybasis::PolyBasis;
use ife::prelude::*;
use ife::quadrature::{cut_rules, triangle_rule};
use ife::solve::{condition_report, CsrMatrix, DEFAULT_SEED};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = Point> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y)| Point::new(x, y))
}

/// Counter-clockwise triangle with a reasonable shape.
fn triangle() -> impl Strategy<Value = [Point; 3]> {
    (point(), 0.05..0.5f64, 0.0..std::f64::consts::TAU, 0.6..1.6f64, 0.6..1.4f64).prop_map(|(a, h, th, s, open)| {
        let e1 = Point::new(th.cos(), th.sin()) * h;
        let e2 = Point::new((th + open).cos(), (th + open).sin()) * (h * s);
        [a, a + e1, a + e2]
    })
}

fn line_through(t: [Point; 3]) -> impl Strategy<Value = Interface> {
    // a line through an interior point of the triangle
    (0.05..0.9f64, 0.05..0.9f64, 0.0..std::f64::consts::PI).prop_map(move |(u, v, th)| {
        let (u, v) = if u + v < 0.95 { (u, v) } else { (1.0 - u, 1.0 - v) };
        let x = t[0] + (t[1] - t[0]) * u + (t[2] - t[0]) * v;
        let n = Point::new(th.cos(), th.sin());
        Interface::line(n.x, n.y, -n.dot(&x)).unwrap()
    })
}

fn cut_triangle_and_line() -> impl Strategy<Value = ([Point; 3], Interface)> {
    triangle().prop_flat_map(|t| (Just(t), line_through(t)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normals_are_unit(x in point(), r in 0.2..0.9f64, flip in any::<bool>()) {
        let c = Interface::circle(0.1, -0.05, r).unwrap();
        let c = if flip { c.flipped() } else { c };
        prop_assume!((x - Point::new(0.1, -0.05)).norm() > 1e-3);
        prop_assert!((c.normal(x).norm() - 1.0).abs() < 1e-12);
        // the normal points toward the minus side
        let probe = x + c.normal(x) * 1e-6;
        prop_assert!(c.phi(probe) > c.phi(x));
    }

    #[test]
    fn mesh_triangles_are_congruent(n in 2usize..24) {
        let m = build_mesh(n).unwrap();
        for t in 0..m.num_triangles() {
            let a = signed_area(m.triangle_points(t));
            prop_assert!((a - m.h * m.h / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn classification_ignores_vertex_order(n in 4usize..20, r in 0.3..0.9f64) {
        let iface = Interface::circle(0.013, 0.021, r).unwrap();
        let m = build_mesh(n).unwrap();
        let Ok(cls) = classify(&m, &iface) else { return Ok(()) };
        for t in 0..m.num_triangles() {
            let p = m.triangle_points(t);
            let rot = [p[1], p[2], p[0]];
            let Some(a) = cls.cuts[t].as_ref() else {
                prop_assert!(matches!(cut_triangle(&iface, rot, None), Ok(None)));
                continue;
            };
            let b = cut_triangle(&iface, rot, None).unwrap().unwrap();
            for q in a.points {
                prop_assert!(iface.phi(q).abs() <= 1e-12);
                prop_assert!(b.points.iter().any(|x| (x - q).norm() < 1e-13));
            }
        }
    }

    #[test]
    fn fictitious_elements_are_nested((t, iface) in cut_triangle_and_line(), l1 in 1.0..1.9f64, dl in 0.01..0.1f64) {
        let a = fictitious_element(t, l1, &iface, None).unwrap();
        let b = fictitious_element(t, l1 + dl, &iface, None).unwrap();
        let area = signed_area(b.vertices);
        for v in a.vertices {
            // barycentric coordinates of v in the larger element are all positive
            for k in 0..3 {
                let s = signed_area([b.vertices[k], b.vertices[(k + 1) % 3], v]) / area;
                prop_assert!(s > -1e-12);
            }
        }
    }

    #[test]
    fn lagrange_basis_interpolates(t in triangle(), p in 1usize..=4, off in point()) {
        let b = PolyBasis::lagrange(p, t).unwrap();
        // up to about four element diameters away
        let x = t[0] + off * (4.0 * (t[1] - t[0]).norm());
        let sum: f64 = b.eval(x).iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-10);
        for (j, &node) in b.nodes.iter().enumerate() {
            let v = b.eval(node);
            for (i, vi) in v.iter().enumerate() {
                let delta = if i == j { 1.0 } else { 0.0 };
                prop_assert!((vi - delta).abs() < 1e-12, "node {j}, function {i}: {:e}", vi - delta);
            }
        }
    }

    #[test]
    fn triangle_rules_integrate_monomials(d in 1usize..=12, a in 0usize..6, b in 0usize..6) {
        prop_assume!(a + b <= d);
        let r = triangle_rule(d).unwrap();
        let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
        let want = fact(a) * fact(b) / fact(a + b + 2);
        let got = r.integrate(|x| x.x.powi(a as i32) * x.y.powi(b as i32));
        prop_assert!((got - want).abs() <= 1e-11 * want.max(1e-3));
    }

    #[test]
    fn cut_measures_add_up((t, iface) in cut_triangle_and_line(), d in 2usize..10) {
        let cut = cut_triangle(&iface, t, None).unwrap().unwrap();
        let q = cut_rules(&cut, &iface, d).unwrap();
        let area = signed_area(t);
        prop_assert!((q.plus.measure() + q.minus.measure() - area).abs() <= 1e-10 * area);
        let chord = (cut.points[1] - cut.points[0]).norm();
        prop_assert!((q.interface.length() - chord).abs() <= 1e-10 * chord);
    }

    #[test]
    fn circle_cuts_add_up(n in 6usize..20, r in 0.3..0.9f64) {
        let iface = Interface::circle(0.0, 0.0, r).unwrap();
        let m = build_mesh(n).unwrap();
        let Ok(cls) = classify(&m, &iface) else { return Ok(()) };
        let mut length = 0.0;
        for &t in &cls.interface_elements {
            let q = cut_rules(cls.cuts[t].as_ref().unwrap(), &iface, 6).unwrap();
            let area = m.h * m.h / 2.0;
            prop_assert!((q.plus.measure() + q.minus.measure() - area).abs() <= 1e-10 * area);
            for (x, _, nrm) in q.interface.iter() {
                prop_assert!((nrm - iface.normal(x)).norm() < 1e-12);
            }
            length += q.interface.length();
        }
        let circ = std::f64::consts::TAU * r;
        prop_assert!((length - circ).abs() < 1e-10 * circ);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn local_matrices_are_ordered_and_consistent(
        (t, iface) in cut_triangle_and_line(),
        p in 1usize..=3,
        ratio in 1.0..1e4f64,
        seed in any::<u64>(),
    ) {
        let beta = Coefficients::new(1.0, ratio).unwrap();
        let Ok(b) = build_block(t, None, &iface, beta, p, 1.5, None) else { return Ok(()) };
        let n = b.basis.dim();
        prop_assert!((&b.a - b.a.transpose()).amax() <= 1e-12 * b.a.amax());
        prop_assert!((&b.a * &b.cauchy - &b.b).amax() <= 1e-10 * b.b.amax().max(b.a.amax()));
        let mut s = seed;
        for _ in 0..20 {
            let v = DVector::from_fn(n, |_, _| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            });
            let va = v.dot(&(&b.a * &v));
            let vb = v.dot(&(&b.b * &v));
            let tol = 1e-10 * va;
            prop_assert!(beta.ratio() * va <= vb + tol && vb <= va + tol);
        }
    }

    #[test]
    fn cauchy_extension_is_exact_on_lines(
        (t, iface) in cut_triangle_and_line(),
        p in 1usize..=3,
        ratio in 1.0..100.0f64,
        z in proptest::collection::vec(-1.0..1.0f64, 10),
    ) {
        let beta = Coefficients::new(1.0, ratio).unwrap();
        let Ok(b) = build_block(t, None, &iface, beta, p, 1.5, None) else { return Ok(()) };
        let z = &z[..b.basis.dim()];
        let v = &b.cauchy * DVector::from_column_slice(z);
        let quad = cut_rules(&b.fict.cut, &iface, local_quad_degree(p)).unwrap();
        let obj = objective(&b.fict, &b.basis, &quad, beta, v.as_slice(), z, None);
        // scale of the objective for unit coefficients
        let scale = b.a.amax();
        prop_assert!(obj <= 1e-18 * scale.max(1.0), "objective {obj:e}, scale {scale:e}");
    }

    #[test]
    fn assembled_form_matches_quadrature(n in 4usize..9, p in 1usize..=2, seed in any::<u64>()) {
        let iface = Interface::horizontal(0.0731);
        let beta = Coefficients::new(1.0, 3.0).unwrap();
        let data = ExactSolution::constant(0.0).problem_data(&iface, beta);
        let disc = Discretization::build(n, iface, beta, &SchemeConfig::new(p), &data).unwrap();
        let m = disc.dofs.num_dofs;
        let mut s = seed;
        let mut rand_vec = || -> Vec<f64> {
            (0..m)
                .map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect()
        };
        for _ in 0..5 {
            let (u, v) = (rand_vec(), rand_vec());
            let direct = disc.bilinear_form(&u, &v).unwrap();
            let ku = disc.system.k_full.mul_vec(&u);
            let assembled: f64 = ku.iter().zip(&v).map(|(a, b)| a * b).sum();
            // K[i][j] = a_h(ψ_j, ψ_i)
            prop_assert!((direct - assembled).abs() <= 1e-10 * direct.abs().max(assembled.abs()),
                "{direct} vs {assembled}");
        }
    }

    #[test]
    fn condition_numbers_are_scale_free(n in 3usize..12, c in 1e-3..1e3f64) {
        let k = laplacian(n);
        let a = condition_report(&k, EigenMethod::Dense, DEFAULT_SEED).unwrap();
        let b = condition_report(&k.scale(c), EigenMethod::Dense, DEFAULT_SEED).unwrap();
        prop_assert!(a.kappa >= 1.0 && a.kappa_s >= 1.0);
        prop_assert!((a.kappa - b.kappa).abs() <= 1e-8 * a.kappa);
        prop_assert!((a.kappa_s - b.kappa_s).abs() <= 1e-8 * a.kappa_s);
    }
}

fn laplacian(n: usize) -> CsrMatrix {
    let d = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0 + i as f64 * 0.1,
        1 => -1.0,
        _ => 0.0,
    });
    CsrMatrix::from_dense(&d)
}

#[test]
fn contrast_does_not_blow_up_the_extension() {
    let t = [Point::new(0.6, 0.0), Point::new(0.8, 0.0), Point::new(0.6, 0.2)];
    let iface = Interface::horizontal(0.0613);
    let mut ratios = Vec::new();
    for r in [1.0, 10.0, 1e4] {
        let b = build_block(t, None, &iface, Coefficients::new(1.0, r).unwrap(), 2, 1.5, None).unwrap();
        let worst = (0..b.cauchy.ncols()).map(|j| b.cauchy.column(j).norm()).fold(0.0, f64::max);
        ratios.push(worst);
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min < 10.0, "{ratios:?}");
}

#[test]
fn quadrature_order_barely_moves_the_error() {
    let iface = Interface::circle(0.0, 0.0, std::f64::consts::FRAC_PI_4).unwrap().flipped();
    let beta = Coefficients::new(1.0, 2.0).unwrap();
    let exact = ExactSolution::example2(beta, Side::Minus);
    let data = exact.problem_data(&iface, beta);
    let err = |d: usize| {
        let cfg = SchemeConfig { quad_degree: Some(d), ..SchemeConfig::new(2) };
        let disc = Discretization::build(20, iface, beta, &cfg, &data).unwrap();
        let sol = disc.solve().unwrap();
        error_norms(&disc, &sol, &exact).unwrap().l2
    };
    let (a, b) = (err(6), err(8));
    assert!((a - b).abs() < 1e-3 * a, "{a} vs {b}");
}

#[test]
fn sigma1_only_touches_interface_blocks() {
    let iface = Interface::circle(0.0, 0.0, std::f64::consts::FRAC_PI_4).unwrap().flipped();
    let beta = Coefficients::new(1.0, 2.0).unwrap();
    let data = ExactSolution::constant(0.0).problem_data(&iface, beta);
    let base = SchemeConfig::new(1);
    let mut more = base;
    more.penalty.sigma1 *= 4.0;
    let a = Discretization::build(10, iface, beta, &base, &data).unwrap();
    let b = Discretization::build(10, iface, beta, &more, &data).unwrap();
    let (ka, kb) = (a.system.k_full.to_dense(), b.system.k_full.to_dense());
    let mut owned = vec![false; a.dofs.num_dofs];
    for &t in &a.cls.interface_elements {
        for &d in &a.dofs.element_dofs[t] {
            owned[d] = true;
        }
    }
    let mut changed = 0;
    for i in 0..ka.nrows() {
        for j in 0..ka.ncols() {
            if (ka[(i, j)] - kb[(i, j)]).abs() > 1e-12 * ka.amax() {
                assert!(owned[i] && owned[j], "entry ({i}, {j}) changed");
                changed += 1;
            }
        }
    }
    assert!(changed > 0);
}
