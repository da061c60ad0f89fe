#![allow(dead_code)]

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use ife::assembly::{Field, GradField};
use ife::prelude::*;

/// Disk of radius π/4 on the minus side with `β = (1, 2)`, and the matching
/// sine/exponential solution.
pub fn example2_setup() -> (Interface, Coefficients, ExactSolution) {
    let iface = Interface::circle(0.0, 0.0, FRAC_PI_4).unwrap().flipped();
    let beta = Coefficients::new(1.0, 2.0).unwrap();
    (iface, beta, ExactSolution::example2(beta, Side::Minus))
}

/// Quadratic `z = a0 + a1 x + a2 y + a3 x² + a4 xy + a5 y²` with its gradient
/// and Laplacian.
fn quadratic(a: [f64; 6]) -> (Field, GradField, Field) {
    (
        Arc::new(move |p: Point| {
            let (x, y) = (p.x, p.y);
            a[0] + a[1] * x + a[2] * y + a[3] * x * x + a[4] * x * y + a[5] * y * y
        }),
        Arc::new(move |p: Point| {
            Point::new(
                a[1] + 2.0 * a[3] * p.x + a[4] * p.y,
                a[2] + a[4] * p.x + 2.0 * a[5] * p.y,
            )
        }),
        Arc::new(move |_| 2.0 * (a[3] + a[5])),
    )
}

/// Piecewise polynomial of degree `p ≤ 2` across the line `y = delta` that
/// satisfies the homogeneous interface conditions and has a continuous
/// source: `z` below the line (plus side) and
/// `v = z + (ρ - 1) (s ∂_y z(x, δ) + s² Δz / 2)` above, `s = y - δ`,
/// `ρ = β⁺/β⁻`.
pub fn cauchy_exact(p: usize, delta: f64, beta: Coefficients) -> ExactSolution {
    let a = if p == 1 {
        [0.3, -0.8, 1.1, 0.0, 0.0, 0.0]
    } else {
        [0.3, -0.8, 1.1, 0.45, -0.6, 0.25]
    };
    let k = beta.ratio() - 1.0;
    let lap = 2.0 * (a[3] + a[5]);
    // ∂_y z(x, δ) = b0 + a4 x
    let b0 = a[2] + 2.0 * a[5] * delta;
    let plus = quadratic(a);
    let (zu, zg) = (plus.0.clone(), plus.1.clone());
    let minus: (Field, GradField, Field) = (
        Arc::new(move |q: Point| {
            let s = q.y - delta;
            zu(q) + k * (s * (b0 + a[4] * q.x) + 0.5 * lap * s * s)
        }),
        Arc::new(move |q: Point| {
            let s = q.y - delta;
            zg(q) + Point::new(k * s * a[4], k * (b0 + a[4] * q.x + lap * s))
        }),
        Arc::new(move |_| lap + k * lap),
    );
    ExactSolution::new("cauchy", plus, minus)
}

/// Largest coefficient deviations of the constant-J_D, constant-J_N and
/// constant-source enrichments on the line `y = 0` from their closed forms
/// `1`, `(c/β⁻) y` and `(c/2) y²`, over `p = 1..=3` (`p ≥ 2` for the source).
pub fn enrichment_deviations() -> [f64; 3] {
    use ife::localife::{build_block, JumpData};
    let beta = Coefficients::new(1.0, 3.0).unwrap();
    let iface = Interface::horizontal(0.0);
    let verts = [Point::new(0.013, -0.031), Point::new(0.113, -0.031), Point::new(0.013, 0.069)];
    let c = 0.7;
    let zero = |_: Point| 0.0;
    let one = |_: Point| 1.0;
    let cn = move |_: Point| c;
    let fp = move |_: Point| c * beta.minus + 5.0;
    let fm = |_: Point| 5.0;
    type Case<'a> = (JumpData<'a>, Box<dyn Fn(Point) -> f64>, usize);
    let cases: [Case; 3] = [
        (
            JumpData { jump_d: &one, jump_n: &zero, f_plus: &zero, f_minus: &zero },
            Box::new(|_| 1.0),
            1,
        ),
        (
            JumpData { jump_d: &zero, jump_n: &cn, f_plus: &zero, f_minus: &zero },
            Box::new(move |x: Point| c / beta.minus * x.y),
            1,
        ),
        (
            JumpData { jump_d: &zero, jump_n: &zero, f_plus: &fp, f_minus: &fm },
            Box::new(move |x: Point| 0.5 * c * x.y * x.y),
            2,
        ),
    ];
    let mut out = [0.0; 3];
    for (k, (data, want, pmin)) in cases.iter().enumerate() {
        for p in *pmin..=3 {
            let b = build_block(verts, None, &iface, beta, p, 1.5, Some(data)).unwrap();
            let alpha = b.enrichment_alpha();
            for (i, &x) in b.basis.nodes.iter().enumerate() {
                out[k] = f64::max(out[k], (alpha[i] - want(x)).abs());
            }
        }
    }
    out
}
