//! Local IFE block of one interface element: Cauchy matrix, enrichment for
//! constant jumps, and least-squares residuals.
//!
//! Usage: `cargo run --release --example enrichment -- [p]`

use ife::localife::{build_block, diagnostics_csv, JumpData};
use ife::prelude::*;

fn main() -> Result<()> {
    let p: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let verts = [Point::new(0.0, -0.04), Point::new(0.1, -0.04), Point::new(0.0, 0.06)];
    let iface = Interface::horizontal(0.0);
    let beta = Coefficients::new(1.0, 4.0)?;
    let jd = |_: Point| 1.0;
    let jn = |_: Point| 0.5;
    let f = |_: Point| 0.0;
    let data = JumpData {
        jump_d: &jd,
        jump_n: &jn,
        f_plus: &f,
        f_minus: &f,
    };
    let b = build_block(verts, None, &iface, beta, p, 1.5, Some(&data))?;
    println!("Cauchy matrix (columns: extensions of the Lagrange basis):{:.4}", b.cauchy);
    println!("kappa(A_T) = {:.3e}", b.kappa);
    // expected: 1 + (0.5/4) y on the minus side
    let e = b.enrichment(Side::Minus);
    for x in [Point::new(0.02, 0.01), Point::new(0.05, 0.03)] {
        println!("enrichment at ({}, {}) = {:.12} (closed form {:.12})", x.x, x.y, e.eval(x), 1.0 + 0.125 * x.y);
    }
    print!("{}", diagnostics_csv(&[b]));
    Ok(())
}
