//! Condition number of the local matrix `A_T` as the circle approaches a
//! vertex of the triangle (0.6,0), (0.8,0), (0.6,0.2), for several
//! fictitious-element scalings.
//!
//! Usage: `cargo run --release --example local_conditioning -- [p]`

use ife::localife::{local_condition, local_matrix};
use ife::prelude::*;

fn main() -> Result<()> {
    let p: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let verts = [Point::new(0.6, 0.0), Point::new(0.8, 0.0), Point::new(0.6, 0.2)];
    let beta = Coefficients::new(1.0, 2.0)?;
    let lambdas = [1.0, 1.25, 1.5, 2.0];
    print!("{:>8}", "d_r");
    for l in lambdas {
        print!("  lambda={l:<6}");
    }
    println!();
    for dr in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7] {
        let iface = Interface::circle(0.0, 0.0, 0.8 - dr)?.flipped();
        print!("{dr:>8.0e}");
        for l in lambdas {
            let k = local_condition(&local_matrix(verts, &iface, beta, p, l)?);
            print!("  {k:<13.3e}");
        }
        println!();
    }
    Ok(())
}
