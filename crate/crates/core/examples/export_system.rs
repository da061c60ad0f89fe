//! Assemble the Example 2 system and write `K_h` and `F_h` in Matrix Market
//! format.
//!
//! Usage: `cargo run --release --example export_system -- [N] [p] [dir]`

use std::fs::File;
use std::io::BufWriter;

use ife::prelude::*;
use ife::solve::write_vector;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let p: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let dir = std::path::PathBuf::from(args.get(3).map_or("system", String::as_str));
    std::fs::create_dir_all(&dir)?;
    let iface = Interface::circle(0.0, 0.0, std::f64::consts::FRAC_PI_4)?.flipped();
    let beta = Coefficients::new(1.0, 2.0)?;
    let exact = ExactSolution::example2(beta, Side::Minus);
    let disc = Discretization::build(n, iface, beta, &SchemeConfig::new(p), &exact.problem_data(&iface, beta))?;
    let k = &disc.system.k;
    k.write_matrix_market(BufWriter::new(File::create(dir.join("K.mtx"))?))?;
    write_vector(BufWriter::new(File::create(dir.join("F.mtx"))?), &disc.system.f)?;
    println!(
        "{} unknowns, {} nonzeros, symmetry defect {:.1e}, written to {}",
        k.nrows,
        k.nnz(),
        k.symmetry_defect(),
        dir.display()
    );
    Ok(())
}
