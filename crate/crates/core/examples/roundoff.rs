//! Round-off in the solution of `K_h u = F_h` when the exact discrete
//! solution is known: linear interface, piecewise linear exact solution.
//!
//! Usage: `cargo run --release --example roundoff -- [max_n]`

use ife::analysis::growth_rate;
use ife::prelude::*;
use ife::solve::{dense_solve, roundoff_eta, solve, DenseMethod, SolverKind};

fn main() -> Result<()> {
    let max_n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(160);
    let delta = 1.0 / 640.0;
    let iface = Interface::horizontal(delta).flipped();
    let beta = Coefficients::new(1.0, 2.0)?;
    let exact = ExactSolution::linear(delta, beta);
    let data = exact.problem_data(&iface, beta);
    let mut ns = Vec::new();
    let mut etas = Vec::new();
    for n in (20..=max_n).step_by(20) {
        let disc = Discretization::build(n, iface, beta, &SchemeConfig::new(1), &data)?;
        let u = disc.restrict(&disc.interpolate(&exact));
        let x = solve(&disc.system.k, &disc.system.f, SolverKind::Direct)?.solution;
        let eta = roundoff_eta(&u, &x)?;
        let dense = if disc.num_dofs() <= 3000 {
            let y = dense_solve(&disc.system.k.to_dense(), &disc.system.f, DenseMethod::GaussPivot)?;
            format!("{:.3e}", roundoff_eta(&u, &y)?)
        } else {
            "-".into()
        };
        println!("N={n:3} dofs={:6} eta(cholesky)={eta:.3e} eta(gauss, pivoting)={dense}", disc.num_dofs());
        ns.push(n);
        etas.push(eta);
    }
    println!("eta growth {:.2}", growth_rate(&ns, &etas));
    Ok(())
}
